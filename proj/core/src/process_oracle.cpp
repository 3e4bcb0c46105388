#include "oaa/process_oracle.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "oaa/errors.hpp"

extern char** environ;

namespace oaa {

namespace wire {

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw OracleFailure("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw OracleFailure("invalid base64 payload");
  // EVP_DecodeBlock counts padding as decoded zero bytes.
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

std::string encode_pixels(const ImageTensor& image) {
  const auto data = image.data();
  std::vector<std::uint8_t> bytes(data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(data[i]));
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

std::vector<float> decode_pixels(std::string_view base64) {
  const auto bytes = base64_decode(base64);
  if (bytes.size() % 4 != 0) throw OracleFailure("pixel payload is not a whole number of floats");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

}  // namespace wire

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

[[noreturn]] void fail_errno(const std::string& what) {
  throw OracleFailure(what + ": " + std::strerror(errno));
}

}  // namespace

ChildProcess::ChildProcess(const std::string& command) {
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) fail_errno("pipe");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    fail_errno("pipe");
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char**>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    errno = rc;
    fail_errno("cannot spawn '" + command + "'");
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ChildProcess::~ChildProcess() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ <= 0) return;
  // Closing stdin asks a well-behaved server to exit; give it a moment.
  for (int i = 0; i < 100; ++i) {
    if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
}

void ChildProcess::write_line(std::string_view line) {
  std::string payload(line);
  payload.push_back('\n');
  std::size_t off = 0;
  while (off < payload.size()) {
    const ssize_t n = ::write(to_child_, payload.data() + off, payload.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_errno("oracle process write failed");
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> ChildProcess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw OracleFailure("oracle process timed out");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail_errno("poll on oracle process");
    }
    if (ready == 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_errno("oracle process read failed");
    }
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

namespace {

nlohmann::json parse_reply(const std::string& line, std::string_view expected_type) {
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw OracleFailure("protocol violation: reply is not JSON: " + line.substr(0, 200));
  }
  if (!reply.is_object() || !reply.contains("type") || !reply["type"].is_string() ||
      reply["type"].get<std::string>() != expected_type) {
    throw OracleFailure("protocol violation: expected a '" + std::string(expected_type) +
                        "' reply, got: " + line.substr(0, 200));
  }
  return reply;
}

std::size_t positive_field(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer() || it->get<std::int64_t>() <= 0) {
    throw OracleFailure(std::string("protocol violation: handshake field '") + key +
                        "' missing or not a positive integer");
  }
  return static_cast<std::size_t>(it->get<std::int64_t>());
}

}  // namespace

ProcessOracle::ProcessOracle(const std::string& command, std::chrono::milliseconds timeout)
    : child_(command), timeout_(timeout) {
  const auto meta = parse_reply(request(R"({"type":"meta"})"), "meta");
  num_classes_ = positive_field(meta, "num_classes");
  shape_.width = positive_field(meta, "width");
  shape_.height = positive_field(meta, "height");
  shape_.channels = positive_field(meta, "channels");
  if (num_classes_ < 2) throw OracleFailure("protocol violation: num_classes must be >= 2");
  if (shape_.channels != 3) throw OracleFailure("protocol violation: channels must be 3");
}

std::string ProcessOracle::request(std::string_view line) {
  child_.write_line(line);
  auto reply = child_.read_line(timeout_);
  if (!reply) throw OracleFailure("oracle process closed its output");
  return *std::move(reply);
}

ProbabilityVector ProcessOracle::classify(const ImageTensor& image) {
  require_same_shape(image.shape(), shape_, "external oracle input");
  const std::uint64_t id = next_id_++;
  const nlohmann::json query = {
      {"type", "classify"}, {"id", id}, {"pixels", wire::encode_pixels(image)}};
  const auto reply = parse_reply(request(query.dump()), "probs");

  const auto id_it = reply.find("id");
  if (id_it == reply.end() || !id_it->is_number_unsigned() || id_it->get<std::uint64_t>() != id) {
    throw OracleFailure("protocol violation: reply id does not echo request " + std::to_string(id));
  }
  const auto values_it = reply.find("values");
  if (values_it == reply.end() || !values_it->is_array() || values_it->size() != num_classes_) {
    throw OracleFailure("protocol violation: expected " + std::to_string(num_classes_) +
                        " probabilities");
  }
  std::vector<double> values;
  values.reserve(num_classes_);
  for (const auto& v : *values_it) {
    if (!v.is_number()) throw OracleFailure("protocol violation: non-numeric probability");
    values.push_back(v.get<double>());
  }
  return ProbabilityVector(std::move(values));
}

}  // namespace oaa
