#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oaa/oracle.hpp"

namespace oaa {

namespace wire {

/// Little-endian float32 pixels, base64 encoded.
std::string encode_pixels(const ImageTensor& image);
/// Throws OracleFailure on malformed base64 or a length that is not a
/// whole number of floats.
std::vector<float> decode_pixels(std::string_view base64);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace wire

/// `sh -c <command>` with its stdin and stdout connected to pipes. stderr is
/// inherited. The child is reaped on destruction.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  /// Writes `line` plus '\n'. Throws OracleFailure if the child is gone.
  void write_line(std::string_view line);
  /// Next line without its terminator. std::nullopt on EOF. Throws
  /// OracleFailure on timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  int pid() const { return pid_; }

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Oracle served by a child process over newline-delimited JSON:
///
///   -> {"type":"meta"}
///   <- {"type":"meta","num_classes":K,"width":W,"height":H,"channels":3}
///   -> {"type":"classify","id":N,"pixels":"<base64 f32le>"}
///   <- {"type":"probs","id":N,"values":[K numbers]}
///
/// One request in flight per handle; not safe for concurrent callers. Any
/// malformed reply, id or length mismatch raises OracleFailure.
class ProcessOracle final : public Oracle {
 public:
  static constexpr std::chrono::milliseconds kDefaultTimeout{120'000};

  explicit ProcessOracle(const std::string& command,
                         std::chrono::milliseconds timeout = kDefaultTimeout);

  ProbabilityVector classify(const ImageTensor& image) override;
  std::size_t num_classes() const override { return num_classes_; }
  Shape input_shape() const override { return shape_; }
  OracleKind kind() const override { return OracleKind::kExternal; }

 private:
  std::string request(std::string_view line);

  ChildProcess child_;
  std::chrono::milliseconds timeout_;
  std::size_t num_classes_ = 0;
  Shape shape_;
  std::uint64_t next_id_ = 1;
};

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;
  bool passed() const;
};

/// Replays a fixed transcript against an oracle server: handshake, then
/// all-zero, all-one, mid-gray and seeded random images, then the all-zero
/// image again to check determinism. Every reply is checked for type, echoed
/// id, vector length and normalization. Never throws for server misbehavior;
/// failures land in the report.
ConformanceReport run_conformance(const std::string& command,
                                  std::chrono::milliseconds timeout = ProcessOracle::kDefaultTimeout);

}  // namespace oaa
