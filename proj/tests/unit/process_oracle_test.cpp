#include <gtest/gtest.h>

#include "oaa/errors.hpp"
#include "oaa/process_oracle.hpp"
#include "test_support.hpp"

#ifndef OAA_FAKE_ORACLE
#error "OAA_FAKE_ORACLE must point at the fake oracle fixture"
#endif

namespace oaa {
namespace {

std::string server(const std::string& args) { return std::string(OAA_FAKE_ORACLE) + " " + args; }

TEST(Base64, RoundTripsRandomPayloads) {
  std::mt19937_64 rng(1);
  for (std::size_t len = 0; len < 64; ++len) {
    std::vector<std::uint8_t> bytes(len);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    const auto text = wire::base64_encode(bytes);
    EXPECT_EQ(text.size() % 4, 0u);
    EXPECT_EQ(wire::base64_decode(text), bytes);
  }
  EXPECT_EQ(wire::base64_encode(std::vector<std::uint8_t>{'M', 'a'}), "TWE=");
  EXPECT_THROW(wire::base64_decode("abc"), OracleFailure);
  EXPECT_THROW(wire::base64_decode("a*c="), OracleFailure);
}

TEST(WirePixels, LittleEndianFloat32) {
  const ImageTensor img({1, 1, 3}, {0.0, 1.0, 0.5});
  // 0.0f = 00 00 00 00, 1.0f = 00 00 80 3f, 0.5f = 00 00 00 3f
  EXPECT_EQ(wire::encode_pixels(img), wire::base64_encode(std::vector<std::uint8_t>{
                                          0, 0, 0, 0, 0, 0, 0x80, 0x3f, 0, 0, 0, 0x3f}));
  const auto back = wire::decode_pixels(wire::encode_pixels(img));
  EXPECT_EQ(back, (std::vector<float>{0.0f, 1.0f, 0.5f}));
  EXPECT_THROW(wire::decode_pixels(wire::base64_encode(std::vector<std::uint8_t>{1, 2, 3})),
               OracleFailure);
}

TEST(ProcessOracle, OneHotServer) {
  ProcessOracle oracle(server("--mode onehot --classes 4 --width 6 --height 5"));
  EXPECT_EQ(oracle.num_classes(), 4u);
  EXPECT_EQ(oracle.input_shape(), (Shape{5, 6, 3}));
  EXPECT_EQ(oracle.kind(), OracleKind::kExternal);
  const auto probs = oracle.classify(testing::random_image({5, 6, 3}, 0));
  ASSERT_EQ(probs.size(), 4u);
  EXPECT_NEAR(probs[0], 1.0, 1e-5);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(probs[k], 0.0, 1e-5);
  EXPECT_THROW(oracle.classify(ImageTensor({5, 5, 3})), ShapeError);
}

TEST(ProcessOracle, MatchesBuiltinOnFloatExactImages) {
  const Shape s{6, 6, 3};
  ProcessOracle remote(server("--mode builtin --seed 9 --classes 5 --width 6 --height 6"));
  auto local = make_builtin_oracle(9, s, 5);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    // Multiples of 1/256 survive the float32 transport exactly.
    std::vector<double> data(s.size());
    for (double& v : data) v = static_cast<double>(rng() % 257) / 256.0;
    const ImageTensor img(s, std::move(data));
    const auto a = remote.classify(img);
    const auto b = local->classify(img);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(a[k], b[k]);
  }
}

TEST(ProcessOracle, ProtocolViolations) {
  const auto img = testing::random_image({8, 8, 3}, 0);
  for (const char* mode : {"bad-id", "short", "garbage", "bad-sum", "die"}) {
    ProcessOracle oracle(server(std::string("--mode ") + mode));
    EXPECT_THROW(oracle.classify(img), OracleFailure) << mode;
  }
  EXPECT_THROW(ProcessOracle(server("--mode bad-meta")), OracleFailure);
  EXPECT_THROW(ProcessOracle("exit 0"), OracleFailure);
  EXPECT_THROW(ProcessOracle("echo '{\"type\":\"meta\",\"num_classes\":1,\"width\":2,\"height\":2,\"channels\":3}'"),
               OracleFailure);
}

TEST(ProcessOracle, TimeoutIsAFailure) {
  EXPECT_THROW(ProcessOracle("sleep 5", std::chrono::milliseconds(200)), OracleFailure);
}

TEST(Conformance, WellBehavedServerPasses) {
  const auto report = run_conformance(server("--mode builtin --seed 3 --classes 7"));
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.checks.size(), 7u);  // handshake + 6 queries
  for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Conformance, BrokenServersFail) {
  for (const char* mode : {"bad-id", "short", "garbage", "bad-sum", "die", "bad-meta"}) {
    const auto report = run_conformance(server(std::string("--mode ") + mode));
    EXPECT_FALSE(report.passed()) << mode;
  }
  EXPECT_FALSE(run_conformance("exit 3").passed());
}

}  // namespace
}  // namespace oaa
