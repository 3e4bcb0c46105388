#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oaa/tensor.hpp"

namespace oaa {

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE) over [0, 1] pixels; kInfinitePsnr for identical images.
double psnr(const ImageTensor& a, const ImageTensor& b);

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Gaussian-windowed SSIM computed per channel over every fully contained
/// window position, averaged over windows and channels. Throws ShapeError on
/// mismatched shapes or images smaller than the window.
double ssim(const ImageTensor& a, const ImageTensor& b, const SsimParams& params = {});

struct RunRecord {
  std::string image_id;
  bool success = false;
  std::uint64_t queries = 0;
  double l2 = 0.0;
  double psnr = 0.0;
  std::optional<double> ssim;
};

inline constexpr std::uint64_t kHistogramBinWidth = 200;
inline constexpr std::uint64_t kHistogramLimit = 5000;
/// 25 regular bins plus the overflow bin.
inline constexpr std::size_t kHistogramBins = kHistogramLimit / kHistogramBinWidth + 1;
inline constexpr std::size_t kOverflowBin = kHistogramBins - 1;

/// [0,200), [200,400), ..., [4800,5000); queries >= 5000 and every failed
/// run land in kOverflowBin.
std::size_t histogram_bin(std::uint64_t queries, bool success);

struct HistogramBin {
  std::uint64_t lower = 0;
  std::optional<std::uint64_t> upper;  // empty for the overflow bin
  std::uint64_t count = 0;
};

/// Query, L2, PSNR and SSIM statistics cover successful runs only;
/// success_rate and the histogram cover every record. Statistics over an
/// empty population are NaN.
struct AggregateReport {
  std::size_t total = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double average_queries = 0.0;
  double median_queries = 0.0;
  double average_l2 = 0.0;
  double median_l2 = 0.0;
  double average_psnr = 0.0;
  double average_ssim = 0.0;
  std::vector<HistogramBin> histogram;
};

/// Midpoint of the two central order statistics for even counts.
double median(std::vector<double> values);

/// Throws ConfigError on an empty list.
AggregateReport aggregate(std::span<const RunRecord> records);

}  // namespace oaa
