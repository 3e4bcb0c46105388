#include "oaa/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "oaa/errors.hpp"

namespace oaa {

double psnr(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a.shape(), b.shape(), "psnr");
  const std::size_t n = a.shape().size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  if (sum == 0.0) return kInfinitePsnr;
  const double mse = sum / static_cast<double>(n);
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

std::vector<double> gaussian_kernel(std::size_t size, double sigma) {
  std::vector<double> k(size);
  const double center = (static_cast<double>(size) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - center;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    total += k[i];
  }
  for (double& v : k) v /= total;
  return k;
}

// 'valid' separable filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * plane[y * w + x + i];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const ImageTensor& a, const ImageTensor& b, const SsimParams& params) {
  require_same_shape(a.shape(), b.shape(), "ssim");
  const Shape& s = a.shape();
  if (params.window == 0 || s.height < params.window || s.width < params.window) {
    throw ShapeError("ssim: image smaller than the " + std::to_string(params.window) +
                     "-pixel window");
  }
  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
  const auto kernel = gaussian_kernel(params.window, params.sigma);
  const std::size_t plane = s.pixels();

  double channel_sum = 0.0;
  std::vector<double> pa(plane), pb(plane), paa(plane), pbb(plane), pab(plane);
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      const double va = a[i * s.channels + c];
      const double vb = b[i * s.channels + c];
      pa[i] = va;
      pb[i] = vb;
      paa[i] = va * va;
      pbb[i] = vb * vb;
      pab[i] = va * vb;
    }
    const auto mu_a = filter_valid(pa, s.height, s.width, kernel);
    const auto mu_b = filter_valid(pb, s.height, s.width, kernel);
    const auto e_aa = filter_valid(paa, s.height, s.width, kernel);
    const auto e_bb = filter_valid(pbb, s.height, s.width, kernel);
    const auto e_ab = filter_valid(pab, s.height, s.width, kernel);

    double window_sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i];
      const double mb = mu_b[i];
      const double var_a = e_aa[i] - ma * ma;
      const double var_b = e_bb[i] - mb * mb;
      const double cov = e_ab[i] - ma * mb;
      const double num = (2.0 * (ma * mb) + c1) * (2.0 * cov + c2);
      const double den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
      window_sum += num / den;
    }
    channel_sum += window_sum / static_cast<double>(mu_a.size());
  }
  return channel_sum / static_cast<double>(s.channels);
}

std::size_t histogram_bin(std::uint64_t queries, bool success) {
  if (!success || queries >= kHistogramLimit) return kOverflowBin;
  return static_cast<std::size_t>(queries / kHistogramBinWidth);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {

double mean(const std::vector<double>& values) {
  if (values.empty()) return std::nan("");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

AggregateReport aggregate(std::span<const RunRecord> records) {
  if (records.empty()) throw ConfigError("aggregate: no records");

  // Sorted inputs make the sums independent of record order.
  std::vector<double> queries, l2, psnrs, ssims;
  AggregateReport report;
  report.total = records.size();
  report.histogram.resize(kHistogramBins);
  for (std::size_t i = 0; i < kHistogramBins; ++i) {
    report.histogram[i].lower = i * kHistogramBinWidth;
    if (i != kOverflowBin) report.histogram[i].upper = (i + 1) * kHistogramBinWidth;
  }

  for (const auto& r : records) {
    ++report.histogram[histogram_bin(r.queries, r.success)].count;
    if (!r.success) continue;
    ++report.successes;
    queries.push_back(static_cast<double>(r.queries));
    l2.push_back(r.l2);
    psnrs.push_back(r.psnr);
    if (r.ssim) ssims.push_back(*r.ssim);
  }
  for (auto* v : {&queries, &l2, &psnrs, &ssims}) std::sort(v->begin(), v->end());

  report.success_rate =
      static_cast<double>(report.successes) / static_cast<double>(report.total);
  report.average_queries = mean(queries);
  report.median_queries = median(queries);
  report.average_l2 = mean(l2);
  report.median_l2 = median(l2);
  report.average_psnr = mean(psnrs);
  report.average_ssim = mean(ssims);
  return report;
}

}  // namespace oaa
