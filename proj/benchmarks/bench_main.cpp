#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "oaa/attack.hpp"
#include "oaa/metrics.hpp"
#include "oaa/oracle.hpp"
#include "oaa/region.hpp"

namespace {

oaa::ImageTensor noise(oaa::Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(shape.size());
  for (double& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return oaa::ImageTensor(shape, std::move(v));
}

oaa::RegionMask checker(std::size_t h, std::size_t w) {
  oaa::RegionMask m(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) m.set(y, x, (x / 4 + y / 4) % 2 == 0);
  return m;
}

void BM_ApplyStep(benchmark::State& state) {
  auto img = noise({224, 224, 3}, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto old = img[i];
    img.add_clamped(i, 0.2);
    img.restore(i, old);
    i = (i + 7919) % img.shape().size();
  }
}
BENCHMARK(BM_ApplyStep);

void BM_Combine(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const std::vector<oaa::DetectionBox> boxes = {{"a", 0.9, side / 8, side / 8, side / 2, side / 2},
                                                {"b", 0.6, side / 3, side / 4, side - 1, side - 2}};
  const auto saliency = checker(side, side);
  const oaa::RegionConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(oaa::combine(boxes, saliency, cfg, side, side));
}
BENCHMARK(BM_Combine)->Arg(32)->Arg(224);

void BM_MaskToCoordinates(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto mask = checker(side, side);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(oaa::mask_to_coordinates(mask, 3, seed++));
}
BENCHMARK(BM_MaskToCoordinates)->Arg(32)->Arg(224);

void BM_Ssim(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto a = noise({side, side, 3}, 2);
  const auto b = noise({side, side, 3}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(oaa::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(32)->Arg(224);

void BM_RunAttack(benchmark::State& state) {
  const oaa::Shape shape{32, 32, 3};
  const auto support = checker(32, 32);
  auto model = oaa::make_builtin_oracle(5, shape, 10, &support);
  const auto image = noise(shape, 4);
  const auto label = model->predict(image);
  const auto coords = oaa::mask_to_coordinates(support, 3, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(oaa::run_attack(image, *model, coords, oaa::AttackConfig{}, label));
  }
}
BENCHMARK(BM_RunAttack)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
