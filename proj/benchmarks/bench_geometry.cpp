#include <benchmark/benchmark.h>

#include "uavpheno/lens.hpp"
#include "uavpheno/orientation.hpp"
#include "uavpheno/rng.hpp"

namespace uavpheno {
namespace {

SmacCamera bench_camera(int width, int height) {
  SmacCamera cam;
  cam.sensor_width = width;
  cam.sensor_height = height;
  cam.pixel_pitch = 0.004;
  cam.focal = 24.0;
  const double r2 = 0.25 * 0.004 * 0.004 * (width * width + height * height);
  cam.k1 = -0.05 / r2;
  cam.p1 = 2e-5;
  return cam;
}

void BM_InvertCorrection(benchmark::State& state) {
  const SmacCamera cam = bench_camera(6000, 4000);
  Rng rng(1);
  std::vector<ImagePointMm> pts(1024);
  for (auto& p : pts) {
    p = correct_point({rng.uniform(-12, 12), rng.uniform(-8, 8)}, cam);
  }
  for (auto _ : state) {
    for (const auto& p : pts) {
      benchmark::DoNotOptimize(invert_correction(p, cam));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_InvertCorrection);

void BM_UndistortImage(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const SmacCamera cam = bench_camera(side, side);
  RasterImage img(side, side, 3);
  for (std::size_t k = 0; k < img.samples().size(); ++k) {
    img.samples()[k] = static_cast<std::uint8_t>(k * 31 % 256);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(undistort_image(img, cam, static_cast<int>(state.range(1))));
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_UndistortImage)->Args({512, 1})->Args({512, 4})->Unit(benchmark::kMillisecond);

void BM_RansacRop(benchmark::State& state) {
  const Similarity2D truth{1.04, 0.35, {37.5, -12.25}};
  Rng rng(7);
  std::vector<Correspondence2D> m;
  const int n = static_cast<int>(state.range(0));
  for (int k = 0; k < n; ++k) {
    const Point2 a{rng.uniform(0, 1000), rng.uniform(0, 1000)};
    m.push_back({a, k % 10 < 7 ? truth.apply(a) : Point2{rng.uniform(0, 1000), rng.uniform(0, 1000)}});
  }
  RansacOptions opts;
  opts.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ransac_rop(m, opts));
  }
}
BENCHMARK(BM_RansacRop)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace uavpheno
