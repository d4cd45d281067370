#include <benchmark/benchmark.h>

#include "uavpheno/localization.hpp"
#include "uavpheno/synthetic.hpp"

namespace uavpheno {
namespace {

struct Field {
  FieldSpec spec;
  std::vector<PixelCoord> zset;
  PlantConfiguration x0;
  RowColumnAssignment assign;
};

const Field& default_field() {
  static const Field f = [] {
    Field out;
    out.zset = build_pixel_set(generate_field(out.spec).truth.mask);
    out.x0 = nominal_grid(out.spec, &out.assign);
    return out;
  }();
  return f;
}

void BM_CostMap(benchmark::State& state) {
  const Field& f = default_field();
  const PriorEntry prior = prior_params(f.x0, f.assign, 9, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cost_map(9, f.zset, f.x0, 10.0, prior, LocalizationMode::Full,
                                      static_cast<int>(state.range(0)), f.spec.width,
                                      f.spec.height, static_cast<int>(state.range(1))));
  }
}
BENCHMARK(BM_CostMap)->Args({40, 1})->Args({40, 4})->Unit(benchmark::kMillisecond);

void BM_IcdFull(benchmark::State& state) {
  const Field& f = default_field();
  IcdConfig cfg;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        icd_optimize(f.zset, f.x0, f.assign, cfg, f.spec.width, f.spec.height));
  }
}
BENCHMARK(BM_IcdFull)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace
}  // namespace uavpheno
