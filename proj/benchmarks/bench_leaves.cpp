#include <benchmark/benchmark.h>

#include "uavpheno/morphology.hpp"
#include "uavpheno/segmentation.hpp"
#include "uavpheno/synthetic.hpp"

namespace uavpheno {
namespace {

void BM_SegmentLeaves(benchmark::State& state) {
  const SyntheticField field = generate_field(FieldSpec{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(segment_leaves(field.image, SegmentationThresholds{}));
  }
  state.SetItemsProcessed(state.iterations() * field.image.width() * field.image.height());
}
BENCHMARK(BM_SegmentLeaves)->Unit(benchmark::kMillisecond);

void BM_DensityHeatmap(benchmark::State& state) {
  const SyntheticField field = generate_field(FieldSpec{});
  const int window = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(density_heatmap(field.truth.mask, window));
  }
}
BENCHMARK(BM_DensityHeatmap)->Arg(41)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_IndividualLeaves(benchmark::State& state) {
  const LeafMask mask = rasterize(400, 320, rotated_leaves(20, 40, 8, 80));
  for (auto _ : state) {
    benchmark::DoNotOptimize(segment_individual_leaves(mask, MorphologyConfig{}));
  }
}
BENCHMARK(BM_IndividualLeaves)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace uavpheno
