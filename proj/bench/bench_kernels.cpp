// Serial reference vs OpenMP path for the data-parallel kernels.
// Arg(0) = serial, Arg(1) = parallel.

#include "mwgan/kernels.hpp"
#include "random_points.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace mwgan;
using namespace mwgan::testing;
using kernels::Exec;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

std::vector<ManifoldPoint> points(GeometryTag tag, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ManifoldPoint> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(random_point(tag, rng));
    return v;
}

const ManifoldPoint& anchor_for(GeometryTag tag) {
    return tag == GeometryTag::HsvProduct ? default_anchors().hsv
           : tag == GeometryTag::Sphere2  ? default_anchors().sphere
                                          : default_anchors().spd;
}

template <GeometryTag Tag>
void BM_EncodeTangentField(benchmark::State& state) {
    const auto px = points(Tag, 256 * 256, 1);
    const TangentBasis basis(anchor_for(Tag));
    std::vector<double> out(px.size() * tangent_dim(Tag));
    for (auto _ : state) {
        kernels::encode_tangent_field(px, basis, out, exec_of(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(px.size()));
}

template <GeometryTag Tag>
void BM_GeodesicCost(benchmark::State& state) {
    const std::size_t n = 256, pixels = 4;
    const auto a = points(Tag, n * pixels, 2), b = points(Tag, n * pixels, 3);
    std::vector<double> cost(n * n);
    for (auto _ : state) {
        kernels::geodesic_cost_matrix(a, b, pixels, cost, exec_of(state));
        benchmark::DoNotOptimize(cost.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(n * n));
}

void BM_RgbToHsv(benchmark::State& state) {
    Rng rng(4);
    std::vector<kernels::Rgb> in(512 * 512);
    for (auto& px : in) px = {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    std::vector<ManifoldPoint> out(in.size());
    for (auto _ : state) {
        kernels::rgb_to_hsv_pixels(in, out, exec_of(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(in.size()));
}

void BM_Matmul(benchmark::State& state) {
    const std::size_t m = 256, k = 128, n = 128;
    Rng rng(5);
    std::vector<double> a(m * k), b(k * n), c(m * n);
    for (double& x : a) x = gaussian(rng);
    for (double& x : b) x = gaussian(rng);
    for (auto _ : state) {
        kernels::matmul(a, b, c, m, k, n, exec_of(state));
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(m * k * n));
}

} // namespace

BENCHMARK(BM_EncodeTangentField<GeometryTag::Sphere2>)->Arg(0)->Arg(1);
BENCHMARK(BM_EncodeTangentField<GeometryTag::Spd3>)->Arg(0)->Arg(1);
BENCHMARK(BM_GeodesicCost<GeometryTag::HsvProduct>)->Arg(0)->Arg(1);
BENCHMARK(BM_GeodesicCost<GeometryTag::Spd3>)->Arg(0)->Arg(1);
BENCHMARK(BM_RgbToHsv)->Arg(0)->Arg(1);
BENCHMARK(BM_Matmul)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
