#pragma once

#include "mwgan/geometry.hpp"
#include "mwgan/imaging.hpp"
#include "mwgan/kernels.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mwgan {

// Weighted empirical distribution. Each item is `pixels_per_item` consecutive
// points of `points` (1 for plain point clouds, H*W for images).
struct SampleSet {
    GeometryTag tag = GeometryTag::HsvProduct;
    std::size_t pixels_per_item = 1;
    std::vector<ManifoldPoint> points;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }

    // Throws ShapeError/DataError/GeometryError on a broken invariant.
    void validate() const;

    static SampleSet uniform(GeometryTag tag, std::vector<ManifoldPoint> points, std::size_t pixels_per_item = 1);
};

// Stacks same-shaped images into one uniform set.
SampleSet sample_set_from_images(std::span<const ManifoldImage> images);

struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; // row-major

    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

enum class GroundCost {
    Geodesic, // c(x, y) = product geodesic distance
    Anchored, // c(x, y) = |log_a(x) - log_a(y)| in basis coordinates at a fixed anchor
};

// Antipodal sphere pairs (or points antipodal to the anchor) throw GeometryError.
CostMatrix cost_matrix(const SampleSet& a, const SampleSet& b, GroundCost ground = GroundCost::Geodesic,
                       const std::optional<ManifoldPoint>& anchor = std::nullopt,
                       kernels::Exec exec = kernels::Exec::Parallel);

struct TransportPlan {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> gamma; // row-major
    std::vector<double> source_weights;
    std::vector<double> target_weights;
    double cost = 0.0;
    bool converged = true;
    std::size_t iterations = 0;

    double operator()(std::size_t i, std::size_t j) const { return gamma[i * cols + j]; }
    // Sum of absolute row- and column-marginal violations.
    double marginal_error() const;
};

// Tolerance on |sum(wa) - sum(wb)| and on each weight vector summing to 1.
inline constexpr double kWeightSumTol = 1e-9;

// Optimal coupling. Uniform square instances go through the Hungarian method;
// everything else through a transportation-tree network simplex with Bland's rule.
TransportPlan solve_w1_exact(const CostMatrix& cost, std::span<const double> wa, std::span<const double> wb);

// Assignment problem: perm[i] = column matched to row i, minimizing sum c(i, perm[i]).
std::vector<std::size_t> solve_assignment(const CostMatrix& cost);

// Network simplex only, regardless of the instance shape.
TransportPlan solve_transportation_simplex(const CostMatrix& cost, std::span<const double> wa,
                                           std::span<const double> wb);

inline constexpr double kSinkhornMarginalTol = 1e-6;

// Log-domain entropic OT with epsilon annealing. Stops once the marginal violation is below
// kSinkhornMarginalTol; otherwise returns with converged = false.
TransportPlan solve_w1_sinkhorn(const CostMatrix& cost, std::span<const double> wa, std::span<const double> wb,
                                double epsilon, std::size_t max_iter = 10000);

enum class W1Method { Auto, Exact, Sinkhorn };

W1Method parse_w1_method(std::string_view name);
std::string_view w1_method_name(W1Method m);

// Auto uses the exact solver up to this many cost entries.
inline constexpr std::size_t kExactEntryLimit = 250000;

struct W1Options {
    W1Method method = W1Method::Auto;
    GroundCost ground = GroundCost::Geodesic;
    std::optional<ManifoldPoint> anchor; // Anchored cost only; defaults to the geometry's anchor
    double epsilon = 0.0;                // Sinkhorn; 0 selects 0.01 * mean cost
    std::size_t max_iter = 10000;
    kernels::Exec exec = kernels::Exec::Parallel;
};

struct W1Result {
    double value = 0.0;
    W1Method method = W1Method::Exact;
    TransportPlan plan;
};

W1Result w1_detailed(const SampleSet& a, const SampleSet& b, const W1Options& opts = {});
// As w1_detailed(...).value, but throws ConvergenceError if Sinkhorn hit its cap.
double w1(const SampleSet& a, const SampleSet& b, const W1Options& opts = {});

} // namespace mwgan
