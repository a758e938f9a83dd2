#pragma once

// Data-parallel inner loops. Every kernel has a serial reference path and an
// OpenMP path computing each output element with identical arithmetic, so the
// two agree bit-for-bit; tests and bench/ compare them.

#include "mwgan/geometry.hpp"

#include <array>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>

namespace mwgan::kernels {

enum class Exec { Serial, Parallel };

// Runs body(i) for i in [0, n). Exceptions thrown by the body are captured and
// the first one is rethrown after the loop, in both modes.
template <class Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
    if (exec == Exec::Serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

// out[p * dim + k] = k-th basis coordinate of log_anchor(pixels[p]).
void encode_tangent_field(std::span<const ManifoldPoint> pixels, const TangentBasis& basis, std::span<double> out,
                          Exec exec = Exec::Parallel);
// out[p] = exp_anchor(basis lift of coords[p * dim .. p * dim + dim)).
void decode_tangent_field(std::span<const double> coords, const TangentBasis& basis, std::span<ManifoldPoint> out,
                          Exec exec = Exec::Parallel);

using Rgb = std::array<double, 3>;

void rgb_to_hsv_pixels(std::span<const Rgb> in, std::span<ManifoldPoint> out, Exec exec = Exec::Parallel);
void hsv_to_rgb_pixels(std::span<const ManifoldPoint> in, std::span<Rgb> out, Exec exec = Exec::Parallel);

// Single-pixel conversions shared by both paths.
ManifoldPoint rgb_to_hsv_pixel(const Rgb& rgb);
Rgb hsv_to_rgb_pixel(const ManifoldPoint& hsv);

// cost[i * b.size() + j] = cost(a[i], b[j]) where items are images of
// `pixels_per_item` points and the cost is the product-manifold geodesic
// distance sqrt(sum_p d(a_p, b_p)^2).
void geodesic_cost_matrix(std::span<const ManifoldPoint> a, std::span<const ManifoldPoint> b,
                          std::size_t pixels_per_item, std::span<double> cost, Exec exec = Exec::Parallel);
// Euclidean distance between rows of two coordinate matrices.
void euclidean_cost_matrix(std::span<const double> a, std::span<const double> b, std::size_t dim,
                           std::span<double> cost, Exec exec = Exec::Parallel);

// C (m x n) = A (m x k) * B (k x n), row-major. Each C entry sums over k in
// increasing order in both paths.
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m, std::size_t k,
            std::size_t n, Exec exec = Exec::Parallel);

} // namespace mwgan::kernels
