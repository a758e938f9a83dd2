#include "mwgan/kernels.hpp"

#include "mwgan/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mwgan::kernels {

void encode_tangent_field(std::span<const ManifoldPoint> pixels, const TangentBasis& basis, std::span<double> out,
                          Exec exec) {
    const std::size_t dim = basis.dim();
    if (out.size() != pixels.size() * dim) throw ShapeError("encode_tangent_field: output length mismatch");
    const ManifoldPoint& anchor = basis.anchor();
    for_each_index(pixels.size(), exec, [&](std::size_t p) {
        basis.to_coords(log_map(anchor, pixels[p]), out.subspan(p * dim, dim));
    });
}

void decode_tangent_field(std::span<const double> coords, const TangentBasis& basis, std::span<ManifoldPoint> out,
                          Exec exec) {
    const std::size_t dim = basis.dim();
    if (coords.size() != out.size() * dim) throw ShapeError("decode_tangent_field: coordinate length mismatch");
    const ManifoldPoint& anchor = basis.anchor();
    for_each_index(out.size(), exec, [&](std::size_t p) {
        out[p] = exp_map(anchor, basis.from_coords(coords.subspan(p * dim, dim)));
    });
}

ManifoldPoint rgb_to_hsv_pixel(const Rgb& rgb) {
    const double r = rgb[0], g = rgb[1], b = rgb[2];
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    const double s = mx > 0.0 ? delta / mx : 0.0;
    double sector = 0.0;
    if (delta > 0.0) {
        if (mx == r) sector = (g - b) / delta;
        else if (mx == g) sector = (b - r) / delta + 2.0;
        else sector = (r - g) / delta + 4.0;
    }
    return hsv_point(sector * (kPi / 3.0), s, mx);
}

Rgb hsv_to_rgb_pixel(const ManifoldPoint& hsv) {
    const double s = std::clamp(hsv.data[1], 0.0, 1.0);
    const double v = std::clamp(hsv.data[2], 0.0, 1.0);
    double hh = hsv.data[0] / (kPi / 3.0);
    if (hh < 0.0) hh += 6.0;
    if (hh >= 6.0) hh -= 6.0;
    const double sector = std::floor(hh);
    const double f = hh - sector;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (static_cast<int>(sector)) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
    }
}

void rgb_to_hsv_pixels(std::span<const Rgb> in, std::span<ManifoldPoint> out, Exec exec) {
    if (in.size() != out.size()) throw ShapeError("rgb_to_hsv_pixels: size mismatch");
    for_each_index(in.size(), exec, [&](std::size_t i) { out[i] = rgb_to_hsv_pixel(in[i]); });
}

void hsv_to_rgb_pixels(std::span<const ManifoldPoint> in, std::span<Rgb> out, Exec exec) {
    if (in.size() != out.size()) throw ShapeError("hsv_to_rgb_pixels: size mismatch");
    for_each_index(in.size(), exec, [&](std::size_t i) { out[i] = hsv_to_rgb_pixel(in[i]); });
}

namespace {

// Geodesic distance restricted to the domain of log: antipodal sphere pairs
// have no unique minimizing geodesic and are rejected like log_y(x) would.
double ground_distance(const ManifoldPoint& x, const ManifoldPoint& y) {
    if (x.tag == GeometryTag::Sphere2 && y.tag == GeometryTag::Sphere2 &&
        dot(x.vec3(), y.vec3()) <= -1.0 + kAntipodalCutoff)
        throw GeometryError("cost matrix: antipodal sphere pair has no unique geodesic");
    return distance(x, y);
}

} // namespace

void geodesic_cost_matrix(std::span<const ManifoldPoint> a, std::span<const ManifoldPoint> b,
                          std::size_t pixels_per_item, std::span<double> cost, Exec exec) {
    if (pixels_per_item == 0 || a.size() % pixels_per_item != 0 || b.size() % pixels_per_item != 0)
        throw ShapeError("geodesic_cost_matrix: item size does not divide the point count");
    const std::size_t n = a.size() / pixels_per_item;
    const std::size_t m = b.size() / pixels_per_item;
    if (cost.size() != n * m) throw ShapeError("geodesic_cost_matrix: output size mismatch");
    for_each_index(n, exec, [&](std::size_t i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (pixels_per_item == 1) {
                cost[i * m + j] = ground_distance(a[i], b[j]);
                continue;
            }
            double s = 0.0;
            for (std::size_t p = 0; p < pixels_per_item; ++p) {
                const double d = ground_distance(a[i * pixels_per_item + p], b[j * pixels_per_item + p]);
                s += d * d;
            }
            cost[i * m + j] = std::sqrt(s);
        }
    });
}

void euclidean_cost_matrix(std::span<const double> a, std::span<const double> b, std::size_t dim,
                           std::span<double> cost, Exec exec) {
    if (dim == 0 || a.size() % dim != 0 || b.size() % dim != 0)
        throw ShapeError("euclidean_cost_matrix: dimension does not divide the input length");
    const std::size_t n = a.size() / dim;
    const std::size_t m = b.size() / dim;
    if (cost.size() != n * m) throw ShapeError("euclidean_cost_matrix: output size mismatch");
    for_each_index(n, exec, [&](std::size_t i) {
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = a[i * dim + k] - b[j * dim + k];
                s += d * d;
            }
            cost[i * m + j] = std::sqrt(s);
        }
    });
}

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m, std::size_t k,
            std::size_t n, Exec exec) {
    if (a.size() != m * k || b.size() != k * n || c.size() != m * n) throw ShapeError("matmul: buffer size mismatch");
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < k; ++l) s += a[i * k + l] * b[l * n + j];
                c[i * n + j] = s;
            }
        return;
    }
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    const long long rows = static_cast<long long>(m);
    // Row-panel order: each C(i, j) still accumulates l = 0..k-1 in sequence.
#pragma omp parallel for schedule(static) if (m * k * n > (1u << 18))
    for (long long i = 0; i < rows; ++i) {
        double* ci = pc + i * n;
        std::fill(ci, ci + n, 0.0);
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = pa[i * k + l];
            const double* bl = pb + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
        }
    }
}

} // namespace mwgan::kernels
