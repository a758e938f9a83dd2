#pragma once

// Random generators for property tests. Independent of the library's own
// synthetic-target samplers so the two can check each other.

#include "mwgan/geometry.hpp"

#include <random>

namespace mwgan::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline ManifoldPoint random_hsv(Rng& rng) {
    return hsv_point(uniform(rng, -kPi, kPi), uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0));
}

inline ManifoldPoint random_sphere(Rng& rng) {
    Vec3 g{{gaussian(rng), gaussian(rng), gaussian(rng)}};
    return sphere_point(g);
}

inline Mat3 random_symmetric(Rng& rng, double scale = 1.0) {
    Mat3 a;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i; j < 3; ++j) a(i, j) = a(j, i) = scale * gaussian(rng);
    return a;
}

// exp of a random symmetric matrix: eigenvalues roughly within e^{+-3 scale}.
inline ManifoldPoint random_spd(Rng& rng, double scale = 1.0) { return spd_point(sym_matrix_exp(random_symmetric(rng, scale))); }

inline ManifoldPoint random_point(GeometryTag tag, Rng& rng) {
    switch (tag) {
    case GeometryTag::HsvProduct: return random_hsv(rng);
    case GeometryTag::Sphere2: return random_sphere(rng);
    case GeometryTag::Spd3: return random_spd(rng);
    }
    return {};
}

// Sphere point guaranteed away from the antipode of `y`.
inline ManifoldPoint random_sphere_near(Rng& rng, const ManifoldPoint& y) {
    for (;;) {
        ManifoldPoint x = random_sphere(rng);
        if (dot(x.vec3(), y.vec3()) > -1.0 + 1e-3) return x;
    }
}

// Difference between two points as the ambient Euclidean/Frobenius norm,
// with HSV hue compared modulo 2 pi.
inline double point_error(const ManifoldPoint& a, const ManifoldPoint& b) {
    if (a.tag == GeometryTag::HsvProduct) {
        const double dh = wrap_angle(a.data[0] - b.data[0]);
        const double ds = a.data[1] - b.data[1];
        const double dv = a.data[2] - b.data[2];
        return std::sqrt(dh * dh + ds * ds + dv * dv);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < values_per_point(a.tag); ++i) s += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    return std::sqrt(s);
}

inline const GeometryTag kAllTags[] = {GeometryTag::HsvProduct, GeometryTag::Sphere2, GeometryTag::Spd3};

} // namespace mwgan::testing
