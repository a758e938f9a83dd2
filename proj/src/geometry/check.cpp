#include "mwgan/geomcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mwgan {

GeomCheckTolerances GeomCheckTolerances::for_tag(GeometryTag tag) {
    GeomCheckTolerances t;
    if (tag == GeometryTag::Spd3) t.round_trip = 1e-9;
    return t;
}

double ambient_error(const ManifoldPoint& a, const ManifoldPoint& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < values_per_point(a.tag); ++i) {
        double d = a.data[i] - b.data[i];
        if (a.tag == GeometryTag::HsvProduct && i == 0) d = wrap_angle(d);
        s += d * d;
    }
    return std::sqrt(s);
}

namespace {

using Rng = std::mt19937_64;

ManifoldPoint draw(GeometryTag tag, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    switch (tag) {
    case GeometryTag::HsvProduct: return hsv_point(kTwoPi * u(rng) - kPi, u(rng), u(rng));
    case GeometryTag::Sphere2: {
        Vec3 g{{n(rng), n(rng), n(rng)}};
        return sphere_point((1.0 / norm(g)) * g);
    }
    case GeometryTag::Spd3: {
        Mat3 a;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i; j < 3; ++j) a(i, j) = a(j, i) = n(rng);
        return spd_point(sym_matrix_exp(a));
    }
    }
    return {};
}

double closed_form(const ManifoldPoint& x, const ManifoldPoint& y) {
    switch (x.tag) {
    case GeometryTag::HsvProduct: {
        const double dh = wrap_angle(x.data[0] - y.data[0]);
        return std::sqrt(dh * dh + (x.data[1] - y.data[1]) * (x.data[1] - y.data[1]) +
                         (x.data[2] - y.data[2]) * (x.data[2] - y.data[2]));
    }
    case GeometryTag::Sphere2: return std::acos(std::clamp(dot(x.vec3(), y.vec3()), -1.0, 1.0));
    case GeometryTag::Spd3: return frobenius_norm(sym_matrix_log(x.mat3()) - sym_matrix_log(y.mat3()));
    }
    return 0.0;
}

} // namespace

GeomCheckReport geometry_check(GeometryTag tag, std::size_t trials, std::uint64_t seed) {
    return geometry_check(tag, trials, seed, GeomCheckTolerances::for_tag(tag));
}

GeomCheckReport geometry_check(GeometryTag tag, std::size_t trials, std::uint64_t seed, const GeomCheckTolerances& tol) {
    GeomCheckReport r;
    r.tag = tag;
    r.trials = trials;
    r.tol = tol;
    Rng rng(seed);
    for (std::size_t i = 0; i < trials; ++i) {
        const ManifoldPoint y = draw(tag, rng);
        ManifoldPoint x = draw(tag, rng);
        while (tag == GeometryTag::Sphere2 && dot(x.vec3(), y.vec3()) < -1.0 + 1e-3) x = draw(tag, rng);
        const TangentVector v = log_map(y, x);
        const double d = distance(x, y);
        r.max_round_trip = std::max(r.max_round_trip, ambient_error(exp_map(y, v), x));
        r.max_norm_distance = std::max(r.max_norm_distance, std::abs(tangent_norm(v) - d));
        r.max_cross_check = std::max(r.max_cross_check, std::abs(d - closed_form(x, y)));
    }
    return r;
}

} // namespace mwgan
