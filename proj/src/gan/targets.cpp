#include "mwgan/gan.hpp"

#include "mwgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mwgan::gan {

void SyntheticTarget::validate() const {
    if (components.empty()) throw DataError("target: no mixture components");
    double total = 0.0;
    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        const std::string where = "target component " + std::to_string(k) + ": ";
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw DataError(where + "weight must be positive");
        if (c.mean.tag != tag) throw GeometryError(where + "mean has the wrong geometry");
        validate_point(c.mean, tag == GeometryTag::HsvProduct);
        const bool spread_ok = tag == GeometryTag::Sphere2 ? c.spread >= 0.0 : (c.spread >= 0.0 && std::isfinite(c.spread));
        if (!spread_ok) throw DataError(where + "spread must be nonnegative");
        if (!(c.sv_spread >= 0.0) || !std::isfinite(c.sv_spread)) throw DataError(where + "sv_spread must be nonnegative");
        total += c.weight;
    }
    if (!std::isfinite(total)) throw DataError("target: weights overflow");
}

ManifoldPoint sample_vmf(const Vec3& mean, double kappa, Rng& rng) {
    const double len = norm(mean);
    if (!(len > 0.0)) throw GeometryError("vMF: zero mean direction");
    if (!(kappa >= 0.0)) throw DataError("vMF: negative concentration");
    const Vec3 mu = (1.0 / len) * mean;
    if (std::isinf(kappa)) return sphere_point(mu);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // u in (0, 1] keeps the log finite when exp(-2 kappa) underflows.
    const double u = 1.0 - unif(rng);
    const double w = kappa == 0.0 ? 2.0 * u - 1.0 : 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
    const double phi = kTwoPi * unif(rng);

    // Orthonormal frame around mu.
    Vec3 axis{{1.0, 0.0, 0.0}};
    if (std::abs(mu[0]) > 0.9) axis = Vec3{{0.0, 1.0, 0.0}};
    Vec3 e1 = axis - dot(axis, mu) * mu;
    e1 = (1.0 / norm(e1)) * e1;
    const Vec3 e2 = cross(mu, e1);

    const double wc = std::clamp(w, -1.0, 1.0);
    const double r = std::sqrt(std::max(0.0, 1.0 - wc * wc));
    Vec3 x = wc * mu + r * (std::cos(phi) * e1 + std::sin(phi) * e2);
    x = (1.0 / norm(x)) * x;
    return sphere_point(x);
}

namespace {

ManifoldPoint draw(const MixtureComponent& c, GeometryTag tag, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    switch (tag) {
    case GeometryTag::HsvProduct: {
        const double h = c.mean.data[0] + c.spread * normal(rng);
        const double s = std::clamp(c.mean.data[1] + c.sv_spread * normal(rng), 0.0, 1.0);
        const double v = std::clamp(c.mean.data[2] + c.sv_spread * normal(rng), 0.0, 1.0);
        return hsv_point(h, s, v);
    }
    case GeometryTag::Sphere2:
        return sample_vmf(c.mean.vec3(), c.spread, rng);
    case GeometryTag::Spd3: {
        Mat3 l = sym_matrix_log(c.mean.mat3());
        const auto& basis = canonical_sym_basis();
        for (const Mat3& e : basis) l = l + (c.spread * normal(rng)) * e;
        return spd_point(sym_matrix_exp(symmetric_part(l)));
    }
    }
    throw GeometryError("target: unknown geometry");
}

} // namespace

SampleSet synth_targets(const SyntheticTarget& target, std::size_t n, std::uint64_t seed, const SampleShape& shape) {
    target.validate();
    if (shape.tag != target.tag) throw GeometryError("synth_targets: sample shape geometry differs from the target");
    Rng rng(seed);
    std::vector<double> weights;
    for (const auto& c : target.components) weights.push_back(c.weight);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

    const std::size_t pixels = shape.pixels();
    std::vector<ManifoldPoint> points;
    points.reserve(n * pixels);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = target.components[pick(rng)];
        for (std::size_t p = 0; p < pixels; ++p) points.push_back(draw(c, target.tag, rng));
    }
    return SampleSet::uniform(target.tag, std::move(points), pixels);
}

SyntheticTarget default_target(GeometryTag tag) {
    SyntheticTarget t;
    t.tag = tag;
    switch (tag) {
    case GeometryTag::HsvProduct:
        // Two modes on either side of the hue seam at +-pi, opposite the chart cut of the default anchor.
        t.components = {
            {0.5, hsv_point(-2.2, 0.8, 0.7), 0.25, 0.05},
            {0.5, hsv_point(2.2, 0.5, 0.9), 0.25, 0.05},
        };
        break;
    case GeometryTag::Sphere2: {
        const auto unit = [](Vec3 v) { return sphere_point((1.0 / norm(v)) * v); };
        t.components = {
            {0.5, unit(Vec3{{1.0, 0.2, 0.1}}), 30.0},
            {0.5, unit(Vec3{{0.1, 0.3, 1.0}}), 30.0},
        };
        break;
    }
    case GeometryTag::Spd3: {
        // Second mean: diag(1.5, 0.6, 0.3) rotated by 0.6 rad about z.
        const double c = std::cos(0.6), s = std::sin(0.6);
        const Mat3 r{{c, -s, 0, s, c, 0, 0, 0, 1}};
        const Mat3 m2 = symmetric_part(r * Mat3::diag(1.5, 0.6, 0.3) * transpose(r));
        t.components = {
            {0.5, spd_point(Mat3::diag(2.0, 1.0, 0.5)), 0.15},
            {0.5, spd_point(m2), 0.15},
        };
        break;
    }
    }
    return t;
}

} // namespace mwgan::gan
