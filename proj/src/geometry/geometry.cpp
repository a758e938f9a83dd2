#include "mwgan/geometry.hpp"

#include "mwgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace mwgan {

namespace {

void require_tag(const ManifoldPoint& p, GeometryTag tag, const char* op) {
    if (p.tag != tag) {
        std::ostringstream os;
        os << op << ": expected " << tag_name(tag) << " point, got " << tag_name(p.tag);
        throw GeometryError(os.str());
    }
}

void require_same_tag(GeometryTag a, GeometryTag b, const char* op) {
    if (a != b) {
        std::ostringstream os;
        os << op << ": geometry mismatch (" << tag_name(a) << " vs " << tag_name(b) << ")";
        throw GeometryError(os.str());
    }
}

TangentVector tangent_from_vec3(const ManifoldPoint& anchor, const Vec3& v) {
    TangentVector t;
    t.tag = anchor.tag;
    t.anchor = anchor;
    t.coords[0] = v[0];
    t.coords[1] = v[1];
    t.coords[2] = v[2];
    return t;
}

TangentVector tangent_from_mat3(const ManifoldPoint& anchor, const Mat3& m) {
    TangentVector t;
    t.tag = anchor.tag;
    t.anchor = anchor;
    t.coords = m.m;
    return t;
}

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

std::string point_violation(const ManifoldPoint& p, bool strict_box) {
    if (!all_finite(p.values())) return "non-finite component";
    switch (p.tag) {
    case GeometryTag::HsvProduct: {
        const double h = p.data[0];
        if (!(h >= -kPi && h < kPi)) return "hue outside [-pi, pi)";
        if (strict_box) {
            for (int i = 1; i < 3; ++i)
                if (!(p.data[i] >= 0.0 && p.data[i] <= 1.0)) return "saturation/value outside [0, 1]";
        }
        return {};
    }
    case GeometryTag::Sphere2: {
        const double n = norm(p.vec3());
        if (std::abs(n - 1.0) > kSphereNormTol) return "sphere point not unit norm";
        return {};
    }
    case GeometryTag::Spd3: {
        const Mat3 a = p.mat3();
        if (asymmetry(a) > kSymmetryTol) return "SPD point not symmetric";
        if (!(min_eigenvalue(a) > 0.0)) return "SPD point has non-positive eigenvalue";
        return {};
    }
    }
    return "unknown geometry tag";
}

} // namespace

std::string_view tag_name(GeometryTag tag) {
    switch (tag) {
    case GeometryTag::HsvProduct: return "hsv";
    case GeometryTag::Sphere2: return "sphere";
    case GeometryTag::Spd3: return "spd";
    }
    return "unknown";
}

GeometryTag parse_tag(std::string_view name) {
    if (name == "hsv") return GeometryTag::HsvProduct;
    if (name == "sphere" || name == "s2" || name == "cb") return GeometryTag::Sphere2;
    if (name == "spd" || name == "spd3" || name == "dt") return GeometryTag::Spd3;
    throw std::invalid_argument("unknown geometry tag '" + std::string(name) + "'");
}

double wrap_angle(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r >= kPi) r -= kTwoPi;
    if (r < -kPi) r += kTwoPi;
    return r;
}

ManifoldPoint hsv_point(double h, double s, double v) {
    ManifoldPoint p;
    p.tag = GeometryTag::HsvProduct;
    p.data[0] = wrap_angle(h);
    p.data[1] = s;
    p.data[2] = v;
    return p;
}

ManifoldPoint sphere_point(const Vec3& x) {
    const double n = norm(x);
    if (!(n > 0.0) || !std::isfinite(n)) throw GeometryError("sphere_point: cannot normalize a zero or non-finite vector");
    ManifoldPoint p;
    p.tag = GeometryTag::Sphere2;
    for (std::size_t i = 0; i < 3; ++i) p.data[i] = x[i] / n;
    return p;
}

ManifoldPoint spd_point(const Mat3& x) {
    ManifoldPoint p;
    p.tag = GeometryTag::Spd3;
    p.data = x.m;
    return p;
}

ManifoldPoint point_from_values(GeometryTag tag, std::span<const double> values) {
    if (values.size() != values_per_point(tag)) throw ShapeError("point_from_values: wrong value count");
    ManifoldPoint p;
    p.tag = tag;
    std::copy(values.begin(), values.end(), p.data.begin());
    return p;
}

TangentVector make_tangent(const ManifoldPoint& anchor, std::span<const double> coords) {
    if (coords.size() != values_per_point(anchor.tag)) throw ShapeError("make_tangent: wrong coordinate count");
    TangentVector t;
    t.tag = anchor.tag;
    t.anchor = anchor;
    std::copy(coords.begin(), coords.end(), t.coords.begin());
    return t;
}

TangentVector zero_tangent(const ManifoldPoint& anchor) {
    TangentVector t;
    t.tag = anchor.tag;
    t.anchor = anchor;
    return t;
}

TangentVector operator+(const TangentVector& a, const TangentVector& b) {
    require_same_tag(a.tag, b.tag, "tangent add");
    TangentVector r = a;
    for (std::size_t i = 0; i < 9; ++i) r.coords[i] += b.coords[i];
    return r;
}

TangentVector operator*(double s, const TangentVector& a) {
    TangentVector r = a;
    for (double& c : r.coords) c *= s;
    return r;
}

const ManifoldPoint& AnchorSet::for_tag(GeometryTag tag) const {
    switch (tag) {
    case GeometryTag::HsvProduct: return hsv;
    case GeometryTag::Sphere2: return sphere;
    case GeometryTag::Spd3: return spd;
    }
    throw GeometryError("AnchorSet: unknown tag");
}

const AnchorSet& default_anchors() {
    static const AnchorSet anchors{
        hsv_point(kPi, 0.0, 0.0),
        sphere_point(Vec3{{1.0, 1.0, 1.0}}),
        spd_point(Mat3::identity()),
    };
    return anchors;
}

bool is_valid_point(const ManifoldPoint& p, bool strict_box) { return point_violation(p, strict_box).empty(); }

void validate_point(const ManifoldPoint& p, bool strict_box) {
    const std::string why = point_violation(p, strict_box);
    if (!why.empty()) throw GeometryError("invalid " + std::string(tag_name(p.tag)) + " point: " + why);
}

// ---------------------------------------------------------------------------
// HSV

TangentVector hsv_log(const ManifoldPoint& y, const ManifoldPoint& x) {
    require_tag(y, GeometryTag::HsvProduct, "hsv_log");
    require_tag(x, GeometryTag::HsvProduct, "hsv_log");
    return tangent_from_vec3(y, Vec3{{wrap_angle(x.data[0] - y.data[0]), x.data[1] - y.data[1], x.data[2] - y.data[2]}});
}

ManifoldPoint hsv_exp(const ManifoldPoint& y, const TangentVector& v) {
    require_tag(y, GeometryTag::HsvProduct, "hsv_exp");
    require_same_tag(y.tag, v.tag, "hsv_exp");
    ManifoldPoint p;
    p.tag = GeometryTag::HsvProduct;
    p.data[0] = wrap_angle(v.coords[0] + y.data[0]);
    p.data[1] = v.coords[1] + y.data[1];
    p.data[2] = v.coords[2] + y.data[2];
    return p;
}

// ---------------------------------------------------------------------------
// Sphere

TangentVector sphere_project_tangent(const ManifoldPoint& y, const Vec3& h) {
    require_tag(y, GeometryTag::Sphere2, "sphere_project_tangent");
    const Vec3 yv = y.vec3();
    return tangent_from_vec3(y, h - dot(yv, h) * yv);
}

TangentVector sphere_log(const ManifoldPoint& y, const ManifoldPoint& x) {
    require_tag(y, GeometryTag::Sphere2, "sphere_log");
    require_tag(x, GeometryTag::Sphere2, "sphere_log");
    const Vec3 yv = y.vec3();
    const Vec3 xv = x.vec3();
    const double c = dot(xv, yv);
    if (c <= -1.0 + kAntipodalCutoff) throw GeometryError("sphere_log: antipodal points, direction undefined");

    Vec3 w = xv - c * yv;
    w = w - dot(w, yv) * yv;
    const double s = norm(w);
    if (s == 0.0) return zero_tangent(y);
    double factor;
    if (s < kSmallAngle) {
        // asin(s)/s; c > 0 here since c < 0 with s this small is antipodal.
        const double s2 = s * s;
        factor = 1.0 + s2 * (1.0 / 6.0 + s2 * (3.0 / 40.0 + s2 * (5.0 / 112.0)));
    } else {
        factor = std::atan2(s, c) / s;
    }
    return tangent_from_vec3(y, factor * w);
}

ManifoldPoint sphere_exp(const ManifoldPoint& y, const TangentVector& v) {
    require_tag(y, GeometryTag::Sphere2, "sphere_exp");
    require_same_tag(y.tag, v.tag, "sphere_exp");
    const Vec3 yv = y.vec3();
    const Vec3 vv = v.vec3();
    if (std::abs(dot(vv, yv)) > kTangentTol) throw GeometryError("sphere_exp: vector is not tangent at the base point");

    const double r = norm(vv);
    double sinc;
    double cosr;
    if (r < kSmallAngle) {
        const double r2 = r * r;
        sinc = 1.0 - r2 * (1.0 / 6.0 - r2 * (1.0 / 120.0 - r2 * (1.0 / 5040.0)));
        cosr = 1.0 - r2 * (0.5 - r2 * (1.0 / 24.0 - r2 * (1.0 / 720.0)));
    } else {
        sinc = std::sin(r) / r;
        cosr = std::cos(r);
    }
    const Vec3 out = cosr * yv + sinc * vv;
    const double n = norm(out);
    ManifoldPoint p;
    p.tag = GeometryTag::Sphere2;
    for (std::size_t i = 0; i < 3; ++i) p.data[i] = out[i] / n;
    return p;
}

// ---------------------------------------------------------------------------
// SPD, Log-Euclidean

TangentVector spd_log(const ManifoldPoint& y, const ManifoldPoint& x) {
    require_tag(y, GeometryTag::Spd3, "spd_log");
    require_tag(x, GeometryTag::Spd3, "spd_log");
    const SymEigen ey = spd_eigen(y.mat3());
    const SymEigen ly = log_eigen(ey);
    const Mat3 log_y = apply_spectral(ey, [](double l) { return std::log(l); });
    const Mat3 log_x = sym_matrix_log(x.mat3());
    return tangent_from_mat3(y, dexp_at(ly, log_x - log_y));
}

ManifoldPoint spd_exp(const ManifoldPoint& y, const TangentVector& v) {
    require_tag(y, GeometryTag::Spd3, "spd_exp");
    require_same_tag(y.tag, v.tag, "spd_exp");
    const SymEigen ey = spd_eigen(y.mat3());
    const Mat3 log_y = apply_spectral(ey, [](double l) { return std::log(l); });
    return spd_point(sym_matrix_exp(log_y + dlog_at(ey, v.mat3())));
}

// ---------------------------------------------------------------------------

TangentVector log_map(const ManifoldPoint& y, const ManifoldPoint& x) {
    switch (y.tag) {
    case GeometryTag::HsvProduct: return hsv_log(y, x);
    case GeometryTag::Sphere2: return sphere_log(y, x);
    case GeometryTag::Spd3: return spd_log(y, x);
    }
    throw GeometryError("log_map: unknown tag");
}

ManifoldPoint exp_map(const ManifoldPoint& y, const TangentVector& v) {
    switch (y.tag) {
    case GeometryTag::HsvProduct: return hsv_exp(y, v);
    case GeometryTag::Sphere2: return sphere_exp(y, v);
    case GeometryTag::Spd3: return spd_exp(y, v);
    }
    throw GeometryError("exp_map: unknown tag");
}

double distance(const ManifoldPoint& x, const ManifoldPoint& y) {
    require_same_tag(x.tag, y.tag, "distance");
    switch (x.tag) {
    case GeometryTag::HsvProduct: {
        const double dh = wrap_angle(x.data[0] - y.data[0]);
        const double ds = x.data[1] - y.data[1];
        const double dv = x.data[2] - y.data[2];
        return std::sqrt(dh * dh + ds * ds + dv * dv);
    }
    case GeometryTag::Sphere2: {
        // arccos(<x,y>) evaluated as atan2(|x cross y|, <x,y>) for accuracy near 0 and pi.
        const Vec3 a = x.vec3();
        const Vec3 b = y.vec3();
        return std::atan2(norm(cross(a, b)), dot(a, b));
    }
    case GeometryTag::Spd3:
        return frobenius_norm(sym_matrix_log(x.mat3()) - sym_matrix_log(y.mat3()));
    }
    throw GeometryError("distance: unknown tag");
}

double tangent_norm(const TangentVector& v) {
    switch (v.tag) {
    case GeometryTag::HsvProduct:
    case GeometryTag::Sphere2: return norm(v.vec3());
    case GeometryTag::Spd3: return frobenius_norm(dlog_at(v.anchor.mat3(), v.mat3()));
    }
    throw GeometryError("tangent_norm: unknown tag");
}

TangentVector interpolate(const ManifoldPoint& y, const ManifoldPoint& x_real, const TangentVector& g_raw, double t) {
    require_same_tag(y.tag, x_real.tag, "interpolate");
    require_same_tag(y.tag, g_raw.tag, "interpolate");
    const TangentVector real = log_map(y, x_real);
    const TangentVector fake = log_map(y, exp_map(y, g_raw));
    return (1.0 - t) * real + t * fake;
}

// ---------------------------------------------------------------------------
// Tangent bases

const std::array<Mat3, 6>& canonical_sym_basis() {
    static const std::array<Mat3, 6> basis = [] {
        const double r = 1.0 / std::sqrt(2.0);
        std::array<Mat3, 6> b{};
        b[0](0, 0) = 1.0;
        b[1](1, 1) = 1.0;
        b[2](2, 2) = 1.0;
        b[3](0, 1) = b[3](1, 0) = r;
        b[4](0, 2) = b[4](2, 0) = r;
        b[5](1, 2) = b[5](2, 1) = r;
        return b;
    }();
    return basis;
}

TangentBasis::TangentBasis(const ManifoldPoint& anchor) : anchor_(anchor) {
    switch (anchor.tag) {
    case GeometryTag::HsvProduct: break;
    case GeometryTag::Sphere2: {
        const Vec3 y = anchor.vec3();
        std::size_t axis = 0;
        for (std::size_t k = 1; k < 3; ++k)
            if (std::abs(y[k]) < std::abs(y[axis])) axis = k;
        Vec3 seed{};
        seed[axis] = 1.0;
        Vec3 b1 = seed - dot(seed, y) * y;
        b1 = (1.0 / norm(b1)) * b1;
        b1_ = b1;
        b2_ = cross(y, b1);
        break;
    }
    case GeometryTag::Spd3:
        anchor_eigen_ = spd_eigen(anchor.mat3());
        identity_anchor_ = anchor.mat3() == Mat3::identity();
        break;
    }
}

TangentVector TangentBasis::element(std::size_t k) const {
    std::array<double, 6> e{};
    e.at(k) = 1.0;
    return from_coords(std::span<const double>(e.data(), dim()));
}

void TangentBasis::to_coords(const TangentVector& v, std::span<double> out) const {
    require_same_tag(anchor_.tag, v.tag, "TangentBasis::to_coords");
    if (out.size() != dim()) throw ShapeError("TangentBasis::to_coords: wrong output size");
    switch (anchor_.tag) {
    case GeometryTag::HsvProduct:
        std::copy_n(v.coords.begin(), 3, out.begin());
        return;
    case GeometryTag::Sphere2: {
        const Vec3 t = v.vec3();
        out[0] = dot(t, b1_);
        out[1] = dot(t, b2_);
        return;
    }
    case GeometryTag::Spd3: {
        const Mat3 w = identity_anchor_ ? symmetric_part(v.mat3()) : dlog_at(anchor_eigen_, v.mat3());
        const auto& basis = canonical_sym_basis();
        for (std::size_t k = 0; k < 6; ++k) out[k] = frobenius_dot(w, basis[k]);
        return;
    }
    }
}

TangentVector TangentBasis::from_coords(std::span<const double> coords) const {
    if (coords.size() != dim()) throw ShapeError("TangentBasis::from_coords: wrong coordinate count");
    switch (anchor_.tag) {
    case GeometryTag::HsvProduct: return tangent_from_vec3(anchor_, Vec3{{coords[0], coords[1], coords[2]}});
    case GeometryTag::Sphere2: return tangent_from_vec3(anchor_, coords[0] * b1_ + coords[1] * b2_);
    case GeometryTag::Spd3: {
        const auto& basis = canonical_sym_basis();
        Mat3 w{};
        for (std::size_t k = 0; k < 6; ++k) w = w + coords[k] * basis[k];
        if (identity_anchor_) return tangent_from_mat3(anchor_, w);
        return tangent_from_mat3(anchor_, dexp_at(log_eigen(anchor_eigen_), w));
    }
    }
    throw GeometryError("TangentBasis::from_coords: unknown tag");
}

} // namespace mwgan
