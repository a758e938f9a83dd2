#pragma once

#include "mwgan/mat3.hpp"

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>

namespace mwgan {

enum class GeometryTag : std::uint32_t {
    HsvProduct = 0, // S^1 x [0,1]^2, hue in radians
    Sphere2 = 1,    // unit vectors in R^3
    Spd3 = 2,       // 3x3 symmetric positive definite
};

std::string_view tag_name(GeometryTag tag);
GeometryTag parse_tag(std::string_view name);

// Stored doubles per point: 3 (HSV), 3 (sphere), 9 (SPD).
constexpr std::size_t values_per_point(GeometryTag tag) { return tag == GeometryTag::Spd3 ? 9 : 3; }
// Intrinsic tangent dimension: 3 (HSV), 2 (sphere), 6 (SPD).
constexpr std::size_t tangent_dim(GeometryTag tag) {
    switch (tag) {
    case GeometryTag::HsvProduct: return 3;
    case GeometryTag::Sphere2: return 2;
    case GeometryTag::Spd3: return 6;
    }
    return 0;
}

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Point tolerances.
inline constexpr double kSphereNormTol = 1e-12;
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kTangentTol = 1e-10;
inline constexpr double kAntipodalCutoff = 1e-9;
inline constexpr double kSmallAngle = 1e-8;

// Maps an angle to [-pi, pi).
double wrap_angle(double a);

// One pixel/voxel value. Layout of `data`:
//   HsvProduct: (h, s, v, 0...)
//   Sphere2:    (x, y, z, 0...)
//   Spd3:       row-major 3x3
struct ManifoldPoint {
    GeometryTag tag = GeometryTag::HsvProduct;
    std::array<double, 9> data{};

    Vec3 vec3() const { return {{data[0], data[1], data[2]}}; }
    Mat3 mat3() const { return Mat3{data}; }
    std::span<const double> values() const { return {data.data(), values_per_point(tag)}; }

    friend bool operator==(const ManifoldPoint&, const ManifoldPoint&) = default;
};

// Hue is wrapped into [-pi, pi); saturation/value are stored as given.
ManifoldPoint hsv_point(double h, double s, double v);
ManifoldPoint sphere_point(const Vec3& x);
ManifoldPoint spd_point(const Mat3& x);
ManifoldPoint point_from_values(GeometryTag tag, std::span<const double> values);

// Tangent element at `anchor`. `coords` is ambient:
//   HsvProduct: (dh, ds, dv); Sphere2: R^3 vector orthogonal to the anchor;
//   Spd3: symmetric 3x3, row-major.
struct TangentVector {
    GeometryTag tag = GeometryTag::HsvProduct;
    ManifoldPoint anchor;
    std::array<double, 9> coords{};

    Vec3 vec3() const { return {{coords[0], coords[1], coords[2]}}; }
    Mat3 mat3() const { return Mat3{coords}; }
};

TangentVector make_tangent(const ManifoldPoint& anchor, std::span<const double> coords);
TangentVector zero_tangent(const ManifoldPoint& anchor);

TangentVector operator+(const TangentVector& a, const TangentVector& b);
TangentVector operator*(double s, const TangentVector& a);

// Fixed reference points used by the generator and critic.
struct AnchorSet {
    ManifoldPoint hsv;    // hue pi (stored as -pi), s = v = 0
    ManifoldPoint sphere; // (1,1,1)/sqrt(3)
    ManifoldPoint spd;    // identity

    const ManifoldPoint& for_tag(GeometryTag tag) const;
};
const AnchorSet& default_anchors();

// Point invariants. For HSV, `strict_box` also requires s, v in [0, 1];
// exp may leave the box, so generated points are checked without it.
bool is_valid_point(const ManifoldPoint& p, bool strict_box = false);
// Throws GeometryError describing the first violated invariant.
void validate_point(const ManifoldPoint& p, bool strict_box = false);

// HSV: S^1 x R^2 with wrapped hue difference.
TangentVector hsv_log(const ManifoldPoint& y, const ManifoldPoint& x);
ManifoldPoint hsv_exp(const ManifoldPoint& y, const TangentVector& v);

// Sphere S^2.
TangentVector sphere_project_tangent(const ManifoldPoint& y, const Vec3& h);
TangentVector sphere_log(const ManifoldPoint& y, const ManifoldPoint& x);
ManifoldPoint sphere_exp(const ManifoldPoint& y, const TangentVector& v);

// SPD(3) under the Log-Euclidean metric:
//   log_y(x) = D_{log y} exp . (log x - log y)
//   exp_y(v) = exp(log y + D_y log . v)
// exp output is SPD whenever the eigenvalues of log y + D_y log . v span less
// than ~36; beyond that the smallest eigenvalue is below float64 resolution.
TangentVector spd_log(const ManifoldPoint& y, const ManifoldPoint& x);
ManifoldPoint spd_exp(const ManifoldPoint& y, const TangentVector& v);

// Dispatch on the anchor's tag.
TangentVector log_map(const ManifoldPoint& y, const ManifoldPoint& x);
ManifoldPoint exp_map(const ManifoldPoint& y, const TangentVector& v);

// Geodesic distance; equals tangent_norm(log_map(y, x)).
double distance(const ManifoldPoint& x, const ManifoldPoint& y);

// Riemannian norm of a tangent at its anchor. For SPD this is ||D_y log . v||_F,
// which is the plain Frobenius norm when the anchor is the identity.
double tangent_norm(const TangentVector& v);

// (1-t) log_y(x_real) + t log_y(exp_y(g_raw)).
TangentVector interpolate(const ManifoldPoint& y, const ManifoldPoint& x_real, const TangentVector& g_raw, double t);

// Orthonormal basis of T_y M, used to give networks fixed-size coordinates.
//   HsvProduct: canonical axes.
//   Sphere2:    Gram-Schmidt of the coordinate axis least aligned with y, then y x b1.
//   Spd3:       D_{log y} exp of the canonical symmetric basis (off-diagonals
//               scaled 1/sqrt2); orthonormal under the Log-Euclidean metric at y,
//               and under the Frobenius product when y is the identity.
class TangentBasis {
public:
    explicit TangentBasis(const ManifoldPoint& anchor);

    GeometryTag tag() const { return anchor_.tag; }
    const ManifoldPoint& anchor() const { return anchor_; }
    std::size_t dim() const { return tangent_dim(anchor_.tag); }

    // Basis element k in ambient coordinates.
    TangentVector element(std::size_t k) const;

    // Writes dim() coordinates.
    void to_coords(const TangentVector& v, std::span<double> out) const;
    TangentVector from_coords(std::span<const double> coords) const;

private:
    ManifoldPoint anchor_;
    Vec3 b1_{}, b2_{};
    SymEigen anchor_eigen_{};
    bool identity_anchor_ = false;
};

// The canonical symmetric basis E_k of Sym(3), orthonormal under Frobenius.
const std::array<Mat3, 6>& canonical_sym_basis();

} // namespace mwgan
