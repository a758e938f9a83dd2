#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace mwgan {

struct Vec3 {
    std::array<double, 3> v{0.0, 0.0, 0.0};

    constexpr double& operator[](std::size_t i) { return v[i]; }
    constexpr double operator[](std::size_t i) const { return v[i]; }

    friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) {
        return {{a[0] + b[0], a[1] + b[1], a[2] + b[2]}};
    }
    friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) {
        return {{a[0] - b[0], a[1] - b[1], a[2] - b[2]}};
    }
    friend constexpr Vec3 operator*(double s, const Vec3& a) {
        return {{s * a[0], s * a[1], s * a[2]}};
    }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]}};
}

// Dense row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{};

    constexpr double& operator()(std::size_t r, std::size_t c) { return m[3 * r + c]; }
    constexpr double operator()(std::size_t r, std::size_t c) const { return m[3 * r + c]; }

    static constexpr Mat3 identity() { return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
    static constexpr Mat3 diag(double a, double b, double c) { return Mat3{{a, 0, 0, 0, b, 0, 0, 0, c}}; }

    friend constexpr Mat3 operator+(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (std::size_t i = 0; i < 9; ++i) r.m[i] = a.m[i] + b.m[i];
        return r;
    }
    friend constexpr Mat3 operator-(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (std::size_t i = 0; i < 9; ++i) r.m[i] = a.m[i] - b.m[i];
        return r;
    }
    friend constexpr Mat3 operator*(double s, const Mat3& a) {
        Mat3 r;
        for (std::size_t i = 0; i < 9; ++i) r.m[i] = s * a.m[i];
        return r;
    }
    friend constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
                r(i, j) = s;
            }
        return r;
    }
    friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

constexpr Mat3 transpose(const Mat3& a) {
    Mat3 r;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

constexpr Mat3 symmetric_part(const Mat3& a) { return 0.5 * (a + transpose(a)); }

inline double frobenius_norm(const Mat3& a) {
    double s = 0.0;
    for (double x : a.m) s += x * x;
    return std::sqrt(s);
}

constexpr double frobenius_dot(const Mat3& a, const Mat3& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 9; ++i) s += a.m[i] * b.m[i];
    return s;
}

// ||A - A^T||_F
inline double asymmetry(const Mat3& a) { return frobenius_norm(a - transpose(a)); }

// A = Q diag(values) Q^T, columns of Q are eigenvectors.
struct SymEigen {
    std::array<double, 3> values{};
    Mat3 vectors = Mat3::identity();
};

// Cyclic Jacobi on the symmetric part of `a`. Sweeps until the off-diagonal
// Frobenius mass drops below tol * ||A||_F. Eigenvalues sorted ascending.
SymEigen sym_eigen(const Mat3& a, double tol = 1e-13);

// Q diag(f(values)) Q^T
template <class F>
Mat3 apply_spectral(const SymEigen& e, F&& f) {
    std::array<double, 3> fv{f(e.values[0]), f(e.values[1]), f(e.values[2])};
    Mat3 r;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 3; ++k) s += e.vectors(i, k) * fv[k] * e.vectors(j, k);
            r(i, j) = s;
            r(j, i) = s;
        }
    return r;
}

// Matrix logarithm of an SPD matrix. Throws EigenvalueError if not SPD.
Mat3 sym_matrix_log(const Mat3& x);
// Matrix exponential of a symmetric matrix (result is SPD).
Mat3 sym_matrix_exp(const Mat3& v);

double min_eigenvalue(const Mat3& a);

// sym_eigen, throwing EigenvalueError when the smallest eigenvalue is <= 0.
SymEigen spd_eigen(const Mat3& x);

// Differential of exp at symmetric L applied to symmetric H (Daleckii-Krein).
Mat3 dexp_at(const Mat3& log_point, const Mat3& h);
// Differential of log at SPD Y applied to symmetric V. Inverse of dexp_at(log Y, .).
Mat3 dlog_at(const Mat3& spd_point, const Mat3& v);

// Same, reusing a precomputed eigendecomposition of log Y (resp. Y).
Mat3 dexp_at(const SymEigen& log_point_eigen, const Mat3& h);
Mat3 dlog_at(const SymEigen& spd_point_eigen, const Mat3& v);
// Eigendecomposition of log Y from that of Y.
SymEigen log_eigen(const SymEigen& spd_point_eigen);

} // namespace mwgan
