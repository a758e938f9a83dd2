#include "mwgan/mat3.hpp"

#include "mwgan/errors.hpp"

#include <algorithm>
#include <sstream>

namespace mwgan {

namespace {

double off_diagonal_norm(const Mat3& a) {
    return std::sqrt(2.0 * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2)));
}

// Divided difference of exp at (a, b); equals exp(a) when a == b.
double exp_divided_difference(double a, double b) {
    const double d = a - b;
    if (d == 0.0) return std::exp(a);
    return std::exp(b) * (std::expm1(d) / d);
}

// Divided difference of log at (a, b), a, b > 0; equals 1/a when a == b.
double log_divided_difference(double a, double b) {
    const double diff = a - b;
    if (diff == 0.0) return 1.0 / a;
    const double rel = diff / b;
    return std::log1p(rel) / rel / b;
}

template <class DividedDifference>
Mat3 daleckii_krein(const SymEigen& e, const Mat3& h, DividedDifference&& dd) {
    const Mat3& q = e.vectors;
    Mat3 hat = transpose(q) * symmetric_part(h) * q;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) hat(i, j) *= dd(e.values[i], e.values[j]);
    return symmetric_part(q * hat * transpose(q));
}

SymEigen spd_eigen_checked(const Mat3& x, const char* what) {
    SymEigen e = sym_eigen(x);
    if (!(e.values[0] > 0.0)) {
        std::ostringstream os;
        os << what << ": matrix is not SPD (min eigenvalue " << e.values[0] << ")";
        throw EigenvalueError(os.str(), e.values[0]);
    }
    return e;
}

} // namespace

SymEigen sym_eigen(const Mat3& input, double tol) {
    Mat3 a = symmetric_part(input);
    Mat3 q = Mat3::identity();
    const double scale = frobenius_norm(a);

    for (int sweep = 0; sweep < 64; ++sweep) {
        const double off = off_diagonal_norm(a);
        if (off <= tol * scale || off == 0.0) break;
        for (std::size_t p = 0; p < 2; ++p) {
            for (std::size_t r = p + 1; r < 3; ++r) {
                const double apr = a(p, r);
                if (apr == 0.0) continue;
                // Rotation zeroing a(p, r).
                const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < 3; ++k) {
                    const double akp = a(k, p);
                    const double akr = a(k, r);
                    a(k, p) = c * akp - s * akr;
                    a(k, r) = s * akp + c * akr;
                }
                for (std::size_t k = 0; k < 3; ++k) {
                    const double apk = a(p, k);
                    const double ark = a(r, k);
                    a(p, k) = c * apk - s * ark;
                    a(r, k) = s * apk + c * ark;
                }
                for (std::size_t k = 0; k < 3; ++k) {
                    const double qkp = q(k, p);
                    const double qkr = q(k, r);
                    q(k, p) = c * qkp - s * qkr;
                    q(k, r) = s * qkp + c * qkr;
                }
            }
        }
    }

    std::array<std::size_t, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    SymEigen out;
    for (std::size_t k = 0; k < 3; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < 3; ++i) out.vectors(i, k) = q(i, order[k]);
    }
    return out;
}

double min_eigenvalue(const Mat3& a) { return sym_eigen(a).values[0]; }

SymEigen spd_eigen(const Mat3& x) { return spd_eigen_checked(x, "spd_eigen"); }

Mat3 sym_matrix_log(const Mat3& x) {
    const SymEigen e = spd_eigen_checked(x, "sym_matrix_log");
    return apply_spectral(e, [](double l) { return std::log(l); });
}

Mat3 sym_matrix_exp(const Mat3& v) {
    const SymEigen e = sym_eigen(v);
    return apply_spectral(e, [](double l) { return std::exp(l); });
}

Mat3 dexp_at(const Mat3& log_point, const Mat3& h) {
    return daleckii_krein(sym_eigen(log_point), h, exp_divided_difference);
}

Mat3 dlog_at(const Mat3& spd_point, const Mat3& v) {
    return daleckii_krein(spd_eigen_checked(spd_point, "dlog_at"), v, log_divided_difference);
}

Mat3 dexp_at(const SymEigen& log_point_eigen, const Mat3& h) {
    return daleckii_krein(log_point_eigen, h, exp_divided_difference);
}

Mat3 dlog_at(const SymEigen& spd_point_eigen, const Mat3& v) {
    return daleckii_krein(spd_point_eigen, v, log_divided_difference);
}

SymEigen log_eigen(const SymEigen& spd_point_eigen) {
    SymEigen out = spd_point_eigen;
    for (double& l : out.values) l = std::log(l);
    return out;
}

} // namespace mwgan
