// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Optional argv[1] runs only the criteria whose name contains it.

#include "mwgan/autograd.hpp"
#include "mwgan/gan.hpp"
#include "mwgan/geometry.hpp"
#include "mwgan/imaging.hpp"
#include "mwgan/transport.hpp"
#include "random_points.hpp"

#include <Eigen/Dense>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

using namespace mwgan;
using namespace mwgan::testing;
using ag::Tensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += " [failed: " + what + "]";
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "  ") + s; }
};

// ---------------------------------------------------------------------------
// Independent oracles

Eigen::Matrix3d to_eigen(const Mat3& m) {
    Eigen::Matrix3d e;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e(i, j) = m(i, j);
    return e;
}

Eigen::Matrix3d eigen_logm(const Mat3& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(m));
    const Eigen::Vector3d l = es.eigenvalues().array().log();
    return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

double eigen_min_eigenvalue(const Mat3& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(to_eigen(m), Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

double oracle_distance(const ManifoldPoint& x, const ManifoldPoint& y) {
    switch (x.tag) {
    case GeometryTag::HsvProduct: {
        double dh = std::fmod(std::abs(x.data[0] - y.data[0]), 2.0 * M_PI);
        dh = std::min(dh, 2.0 * M_PI - dh);
        return std::hypot(dh, x.data[1] - y.data[1], x.data[2] - y.data[2]);
    }
    case GeometryTag::Sphere2: {
        const double c = x.data[0] * y.data[0] + x.data[1] * y.data[1] + x.data[2] * y.data[2];
        return std::acos(std::clamp(c, -1.0, 1.0));
    }
    case GeometryTag::Spd3: return (eigen_logm(x.mat3()) - eigen_logm(y.mat3())).norm();
    }
    return NAN;
}

// Minimum over all permutations of the mean matched cost.
double brute_force_assignment(const CostMatrix& c) {
    std::vector<std::size_t> perm(c.rows);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < c.rows; ++i) s += c(i, perm[i]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(c.rows);
}

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(r * c);
    for (double& x : v) x = uniform(rng, lo, hi);
    return Tensor(r, c, std::move(v));
}

double vec_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Relative error of grad() against central differences of the untracked value.
using ScalarOf = std::function<Tensor(const Tensor&)>;
double fd_relative_error(const ScalarOf& f, const Tensor& x, double step) {
    ag::Tape tape;
    const Tensor var = tape.variable(x);
    const Tensor analytic = ag::grad(f(var), var);
    std::vector<double> numeric(x.size());
    std::vector<double> probe(x.data().begin(), x.data().end());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double x0 = probe[k];
        probe[k] = x0 + step;
        const double fp = f(Tensor(x.shape(), probe)).item();
        probe[k] = x0 - step;
        const double fm = f(Tensor(x.shape(), probe)).item();
        probe[k] = x0;
        numeric[k] = (fp - fm) / (2.0 * step);
    }
    std::vector<double> diff(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) diff[k] = analytic[k] - numeric[k];
    const double scale = std::max({vec_norm(analytic.data()), vec_norm(numeric), 1e-300});
    return vec_norm(diff) / scale;
}

const GeometryTag kTags[] = {GeometryTag::HsvProduct, GeometryTag::Sphere2, GeometryTag::Spd3};

// ---------------------------------------------------------------------------
// Criteria

struct SweepPair {
    ManifoldPoint y, x;
};

std::vector<SweepPair> sweep_pairs(GeometryTag tag, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SweepPair> pairs;
    pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ManifoldPoint y = random_point(tag, rng);
        ManifoldPoint x = tag == GeometryTag::Sphere2 ? random_sphere_near(rng, y) : random_point(tag, rng);
        pairs.push_back({std::move(y), std::move(x)});
    }
    return pairs;
}

Outcome geometry_round_trips() {
    Outcome o;
    const auto t0 = Clock::now();
    for (GeometryTag tag : kTags) {
        const double tol = tag == GeometryTag::Spd3 ? 1e-9 : 1e-12;
        double worst = 0.0;
        for (const auto& [y, x] : sweep_pairs(tag, 10000, 101)) worst = std::max(worst, point_error(exp_map(y, log_map(y, x)), x));
        o.note(std::string(tag_name(tag)) + " " + fmt("%.2e", worst));
        o.require(worst <= tol, std::string(tag_name(tag)) + " above " + fmt("%.0e", tol));
    }
    const double secs = seconds_since(t0);
    o.note(fmt("%.2f s", secs));
    o.require(secs < 10.0, "runtime >= 10 s");
    return o;
}

Outcome norm_distance_identity() {
    Outcome o;
    for (GeometryTag tag : kTags) {
        double identity = 0.0, cross = 0.0;
        for (const auto& [y, x] : sweep_pairs(tag, 10000, 101)) {
            const double d = distance(x, y);
            identity = std::max(identity, std::abs(tangent_norm(log_map(y, x)) - d));
            cross = std::max(cross, std::abs(d - oracle_distance(x, y)));
        }
        o.note(std::string(tag_name(tag)) + " |log|-d " + fmt("%.1e", identity) + " oracle " + fmt("%.1e", cross));
        o.require(identity <= 1e-10, std::string(tag_name(tag)) + " norm-distance");
        o.require(cross <= 1e-10, std::string(tag_name(tag)) + " cross-check");
    }
    return o;
}

Outcome ot_oracle() {
    Outcome o;
    const auto t0 = Clock::now();
    Rng rng(202);
    double worst = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const GeometryTag tag = kTags[inst % 3];
        const std::size_t n = 1 + static_cast<std::size_t>(inst % 7);
        std::vector<ManifoldPoint> a, b;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(random_point(tag, rng));
            b.push_back(random_point(tag, rng));
        }
        const SampleSet sa = SampleSet::uniform(tag, a), sb = SampleSet::uniform(tag, b);
        W1Options opts;
        opts.method = W1Method::Exact;
        const double exact = w1(sa, sb, opts);
        const double brute = brute_force_assignment(cost_matrix(sa, sb));
        worst = std::max(worst, std::abs(exact - brute));
    }
    const double secs = seconds_since(t0);
    o.note("max |exact - brute force| " + fmt("%.2e", worst) + "  " + fmt("%.2f s", secs));
    o.require(worst <= 1e-12, "difference above 1e-12");
    o.require(secs < 30.0, "runtime >= 30 s");
    return o;
}

Outcome autodiff() {
    using namespace ag;
    Outcome o;
    const auto t0 = Clock::now();
    const double step = 1e-5, tol = 1e-4;
    Rng rng(303);
    const Tensor x = random_tensor(rng, 3, 4), pos = random_tensor(rng, 3, 4, 0.5, 2.0);
    const Tensor other = random_tensor(rng, 3, 4), right = random_tensor(rng, 4, 5), left = random_tensor(rng, 2, 3);
    const Tensor bias = random_tensor(rng, 1, 4), row = random_tensor(rng, 1, 4), one = random_tensor(rng, 1, 1);

    struct Case {
        const char* name;
        std::function<Tensor(const Tensor&)> op;
        Tensor at;
    };
    const std::vector<Case> cases = {
        {"matmul lhs", [&](const Tensor& t) { return matmul(t, right); }, x},
        {"matmul rhs", [&](const Tensor& t) { return matmul(left, t); }, x},
        {"transpose", [](const Tensor& t) { return transpose(t); }, x},
        {"add", [&](const Tensor& t) { return add(t, other); }, x},
        {"sub", [&](const Tensor& t) { return sub(other, t); }, x},
        {"mul", [&](const Tensor& t) { return mul(t, other); }, x},
        {"div num", [&](const Tensor& t) { return div(t, pos); }, x},
        {"div den", [&](const Tensor& t) { return div(other, t); }, pos},
        {"scale", [](const Tensor& t) { return scale(t, -2.5); }, x},
        {"add_scalar", [](const Tensor& t) { return add_scalar(t, 0.7); }, x},
        {"neg", [](const Tensor& t) { return neg(t); }, x},
        {"add_bias x", [&](const Tensor& t) { return add_bias(t, bias); }, x},
        {"add_bias b", [&](const Tensor& t) { return add_bias(other, t); }, bias},
        {"leaky_relu", [](const Tensor& t) { return leaky_relu(t, 0.2); }, x},
        {"tanh", [](const Tensor& t) { return ag::tanh(t); }, x},
        {"square", [](const Tensor& t) { return square(t); }, x},
        {"sqrt", [](const Tensor& t) { return ag::sqrt(t); }, pos},
        {"clamp_min", [](const Tensor& t) { return clamp_min(t, 0.1); }, x},
        {"sum", [](const Tensor& t) { return sum(t); }, x},
        {"mean", [](const Tensor& t) { return mean(t); }, x},
        {"expand", [](const Tensor& t) { return expand(t, Shape{2, 3}); }, one},
        {"sum_rows", [](const Tensor& t) { return sum_rows(t); }, x},
        {"repeat_rows", [](const Tensor& t) { return repeat_rows(t, 3); }, row},
        {"group_sum", [](const Tensor& t) { return group_sum(t, 2); }, x},
        {"group_repeat", [](const Tensor& t) { return group_repeat(t, 3); }, x},
        {"concat", [&](const Tensor& t) { return concat(t, other, Axis::Cols); }, x},
        {"slice", [](const Tensor& t) { return slice(t, Axis::Cols, 1, 3); }, x},
        {"pad", [](const Tensor& t) { return pad(t, Axis::Rows, 1, 6); }, x},
        {"l2_norm", [](const Tensor& t) { return l2_norm(t); }, x},
        {"l2_norm rows", [](const Tensor& t) { return l2_norm(t, NormAxis::Rows); }, x},
        {"l2_norm cols", [](const Tensor& t) { return l2_norm(t, NormAxis::Cols); }, x},
    };
    double worst_op = 0.0;
    std::string worst_name;
    for (const auto& c : cases) {
        const Shape out = c.op(c.at).shape();
        const Tensor w = random_tensor(rng, out.rows, out.cols);
        const double e = fd_relative_error([&](const Tensor& t) { return sum(mul(c.op(t), w)); }, c.at, step);
        if (!(e < tol)) o.require(false, c.name);
        if (e >= worst_op) {
            worst_op = e;
            worst_name = c.name;
        }
    }
    o.note(std::to_string(cases.size()) + " ops, worst " + fmt("%.1e", worst_op) + " (" + worst_name + ")");

    // Full critic loss, penalty included, with respect to every critic parameter.
    double worst_loss = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const std::size_t dim = 4 + trial, batch = 8;
        gan::Network d = gan::Network::init({dim, 16, 12, 1}, rng);
        for (std::size_t k = 1; k < d.params.size(); k += 2) d.params[k] = random_tensor(rng, 1, d.params[k].cols(), -0.3, 0.3);
        const Tensor xr = random_tensor(rng, batch, dim, -2, 2), xg = random_tensor(rng, batch, dim, -2, 2),
                     xh = random_tensor(rng, batch, dim, -2, 2);
        // Analytic gradient over all parameters at once, against central differences entry by entry.
        ag::Tape tape;
        std::vector<Tensor> vars;
        for (const auto& p : d.params) vars.push_back(tape.variable(p));
        const auto analytic = ag::grad(gan::critic_loss(d, vars, xr, xg, xh, 10.0).loss, vars);
        double diff2 = 0.0, an2 = 0.0, num2 = 0.0;
        std::vector<Tensor> params = d.params;
        for (std::size_t k = 0; k < params.size(); ++k) {
            std::vector<double> probe(d.params[k].data().begin(), d.params[k].data().end());
            for (std::size_t e = 0; e < probe.size(); ++e) {
                const double x0 = probe[e];
                probe[e] = x0 + step;
                params[k] = Tensor(d.params[k].shape(), probe);
                const double fp = gan::critic_loss(d, params, xr, xg, xh, 10.0).loss.item();
                probe[e] = x0 - step;
                params[k] = Tensor(d.params[k].shape(), probe);
                const double fm = gan::critic_loss(d, params, xr, xg, xh, 10.0).loss.item();
                probe[e] = x0;
                const double num = (fp - fm) / (2.0 * step), an = analytic[k][e];
                diff2 += (an - num) * (an - num);
                an2 += an * an;
                num2 += num * num;
            }
            params[k] = d.params[k];
        }
        const double e = std::sqrt(diff2) / std::max(std::sqrt(std::max(an2, num2)), 1e-300);
        worst_loss = std::max(worst_loss, e);
        o.require(e < tol, "critic loss trial " + std::to_string(trial));
    }
    const double secs = seconds_since(t0);
    o.note("critic loss worst " + fmt("%.1e", worst_loss) + "  " + fmt("%.2f s", secs));
    o.require(secs < 60.0, "runtime >= 60 s");
    return o;
}

Outcome analytic_penalty() {
    Outcome o;
    Rng rng(404);
    const std::size_t dim = 12, batch = 32;
    std::vector<double> a(dim);
    for (double& v : a) v = gaussian(rng);
    const double n0 = vec_norm(a);
    for (double& v : a) v *= 3.0 / n0;
    gan::Network d;
    d.sizes = {dim, 1};
    d.params = {Tensor(dim, 1, a), Tensor::scalar(0.37)};
    const Tensor xr = random_tensor(rng, batch, dim, -3, 3), xg = random_tensor(rng, batch, dim, -3, 3),
                 xh = random_tensor(rng, batch, dim, -3, 3);
    const gan::CriticLoss cl = gan::critic_loss(d, d.params, xr, xg, xh, 10.0);
    double worst = 0.0;
    for (double g : cl.grad_norms.data()) worst = std::max(worst, std::abs(10.0 * (g - 1.0) * (g - 1.0) - 40.0));
    worst = std::max(worst, std::abs(cl.gp.item() - 40.0));
    o.note("penalty " + fmt("%.17g", cl.gp.item()) + "  max per-sample deviation " + fmt("%.1e", worst));
    o.require(worst <= 1e-10, "penalty not 40 within 1e-10");
    return o;
}

Outcome manifold_validity() {
    Outcome o;
    for (GeometryTag tag : kTags) {
        const gan::SampleShape shape{tag, {2, 2}};
        const ManifoldPoint anchor = tag == GeometryTag::HsvProduct ? default_anchors().hsv
                                     : tag == GeometryTag::Sphere2  ? default_anchors().sphere
                                                                    : default_anchors().spd;
        const TangentBasis basis(anchor);
        std::size_t samples = 0, bad = 0;
        double worst_norm = 0.0, min_eig = INFINITY;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            gan::Rng rng(seed);
            const gan::Network g = gan::Network::init({32, 128, 128, shape.coords_per_sample()}, rng);
            const auto pts = gan::generator_forward(g, gan::LatentSampler(32, seed + 1000).sample(1000), basis, shape);
            samples += 1000;
            for (const auto& p : pts) {
                bool ok = true;
                for (std::size_t k = 0; k < values_per_point(tag); ++k) ok = ok && std::isfinite(p.data[k]);
                if (tag == GeometryTag::HsvProduct) {
                    // s and v are unbounded reals on this manifold; only rendering clamps them.
                    ok = ok && p.data[0] >= -M_PI && p.data[0] < M_PI;
                } else if (tag == GeometryTag::Sphere2) {
                    const double dev = std::abs(std::hypot(p.data[0], p.data[1], p.data[2]) - 1.0);
                    worst_norm = std::max(worst_norm, dev);
                    ok = ok && dev <= 1e-12;
                } else {
                    const Mat3 m = p.mat3();
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) ok = ok && m(i, j) == m(j, i);
                    const double e = eigen_min_eigenvalue(m);
                    min_eig = std::min(min_eig, e);
                    ok = ok && e > 0.0;
                }
                if (!ok) ++bad;
            }
        }
        std::string s = std::string(tag_name(tag)) + " " + std::to_string(samples) + " samples, " + std::to_string(bad) + " invalid";
        if (tag == GeometryTag::Sphere2) s += fmt(" (max |norm-1| %.1e)", worst_norm);
        if (tag == GeometryTag::Spd3) s += fmt(" (min eig %.2e)", min_eig);
        o.note(s);
        o.require(bad == 0, std::string(tag_name(tag)) + " invalid samples");
    }
    return o;
}

Outcome training() {
    Outcome o;
    omp_set_num_threads(1);
    for (GeometryTag tag : kTags) {
        gan::TrainerConfig c;
        c.tag = tag;
        const gan::TrainingData data = gan::make_training_data(gan::default_target(tag), c, 2048);
        const auto t0 = Clock::now();
        const gan::TrainingResult r = gan::train(c, data);
        const double secs = seconds_since(t0);
        std::vector<double> idx, w;
        for (const auto& [i, v] : r.log.evaluations()) {
            idx.push_back(static_cast<double>(i));
            w.push_back(v);
        }
        const double ratio = w.back() / w.front();
        std::string s = std::string(tag_name(tag)) + ": W1 " + fmt("%.4f", w.front()) + " -> " + fmt("%.4f", w.back()) +
                        " ratio " + fmt("%.3f", ratio);
        o.require(ratio < 0.5, std::string(tag_name(tag)) + " ratio");
        if (tag == GeometryTag::HsvProduct) {
            const double rho = gan::spearman(idx, w);
            s += " spearman " + fmt("%.3f", rho) + " over " + std::to_string(w.size()) + " evals";
            o.require(w.size() >= 10, "fewer than 10 evaluations");
            o.require(rho <= -0.5, "spearman");
            o.require(secs < 600.0, "hsv runtime >= 10 min");
        }
        s += fmt(" %.0f s;", secs);
        o.note(s);
        std::fflush(stdout);
    }
    omp_set_num_threads(omp_get_num_procs());
    return o;
}

// Smooth synthetic tensor slice: rotating prolate ellipsoids.
ManifoldImage dti_slice(std::uint32_t h, std::uint32_t w, double phase) {
    ManifoldImage img(GeometryTag::Spd3, ImageDims{h, w}, default_anchors().spd);
    for (std::uint32_t r = 0; r < h; ++r)
        for (std::uint32_t c = 0; c < w; ++c) {
            const double th = phase + 3.0 * r / h + 2.0 * c / w;
            const double ev1 = 1.5 + 0.5 * std::sin(0.1 * (r + c)), ev2 = 0.4 + 0.1 * std::cos(0.07 * r), ev3 = 0.3;
            Eigen::Matrix3d rot = Eigen::AngleAxisd(th, Eigen::Vector3d::UnitZ()).toRotationMatrix();
            const Eigen::Matrix3d m = rot * Eigen::Vector3d(ev1, ev2, ev3).asDiagonal() * rot.transpose();
            Mat3 out;
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) out(i, j) = out(j, i) = m(i, j);
            img.at(r, c) = spd_point(out);
        }
    return img;
}

Outcome spd_repair() {
    Outcome o;
    Rng rng(808);
    std::size_t corrupted = 0, voxels = 0, invalid_after = 0, changed_on_rerun = 0, clean_touched = 0;
    for (int slice = 0; slice < 4; ++slice) {
        ManifoldImage raw = dti_slice(96, 96, 0.5 * slice);
        const std::size_t n = raw.pixels.size();
        const std::size_t k = static_cast<std::size_t>(std::llround(0.006 * static_cast<double>(n)));
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<bool> hit(n, false);
        for (std::size_t i = 0; i < k; ++i) {
            Mat3 m = raw.pixels[idx[i]].mat3();
            if (i % 2 == 0) {
                // Negative eigenvalue, as from a bad tensor fit.
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(m));
                Eigen::Vector3d l = es.eigenvalues();
                l[0] = -uniform(rng, 0.01, 0.5);
                const Eigen::Matrix3d b = es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
                for (int a = 0; a < 3; ++a)
                    for (int c = 0; c < 3; ++c) m(a, c) = b(a, c);
            } else {
                // Asymmetric and indefinite.
                m(0, 1) += 2.0;
                m(2, 2) = -0.2;
            }
            raw.pixels[idx[i]] = spd_point(m);
            hit[idx[i]] = true;
        }
        std::size_t invalid_before = 0;
        for (const auto& p : raw.pixels) invalid_before += eigen_min_eigenvalue(p.mat3()) <= 0.0 || !(p.mat3() == transpose(p.mat3()));
        corrupted += invalid_before;
        voxels += n;

        const RepairedImage rep = repair_spd_image(raw);
        for (std::size_t i = 0; i < n; ++i) {
            const Mat3 m = rep.image.pixels[i].mat3();
            bool sym = true;
            for (int a = 0; a < 3; ++a)
                for (int c = 0; c < 3; ++c) sym = sym && m(a, c) == m(c, a);
            if (!sym || !(eigen_min_eigenvalue(m) > 0.0)) ++invalid_after;
            if (!hit[i] && std::memcmp(m.m.data(), raw.pixels[i].mat3().m.data(), sizeof(double) * 9) != 0) ++clean_touched;
        }
        const RepairedImage again = repair_spd_image(rep.image);
        changed_on_rerun += again.report.repaired;
        for (std::size_t i = 0; i < n; ++i)
            changed_on_rerun += std::memcmp(again.image.pixels[i].data.data(), rep.image.pixels[i].data.data(), sizeof(double) * 9) != 0;
    }
    o.note(std::to_string(corrupted) + "/" + std::to_string(voxels) + fmt(" corrupted (%.2f%%)", 100.0 * corrupted / voxels) +
           ", invalid after " + std::to_string(invalid_after) + ", changed on re-run " + std::to_string(changed_on_rerun) +
           ", clean voxels altered " + std::to_string(clean_touched));
    o.require(invalid_after == 0, "invalid voxels remain");
    o.require(changed_on_rerun == 0, "not idempotent");
    return o;
}

Outcome codecs() {
    Outcome o;
    Rng rng(909);
    RgbImage img(ImageDims{128, 128});
    for (auto& px : img.pixels) {
        do {
            for (double& c : px) c = uniform(rng, 0.0, 1.0);
        } while (*std::max_element(px.begin(), px.end()) - *std::min_element(px.begin(), px.end()) < 1e-3);
    }
    double hsv_err = 0.0, cb_err = 0.0;
    const RgbImage via_hsv = hsv_to_rgb(rgb_to_hsv(img));
    const CbImage cb = rgb_to_cb(img);
    const RgbImage via_cb = cb_to_rgb(cb.chroma, cb.brightness);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            hsv_err = std::max(hsv_err, std::abs(via_hsv.pixels[i][c] - img.pixels[i][c]));
            cb_err = std::max(cb_err, std::abs(via_cb.pixels[i][c] - img.pixels[i][c]));
        }
    o.note("rgb<->hsv " + fmt("%.1e", hsv_err) + ", rgb<->cb " + fmt("%.1e", cb_err));
    o.require(hsv_err <= 1e-12, "rgb<->hsv");
    o.require(cb_err <= 1e-12, "rgb<->cb");

    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "mwgan_acceptance_mvi";
    std::filesystem::create_directories(dir);
    std::size_t mismatches = 0;
    for (GeometryTag tag : kTags) {
        ManifoldImage m(tag, ImageDims{17, 23}, random_point(tag, rng));
        for (auto& p : m.pixels) p = random_point(tag, rng);
        const auto path = dir / (std::string(tag_name(tag)) + ".mvi");
        save_mvi(m, path);
        const ManifoldImage back = load_mvi(path);
        const std::size_t vpp = values_per_point(tag);
        mismatches += back.tag != tag || !(back.dims == m.dims);
        for (std::size_t i = 0; i < m.pixels.size(); ++i)
            mismatches += std::memcmp(back.pixels[i].data.data(), m.pixels[i].data.data(), vpp * sizeof(double)) != 0;
        mismatches += std::memcmp(back.anchor.data.data(), m.anchor.data.data(), vpp * sizeof(double)) != 0;
        mismatches += encode_mvi(back) != encode_mvi(m);
    }
    std::filesystem::remove_all(dir);
    o.note("MVI bit mismatches " + std::to_string(mismatches));
    o.require(mismatches == 0, "MVI not bit-exact");
    return o;
}

} // namespace

int main(int argc, char** argv) {
    const std::string filter = argc > 1 ? argv[1] : "";
    const std::pair<const char*, Outcome (*)()> criteria[] = {
        {"geometry-round-trips", geometry_round_trips},
        {"norm-distance-identity", norm_distance_identity},
        {"ot-oracle-equivalence", ot_oracle},
        {"autodiff-finite-differences", autodiff},
        {"analytic-gradient-penalty", analytic_penalty},
        {"manifold-validity", manifold_validity},
        {"desk-scale-training", training},
        {"spd-repair", spd_repair},
        {"codec-round-trips", codecs},
    };
    int failed = 0, ran = 0;
    for (const auto& [name, fn] : criteria) {
        if (!filter.empty() && std::string(name).find(filter) == std::string::npos) continue;
        ++ran;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.note(std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return failed == 0 && ran > 0 ? 0 : 1;
}
