#include "mwgan/transport.hpp"

#include "mwgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mwgan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_weight_vector(std::span<const double> w, const char* what) {
    if (w.empty()) throw ShapeError(std::string(what) + ": empty weight vector");
    for (double x : w)
        if (!std::isfinite(x) || x < 0.0) throw DataError(std::string(what) + ": weights must be finite and nonnegative");
}

void check_problem(const CostMatrix& cost, std::span<const double> wa, std::span<const double> wb, const char* what) {
    if (cost.values.size() != cost.rows * cost.cols) throw ShapeError(std::string(what) + ": malformed cost matrix");
    if (wa.size() != cost.rows || wb.size() != cost.cols)
        throw ShapeError(std::string(what) + ": weight lengths do not match the cost matrix");
    check_weight_vector(wa, what);
    check_weight_vector(wb, what);
    for (double c : cost.values)
        if (!std::isfinite(c)) throw DataError(std::string(what) + ": cost matrix has non-finite entries");
    const double sa = std::accumulate(wa.begin(), wa.end(), 0.0);
    const double sb = std::accumulate(wb.begin(), wb.end(), 0.0);
    if (std::abs(sa - sb) > kWeightSumTol) {
        std::ostringstream os;
        os << what << ": infeasible weights, total masses " << sa << " and " << sb << " differ";
        throw DataError(os.str());
    }
}

TransportPlan empty_plan(const CostMatrix& cost, std::span<const double> wa, std::span<const double> wb) {
    TransportPlan plan;
    plan.rows = cost.rows;
    plan.cols = cost.cols;
    plan.gamma.assign(cost.rows * cost.cols, 0.0);
    plan.source_weights.assign(wa.begin(), wa.end());
    plan.target_weights.assign(wb.begin(), wb.end());
    return plan;
}

double plan_cost(const TransportPlan& plan, const CostMatrix& cost) {
    double s = 0.0;
    for (std::size_t k = 0; k < plan.gamma.size(); ++k) s += plan.gamma[k] * cost.values[k];
    return s;
}

bool is_uniform_square(std::span<const double> wa, std::span<const double> wb) {
    if (wa.size() != wb.size()) return false;
    const double u = 1.0 / static_cast<double>(wa.size());
    auto near = [u](double w) { return std::abs(w - u) <= 1e-12; };
    return std::all_of(wa.begin(), wa.end(), near) && std::all_of(wb.begin(), wb.end(), near);
}

double log_sum_exp(std::span<const double> xs) {
    double mx = -kInf;
    for (double x : xs) mx = std::max(mx, x);
    if (mx == -kInf) return -kInf;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
}

} // namespace

// ---------------------------------------------------------------------------
// Sample sets and costs

void SampleSet::validate() const {
    if (weights.empty()) throw ShapeError("SampleSet: empty");
    if (pixels_per_item == 0 || points.size() != weights.size() * pixels_per_item)
        throw ShapeError("SampleSet: point count does not match items x pixels_per_item");
    check_weight_vector(weights, "SampleSet");
    const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-12) throw DataError("SampleSet: weights must sum to 1");
    for (const auto& p : points) {
        if (p.tag != tag) throw GeometryError("SampleSet: point geometry does not match the set");
        validate_point(p);
    }
}

SampleSet SampleSet::uniform(GeometryTag tag, std::vector<ManifoldPoint> points, std::size_t pixels_per_item) {
    if (pixels_per_item == 0 || points.empty() || points.size() % pixels_per_item != 0)
        throw ShapeError("SampleSet::uniform: point count must be a positive multiple of pixels_per_item");
    SampleSet s;
    s.tag = tag;
    s.pixels_per_item = pixels_per_item;
    const std::size_t n = points.size() / pixels_per_item;
    s.points = std::move(points);
    s.weights.assign(n, 1.0 / static_cast<double>(n));
    return s;
}

SampleSet sample_set_from_images(std::span<const ManifoldImage> images) {
    if (images.empty()) throw ShapeError("sample_set_from_images: no images");
    std::vector<ManifoldPoint> pts;
    pts.reserve(images.size() * images.front().pixels.size());
    for (const auto& img : images) {
        if (img.tag != images.front().tag) throw GeometryError("sample_set_from_images: mixed geometries");
        if (!(img.dims == images.front().dims)) throw ShapeError("sample_set_from_images: mixed image sizes");
        pts.insert(pts.end(), img.pixels.begin(), img.pixels.end());
    }
    return SampleSet::uniform(images.front().tag, std::move(pts), images.front().dims.pixel_count());
}

CostMatrix cost_matrix(const SampleSet& a, const SampleSet& b, GroundCost ground,
                       const std::optional<ManifoldPoint>& anchor, kernels::Exec exec) {
    if (a.tag != b.tag) throw GeometryError("cost_matrix: sample sets live on different geometries");
    if (a.pixels_per_item != b.pixels_per_item) throw ShapeError("cost_matrix: item sizes differ");
    CostMatrix c{a.size(), b.size(), std::vector<double>(a.size() * b.size())};
    if (ground == GroundCost::Geodesic) {
        kernels::geodesic_cost_matrix(a.points, b.points, a.pixels_per_item, c.values, exec);
        return c;
    }
    const ManifoldPoint base = anchor.value_or(default_anchors().for_tag(a.tag));
    if (base.tag != a.tag) throw GeometryError("cost_matrix: anchor geometry mismatch");
    const TangentBasis basis(base);
    std::vector<double> ca(a.points.size() * basis.dim()), cb(b.points.size() * basis.dim());
    kernels::encode_tangent_field(a.points, basis, ca, exec);
    kernels::encode_tangent_field(b.points, basis, cb, exec);
    kernels::euclidean_cost_matrix(ca, cb, a.pixels_per_item * basis.dim(), c.values, exec);
    return c;
}

double TransportPlan::marginal_error() const {
    double err = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += gamma[i * cols + j];
        err += std::abs(s - source_weights[i]);
    }
    for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += gamma[i * cols + j];
        err += std::abs(s - target_weights[j]);
    }
    return err;
}

// ---------------------------------------------------------------------------
// Hungarian method (shortest augmenting paths with potentials), O(n^3).

std::vector<std::size_t> solve_assignment(const CostMatrix& cost) {
    const std::size_t n = cost.rows;
    if (n == 0 || cost.cols != n || cost.values.size() != n * n)
        throw ShapeError("solve_assignment: cost matrix must be square and nonempty");
    // 1-based, column 0 is a virtual source.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 1; j <= n; ++j) perm[match[j] - 1] = j - 1;
    return perm;
}

// ---------------------------------------------------------------------------
// Transportation simplex on a spanning tree of the bipartite graph.
// Nodes 0..n-1 are sources, n..n+m-1 sinks. The basis always holds n+m-1 arcs.

namespace {

struct BasicArc {
    std::size_t i;
    std::size_t j;
    double flow;
};

class TransportationTree {
public:
    TransportationTree(const CostMatrix& cost, std::span<const double> wa, std::span<const double> wb)
        : cost_(cost), n_(cost.rows), m_(cost.cols) {
        northwest_corner(wa, wb);
        adj_.resize(n_ + m_);
        parent_arc_.resize(n_ + m_);
        parent_.resize(n_ + m_);
        depth_.resize(n_ + m_);
        pot_.resize(n_ + m_);
        double cmax = 0.0;
        for (double c : cost.values) cmax = std::max(cmax, std::abs(c));
        tol_ = 1e-12 * std::max(1.0, cmax);
    }

    std::size_t solve() {
        std::size_t pivots = 0;
        for (;;) {
            rebuild();
            const auto entering = find_entering();
            if (!entering) return pivots;
            pivot(entering->first, entering->second);
            ++pivots;
        }
    }

    const std::vector<BasicArc>& arcs() const { return arcs_; }

private:
    void northwest_corner(std::span<const double> wa, std::span<const double> wb) {
        std::vector<double> supply(wa.begin(), wa.end()), demand(wb.begin(), wb.end());
        std::size_t i = 0, j = 0;
        for (;;) {
            const double x = std::min(supply[i], demand[j]);
            arcs_.push_back({i, j, x});
            supply[i] -= x;
            demand[j] -= x;
            if (i + 1 == n_ && j + 1 == m_) break;
            // On a tie advance the row only, leaving a degenerate zero arc in the next cell.
            if (j + 1 == m_ || (i + 1 < n_ && supply[i] <= demand[j])) ++i;
            else ++j;
        }
    }

    // Tree adjacency, BFS order from source 0, parents, depths and potentials
    // u_i + v_j = c_ij on basic arcs.
    void rebuild() {
        for (auto& a : adj_) a.clear();
        for (std::size_t k = 0; k < arcs_.size(); ++k) {
            adj_[arcs_[k].i].push_back(k);
            adj_[n_ + arcs_[k].j].push_back(k);
        }
        std::vector<std::size_t> queue{0};
        std::vector<char> seen(n_ + m_, 0);
        seen[0] = 1;
        parent_[0] = 0;
        depth_[0] = 0;
        pot_[0] = 0.0;
        for (std::size_t q = 0; q < queue.size(); ++q) {
            const std::size_t node = queue[q];
            for (std::size_t k : adj_[node]) {
                const std::size_t other = node < n_ ? n_ + arcs_[k].j : arcs_[k].i;
                if (seen[other]) continue;
                seen[other] = 1;
                parent_[other] = node;
                parent_arc_[other] = k;
                depth_[other] = depth_[node] + 1;
                pot_[other] = cost_(arcs_[k].i, arcs_[k].j) - pot_[node];
                queue.push_back(other);
            }
        }
    }

    // Bland: the lowest-index nonbasic arc with negative reduced cost.
    std::optional<std::pair<std::size_t, std::size_t>> find_entering() const {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                if (cost_(i, j) - pot_[i] - pot_[n_ + j] < -tol_) return std::pair{i, j};
        return std::nullopt;
    }

    void pivot(std::size_t ei, std::size_t ej) {
        // Tree path from sink ej to source ei; arcs alternate -, +, -, ... from the sink side.
        std::vector<std::size_t> from_j, from_i;
        std::size_t a = n_ + ej, b = ei;
        while (depth_[a] > depth_[b]) {
            from_j.push_back(parent_arc_[a]);
            a = parent_[a];
        }
        while (depth_[b] > depth_[a]) {
            from_i.push_back(parent_arc_[b]);
            b = parent_[b];
        }
        while (a != b) {
            from_j.push_back(parent_arc_[a]);
            a = parent_[a];
            from_i.push_back(parent_arc_[b]);
            b = parent_[b];
        }
        std::vector<std::size_t> path = std::move(from_j);
        path.insert(path.end(), from_i.rbegin(), from_i.rend());

        std::size_t leave = path[0];
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const BasicArc& cand = arcs_[path[k]];
            const BasicArc& best = arcs_[leave];
            if (cand.flow < best.flow || (cand.flow == best.flow && index(cand) < index(best))) leave = path[k];
        }
        const double theta = arcs_[leave].flow;
        for (std::size_t k = 0; k < path.size(); ++k) {
            double& f = arcs_[path[k]].flow;
            f = k % 2 == 0 ? std::max(f - theta, 0.0) : f + theta;
        }
        arcs_[leave] = BasicArc{ei, ej, theta};
    }

    std::size_t index(const BasicArc& a) const { return a.i * m_ + a.j; }

    const CostMatrix& cost_;
    std::size_t n_, m_;
    double tol_ = 0.0;
    std::vector<BasicArc> arcs_;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<std::size_t> parent_, parent_arc_, depth_;
    std::vector<double> pot_;
};

} // namespace

TransportPlan solve_transportation_simplex(const CostMatrix& cost, std::span<const double> wa,
                                           std::span<const double> wb) {
    check_problem(cost, wa, wb, "solve_w1_exact");
    TransportationTree tree(cost, wa, wb);
    TransportPlan plan = empty_plan(cost, wa, wb);
    plan.iterations = tree.solve();
    for (const auto& arc : tree.arcs()) plan.gamma[arc.i * cost.cols + arc.j] += arc.flow;
    plan.cost = plan_cost(plan, cost);
    return plan;
}

TransportPlan solve_w1_exact(const CostMatrix& cost, std::span<const double> wa, std::span<const double> wb) {
    check_problem(cost, wa, wb, "solve_w1_exact");
    if (!is_uniform_square(wa, wb)) return solve_transportation_simplex(cost, wa, wb);
    const auto perm = solve_assignment(cost);
    TransportPlan plan = empty_plan(cost, wa, wb);
    for (std::size_t i = 0; i < perm.size(); ++i) plan.gamma[i * cost.cols + perm[i]] = wa[i];
    plan.cost = plan_cost(plan, cost);
    return plan;
}

// ---------------------------------------------------------------------------
// Sinkhorn

TransportPlan solve_w1_sinkhorn(const CostMatrix& cost, std::span<const double> wa, std::span<const double> wb,
                                double epsilon, std::size_t max_iter) {
    check_problem(cost, wa, wb, "solve_w1_sinkhorn");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("solve_w1_sinkhorn: epsilon must be positive");
    const std::size_t n = cost.rows, m = cost.cols;
    std::vector<double> f(n, 0.0), g(m, 0.0), log_a(n), log_b(m), buf(std::max(n, m));
    for (std::size_t i = 0; i < n; ++i) log_a[i] = wa[i] > 0.0 ? std::log(wa[i]) : -kInf;
    for (std::size_t j = 0; j < m; ++j) log_b[j] = wb[j] > 0.0 ? std::log(wb[j]) : -kInf;

    TransportPlan plan = empty_plan(cost, wa, wb);
    plan.converged = false;
    auto row_error = [&](double eps) {
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            if (f[i] != -kInf)
                for (std::size_t j = 0; j < m; ++j)
                    if (g[j] != -kInf) s += std::exp((f[i] + g[j] - cost(i, j)) / eps);
            err += std::abs(s - wa[i]);
        }
        return err;
    };

    // Potentials are warm-started along a geometric epsilon schedule that
    // ends at the requested value; small epsilon from a cold start can take
    // orders of magnitude more sweeps.
    double cmax = 0.0;
    for (double c : cost.values) cmax = std::max(cmax, c);
    std::vector<double> schedule;
    for (double e = cmax; e > epsilon; e *= 0.5) schedule.push_back(e);
    schedule.push_back(epsilon);

    std::size_t it = 0;
    for (std::size_t stage = 0; stage < schedule.size() && it < max_iter; ++stage) {
        const double eps = schedule[stage];
        const bool last = stage + 1 == schedule.size();
        const std::size_t stage_cap = last ? max_iter : std::min<std::size_t>(max_iter, it + 100);
        while (it < stage_cap) {
            ++it;
            for (std::size_t i = 0; i < n; ++i) {
                if (log_a[i] == -kInf) {
                    f[i] = -kInf;
                    continue;
                }
                for (std::size_t j = 0; j < m; ++j) buf[j] = (g[j] - cost(i, j)) / eps;
                f[i] = eps * (log_a[i] - log_sum_exp(std::span(buf.data(), m)));
            }
            for (std::size_t j = 0; j < m; ++j) {
                if (log_b[j] == -kInf) {
                    g[j] = -kInf;
                    continue;
                }
                for (std::size_t i = 0; i < n; ++i) buf[i] = (f[i] - cost(i, j)) / eps;
                g[j] = eps * (log_b[j] - log_sum_exp(std::span(buf.data(), n)));
            }
            // Columns match exactly after the g update; rows carry the residual.
            if (row_error(eps) < kSinkhornMarginalTol) {
                if (last) plan.converged = true;
                break;
            }
        }
    }
    plan.iterations = it;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (f[i] != -kInf && g[j] != -kInf) plan.gamma[i * m + j] = std::exp((f[i] + g[j] - cost(i, j)) / epsilon);
    plan.cost = plan_cost(plan, cost);
    return plan;
}

// ---------------------------------------------------------------------------

W1Method parse_w1_method(std::string_view name) {
    if (name == "auto") return W1Method::Auto;
    if (name == "exact") return W1Method::Exact;
    if (name == "sinkhorn") return W1Method::Sinkhorn;
    throw std::invalid_argument("unknown W1 method '" + std::string(name) + "' (expected auto, exact or sinkhorn)");
}

std::string_view w1_method_name(W1Method m) {
    switch (m) {
    case W1Method::Auto: return "auto";
    case W1Method::Exact: return "exact";
    case W1Method::Sinkhorn: return "sinkhorn";
    }
    return "?";
}

W1Result w1_detailed(const SampleSet& a, const SampleSet& b, const W1Options& opts) {
    a.validate();
    b.validate();
    const CostMatrix cost = cost_matrix(a, b, opts.ground, opts.anchor, opts.exec);
    W1Method method = opts.method;
    if (method == W1Method::Auto) method = cost.values.size() <= kExactEntryLimit ? W1Method::Exact : W1Method::Sinkhorn;

    W1Result r;
    r.method = method;
    if (method == W1Method::Exact) {
        r.plan = solve_w1_exact(cost, a.weights, b.weights);
    } else {
        double eps = opts.epsilon;
        if (eps <= 0.0) {
            const double mean = std::accumulate(cost.values.begin(), cost.values.end(), 0.0) / cost.values.size();
            if (mean == 0.0) {
                // All costs vanish: every coupling is optimal.
                r.plan = empty_plan(cost, a.weights, b.weights);
                for (std::size_t i = 0; i < cost.rows; ++i)
                    for (std::size_t j = 0; j < cost.cols; ++j)
                        r.plan.gamma[i * cost.cols + j] = a.weights[i] * b.weights[j];
                return r;
            }
            eps = 0.01 * mean;
        }
        r.plan = solve_w1_sinkhorn(cost, a.weights, b.weights, eps, opts.max_iter);
    }
    r.value = r.plan.cost;
    return r;
}

double w1(const SampleSet& a, const SampleSet& b, const W1Options& opts) {
    const W1Result r = w1_detailed(a, b, opts);
    if (!r.plan.converged) {
        std::ostringstream os;
        os << "w1: Sinkhorn did not reach marginal tolerance within " << r.plan.iterations << " iterations";
        throw ConvergenceError(os.str());
    }
    return r.value;
}

} // namespace mwgan
