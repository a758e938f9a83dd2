#include "mwgan/gan.hpp"

#include "mwgan/errors.hpp"
#include "mwgan/kernels.hpp"

#include <cmath>

namespace mwgan::gan {

// ---------------------------------------------------------------------------
// Networks

Network Network::init(std::vector<std::size_t> sizes, Rng& rng) {
    if (sizes.size() < 2) throw ShapeError("Network: need at least an input and an output size");
    for (std::size_t s : sizes)
        if (s == 0) throw ShapeError("Network: layer sizes must be positive");
    Network net;
    net.sizes = std::move(sizes);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
        const std::size_t in = net.sizes[l], out = net.sizes[l + 1];
        const double std = std::sqrt(2.0 / static_cast<double>(in));
        std::vector<double> w(in * out);
        for (double& x : w) x = std * normal(rng);
        net.params.emplace_back(in, out, std::move(w));
        net.params.push_back(Tensor::zeros(ag::Shape{1, out}));
    }
    return net;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.size();
    return n;
}

void Network::validate() const {
    if (sizes.size() < 2 || params.size() != 2 * (sizes.size() - 1))
        throw ShapeError("Network: parameter list does not match the layer sizes");
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        if (!(params[2 * l].shape() == ag::Shape{sizes[l], sizes[l + 1]}) ||
            !(params[2 * l + 1].shape() == ag::Shape{1, sizes[l + 1]}))
            throw ShapeError("Network: layer " + std::to_string(l) + " has shapes " + ag::to_string(params[2 * l].shape()) +
                             " / " + ag::to_string(params[2 * l + 1].shape()));
    }
}

Tensor Network::forward(const Tensor& x, std::span<const Tensor> p) const {
    if (p.size() != params.size()) throw ShapeError("Network::forward: wrong number of parameter tensors");
    if (x.cols() != input_dim())
        throw ShapeError("Network::forward: input " + ag::to_string(x.shape()) + " but network expects " +
                         std::to_string(input_dim()) + " columns");
    Tensor h = x;
    const std::size_t layers = sizes.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        h = ag::add_bias(ag::matmul(h, p[2 * l]), p[2 * l + 1]);
        if (l + 1 < layers) h = ag::leaky_relu(h, slope);
    }
    return h;
}

Tensor LatentSampler::sample(std::size_t batch) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(batch * dim_);
    for (double& x : z) x = normal(rng_);
    return Tensor(batch, dim_, std::move(z));
}

// ---------------------------------------------------------------------------
// Manifold layer

namespace {

void check_coords(const Tensor& t, const TangentBasis& basis, const SampleShape& shape, const char* what) {
    if (basis.tag() != shape.tag) throw GeometryError(std::string(what) + ": basis geometry does not match the sample shape");
    if (t.cols() != shape.coords_per_sample())
        throw ShapeError(std::string(what) + ": expected " + std::to_string(shape.coords_per_sample()) +
                         " coordinates per sample, got " + ag::to_string(t.shape()));
}

} // namespace

std::vector<ManifoldPoint> points_from_coords(const Tensor& raw, const TangentBasis& basis, const SampleShape& shape) {
    check_coords(raw, basis, shape, "points_from_coords");
    std::vector<ManifoldPoint> pts(raw.rows() * shape.pixels());
    kernels::decode_tangent_field(raw.data(), basis, pts);
    return pts;
}

std::vector<ManifoldPoint> generator_forward(const Network& g, const Tensor& z, const TangentBasis& basis,
                                             const SampleShape& shape) {
    return points_from_coords(g(z).detach(), basis, shape);
}

Tensor coords_from_points(std::span<const ManifoldPoint> points, const TangentBasis& basis, const SampleShape& shape) {
    if (points.size() % shape.pixels() != 0) throw ShapeError("coords_from_points: point count is not a multiple of the sample size");
    const std::size_t batch = points.size() / shape.pixels();
    std::vector<double> out(batch * shape.coords_per_sample());
    kernels::encode_tangent_field(points, basis, out);
    return Tensor(batch, shape.coords_per_sample(), std::move(out));
}

Tensor canonicalize(const Tensor& raw, const TangentBasis& basis, const SampleShape& shape) {
    check_coords(raw, basis, shape, "canonicalize");
    if (shape.tag != GeometryTag::Sphere2) {
        // log_y . exp_y is the identity up to the hue wrap, which has unit derivative.
        const Tensor canon = coords_from_points(points_from_coords(raw.detach(), basis, shape), basis, shape);
        if (!raw.requires_grad()) return canon;
        return raw.tape()->record(canon, {raw}, [](const Tensor& g) { return std::vector<Tensor>{g}; });
    }
    // Sphere: a block of norm r maps to the same direction with norm r - 2 pi k, k = round(r / 2 pi).
    std::vector<double> shift(raw.size(), 0.0);
    bool any = false;
    for (std::size_t k = 0; k < raw.size(); k += 2) {
        const double r = std::hypot(raw[k], raw[k + 1]);
        const double wraps = std::round(r / kTwoPi);
        if (wraps != 0.0) {
            shift[k] = shift[k + 1] = kTwoPi * wraps;
            any = true;
        }
    }
    if (!any) return raw;
    const Tensor norms =
        ag::group_repeat(ag::sqrt(ag::clamp_min(ag::group_sum(ag::square(raw), 2), ag::kNormFloor)), 2);
    return ag::sub(raw, ag::mul(Tensor(raw.shape(), std::move(shift)), ag::div(raw, norms)));
}

Tensor critic_forward(const Network& d, std::span<const ManifoldPoint> points, const TangentBasis& basis,
                      const SampleShape& shape) {
    return d(coords_from_points(points, basis, shape));
}

Interpolates interpolates_at(std::span<const ManifoldPoint> x_real, const Tensor& g_raw, const TangentBasis& basis,
                             const SampleShape& shape, std::span<const double> t) {
    check_coords(g_raw, basis, shape, "sample_interpolates");
    const std::size_t batch = g_raw.rows(), pixels = shape.pixels(), dim = basis.dim();
    if (x_real.size() != batch * pixels || t.size() != batch)
        throw ShapeError("sample_interpolates: real and generated batch sizes differ");
    std::vector<double> out(g_raw.size());
    const auto raw = g_raw.data();
    kernels::for_each_index(batch * pixels, kernels::Exec::Parallel, [&](std::size_t q) {
        const TangentVector g = basis.from_coords(raw.subspan(q * dim, dim));
        basis.to_coords(interpolate(basis.anchor(), x_real[q], g, t[q / pixels]), std::span(out).subspan(q * dim, dim));
    });
    return Interpolates{Tensor(g_raw.shape(), std::move(out)), std::vector<double>(t.begin(), t.end())};
}

Interpolates sample_interpolates(std::span<const ManifoldPoint> x_real, const Tensor& g_raw, const TangentBasis& basis,
                                 const SampleShape& shape, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> t(g_raw.rows());
    for (double& x : t) x = u(rng);
    return interpolates_at(x_real, g_raw, basis, shape, t);
}

// ---------------------------------------------------------------------------
// Losses

CriticLoss critic_loss(const Network& d, std::span<const Tensor> d_params, const Tensor& x_real, const Tensor& x_gen,
                       const Tensor& x_hat, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("critic_loss: lambda must be nonnegative");
    if (!(x_real.shape() == x_gen.shape()) || !(x_hat.shape() == x_real.shape()))
        throw ShapeError("critic_loss: real " + ag::to_string(x_real.shape()) + ", generated " +
                         ag::to_string(x_gen.shape()) + " and interpolate " + ag::to_string(x_hat.shape()) +
                         " batches differ");
    ag::Tape* tape = nullptr;
    for (const auto& p : d_params)
        if (p.tape() != nullptr) tape = p.tape();
    std::optional<ag::Tape> local;
    if (tape == nullptr) tape = &local.emplace();

    const Tensor real_score = ag::mean(d.forward(x_real, d_params));
    const Tensor fake_score = ag::mean(d.forward(x_gen, d_params));
    const Tensor wasserstein = ag::sub(real_score, fake_score);

    const Tensor xh = tape->variable(x_hat);
    const Tensor grad_x = ag::grad(ag::sum(d.forward(xh, d_params)), xh, true);
    const Tensor norms = ag::l2_norm(grad_x, ag::NormAxis::Rows);
    const Tensor gp = ag::scale(ag::mean(ag::square(ag::add_scalar(norms, -1.0))), lambda);
    const Tensor loss = ag::add(ag::neg(wasserstein), gp);

    if (local) return CriticLoss{loss.detach(), gp.detach(), norms.detach(), wasserstein.item()};
    return CriticLoss{loss, gp, norms, wasserstein.item()};
}

Tensor generator_loss(const Network& d, std::span<const Tensor> d_params, const Network& g,
                      std::span<const Tensor> g_params, const Tensor& z, const TangentBasis& basis,
                      const SampleShape& shape) {
    const Tensor coords = canonicalize(g.forward(z, g_params), basis, shape);
    return ag::neg(ag::mean(d.forward(coords, d_params)));
}

// ---------------------------------------------------------------------------
// Adam

void adam_step(std::vector<Tensor>& params, std::span<const Tensor> grads, AdamState& state, double lr,
               const AdamConfig& cfg) {
    if (grads.size() != params.size()) throw ShapeError("adam_step: parameter and gradient counts differ");
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p.size(), 0.0);
            state.v.emplace_back(p.size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw ShapeError("adam_step: optimizer state does not match the parameters");
    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const Tensor& p = params[k];
        const Tensor& g = grads[k];
        if (!(p.shape() == g.shape()) || state.m[k].size() != p.size())
            throw ShapeError("adam_step: parameter " + ag::to_string(p.shape()) + " and gradient " + ag::to_string(g.shape()) +
                             " differ");
        std::vector<double> next(p.data().begin(), p.data().end());
        auto& m = state.m[k];
        auto& v = state.v[k];
        for (std::size_t i = 0; i < next.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            next[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
        }
        params[k] = Tensor(p.shape(), std::move(next));
    }
}

double linear_decay(double alpha, std::size_t iter, std::size_t budget) {
    if (budget == 0) return alpha;
    return alpha * (1.0 - static_cast<double>(iter) / static_cast<double>(budget));
}

} // namespace mwgan::gan
