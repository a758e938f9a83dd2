#pragma once

#include "mwgan/autograd.hpp"
#include "mwgan/geometry.hpp"
#include "mwgan/imaging.hpp"
#include "mwgan/transport.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mwgan::gan {

using Rng = std::mt19937_64;
using ag::Tensor;

// ---------------------------------------------------------------------------
// Networks

// Fully connected net: leaky_relu(0.2) between layers, linear output.
// params = {W0, b0, W1, b1, ...} with W_l of shape sizes[l] x sizes[l+1].
struct Network {
    std::vector<std::size_t> sizes;
    std::vector<Tensor> params;
    double slope = 0.2;

    // He-normal weights, zero biases.
    static Network init(std::vector<std::size_t> sizes, Rng& rng);

    std::size_t input_dim() const { return sizes.front(); }
    std::size_t output_dim() const { return sizes.back(); }
    std::size_t parameter_count() const;

    // Throws ShapeError unless the parameter shapes follow `sizes`.
    void validate() const;

    // Forward pass with explicit parameters (tracked or not).
    Tensor forward(const Tensor& x, std::span<const Tensor> p) const;
    Tensor operator()(const Tensor& x) const { return forward(x, params); }
};

// Standard normal latent codes, reproducible from the seed.
class LatentSampler {
public:
    LatentSampler(std::size_t dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}
    std::size_t dim() const { return dim_; }
    Tensor sample(std::size_t batch);

private:
    std::size_t dim_;
    Rng rng_;
};

// ---------------------------------------------------------------------------
// Manifold layer. A sample is `pixels` points; its coordinate row is the
// concatenation of per-pixel tangent-basis coordinates at the anchor.

struct SampleShape {
    GeometryTag tag = GeometryTag::HsvProduct;
    ImageDims dims{1, 1};

    std::size_t pixels() const { return dims.pixel_count(); }
    std::size_t coords_per_sample() const { return pixels() * tangent_dim(tag); }
};

// exp_anchor of each raw coordinate block; returns batch * pixels points, sample-major.
std::vector<ManifoldPoint> generator_forward(const Network& g, const Tensor& z, const TangentBasis& basis,
                                             const SampleShape& shape);
std::vector<ManifoldPoint> points_from_coords(const Tensor& raw, const TangentBasis& basis, const SampleShape& shape);

// Per-pixel log_anchor basis coordinates, one row per sample.
Tensor coords_from_points(std::span<const ManifoldPoint> points, const TangentBasis& basis, const SampleShape& shape);

// Differentiable log_y(exp_y(raw)) in basis coordinates. HSV wraps hue
// (identity derivative), sphere rescales blocks with norm beyond pi
// (v - 2 pi k v/|v|), SPD is the identity.
Tensor canonicalize(const Tensor& raw, const TangentBasis& basis, const SampleShape& shape);

// D applied to coordinates of the points.
Tensor critic_forward(const Network& d, std::span<const ManifoldPoint> points, const TangentBasis& basis,
                      const SampleShape& shape);

struct Interpolates {
    Tensor coords;          // batch x coords_per_sample
    std::vector<double> t;  // one per sample
};

// x_hat = (1 - t) log_y(x_real) + t log_y(exp_y(g_raw)), one t ~ U[0,1] per sample.
Interpolates sample_interpolates(std::span<const ManifoldPoint> x_real, const Tensor& g_raw, const TangentBasis& basis,
                                 const SampleShape& shape, Rng& rng);
// Same with caller-chosen t.
Interpolates interpolates_at(std::span<const ManifoldPoint> x_real, const Tensor& g_raw, const TangentBasis& basis,
                             const SampleShape& shape, std::span<const double> t);

// ---------------------------------------------------------------------------
// Losses

struct CriticLoss {
    Tensor loss;         // -(E D(real) - E D(fake)) + gp
    Tensor gp;           // lambda * mean (|grad D(x_hat)| - 1)^2
    Tensor grad_norms;   // batch x 1
    double wasserstein;  // E D(real) - E D(fake)
};

// `d_params` may be tracked on a tape; inputs are tangent-coordinate batches.
CriticLoss critic_loss(const Network& d, std::span<const Tensor> d_params, const Tensor& x_real, const Tensor& x_gen,
                       const Tensor& x_hat, double lambda);

// -mean D(canonicalize(G(z))).
Tensor generator_loss(const Network& d, std::span<const Tensor> d_params, const Network& g,
                      std::span<const Tensor> g_params, const Tensor& z, const TangentBasis& basis,
                      const SampleShape& shape);

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<std::vector<double>> m, v;
    std::size_t step = 0;
};

// One bias-corrected Adam update in place.
void adam_step(std::vector<Tensor>& params, std::span<const Tensor> grads, AdamState& state, double lr,
               const AdamConfig& cfg = {});

// alpha * (1 - iter / budget) for 0-based generator iteration `iter`.
double linear_decay(double alpha, std::size_t iter, std::size_t budget);

// ---------------------------------------------------------------------------
// Synthetic targets

struct MixtureComponent {
    double weight = 1.0;
    ManifoldPoint mean;
    // HSV: hue std (radians) of the wrapped Gaussian; sphere: vMF concentration
    // (infinity allowed); SPD: std of the symmetric Gaussian in log space.
    double spread = 0.1;
    // HSV only: Gaussian std for saturation/value, clipped to [0, 1].
    double sv_spread = 0.05;
};

struct SyntheticTarget {
    GeometryTag tag = GeometryTag::HsvProduct;
    std::vector<MixtureComponent> components;
    std::uint64_t seed = 0;

    void validate() const;
};

// One point per draw; with shape.pixels() > 1 every pixel of a sample comes
// from the same component.
SampleSet synth_targets(const SyntheticTarget& target, std::size_t n, std::uint64_t seed,
                        const SampleShape& shape = {});

// Draw from a single von Mises-Fisher distribution on S^2 (Wood's method).
ManifoldPoint sample_vmf(const Vec3& mean, double kappa, Rng& rng);

// Built-in desk-scale targets used by the acceptance runs and example configs.
SyntheticTarget default_target(GeometryTag tag);

// ---------------------------------------------------------------------------
// Training

enum class EvalCost { Geodesic, Anchored };

struct TrainerConfig {
    GeometryTag tag = GeometryTag::HsvProduct;
    std::optional<ManifoldPoint> anchor; // defaults to the geometry's anchor
    ImageDims dims{1, 1};
    double alpha = 2e-4;
    std::size_t batch = 64;
    std::size_t n_critic = 5;
    double lambda = 10.0;
    std::size_t iterations = 2000; // generator-iteration budget
    std::uint64_t seed = 0;
    std::size_t latent_dim = 32;
    std::vector<std::size_t> hidden{128, 128};
    std::size_t eval_interval = 100;
    std::size_t eval_samples = 256;
    EvalCost eval_cost = EvalCost::Geodesic;
    W1Method eval_method = W1Method::Exact;
    // beta1 0.5, beta2 0.9 as in common WGAN-GP practice; the update itself defaults to 0.9 / 0.999.
    AdamConfig adam{0.5, 0.9, 1e-8};

    SampleShape shape() const { return {tag, dims}; }
    ManifoldPoint anchor_point() const;
    void validate() const;
};

struct LogRow {
    std::size_t iter = 0;
    std::optional<double> critic_loss, gen_loss, gp_term, w1_eval;
    double lr = 0.0;
};

struct TrainingLog {
    std::vector<LogRow> rows;
    std::string to_csv() const;
    static TrainingLog from_csv(const std::string& text);
    // (iter, w1) for rows with an evaluation.
    std::vector<std::pair<std::size_t, double>> evaluations() const;
};

struct TrainingData {
    SampleSet train;
    SampleSet heldout;
};

struct Checkpoint {
    std::size_t iter = 0;
    TrainerConfig config;
    Network generator;
    Network critic;
};

struct TrainingResult {
    TrainingLog log;
    Network generator;
    Network critic;
    std::size_t generator_updates = 0;
    std::size_t critic_updates = 0;
};

// Thrown when a loss becomes non-finite; what() carries the diagnostic snapshot.
class NanAbort : public std::runtime_error {
public:
    NanAbort(const std::string& what, std::string snapshot_json)
        : std::runtime_error(what), snapshot_(std::move(snapshot_json)) {}
    const std::string& snapshot() const { return snapshot_; }

private:
    std::string snapshot_;
};

struct TrainHooks {
    std::function<void(const Checkpoint&)> on_checkpoint; // at every evaluation
    std::function<void(const LogRow&)> on_row;
};

// Training loop with n_critic critic updates per generator update. Evaluates W1 at
// iteration 0 and every eval_interval iterations and at the end.
TrainingResult train(const TrainerConfig& config, const TrainingData& data, const TrainHooks& hooks = {});

// Training data drawn from a synthetic target: `n_train` training samples and
// config.eval_samples held-out samples from an independent stream.
TrainingData make_training_data(const SyntheticTarget& target, const TrainerConfig& config, std::size_t n_train);

// Held-out W1 of the generator on a fixed latent batch.
double evaluate_w1(const Network& g, const Tensor& z_eval, const SampleSet& heldout, const TrainerConfig& config);

// Checkpoints: flat little-endian float64 payload plus a JSON sidecar with
// shapes and the trainer config.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& bin_path);
Checkpoint load_checkpoint(const std::filesystem::path& bin_path);
std::filesystem::path checkpoint_sidecar(const std::filesystem::path& bin_path);

double spearman(std::span<const double> x, std::span<const double> y);

} // namespace mwgan::gan
