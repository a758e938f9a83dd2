#include "mwgan/config.hpp"
#include "mwgan/gan.hpp"

#include "common/byte_io.hpp"
#include "mwgan/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace mwgan::gan {

ManifoldPoint TrainerConfig::anchor_point() const { return anchor ? *anchor : default_anchors().for_tag(tag); }

void TrainerConfig::validate() const {
    const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(alpha)) throw std::invalid_argument("alpha must be positive");
    if (batch == 0) throw std::invalid_argument("batch must be positive");
    if (n_critic == 0) throw std::invalid_argument("n_critic must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be nonnegative");
    if (latent_dim == 0) throw std::invalid_argument("latent_dim must be positive");
    for (std::size_t h : hidden)
        if (h == 0) throw std::invalid_argument("hidden widths must be positive");
    if (eval_interval == 0) throw std::invalid_argument("eval_interval must be positive");
    if (eval_samples == 0) throw std::invalid_argument("eval_samples must be positive");
    if (dims.pixel_count() == 0) throw std::invalid_argument("image dimensions must be positive");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
        throw std::invalid_argument("Adam betas must lie in [0, 1)");
    if (!positive(adam.eps)) throw std::invalid_argument("Adam eps must be positive");
    if (anchor) {
        if (anchor->tag != tag) throw GeometryError("anchor geometry does not match the config");
        validate_point(*anchor);
    }
}

// ---------------------------------------------------------------------------
// Log

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* kLogHeader = "iter,critic_loss,gen_loss,gp_term,w1_eval,lr";

} // namespace

std::string TrainingLog::to_csv() const {
    std::string out = std::string(kLogHeader) + "\n";
    const auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    for (const auto& r : rows) {
        out += std::to_string(r.iter) + "," + cell(r.critic_loss) + "," + cell(r.gen_loss) + "," + cell(r.gp_term) + "," +
               cell(r.w1_eval) + "," + fmt(r.lr) + "\n";
    }
    return out;
}

TrainingLog TrainingLog::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("log: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kLogHeader) throw FormatError("log: unexpected header '" + line + "'");
    TrainingLog log;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        const std::string where = "log line " + std::to_string(lineno);
        if (cells.size() != 6) throw FormatError(where + ": expected 6 columns");
        const auto num = [&](const std::string& s) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s, &used);
            } catch (const std::exception&) {
                throw FormatError(where + ": bad number '" + s + "'");
            }
            if (used != s.size()) throw FormatError(where + ": bad number '" + s + "'");
            return v;
        };
        const auto opt = [&](const std::string& s) { return s.empty() ? std::optional<double>() : num(s); };
        LogRow r;
        const double iter = num(cells[0]);
        if (!(iter >= 0.0) || iter != std::floor(iter)) throw FormatError(where + ": bad iteration");
        r.iter = static_cast<std::size_t>(iter);
        r.critic_loss = opt(cells[1]);
        r.gen_loss = opt(cells[2]);
        r.gp_term = opt(cells[3]);
        r.w1_eval = opt(cells[4]);
        r.lr = num(cells[5]);
        log.rows.push_back(r);
    }
    return log;
}

std::vector<std::pair<std::size_t, double>> TrainingLog::evaluations() const {
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& r : rows)
        if (r.w1_eval) out.emplace_back(r.iter, *r.w1_eval);
    return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

// Independent generator streams derived from one seed.
struct Streams {
    std::uint64_t init, latent, batch, interp, eval;
};

Streams derive_streams(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d77u, 0x67616eu};
    std::array<std::uint32_t, 10> w{};
    seq.generate(w.begin(), w.end());
    const auto pair = [&](int k) { return (static_cast<std::uint64_t>(w[2 * k]) << 32) | w[2 * k + 1]; };
    return {pair(0), pair(1), pair(2), pair(3), pair(4)};
}

void check_data(const SampleSet& s, const TrainerConfig& c, const char* what) {
    s.validate();
    if (s.tag != c.tag) throw GeometryError(std::string(what) + " data geometry does not match the config");
    if (s.pixels_per_item != c.shape().pixels())
        throw ShapeError(std::string(what) + " data has " + std::to_string(s.pixels_per_item) +
                         " pixels per item, config expects " + std::to_string(c.shape().pixels()));
    if (s.size() == 0) throw DataError(std::string(what) + " data is empty");
}

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
}

std::vector<Tensor> track(ag::Tape& tape, const std::vector<Tensor>& params) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(tape.variable(p));
    return out;
}

double param_norm(const Network& n) {
    double s = 0.0;
    for (const auto& p : n.params)
        for (double v : p.data()) s += v * v;
    return std::sqrt(s);
}

[[noreturn]] void nan_abort(const char* phase, std::size_t iter, std::size_t step, double value, double lr,
                            const Network& g, const Network& d) {
    config::Json snap;
    snap["phase"] = phase;
    snap["iter"] = iter;
    snap["critic_step"] = step;
    snap["value"] = std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    snap["lr"] = lr;
    snap["generator_param_norm"] = param_norm(g);
    snap["critic_param_norm"] = param_norm(d);
    const bool finite_g = std::isfinite(param_norm(g)), finite_d = std::isfinite(param_norm(d));
    snap["generator_params_finite"] = finite_g;
    snap["critic_params_finite"] = finite_d;
    throw NanAbort(std::string("non-finite ") + phase + " at iteration " + std::to_string(iter), snap.dump(2));
}

} // namespace

double evaluate_w1(const Network& g, const Tensor& z_eval, const SampleSet& heldout, const TrainerConfig& config) {
    const TangentBasis basis(config.anchor_point());
    const SampleShape shape = config.shape();
    const SampleSet gen = SampleSet::uniform(config.tag, generator_forward(g, z_eval, basis, shape), shape.pixels());
    W1Options opts;
    opts.method = config.eval_method;
    opts.ground = config.eval_cost == EvalCost::Geodesic ? GroundCost::Geodesic : GroundCost::Anchored;
    opts.anchor = config.anchor_point();
    return w1(gen, heldout, opts);
}

TrainingData make_training_data(const SyntheticTarget& target, const TrainerConfig& config, std::size_t n_train) {
    if (target.tag != config.tag) throw GeometryError("make_training_data: target geometry does not match the config");
    const std::uint64_t heldout_seed = target.seed ^ 0x9e3779b97f4a7c15ULL;
    return {synth_targets(target, n_train, target.seed, config.shape()),
            synth_targets(target, config.eval_samples, heldout_seed, config.shape())};
}

TrainingResult train(const TrainerConfig& config, const TrainingData& data, const TrainHooks& hooks) {
    config.validate();
    check_data(data.train, config, "training");
    check_data(data.heldout, config, "held-out");

    const SampleShape shape = config.shape();
    const TangentBasis basis(config.anchor_point());
    const std::size_t coords = shape.coords_per_sample(), pixels = shape.pixels();
    const Streams streams = derive_streams(config.seed);

    Rng init_rng(streams.init);
    TrainingResult res;
    res.generator = Network::init(layer_sizes(config.latent_dim, config.hidden, coords), init_rng);
    res.critic = Network::init(layer_sizes(coords, config.hidden, 1), init_rng);
    Network& g = res.generator;
    Network& d = res.critic;

    LatentSampler latent(config.latent_dim, streams.latent);
    Rng batch_rng(streams.batch);
    Rng interp_rng(streams.interp);
    const Tensor z_eval = LatentSampler(config.latent_dim, streams.eval).sample(config.eval_samples);

    const Tensor train_coords = coords_from_points(data.train.points, basis, shape);
    std::discrete_distribution<std::size_t> pick(data.train.weights.begin(), data.train.weights.end());

    AdamState g_state, d_state;
    const std::size_t K = config.iterations, m = config.batch;

    const auto emit = [&](const LogRow& row) {
        res.log.rows.push_back(row);
        if (hooks.on_row) hooks.on_row(row);
    };
    const auto evaluate = [&](std::size_t iter, LogRow row) {
        row.w1_eval = evaluate_w1(g, z_eval, data.heldout, config);
        emit(row);
        if (hooks.on_checkpoint) hooks.on_checkpoint(Checkpoint{iter, config, g, d});
    };

    if (K > 0) {
        LogRow row0;
        row0.lr = config.alpha;
        evaluate(0, row0);
    }

    std::vector<double> real(m * coords);
    std::vector<ManifoldPoint> real_points(m * pixels);
    for (std::size_t k = 1; k <= K; ++k) {
        const double lr = linear_decay(config.alpha, k - 1, K);
        double critic_sum = 0.0, gp_sum = 0.0;

        for (std::size_t step = 0; step < config.n_critic; ++step) {
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t idx = pick(batch_rng);
                std::copy_n(train_coords.data().begin() + idx * coords, coords, real.begin() + i * coords);
                std::copy_n(data.train.points.begin() + idx * pixels, pixels, real_points.begin() + i * pixels);
            }
            const Tensor x_real(m, coords, real);
            const Tensor g_raw = g(latent.sample(m));
            const Tensor x_gen = canonicalize(g_raw, basis, shape);
            const Interpolates x_hat = sample_interpolates(real_points, g_raw, basis, shape, interp_rng);

            ag::Tape tape;
            const std::vector<Tensor> dp = track(tape, d.params);
            const CriticLoss cl = critic_loss(d, dp, x_real, x_gen, x_hat.coords, config.lambda);
            const double loss = cl.loss.item();
            if (!std::isfinite(loss)) nan_abort("critic loss", k, step, loss, lr, g, d);
            const auto grads = ag::grad(cl.loss, dp);
            adam_step(d.params, grads, d_state, lr, config.adam);
            ++res.critic_updates;
            critic_sum += loss;
            gp_sum += cl.gp.item();
        }

        ag::Tape tape;
        const std::vector<Tensor> gp = track(tape, g.params);
        const Tensor gl = generator_loss(d, d.params, g, gp, latent.sample(m), basis, shape);
        const double gen_loss = gl.item();
        if (!std::isfinite(gen_loss)) nan_abort("generator loss", k, 0, gen_loss, lr, g, d);
        const auto grads = ag::grad(gl, gp);
        adam_step(g.params, grads, g_state, lr, config.adam);
        ++res.generator_updates;

        LogRow row;
        row.iter = k;
        row.critic_loss = critic_sum / static_cast<double>(config.n_critic);
        row.gp_term = gp_sum / static_cast<double>(config.n_critic);
        row.gen_loss = gen_loss;
        row.lr = lr;
        if (k % config.eval_interval == 0 || k == K) evaluate(k, row);
        else emit(row);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Checkpoints

std::filesystem::path checkpoint_sidecar(const std::filesystem::path& bin_path) {
    std::filesystem::path p = bin_path;
    p += ".json";
    return p;
}

namespace {

constexpr const char* kCheckpointFormat = "mwgan-checkpoint-1";

Network shaped(const std::vector<std::size_t>& sizes, detail::ByteReader& r) {
    Network n;
    n.sizes = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        for (const ag::Shape s : {ag::Shape{sizes[l], sizes[l + 1]}, ag::Shape{1, sizes[l + 1]}}) {
            r.need(8 * s.size());
            std::vector<double> v(s.size());
            for (double& x : v) x = r.f64();
            n.params.emplace_back(s, std::move(v));
        }
    }
    return n;
}

std::vector<std::size_t> sizes_from(const config::Json& j, const char* what) {
    if (!j.is_array() || j.size() < 2) throw FormatError(std::string("checkpoint: bad ") + what + " layer sizes");
    std::vector<std::size_t> s;
    for (const auto& v : j) {
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
            throw FormatError(std::string("checkpoint: bad ") + what + " layer sizes");
        s.push_back(v.get<std::size_t>());
    }
    return s;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& bin_path) {
    ckpt.generator.validate();
    ckpt.critic.validate();
    detail::ByteWriter w;
    std::size_t count = 0;
    for (const Network* n : {&ckpt.generator, &ckpt.critic})
        for (const auto& p : n->params) {
            w.f64s(p.data());
            count += p.size();
        }
    config::Json side;
    side["format"] = kCheckpointFormat;
    side["iter"] = ckpt.iter;
    side["config"] = config::trainer_to_json(ckpt.config);
    side["generator"] = {{"sizes", ckpt.generator.sizes}, {"slope", ckpt.generator.slope}};
    side["critic"] = {{"sizes", ckpt.critic.sizes}, {"slope", ckpt.critic.slope}};
    side["payload_values"] = count;
    side["payload_order"] = "generator then critic; per layer W (row-major) then b; little-endian float64";
    write_file_atomic(bin_path, w.take());
    write_text_atomic(checkpoint_sidecar(bin_path), side.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& bin_path) {
    const auto side_bytes = read_file(checkpoint_sidecar(bin_path));
    config::Json side;
    try {
        side = config::Json::parse(side_bytes.begin(), side_bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("checkpoint sidecar is not valid JSON: ") + e.what());
    }
    if (!side.is_object() || side.value("format", "") != kCheckpointFormat)
        throw FormatError("checkpoint sidecar: unknown format");
    Checkpoint c;
    try {
        c.iter = side.at("iter").get<std::size_t>();
        c.config = config::trainer_from_json(side.at("config"));
        const auto gs = sizes_from(side.at("generator").at("sizes"), "generator");
        const auto ds = sizes_from(side.at("critic").at("sizes"), "critic");
        const std::size_t count = side.at("payload_values").get<std::size_t>();
        const auto bytes = read_file(bin_path);
        if (bytes.size() != 8 * count) throw FormatError("checkpoint: payload size does not match the sidecar");
        detail::ByteReader r(bytes, "checkpoint");
        c.generator = shaped(gs, r);
        c.critic = shaped(ds, r);
        r.expect_end();
        c.generator.slope = side.at("generator").value("slope", 0.2);
        c.critic.slope = side.at("critic").value("slope", 0.2);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint sidecar: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint sidecar: ") + e.what());
    }
    const SampleShape shape = c.config.shape();
    if (c.generator.output_dim() != shape.coords_per_sample() || c.critic.input_dim() != shape.coords_per_sample() ||
        c.critic.output_dim() != 1 || c.generator.input_dim() != c.config.latent_dim)
        throw FormatError("checkpoint: network sizes do not match the config");
    for (const auto& p : c.generator.params)
        for (double v : p.data())
            if (!std::isfinite(v)) throw FormatError("checkpoint: non-finite parameter");
    return c;
}

// ---------------------------------------------------------------------------

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("spearman: lengths differ");
    if (x.size() < 2) throw DataError("spearman: need at least two points");
    const auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

} // namespace mwgan::gan
