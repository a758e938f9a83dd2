#include "mwgan/config.hpp"

#include "mwgan/errors.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace mwgan::config {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Strict view of one JSON object: every key must be consumed before finish().
class Object {
public:
    Object(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string path(const std::string& key) const { return join(path_, key); }

    const Json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    const Json& require(const std::string& key) {
        const Json* v = get(key);
        if (v == nullptr) fail(path(key), "missing required key");
        return *v;
    }

    double number(const std::string& key, double fallback) {
        const Json* v = get(key);
        return v ? as_number(*v, path(key)) : fallback;
    }
    std::uint64_t count(const std::string& key, std::uint64_t fallback) {
        const Json* v = get(key);
        return v ? as_count(*v, path(key)) : fallback;
    }
    std::string string(const std::string& key, const std::string& fallback) {
        const Json* v = get(key);
        if (v == nullptr) return fallback;
        if (!v->is_string()) fail(path(key), "expected a string");
        return v->get<std::string>();
    }

    void finish() const {
        for (const auto& [key, _] : j_.items())
            if (!seen_.contains(key)) fail(path(key), "unknown key");
    }

    static double as_number(const Json& v, const std::string& where) {
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        }
        fail(where, "expected a number");
    }
    static std::uint64_t as_count(const Json& v, const std::string& where) {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) fail(where, "must be nonnegative");
        fail(where, "expected a nonnegative integer");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
auto guarded(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
}

Json number_json(double v) {
    if (std::isinf(v) && v > 0) return "inf";
    return v;
}

} // namespace

Json point_to_json(const ManifoldPoint& p) {
    if (p.tag == GeometryTag::Spd3) {
        Json rows = Json::array();
        for (int r = 0; r < 3; ++r) rows.push_back({p.data[3 * r], p.data[3 * r + 1], p.data[3 * r + 2]});
        return rows;
    }
    return Json{p.data[0], p.data[1], p.data[2]};
}

ManifoldPoint point_from_json(const Json& j, GeometryTag tag, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> values;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = where + "[" + std::to_string(i) + "]";
        if (j[i].is_array()) {
            for (std::size_t k = 0; k < j[i].size(); ++k) values.push_back(Object::as_number(j[i][k], at));
        } else {
            values.push_back(Object::as_number(j[i], at));
        }
    }
    if (values.size() != values_per_point(tag))
        fail(where, "expected " + std::to_string(values_per_point(tag)) + " values for a " + std::string(tag_name(tag)) +
                        " point");
    ManifoldPoint p = point_from_values(tag, values);
    if (tag == GeometryTag::HsvProduct) p = hsv_point(p.data[0], p.data[1], p.data[2]);
    guarded(where, [&] {
        validate_point(p);
        return 0;
    });
    return p;
}

Json trainer_to_json(const gan::TrainerConfig& c) {
    Json j;
    j["geometry"] = std::string(tag_name(c.tag));
    if (c.anchor) j["anchor"] = point_to_json(*c.anchor);
    j["image"] = {c.dims.height, c.dims.width};
    j["alpha"] = c.alpha;
    j["batch"] = c.batch;
    j["n_critic"] = c.n_critic;
    j["lambda"] = c.lambda;
    j["iterations"] = c.iterations;
    j["seed"] = c.seed;
    j["latent_dim"] = c.latent_dim;
    j["hidden"] = c.hidden;
    j["eval_interval"] = c.eval_interval;
    j["eval_samples"] = c.eval_samples;
    j["eval_cost"] = c.eval_cost == gan::EvalCost::Geodesic ? "geodesic" : "anchored";
    j["eval_method"] = std::string(w1_method_name(c.eval_method));
    j["adam"] = {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}};
    return j;
}

gan::TrainerConfig trainer_from_json(const Json& j) {
    Object o(j, "trainer");
    gan::TrainerConfig c;
    const auto geometry = o.string("geometry", "");
    if (geometry.empty()) fail(o.path("geometry"), "missing required key");
    c.tag = guarded(o.path("geometry"), [&] { return parse_tag(geometry); });
    if (const Json* a = o.get("anchor")) c.anchor = point_from_json(*a, c.tag, o.path("anchor"));
    if (const Json* im = o.get("image")) {
        if (!im->is_array() || im->size() != 2) fail(o.path("image"), "expected [height, width]");
        const auto h = Object::as_count((*im)[0], o.path("image[0]"));
        const auto w = Object::as_count((*im)[1], o.path("image[1]"));
        if (h == 0 || w == 0 || h > 4096 || w > 4096) fail(o.path("image"), "dimensions must be in 1..4096");
        c.dims = ImageDims{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w)};
    }
    c.alpha = o.number("alpha", c.alpha);
    c.batch = o.count("batch", c.batch);
    c.n_critic = o.count("n_critic", c.n_critic);
    c.lambda = o.number("lambda", c.lambda);
    c.iterations = o.count("iterations", c.iterations);
    c.seed = o.count("seed", c.seed);
    c.latent_dim = o.count("latent_dim", c.latent_dim);
    if (const Json* h = o.get("hidden")) {
        if (!h->is_array()) fail(o.path("hidden"), "expected an array of layer widths");
        c.hidden.clear();
        for (std::size_t i = 0; i < h->size(); ++i)
            c.hidden.push_back(Object::as_count((*h)[i], o.path("hidden[" + std::to_string(i) + "]")));
    }
    c.eval_interval = o.count("eval_interval", c.eval_interval);
    c.eval_samples = o.count("eval_samples", c.eval_samples);
    const auto cost = o.string("eval_cost", "geodesic");
    if (cost == "geodesic") c.eval_cost = gan::EvalCost::Geodesic;
    else if (cost == "anchored") c.eval_cost = gan::EvalCost::Anchored;
    else fail(o.path("eval_cost"), "expected \"geodesic\" or \"anchored\"");
    c.eval_method = guarded(o.path("eval_method"), [&] { return parse_w1_method(o.string("eval_method", "exact")); });
    if (const Json* a = o.get("adam")) {
        Object ao(*a, o.path("adam"));
        c.adam.beta1 = ao.number("beta1", c.adam.beta1);
        c.adam.beta2 = ao.number("beta2", c.adam.beta2);
        c.adam.eps = ao.number("eps", c.adam.eps);
        ao.finish();
    }
    o.finish();
    guarded("trainer", [&] {
        c.validate();
        return 0;
    });
    return c;
}

Json target_to_json(const gan::SyntheticTarget& t) {
    Json comps = Json::array();
    for (const auto& c : t.components) {
        Json jc;
        jc["weight"] = c.weight;
        jc["mean"] = point_to_json(c.mean);
        jc["spread"] = number_json(c.spread);
        if (t.tag == GeometryTag::HsvProduct) jc["sv_spread"] = c.sv_spread;
        comps.push_back(jc);
    }
    return Json{{"seed", t.seed}, {"components", comps}};
}

gan::SyntheticTarget target_from_json(const Json& j, GeometryTag tag) {
    gan::SyntheticTarget t;
    if (j.is_string()) {
        if (j.get<std::string>() != "default") fail("target", "expected an object or \"default\"");
        return gan::default_target(tag);
    }
    Object o(j, "target");
    t.tag = tag;
    t.seed = o.count("seed", 0);
    const Json& comps = o.require("components");
    if (!comps.is_array() || comps.empty()) fail(o.path("components"), "expected a non-empty array");
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const std::string at = o.path("components[" + std::to_string(k) + "]");
        Object co(comps[k], at);
        gan::MixtureComponent c;
        c.weight = co.number("weight", 1.0);
        c.mean = point_from_json(co.require("mean"), tag, co.path("mean"));
        c.spread = co.number("spread", c.spread);
        if (tag == GeometryTag::HsvProduct) c.sv_spread = co.number("sv_spread", c.sv_spread);
        co.finish();
        t.components.push_back(c);
    }
    o.finish();
    guarded("target", [&] {
        t.validate();
        return 0;
    });
    return t;
}

ExperimentConfig parse_experiment(const std::string& text, const std::filesystem::path& base_dir) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Object o(j, "");
    ExperimentConfig e;
    e.trainer = trainer_from_json(o.require("trainer"));
    const auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() || base_dir.empty() ? p : base_dir / p; };
    const Json* target = o.get("target");
    const Json* dataset = o.get("dataset");
    if ((target == nullptr) == (dataset == nullptr)) fail("<root>", "exactly one of \"target\" and \"dataset\" is required");
    if (target) {
        e.target = target_from_json(*target, e.trainer.tag);
    } else {
        Object d(*dataset, "dataset");
        DatasetSpec spec;
        for (const char* key : {"train", "heldout"}) {
            const Json& files = d.require(key);
            if (!files.is_array() || files.empty()) fail(d.path(key), "expected a non-empty array of MVI paths");
            auto& out = std::string(key) == "train" ? spec.train : spec.heldout;
            for (std::size_t i = 0; i < files.size(); ++i) {
                if (!files[i].is_string()) fail(d.path(key) + "[" + std::to_string(i) + "]", "expected a path string");
                out.push_back(resolve(files[i].get<std::string>()));
            }
        }
        d.finish();
        e.dataset = std::move(spec);
    }
    e.n_train = o.count("n_train", e.n_train);
    if (e.n_train == 0) fail("n_train", "must be positive");
    e.output_dir = resolve(o.string("output_dir", e.output_dir.string()));
    o.finish();
    return e;
}

Json experiment_to_json(const ExperimentConfig& e) {
    Json j;
    j["trainer"] = trainer_to_json(e.trainer);
    if (e.target) j["target"] = target_to_json(*e.target);
    if (e.dataset) {
        Json train = Json::array(), held = Json::array();
        for (const auto& p : e.dataset->train) train.push_back(p.string());
        for (const auto& p : e.dataset->heldout) held.push_back(p.string());
        j["dataset"] = {{"train", train}, {"heldout", held}};
    }
    j["n_train"] = e.n_train;
    j["output_dir"] = e.output_dir.string();
    return j;
}

} // namespace mwgan::config
