#include "doctest.h"

#include "mwgan/config.hpp"
#include "mwgan/errors.hpp"

using namespace mwgan;
using namespace mwgan::config;

namespace {

const char* kMinimal = R"({
  "trainer": {"geometry": "sphere", "iterations": 10},
  "target": "default",
  "output_dir": "out"
})";

} // namespace

TEST_CASE("minimal experiment fills defaults") {
    const ExperimentConfig e = parse_experiment(kMinimal, "/base");
    CHECK(e.trainer.tag == GeometryTag::Sphere2);
    CHECK(e.trainer.iterations == 10);
    CHECK(e.trainer.batch == 64);
    CHECK(e.trainer.n_critic == 5);
    CHECK(e.trainer.lambda == 10.0);
    CHECK(e.trainer.alpha == 2e-4);
    CHECK(e.trainer.eval_method == W1Method::Exact);
    REQUIRE(e.target);
    CHECK(e.target->components.size() == 2);
    CHECK(!e.dataset);
    CHECK(e.n_train == 2048);
    CHECK(e.output_dir == std::filesystem::path("/base/out"));
}

TEST_CASE("trainer config JSON round trip") {
    gan::TrainerConfig c;
    c.tag = GeometryTag::Spd3;
    c.anchor = spd_point(Mat3::diag(2.0, 1.0, 0.5));
    c.dims = {8, 8};
    c.alpha = 1e-3;
    c.batch = 32;
    c.n_critic = 3;
    c.lambda = 0.0;
    c.iterations = 7;
    c.seed = 123456789012345ULL;
    c.latent_dim = 8;
    c.hidden = {64, 32, 16};
    c.eval_interval = 3;
    c.eval_samples = 100;
    c.eval_cost = gan::EvalCost::Anchored;
    c.eval_method = W1Method::Sinkhorn;
    c.adam = {0.8, 0.99, 1e-7};
    const gan::TrainerConfig b = trainer_from_json(trainer_to_json(c));
    CHECK(b.tag == c.tag);
    CHECK(*b.anchor == *c.anchor);
    CHECK(b.dims == c.dims);
    CHECK(b.alpha == c.alpha);
    CHECK(b.batch == c.batch);
    CHECK(b.n_critic == c.n_critic);
    CHECK(b.lambda == c.lambda);
    CHECK(b.iterations == c.iterations);
    CHECK(b.seed == c.seed);
    CHECK(b.latent_dim == c.latent_dim);
    CHECK(b.hidden == c.hidden);
    CHECK(b.eval_interval == c.eval_interval);
    CHECK(b.eval_samples == c.eval_samples);
    CHECK(b.eval_cost == c.eval_cost);
    CHECK(b.eval_method == c.eval_method);
    CHECK(b.adam.beta1 == c.adam.beta1);
    CHECK(b.adam.beta2 == c.adam.beta2);
    CHECK(b.adam.eps == c.adam.eps);
}

TEST_CASE("target JSON round trip including infinite concentration") {
    gan::SyntheticTarget t = gan::default_target(GeometryTag::Sphere2);
    t.components[0].spread = std::numeric_limits<double>::infinity();
    t.seed = 17;
    const Json j = target_to_json(t);
    CHECK(j["components"][0]["spread"] == "inf");
    const gan::SyntheticTarget b = target_from_json(j, GeometryTag::Sphere2);
    CHECK(b.seed == 17);
    REQUIRE(b.components.size() == 2);
    CHECK(std::isinf(b.components[0].spread));
    CHECK(b.components[1].mean == t.components[1].mean);

    const gan::SyntheticTarget h = target_from_json(target_to_json(gan::default_target(GeometryTag::HsvProduct)),
                                                    GeometryTag::HsvProduct);
    CHECK(h.components[0].sv_spread == gan::default_target(GeometryTag::HsvProduct).components[0].sv_spread);
}

TEST_CASE("schema violations are rejected with the offending path") {
    const auto rejects = [](const std::string& text, const std::string& fragment) {
        CAPTURE(text);
        try {
            parse_experiment(text);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CAPTURE(e.what());
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };
    rejects("not json", "valid JSON");
    rejects("[]", "expected an object");
    rejects(R"({"trainer": {"geometry": "sphere"}, "target": "default", "extra": 1})", "extra");
    rejects(R"({"trainer": {"geometry": "sphere", "batchsize": 3}, "target": "default"})", "trainer.batchsize");
    rejects(R"({"trainer": {"geometry": "cube"}, "target": "default"})", "trainer.geometry");
    rejects(R"({"trainer": {"iterations": 3}, "target": "default"})", "trainer.geometry");
    rejects(R"({"trainer": {"geometry": "hsv", "batch": -1}, "target": "default"})", "trainer.batch");
    rejects(R"({"trainer": {"geometry": "hsv", "batch": 0}, "target": "default"})", "batch must be positive");
    rejects(R"({"trainer": {"geometry": "hsv", "alpha": "fast"}, "target": "default"})", "trainer.alpha");
    rejects(R"({"trainer": {"geometry": "hsv", "lambda": -2}, "target": "default"})", "lambda");
    rejects(R"({"trainer": {"geometry": "hsv", "eval_cost": "euclid"}, "target": "default"})", "trainer.eval_cost");
    rejects(R"({"trainer": {"geometry": "hsv", "adam": {"beta3": 1}}, "target": "default"})", "trainer.adam.beta3");
    rejects(R"({"trainer": {"geometry": "sphere", "anchor": [1, 1, 0]}, "target": "default"})", "trainer.anchor");
    rejects(R"({"trainer": {"geometry": "spd", "anchor": [1, 2]}, "target": "default"})", "trainer.anchor");
    rejects(R"({"trainer": {"geometry": "hsv"}})", "exactly one");
    rejects(R"({"trainer": {"geometry": "hsv"}, "target": "default", "dataset": {"train": ["a"], "heldout": ["b"]}})",
            "exactly one");
    rejects(R"({"trainer": {"geometry": "hsv"}, "target": {"components": []}})", "target.components");
    rejects(R"({"trainer": {"geometry": "hsv"}, "target": {"components": [{"mean": [0, 0.5, 0.5], "kappa": 3}]}})",
            "target.components[0].kappa");
    rejects(R"({"trainer": {"geometry": "hsv"}, "target": {"components": [{"mean": [0, 0.5, 0.5], "weight": 0}]}})",
            "weight");
    rejects(R"({"trainer": {"geometry": "hsv"}, "target": "default", "n_train": 0})", "n_train");
    rejects(R"({"trainer": {"geometry": "hsv"}, "dataset": {"train": []}})", "dataset.train");
}

TEST_CASE("dataset paths resolve against the config directory") {
    const ExperimentConfig e = parse_experiment(
        R"({"trainer": {"geometry": "hsv", "image": [4, 4]}, "dataset": {"train": ["a.mvi", "/abs/b.mvi"], "heldout": ["c.mvi"]}})",
        "/cfg");
    REQUIRE(e.dataset);
    CHECK(e.dataset->train[0] == std::filesystem::path("/cfg/a.mvi"));
    CHECK(e.dataset->train[1] == std::filesystem::path("/abs/b.mvi"));
    CHECK(e.dataset->heldout[0] == std::filesystem::path("/cfg/c.mvi"));
    CHECK(e.trainer.dims == ImageDims{4, 4});
}

TEST_CASE("experiment JSON re-parses to the same document") {
    const ExperimentConfig e = parse_experiment(kMinimal);
    const Json j = experiment_to_json(e);
    const ExperimentConfig b = parse_experiment(j.dump());
    CHECK(experiment_to_json(b) == j);
}
