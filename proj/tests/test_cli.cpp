#include <doctest.h>

#include "mwgan/imaging.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace mwgan;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("mwgan_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    fs::path operator/(const std::string& s) const { return dir / s; }
};

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args, const Scratch& s) {
    const fs::path capture = s / "stdout.txt";
    const std::string cmd = "cd '" + s.dir.string() + "' && '" MWGAN_CLI "' " + args + " > '" + capture.string() + "' 2> /dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream f(capture);
    std::stringstream ss;
    ss << f.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary);
    f << bytes;
}

void random_ppm(const fs::path& p, int w, int h, unsigned seed) {
    std::mt19937 rng(seed);
    std::string px;
    for (int i = 0; i < w * h * 3; ++i) px.push_back(static_cast<char>(rng() & 0xff));
    write_bytes(p, "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n" + px);
}

const char* kSmallConfig = R"({
  "trainer": {"geometry": "%s", "image": [2, 2], "iterations": 12, "batch": 8, "n_critic": 2,
              "hidden": [8, 8], "eval_interval": 4, "eval_samples": 32, "seed": 5},
  "target": "default",
  "n_train": 64,
  "output_dir": "run_%s"
})";

void write_config(const Scratch& s, const std::string& name, const std::string& tag) {
    char buf[512];
    std::snprintf(buf, sizeof buf, kSmallConfig, tag.c_str(), name.c_str());
    write_bytes(s / (name + ".json"), buf);
}

} // namespace

TEST_CASE("no subcommand or unknown flag is a malformed invocation") {
    Scratch s;
    CHECK(run("", s).code == 2);
    CHECK(run("geomcheck --tag hsv --frobnicate", s).code == 2);
    CHECK(run("geomcheck --tag torus", s).code == 2);
}

TEST_CASE("convert round trips are byte exact") {
    Scratch s;
    random_ppm(s / "a.ppm", 7, 5, 11);
    REQUIRE(run("convert --in a.ppm --out a.mvi --mode rgb2hsv", s).code == 0);
    REQUIRE(run("convert --in a.mvi --out back.ppm --mode hsv2rgb", s).code == 0);
    CHECK(slurp(s / "a.ppm") == slurp(s / "back.ppm"));

    REQUIRE(run("convert --in a.ppm --out a.cb --mode rgb2cb", s).code == 0);
    CHECK(fs::exists(s / "a.cb.bright"));
    REQUIRE(run("convert --in a.cb --out cb.ppm --mode cb2rgb", s).code == 0);
    CHECK(slurp(s / "a.ppm") == slurp(s / "cb.ppm"));
    CHECK(run("convert --in a.cb --out c.ppm --mode cb2rgb --brightness const:0.5", s).code == 0);
    CHECK(run("convert --in a.cb --out c.ppm --mode cb2rgb --brightness const:x", s).code == 2);
}

TEST_CASE("pure red maps to hue zero with full saturation and value") {
    Scratch s;
    write_bytes(s / "red.ppm", std::string("P6\n1 1\n255\n\xff\x00\x00", 14));
    REQUIRE(run("convert --in red.ppm --out red.mvi --mode rgb2hsv", s).code == 0);
    const ManifoldImage img = load_mvi(s / "red.mvi");
    REQUIRE(img.pixels.size() == 1);
    CHECK(img.pixels[0].data[0] == 0.0);
    CHECK(img.pixels[0].data[1] == 1.0);
    CHECK(img.pixels[0].data[2] == 1.0);
}

TEST_CASE("convert error codes") {
    Scratch s;
    write_bytes(s / "trunc.ppm", std::string("P6\n4 4\n255\n\x01\x02", 13));
    CHECK(run("convert --in trunc.ppm --out t.mvi --mode rgb2hsv", s).code == 2);
    CHECK_FALSE(fs::exists(s / "t.mvi"));
    CHECK(run("convert --in missing.ppm --out t.mvi --mode rgb2hsv", s).code == 3);
    random_ppm(s / "a.ppm", 2, 2, 3);
    REQUIRE(run("convert --in a.ppm --out a.mvi --mode rgb2hsv", s).code == 0);
    // HSV payload handed to the chromaticity decoder.
    CHECK(run("convert --in a.mvi --out x.ppm --mode cb2rgb --brightness const:1", s).code == 2);
}

TEST_CASE("geomcheck passes at default tolerances and fails at zero") {
    Scratch s;
    for (const char* tag : {"hsv", "sphere", "spd"}) {
        CAPTURE(tag);
        const Run ok = run(std::string("geomcheck --tag ") + tag + " --trials 1000 --seed 7", s);
        CHECK(ok.code == 0);
        CHECK(ok.out.find("PASS") != std::string::npos);
    }
    const Run bad = run("geomcheck --tag sphere --trials 200 --tol-override 0", s);
    CHECK(bad.code == 1);
    CHECK(bad.out.find("FAIL") != std::string::npos);
}

TEST_CASE("w1 identity, symmetry and solver agreement") {
    Scratch s;
    random_ppm(s / "a.ppm", 4, 4, 1);
    random_ppm(s / "b.ppm", 4, 4, 2);
    REQUIRE(run("convert --in a.ppm --out a.mvi --mode rgb2hsv", s).code == 0);
    REQUIRE(run("convert --in b.ppm --out b.mvi --mode rgb2hsv", s).code == 0);
    REQUIRE(run("convert --in a.ppm --out a.cb --mode rgb2cb", s).code == 0);

    const Run self = run("w1 --a a.mvi --b a.mvi", s);
    REQUIRE(self.code == 0);
    CHECK(std::stod(self.out) == 0.0);

    const double ab = std::stod(run("w1 --a a.mvi --b b.mvi", s).out);
    const double ba = std::stod(run("w1 --a b.mvi --b a.mvi", s).out);
    CHECK(ab > 0.0);
    CHECK(std::abs(ab - ba) <= 1e-12);

    const Run sk = run("w1 --a a.mvi --b b.mvi --method sinkhorn --plan-out plan.csv", s);
    REQUIRE(sk.code == 0);
    CHECK(std::abs(std::stod(sk.out) - ab) < 1e-2 * ab + 1e-2);
    const std::string plan = slurp(s / "plan.csv");
    CHECK(plan.rfind("i,j,mass\n", 0) == 0);

    CHECK(run("w1 --a a.mvi --b a.cb", s).code == 2);
    CHECK(run("w1 --a a.mvi --b b.mvi --method sinkhorn --epsilon 1e-4 --max-iter 2", s).code == 1);
}

TEST_CASE("train is deterministic and sample/plot consume its output") {
    Scratch s;
    write_config(s, "c1", "sphere");
    REQUIRE(run("train --config c1.json --quiet", s).code == 0);
    REQUIRE(run("train --config c1.json --quiet --out again", s).code == 0);
    CHECK(slurp(s / "run_c1" / "log.csv") == slurp(s / "again" / "log.csv"));
    CHECK(slurp(s / "run_c1" / "final.bin") == slurp(s / "again" / "final.bin"));
    for (const char* f : {"config.json", "summary.json", "final.bin.json", "checkpoints/ckpt_000012.bin"})
        CHECK(fs::exists(s / "run_c1" / f));

    REQUIRE(run("sample --checkpoint run_c1/final.bin --n 16 --out samples --seed 2", s).code == 0);
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(s / "samples"))
        if (e.path().extension() == ".mvi" && e.path().filename() != "all.mvi") {
            const ManifoldImage img = load_mvi(e.path());
            CHECK(img.tag == GeometryTag::Sphere2);
            CHECK_NOTHROW(img.validate());
            ++n;
        }
    CHECK(n == 16);
    CHECK(fs::exists(s / "samples" / "grid.ppm"));

    REQUIRE(run("plot --log run_c1/log.csv --out plots", s).code == 0);
    CHECK(slurp(s / "plots" / "plot.svg").find("<svg") == 0);
    CHECK(slurp(s / "plots" / "plot.csv").rfind("iter,negative_critic_loss,w1_eval\n", 0) == 0);
}

TEST_CASE("train failure modes") {
    Scratch s;
    write_bytes(s / "bad.json", R"({"trainer": {"geometry": "sphere", "bogus": 1}, "target": "default"})");
    CHECK(run("train --config bad.json", s).code == 2);
    CHECK(run("train --config nothere.json", s).code == 3);

    write_bytes(s / "nan.json", R"({"trainer": {"geometry": "hsv", "image": [1, 1], "iterations": 5, "batch": 4,
        "hidden": [4], "alpha": 1e300, "seed": 1}, "target": "default", "n_train": 16, "output_dir": "nanrun"})");
    CHECK(run("train --config nan.json", s).code == 4);
    CHECK_FALSE(fs::exists(s / "nanrun"));

    CHECK(run("sample --checkpoint nothere.bin --out x", s).code == 3);
    write_bytes(s / "junk.csv", "not,a,log\n");
    CHECK(run("plot --log junk.csv --out p", s).code == 2);
}
