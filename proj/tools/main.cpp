#include "commands.hpp"

#include "mwgan/errors.hpp"
#include "mwgan/gan.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace mwgan;
using namespace mwgan::cli;

namespace {

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const gan::NanAbort& e) {
        std::cerr << "error: " << e.what() << "\n" << e.snapshot() << "\n";
        return kExitNan;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTolerance;
    } catch (const FormatError& e) {
        std::cerr << "malformed input: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTolerance;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Manifold-valued WGAN toolkit: codecs, geometry checks, W1 evaluation, training, sampling, plots"};
    app.require_subcommand(1);
    int code = kExitOk;

    ConvertOptions conv;
    auto* c = app.add_subcommand("convert", "convert between PPM and MVI color representations");
    c->add_option("--in", conv.in, "input file (PPM or MVI per mode)")->required();
    c->add_option("--out", conv.out, "output file")->required();
    c->add_option("--mode", conv.mode, "rgb2hsv | hsv2rgb | rgb2cb | cb2rgb")
        ->required()
        ->check(CLI::IsMember({"rgb2hsv", "hsv2rgb", "rgb2cb", "cb2rgb"}));
    c->add_option("--brightness", conv.brightness, "cb2rgb brightness: stored (<in>.bright) or const:<v>");
    c->callback([&] { code = guarded([&] { return cmd_convert(conv); }); });

    GeomcheckOptions geo;
    auto* g = app.add_subcommand("geomcheck", "run the randomized geometry invariant sweep");
    g->add_option("--tag", geo.tag, "hsv | sphere | spd")->required();
    g->add_option("--trials", geo.trials, "number of random (anchor, point) pairs");
    g->add_option("--seed", geo.seed, "random seed");
    g->add_option("--tol-override", geo.tol_override, "use this tolerance for every check");
    g->callback([&] { code = guarded([&] { return cmd_geomcheck(geo); }); });

    W1CmdOptions w;
    auto* wc = app.add_subcommand("w1", "Wasserstein-1 distance between two MVI sample sets");
    wc->add_option("--a", w.a, "first set: one or more MVI files")->required();
    wc->add_option("--b", w.b, "second set: one or more MVI files")->required();
    wc->add_option("--method", w.method, "exact | sinkhorn | auto")->check(CLI::IsMember({"exact", "sinkhorn", "auto"}));
    wc->add_option("--cost", w.cost, "geodesic | anchored")->check(CLI::IsMember({"geodesic", "anchored"}));
    wc->add_option("--epsilon", w.epsilon, "Sinkhorn regularization (0: 1% of the mean cost)");
    wc->add_option("--max-iter", w.max_iter, "Sinkhorn iteration cap");
    wc->add_flag("--per-image", w.per_image, "treat each file as one item instead of pooling pixels");
    wc->add_option("--plan-out", w.plan_out, "write the transport plan as CSV (i,j,mass)");
    wc->callback([&] { code = guarded([&] { return cmd_w1(w); }); });

    TrainOptions tr;
    auto* t = app.add_subcommand("train", "train a manifold WGAN from a JSON experiment config");
    t->add_option("--config", tr.config, "experiment config (schema in README.md)")->required();
    t->add_option("--out", tr.out, "override output_dir");
    t->add_flag("--quiet", tr.quiet, "no progress lines");
    t->callback([&] { code = guarded([&] { return cmd_train(tr); }); });

    SampleOptions sm;
    auto* s = app.add_subcommand("sample", "draw images from a checkpoint");
    s->add_option("--checkpoint", sm.checkpoint, "checkpoint .bin (sidecar <bin>.json next to it)")->required();
    s->add_option("--n", sm.n, "number of samples");
    s->add_option("--out", sm.out, "output directory")->required();
    s->add_option("--seed", sm.seed, "latent seed");
    s->add_option("--brightness", sm.brightness, "constant brightness for chromaticity previews");
    s->callback([&] { code = guarded([&] { return cmd_sample(sm); }); });

    PlotOptions pl;
    auto* p = app.add_subcommand("plot", "plot negative critic loss and held-out W1 from a training log");
    p->add_option("--log", pl.log, "log.csv from train")->required();
    p->add_option("--out", pl.out, "output directory for plot.csv and plot.svg")->required();
    p->callback([&] { code = guarded([&] { return cmd_plot(pl); }); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitMalformed;
    }
    return code;
}
