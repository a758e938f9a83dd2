#include "commands.hpp"

#include "mwgan/config.hpp"
#include "mwgan/errors.hpp"
#include "mwgan/gan.hpp"
#include "mwgan/geomcheck.hpp"
#include "mwgan/imaging.hpp"
#include "mwgan/transport.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <unistd.h>

namespace fs = std::filesystem;

namespace mwgan::cli {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
    fs::path q = p;
    q += suffix;
    return q;
}

// Output directory assembled under a temporary name and renamed into place
// on commit; removed on destruction otherwise.
class StagedDir {
public:
    explicit StagedDir(fs::path final_dir) : final_(std::move(final_dir)) {
        try {
            fs::path parent = final_.parent_path();
            if (parent.empty()) parent = ".";
            fs::create_directories(parent);
            tmp_ = parent / ("." + final_.filename().string() + ".tmp-" + std::to_string(::getpid()));
            fs::remove_all(tmp_);
            fs::create_directories(tmp_);
        } catch (const fs::filesystem_error& e) {
            throw IoError(std::string("cannot create output directory: ") + e.what());
        }
    }
    StagedDir(const StagedDir&) = delete;
    StagedDir& operator=(const StagedDir&) = delete;
    ~StagedDir() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(tmp_, ec);
        }
    }

    const fs::path& path() const { return tmp_; }

    void commit() {
        try {
            if (fs::exists(final_)) fs::remove_all(final_);
            fs::rename(tmp_, final_);
            committed_ = true;
        } catch (const fs::filesystem_error& e) {
            throw IoError(std::string("cannot move output into place: ") + e.what());
        }
    }

private:
    fs::path final_, tmp_;
    bool committed_ = false;
};

ManifoldImage load_tagged(const fs::path& p, GeometryTag expected, const char* mode) {
    ManifoldImage img = load_mvi(p);
    if (img.tag != expected)
        throw GeometryError(std::string(mode) + ": expected a " + std::string(tag_name(expected)) + " image, got " +
                            std::string(tag_name(img.tag)));
    return img;
}

std::optional<double> parse_const_brightness(const std::string& spec) {
    if (spec == "stored") return std::nullopt;
    if (spec.rfind("const:", 0) == 0) {
        const std::string v = spec.substr(6);
        std::size_t used = 0;
        double b = 0.0;
        try {
            b = std::stod(v, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != v.size() || v.empty() || !(b >= 0.0) || !std::isfinite(b))
            throw std::invalid_argument("--brightness const:<v> needs a nonnegative number, got '" + v + "'");
        return b;
    }
    throw std::invalid_argument("--brightness must be 'stored' or 'const:<v>'");
}

SampleSet load_samples(const std::vector<fs::path>& files, bool per_image) {
    std::vector<ManifoldImage> images;
    for (const auto& f : files) images.push_back(load_mvi(f));
    if (per_image) return sample_set_from_images(images);
    std::vector<ManifoldPoint> pts;
    for (const auto& img : images) {
        if (img.tag != images.front().tag) throw GeometryError("w1: input files mix geometries");
        pts.insert(pts.end(), img.pixels.begin(), img.pixels.end());
    }
    return SampleSet::uniform(images.front().tag, std::move(pts));
}

// Samples tiled into one image with a one-pixel white gutter.
RgbImage tile(const std::vector<RgbImage>& tiles) {
    const std::size_t n = tiles.size();
    const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const std::size_t rows = (n + cols - 1) / cols;
    const std::size_t th = tiles.front().dims.height, tw = tiles.front().dims.width;
    RgbImage grid(ImageDims{static_cast<std::uint32_t>(rows * (th + 1) + 1), static_cast<std::uint32_t>(cols * (tw + 1) + 1)});
    for (auto& px : grid.pixels) px = {1.0, 1.0, 1.0};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t r0 = (k / cols) * (th + 1) + 1, c0 = (k % cols) * (tw + 1) + 1;
        for (std::size_t r = 0; r < th; ++r)
            for (std::size_t c = 0; c < tw; ++c)
                grid.pixels[(r0 + r) * grid.dims.width + c0 + c] = tiles[k].pixels[r * tw + c];
    }
    return grid;
}

RgbImage preview(const ManifoldImage& img, double brightness) {
    switch (img.tag) {
    case GeometryTag::HsvProduct: return hsv_to_rgb(img);
    case GeometryTag::Sphere2: return cb_to_rgb(img, brightness);
    case GeometryTag::Spd3: return fractional_anisotropy_preview(img);
    }
    throw GeometryError("preview: unknown geometry");
}

std::string zero_pad(std::size_t v, int width) {
    std::string s = std::to_string(v);
    return std::string(width > static_cast<int>(s.size()) ? width - s.size() : 0, '0') + s;
}

} // namespace

// ---------------------------------------------------------------------------

int cmd_convert(const ConvertOptions& o) {
    const auto const_b = parse_const_brightness(o.brightness);
    if (o.mode == "rgb2hsv") {
        save_mvi(rgb_to_hsv(load_ppm(o.in)), o.out);
    } else if (o.mode == "hsv2rgb") {
        save_ppm(hsv_to_rgb(load_tagged(o.in, GeometryTag::HsvProduct, "hsv2rgb")), o.out);
    } else if (o.mode == "rgb2cb") {
        const CbImage cb = rgb_to_cb(load_ppm(o.in));
        save_brightness(cb.brightness, with_suffix(o.out, ".bright"));
        save_mvi(cb.chroma, o.out);
    } else if (o.mode == "cb2rgb") {
        const ManifoldImage chroma = load_tagged(o.in, GeometryTag::Sphere2, "cb2rgb");
        if (const_b) {
            save_ppm(cb_to_rgb(chroma, *const_b), o.out);
        } else {
            const BrightnessChannel b = load_brightness(with_suffix(o.in, ".bright"));
            if (!(b.dims == chroma.dims)) throw ShapeError("cb2rgb: brightness sidecar size does not match the image");
            save_ppm(cb_to_rgb(chroma, b), o.out);
        }
    } else {
        throw std::invalid_argument("unknown --mode '" + o.mode + "'");
    }
    std::cout << "wrote " << o.out.string() << "\n";
    return kExitOk;
}

int cmd_geomcheck(const GeomcheckOptions& o) {
    const GeometryTag tag = parse_tag(o.tag);
    GeomCheckTolerances tol = GeomCheckTolerances::for_tag(tag);
    if (o.tol_override) {
        if (!(*o.tol_override >= 0.0)) throw std::invalid_argument("--tol-override must be nonnegative");
        tol.round_trip = tol.norm_distance = tol.cross_check = *o.tol_override;
    }
    const GeomCheckReport r = geometry_check(tag, o.trials, o.seed, tol);
    std::cout << "geometry " << tag_name(tag) << " trials " << r.trials << " seed " << o.seed << "\n";
    std::cout << "max_round_trip    " << fmt("%.3e", r.max_round_trip) << "  tol " << fmt("%.1e", tol.round_trip) << "\n";
    std::cout << "max_norm_distance " << fmt("%.3e", r.max_norm_distance) << "  tol " << fmt("%.1e", tol.norm_distance)
              << "\n";
    std::cout << "max_cross_check   " << fmt("%.3e", r.max_cross_check) << "  tol " << fmt("%.1e", tol.cross_check) << "\n";
    std::cout << (r.passed() ? "PASS" : "FAIL") << "\n";
    return r.passed() ? kExitOk : kExitTolerance;
}

int cmd_w1(const W1CmdOptions& o) {
    const SampleSet a = load_samples(o.a, o.per_image);
    const SampleSet b = load_samples(o.b, o.per_image);
    if (a.tag != b.tag)
        throw GeometryError("w1: geometry mismatch (" + std::string(tag_name(a.tag)) + " vs " +
                            std::string(tag_name(b.tag)) + ")");
    W1Options opts;
    opts.method = parse_w1_method(o.method);
    if (o.cost == "geodesic") opts.ground = GroundCost::Geodesic;
    else if (o.cost == "anchored") opts.ground = GroundCost::Anchored;
    else throw std::invalid_argument("--cost must be geodesic or anchored");
    opts.epsilon = o.epsilon;
    opts.max_iter = o.max_iter;
    const W1Result r = w1_detailed(a, b, opts);
    if (!r.plan.converged) throw ConvergenceError("w1: Sinkhorn did not reach the marginal tolerance after " +
                                                 std::to_string(r.plan.iterations) + " iterations; raise --max-iter or --epsilon");
    if (o.plan_out) {
        std::string csv = "i,j,mass\n";
        for (std::size_t i = 0; i < r.plan.rows; ++i)
            for (std::size_t j = 0; j < r.plan.cols; ++j)
                if (r.plan(i, j) > 0.0) csv += std::to_string(i) + "," + std::to_string(j) + "," + fmt("%.17g", r.plan(i, j)) + "\n";
        write_text_atomic(*o.plan_out, csv);
    }
    std::cout << fmt("%.17g", r.value) << "\n";
    std::cerr << "method " << w1_method_name(r.method) << ", " << a.size() << " x " << b.size() << " items\n";
    return kExitOk;
}

int cmd_train(const TrainOptions& o) {
    const auto bytes = read_file(o.config);
    config::ExperimentConfig e =
        config::parse_experiment(std::string(bytes.begin(), bytes.end()), o.config.parent_path());
    if (o.out) e.output_dir = *o.out;

    gan::TrainingData data;
    if (e.target) {
        data = gan::make_training_data(*e.target, e.trainer, e.n_train);
    } else {
        const auto load_set = [&](const std::vector<fs::path>& files) {
            std::vector<ManifoldImage> imgs;
            for (const auto& f : files) {
                ManifoldImage img = load_mvi(f);
                if (img.tag != e.trainer.tag) throw GeometryError("dataset image " + f.string() + " has the wrong geometry");
                if (!(img.dims == e.trainer.dims))
                    throw ShapeError("dataset image " + f.string() + " does not match trainer.image");
                imgs.push_back(std::move(img));
            }
            return sample_set_from_images(imgs);
        };
        data = {load_set(e.dataset->train), load_set(e.dataset->heldout)};
    }

    StagedDir out(e.output_dir);
    fs::create_directories(out.path() / "checkpoints");
    write_text_atomic(out.path() / "config.json", config::experiment_to_json(e).dump(2) + "\n");

    gan::TrainHooks hooks;
    hooks.on_checkpoint = [&](const gan::Checkpoint& ck) {
        gan::save_checkpoint(ck, out.path() / "checkpoints" / ("ckpt_" + zero_pad(ck.iter, 6) + ".bin"));
    };
    hooks.on_row = [&](const gan::LogRow& row) {
        if (!o.quiet && row.w1_eval)
            std::cerr << "iter " << row.iter << "  w1_eval " << fmt("%.6f", *row.w1_eval) << "\n";
    };
    const auto t0 = std::chrono::steady_clock::now();
    const gan::TrainingResult res = gan::train(e.trainer, data, hooks);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_text_atomic(out.path() / "log.csv", res.log.to_csv());
    gan::save_checkpoint(gan::Checkpoint{e.trainer.iterations, e.trainer, res.generator, res.critic},
                         out.path() / "final.bin");

    config::Json summary;
    summary["generator_updates"] = res.generator_updates;
    summary["critic_updates"] = res.critic_updates;
    summary["seconds"] = seconds;
    const auto evals = res.log.evaluations();
    if (!evals.empty()) {
        std::vector<double> idx, w;
        for (const auto& [i, v] : evals) {
            idx.push_back(static_cast<double>(i));
            w.push_back(v);
        }
        summary["initial_w1"] = w.front();
        summary["final_w1"] = w.back();
        summary["ratio"] = w.front() > 0 ? w.back() / w.front() : 0.0;
        if (w.size() >= 2) {
            const double rho = gan::spearman(idx, w);
            if (std::isfinite(rho)) summary["spearman"] = rho;
        }
    }
    write_text_atomic(out.path() / "summary.json", summary.dump(2) + "\n");
    out.commit();
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

int cmd_sample(const SampleOptions& o) {
    if (o.n == 0) throw std::invalid_argument("--n must be positive");
    const gan::Checkpoint ck = gan::load_checkpoint(o.checkpoint);
    const gan::TrainerConfig& c = ck.config;
    const gan::SampleShape shape = c.shape();
    const ManifoldPoint anchor = c.anchor_point();
    const TangentBasis basis(anchor);
    const auto pts = gan::generator_forward(ck.generator, gan::LatentSampler(c.latent_dim, o.seed).sample(o.n), basis, shape);

    StagedDir out(o.out);
    ManifoldImage all(c.tag, ImageDims{static_cast<std::uint32_t>(c.dims.height * o.n), c.dims.width}, anchor);
    std::vector<RgbImage> previews;
    for (std::size_t k = 0; k < o.n; ++k) {
        ManifoldImage img(c.tag, c.dims, anchor);
        std::copy_n(pts.begin() + k * shape.pixels(), shape.pixels(), img.pixels.begin());
        img.validate();
        std::copy(img.pixels.begin(), img.pixels.end(), all.pixels.begin() + k * shape.pixels());
        const std::string stem = "sample_" + zero_pad(k, 4);
        save_mvi(img, out.path() / (stem + ".mvi"));
        previews.push_back(preview(img, o.brightness));
        save_ppm(previews.back(), out.path() / (stem + ".ppm"));
    }
    save_mvi(all, out.path() / "all.mvi");
    save_ppm(tile(previews), out.path() / "grid.ppm");
    out.commit();
    std::cout << "wrote " << o.n << " " << tag_name(c.tag) << " samples to " << o.out.string() << "\n";
    return kExitOk;
}

int cmd_plot(const PlotOptions& o) {
    const auto bytes = read_file(o.log);
    const gan::TrainingLog log = gan::TrainingLog::from_csv(std::string(bytes.begin(), bytes.end()));
    Series critic{"negative critic loss", {}, {}}, w1{"held-out W1", {}, {}};
    std::string csv = "iter,negative_critic_loss,w1_eval\n";
    for (const auto& r : log.rows) {
        csv += std::to_string(r.iter) + "," + (r.critic_loss ? fmt("%.17g", -*r.critic_loss) : "") + "," +
               (r.w1_eval ? fmt("%.17g", *r.w1_eval) : "") + "\n";
        if (r.critic_loss) {
            critic.x.push_back(static_cast<double>(r.iter));
            critic.y.push_back(-*r.critic_loss);
        }
        if (r.w1_eval) {
            w1.x.push_back(static_cast<double>(r.iter));
            w1.y.push_back(*r.w1_eval);
        }
    }
    StagedDir out(o.out);
    write_text_atomic(out.path() / "plot.csv", csv);
    write_text_atomic(out.path() / "plot.svg", line_chart_svg({critic, w1}, "generator iteration"));
    out.commit();
    if (w1.y.size() >= 1) {
        std::cout << "first_w1 " << fmt("%.6f", w1.y.front()) << " final_w1 " << fmt("%.6f", w1.y.back());
        if (w1.y.front() > 0) std::cout << " ratio " << fmt("%.4f", w1.y.back() / w1.y.front());
        std::cout << "\n";
    }
    return kExitOk;
}

} // namespace mwgan::cli
