#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mwgan::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitMalformed = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNan = 4;

struct ConvertOptions {
    std::filesystem::path in, out;
    std::string mode;               // rgb2hsv | hsv2rgb | rgb2cb | cb2rgb
    std::string brightness = "stored"; // stored | const:<v>
};

struct GeomcheckOptions {
    std::string tag;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::optional<double> tol_override;
};

struct W1CmdOptions {
    std::vector<std::filesystem::path> a, b;
    std::string method = "exact";
    std::string cost = "geodesic";
    double epsilon = 0.0;
    std::size_t max_iter = 10000;
    bool per_image = false;
    std::optional<std::filesystem::path> plan_out;
};

struct TrainOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out; // overrides output_dir
    bool quiet = false;
};

struct SampleOptions {
    std::filesystem::path checkpoint;
    std::size_t n = 16;
    std::filesystem::path out;
    std::uint64_t seed = 0;
    double brightness = 1.0; // constant brightness for chromaticity previews
};

struct PlotOptions {
    std::filesystem::path log;
    std::filesystem::path out;
};

// Each returns the process exit code; library exceptions propagate and are
// mapped to exit codes by the caller.
int cmd_convert(const ConvertOptions& o);
int cmd_geomcheck(const GeomcheckOptions& o);
int cmd_w1(const W1CmdOptions& o);
int cmd_train(const TrainOptions& o);
int cmd_sample(const SampleOptions& o);
int cmd_plot(const PlotOptions& o);

// Minimal SVG line chart, one panel per series, stacked vertically.
struct Series {
    std::string title;
    std::vector<double> x, y;
};
std::string line_chart_svg(const std::vector<Series>& panels, const std::string& x_label);

} // namespace mwgan::cli
