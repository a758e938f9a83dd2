#pragma once

#include "mwgan/geometry.hpp"
#include "mwgan/kernels.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mwgan {

struct ImageDims {
    std::uint32_t height = 0;
    std::uint32_t width = 0;

    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
    friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

// H x W grid of points on one geometry, row-major, with the shared anchor.
struct ManifoldImage {
    GeometryTag tag = GeometryTag::HsvProduct;
    ImageDims dims;
    std::vector<ManifoldPoint> pixels;
    ManifoldPoint anchor;

    ManifoldImage() = default;
    ManifoldImage(GeometryTag t, ImageDims d, const ManifoldPoint& a);

    const ManifoldPoint& at(std::size_t row, std::size_t col) const { return pixels[row * dims.width + col]; }
    ManifoldPoint& at(std::size_t row, std::size_t col) { return pixels[row * dims.width + col]; }

    // Throws GeometryError/ShapeError on the first violated invariant.
    void validate(bool strict_box = false) const;
    bool is_valid(bool strict_box = false) const;
};

struct RgbImage {
    ImageDims dims;
    std::vector<kernels::Rgb> pixels;

    RgbImage() = default;
    explicit RgbImage(ImageDims d) : dims(d), pixels(d.pixel_count()) {}
};

struct BrightnessChannel {
    ImageDims dims;
    std::vector<double> values;
};

// Hexcone HSV with hue in radians, wrapped to [-pi, pi); achromatic pixels get hue 0.
ManifoldImage rgb_to_hsv(const RgbImage& img);
// Clamps s, v to [0, 1] before the inverse hexcone transform.
RgbImage hsv_to_rgb(const ManifoldImage& img);

struct CbImage {
    ManifoldImage chroma; // Sphere2, first octant
    BrightnessChannel brightness;
};

// chroma = rgb / |rgb|, brightness = |rgb|; black pixels map to the sphere anchor.
CbImage rgb_to_cb(const RgbImage& img);
// rgb = brightness * max(chroma, 0), clamped to [0, 1].
RgbImage cb_to_rgb(const ManifoldImage& chroma, const BrightnessChannel& brightness);
RgbImage cb_to_rgb(const ManifoldImage& chroma, double constant_brightness);

struct RepairReport {
    std::size_t voxels = 0;
    std::size_t repaired = 0;
};

struct RepairedImage {
    ManifoldImage image;
    RepairReport report;
};

inline constexpr double kDefaultRepairEpsilon = 1e-6;

// Symmetrizes each voxel and clamps its eigenvalues to >= eps. Voxels that are
// already symmetric with smallest eigenvalue >= eps (up to rounding) are left
// untouched, which makes the repair idempotent. Non-finite entries throw DataError.
RepairedImage repair_spd_image(const ManifoldImage& raw, double eps = kDefaultRepairEpsilon);

// Per-voxel fractional anisotropy rendered as grayscale.
RgbImage fractional_anisotropy_preview(const ManifoldImage& spd);

// Flat vector of per-pixel log_anchor basis coordinates, length pixels * tangent_dim.
std::vector<double> image_to_tangent_field(const ManifoldImage& img, const ManifoldPoint& anchor);
ManifoldImage tangent_field_to_image(std::span<const double> field, GeometryTag tag, ImageDims dims,
                                     const ManifoldPoint& anchor);

// ---------------------------------------------------------------------------
// Files. All writers go through a temporary file renamed on success.

// MVI, little-endian: "MVI1", u32 tag, u32 height, u32 width, u32 values-per-pixel,
// height*width*vpp float64 row-major, then the anchor as vpp float64.
std::vector<std::uint8_t> encode_mvi(const ManifoldImage& img);
ManifoldImage decode_mvi(std::span<const std::uint8_t> bytes);
void save_mvi(const ManifoldImage& img, const std::filesystem::path& path);
ManifoldImage load_mvi(const std::filesystem::path& path);

// Brightness side channel: "MVB1", u32 height, u32 width, height*width float64.
std::vector<std::uint8_t> encode_brightness(const BrightnessChannel& b);
BrightnessChannel decode_brightness(std::span<const std::uint8_t> bytes);
void save_brightness(const BrightnessChannel& b, const std::filesystem::path& path);
BrightnessChannel load_brightness(const std::filesystem::path& path);

// Binary PPM (P6). Reads maxval 1..65535; writes maxval 255, rounding half up.
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);
RgbImage decode_ppm(std::span<const std::uint8_t> bytes);
void save_ppm(const RgbImage& img, const std::filesystem::path& path);
RgbImage load_ppm(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace mwgan
