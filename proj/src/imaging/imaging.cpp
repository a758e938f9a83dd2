#include "mwgan/imaging.hpp"

#include "common/byte_io.hpp"
#include "mwgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mwgan {

ManifoldImage::ManifoldImage(GeometryTag t, ImageDims d, const ManifoldPoint& a)
    : tag(t), dims(d), pixels(d.pixel_count(), a), anchor(a) {
    if (a.tag != t) throw GeometryError("ManifoldImage: anchor geometry does not match image geometry");
}

void ManifoldImage::validate(bool strict_box) const {
    if (dims.height == 0 || dims.width == 0) throw ShapeError("ManifoldImage: empty dimensions");
    if (pixels.size() != dims.pixel_count()) throw ShapeError("ManifoldImage: pixel count does not match dimensions");
    if (anchor.tag != tag) throw GeometryError("ManifoldImage: anchor geometry does not match image geometry");
    validate_point(anchor);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        if (pixels[i].tag != tag) throw GeometryError("ManifoldImage: pixel geometry does not match image geometry");
        if (!is_valid_point(pixels[i], strict_box)) {
            std::ostringstream os;
            os << "ManifoldImage: pixel " << i << " violates " << tag_name(tag) << " invariants";
            throw GeometryError(os.str());
        }
    }
}

bool ManifoldImage::is_valid(bool strict_box) const {
    try {
        validate(strict_box);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// Color codecs

ManifoldImage rgb_to_hsv(const RgbImage& img) {
    ManifoldImage out(GeometryTag::HsvProduct, img.dims, default_anchors().hsv);
    kernels::rgb_to_hsv_pixels(img.pixels, out.pixels);
    return out;
}

RgbImage hsv_to_rgb(const ManifoldImage& img) {
    if (img.tag != GeometryTag::HsvProduct) throw GeometryError("hsv_to_rgb: image is not HSV");
    RgbImage out(img.dims);
    kernels::hsv_to_rgb_pixels(img.pixels, out.pixels);
    return out;
}

CbImage rgb_to_cb(const RgbImage& img) {
    const ManifoldPoint& anchor = default_anchors().sphere;
    CbImage out{ManifoldImage(GeometryTag::Sphere2, img.dims, anchor), BrightnessChannel{img.dims, {}}};
    out.brightness.values.resize(img.dims.pixel_count());
    kernels::for_each_index(img.pixels.size(), kernels::Exec::Parallel, [&](std::size_t i) {
        const Vec3 rgb{img.pixels[i]};
        const double b = norm(rgb);
        out.brightness.values[i] = b;
        out.chroma.pixels[i] = b > 0.0 ? sphere_point(rgb) : anchor;
    });
    return out;
}

namespace {

RgbImage cb_render(const ManifoldImage& chroma, auto&& brightness_at) {
    if (chroma.tag != GeometryTag::Sphere2) throw GeometryError("cb_to_rgb: chromaticity image is not spherical");
    RgbImage out(chroma.dims);
    kernels::for_each_index(chroma.pixels.size(), kernels::Exec::Parallel, [&](std::size_t i) {
        const double b = brightness_at(i);
        for (std::size_t c = 0; c < 3; ++c)
            out.pixels[i][c] = std::clamp(b * std::max(chroma.pixels[i].data[c], 0.0), 0.0, 1.0);
    });
    return out;
}

} // namespace

RgbImage cb_to_rgb(const ManifoldImage& chroma, const BrightnessChannel& brightness) {
    if (!(brightness.dims == chroma.dims) || brightness.values.size() != chroma.pixels.size())
        throw ShapeError("cb_to_rgb: brightness dimensions do not match chromaticity");
    return cb_render(chroma, [&](std::size_t i) { return brightness.values[i]; });
}

RgbImage cb_to_rgb(const ManifoldImage& chroma, double constant_brightness) {
    return cb_render(chroma, [=](std::size_t) { return constant_brightness; });
}

// ---------------------------------------------------------------------------
// DT voxels

RepairedImage repair_spd_image(const ManifoldImage& raw, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("repair_spd_image: eps must be positive");
    if (raw.tag != GeometryTag::Spd3) throw GeometryError("repair_spd_image: image is not SPD-valued");
    if (raw.pixels.size() != raw.dims.pixel_count()) throw ShapeError("repair_spd_image: pixel count mismatch");

    RepairedImage out{raw, RepairReport{raw.pixels.size(), 0}};
    std::vector<unsigned char> touched(raw.pixels.size(), 0);
    kernels::for_each_index(raw.pixels.size(), kernels::Exec::Parallel, [&](std::size_t i) {
        const ManifoldPoint& p = raw.pixels[i];
        for (double x : p.values())
            if (!std::isfinite(x)) throw DataError("repair_spd_image: non-finite voxel entry at index " + std::to_string(i));
        const Mat3 a = p.mat3();
        const SymEigen e = sym_eigen(a);
        // Rounding slack so that a voxel clamped to eps by a previous pass is accepted.
        const double slack = 64.0 * 2.220446049250313e-16 * std::max(1.0, std::abs(e.values[2]));
        if (asymmetry(a) <= kSymmetryTol && e.values[0] >= eps - slack) return;
        out.image.pixels[i] = spd_point(apply_spectral(e, [eps](double l) { return std::max(l, eps); }));
        touched[i] = 1;
    });
    out.report.repaired = static_cast<std::size_t>(std::count(touched.begin(), touched.end(), 1));
    return out;
}

RgbImage fractional_anisotropy_preview(const ManifoldImage& spd) {
    if (spd.tag != GeometryTag::Spd3) throw GeometryError("fractional_anisotropy_preview: image is not SPD-valued");
    RgbImage out(spd.dims);
    kernels::for_each_index(spd.pixels.size(), kernels::Exec::Parallel, [&](std::size_t i) {
        const auto l = sym_eigen(spd.pixels[i].mat3()).values;
        const double mean = (l[0] + l[1] + l[2]) / 3.0;
        const double num = (l[0] - mean) * (l[0] - mean) + (l[1] - mean) * (l[1] - mean) + (l[2] - mean) * (l[2] - mean);
        const double den = l[0] * l[0] + l[1] * l[1] + l[2] * l[2];
        const double fa = den > 0.0 ? std::clamp(std::sqrt(1.5 * num / den), 0.0, 1.0) : 0.0;
        out.pixels[i] = {fa, fa, fa};
    });
    return out;
}

// ---------------------------------------------------------------------------
// Tangent fields

std::vector<double> image_to_tangent_field(const ManifoldImage& img, const ManifoldPoint& anchor) {
    if (anchor.tag != img.tag) throw GeometryError("image_to_tangent_field: anchor geometry mismatch");
    const TangentBasis basis(anchor);
    std::vector<double> out(img.pixels.size() * basis.dim());
    kernels::encode_tangent_field(img.pixels, basis, out);
    return out;
}

ManifoldImage tangent_field_to_image(std::span<const double> field, GeometryTag tag, ImageDims dims,
                                     const ManifoldPoint& anchor) {
    if (anchor.tag != tag) throw GeometryError("tangent_field_to_image: anchor geometry mismatch");
    if (field.size() != dims.pixel_count() * tangent_dim(tag)) {
        std::ostringstream os;
        os << "tangent_field_to_image: expected " << dims.pixel_count() * tangent_dim(tag) << " coordinates, got "
           << field.size();
        throw ShapeError(os.str());
    }
    ManifoldImage out(tag, dims, anchor);
    kernels::decode_tangent_field(field, TangentBasis(anchor), out.pixels);
    return out;
}

// ---------------------------------------------------------------------------
// Files

std::vector<std::uint8_t> encode_mvi(const ManifoldImage& img) {
    if (img.pixels.size() != img.dims.pixel_count()) throw ShapeError("encode_mvi: pixel count mismatch");
    detail::ByteWriter w;
    w.magic("MVI1");
    w.u32(static_cast<std::uint32_t>(img.tag));
    w.u32(img.dims.height);
    w.u32(img.dims.width);
    w.u32(static_cast<std::uint32_t>(values_per_point(img.tag)));
    for (const auto& p : img.pixels) w.f64s(p.values());
    w.f64s(img.anchor.values());
    return w.take();
}

ManifoldImage decode_mvi(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "MVI");
    r.expect_magic("MVI1");
    const std::uint32_t raw_tag = r.u32();
    if (raw_tag > 2) throw FormatError("MVI: unknown geometry tag " + std::to_string(raw_tag));
    const auto tag = static_cast<GeometryTag>(raw_tag);
    const ImageDims dims{r.u32(), r.u32()};
    const std::uint32_t vpp = r.u32();
    if (vpp != values_per_point(tag)) throw FormatError("MVI: values-per-pixel does not match the geometry tag");
    if (dims.height == 0 || dims.width == 0) throw FormatError("MVI: empty image");
    r.need((dims.pixel_count() + 1) * vpp * 8);

    std::vector<ManifoldPoint> pixels(dims.pixel_count());
    std::array<double, 9> buf{};
    for (auto& p : pixels) {
        for (std::uint32_t k = 0; k < vpp; ++k) buf[k] = r.f64();
        p = point_from_values(tag, std::span<const double>(buf.data(), vpp));
    }
    for (std::uint32_t k = 0; k < vpp; ++k) buf[k] = r.f64();
    const ManifoldPoint anchor = point_from_values(tag, std::span<const double>(buf.data(), vpp));
    r.expect_end();

    ManifoldImage img;
    img.tag = tag;
    img.dims = dims;
    img.pixels = std::move(pixels);
    img.anchor = anchor;
    try {
        img.validate();
    } catch (const std::exception& e) {
        throw FormatError(std::string("MVI: ") + e.what());
    }
    return img;
}

void save_mvi(const ManifoldImage& img, const std::filesystem::path& path) { write_file_atomic(path, encode_mvi(img)); }

ManifoldImage load_mvi(const std::filesystem::path& path) { return decode_mvi(read_file(path)); }

std::vector<std::uint8_t> encode_brightness(const BrightnessChannel& b) {
    if (b.values.size() != b.dims.pixel_count()) throw ShapeError("encode_brightness: value count mismatch");
    detail::ByteWriter w;
    w.magic("MVB1");
    w.u32(b.dims.height);
    w.u32(b.dims.width);
    w.f64s(b.values);
    return w.take();
}

BrightnessChannel decode_brightness(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "MVB");
    r.expect_magic("MVB1");
    BrightnessChannel b;
    b.dims = ImageDims{r.u32(), r.u32()};
    r.need(b.dims.pixel_count() * 8);
    b.values.resize(b.dims.pixel_count());
    for (double& v : b.values) {
        v = r.f64();
        if (!(v >= 0.0) || !std::isfinite(v)) throw FormatError("MVB: brightness must be finite and nonnegative");
    }
    r.expect_end();
    return b;
}

void save_brightness(const BrightnessChannel& b, const std::filesystem::path& path) {
    write_file_atomic(path, encode_brightness(b));
}

BrightnessChannel load_brightness(const std::filesystem::path& path) { return decode_brightness(read_file(path)); }

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
    if (img.pixels.size() != img.dims.pixel_count()) throw ShapeError("encode_ppm: pixel count mismatch");
    const std::string header = "P6\n" + std::to_string(img.dims.width) + " " + std::to_string(img.dims.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + 3 * img.pixels.size());
    for (const auto& px : img.pixels)
        for (double c : px) out.push_back(static_cast<std::uint8_t>(std::floor(std::clamp(c, 0.0, 1.0) * 255.0 + 0.5)));
    return out;
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    for (;;) {
        while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') tok.push_back(static_cast<char>(bytes[pos++]));
    if (tok.empty()) throw FormatError("PPM: truncated header");
    return tok;
}

std::uint32_t ppm_number(std::span<const std::uint8_t> bytes, std::size_t& pos, const char* field) {
    const std::string tok = ppm_token(bytes, pos);
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }) || tok.size() > 9)
        throw FormatError(std::string("PPM: malformed ") + field);
    return static_cast<std::uint32_t>(std::stoul(tok));
}

} // namespace

RgbImage decode_ppm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    if (ppm_token(bytes, pos) != "P6") throw FormatError("PPM: bad magic (only binary P6 is supported)");
    const std::uint32_t width = ppm_number(bytes, pos, "width");
    const std::uint32_t height = ppm_number(bytes, pos, "height");
    const std::uint32_t maxval = ppm_number(bytes, pos, "maxval");
    if (width == 0 || height == 0) throw FormatError("PPM: empty image");
    if (maxval == 0 || maxval > 65535) throw FormatError("PPM: maxval out of range");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("PPM: truncated header");
    ++pos;

    RgbImage img(ImageDims{height, width});
    const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
    if (bytes.size() - pos < img.pixels.size() * 3 * sample_bytes) throw FormatError("PPM: truncated payload");
    for (auto& px : img.pixels)
        for (double& c : px) {
            std::uint32_t raw = bytes[pos++];
            if (sample_bytes == 2) raw = (raw << 8) | bytes[pos++];
            if (raw > maxval) throw FormatError("PPM: sample exceeds maxval");
            c = static_cast<double>(raw) / maxval;
        }
    return img;
}

void save_ppm(const RgbImage& img, const std::filesystem::path& path) { write_file_atomic(path, encode_ppm(img)); }

RgbImage load_ppm(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace mwgan
