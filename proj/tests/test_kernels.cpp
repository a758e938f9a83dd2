#include "doctest.h"
#include "random_points.hpp"

#include "mwgan/errors.hpp"
#include "mwgan/kernels.hpp"

#include <cstring>
#include <vector>

using namespace mwgan;
using namespace mwgan::testing;
using kernels::Exec;

namespace {

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

bool same_points(const std::vector<ManifoldPoint>& a, const std::vector<ManifoldPoint>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].tag != b[i].tag || std::memcmp(a[i].data.data(), b[i].data.data(), sizeof(double) * 9) != 0) return false;
    return true;
}

std::vector<ManifoldPoint> random_points(GeometryTag tag, Rng& rng, std::size_t n) {
    std::vector<ManifoldPoint> out(n);
    for (auto& p : out) p = random_point(tag, rng);
    return out;
}

} // namespace

TEST_CASE("serial and parallel tangent-field kernels agree bit for bit") {
    Rng rng(21);
    for (GeometryTag tag : kAllTags) {
        CAPTURE(tag_name(tag));
        const auto pts = random_points(tag, rng, 777);
        const TangentBasis basis(default_anchors().for_tag(tag));
        std::vector<double> serial(pts.size() * basis.dim()), parallel(serial.size());
        kernels::encode_tangent_field(pts, basis, serial, Exec::Serial);
        kernels::encode_tangent_field(pts, basis, parallel, Exec::Parallel);
        CHECK(same_bits(serial, parallel));

        std::vector<ManifoldPoint> ds(pts.size()), dp(pts.size());
        kernels::decode_tangent_field(serial, basis, ds, Exec::Serial);
        kernels::decode_tangent_field(serial, basis, dp, Exec::Parallel);
        CHECK(same_points(ds, dp));
    }
}

TEST_CASE("serial and parallel color kernels agree") {
    Rng rng(22);
    std::vector<kernels::Rgb> rgb(1000);
    for (auto& px : rgb) px = {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    std::vector<ManifoldPoint> hs(rgb.size()), hp(rgb.size());
    kernels::rgb_to_hsv_pixels(rgb, hs, Exec::Serial);
    kernels::rgb_to_hsv_pixels(rgb, hp, Exec::Parallel);
    CHECK(same_points(hs, hp));
    std::vector<kernels::Rgb> rs(rgb.size()), rp(rgb.size());
    kernels::hsv_to_rgb_pixels(hs, rs, Exec::Serial);
    kernels::hsv_to_rgb_pixels(hs, rp, Exec::Parallel);
    CHECK(same_bits(rs, rp));
}

TEST_CASE("cost matrices") {
    Rng rng(23);
    for (GeometryTag tag : kAllTags) {
        CAPTURE(tag_name(tag));
        const std::size_t ppi = 4;
        const auto a = random_points(tag, rng, 9 * ppi);
        const auto b = random_points(tag, rng, 7 * ppi);
        std::vector<double> cs(63), cp(63);
        kernels::geodesic_cost_matrix(a, b, ppi, cs, Exec::Serial);
        kernels::geodesic_cost_matrix(a, b, ppi, cp, Exec::Parallel);
        CHECK(same_bits(cs, cp));
        // Spot check one entry against a direct sum.
        double s = 0.0;
        for (std::size_t p = 0; p < ppi; ++p) s += std::pow(distance(a[2 * ppi + p], b[5 * ppi + p]), 2);
        CHECK(cs[2 * 7 + 5] == doctest::Approx(std::sqrt(s)).epsilon(1e-15));
        CHECK_THROWS_AS(kernels::geodesic_cost_matrix(a, b, 5, cs), ShapeError);
    }

    std::vector<double> a{0, 0, 3, 4}, b{0, 0};
    std::vector<double> c(2);
    kernels::euclidean_cost_matrix(a, b, 2, c);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 5.0);
}

TEST_CASE("matmul paths agree and match a hand product") {
    std::vector<double> a{1, 2, 3, 4, 5, 6}, b{7, 8, 9, 10, 11, 12}, c(4);
    kernels::matmul(a, b, c, 2, 3, 2, Exec::Serial);
    CHECK(c == std::vector<double>{58, 64, 139, 154});

    Rng rng(24);
    const std::size_t m = 150, k = 70, n = 90; // large enough to take the threaded branch
    std::vector<double> x(m * k), y(k * n), zs(m * n), zp(m * n);
    for (double& v : x) v = gaussian(rng);
    for (double& v : y) v = gaussian(rng);
    kernels::matmul(x, y, zs, m, k, n, Exec::Serial);
    kernels::matmul(x, y, zp, m, k, n, Exec::Parallel);
    CHECK(same_bits(zs, zp));
    CHECK_THROWS_AS(kernels::matmul(x, y, zs, m, k + 1, n), ShapeError);
}

TEST_CASE("for_each_index rethrows body exceptions in both modes") {
    for (Exec exec : {Exec::Serial, Exec::Parallel}) {
        std::vector<int> hit(100, 0);
        CHECK_THROWS_AS(kernels::for_each_index(100, exec,
                                                [&](std::size_t i) {
                                                    hit[i] = 1;
                                                    if (i == 42) throw DataError("boom");
                                                }),
                        DataError);
    }
}
