#pragma once

// Randomized invariant sweep over one geometry: exp/log round trips, the
// norm-distance identity and a closed-form distance cross-check.

#include "mwgan/geometry.hpp"

#include <cstdint>

namespace mwgan {

struct GeomCheckTolerances {
    double round_trip = 1e-12;    // |exp_y(log_y(x)) - x|
    double norm_distance = 1e-10; // | |log_y(x)| - d(x, y) |
    double cross_check = 1e-10;   // | d(x, y) - closed form |

    static GeomCheckTolerances for_tag(GeometryTag tag);
};

struct GeomCheckReport {
    GeometryTag tag = GeometryTag::HsvProduct;
    std::size_t trials = 0;
    double max_round_trip = 0.0;
    double max_norm_distance = 0.0;
    double max_cross_check = 0.0;
    GeomCheckTolerances tol;

    bool passed() const {
        return max_round_trip <= tol.round_trip && max_norm_distance <= tol.norm_distance &&
               max_cross_check <= tol.cross_check;
    }
};

// Closed forms: HSV sqrt(wrap(dh)^2 + ds^2 + dv^2); sphere arccos<x, y>;
// SPD |log X - log Y|_F. Sphere pairs within 1e-3 of antipodal are redrawn.
GeomCheckReport geometry_check(GeometryTag tag, std::size_t trials, std::uint64_t seed);
GeomCheckReport geometry_check(GeometryTag tag, std::size_t trials, std::uint64_t seed, const GeomCheckTolerances& tol);

// Ambient distance between two points of one geometry, hue compared modulo 2 pi.
double ambient_error(const ManifoldPoint& a, const ManifoldPoint& b);

} // namespace mwgan
