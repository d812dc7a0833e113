#include "wirefit/field.hpp"

#include <cmath>
#include <string>

#include "wirefit/errors.hpp"

namespace wirefit {

std::string_view to_string(Axis axis) { return axis == Axis::X ? "X" : "Y"; }

Axis axis_from_string(std::string_view text) {
    if (text == "X" || text == "x") return Axis::X;
    if (text == "Y" || text == "y") return Axis::Y;
    throw InvalidArgument("unknown axis '" + std::string(text) + "'");
}

SegmentParams::SegmentParams(double x0_, double y0_, double z0_, double length_,
                             double current_, Axis axis_)
    : x0(x0_), y0(y0_), z0(z0_), length(length_), current(current_), axis(axis_) {
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(z0) ||
        !std::isfinite(length) || !std::isfinite(current)) {
        throw InvalidArgument("segment parameters must be finite");
    }
    if (!(z0 > 0.0)) throw InvalidArgument("segment depth z0 must be positive");
    if (!(length > 0.0)) throw InvalidArgument("segment length must be positive");
    if (current == 0.0) throw InvalidArgument("segment current must be nonzero");
}

namespace {

// Field per unit current of a segment running along +u from u0 to u0 + length,
// observed at perpendicular offset `perp` and along-axis coordinate `u`.
// Returns (perp / (perp^2 + z^2)) * (end term - start term) in 1/m.
double unit_field(double u, double perp, double u0, double length, double z) {
    const double a2 = perp * perp + z * z;
    const double to_end = u0 + length - u;
    const double to_start = u0 - u;
    const double bracket = to_end / std::sqrt(to_end * to_end + a2) -
                           to_start / std::sqrt(to_start * to_start + a2);
    return perp / a2 * bracket / kMetresPerMicron;
}

// sqrt(1 + u) - 1 without cancellation for small u.
double sqrt1p_minus1(double u) { return u / (std::sqrt(1.0 + u) + 1.0); }

}  // namespace

double bz_at(const SegmentParams& seg, FieldPoint p) {
    double geometry;
    if (seg.axis == Axis::X) {
        geometry = kMu0Over4Pi * unit_field(p.x, p.y - seg.y0, seg.x0, seg.length, seg.z0);
    } else {
        geometry = -kMu0Over4Pi * unit_field(p.y, p.x - seg.x0, seg.y0, seg.length, seg.z0);
    }
    // Current applied last so that scaling it by a power of two is exact.
    return geometry * seg.current;
}

double pp_ratio(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw InvalidArgument("beta must be finite and non-negative");
    }
    const double c = 0.25 * beta * beta + 1.0;
    return std::sqrt(c) * std::sqrt(sqrt1p_minus1(8.0 / c));
}

double pp_distance(double length, double z0) {
    if (!(length > 0.0) || !(z0 > 0.0)) {
        throw InvalidArgument("pp_distance requires positive length and depth");
    }
    return z0 * pp_ratio(length / z0);
}

double depth_from_pp(double pp, double beta) {
    if (!(pp > 0.0) || !std::isfinite(pp)) {
        throw InvalidArgument("peak-to-peak distance must be positive");
    }
    return pp / pp_ratio(beta);
}

double peak_current_estimate(double bz_max, double length, double z0) {
    if (!(bz_max > 0.0) || !(length > 0.0) || !(z0 > 0.0)) {
        throw InvalidArgument("peak_current_estimate requires positive arguments");
    }
    const double half = 0.5 * length;
    const double per_amp = kMu0Over4Pi * (length / (2.0 * z0)) /
                           (std::sqrt(half * half + 2.0 * z0 * z0) * kMetresPerMicron);
    return bz_max / per_amp;
}

}  // namespace wirefit
