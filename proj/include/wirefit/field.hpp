#pragma once

#include <string_view>

namespace wirefit {

// Lengths are micrometres, current is amperes, field is tesla throughout.

enum class Axis { X, Y };

std::string_view to_string(Axis axis);
Axis axis_from_string(std::string_view text);

// mu0 / 4pi in T*m/A.
inline constexpr double kMu0Over4Pi = 1e-7;
inline constexpr double kMetresPerMicron = 1e-6;

/// A straight current segment lying in a plane at depth z0 beneath the sensor.
///
/// (x0, y0) is the start point; the segment runs to (x0 + length, y0) for an
/// X segment and to (x0, y0 + length) for a Y segment. The sign of `current`
/// carries the flow direction along the axis.
struct SegmentParams {
    double x0 = 0.0;
    double y0 = 0.0;
    double z0 = 1.0;
    double length = 1.0;
    double current = 1.0;
    Axis axis = Axis::X;

    SegmentParams() = default;
    // Throws InvalidArgument unless z0 > 0, length > 0, current != 0 and all finite.
    SegmentParams(double x0, double y0, double z0, double length, double current, Axis axis);

    double beta() const { return length / z0; }

    friend bool operator==(const SegmentParams&, const SegmentParams&) = default;
};

struct FieldPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const FieldPoint&, const FieldPoint&) = default;
};

/// Bz at a sensor-plane point from the closed-form finite-segment field.
double bz_at(const SegmentParams& seg, FieldPoint p);

/// Separation of the Bz maximum and minimum lobes for a segment of length
/// `length` at depth `z0`.
double pp_distance(double length, double z0);

/// PP / z0 as a function of beta = length / z0 alone.
double pp_ratio(double beta);

/// Inverse of pp_distance at fixed beta: the depth that yields `pp`.
double depth_from_pp(double pp, double beta);

/// Approximate |I| from the peak field of a segment with the given geometry.
double peak_current_estimate(double bz_max, double length, double z0);

}  // namespace wirefit
