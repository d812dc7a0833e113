#pragma once

#include <string>
#include <vector>

#include "wirefit/field.hpp"

namespace wirefit {

/// Bz of a straight segment by adaptive Gauss-Kronrod integration of the
/// Biot-Savart line integral. Independent of the closed-form bz_at.
double bz_quadrature(const SegmentParams& seg, FieldPoint p);

/// PP distance located by scanning the Bz profile across the segment
/// midpoint with step `step`.
double pp_bruteforce(double length, double z0, double step);

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    double seconds = 0.0;
};

// Each check reports its worst observed error against its tolerance.

/// 50 log-spaced beta in [0.1, 50], scan step 1e-4 z0: worst
/// |PP_scan - PP| / PP against 1e-3.
CheckResult check_pp_formula();
/// depth_from_pp(pp_distance(beta z, z), beta) = z for beta in [0.1, 100].
CheckResult check_depth_roundtrip();
/// beta = 1e6: Bz vs the infinite-wire field within 0.1%.
CheckResult check_infinite_wire_field();
/// beta = 1e6: PP vs 2 z0 within 0.01%.
CheckResult check_infinite_wire_pp();
/// Closed form vs quadrature on 32x32 grids around random segments.
CheckResult check_quadrature(std::size_t segments = 10, unsigned seed = 7);

std::vector<CheckResult> run_self_checks();

}  // namespace wirefit
