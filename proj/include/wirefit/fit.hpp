#pragma once

#include <cstddef>
#include <vector>

#include "wirefit/field.hpp"
#include "wirefit/image.hpp"
#include "wirefit/simplex.hpp"

namespace wirefit {

inline constexpr double kSigmaFloor = 1e-12;

/// Noise scale for the chi-square denominator: the recorded noise sigma when
/// positive, otherwise the standard deviation of the 1-pixel border, floored
/// at kSigmaFloor.
double noise_scale(const MfiImage& img);

/// Pixel-level chi-square of a single-segment model against an image.
class Objective {
public:
    Objective(MfiImage data, Axis axis, double sigma_b);
    // sigma_b from noise_scale(data).
    Objective(MfiImage data, Axis axis);

    const MfiImage& data() const { return data_; }
    Axis axis() const { return axis_; }
    double sigma_b() const { return sigma_b_; }

private:
    MfiImage data_;
    Axis axis_;
    double sigma_b_;
};

struct FitReport {
    SegmentParams params;
    double chi2 = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    MfiImage residual;
    // Best chi-square after each simplex iteration.
    std::vector<double> chi2_history;
};

/// Sum over pixels of ((data - model) / sigma_b)^2, the model being the
/// rendered image of `p`.
double chi2(const Objective& obj, const SegmentParams& p);

/// data - render(p), carrying the data's noise sigma.
MfiImage residual(const Objective& obj, const SegmentParams& p);

/// Nelder-Mead over (x0, y0, z0, length, current) starting at `start`. The
/// axis is held fixed. Depth and length are searched in log space; positions
/// are scaled by the pixel pitch and the current by |start.current|.
FitReport minimize(const Objective& obj, const SegmentParams& start, const SimplexConfig& cfg = {});

}  // namespace wirefit
