#pragma once

#include <string_view>
#include <vector>

#include "wirefit/field.hpp"
#include "wirefit/image.hpp"

namespace wirefit {

enum class EstimateSource { Neural, AnalyticFallback };

std::string_view to_string(EstimateSource source);

struct BetaAxis {
    double beta = 1.0;
    Axis axis = Axis::X;
};

/// Image -> (beta, axis). Implementations must be callable concurrently.
class BetaEstimator {
public:
    virtual ~BetaEstimator() = default;
    virtual BetaAxis estimate(const MfiImage& img) const = 0;
    virtual EstimateSource source() const = 0;
};

struct EstimateBundle {
    SegmentParams params;
    double beta = 0.0;
    double pp = 0.0;
    EstimateSource source = EstimateSource::AnalyticFallback;
};

/// X when the lobes are separated at least as much in y as in x, else Y.
Axis classify_axis_analytic(const MfiImage& img);

inline constexpr double kFallbackBetaMin = 0.1;
inline constexpr double kFallbackBetaMax = 50.0;
inline constexpr int kFallbackBetaPoints = 64;

/// The log-spaced candidate grid searched by estimate_beta_fallback.
std::vector<double> fallback_beta_grid();

/// Picks the grid beta whose geometric estimate, rendered with its current
/// rescaled to the least-squares optimum, misfits the image least (ties
/// resolve to the smaller beta).
BetaAxis estimate_beta_fallback(const MfiImage& img);

/// Geometry-only estimate for a known beta and axis: PP from the extrema,
/// depth from PP, length = depth * beta, start point from the lobe positions,
/// |I| from the peak field and the current sign from the lobe ordering.
EstimateBundle estimate_from_beta(const MfiImage& img, double beta, Axis axis,
                                  EstimateSource source = EstimateSource::AnalyticFallback);

EstimateBundle initial_estimate(const MfiImage& img, const BetaEstimator& estimator);

class AnalyticBetaEstimator final : public BetaEstimator {
public:
    BetaAxis estimate(const MfiImage& img) const override { return estimate_beta_fallback(img); }
    EstimateSource source() const override { return EstimateSource::AnalyticFallback; }
};

}  // namespace wirefit
