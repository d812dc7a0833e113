#include "wirefit/estimate.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "wirefit/errors.hpp"

namespace wirefit {

std::string_view to_string(EstimateSource source) {
    return source == EstimateSource::Neural ? "neural" : "analytic";
}

namespace {

struct LobeGeometry {
    ExtremaReport extrema;
    LobeReport lobes;
};

LobeGeometry analyse(const MfiImage& img) {
    const ExtremaReport ext = find_extrema(img);
    if (ext.max_pos == ext.min_pos) {
        throw ClassificationFailure("image maximum and minimum coincide");
    }
    return {ext, find_lobes(img)};
}

Axis classify(const LobeGeometry& g) {
    const double dx = std::abs(g.lobes.max_centroid.x - g.lobes.min_centroid.x);
    const double dy = std::abs(g.lobes.max_centroid.y - g.lobes.min_centroid.y);
    return dy >= dx ? Axis::X : Axis::Y;
}

EstimateBundle from_beta(const LobeGeometry& g, double beta, Axis axis, EstimateSource source) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw EstimationError("beta estimate must be positive and finite");
    }
    const ExtremaReport& e = g.extrema;
    // The along-axis lobe position is flat over long segments, so the lobe
    // centroids stand in for the extremum coordinate there.
    const FieldPoint centre{0.5 * (g.lobes.max_centroid.x + g.lobes.min_centroid.x),
                            0.5 * (g.lobes.max_centroid.y + g.lobes.min_centroid.y)};

    const double pp = axis == Axis::X ? std::abs(e.min_pos.y - e.max_pos.y) : std::abs(e.min_pos.x - e.max_pos.x);
    if (!(pp > 0.0)) {
        throw EstimationError("extrema are not separated across the segment axis");
    }
    if (!(e.max_val > 0.0)) {
        throw EstimationError("image has no positive field peak");
    }
    const double z0 = depth_from_pp(pp, beta);
    const double length = z0 * beta;
    const double magnitude = peak_current_estimate(e.max_val, length, z0);

    double x0;
    double y0;
    double sign;
    if (axis == Axis::X) {
        y0 = 0.5 * (e.max_pos.y + e.min_pos.y);
        x0 = centre.x - 0.5 * length;
        sign = e.max_pos.y > e.min_pos.y ? 1.0 : -1.0;
    } else {
        x0 = 0.5 * (e.max_pos.x + e.min_pos.x);
        y0 = centre.y - 0.5 * length;
        sign = e.max_pos.x < e.min_pos.x ? 1.0 : -1.0;
    }
    return {SegmentParams(x0, y0, z0, length, sign * magnitude, axis), beta, pp, source};
}

// Residual sum of squares after rescaling the candidate's current to its
// least-squares optimum. The model is linear in I, so the rescale is closed
// form; ranking on shape alone keeps the peak-current approximation from
// steering beta when short segments all look like the same dipole.
double profiled_misfit(const MfiImage& img, const SegmentParams& p) {
    const std::size_t n = img.size();
    std::vector<double> model(n * n);
    double dm = 0.0;
    double mm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double m = bz_at(p, img.position(r, c));
            model[r * n + c] = m;
            dm += static_cast<double>(img.at(r, c)) * m;
            mm += m * m;
        }
    }
    if (!(mm > 0.0)) return std::numeric_limits<double>::infinity();
    const double k = dm / mm;
    double total = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double d = static_cast<double>(img.data()[i]) - k * model[i];
        total += d * d;
    }
    return total;
}

}  // namespace

Axis classify_axis_analytic(const MfiImage& img) { return classify(analyse(img)); }

std::vector<double> fallback_beta_grid() {
    std::vector<double> grid(kFallbackBetaPoints);
    const double lo = std::log(kFallbackBetaMin);
    const double hi = std::log(kFallbackBetaMax);
    for (int i = 0; i < kFallbackBetaPoints; ++i) {
        grid[i] = std::exp(lo + (hi - lo) * i / (kFallbackBetaPoints - 1));
    }
    return grid;
}

BetaAxis estimate_beta_fallback(const MfiImage& img) {
    const LobeGeometry g = analyse(img);
    const Axis axis = classify(g);
    BetaAxis best{0.0, axis};
    double best_chi2 = std::numeric_limits<double>::infinity();
    for (double beta : fallback_beta_grid()) {
        const double value = profiled_misfit(img, from_beta(g, beta, axis, EstimateSource::AnalyticFallback).params);
        if (!std::isfinite(value)) continue;
        if (value < best_chi2) {
            best_chi2 = value;
            best.beta = beta;
        }
    }
    if (!(best.beta > 0.0)) {
        throw EstimationError("no finite chi-square over the beta grid");
    }
    return best;
}

EstimateBundle estimate_from_beta(const MfiImage& img, double beta, Axis axis, EstimateSource source) {
    return from_beta(analyse(img), beta, axis, source);
}

EstimateBundle initial_estimate(const MfiImage& img, const BetaEstimator& estimator) {
    const LobeGeometry g = analyse(img);
    const BetaAxis ba = estimator.estimate(img);
    return from_beta(g, ba.beta, ba.axis, estimator.source());
}

}  // namespace wirefit
