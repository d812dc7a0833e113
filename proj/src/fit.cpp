#include "wirefit/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "wirefit/errors.hpp"

namespace wirefit {

double noise_scale(const MfiImage& img) {
    if (img.noise_sigma() > 0.0) return std::max(img.noise_sigma(), kSigmaFloor);
    const std::size_t n = img.size();
    double sum = 0.0;
    double sumsq = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            if (r != 0 && c != 0 && r + 1 != n && c + 1 != n) continue;
            const double v = img.at(r, c);
            sum += v;
            sumsq += v * v;
            ++count;
        }
    }
    const double mean = sum / static_cast<double>(count);
    const double var = std::max(0.0, sumsq / static_cast<double>(count) - mean * mean);
    return std::max(std::sqrt(var), kSigmaFloor);
}

Objective::Objective(MfiImage data, Axis axis, double sigma_b)
    : data_(std::move(data)), axis_(axis), sigma_b_(sigma_b) {
    if (!(sigma_b_ > 0.0) || !std::isfinite(sigma_b_)) {
        throw InvalidArgument("chi-square noise scale must be positive");
    }
}

Objective::Objective(MfiImage data, Axis axis) : Objective(data, axis, noise_scale(data)) {}

namespace {

void check_axis(const Objective& obj, const SegmentParams& p) {
    if (p.axis != obj.axis()) {
        throw InvalidArgument("segment axis does not match the objective axis");
    }
}

// Model pixels are rounded to f32 exactly as render() stores them, so a
// rendered image is reproduced with zero residual.
double chi2_unchecked(const Objective& obj, const SegmentParams& p) {
    const MfiImage& img = obj.data();
    const std::size_t n = img.size();
    const double inv = 1.0 / obj.sigma_b();
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double model = static_cast<float>(bz_at(p, img.position(r, c)));
            const double d = (static_cast<double>(img.at(r, c)) - model) * inv;
            total += d * d;
        }
    }
    return total;
}

}  // namespace

double chi2(const Objective& obj, const SegmentParams& p) {
    check_axis(obj, p);
    return chi2_unchecked(obj, p);
}

MfiImage residual(const Objective& obj, const SegmentParams& p) {
    check_axis(obj, p);
    const MfiImage& img = obj.data();
    const std::size_t n = img.size();
    std::vector<float> out(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double model = static_cast<float>(bz_at(p, img.position(r, c)));
            out[r * n + c] = static_cast<float>(static_cast<double>(img.at(r, c)) - model);
        }
    }
    return img.with_data(std::move(out), img.noise_sigma());
}

namespace {

// Internal coordinates: x0 / scale, y0 / scale, ln z0, ln length, I / current_scale.
struct Packing {
    double scale;
    double current_scale;
    Axis axis;

    std::array<double, 5> pack(const SegmentParams& p) const {
        return {p.x0 / scale, p.y0 / scale, std::log(p.z0), std::log(p.length), p.current / current_scale};
    }

    // Skips SegmentParams validation: the transform keeps z0 and length
    // positive, and a zero current is a legal (if poor) trial point.
    SegmentParams unpack(std::span<const double> u) const {
        SegmentParams p;
        p.x0 = u[0] * scale;
        p.y0 = u[1] * scale;
        p.z0 = std::exp(u[2]);
        p.length = std::exp(u[3]);
        p.current = u[4] * current_scale;
        p.axis = axis;
        return p;
    }
};

}  // namespace

FitReport minimize(const Objective& obj, const SegmentParams& start, const SimplexConfig& cfg) {
    check_axis(obj, start);
    const double pitch = obj.data().pitch();
    const Packing packing{pitch, std::abs(start.current), obj.axis()};

    const auto u0 = packing.pack(start);
    const std::array<double, 5> steps{
        std::max(0.05 * std::abs(start.x0), pitch) / pitch,
        std::max(0.05 * std::abs(start.y0), pitch) / pitch,
        std::log1p(std::max(0.05 * start.z0, pitch) / start.z0),
        std::log1p(std::max(0.05 * start.length, pitch) / start.length),
        0.05,
    };

    auto objective = [&](std::span<const double> u) {
        const SegmentParams p = packing.unpack(u);
        if (!std::isfinite(p.z0) || !std::isfinite(p.length) || !(p.z0 > 0.0) || !(p.length > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        return chi2_unchecked(obj, p);
    };

    const SimplexResult run = nelder_mead(objective, u0, steps, cfg);

    if (!std::isfinite(run.value)) {
        return FitReport{start, std::numeric_limits<double>::infinity(), run.iterations, run.evaluations,
                         false, obj.data(), run.best_history};
    }
    SegmentParams best = packing.unpack(run.x);
    if (best.current == 0.0) best.current = std::numeric_limits<double>::min();
    return FitReport{best, run.value, run.iterations, run.evaluations, run.converged,
                     residual(obj, best), run.best_history};
}

}  // namespace wirefit
