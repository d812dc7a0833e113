#pragma once

// Test-only reference computations. Nothing here calls the closed-form field
// or the library's own quadrature.

#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "wirefit/field.hpp"
#include "wirefit/image.hpp"

namespace oracle {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                               double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// Bz from the Biot-Savart volume integral with a line-current density:
/// J = I * delta across the wire, so the integral collapses to a line
/// integral of (dl x r)_z / |r|^3 along the segment. Lengths in um.
inline double bz_line_integral(const wirefit::SegmentParams& seg, wirefit::FieldPoint p) {
    const bool along_x = seg.axis == wirefit::Axis::X;
    auto integrand = [&](double t) {
        const double sx = seg.x0 + (along_x ? t : 0.0);
        const double sy = seg.y0 + (along_x ? 0.0 : t);
        const double rx = p.x - sx;
        const double ry = p.y - sy;
        const double r2 = rx * rx + ry * ry + seg.z0 * seg.z0;
        const double cross_z = along_x ? ry : -rx;  // (dl x r)_z for dl = x-hat or y-hat
        return cross_z / std::pow(r2, 1.5);
    };
    // Split at the closest approach, integrate each half with a tolerance
    // scaled to the peak integrand magnitude.
    const double along = along_x ? p.x - seg.x0 : p.y - seg.y0;
    const double foot = std::min(std::max(along, 0.0), seg.length);
    const double perp = along_x ? p.y - seg.y0 : p.x - seg.x0;
    const double a2 = perp * perp + seg.z0 * seg.z0;
    const double tol = 1e-13 * std::max(std::abs(perp), 1e-300) / a2;
    double total = 0.0;
    if (foot > 0.0) total += integrate(integrand, 0.0, foot, tol);
    if (foot < seg.length) total += integrate(integrand, foot, seg.length, tol);
    return 1e-7 * seg.current * total * 1e6;
}

/// Positions of the max and min of f sampled on [lo, hi] with step h.
inline std::pair<double, double> argmax_argmin(const std::function<double(double)>& f, double lo, double hi,
                                               double h) {
    double best = -INFINITY, worst = INFINITY, at_max = lo, at_min = lo;
    for (double t = lo; t <= hi; t += h) {
        const double v = f(t);
        if (v > best) best = v, at_max = t;
        if (v < worst) worst = v, at_min = t;
    }
    return {at_max, at_min};
}

/// Straight pixel loop for chi-square, from a model evaluated pointwise.
inline double chi2_sum(const wirefit::MfiImage& data, const std::function<double(wirefit::FieldPoint)>& model,
                       double sigma) {
    double s = 0.0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.size(); ++c) {
            const double d = (data.at(r, c) - model(data.position(r, c))) / sigma;
            s += d * d;
        }
    }
    return s;
}

/// Random valid segment with beta in [beta_lo, beta_hi].
inline wirefit::SegmentParams random_segment(std::mt19937_64& rng, double beta_lo = 0.5, double beta_hi = 20.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double z0 = 50.0 + 450.0 * u(rng);
    const double beta = beta_lo + (beta_hi - beta_lo) * u(rng);
    const double mag = 0.1 + 4.9 * u(rng);
    const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
    const auto axis = u(rng) < 0.5 ? wirefit::Axis::X : wirefit::Axis::Y;
    return {-1000.0 + 2000.0 * u(rng), -1000.0 + 2000.0 * u(rng), z0, beta * z0, sign * mag, axis};
}

}  // namespace oracle
