#include "wirefit/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace wirefit {

double bz_quadrature(const SegmentParams& seg, FieldPoint p) {
    const double dir_x = seg.axis == Axis::X ? 1.0 : 0.0;
    const double dir_y = seg.axis == Axis::Y ? 1.0 : 0.0;
    // Source point S(t) = start + t * dir at depth z0; r = P - S.
    auto integrand = [&](double t) {
        const double rx = p.x - (seg.x0 + t * dir_x);
        const double ry = p.y - (seg.y0 + t * dir_y);
        const double rz = seg.z0;
        const double r2 = rx * rx + ry * ry + rz * rz;
        return (dir_x * ry - dir_y * rx) / (r2 * std::sqrt(r2));
    };
    // Split at the foot of the perpendicular, where the integrand peaks.
    const double along = seg.axis == Axis::X ? p.x - seg.x0 : p.y - seg.y0;
    const double foot = std::clamp(along, 0.0, seg.length);
    using Gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    double integral = 0.0;
    if (foot > 0.0) integral += Gk::integrate(integrand, 0.0, foot, 15, 1e-12);
    if (foot < seg.length) integral += Gk::integrate(integrand, foot, seg.length, 15, 1e-12);
    // t and r are in micrometres: integral carries 1/um.
    return kMu0Over4Pi * seg.current * integral / kMetresPerMicron;
}

double pp_bruteforce(double length, double z0, double step) {
    const SegmentParams seg(0.0, 0.0, z0, length, 1.0, Axis::X);
    const double x = 0.5 * length;
    const double reach = 3.0 * z0;
    const auto count = static_cast<long>(std::ceil(2.0 * reach / step));
    double best_max = -INFINITY;
    double best_min = INFINITY;
    double y_max = 0.0;
    double y_min = 0.0;
    for (long k = 0; k <= count; ++k) {
        const double y = -reach + static_cast<double>(k) * step;
        const double v = bz_at(seg, {x, y});
        if (v > best_max) {
            best_max = v;
            y_max = y;
        }
        if (v < best_min) {
            best_min = v;
            y_min = y;
        }
    }
    return std::abs(y_max - y_min);
}

namespace {

template <typename F>
CheckResult timed(std::string name, double tolerance, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = std::move(name);
    r.tolerance = tolerance;
    r.measured = body();
    r.passed = r.measured < tolerance;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace

CheckResult check_pp_formula() {
    return timed("pp_formula_vs_scan", 1e-3, [] {
        const double z0 = 100.0;
        const double step = 1e-4 * z0;
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double beta = 0.1 * std::pow(500.0, i / 49.0);
            const double pp = pp_distance(beta * z0, z0);
            const double scan = pp_bruteforce(beta * z0, z0, step);
            worst = std::max(worst, std::abs(scan - pp) / pp);
        }
        return worst;
    });
}

CheckResult check_depth_roundtrip() {
    return timed("depth_roundtrip", 1e-9, [] {
        double worst = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double beta = 0.1 * std::pow(1000.0, i / 200.0);
            for (double z : {1.0, 37.5, 150.0, 2500.0}) {
                const double back = depth_from_pp(pp_distance(beta * z, z), beta);
                worst = std::max(worst, std::abs(back - z) / z);
            }
        }
        return worst;
    });
}

CheckResult check_infinite_wire_field() {
    return timed("infinite_wire_field", 1e-3, [] {
        const double z0 = 100.0;
        const double length = 1e6 * z0;
        const SegmentParams seg(-0.5 * length, 0.0, z0, length, 1.0, Axis::X);
        double worst = 0.0;
        for (double x : {-1000.0, 0.0, 1000.0}) {
            for (double dy : {-300.0, -100.0, -30.0, 10.0, 50.0, 100.0, 200.0, 1000.0}) {
                const double exact = 2.0 * kMu0Over4Pi * seg.current * dy / (dy * dy + z0 * z0) / kMetresPerMicron;
                worst = std::max(worst, std::abs(bz_at(seg, {x, dy}) - exact) / std::abs(exact));
            }
        }
        return worst;
    });
}

CheckResult check_infinite_wire_pp() {
    return timed("infinite_wire_pp", 1e-4, [] {
        const double z0 = 100.0;
        const double formula = pp_distance(1e6 * z0, z0);
        const double scan = pp_bruteforce(1e6 * z0, z0, 1e-5 * z0);
        return std::max(std::abs(formula - 2.0 * z0), std::abs(scan - 2.0 * z0)) / (2.0 * z0);
    });
}

CheckResult check_quadrature(std::size_t segments, unsigned seed) {
    return timed("closed_form_vs_quadrature", 1e-6, [&] {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (std::size_t s = 0; s < segments; ++s) {
            const double z0 = 50.0 + 450.0 * unit(rng);
            const double beta = 0.5 * std::pow(40.0, unit(rng));
            const double current = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + 4.9 * unit(rng));
            const Axis axis = s % 2 == 0 ? Axis::X : Axis::Y;
            const SegmentParams seg(-500.0 + 1000.0 * unit(rng), -500.0 + 1000.0 * unit(rng), z0, beta * z0,
                                    current, axis);
            const double span = beta * z0 + 6.0 * z0;
            const double pitch = span / 32.0;
            const double cx = seg.x0 + (axis == Axis::X ? 0.5 * seg.length : 0.0);
            const double cy = seg.y0 + (axis == Axis::Y ? 0.5 * seg.length : 0.0);
            std::vector<double> closed;
            std::vector<double> quad;
            for (int r = 0; r < 32; ++r) {
                for (int c = 0; c < 32; ++c) {
                    const FieldPoint p{cx + (c - 15.5) * pitch, cy + (r - 15.5) * pitch};
                    closed.push_back(bz_at(seg, p));
                    quad.push_back(bz_quadrature(seg, p));
                }
            }
            double scale = 0.0;
            for (double v : quad) scale = std::max(scale, std::abs(v));
            for (std::size_t i = 0; i < closed.size(); ++i) {
                const double denom = std::max(std::abs(quad[i]), 1e-9 * scale);
                worst = std::max(worst, std::abs(closed[i] - quad[i]) / denom);
            }
        }
        return worst;
    });
}

std::vector<CheckResult> run_self_checks() {
    return {check_pp_formula(), check_depth_roundtrip(), check_infinite_wire_field(), check_infinite_wire_pp(),
            check_quadrature()};
}

}  // namespace wirefit
