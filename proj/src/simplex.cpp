#include "wirefit/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wirefit/errors.hpp"

namespace wirefit {

namespace {

struct Vertex {
    std::vector<double> x;
    double f;
};

}  // namespace

SimplexResult nelder_mead(const ObjectiveFn& objective, std::span<const double> start,
                          std::span<const double> steps, const SimplexConfig& cfg) {
    const std::size_t n = start.size();
    if (n == 0 || steps.size() != n) {
        throw InvalidArgument("nelder_mead needs a non-empty start and one step per coordinate");
    }

    SimplexResult result;
    double best_seen = std::numeric_limits<double>::infinity();
    auto eval = [&](const std::vector<double>& x) {
        double v = objective(x);
        if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
        ++result.evaluations;
        best_seen = std::min(best_seen, v);
        result.best_by_evaluation.push_back(best_seen);
        return v;
    };

    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back({std::vector<double>(start.begin(), start.end()), 0.0});
    simplex[0].f = eval(simplex[0].x);
    if (!std::isfinite(simplex[0].f)) {
        result.x = simplex[0].x;
        result.value = simplex[0].f;
        result.best_history.push_back(simplex[0].f);
        return result;
    }
    for (std::size_t i = 0; i < n; ++i) {
        Vertex v{simplex[0].x, 0.0};
        v.x[i] += steps[i];
        v.f = eval(v.x);
        simplex.push_back(std::move(v));
    }

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    std::vector<double> centroid(n);
    auto along = [&](double t, const std::vector<double>& toward) {
        // centroid + t * (toward - centroid)
        std::vector<double> x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (toward[j] - centroid[j]);
        return x;
    };

    while (true) {
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        result.best_history.push_back(simplex.front().f);

        const double spread = simplex.back().f - simplex.front().f;
        double diameter = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i].x[j] - simplex[0].x[j]));
            }
        }
        if (spread < cfg.f_tol * (1.0 + std::abs(simplex.front().f)) && diameter < cfg.x_tol) {
            result.converged = true;
            break;
        }
        if (result.evaluations >= cfg.max_evaluations) break;
        ++result.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        Vertex& worst = simplex.back();
        const double f_best = simplex.front().f;
        const double f_second_worst = simplex[n - 1].f;

        std::vector<double> xr = along(-cfg.reflection, worst.x);
        const double fr = eval(xr);

        if (fr < f_best) {
            std::vector<double> xe = along(-cfg.reflection * cfg.expansion, worst.x);
            const double fe = eval(xe);
            if (fe < fr) {
                worst = {std::move(xe), fe};
            } else {
                worst = {std::move(xr), fr};
            }
            continue;
        }
        if (fr < f_second_worst) {
            worst = {std::move(xr), fr};
            continue;
        }

        bool contracted = false;
        if (fr < worst.f) {
            std::vector<double> xc = along(-cfg.reflection * cfg.contraction, worst.x);
            const double fc = eval(xc);
            if (fc <= fr) {
                worst = {std::move(xc), fc};
                contracted = true;
            }
        } else {
            std::vector<double> xc = along(cfg.contraction, worst.x);
            const double fc = eval(xc);
            if (fc < worst.f) {
                worst = {std::move(xc), fc};
                contracted = true;
            }
        }
        if (contracted) continue;

        const std::vector<double>& best = simplex.front().x;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i].x[j] = best[j] + cfg.shrink * (simplex[i].x[j] - best[j]);
            }
            simplex[i].f = eval(simplex[i].x);
        }
    }

    result.x = simplex.front().x;
    result.value = simplex.front().f;
    return result;
}

}  // namespace wirefit
