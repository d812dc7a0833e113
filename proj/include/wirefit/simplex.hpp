#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace wirefit {

struct SimplexConfig {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    // Stop when (f_max - f_min) < f_tol * (1 + |f_min|) and the simplex
    // diameter (max-norm distance of any vertex from the best) < x_tol.
    double f_tol = 1e-8;
    double x_tol = 1e-6;
    std::size_t max_evaluations = 5000;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    // Best value after each iteration (index 0 is the initial simplex).
    std::vector<double> best_history;
    // Best value seen after each objective evaluation.
    std::vector<double> best_by_evaluation;
};

using ObjectiveFn = std::function<double(std::span<const double>)>;

/// Derivative-free Nelder-Mead minimisation.
///
/// The initial simplex is `start` plus one vertex per coordinate, offset by
/// `steps[i]` along that coordinate. Non-finite objective values are treated
/// as +inf, so the simplex moves away from them; a non-finite value at
/// `start` ends the run immediately with converged = false.
SimplexResult nelder_mead(const ObjectiveFn& f, std::span<const double> start,
                          std::span<const double> steps, const SimplexConfig& cfg = {});

}  // namespace wirefit
