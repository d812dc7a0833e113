#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wirefit/dataset.hpp"
#include "wirefit/estimate.hpp"
#include "wirefit/fit.hpp"

namespace wirefit {

struct PipelineResult {
    EstimateBundle estimate;
    FitReport fit;
};

/// Estimate, then refine with Nelder-Mead against the pixel chi-square.
PipelineResult fit_image(const MfiImage& img, const BetaEstimator& estimator, const SimplexConfig& cfg = {});

struct EvalRow {
    std::size_t index = 0;
    std::string file;
    SegmentParams truth;
    bool ok = false;
    std::string error;
    std::optional<EstimateBundle> estimate;
    std::optional<FitReport> fit;
    double snr = std::numeric_limits<double>::quiet_NaN();
    double pitch = 0.0;
    double wall_seconds = 0.0;
};

struct ParamErrorStats {
    double median = 0.0;
    double p90 = 0.0;
};

struct SnrBucket {
    double snr_lo = 0.0;
    double snr_hi = 0.0;
    std::size_t count = 0;
    // Median |delta| / z0 of x0, y0, z0 (true z0).
    double x0 = 0.0;
    double y0 = 0.0;
    double z0 = 0.0;
};

struct BatchAggregates {
    std::size_t rows = 0;
    std::size_t failed = 0;
    double axis_accuracy = 0.0;  // over successful rows
    double sign_accuracy = 0.0;  // sign of the fitted current
    // Relative errors |fit - truth| / |truth| for z0, length, current; position
    // errors normalised by the true z0. Order: x0, y0, z0, length, current.
    std::array<ParamErrorStats, 5> fit_error{};
    std::array<ParamErrorStats, 5> estimate_error{};
    std::vector<SnrBucket> snr_quartiles;
};

struct BatchReport {
    std::vector<EvalRow> rows;
    BatchAggregates aggregates;
};

struct EvalOptions {
    std::size_t workers = 1;
    SimplexConfig simplex{};
    std::optional<double> fft_reference;  // optional constant column
};

/// Runs fit_image over every record; failures become failed rows. Rows are
/// ordered by record index regardless of worker scheduling.
BatchReport evaluate(const std::vector<ManifestRecord>& records, const std::filesystem::path& image_dir,
                     const BetaEstimator& estimator, const EvalOptions& opts = {});

BatchAggregates aggregate(const std::vector<EvalRow>& rows);

void write_report_tsv(const BatchReport& report, std::ostream& out, const EvalOptions& opts = {});
void write_summary(const BatchReport& report, std::ostream& out);

}  // namespace wirefit
