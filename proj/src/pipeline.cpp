#include "wirefit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "wirefit/errors.hpp"

namespace wirefit {

PipelineResult fit_image(const MfiImage& img, const BetaEstimator& estimator, const SimplexConfig& cfg) {
    EstimateBundle est = initial_estimate(img, estimator);
    const Objective obj(img, est.params.axis);
    FitReport fit = minimize(obj, est.params, cfg);
    return {std::move(est), std::move(fit)};
}

namespace {

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// x0, y0 over true z0; z0, length, current relative.
std::array<double, 5> normalised_errors(const SegmentParams& got, const SegmentParams& truth) {
    return {std::abs(got.x0 - truth.x0) / truth.z0, std::abs(got.y0 - truth.y0) / truth.z0,
            std::abs(got.z0 - truth.z0) / truth.z0, std::abs(got.length - truth.length) / truth.length,
            std::abs(got.current - truth.current) / std::abs(truth.current)};
}

EvalRow run_one(const ManifestRecord& rec, std::size_t index, const std::filesystem::path& image_dir,
                const BetaEstimator& estimator, const SimplexConfig& cfg) {
    EvalRow row;
    row.index = index;
    row.file = rec.file;
    row.truth = rec.truth;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const MfiImage img = read_mfi(image_dir / rec.file);
        row.pitch = img.pitch();
        if (img.noise_sigma() > 0.0) row.snr = snr(img);
        PipelineResult res = fit_image(img, estimator, cfg);
        row.ok = std::isfinite(res.fit.chi2);
        if (!row.ok) row.error = "non-finite objective at the initial estimate";
        row.estimate = std::move(res.estimate);
        row.fit = std::move(res.fit);
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

BatchReport evaluate(const std::vector<ManifestRecord>& records, const std::filesystem::path& image_dir,
                     const BetaEstimator& estimator, const EvalOptions& opts) {
    BatchReport report;
    report.rows.resize(records.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            report.rows[i] = run_one(records[i], i, image_dir, estimator, opts.simplex);
        }
    };
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(opts.workers, records.size()));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    report.aggregates = aggregate(report.rows);
    return report;
}

BatchAggregates aggregate(const std::vector<EvalRow>& rows) {
    BatchAggregates agg;
    agg.rows = rows.size();
    std::array<std::vector<double>, 5> fit_err;
    std::array<std::vector<double>, 5> est_err;
    std::size_t axis_ok = 0;
    std::size_t sign_ok = 0;
    std::size_t good = 0;
    std::vector<std::pair<double, std::array<double, 5>>> by_snr;
    for (const EvalRow& r : rows) {
        if (!r.ok) {
            ++agg.failed;
            continue;
        }
        ++good;
        const SegmentParams& fit = r.fit->params;
        axis_ok += fit.axis == r.truth.axis;
        sign_ok += (fit.current > 0.0) == (r.truth.current > 0.0);
        const auto fe = normalised_errors(fit, r.truth);
        const auto ee = normalised_errors(r.estimate->params, r.truth);
        for (std::size_t k = 0; k < 5; ++k) {
            fit_err[k].push_back(fe[k]);
            est_err[k].push_back(ee[k]);
        }
        if (std::isfinite(r.snr)) by_snr.emplace_back(r.snr, fe);
    }
    if (good > 0) {
        agg.axis_accuracy = static_cast<double>(axis_ok) / static_cast<double>(good);
        agg.sign_accuracy = static_cast<double>(sign_ok) / static_cast<double>(good);
    }
    for (std::size_t k = 0; k < 5; ++k) {
        agg.fit_error[k] = {quantile(fit_err[k], 0.5), quantile(fit_err[k], 0.9)};
        agg.estimate_error[k] = {quantile(est_err[k], 0.5), quantile(est_err[k], 0.9)};
    }
    if (by_snr.size() >= 4) {
        std::sort(by_snr.begin(), by_snr.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t q = 0; q < 4; ++q) {
            const std::size_t lo = q * by_snr.size() / 4;
            const std::size_t hi = (q + 1) * by_snr.size() / 4;
            std::array<std::vector<double>, 3> e;
            for (std::size_t i = lo; i < hi; ++i) {
                for (std::size_t k = 0; k < 3; ++k) e[k].push_back(by_snr[i].second[k]);
            }
            agg.snr_quartiles.push_back({by_snr[lo].first, by_snr[hi - 1].first, hi - lo, quantile(e[0], 0.5),
                                         quantile(e[1], 0.5), quantile(e[2], 0.5)});
        }
    }
    return agg;
}

void write_report_tsv(const BatchReport& report, std::ostream& out, const EvalOptions& opts) {
    out << "index\tfile\tstatus\taxis_true\taxis_fit\tsource"
           "\tx0_true\ty0_true\tz0_true\tlength_true\tcurrent_true"
           "\tx0_est\ty0_est\tz0_est\tlength_est\tcurrent_est\tbeta_est"
           "\tx0_fit\ty0_fit\tz0_fit\tlength_fit\tcurrent_fit"
           "\tchi2\titerations\tevaluations\tconverged\tsnr\tpitch_um"
           "\tdx0_um\tdy0_um\tdz0_um\tdx0_over_z0\tdy0_over_z0\tdz0_over_z0\twall_s";
    if (opts.fft_reference) out << "\tfft_reference";
    out << '\n';
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const EvalRow& r : report.rows) {
        const SegmentParams& t = r.truth;
        out << r.index << '\t' << r.file << '\t' << (r.ok ? "ok" : "failed") << '\t' << to_string(t.axis) << '\t'
            << (r.fit ? std::string(to_string(r.fit->params.axis)) : "-") << '\t'
            << (r.estimate ? std::string(to_string(r.estimate->source)) : "-");
        for (double v : {t.x0, t.y0, t.z0, t.length, t.current}) out << '\t' << fmt(v);
        if (r.estimate) {
            const SegmentParams& e = r.estimate->params;
            for (double v : {e.x0, e.y0, e.z0, e.length, e.current, r.estimate->beta}) out << '\t' << fmt(v);
        } else {
            for (int i = 0; i < 6; ++i) out << "\tnan";
        }
        if (r.fit) {
            const SegmentParams& f = r.fit->params;
            for (double v : {f.x0, f.y0, f.z0, f.length, f.current, r.fit->chi2}) out << '\t' << fmt(v);
            out << '\t' << r.fit->iterations << '\t' << r.fit->evaluations << '\t' << (r.fit->converged ? 1 : 0);
        } else {
            for (int i = 0; i < 6; ++i) out << "\tnan";
            out << "\t0\t0\t0";
        }
        out << '\t' << fmt(r.snr) << '\t' << fmt(r.pitch);
        const double dx = r.fit ? r.fit->params.x0 - t.x0 : nan;
        const double dy = r.fit ? r.fit->params.y0 - t.y0 : nan;
        const double dz = r.fit ? r.fit->params.z0 - t.z0 : nan;
        for (double v : {dx, dy, dz, dx / t.z0, dy / t.z0, dz / t.z0, r.wall_seconds}) out << '\t' << fmt(v);
        if (opts.fft_reference) out << '\t' << fmt(*opts.fft_reference);
        out << '\n';
    }
}

void write_summary(const BatchReport& report, std::ostream& out) {
    const BatchAggregates& a = report.aggregates;
    static constexpr const char* kNames[5] = {"x0/z0", "y0/z0", "z0", "length", "current"};
    out << "rows\t" << a.rows << '\n';
    out << "failed\t" << a.failed << '\n';
    out << "axis_accuracy\t" << fmt(a.axis_accuracy) << '\n';
    out << "sign_accuracy\t" << fmt(a.sign_accuracy) << '\n';
    out << "parameter\testimate_median\testimate_p90\tfit_median\tfit_p90\n";
    for (std::size_t k = 0; k < 5; ++k) {
        out << kNames[k] << '\t' << fmt(a.estimate_error[k].median) << '\t' << fmt(a.estimate_error[k].p90) << '\t'
            << fmt(a.fit_error[k].median) << '\t' << fmt(a.fit_error[k].p90) << '\n';
    }
    out << "snr_quartile\tsnr_lo\tsnr_hi\tcount\tmedian_dx0_over_z0\tmedian_dy0_over_z0\tmedian_dz0_over_z0\n";
    for (std::size_t q = 0; q < a.snr_quartiles.size(); ++q) {
        const SnrBucket& b = a.snr_quartiles[q];
        out << 'Q' << q + 1 << '\t' << fmt(b.snr_lo) << '\t' << fmt(b.snr_hi) << '\t' << b.count << '\t' << fmt(b.x0)
            << '\t' << fmt(b.y0) << '\t' << fmt(b.z0) << '\n';
    }
}

}  // namespace wirefit
