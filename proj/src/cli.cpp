#include "wirefit/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "wirefit/cnn.hpp"
#include "wirefit/dataset.hpp"
#include "wirefit/errors.hpp"
#include "wirefit/pipeline.hpp"
#include "wirefit/verify.hpp"

namespace wirefit::cli {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::unique_ptr<BetaEstimator> make_estimator(const std::string& beta_weights, const std::string& axis_weights) {
    if (beta_weights.empty()) {
        if (!axis_weights.empty()) throw InvalidArgument("--axis-weights requires --beta-weights");
        return std::make_unique<AnalyticBetaEstimator>();
    }
    std::optional<WeightFile> axis;
    if (!axis_weights.empty()) axis = load_weights(axis_weights);
    return std::make_unique<NeuralBetaEstimator>(load_weights(beta_weights), std::move(axis));
}

struct RangeOption {
    std::vector<double> values;

    void apply(Range& r) const {
        if (!values.empty()) r = {values[0], values[1]};
    }
};

void add_range(CLI::App* app, const std::string& name, RangeOption& opt, const std::string& help) {
    app->add_option(name, opt.values, help)->expected(2);
}

int cmd_generate(const DatasetSpec& spec, const std::string& out_dir, std::ostream& out) {
    const auto records = generate_dataset(spec, out_dir);
    out << "wrote " << records.size() << " images and " << kManifestName << " to " << out_dir << '\n';
    return 0;
}

int cmd_fit(const std::string& image_path, const std::string& beta_weights, const std::string& axis_weights,
            std::string prefix, std::size_t max_evals, std::ostream& out) {
    const MfiImage img = read_mfi(std::filesystem::path(image_path));
    const auto estimator = make_estimator(beta_weights, axis_weights);
    SimplexConfig cfg;
    cfg.max_evaluations = max_evals;
    const PipelineResult res = fit_image(img, *estimator, cfg);
    const SegmentParams& p = res.fit.params;
    const SegmentParams& e = res.estimate.params;

    out << "source\t" << to_string(res.estimate.source) << '\n';
    out << "axis\t" << to_string(p.axis) << '\n';
    out << "beta_estimate\t" << fmt(res.estimate.beta) << '\n';
    out << "pp_um\t" << fmt(res.estimate.pp) << '\n';
    out << "parameter\testimate\tfit\n";
    out << "x0_um\t" << fmt(e.x0) << '\t' << fmt(p.x0) << '\n';
    out << "y0_um\t" << fmt(e.y0) << '\t' << fmt(p.y0) << '\n';
    out << "z0_um\t" << fmt(e.z0) << '\t' << fmt(p.z0) << '\n';
    out << "length_um\t" << fmt(e.length) << '\t' << fmt(p.length) << '\n';
    out << "current_a\t" << fmt(e.current) << '\t' << fmt(p.current) << '\n';
    out << "chi2\t" << fmt(res.fit.chi2) << '\n';
    out << "iterations\t" << res.fit.iterations << '\n';
    out << "evaluations\t" << res.fit.evaluations << '\n';
    out << "converged\t" << (res.fit.converged ? "yes" : "no") << '\n';
    out << "snr\t" << (img.noise_sigma() > 0.0 ? fmt(snr(img)) : std::string("undefined")) << '\n';

    if (prefix.empty()) {
        const std::filesystem::path path(image_path);
        prefix = (path.parent_path() / path.stem()).string();
    }
    export_heatmap(render(p, img.frame()), prefix + "_model.pgm");
    export_heatmap(res.fit.residual, prefix + "_residual.pgm");
    out << "model_pgm\t" << prefix << "_model.pgm\n";
    out << "residual_pgm\t" << prefix << "_residual.pgm\n";
    return std::isfinite(res.fit.chi2) ? 0 : 1;
}

int cmd_evaluate(const std::string& manifest, const std::string& split, const std::string& beta_weights,
                 const std::string& axis_weights, const std::string& report_path, std::string summary_path,
                 const EvalOptions& opts, std::size_t limit, std::ostream& out) {
    const std::filesystem::path manifest_path(manifest);
    std::vector<ManifestRecord> records;
    for (ManifestRecord& r : read_manifest(manifest_path)) {
        if (split == "all" || to_string(r.split) == split) records.push_back(std::move(r));
    }
    if (limit > 0 && records.size() > limit) records.resize(limit);
    const auto estimator = make_estimator(beta_weights, axis_weights);
    const BatchReport report = evaluate(records, manifest_path.parent_path(), *estimator, opts);

    std::ofstream tsv(report_path);
    if (!tsv) throw Error("cannot write report " + report_path);
    write_report_tsv(report, tsv, opts);
    if (summary_path.empty()) summary_path = report_path + ".summary.tsv";
    std::ofstream summary(summary_path);
    if (!summary) throw Error("cannot write summary " + summary_path);
    write_summary(report, summary);
    write_summary(report, out);
    return 0;
}

int cmd_verify(std::ostream& out) {
    bool all = true;
    out << "check\tmeasured\ttolerance\tseconds\tresult\n";
    for (const CheckResult& c : run_self_checks()) {
        out << c.name << '\t' << fmt(c.measured) << '\t' << fmt(c.tolerance) << '\t' << fmt(c.seconds) << '\t'
            << (c.passed ? "PASS" : "FAIL") << '\n';
        all = all && c.passed;
    }
    return all ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Recover a current segment's position, depth, length and current from Bz images", "wirefit"};
    app.require_subcommand(1);

    // generate
    DatasetSpec spec;
    std::string gen_out;
    RangeOption z0_range, beta_range, current_range, snr_range;
    bool snr_linear = false;
    auto* gen = app.add_subcommand("generate", "Write a synthetic .mfi dataset and manifest");
    gen->add_option("--out,-o", gen_out, "Output directory")->required();
    gen->add_option("--seed", spec.seed, "Random seed");
    gen->add_option("--train", spec.train, "Training images");
    gen->add_option("--val", spec.val, "Validation images");
    gen->add_option("--test", spec.test, "Test images");
    gen->add_option("--size", spec.image_size, "Pixels per side");
    add_range(gen, "--z0", z0_range, "Depth range, um");
    add_range(gen, "--beta", beta_range, "length / depth range");
    add_range(gen, "--current", current_range, "|I| range, A");
    add_range(gen, "--snr", snr_range, "Target S/N range");
    gen->add_flag("--snr-linear", snr_linear, "Sample S/N uniformly instead of log-uniformly");
    gen->add_flag("--noiseless", spec.noiseless, "Do not add noise");

    // fit
    std::string fit_image_path, beta_weights, axis_weights, fit_prefix;
    std::size_t max_evals = SimplexConfig{}.max_evaluations;
    auto* fit = app.add_subcommand("fit", "Estimate and fit a single image");
    fit->add_option("image", fit_image_path, ".mfi image")->required();
    fit->add_option("--beta-weights", beta_weights, "Regression .mirw weights (omit for the analytic estimator)");
    fit->add_option("--axis-weights", axis_weights, "Classification .mirw weights");
    fit->add_option("--out-prefix", fit_prefix, "Prefix for the _model.pgm and _residual.pgm outputs");
    fit->add_option("--max-evals", max_evals, "Objective evaluation budget");

    // evaluate
    std::string manifest, split = "test", report_path, summary_path;
    EvalOptions opts;
    double fft_reference = 0.0;
    std::size_t limit = 0;
    auto* ev = app.add_subcommand("evaluate", "Fit every image of a manifest split and report errors");
    ev->add_option("manifest", manifest, "manifest.tsv")->required();
    ev->add_option("--split", split, "train | val | test | all");
    ev->add_option("--beta-weights", beta_weights, "Regression .mirw weights");
    ev->add_option("--axis-weights", axis_weights, "Classification .mirw weights");
    ev->add_option("--report", report_path, "Per-image TSV report")->required();
    ev->add_option("--summary", summary_path, "Aggregate TSV (default: <report>.summary.tsv)");
    ev->add_option("--workers,-j", opts.workers, "Worker threads");
    auto* fft_opt = ev->add_option("--fft-reference", fft_reference, "Constant reference column, e.g. an FFT resolution");
    ev->add_option("--limit", limit, "Evaluate at most N records");
    ev->add_option("--max-evals", opts.simplex.max_evaluations, "Objective evaluation budget per image");

    auto* verify = app.add_subcommand("verify", "Run the analytic self-checks");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (gen->parsed()) {
            z0_range.apply(spec.z0);
            beta_range.apply(spec.beta);
            current_range.apply(spec.current);
            snr_range.apply(spec.snr);
            spec.snr_log_uniform = !snr_linear;
            return cmd_generate(spec, gen_out, out);
        }
        if (fit->parsed()) {
            return cmd_fit(fit_image_path, beta_weights, axis_weights, fit_prefix, max_evals, out);
        }
        if (ev->parsed()) {
            if (fft_opt->count() > 0) opts.fft_reference = fft_reference;
            return cmd_evaluate(manifest, split, beta_weights, axis_weights, report_path, summary_path, opts,
                                limit, out);
        }
        if (verify->parsed()) return cmd_verify(out);
    } catch (const std::exception& e) {
        err << "wirefit: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace wirefit::cli
