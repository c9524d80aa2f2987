#pragma once

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "fallrisk/io.hpp"
#include "fallrisk/svg.hpp"
#include "fallrisk/synth.hpp"

namespace fallrisk::cli {

namespace fs = std::filesystem;

// exit codes: 0 ok, 2 validation, 3 solver non-convergence, 4 I/O
inline constexpr int kOk = 0;
inline constexpr int kValidationExit = 2;
inline constexpr int kNonConvergenceExit = 3;
inline constexpr int kIoExit = 4;

class NonConvergenceError : public std::runtime_error {
public:
    explicit NonConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void print_error(const std::string& code, const std::string& message) {
    json j;
    j["error"] = {{"code", code}, {"message", message}};
    std::fprintf(stderr, "%s\n", j.dump().c_str());
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::size_t n = 20000;
    std::uint64_t seed = 1;
    std::string out;
};

inline void cmd_synth(const SynthArgs& a) {
    SynthConfig config;
    config.n_encounters = a.n;
    config.seed = a.seed;
    fs::create_directories(a.out);
    auto result = generate(config);
    write_encounters_jsonl(fs::path(a.out) / "cohort.jsonl", result.encounters);
    write_truth_csv(fs::path(a.out) / "truth.csv", result.encounters, result.latent_risk);
    write_manifest(a.out, "synth",
                   {{"n", a.n}, {"seed", a.seed}}, {},
                   {"cohort.jsonl", "truth.csv"});
}

// ---------------------------------------------------------------------------

struct LabelArgs {
    std::string in;
    std::string out;
    int high_threshold = 6;
    int low_max = 1;
    int window_days = 3;
    long long stretch_num = 1;
    long long stretch_den = 2;
    bool edge_doubling = true;
};

inline LabelingPolicy policy_from(const LabelArgs& a) {
    LabelingPolicy p;
    p.high_min_per_window = a.high_threshold;
    p.low_max_per_window = a.low_max;
    p.window_days = a.window_days;
    p.stretch_fraction = {a.stretch_num, a.stretch_den};
    p.edge_doubling = a.edge_doubling;
    p.validate();
    return p;
}

inline void cmd_label(const LabelArgs& a) {
    auto encounters = read_encounters_jsonl(a.in);
    if (encounters.empty()) throw ValidationError("input contains no encounters: " + a.in);
    const auto policy = policy_from(a);
    Cohort cohort = build_cohort(encounters, policy);
    fs::create_directories(a.out);
    write_labeled_jsonl(fs::path(a.out) / "labeled.jsonl", cohort.encounters);
    write_tally_csv(fs::path(a.out) / "exclusions.csv", cohort.exclusion_tally);

    const auto diag = intervention_score_diagnostic(cohort.encounters);
    json summary;
    summary["counts"] = {{"low", cohort.low_count},
                         {"high", cohort.high_count},
                         {"indeterminate", cohort.indeterminate_count},
                         {"native_high", cohort.native_high_count},
                         {"promoted", cohort.promoted_count}};
    summary["exclusions"] = cohort.exclusion_tally;
    summary["matching"] = {{"fall_high_encounters", cohort.matching.matches.size()},
                           {"skipped_without_window", cohort.matching.skipped_fall_ids.size()},
                           {"promoted_encounters", cohort.promoted_count}};
    summary["spearman_score_vs_total_targeted"] = diag.spearman_score_vs_total_targeted;
    summary["spearman_score_vs_daily_mean_targeted"] =
        diag.spearman_score_vs_daily_mean_targeted;
    summary["policy"] = {{"high_min_per_window", policy.high_min_per_window},
                         {"low_max_per_window", policy.low_max_per_window},
                         {"window_days", policy.window_days},
                         {"stretch_fraction",
                          std::to_string(policy.stretch_fraction.num) + "/" +
                              std::to_string(policy.stretch_fraction.den)},
                         {"edge_doubling", policy.edge_doubling}};
    atomic_write_file(fs::path(a.out) / "cohort_summary.json", summary.dump(2) + "\n");
    write_manifest(a.out, "label",
                   {{"in", a.in},
                    {"high_threshold", a.high_threshold},
                    {"low_max", a.low_max},
                    {"window_days", a.window_days},
                    {"edge_doubling", a.edge_doubling}},
                   {a.in}, {"labeled.jsonl", "exclusions.csv", "cohort_summary.json"});
}

// ---------------------------------------------------------------------------

struct FeaturesArgs {
    std::string in;
    std::string out;
    bool augmented = true;
};

inline void cmd_features(const FeaturesArgs& a) {
    auto labeled = read_labeled_jsonl(a.in);
    if (labeled.empty()) throw ValidationError("input contains no labeled encounters: " + a.in);
    auto features = build_all_features(labeled, a.augmented);
    fs::create_directories(a.out);
    write_features_csv(fs::path(a.out) / "features.csv", features);
    json dict = dictionary_to_json(features.dictionary);
    dict["hash"] = dictionary_hash(features.dictionary);
    atomic_write_file(fs::path(a.out) / "dictionary.json", dict.dump(2) + "\n");
    write_manifest(a.out, "features", {{"in", a.in}, {"augmented", a.augmented}}, {a.in},
                   {"features.csv", "dictionary.json"});
}

inline FeatureDictionary load_dictionary(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& ex) {
        throw ValidationError("dictionary " + path + ": invalid JSON: " + ex.what());
    }
    return dictionary_from_json(j);
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string features;
    std::string dictionary;
    std::string out;
    double lambda = 0.5;
    double tol = 1e-8;
    long max_iter = 1000000;
};

inline void cmd_fit(const FitArgs& a) {
    auto dict = load_dictionary(a.dictionary);
    auto features = read_features_csv(a.features, dict);
    auto train = features.training_matrix();
    if (train.X.rows() == 0) throw ValidationError("no binary-labeled rows in " + a.features);

    FitConfig config;
    config.lambda = a.lambda;
    config.tol = a.tol;
    config.max_iter = a.max_iter;
    auto model = fit(train.X, train.y, ConstraintSet::default_chains(dict), config, dict);
    if (!model.fit.converged)
        throw NonConvergenceError("fit stopped by " + model.fit.stop_reason + " after " +
                                  std::to_string(model.fit.iterations) + " iterations");

    fs::create_directories(a.out);
    atomic_write_file(fs::path(a.out) / "model.json", model_to_json(model).dump(2) + "\n");
    write_manifest(a.out, "fit",
                   {{"features", a.features},
                    {"dictionary", a.dictionary},
                    {"lambda", a.lambda},
                    {"tol", a.tol},
                    {"max_iter", a.max_iter}},
                   {a.features, a.dictionary}, {"model.json"});
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string features;
    std::string dictionary;
    std::string out;
    int folds = 5;
    std::uint64_t seed = 1;
    double lambda = 0.5;
};

inline json concordance_to_json(const ConcordanceTable& t) {
    static constexpr const char* strata[2] = {"non_fall", "fall"};
    static constexpr const char* labels[3] = {"low", "high", "unknown"};
    json j;
    for (int s = 0; s < 2; ++s)
        for (int l = 0; l < 3; ++l) {
            const auto& row = t.rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)];
            j[strata[s]][labels[l]] = {{"counts", row.counts}, {"pct", row.pct},
                                       {"total", row.total}};
        }
    return j;
}

inline json summary_to_json(const MetricSummary& m) {
    return {{"per_fold", m.per_fold}, {"mean", m.mean}, {"sd", m.sd}, {"pooled", m.pooled}};
}

inline void cmd_eval(const EvalArgs& a) {
    auto dict = load_dictionary(a.dictionary);
    auto features = read_features_csv(a.features, dict);
    FitConfig config;
    config.lambda = a.lambda;
    auto rep = cross_validate(features, ConstraintSet::default_chains(dict), config, a.folds,
                              a.seed);
    if (!rep.full_model.fit.converged)
        throw NonConvergenceError("full-data fit stopped by " + rep.full_model.fit.stop_reason);

    fs::create_directories(a.out);

    json metrics;
    metrics["folds"] = a.folds;
    metrics["seed"] = a.seed;
    metrics["lambda"] = a.lambda;
    metrics["thresholds"] = {config.t_low, config.t_high};
    metrics["auc_roc"] = {{"fitted", summary_to_json(rep.auc_roc_fitted)},
                          {"baseline", summary_to_json(rep.auc_roc_baseline)}};
    metrics["auc_pr"] = {{"fitted", summary_to_json(rep.auc_pr_fitted)},
                         {"baseline", summary_to_json(rep.auc_pr_baseline)}};
    metrics["confusion"] = {
        {"t_low",
         {{"fitted", {{"tpr", rep.conf_low_fitted.tpr}, {"fpr", rep.conf_low_fitted.fpr}}},
          {"baseline",
           {{"tpr", rep.conf_low_baseline.tpr}, {"fpr", rep.conf_low_baseline.fpr}}}}},
        {"t_high",
         {{"fitted", {{"tpr", rep.conf_high_fitted.tpr}, {"fpr", rep.conf_high_fitted.fpr}}},
          {"baseline",
           {{"tpr", rep.conf_high_baseline.tpr}, {"fpr", rep.conf_high_baseline.fpr}}}}}};
    metrics["concordance"] = {{"fitted", concordance_to_json(rep.concordance_fitted)},
                              {"baseline", concordance_to_json(rep.concordance_baseline)}};
    metrics["score_differential"] = {{"mean", rep.differential.mean},
                                     {"share_within_2", rep.differential.share_within_2},
                                     {"share_within_5", rep.differential.share_within_5}};
    json stability = json::array();
    for (const auto& s : rep.stability)
        stability.push_back({{"feature", s.name},
                             {"share_mean", s.share_mean},
                             {"share_min", s.share_min},
                             {"share_max", s.share_max},
                             {"share_sd", s.share_sd}});
    metrics["stability"] = std::move(stability);
    json coef_full;
    for (Eigen::Index j = 0; j < rep.full_model.beta.size(); ++j)
        coef_full[dict.features[static_cast<std::size_t>(j)].name] = rep.full_model.beta(j);
    json coef_folds = json::array();
    for (const auto& beta : rep.fold_betas) {
        json c;
        for (Eigen::Index j = 0; j < beta.size(); ++j)
            c[dict.features[static_cast<std::size_t>(j)].name] = beta(j);
        coef_folds.push_back(std::move(c));
    }
    metrics["coefficients"] = {{"full", std::move(coef_full)},
                               {"per_fold", std::move(coef_folds)}};
    metrics["fit"] = {{"converged", rep.full_model.fit.converged},
                      {"iterations", rep.full_model.fit.iterations},
                      {"objective", rep.full_model.fit.objective},
                      {"stop_reason", rep.full_model.fit.stop_reason},
                      {"kkt", kkt_to_json(rep.full_model.fit.kkt)},
                      {"near_singular_warning", rep.full_model.fit.near_singular_warning}};
    atomic_write_file(fs::path(a.out) / "metrics.json", metrics.dump(2) + "\n");

    // pooled out-of-fold curves for the report renderer
    {
        std::string buf = "model,kind,x,y\n";
        auto add = [&](const char* model, const char* kind, const std::vector<CurvePoint>& pts) {
            for (const auto& p : pts) {
                buf += model;
                buf += ',';
                buf += kind;
                buf += ',';
                buf += format_double(p.x);
                buf += ',';
                buf += format_double(p.y);
                buf += '\n';
            }
        };
        add("fitted", "roc", roc_curve(rep.pooled_fitted, rep.y_binary));
        add("baseline", "roc", roc_curve(rep.pooled_baseline, rep.y_binary));
        add("fitted", "pr", pr_curve(rep.pooled_fitted, rep.y_binary));
        add("baseline", "pr", pr_curve(rep.pooled_baseline, rep.y_binary));
        atomic_write_file(fs::path(a.out) / "curves.csv", buf);
    }
    {
        std::string buf = "id,baseline_score,fitted_score,delta\n";
        for (Eigen::Index i = 0; i < features.X.rows(); ++i) {
            double sb = features.X.row(i).dot(rep.baseline_model.beta);
            double sf = features.X.row(i).dot(rep.full_model.beta);
            buf += rep.all_ids[static_cast<std::size_t>(i)];
            buf += ',';
            buf += format_double(sb);
            buf += ',';
            buf += format_double(sf);
            buf += ',';
            buf += format_double(rep.differential.deltas[static_cast<std::size_t>(i)]);
            buf += '\n';
        }
        atomic_write_file(fs::path(a.out) / "differentials.csv", buf);
    }
    {
        std::string buf = "feature";
        for (int f = 0; f < a.folds; ++f) buf += ",fold" + std::to_string(f);
        buf += ",full\n";
        for (int j = 0; j < dict.size(); ++j) {
            buf += dict.features[static_cast<std::size_t>(j)].name;
            for (const auto& beta : rep.fold_betas) {
                buf += ',';
                buf += format_double(beta(j));
            }
            buf += ',';
            buf += format_double(rep.full_model.beta(j));
            buf += '\n';
        }
        atomic_write_file(fs::path(a.out) / "fold_coefficients.csv", buf);
    }
    {
        static constexpr const char* strata[2] = {"non_fall", "fall"};
        static constexpr const char* labels[3] = {"low", "high", "unknown"};
        std::string buf =
            "model,stratum,label,predicted_low,predicted_moderate,predicted_high,"
            "pct_low,pct_moderate,pct_high\n";
        auto add = [&](const char* model, const ConcordanceTable& t) {
            for (int s = 0; s < 2; ++s)
                for (int l = 0; l < 3; ++l) {
                    const auto& row =
                        t.rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)];
                    buf += model;
                    buf += ',';
                    buf += strata[s];
                    buf += ',';
                    buf += labels[l];
                    for (auto c : row.counts) buf += "," + std::to_string(c);
                    for (auto p : row.pct) buf += "," + format_double(p);
                    buf += '\n';
                }
        };
        add("fitted", rep.concordance_fitted);
        add("baseline", rep.concordance_baseline);
        atomic_write_file(fs::path(a.out) / "concordance.csv", buf);
    }
    {
        std::string buf = "feature,share_mean,share_min,share_max,share_sd\n";
        for (const auto& s : rep.stability) {
            buf += s.name;
            buf += ',' + format_double(s.share_mean);
            buf += ',' + format_double(s.share_min);
            buf += ',' + format_double(s.share_max);
            buf += ',' + format_double(s.share_sd);
            buf += '\n';
        }
        atomic_write_file(fs::path(a.out) / "stability.csv", buf);
    }
    {
        std::vector<ScoredEncounter> scored;
        for (Eigen::Index i = 0; i < features.X.rows(); ++i)
            scored.push_back(score(rep.full_model, features.X.row(i),
                                   rep.all_ids[static_cast<std::size_t>(i)]));
        write_scored_csv(fs::path(a.out) / "scored.csv", scored);
    }
    write_manifest(a.out, "eval",
                   {{"features", a.features},
                    {"dictionary", a.dictionary},
                    {"folds", a.folds},
                    {"seed", a.seed},
                    {"lambda", a.lambda}},
                   {a.features, a.dictionary},
                   {"metrics.json", "curves.csv", "differentials.csv", "fold_coefficients.csv",
                    "concordance.csv", "stability.csv", "scored.csv"});
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    std::string in;
    std::string out;
    int min_threshold = 4;
    int max_threshold = 8;
    double lambda = 0.5;
    bool augmented = true;
};

inline void cmd_sweep(const SweepArgs& a) {
    if (a.min_threshold > a.max_threshold)
        throw ValidationError("sweep: min threshold exceeds max threshold");
    auto encounters = read_encounters_jsonl(a.in);
    if (encounters.empty()) throw ValidationError("input contains no encounters: " + a.in);
    std::vector<int> thresholds;
    for (int t = a.min_threshold; t <= a.max_threshold; ++t) thresholds.push_back(t);
    FitConfig config;
    config.lambda = a.lambda;
    auto sweep = sensitivity_sweep(encounters, thresholds, LabelingPolicy{}, a.augmented, config);

    fs::create_directories(a.out);
    json j;
    j["thresholds"] = thresholds;
    json points = json::array();
    for (const auto& p : sweep.points) {
        json shares;
        for (int col = 0; col < sweep.dictionary.size(); ++col)
            shares[sweep.dictionary.features[static_cast<std::size_t>(col)].name] =
                p.importance_share[static_cast<std::size_t>(col)];
        points.push_back({{"threshold", p.high_threshold},
                          {"low", p.low_count},
                          {"high", p.high_count},
                          {"indeterminate", p.indeterminate_count},
                          {"importance_share", std::move(shares)}});
    }
    j["points"] = std::move(points);
    json stability = json::array();
    for (const auto& s : sweep.stability)
        stability.push_back({{"feature", s.name},
                             {"share_mean", s.share_mean},
                             {"share_min", s.share_min},
                             {"share_max", s.share_max},
                             {"share_sd", s.share_sd}});
    j["stability"] = std::move(stability);
    atomic_write_file(fs::path(a.out) / "sweep.json", j.dump(2) + "\n");

    std::string buf = "threshold,low,high,indeterminate\n";
    for (const auto& p : sweep.points)
        buf += std::to_string(p.high_threshold) + ',' + std::to_string(p.low_count) + ',' +
               std::to_string(p.high_count) + ',' + std::to_string(p.indeterminate_count) +
               '\n';
    atomic_write_file(fs::path(a.out) / "sweep.csv", buf);
    write_manifest(a.out, "sweep",
                   {{"in", a.in},
                    {"min_threshold", a.min_threshold},
                    {"max_threshold", a.max_threshold},
                    {"lambda", a.lambda},
                    {"augmented", a.augmented}},
                   {a.in}, {"sweep.json", "sweep.csv"});
}

// ---------------------------------------------------------------------------

struct ReportArgs {
    std::string eval_dir;
    std::string label_dir;  // optional
    std::string out;
};

inline void cmd_report(const ReportArgs& a) {
    json metrics;
    try {
        metrics = json::parse(read_file(fs::path(a.eval_dir) / "metrics.json"));
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("metrics.json: invalid JSON: ") + ex.what());
    }

    // curves.csv -> per-series point lists
    std::map<std::string, std::vector<CurvePoint>> series;
    {
        std::istringstream in(read_file(fs::path(a.eval_dir) / "curves.csv"));
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string model, kind, xs, ys;
            std::getline(ls, model, ',');
            std::getline(ls, kind, ',');
            std::getline(ls, xs, ',');
            std::getline(ls, ys, ',');
            series[model + "/" + kind].push_back({std::stod(xs), std::stod(ys)});
        }
    }
    std::vector<double> deltas;
    {
        std::istringstream in(read_file(fs::path(a.eval_dir) / "differentials.csv"));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto pos = line.rfind(',');
            deltas.push_back(std::stod(line.substr(pos + 1)));
        }
    }

    fs::create_directories(a.out);
    auto label_series = [&](const char* kind) {
        std::vector<SvgSeries> out;
        char text[64];
        double fitted = metrics[kind == std::string("roc") ? "auc_roc" : "auc_pr"]["fitted"]
                            ["pooled"].get<double>();
        double base = metrics[kind == std::string("roc") ? "auc_roc" : "auc_pr"]["baseline"]
                          ["pooled"].get<double>();
        std::snprintf(text, sizeof(text), "fitted (%.3f)", fitted);
        out.push_back({text, series["fitted/" + std::string(kind)], "#1f6fb2"});
        std::snprintf(text, sizeof(text), "baseline (%.3f)", base);
        out.push_back({text, series["baseline/" + std::string(kind)], "#c0392b"});
        return out;
    };
    atomic_write_file(fs::path(a.out) / "roc.svg",
                      line_chart_svg("ROC (pooled out-of-fold)", "false positive rate",
                                     "true positive rate", label_series("roc"), true));
    atomic_write_file(fs::path(a.out) / "pr.svg",
                      line_chart_svg("Precision-Recall (pooled out-of-fold)", "recall",
                                     "precision", label_series("pr"), false));
    atomic_write_file(fs::path(a.out) / "score_differentials.svg",
                      histogram_svg("Score differentials (fitted - baseline)", "delta", deltas));

    for (const char* table : {"concordance.csv", "stability.csv", "fold_coefficients.csv"})
        atomic_write_file(fs::path(a.out) / table, read_file(fs::path(a.eval_dir) / table));

    json summary;
    summary["metrics"] = std::move(metrics);
    if (!a.label_dir.empty()) {
        try {
            summary["cohort"] = json::parse(read_file(fs::path(a.label_dir) /
                                                      "cohort_summary.json"));
        } catch (const json::exception& ex) {
            throw ValidationError(std::string("cohort_summary.json: invalid JSON: ") + ex.what());
        }
    }
    summary["tool_version"] = kVersion;
    atomic_write_file(fs::path(a.out) / "summary.json", summary.dump(2) + "\n");
    write_manifest(a.out, "report", {{"eval", a.eval_dir}, {"label", a.label_dir}},
                   {a.eval_dir, a.label_dir},
                   {"roc.svg", "pr.svg", "score_differentials.svg", "summary.json",
                    "concordance.csv", "stability.csv", "fold_coefficients.csv"});
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
    CLI::App app{"additive fall-risk score toolkit: synthesize, label, featurize, fit, "
                 "evaluate, sweep, report"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort");
    synth_cmd->add_option("--n", synth_args.n, "number of encounters")->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.seed, "random seed")->capture_default_str();
    synth_cmd->add_option("--out", synth_args.out, "output directory")->required();

    LabelArgs label_args;
    auto* label_cmd = app.add_subcommand("label", "apply exclusions and risk labeling");
    label_cmd->add_option("--in", label_args.in, "encounters JSONL")->required();
    label_cmd->add_option("--out", label_args.out, "output directory")->required();
    label_cmd->add_option("--high-threshold", label_args.high_threshold,
                          "min targeted interventions per window for high risk")
        ->capture_default_str();
    label_cmd->add_option("--low-max", label_args.low_max,
                          "max targeted interventions per window for low risk")
        ->capture_default_str();
    label_cmd->add_option("--window-days", label_args.window_days, "window length in days")
        ->capture_default_str();
    label_cmd->add_flag("--edge-doubling,!--no-edge-doubling", label_args.edge_doubling,
                        "count first and last day twice");

    FeaturesArgs features_args;
    auto* features_cmd = app.add_subcommand("features", "build the feature matrix");
    features_cmd->add_option("--in", features_args.in, "labeled JSONL")->required();
    features_cmd->add_option("--out", features_args.out, "output directory")->required();
    features_cmd->add_flag("--augmented,!--no-augmented", features_args.augmented,
                           "include EHR indicator columns");

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit the constrained score model");
    fit_cmd->add_option("--features", fit_args.features, "features CSV")->required();
    fit_cmd->add_option("--dictionary", fit_args.dictionary, "dictionary JSON")->required();
    fit_cmd->add_option("--out", fit_args.out, "output directory")->required();
    fit_cmd->add_option("--lambda", fit_args.lambda, "low-threshold objective weight")
        ->capture_default_str();
    fit_cmd->add_option("--tol", fit_args.tol, "convergence tolerance")->capture_default_str();
    fit_cmd->add_option("--max-iter", fit_args.max_iter, "iteration cap")->capture_default_str();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "cross-validated evaluation");
    eval_cmd->add_option("--features", eval_args.features, "features CSV")->required();
    eval_cmd->add_option("--dictionary", eval_args.dictionary, "dictionary JSON")->required();
    eval_cmd->add_option("--out", eval_args.out, "output directory")->required();
    eval_cmd->add_option("--folds", eval_args.folds, "cross-validation folds")
        ->capture_default_str();
    eval_cmd->add_option("--seed", eval_args.seed, "fold-assignment seed")
        ->capture_default_str();
    eval_cmd->add_option("--lambda", eval_args.lambda, "low-threshold objective weight")
        ->capture_default_str();

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "labeling-threshold sensitivity sweep");
    sweep_cmd->add_option("--in", sweep_args.in, "encounters JSONL")->required();
    sweep_cmd->add_option("--out", sweep_args.out, "output directory")->required();
    sweep_cmd->add_option("--min-threshold", sweep_args.min_threshold, "first high threshold")
        ->capture_default_str();
    sweep_cmd->add_option("--max-threshold", sweep_args.max_threshold, "last high threshold")
        ->capture_default_str();
    sweep_cmd->add_option("--lambda", sweep_args.lambda, "low-threshold objective weight")
        ->capture_default_str();
    sweep_cmd->add_flag("--augmented,!--no-augmented", sweep_args.augmented,
                        "include EHR indicator columns");

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "render curves and the summary");
    report_cmd->add_option("--eval", report_args.eval_dir, "eval output directory")->required();
    report_cmd->add_option("--label", report_args.label_dir, "label output directory");
    report_cmd->add_option("--out", report_args.out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kOk;
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return kValidationExit;
    }

    try {
        if (synth_cmd->parsed()) cmd_synth(synth_args);
        else if (label_cmd->parsed()) cmd_label(label_args);
        else if (features_cmd->parsed()) cmd_features(features_args);
        else if (fit_cmd->parsed()) cmd_fit(fit_args);
        else if (eval_cmd->parsed()) cmd_eval(eval_args);
        else if (sweep_cmd->parsed()) cmd_sweep(sweep_args);
        else if (report_cmd->parsed()) cmd_report(report_args);
    } catch (const ValidationError& ex) {
        print_error("validation", ex.what());
        return kValidationExit;
    } catch (const NonConvergenceError& ex) {
        print_error("non_convergence", ex.what());
        return kNonConvergenceExit;
    } catch (const IoError& ex) {
        print_error("io", ex.what());
        return kIoExit;
    }
    return kOk;
}

}  // namespace fallrisk::cli
