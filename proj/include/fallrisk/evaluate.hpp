#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "fallrisk/cohort.hpp"
#include "fallrisk/features.hpp"
#include "fallrisk/rng.hpp"
#include "fallrisk/scoring.hpp"
#include "fallrisk/solver.hpp"

namespace fallrisk {

/// Deterministic stratified fold assignment: each class is shuffled under
/// the seed and dealt into one continuing round-robin, so per-class fold
/// counts differ by at most one and so do total fold sizes.
inline std::vector<int> stratified_kfold(const Eigen::VectorXd& y, int k, std::uint64_t seed) {
    const auto n = y.size();
    if (k < 2) throw ValidationError("stratified_kfold: k must be >= 2");
    if (n < k) throw ValidationError("stratified_kfold: fewer rows than folds");
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (Eigen::Index i = 0; i < n; ++i)
        (y(i) > 0.5 ? pos : neg).push_back(static_cast<std::size_t>(i));

    std::mt19937_64 rng(seed);
    deterministic_shuffle(pos, rng);
    deterministic_shuffle(neg, rng);

    std::vector<int> fold(static_cast<std::size_t>(n), 0);
    int next = 0;
    for (auto i : pos) {
        fold[i] = next;
        next = (next + 1) % k;
    }
    for (auto i : neg) {
        fold[i] = next;
        next = (next + 1) % k;
    }
    return fold;
}

namespace detail {

/// Midranks (1-based); ties share the average of their positions.
inline std::vector<double> midranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = r;
        i = j + 1;
    }
    return rank;
}

inline void check_binary_classes(const std::vector<int>& y, std::size_t& n1, std::size_t& n0) {
    n1 = 0;
    for (int v : y) n1 += static_cast<std::size_t>(v != 0);
    n0 = y.size() - n1;
    if (n1 == 0 || n0 == 0)
        throw ValidationError("metric requires both classes present");
}

}  // namespace detail

/// Mann-Whitney AUC with midrank tie correction:
/// P(score+ > score-) + P(tie)/2.
inline double auc_roc(const std::vector<double>& scores, const std::vector<int>& y) {
    if (scores.size() != y.size()) throw ValidationError("auc_roc: size mismatch");
    std::size_t n1 = 0;
    std::size_t n0 = 0;
    detail::check_binary_classes(y, n1, n0);
    auto rank = detail::midranks(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] != 0) rank_sum += rank[i];
    double u = rank_sum - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
    return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

/// Average precision: the step-wise integral of the precision-recall curve,
/// advancing over blocks of tied scores.
inline double auc_pr(const std::vector<double>& scores, const std::vector<int>& y) {
    if (scores.size() != y.size()) throw ValidationError("auc_pr: size mismatch");
    std::size_t n1 = 0;
    std::size_t n0 = 0;
    detail::check_binary_classes(y, n1, n0);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double ap = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        std::size_t block_tp = 0;
        for (std::size_t t = i; t <= j; ++t) block_tp += static_cast<std::size_t>(y[order[t]] != 0);
        std::size_t prev_tp = tp;
        tp += block_tp;
        fp += (j - i + 1) - block_tp;
        double recall_step = static_cast<double>(tp - prev_tp) / static_cast<double>(n1);
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += recall_step * precision;
        i = j + 1;
    }
    return ap;
}

struct CurvePoint {
    double x = 0.0;  // fpr (roc) or recall (pr)
    double y = 0.0;  // tpr (roc) or precision (pr)
};

inline std::vector<CurvePoint> roc_curve(const std::vector<double>& scores,
                                         const std::vector<int>& y) {
    std::size_t n1 = 0;
    std::size_t n0 = 0;
    detail::check_binary_classes(y, n1, n0);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<CurvePoint> pts{{0.0, 0.0}};
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t <= j; ++t)
            (y[order[t]] != 0 ? tp : fp) += 1;
        pts.push_back({static_cast<double>(fp) / static_cast<double>(n0),
                       static_cast<double>(tp) / static_cast<double>(n1)});
        i = j + 1;
    }
    return pts;
}

inline std::vector<CurvePoint> pr_curve(const std::vector<double>& scores,
                                        const std::vector<int>& y) {
    std::size_t n1 = 0;
    std::size_t n0 = 0;
    detail::check_binary_classes(y, n1, n0);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<CurvePoint> pts;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t <= j; ++t)
            (y[order[t]] != 0 ? tp : fp) += 1;
        pts.push_back({static_cast<double>(tp) / static_cast<double>(n1),
                       static_cast<double>(tp) / static_cast<double>(tp + fp)});
        i = j + 1;
    }
    return pts;
}

struct Confusion {
    double tpr = 0.0;
    double fpr = 0.0;
};

/// Positive prediction is score > T, or score >= T when `inclusive` —
/// the non-low band convention used for the lower category threshold.
inline Confusion threshold_confusion(const std::vector<double>& scores,
                                     const std::vector<int>& y, double T,
                                     bool inclusive = false) {
    if (scores.size() != y.size()) throw ValidationError("threshold_confusion: size mismatch");
    std::size_t n1 = 0;
    std::size_t n0 = 0;
    detail::check_binary_classes(y, n1, n0);
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool positive = inclusive ? scores[i] >= T : scores[i] > T;
        if (!positive) continue;
        (y[i] != 0 ? tp : fp) += 1;
    }
    return {static_cast<double>(tp) / static_cast<double>(n1),
            static_cast<double>(fp) / static_cast<double>(n0)};
}

/// Rank correlation with midrank tie handling; 0 when either input has no
/// rank variation.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("spearman: size mismatch");
    if (x.size() < 2) throw ValidationError("spearman: need at least two points");
    auto rx = detail::midranks(x);
    auto ry = detail::midranks(y);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        double dx = rx[i] - mx;
        double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

struct CohortDiagnostics {
    double spearman_score_vs_total_targeted = 0.0;
    double spearman_score_vs_daily_mean_targeted = 0.0;
};

/// Rank agreement between each encounter's mean assessment score (published
/// weights) and its targeted-intervention volume — the sanity check that
/// targeted interventions track assessed risk at all.
inline CohortDiagnostics intervention_score_diagnostic(
    const std::vector<LabeledEncounter>& cohort) {
    std::vector<double> avg_score;
    std::vector<double> total_targeted;
    std::vector<double> daily_mean_targeted;
    for (const auto& le : cohort) {
        const auto& e = le.encounter;
        if (e.assessments.empty() || e.daily_targeted.empty()) continue;
        double s = 0.0;
        for (const auto& a : e.assessments) s += a.jhfrat_score();
        avg_score.push_back(s / static_cast<double>(e.assessments.size()));
        double t = std::accumulate(e.daily_targeted.begin(), e.daily_targeted.end(), 0.0);
        total_targeted.push_back(t);
        daily_mean_targeted.push_back(t / static_cast<double>(e.daily_targeted.size()));
    }
    CohortDiagnostics d;
    if (avg_score.size() >= 2) {
        d.spearman_score_vs_total_targeted = spearman(avg_score, total_targeted);
        d.spearman_score_vs_daily_mean_targeted = spearman(avg_score, daily_mean_targeted);
    }
    return d;
}

// Concordance of weak risk labels against predicted score categories,
// split into non-fall and fall strata.

struct ConcordanceRow {
    std::array<std::size_t, 3> counts{};  // predicted low / moderate / high
    std::array<double, 3> pct{};          // row-normalized percentages
    std::size_t total = 0;
};

struct ConcordanceTable {
    // stratum 0 = non-fall, 1 = fall; label rows ordered low, high, unknown
    std::array<std::array<ConcordanceRow, 3>, 2> rows;

    static int label_row(RiskLabelKind k) {
        switch (k) {
            case RiskLabelKind::low: return 0;
            case RiskLabelKind::high: return 1;
            case RiskLabelKind::indeterminate: return 2;
        }
        return 2;
    }
};

inline ConcordanceTable concordance_table(const std::vector<RiskCategory>& predicted,
                                          const std::vector<RiskLabelKind>& labels,
                                          const std::vector<std::uint8_t>& fall) {
    if (predicted.size() != labels.size() || predicted.size() != fall.size())
        throw ValidationError("concordance_table: size mismatch");
    ConcordanceTable t;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        auto& row = t.rows[fall[i] ? 1 : 0][static_cast<std::size_t>(
            ConcordanceTable::label_row(labels[i]))];
        ++row.counts[static_cast<std::size_t>(predicted[i])];
        ++row.total;
    }
    for (auto& stratum : t.rows)
        for (auto& row : stratum)
            if (row.total > 0)
                for (std::size_t c = 0; c < 3; ++c)
                    row.pct[c] = 100.0 * static_cast<double>(row.counts[c]) /
                                 static_cast<double>(row.total);
    return t;
}

struct FeatureStability {
    std::string name;
    double share_mean = 0.0;
    double share_min = 0.0;
    double share_max = 0.0;
    double share_sd = 0.0;
};

/// Coefficient share-of-sum statistics across fitted models (folds or sweep
/// cohorts). Shares are computed per model, then aggregated per feature.
inline std::vector<FeatureStability> stability_stats(
    const std::vector<Eigen::VectorXd>& betas, const FeatureDictionary& dict) {
    if (betas.empty()) throw ValidationError("stability_stats: no coefficient vectors");
    const int m = dict.size();
    std::vector<FeatureStability> out(static_cast<std::size_t>(m));
    std::vector<std::vector<double>> shares(static_cast<std::size_t>(m));
    for (const auto& beta : betas) {
        if (beta.size() != m) throw ValidationError("stability_stats: width mismatch");
        double total = beta.sum();
        for (int j = 0; j < m; ++j)
            shares[static_cast<std::size_t>(j)].push_back(total > 0.0 ? beta(j) / total : 0.0);
    }
    for (int j = 0; j < m; ++j) {
        auto& s = shares[static_cast<std::size_t>(j)];
        auto& f = out[static_cast<std::size_t>(j)];
        f.name = dict.features[static_cast<std::size_t>(j)].name;
        f.share_min = *std::min_element(s.begin(), s.end());
        f.share_max = *std::max_element(s.begin(), s.end());
        f.share_mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
        if (s.size() > 1) {
            double acc = 0.0;
            for (double v : s) acc += (v - f.share_mean) * (v - f.share_mean);
            f.share_sd = std::sqrt(acc / static_cast<double>(s.size() - 1));
        }
    }
    return out;
}

struct MetricSummary {
    std::vector<double> per_fold;
    double mean = 0.0;
    double sd = 0.0;
    double pooled = 0.0;  // metric over concatenated out-of-fold scores
};

namespace detail {

inline void finish_summary(MetricSummary& m) {
    if (m.per_fold.empty()) return;
    m.mean = std::accumulate(m.per_fold.begin(), m.per_fold.end(), 0.0) /
             static_cast<double>(m.per_fold.size());
    if (m.per_fold.size() > 1) {
        double acc = 0.0;
        for (double v : m.per_fold) acc += (v - m.mean) * (v - m.mean);
        m.sd = std::sqrt(acc / static_cast<double>(m.per_fold.size() - 1));
    }
}

}  // namespace detail

struct EvalReport {
    int folds = 5;
    std::uint64_t seed = 0;
    MetricSummary auc_roc_fitted, auc_roc_baseline;
    MetricSummary auc_pr_fitted, auc_pr_baseline;
    Confusion conf_low_fitted, conf_low_baseline;    // score >= t_low
    Confusion conf_high_fitted, conf_high_baseline;  // score > t_high
    ConcordanceTable concordance_fitted, concordance_baseline;
    ScoreModel full_model;
    ScoreModel baseline_model;
    std::vector<Eigen::VectorXd> fold_betas;
    std::vector<FeatureStability> stability;
    ScoreDifferentialSummary differential;  // full fitted - baseline, all rows
    // out-of-fold pieces, binary-row order
    std::vector<double> pooled_fitted;
    std::vector<double> pooled_baseline;
    std::vector<int> y_binary;
    std::vector<std::string> binary_ids;
    std::vector<int> fold_assignment;
    std::vector<std::string> all_ids;  // differential row order
};

/// Stratified cross-validation of the constrained score fit against the
/// fixed-coefficient baseline, plus the full-data fit used for category
/// concordance and score differentials.
inline EvalReport cross_validate(const CohortFeatures& features,
                                 const ConstraintSet& constraints, const FitConfig& config,
                                 int folds, std::uint64_t seed) {
    EvalReport rep;
    rep.folds = folds;
    rep.seed = seed;

    const auto train = features.training_matrix();
    const auto n = train.X.rows();
    if (n < folds) throw ValidationError("cross_validate: fewer binary rows than folds");
    rep.fold_assignment = stratified_kfold(train.y, folds, seed);
    rep.binary_ids = train.ids;
    rep.y_binary.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        rep.y_binary[static_cast<std::size_t>(i)] = train.y(i) > 0.5 ? 1 : 0;

    rep.baseline_model.dictionary = features.dictionary;
    rep.baseline_model.beta = baseline_beta(features.dictionary);
    rep.baseline_model.t_low = config.t_low;
    rep.baseline_model.t_high = config.t_high;

    // per-fold fits run concurrently on immutable inputs
    std::vector<std::future<ScoreModel>> fits;
    for (int f = 0; f < folds; ++f) {
        fits.push_back(std::async(std::launch::async, [&, f]() {
            std::vector<Eigen::Index> idx;
            for (Eigen::Index i = 0; i < n; ++i)
                if (rep.fold_assignment[static_cast<std::size_t>(i)] != f) idx.push_back(i);
            Eigen::MatrixXd Xf(static_cast<Eigen::Index>(idx.size()), train.X.cols());
            Eigen::VectorXd yf(static_cast<Eigen::Index>(idx.size()));
            for (std::size_t k = 0; k < idx.size(); ++k) {
                Xf.row(static_cast<Eigen::Index>(k)) = train.X.row(idx[k]);
                yf(static_cast<Eigen::Index>(k)) = train.y(idx[k]);
            }
            return fit(Xf, yf, constraints, config, features.dictionary);
        }));
    }

    rep.pooled_fitted.assign(static_cast<std::size_t>(n), 0.0);
    rep.pooled_baseline.assign(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
        rep.pooled_baseline[static_cast<std::size_t>(i)] =
            train.X.row(i).dot(rep.baseline_model.beta);

    for (int f = 0; f < folds; ++f) {
        ScoreModel model = fits[static_cast<std::size_t>(f)].get();
        std::vector<double> fold_fitted;
        std::vector<double> fold_base;
        std::vector<int> fold_y;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (rep.fold_assignment[static_cast<std::size_t>(i)] != f) continue;
            double s = train.X.row(i).dot(model.beta);
            rep.pooled_fitted[static_cast<std::size_t>(i)] = s;
            fold_fitted.push_back(s);
            fold_base.push_back(rep.pooled_baseline[static_cast<std::size_t>(i)]);
            fold_y.push_back(rep.y_binary[static_cast<std::size_t>(i)]);
        }
        rep.auc_roc_fitted.per_fold.push_back(auc_roc(fold_fitted, fold_y));
        rep.auc_roc_baseline.per_fold.push_back(auc_roc(fold_base, fold_y));
        rep.auc_pr_fitted.per_fold.push_back(auc_pr(fold_fitted, fold_y));
        rep.auc_pr_baseline.per_fold.push_back(auc_pr(fold_base, fold_y));
        rep.fold_betas.push_back(std::move(model.beta));
    }
    detail::finish_summary(rep.auc_roc_fitted);
    detail::finish_summary(rep.auc_roc_baseline);
    detail::finish_summary(rep.auc_pr_fitted);
    detail::finish_summary(rep.auc_pr_baseline);
    rep.auc_roc_fitted.pooled = auc_roc(rep.pooled_fitted, rep.y_binary);
    rep.auc_roc_baseline.pooled = auc_roc(rep.pooled_baseline, rep.y_binary);
    rep.auc_pr_fitted.pooled = auc_pr(rep.pooled_fitted, rep.y_binary);
    rep.auc_pr_baseline.pooled = auc_pr(rep.pooled_baseline, rep.y_binary);

    rep.conf_low_fitted = threshold_confusion(rep.pooled_fitted, rep.y_binary, config.t_low, true);
    rep.conf_low_baseline =
        threshold_confusion(rep.pooled_baseline, rep.y_binary, config.t_low, true);
    rep.conf_high_fitted =
        threshold_confusion(rep.pooled_fitted, rep.y_binary, config.t_high, false);
    rep.conf_high_baseline =
        threshold_confusion(rep.pooled_baseline, rep.y_binary, config.t_high, false);

    rep.full_model = fit(train.X, train.y, constraints, config, features.dictionary);
    rep.stability = stability_stats(rep.fold_betas, features.dictionary);

    // category concordance and differentials over every labeled encounter
    std::vector<RiskCategory> cat_fitted;
    std::vector<RiskCategory> cat_base;
    for (Eigen::Index i = 0; i < features.X.rows(); ++i) {
        double sf = features.X.row(i).dot(rep.full_model.beta);
        double sb = features.X.row(i).dot(rep.baseline_model.beta);
        cat_fitted.push_back(categorize(sf, config.t_low, config.t_high));
        cat_base.push_back(categorize(sb, config.t_low, config.t_high));
    }
    rep.concordance_fitted = concordance_table(cat_fitted, features.labels, features.fall);
    rep.concordance_baseline = concordance_table(cat_base, features.labels, features.fall);
    rep.differential = score_differential(rep.full_model, rep.baseline_model, features.X);
    rep.all_ids = features.ids;
    return rep;
}

struct SweepPoint {
    int high_threshold = 6;
    std::size_t low_count = 0;
    std::size_t high_count = 0;
    std::size_t indeterminate_count = 0;
    Eigen::VectorXd beta;
    std::vector<double> importance_share;  // beta_j / sum(beta)
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<FeatureStability> stability;  // across sweep cohorts
    FeatureDictionary dictionary;
};

/// Relabels, rebuilds and refits the cohort for each high-risk window
/// threshold, recording cohort composition and coefficient shares.
inline SweepResult sensitivity_sweep(const std::vector<Encounter>& encounters,
                                     const std::vector<int>& thresholds,
                                     const LabelingPolicy& base_policy, bool augmented,
                                     const FitConfig& config) {
    if (thresholds.empty()) throw ValidationError("sensitivity_sweep: no thresholds");
    SweepResult out;
    out.dictionary = FeatureDictionary::make(augmented);
    const ConstraintSet constraints = ConstraintSet::default_chains(out.dictionary);

    std::vector<std::future<SweepPoint>> futures;
    for (int t : thresholds) {
        futures.push_back(std::async(std::launch::async, [&, t]() {
            LabelingPolicy policy = base_policy;
            policy.high_min_per_window = t;
            Cohort cohort = build_cohort(encounters, policy);
            auto matrix = build_matrix(cohort, augmented);
            ScoreModel model = fit(matrix.X, matrix.y, constraints, config, out.dictionary);
            SweepPoint p;
            p.high_threshold = t;
            p.low_count = cohort.low_count;
            p.high_count = cohort.high_count;
            p.indeterminate_count = cohort.indeterminate_count;
            double total = model.beta.sum();
            for (Eigen::Index j = 0; j < model.beta.size(); ++j)
                p.importance_share.push_back(total > 0.0 ? model.beta(j) / total : 0.0);
            p.beta = std::move(model.beta);
            return p;
        }));
    }
    std::vector<Eigen::VectorXd> betas;
    for (auto& f : futures) {
        out.points.push_back(f.get());
        betas.push_back(out.points.back().beta);
    }
    out.stability = stability_stats(betas, out.dictionary);
    return out;
}

}  // namespace fallrisk
