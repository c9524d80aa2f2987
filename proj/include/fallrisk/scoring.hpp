#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "fallrisk/solver.hpp"

namespace fallrisk {

enum class RiskCategory { low, moderate, high };

inline const char* to_string(RiskCategory c) {
    switch (c) {
        case RiskCategory::low: return "low";
        case RiskCategory::moderate: return "moderate";
        case RiskCategory::high: return "high";
    }
    return "low";
}

/// Band assignment: low < t_low <= moderate <= t_high < high.
inline RiskCategory categorize(double score, double t_low = 6.0, double t_high = 13.0) {
    if (score < t_low) return RiskCategory::low;
    if (score <= t_high) return RiskCategory::moderate;
    return RiskCategory::high;
}

struct ScoredEncounter {
    std::string id;
    double score = 0.0;
    RiskCategory category = RiskCategory::low;
    // feature name -> beta_j * x_j, dictionary order, zero terms kept so the
    // contributions always sum to the score in the same order it was formed
    std::vector<std::pair<std::string, double>> contributions;
};

/// Applies the model to one feature row.
template <typename Derived>
ScoredEncounter score(const ScoreModel& model, const Eigen::MatrixBase<Derived>& row,
                      std::string id = {}) {
    if (row.size() != model.beta.size())
        throw ValidationError("score: row does not match the model dictionary");
    ScoredEncounter out;
    out.id = std::move(id);
    out.contributions.reserve(static_cast<std::size_t>(model.beta.size()));
    double total = 0.0;
    for (Eigen::Index j = 0; j < model.beta.size(); ++j) {
        double c = model.beta(j) * row(j);
        total += c;
        out.contributions.emplace_back(
            model.dictionary.features[static_cast<std::size_t>(j)].name, c);
    }
    out.score = total;
    out.category = categorize(total, model.t_low, model.t_high);
    return out;
}

/// Largest contributions first; ties by dictionary order.
inline std::vector<std::pair<std::string, double>> top_contributions(
    const ScoredEncounter& s, std::size_t k) {
    auto sorted = s.contributions;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (sorted.size() > k) sorted.resize(k);
    return sorted;
}

struct ScoreDifferentialSummary {
    std::vector<double> deltas;  // score_a - score_b, row order
    double mean = 0.0;
    double share_within_2 = 0.0;  // |delta| <= 2
    double share_within_5 = 0.0;  // |delta| <= 5
};

/// Per-row score deltas between two models over the same rows.
inline ScoreDifferentialSummary score_differential(const ScoreModel& model_a,
                                                   const ScoreModel& model_b,
                                                   const Eigen::MatrixXd& rows) {
    if (rows.cols() != model_a.beta.size() || rows.cols() != model_b.beta.size())
        throw ValidationError("score_differential: row width does not match the models");
    ScoreDifferentialSummary out;
    const auto n = rows.rows();
    out.deltas.reserve(static_cast<std::size_t>(n));
    std::size_t in2 = 0;
    std::size_t in5 = 0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double d = rows.row(i).dot(model_a.beta) - rows.row(i).dot(model_b.beta);
        out.deltas.push_back(d);
        sum += d;
        if (std::abs(d) <= 2.0) ++in2;
        if (std::abs(d) <= 5.0) ++in5;
    }
    if (n > 0) {
        out.mean = sum / static_cast<double>(n);
        out.share_within_2 = static_cast<double>(in2) / static_cast<double>(n);
        out.share_within_5 = static_cast<double>(in5) / static_cast<double>(n);
    }
    return out;
}

}  // namespace fallrisk
