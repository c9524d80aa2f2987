#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fallrisk/cohort.hpp"
#include "fallrisk/types.hpp"

namespace fallrisk {

enum class FeatureSource { jhfrat, ehr };
enum class FeatureKind { averaged, indicator };

struct FeatureInfo {
    std::string name;
    FeatureSource source = FeatureSource::jhfrat;
    std::string category;  // Age, Mobility, AMPAC, Service, ...
    FeatureKind kind = FeatureKind::averaged;
    std::string group;  // one-hot / single-select group name, empty if none
};

/// Ordered column schema of the feature matrix. The 18 assessment items
/// always come first; EHR indicator groups follow in the augmented variant.
struct FeatureDictionary {
    bool augmented = true;
    std::vector<FeatureInfo> features;

    int size() const { return static_cast<int>(features.size()); }

    int index_of(std::string_view name) const {
        for (int i = 0; i < size(); ++i)
            if (features[static_cast<std::size_t>(i)].name == name) return i;
        throw ValidationError("unknown feature name: " + std::string(name));
    }

    static FeatureDictionary make(bool augmented) {
        FeatureDictionary d;
        d.augmented = augmented;
        auto jh = [&](std::string_view name, std::string_view category, std::string_view group) {
            d.features.push_back({std::string(name), FeatureSource::jhfrat,
                                  std::string(category), FeatureKind::averaged,
                                  std::string(group)});
        };
        jh("age_60_69", "Age", "age");
        jh("age_70_79", "Age", "age");
        jh("age_80_plus", "Age", "age");
        jh("elim_incontinence", "Elimination", "");
        jh("elim_urgency_frequency", "Elimination", "");
        jh("cog_altered_awareness", "Cognition", "");
        jh("cog_impulsive", "Cognition", "");
        jh("cog_limited_understanding", "Cognition", "");
        jh("equip_one", "Equipment", "equipment");
        jh("equip_two", "Equipment", "equipment");
        jh("equip_three_plus", "Equipment", "equipment");
        jh("fall_history_6mo", "FallHistory", "");
        jh("med_one_drug", "Medications", "medications");
        jh("med_two_plus_drugs", "Medications", "medications");
        jh("med_sedated_procedure", "Medications", "medications");
        jh("mob_requires_assistance", "Mobility", "");
        jh("mob_unsteady_gait", "Mobility", "");
        jh("mob_visual_auditory_impairment", "Mobility", "");
        if (augmented) {
            auto ind = [&](std::string_view name, std::string_view category,
                           std::string_view group) {
                d.features.push_back({std::string(name), FeatureSource::ehr,
                                      std::string(category), FeatureKind::indicator,
                                      std::string(group)});
            };
            ind("ampac_le25", "AMPAC", "ampac");
            ind("ampac_25_35", "AMPAC", "ampac");
            ind("ampac_35_45", "AMPAC", "ampac");
            ind("ampac_gt45", "AMPAC", "ampac");
            ind("jhhlm_1_3", "JHHLM", "jhhlm");
            ind("jhhlm_4_5", "JHHLM", "jhhlm");
            ind("jhhlm_6_8", "JHHLM", "jhhlm");
            ind("comorbid_lt5", "Comorbidities", "comorbidities");
            ind("comorbid_5_10", "Comorbidities", "comorbidities");
            ind("comorbid_gt10", "Comorbidities", "comorbidities");
            ind("sex_female", "Sex", "sex");
            ind("sex_male", "Sex", "sex");
            ind("race_black", "Race", "race");
            ind("race_white", "Race", "race");
            ind("race_other", "Race", "race");
            ind("svc_medicine", "Service", "service");
            ind("svc_surgery", "Service", "service");
            ind("svc_oncology_hematology", "Service", "service");
            ind("svc_neurosurgery", "Service", "service");
            ind("svc_orthopedics", "Service", "service");
            ind("svc_neurology", "Service", "service");
            ind("svc_other", "Service", "service");
        }
        return d;
    }
};

inline constexpr int kNumEhrFeatures = 22;

/// Per-item mean over all retained assessments, each component in [0, 1].
inline std::array<double, kNumJhfratItems> average_jhfrat(const Encounter& e) {
    if (e.assessments.empty())
        throw ValidationError("average_jhfrat: encounter " + e.id + " has no assessments");
    std::array<double, kNumJhfratItems> mean{};
    for (const auto& a : e.assessments)
        for (int j = 0; j < kNumJhfratItems; ++j)
            mean[static_cast<std::size_t>(j)] += a.jhfrat_items[static_cast<std::size_t>(j)];
    for (auto& v : mean) v /= static_cast<double>(e.assessments.size());
    return mean;
}

namespace detail {

/// Mean over assessments where the measure is present; empty if absent everywhere.
template <typename Get>
std::optional<double> present_mean(const Encounter& e, Get get) {
    double sum = 0.0;
    int n = 0;
    for (const auto& a : e.assessments) {
        auto v = get(a);
        if (v) {
            sum += static_cast<double>(*v);
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

}  // namespace detail

/// Builds the 22 EHR indicators: mobility-score means binned after
/// averaging, comorbidity count binned, and demographic one-hots. A measure
/// absent for the whole encounter leaves its group all-zero.
inline std::vector<double> bin_ehr(const Encounter& e) {
    std::vector<double> v(kNumEhrFeatures, 0.0);

    auto ampac_mean = detail::present_mean(e, [](const AssessmentRecord& a) { return a.ampac; });
    if (ampac_mean) {
        if (*ampac_mean < 0.0)
            throw ValidationError("bin_ehr: negative ampac for encounter " + e.id);
        double m = *ampac_mean;
        if (m <= 25.0)
            v[0] = 1.0;
        else if (m <= 35.0)
            v[1] = 1.0;
        else if (m <= 45.0)
            v[2] = 1.0;
        else
            v[3] = 1.0;
    }

    auto jhhlm_mean = detail::present_mean(e, [](const AssessmentRecord& a) { return a.jhhlm; });
    if (jhhlm_mean) {
        long r = std::lround(*jhhlm_mean);
        if (r < 1 || r > 8)
            throw ValidationError("bin_ehr: jhhlm outside 1..8 for encounter " + e.id);
        if (r <= 3)
            v[4] = 1.0;
        else if (r <= 5)
            v[5] = 1.0;
        else
            v[6] = 1.0;
    }

    const int c = e.demographics.comorbidity_count;
    if (c < 0) throw ValidationError("bin_ehr: negative comorbidity count");
    if (c < 5)
        v[7] = 1.0;
    else if (c <= 10)
        v[8] = 1.0;
    else
        v[9] = 1.0;

    v[10 + (e.demographics.sex == Sex::male ? 1 : 0)] = 1.0;
    v[12 + static_cast<int>(e.demographics.race)] = 1.0;
    v[15 + static_cast<int>(e.demographics.service)] = 1.0;
    return v;
}

/// One matrix row in dictionary column order.
inline Eigen::RowVectorXd feature_row(const Encounter& e, const FeatureDictionary& dict) {
    Eigen::RowVectorXd row(dict.size());
    const auto jh = average_jhfrat(e);
    for (int j = 0; j < kNumJhfratItems; ++j) row(j) = jh[static_cast<std::size_t>(j)];
    if (dict.augmented) {
        const auto ehr = bin_ehr(e);
        for (int j = 0; j < kNumEhrFeatures; ++j)
            row(kNumJhfratItems + j) = ehr[static_cast<std::size_t>(j)];
    }
    return row;
}

/// Training matrix over the binary-labeled cohort.
struct FeatureMatrix {
    FeatureDictionary dictionary;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;  // 0 = low, 1 = high
    std::vector<std::string> ids;
};

/// Feature rows for every labeled encounter, binary or not; keeps the label
/// and fall flag so downstream reports can stratify.
struct CohortFeatures {
    FeatureDictionary dictionary;
    Eigen::MatrixXd X;
    std::vector<std::string> ids;
    std::vector<RiskLabelKind> labels;  // post-promotion: promoted rows read high
    std::vector<std::uint8_t> fall;

    FeatureMatrix training_matrix() const {
        FeatureMatrix m;
        m.dictionary = dictionary;
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if (labels[static_cast<std::size_t>(i)] != RiskLabelKind::indeterminate)
                rows.push_back(i);
        m.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
        m.y.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            m.X.row(static_cast<Eigen::Index>(k)) = X.row(rows[k]);
            m.y(static_cast<Eigen::Index>(k)) =
                labels[static_cast<std::size_t>(rows[k])] == RiskLabelKind::high ? 1.0 : 0.0;
            m.ids.push_back(ids[static_cast<std::size_t>(rows[k])]);
        }
        return m;
    }
};

inline CohortFeatures build_all_features(const std::vector<LabeledEncounter>& encounters,
                                         bool augmented) {
    if (encounters.empty()) throw ValidationError("build_all_features: empty cohort");
    CohortFeatures f;
    f.dictionary = FeatureDictionary::make(augmented);
    f.X.resize(static_cast<Eigen::Index>(encounters.size()), f.dictionary.size());
    for (std::size_t i = 0; i < encounters.size(); ++i) {
        const auto& le = encounters[i];
        f.X.row(static_cast<Eigen::Index>(i)) = feature_row(le.encounter, f.dictionary);
        f.ids.push_back(le.encounter.id);
        f.labels.push_back(le.promoted ? RiskLabelKind::high : le.risk.label);
        f.fall.push_back(le.encounter.truncated_at_fall ? 1 : 0);
    }
    return f;
}

inline CohortFeatures build_all_features(const Cohort& cohort, bool augmented) {
    return build_all_features(cohort.encounters, augmented);
}

/// Deterministic column-ordered matrix over the binary cohort only.
inline FeatureMatrix build_matrix(const Cohort& cohort, bool augmented) {
    auto m = build_all_features(cohort, augmented).training_matrix();
    if (m.X.rows() == 0) throw ValidationError("build_matrix: no binary-labeled encounters");
    return m;
}

/// Published coefficients padded with zeros for EHR columns; the fixed
/// baseline model and the solver warm start.
inline Eigen::VectorXd baseline_beta(const FeatureDictionary& dict) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(dict.size());
    for (int j = 0; j < kNumJhfratItems; ++j)
        beta(j) = kJhfratPublishedCoefficients[static_cast<std::size_t>(j)];
    return beta;
}

/// Dot product of the 18 assessment-item columns with the published weights.
template <typename Derived>
double baseline_jhfrat_score(const Eigen::MatrixBase<Derived>& row) {
    double s = 0.0;
    for (int j = 0; j < kNumJhfratItems; ++j)
        s += kJhfratPublishedCoefficients[static_cast<std::size_t>(j)] * row(j);
    return s;
}

}  // namespace fallrisk
