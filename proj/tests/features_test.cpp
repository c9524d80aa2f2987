#include "fallrisk/features.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace fallrisk;

namespace {

Encounter base_encounter(int days = 4) {
    Encounter e;
    e.id = "t";
    e.admit_length_days = days;
    e.daily_targeted.assign(static_cast<std::size_t>(days), 0);
    e.daily_nontargeted.resize(static_cast<std::size_t>(days));
    for (int d = 1; d <= days; ++d) {
        AssessmentRecord a;
        a.day = d;
        e.assessments.push_back(a);
    }
    return e;
}

LabeledEncounter labeled(Encounter e, RiskLabelKind k) {
    LabeledEncounter le;
    le.encounter = std::move(e);
    le.risk.label = k;
    return le;
}

}  // namespace

TEST(Dictionary, ItemCountsAndOrder) {
    auto plain = FeatureDictionary::make(false);
    EXPECT_EQ(plain.size(), 18);
    auto aug = FeatureDictionary::make(true);
    EXPECT_EQ(aug.size(), 40);
    for (int j = 0; j < 18; ++j)
        EXPECT_EQ(aug.features[static_cast<std::size_t>(j)].source, FeatureSource::jhfrat);
    std::set<std::string> names;
    for (const auto& f : aug.features) names.insert(f.name);
    EXPECT_EQ(names.size(), 40u);
    EXPECT_EQ(aug.features[0].name, "age_60_69");
    EXPECT_THROW(aug.index_of("nope"), ValidationError);
}

TEST(Dictionary, PublishedCoefficientSumIs49) {
    double sum = 0.0;
    for (double c : kJhfratPublishedCoefficients) sum += c;
    EXPECT_DOUBLE_EQ(sum, 49.0);
}

TEST(AverageJhfrat, AlwaysSetAndHalfSet) {
    auto e = base_encounter(4);
    for (auto& a : e.assessments) a.jhfrat_items[0] = 1;  // all four records
    e.assessments[0].jhfrat_items[5] = 1;                 // 2 of 4
    e.assessments[1].jhfrat_items[5] = 1;
    auto mean = average_jhfrat(e);
    EXPECT_DOUBLE_EQ(mean[0], 1.0);
    EXPECT_DOUBLE_EQ(mean[5], 0.5);
    EXPECT_DOUBLE_EQ(mean[17], 0.0);
}

TEST(AverageJhfrat, TruncatedFallEncounterUsesRetainedRecordsOnly) {
    auto e = base_encounter(5);
    // item 3 set on days 4 and 5 only
    e.assessments[3].jhfrat_items[3] = 1;
    e.assessments[4].jhfrat_items[3] = 1;
    e.fall_day = 4;
    auto excl = apply_exclusions({e});
    ASSERT_EQ(excl.kept.size(), 1u);
    auto mean = average_jhfrat(excl.kept[0]);
    EXPECT_DOUBLE_EQ(mean[3], 0.0);  // manual mean over days 1-3
}

TEST(AverageJhfrat, NoAssessmentsIsInvalid) {
    auto e = base_encounter(4);
    e.assessments.clear();
    EXPECT_THROW(average_jhfrat(e), ValidationError);
}

TEST(BinEhr, AmpacBoundaryClosedOnRight) {
    auto e = base_encounter(4);
    for (auto& a : e.assessments) a.ampac = 25.0;
    auto v = bin_ehr(e);
    EXPECT_DOUBLE_EQ(v[0], 1.0);  // <=25
    EXPECT_DOUBLE_EQ(v[1], 0.0);
    for (auto& a : e.assessments) a.ampac = 25.5;
    v = bin_ehr(e);
    EXPECT_DOUBLE_EQ(v[0], 0.0);
    EXPECT_DOUBLE_EQ(v[1], 1.0);  // 25-35
}

TEST(BinEhr, AmpacMeanBinnedAfterAveraging) {
    auto e = base_encounter(4);
    // values 20, 60 on two records, absent elsewhere: mean 40 -> bin 35-45
    e.assessments[0].ampac = 20.0;
    e.assessments[2].ampac = 60.0;
    auto v = bin_ehr(e);
    EXPECT_DOUBLE_EQ(v[2], 1.0);
}

TEST(BinEhr, JhhlmRoundedMean) {
    auto e = base_encounter(4);
    e.assessments[0].jhhlm = 3;
    e.assessments[1].jhhlm = 4;  // mean 3.5 rounds to 4 -> bin 4-5
    auto v = bin_ehr(e);
    EXPECT_DOUBLE_EQ(v[4], 0.0);
    EXPECT_DOUBLE_EQ(v[5], 1.0);
}

TEST(BinEhr, ComorbidityBoundaries) {
    auto e = base_encounter(4);
    e.demographics.comorbidity_count = 10;
    auto v = bin_ehr(e);
    EXPECT_DOUBLE_EQ(v[8], 1.0);  // 5-10 closed at 10
    e.demographics.comorbidity_count = 4;
    v = bin_ehr(e);
    EXPECT_DOUBLE_EQ(v[7], 1.0);
    e.demographics.comorbidity_count = 11;
    v = bin_ehr(e);
    EXPECT_DOUBLE_EQ(v[9], 1.0);
}

TEST(BinEhr, ServiceOneHot) {
    auto e = base_encounter(4);
    e.demographics.service = Service::neurosurgery;
    auto v = bin_ehr(e);
    double service_sum = 0.0;
    for (int j = 15; j < 22; ++j) service_sum += v[static_cast<std::size_t>(j)];
    EXPECT_DOUBLE_EQ(service_sum, 1.0);
    EXPECT_DOUBLE_EQ(v[18], 1.0);  // svc_neurosurgery
}

TEST(BinEhr, MissingMeasureLeavesGroupZero) {
    auto e = base_encounter(4);
    auto v = bin_ehr(e);
    for (int j = 0; j < 7; ++j) EXPECT_DOUBLE_EQ(v[static_cast<std::size_t>(j)], 0.0);
}

TEST(BinEhr, InvalidValuesRejected) {
    auto e = base_encounter(4);
    e.assessments[0].jhhlm = 9;
    EXPECT_THROW(bin_ehr(e), ValidationError);
    e = base_encounter(4);
    e.assessments[0].ampac = -1.0;
    EXPECT_THROW(bin_ehr(e), ValidationError);
}

TEST(BuildMatrix, WidthsAndDeterminism) {
    std::vector<LabeledEncounter> cohort;
    auto e1 = base_encounter(4);
    e1.assessments[0].jhfrat_items[15] = 1;
    cohort.push_back(labeled(e1, RiskLabelKind::high));
    cohort.push_back(labeled(e1, RiskLabelKind::low));
    auto all = build_all_features(cohort, true);
    EXPECT_EQ(all.X.cols(), 40);
    EXPECT_TRUE(all.X.row(0).isApprox(all.X.row(1)));
    auto plain = build_all_features(cohort, false);
    EXPECT_EQ(plain.X.cols(), 18);
}

TEST(BuildMatrix, TrainingMatrixSkipsIndeterminate) {
    std::vector<LabeledEncounter> cohort;
    cohort.push_back(labeled(base_encounter(4), RiskLabelKind::low));
    cohort.push_back(labeled(base_encounter(4), RiskLabelKind::indeterminate));
    cohort.push_back(labeled(base_encounter(4), RiskLabelKind::high));
    auto promoted = labeled(base_encounter(4), RiskLabelKind::indeterminate);
    promoted.promoted = true;
    cohort.push_back(promoted);
    auto m = build_all_features(cohort, true).training_matrix();
    EXPECT_EQ(m.X.rows(), 3);
    EXPECT_EQ(m.y.sum(), 2.0);  // native high + promoted
}

TEST(BuildMatrix, GroupExclusivityHolds) {
    auto aug = FeatureDictionary::make(true);
    auto e = base_encounter(5);
    e.assessments[0].jhfrat_items[static_cast<int>(JhfratItem::age_70_79)] = 1;
    e.assessments[0].ampac = 30;
    e.demographics.service = Service::medicine;
    auto row = feature_row(e, aug);
    std::map<std::string, double> group_sums;
    for (int j = 0; j < aug.size(); ++j) {
        const auto& f = aug.features[static_cast<std::size_t>(j)];
        if (!f.group.empty() && f.kind == FeatureKind::indicator) group_sums[f.group] += row(j);
    }
    for (const auto& [group, sum] : group_sums) {
        EXPECT_TRUE(sum == 0.0 || sum == 1.0) << group;
    }
}

TEST(BaselineScore, PublishedExamples) {
    auto dict = FeatureDictionary::make(true);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dict.size());
    EXPECT_DOUBLE_EQ(baseline_jhfrat_score(row), 0.0);
    row(dict.index_of("fall_history_6mo")) = 1.0;
    EXPECT_DOUBLE_EQ(baseline_jhfrat_score(row), 5.0);
    row.setZero();
    row(dict.index_of("mob_requires_assistance")) = 0.5;
    EXPECT_DOUBLE_EQ(baseline_jhfrat_score(row), 1.0);
}

TEST(BaselineBeta, MatchesPublishedWeightsWithZeroEhr) {
    auto dict = FeatureDictionary::make(true);
    auto beta = baseline_beta(dict);
    EXPECT_DOUBLE_EQ(beta.head(18).sum(), 49.0);
    EXPECT_DOUBLE_EQ(beta.tail(22).sum(), 0.0);
    EXPECT_DOUBLE_EQ(beta(dict.index_of("med_sedated_procedure")), 7.0);
}
