#include "fallrisk/evaluate.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace fallrisk;

TEST(StratifiedKfold, BalancedTenRows) {
    Eigen::VectorXd y(10);
    y << 1, 1, 1, 1, 1, 0, 0, 0, 0, 0;
    auto fold = stratified_kfold(y, 5, 7);
    std::vector<int> pos_per_fold(5, 0);
    std::vector<int> size_per_fold(5, 0);
    for (int i = 0; i < 10; ++i) {
        ++size_per_fold[static_cast<std::size_t>(fold[static_cast<std::size_t>(i)])];
        if (y(i) > 0.5) ++pos_per_fold[static_cast<std::size_t>(fold[static_cast<std::size_t>(i)])];
    }
    for (int f = 0; f < 5; ++f) {
        EXPECT_EQ(pos_per_fold[static_cast<std::size_t>(f)], 1);
        EXPECT_EQ(size_per_fold[static_cast<std::size_t>(f)], 2);
    }
}

TEST(StratifiedKfold, IndivisibleCountsDifferByAtMostOne) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 11 + static_cast<int>(rng() % 90);
        Eigen::VectorXd y(n);
        int n1 = 0;
        for (int i = 0; i < n; ++i) {
            y(i) = rng() % 3 == 0 ? 1.0 : 0.0;
            n1 += y(i) > 0.5;
        }
        if (n1 < 5 || n - n1 < 5) continue;
        auto fold = stratified_kfold(y, 5, trial);
        std::vector<int> sizes(5, 0);
        std::vector<int> pos(5, 0);
        for (int i = 0; i < n; ++i) {
            ++sizes[static_cast<std::size_t>(fold[static_cast<std::size_t>(i)])];
            if (y(i) > 0.5) ++pos[static_cast<std::size_t>(fold[static_cast<std::size_t>(i)])];
        }
        int smin = *std::min_element(sizes.begin(), sizes.end());
        int smax = *std::max_element(sizes.begin(), sizes.end());
        ASSERT_LE(smax - smin, 1);
        int pmin = *std::min_element(pos.begin(), pos.end());
        int pmax = *std::max_element(pos.begin(), pos.end());
        ASSERT_LE(pmax - pmin, 1);  // positive rate within 1/fold-size of global
    }
}

TEST(StratifiedKfold, SeedChangesPermutationNotProperty) {
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) y(i) = i % 4 == 0 ? 1.0 : 0.0;
    auto a = stratified_kfold(y, 5, 1);
    auto b = stratified_kfold(y, 5, 1);
    auto c = stratified_kfold(y, 5, 2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(AucRoc, PerfectSeparationAndPureTies) {
    EXPECT_DOUBLE_EQ(auc_roc({1, 2, 3, 10, 11, 12}, {0, 0, 0, 1, 1, 1}), 1.0);
    EXPECT_DOUBLE_EQ(auc_roc({5, 5, 5, 5}, {0, 1, 0, 1}), 0.5);
}

TEST(AucRoc, TiedInstanceMatchesPairCounting) {
    std::vector<double> scores = {1, 2, 2, 3, 3, 4};
    std::vector<int> y = {0, 0, 1, 0, 1, 1};
    EXPECT_DOUBLE_EQ(auc_roc(scores, y), oracle::auc_pair_counting(scores, y));
}

TEST(AucRoc, MatchesPairCountingOnRandomInstances) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 300; ++trial) {
        int n = 2 + static_cast<int>(rng() % 49);
        std::vector<double> scores(static_cast<std::size_t>(n));
        std::vector<int> y(static_cast<std::size_t>(n));
        int n1 = 0;
        for (int i = 0; i < n; ++i) {
            scores[static_cast<std::size_t>(i)] = static_cast<double>(rng() % 8);  // many ties
            y[static_cast<std::size_t>(i)] = rng() % 2 == 0;
            n1 += y[static_cast<std::size_t>(i)];
        }
        if (n1 == 0 || n1 == n) continue;
        ASSERT_NEAR(auc_roc(scores, y), oracle::auc_pair_counting(scores, y), 1e-12);
    }
}

TEST(AucRoc, InvariantUnderStrictlyIncreasingTransform) {
    std::vector<double> scores = {0.5, 3, 2, 8, 1, 7, 2};
    std::vector<int> y = {0, 1, 0, 1, 0, 1, 1};
    auto transformed = scores;
    for (auto& s : transformed) s = std::exp(0.3 * s) + 5.0;
    EXPECT_DOUBLE_EQ(auc_roc(scores, y), auc_roc(transformed, y));
}

TEST(AucPr, KnownValues) {
    EXPECT_DOUBLE_EQ(auc_pr({1, 2, 10, 11}, {0, 0, 1, 1}), 1.0);
    // all tied: single block, precision = prevalence
    EXPECT_DOUBLE_EQ(auc_pr({4, 4, 4, 4}, {1, 0, 0, 1}), 0.5);
    // descending scan: hit, miss, hit -> AP = 1/2 * (1 + 2/3)
    EXPECT_NEAR(auc_pr({3, 2, 1}, {1, 0, 1}), 0.5 * (1.0 + 2.0 / 3.0), 1e-15);
}

TEST(Confusion, HandCountedAndConventions) {
    std::vector<double> scores = {20, 20, 0, 0};
    std::vector<int> y = {1, 1, 0, 0};
    auto c = threshold_confusion(scores, y, 13.0);
    EXPECT_DOUBLE_EQ(c.tpr, 1.0);
    EXPECT_DOUBLE_EQ(c.fpr, 0.0);

    std::vector<double> s2 = {6, 5, 13, 14};
    std::vector<int> y2 = {1, 1, 0, 0};
    auto at6 = threshold_confusion(s2, y2, 6.0, true);  // >= 6 counts positive
    EXPECT_DOUBLE_EQ(at6.tpr, 0.5);
    EXPECT_DOUBLE_EQ(at6.fpr, 1.0);
    auto at13 = threshold_confusion(s2, y2, 13.0, false);  // > 13 counts positive
    EXPECT_DOUBLE_EQ(at13.tpr, 0.0);
    EXPECT_DOUBLE_EQ(at13.fpr, 0.5);
}

TEST(Confusion, MonotoneInThreshold) {
    std::mt19937_64 rng(31);
    std::vector<double> scores;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        scores.push_back(static_cast<double>(rng() % 20));
        y.push_back(rng() % 2 == 0);
    }
    y[0] = 1;
    y[1] = 0;
    double last_tpr = 2.0;
    double last_fpr = 2.0;
    for (double t = 0.0; t <= 20.0; t += 1.0) {
        auto c = threshold_confusion(scores, y, t);
        ASSERT_LE(c.tpr, last_tpr);
        ASSERT_LE(c.fpr, last_fpr);
        last_tpr = c.tpr;
        last_fpr = c.fpr;
    }
}

TEST(Spearman, MonotoneAndReversed) {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> up = {2, 4, 9, 16, 25};
    std::vector<double> down = {10, 8, 6, 4, 2};
    EXPECT_DOUBLE_EQ(spearman(x, up), 1.0);
    EXPECT_DOUBLE_EQ(spearman(x, down), -1.0);
}

TEST(Spearman, TiedInstanceMatchesDirectDefinition) {
    std::vector<double> x = {1, 2, 2, 3, 3};
    std::vector<double> y = {5, 5, 7, 8, 8};
    EXPECT_NEAR(spearman(x, y), oracle::spearman_direct(x, y), 1e-14);
}

TEST(Spearman, RandomInstancesMatchDirectDefinition) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 3 + static_cast<int>(rng() % 30);
        std::vector<double> x(static_cast<std::size_t>(n));
        std::vector<double> y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            x[static_cast<std::size_t>(i)] = static_cast<double>(rng() % 6);
            y[static_cast<std::size_t>(i)] = static_cast<double>(rng() % 6);
        }
        ASSERT_NEAR(spearman(x, y), oracle::spearman_direct(x, y), 1e-12);
    }
}

TEST(Concordance, SingleLowEncounterScoredLow) {
    auto t = concordance_table({RiskCategory::low}, {RiskLabelKind::low}, {0});
    EXPECT_EQ(t.rows[0][0].counts[0], 1u);
    EXPECT_DOUBLE_EQ(t.rows[0][0].pct[0], 100.0);
    EXPECT_EQ(t.rows[0][0].total, 1u);
}

TEST(Concordance, TotalsConservedPerStratum) {
    std::mt19937_64 rng(34);
    std::vector<RiskCategory> pred;
    std::vector<RiskLabelKind> labels;
    std::vector<std::uint8_t> fall;
    for (int i = 0; i < 500; ++i) {
        pred.push_back(static_cast<RiskCategory>(rng() % 3));
        labels.push_back(static_cast<RiskLabelKind>(rng() % 3));
        fall.push_back(rng() % 10 == 0 ? 1 : 0);
    }
    auto t = concordance_table(pred, labels, fall);
    std::size_t total = 0;
    for (const auto& stratum : t.rows)
        for (const auto& row : stratum) {
            std::size_t row_sum = row.counts[0] + row.counts[1] + row.counts[2];
            EXPECT_EQ(row_sum, row.total);
            total += row_sum;
        }
    EXPECT_EQ(total, 500u);
}

TEST(Stability, IdenticalVectorsHaveZeroSd) {
    auto dict = FeatureDictionary::make(false);
    Eigen::VectorXd beta = baseline_beta(dict);
    auto stats = stability_stats({beta, beta, beta}, dict);
    for (const auto& s : stats) {
        EXPECT_DOUBLE_EQ(s.share_sd, 0.0);
        EXPECT_DOUBLE_EQ(s.share_min, s.share_max);
    }
}

TEST(Stability, SingleFeatureShiftShowsUpAsRange) {
    auto dict = FeatureDictionary::make(false);
    Eigen::VectorXd a = baseline_beta(dict);  // sums to 49
    Eigen::VectorXd b = a;
    b(0) = 1.0 + 4.9;  // share moves from 1/49 to 5.9/53.9
    auto stats = stability_stats({a, b}, dict);
    EXPECT_NEAR(stats[0].share_max - stats[0].share_min, 5.9 / 53.9 - 1.0 / 49.0, 1e-12);
}

TEST(Diagnostics, MonotoneCohortGivesPositiveCorrelation) {
    std::vector<LabeledEncounter> cohort;
    for (int i = 0; i < 20; ++i) {
        LabeledEncounter le;
        le.encounter.id = "d" + std::to_string(i);
        le.encounter.admit_length_days = 4;
        le.encounter.daily_targeted.assign(4, i / 4);
        le.encounter.daily_nontargeted.resize(4);
        for (int d = 1; d <= 4; ++d) {
            AssessmentRecord a;
            a.day = d;
            for (int j = 0; j < 18 && j < i; ++j) a.jhfrat_items[static_cast<std::size_t>(j)] = 1;
            le.encounter.assessments.push_back(a);
        }
        cohort.push_back(std::move(le));
    }
    auto d = intervention_score_diagnostic(cohort);
    EXPECT_GT(d.spearman_score_vs_total_targeted, 0.8);
    EXPECT_GT(d.spearman_score_vs_daily_mean_targeted, 0.8);
}

TEST(CrossValidate, SmallDeterministicRun) {
    // synthetic separable-ish features over 60 encounters
    std::mt19937_64 rng(35);
    std::vector<LabeledEncounter> cohort;
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 60; ++i) {
        LabeledEncounter le;
        le.encounter.id = "c" + std::to_string(i);
        le.encounter.admit_length_days = 4;
        bool high = i % 2 == 0;
        le.encounter.daily_targeted.assign(4, high ? 3 : 0);
        le.encounter.daily_nontargeted.resize(4);
        for (int d = 1; d <= 4; ++d) {
            AssessmentRecord a;
            a.day = d;
            if (high && unit() < 0.8) a.jhfrat_items[15] = 1;
            if (!high && unit() < 0.15) a.jhfrat_items[15] = 1;
            if (unit() < 0.3) a.jhfrat_items[3] = 1;
            le.encounter.assessments.push_back(a);
        }
        le.risk.label = high ? RiskLabelKind::high : RiskLabelKind::low;
        cohort.push_back(std::move(le));
    }
    auto features = build_all_features(cohort, true);
    auto constraints = ConstraintSet::default_chains(features.dictionary);
    auto rep1 = cross_validate(features, constraints, FitConfig{}, 5, 11);
    auto rep2 = cross_validate(features, constraints, FitConfig{}, 5, 11);
    EXPECT_EQ(rep1.auc_roc_fitted.pooled, rep2.auc_roc_fitted.pooled);
    EXPECT_EQ(rep1.fold_assignment, rep2.fold_assignment);
    EXPECT_GT(rep1.auc_roc_fitted.pooled, 0.7);
    EXPECT_EQ(rep1.auc_roc_fitted.per_fold.size(), 5u);
    EXPECT_EQ(rep1.fold_betas.size(), 5u);
    for (const auto& beta : rep1.fold_betas) EXPECT_GE(beta.minCoeff(), -1e-8);
    // differential rows cover the whole cohort
    EXPECT_EQ(rep1.differential.deltas.size(), 60u);
}
