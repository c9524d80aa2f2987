#include "fallrisk/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace fallrisk;

namespace {

// binary-feature instance with y drawn from a logistic link on the features
struct Instance {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

Instance random_binary_instance(std::mt19937_64& rng, Eigen::Index n, int m,
                                double link_scale = 5.0, double link_offset = -4.0) {
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    while (true) {
        Instance inst;
        inst.X.resize(n, m);
        inst.y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < m; ++j) {
                inst.X(i, j) = unit() < 0.5 ? 0.0 : 1.0;
                s += inst.X(i, j);
            }
            double p = 1.0 / (1.0 + std::exp(-(link_scale * s / m + link_offset)));
            inst.y(i) = unit() < p ? 1.0 : 0.0;
        }
        double n1 = inst.y.sum();
        if (n1 >= 5 && n1 <= static_cast<double>(n) - 5) return inst;
    }
}

FitConfig default_config() { return FitConfig{}; }

}  // namespace

TEST(SampleWeights, EachClassSumsToOne) {
    Eigen::VectorXd y(5);
    y << 1, 0, 0, 1, 0;
    auto w = sample_weights(y);
    double pos = 0.0;
    double neg = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) > 0.5 ? pos : neg) += w(i);
    EXPECT_DOUBLE_EQ(pos, 1.0);
    EXPECT_DOUBLE_EQ(neg, 1.0);
}

TEST(SampleWeights, SingleClassRejected) {
    Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
    EXPECT_THROW(sample_weights(y), ValidationError);
}

TEST(LogLikelihood, ClosedFormAtZeroBeta) {
    Eigen::MatrixXd X(1, 2);
    X << 0.3, 0.7;
    Eigen::VectorXd y(1);
    y << 1;
    Eigen::VectorXd w(1);
    w << 1;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(2);
    EXPECT_NEAR(log_likelihood(X, y, w, beta, 6.0), -6.0 - std::log1p(std::exp(-6.0)), 1e-15);
}

TEST(LogLikelihood, BalancedAtThresholdZeroIsMinusTwoLogTwo) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4, 2);
    Eigen::VectorXd y(4);
    y << 1, 1, 0, 0;
    auto w = sample_weights(y);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(2);
    EXPECT_NEAR(log_likelihood(X, y, w, beta, 0.0), -2.0 * std::log(2.0), 1e-14);
}

TEST(LogLikelihood, MatchesNaiveSummationOnRandomInstances) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto inst = random_binary_instance(rng, 60, 3);
        auto w = sample_weights(inst.y);
        Eigen::VectorXd beta(3);
        for (int j = 0; j < 3; ++j)
            beta(j) = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 8.0;
        for (double T : {6.0, 13.0}) {
            double a = log_likelihood(inst.X, inst.y, w, beta, T);
            double b = oracle::log_likelihood_naive(inst.X, inst.y, w, beta, T);
            ASSERT_NEAR(a, b, 1e-12 * std::abs(b));
        }
    }
}

TEST(LogLikelihood, OverflowSafeAtExtremeScores) {
    Eigen::MatrixXd X(2, 1);
    X << 1000.0, -1000.0;
    Eigen::VectorXd y(2);
    y << 1, 0;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
    Eigen::VectorXd beta(1);
    beta << 1.0;
    double v = log_likelihood(X, y, w, beta, 6.0);
    EXPECT_TRUE(std::isfinite(v));
}

TEST(Objective, EndpointsReduceToSingleThreshold) {
    std::mt19937_64 rng(12);
    auto inst = random_binary_instance(rng, 40, 2);
    auto w = sample_weights(inst.y);
    Eigen::VectorXd beta(2);
    beta << 2.0, 1.0;
    auto cfg = default_config();
    cfg.lambda = 1.0;
    EXPECT_DOUBLE_EQ(objective(inst.X, inst.y, w, beta, cfg),
                     log_likelihood(inst.X, inst.y, w, beta, 6.0));
    cfg.lambda = 0.0;
    EXPECT_DOUBLE_EQ(objective(inst.X, inst.y, w, beta, cfg),
                     log_likelihood(inst.X, inst.y, w, beta, 13.0));
    cfg.lambda = 0.5;
    EXPECT_NEAR(objective(inst.X, inst.y, w, beta, cfg),
                0.5 * (log_likelihood(inst.X, inst.y, w, beta, 6.0) +
                       log_likelihood(inst.X, inst.y, w, beta, 13.0)),
                1e-14);
}

TEST(Gradient, MatchesCentralFiniteDifferences) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = random_binary_instance(rng, 50, 3);
        auto w = sample_weights(inst.y);
        Eigen::VectorXd beta(3);
        for (int j = 0; j < 3; ++j)
            beta(j) = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 10.0;
        auto cfg = default_config();
        cfg.lambda = 0.3;
        auto g = gradient(inst.X, inst.y, w, beta, cfg);
        auto fd = oracle::gradient_finite_difference(inst.X, inst.y, w, beta, cfg);
        for (int j = 0; j < 3; ++j)
            ASSERT_NEAR(g(j), fd(j), 1e-6 * std::max(1.0, std::abs(fd(j))));
    }
}

TEST(Gradient, ZeroFeatureMatrixGivesZeroGradient) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(6, 2);
    Eigen::VectorXd y(6);
    y << 1, 0, 1, 0, 1, 0;
    auto w = sample_weights(y);
    auto g = gradient(X, y, w, Eigen::VectorXd::Zero(2), default_config());
    EXPECT_DOUBLE_EQ(g.norm(), 0.0);
}

TEST(Gradient, VanishesAtOneDimensionalOptimum) {
    std::mt19937_64 rng(14);
    Eigen::MatrixXd X(80, 1);
    Eigen::VectorXd y(80);
    for (int i = 0; i < 80; ++i) {
        X(i, 0) = 0.25 + 0.75 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        y(i) = i % 2 == 0 ? 1.0 : 0.0;
    }
    auto w = sample_weights(y);
    auto cfg = default_config();
    double opt = oracle::bisect_1d_optimum(X, y, w, cfg);
    Eigen::VectorXd beta(1);
    beta << opt;
    auto g = gradient(X, y, w, beta, cfg);
    EXPECT_NEAR(g(0), 0.0, 1e-9);
}

TEST(Fit, MatchesDenseGridSearchOnTwoFeatureInstances) {
    std::mt19937_64 rng(15);
    FeatureDictionary empty_dict;
    for (int trial = 0; trial < 3; ++trial) {
        auto inst = random_binary_instance(rng, 200, 2);
        auto w = sample_weights(inst.y);
        auto cfg = default_config();
        auto model = fit(inst.X, inst.y, {}, cfg, empty_dict);
        ASSERT_TRUE(model.fit.converged);
        auto grid = oracle::grid_search_2d(inst.X, inst.y, w, cfg,
                                           [](double, double) { return true; });
        double fitted_obj = objective(inst.X, inst.y, w, model.beta, cfg);
        EXPECT_GE(fitted_obj, grid.objective - 1e-9);
        EXPECT_NEAR(fitted_obj, grid.objective, 1e-6);
    }
}

TEST(Fit, ActiveChainMatchesFeasibleGridOptimum) {
    // feature 0 is made far more predictive, so the unconstrained optimum
    // violates beta0 <= beta1 and the chain binds with equality
    std::mt19937_64 rng(16);
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Eigen::MatrixXd X(240, 2);
    Eigen::VectorXd y(240);
    for (int i = 0; i < 240; ++i) {
        X(i, 0) = unit() < 0.5 ? 0.0 : 1.0;
        X(i, 1) = unit() < 0.5 ? 0.0 : 1.0;
        double p = 1.0 / (1.0 + std::exp(-(9.0 * X(i, 0) + 0.5 * X(i, 1) - 5.0)));
        y(i) = unit() < p ? 1.0 : 0.0;
    }
    auto w = sample_weights(y);
    auto cfg = default_config();
    FeatureDictionary empty_dict;

    auto unconstrained = fit(X, y, {}, cfg, empty_dict);
    ASSERT_GT(unconstrained.beta(0), unconstrained.beta(1));

    ConstraintSet chain;
    chain.pairs = {{0, 1}};
    auto model = fit(X, y, chain, cfg, empty_dict);
    EXPECT_LE(model.beta(0), model.beta(1) + 1e-8);
    EXPECT_NEAR(model.beta(0), model.beta(1), 1e-5);  // equality pattern of the projection

    auto grid = oracle::grid_search_2d(X, y, w, cfg,
                                       [](double b1, double b2) { return b1 <= b2; });
    EXPECT_NEAR(objective(X, y, w, model.beta, cfg), grid.objective, 1e-6);
}

TEST(Fit, DuplicatedPositivesLeaveSolutionUnchanged) {
    std::mt19937_64 rng(17);
    auto inst = random_binary_instance(rng, 120, 3);
    auto cfg = default_config();
    FeatureDictionary empty_dict;
    auto base = fit(inst.X, inst.y, {}, cfg, empty_dict);

    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < inst.X.rows(); ++i) {
        rows.push_back(i);
        if (inst.y(i) > 0.5) rows.push_back(i);
    }
    Eigen::MatrixXd X2(static_cast<Eigen::Index>(rows.size()), 3);
    Eigen::VectorXd y2(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        X2.row(static_cast<Eigen::Index>(k)) = inst.X.row(rows[k]);
        y2(static_cast<Eigen::Index>(k)) = inst.y(rows[k]);
    }
    auto doubled = fit(X2, y2, {}, cfg, empty_dict);
    EXPECT_LT((doubled.beta - base.beta).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Fit, WeightScaleLeavesArgmaxUnchanged) {
    std::mt19937_64 rng(18);
    auto inst = random_binary_instance(rng, 100, 2);
    auto w = sample_weights(inst.y);
    auto cfg = default_config();
    FeatureDictionary empty_dict;
    auto a = fit_weighted(inst.X, inst.y, w, {}, cfg, empty_dict);
    auto b = fit_weighted(inst.X, inst.y, 3.0 * w, {}, cfg, empty_dict);
    EXPECT_LT((a.beta - b.beta).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Fit, LambdaContinuity) {
    std::mt19937_64 rng(19);
    auto inst = random_binary_instance(rng, 150, 2);
    auto cfg = default_config();
    FeatureDictionary empty_dict;
    auto a = fit(inst.X, inst.y, {}, cfg, empty_dict);
    cfg.lambda += 1e-4;
    auto b = fit(inst.X, inst.y, {}, cfg, empty_dict);
    EXPECT_LT((a.beta - b.beta).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Fit, MonotoneAscentAndFeasibleIterates) {
    std::mt19937_64 rng(20);
    auto inst = random_binary_instance(rng, 80, 3);
    auto cfg = default_config();
    cfg.record_trace = true;
    ConstraintSet chain;
    chain.pairs = {{0, 1}, {1, 2}};
    FeatureDictionary empty_dict;
    auto model = fit(inst.X, inst.y, chain, cfg, empty_dict);
    const auto& trace = model.fit.objective_trace;
    ASSERT_GT(trace.size(), 1u);
    for (std::size_t i = 1; i < trace.size(); ++i) ASSERT_GE(trace[i], trace[i - 1]);
    for (const auto& beta : model.fit.beta_trace) {
        ASSERT_GE(beta.minCoeff(), -1e-12);
        ASSERT_LE(beta(0), beta(1) + 1e-12);
        ASSERT_LE(beta(1), beta(2) + 1e-12);
    }
}

TEST(Fit, ObjectiveIsConcaveAlongFeasibleSegments) {
    std::mt19937_64 rng(21);
    auto inst = random_binary_instance(rng, 60, 3);
    auto w = sample_weights(inst.y);
    auto cfg = default_config();
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd a(3);
        Eigen::VectorXd b(3);
        for (int j = 0; j < 3; ++j) {
            a(j) = unit() * 15.0;
            b(j) = unit() * 15.0;
        }
        Eigen::VectorXd mid = 0.5 * (a + b);
        double fm = objective(inst.X, inst.y, w, mid, cfg);
        double avg = 0.5 * (objective(inst.X, inst.y, w, a, cfg) +
                            objective(inst.X, inst.y, w, b, cfg));
        ASSERT_GE(fm, avg - 1e-12);
    }
}

TEST(Fit, InputValidation) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 2);
    Eigen::VectorXd y_single = Eigen::VectorXd::Ones(4);
    FeatureDictionary empty_dict;
    EXPECT_THROW(fit(X, y_single, {}, default_config(), empty_dict), ValidationError);

    Eigen::VectorXd y(4);
    y << 1, 0, 1, 0;
    ConstraintSet cyclic;
    cyclic.pairs = {{0, 1}, {1, 0}};
    EXPECT_THROW(fit(X, y, cyclic, default_config(), empty_dict), ValidationError);

    ConstraintSet self_loop;
    self_loop.pairs = {{0, 0}};
    EXPECT_THROW(fit(X, y, self_loop, default_config(), empty_dict), ValidationError);

    // a fork is a DAG but not a disjoint chain; rejected as unsupported
    Eigen::MatrixXd X3 = Eigen::MatrixXd::Ones(4, 3);
    ConstraintSet fork;
    fork.pairs = {{0, 1}, {0, 2}};
    EXPECT_THROW(fit(X3, y, fork, default_config(), empty_dict), ValidationError);

    Eigen::MatrixXd Xbad = X;
    Xbad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(fit(Xbad, y, {}, default_config(), empty_dict), ValidationError);

    FitConfig bad = default_config();
    bad.lambda = 1.5;
    EXPECT_THROW(fit(X, y, {}, bad, empty_dict), ValidationError);
}

TEST(Kkt, BoundaryOptimumHasTinyResiduals) {
    // negatives score higher than positives, so the optimum pins beta at 0
    // and the grid optimum coincides with it exactly
    Eigen::MatrixXd X(40, 2);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) {
        bool pos = i < 20;
        X(i, 0) = pos ? 0.0 : 1.0;
        X(i, 1) = pos ? 0.0 : 1.0;
        y(i) = pos ? 1.0 : 0.0;
    }
    auto w = sample_weights(y);
    auto cfg = default_config();
    FeatureDictionary empty_dict;
    auto grid = oracle::grid_search_2d(X, y, w, cfg, [](double, double) { return true; });
    EXPECT_DOUBLE_EQ(grid.b1, 0.0);
    EXPECT_DOUBLE_EQ(grid.b2, 0.0);
    Eigen::VectorXd origin = Eigen::VectorXd::Zero(2);
    auto rep = kkt_residuals(X, y, w, origin, {}, cfg);
    EXPECT_LE(rep.stationarity, 1e-5);
    EXPECT_DOUBLE_EQ(rep.primal_feasibility, 0.0);
    EXPECT_LE(rep.complementary_slackness, 1e-5);

    auto model = fit(X, y, {}, cfg, empty_dict);
    EXPECT_LE(model.fit.kkt.stationarity, 1e-5);
}

TEST(Kkt, PositiveGradientAtZeroIsFlagged) {
    Eigen::MatrixXd X(20, 1);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
        X(i, 0) = i < 10 ? 1.0 : 0.0;
        y(i) = i < 10 ? 1.0 : 0.0;
    }
    auto w = sample_weights(y);
    auto rep = kkt_residuals(X, y, w, Eigen::VectorXd::Zero(1), {}, default_config());
    EXPECT_GT(rep.stationarity, 0.0);
}

TEST(Kkt, FeasiblePointHasZeroPrimalResidual) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 2);
    Eigen::VectorXd y(4);
    y << 1, 0, 1, 0;
    auto w = sample_weights(y);
    ConstraintSet chain;
    chain.pairs = {{0, 1}};
    Eigen::VectorXd beta(2);
    beta << 1.0, 2.0;
    auto rep = kkt_residuals(X, y, w, beta, chain, default_config());
    EXPECT_DOUBLE_EQ(rep.primal_feasibility, 0.0);
    beta << 2.0, 1.0;
    rep = kkt_residuals(X, y, w, beta, chain, default_config());
    EXPECT_DOUBLE_EQ(rep.primal_feasibility, 1.0);
}

TEST(Fit, EndpointLambdaMatchesSingleThresholdLogistic) {
    // instance built so every coefficient stays strictly positive: the
    // constrained optimum then coincides with the unconstrained one and the
    // Newton reference applies
    std::mt19937_64 rng(22);
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Eigen::MatrixXd X(400, 3);
    Eigen::VectorXd y(400);
    for (int i = 0; i < 400; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = unit() < 0.5 ? 0.0 : 1.0;
        double s = 4.0 * X(i, 0) + 5.0 * X(i, 1) + 6.0 * X(i, 2);
        double p = 1.0 / (1.0 + std::exp(-(s - 6.0)));
        y(i) = unit() < p ? 1.0 : 0.0;
    }
    auto w = sample_weights(y);
    FeatureDictionary empty_dict;
    for (double lambda : {1.0, 0.0}) {
        auto cfg = default_config();
        cfg.lambda = lambda;
        double T = lambda == 1.0 ? cfg.t_low : cfg.t_high;
        auto model = fit(X, y, {}, cfg, empty_dict);
        auto reference = oracle::newton_logistic(X, y, w, T);
        ASSERT_GT(reference.minCoeff(), 0.0);
        EXPECT_LT((model.beta - reference).cwiseAbs().maxCoeff(), 1e-4) << "lambda=" << lambda;
    }
}
