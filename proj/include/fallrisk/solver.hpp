#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fallrisk/features.hpp"
#include "fallrisk/types.hpp"

namespace fallrisk {

/// Ordering constraints beta_j <= beta_k. The supported topology is a set
/// of vertex-disjoint chains, which is what the single-select clinical
/// categories produce; anything else is rejected up front.
struct ConstraintSet {
    std::vector<std::pair<int, int>> pairs;

    static ConstraintSet default_chains(const FeatureDictionary& dict) {
        ConstraintSet c;
        auto chain = [&](std::string_view a, std::string_view b, std::string_view d) {
            c.pairs.emplace_back(dict.index_of(a), dict.index_of(b));
            c.pairs.emplace_back(dict.index_of(b), dict.index_of(d));
        };
        chain("age_60_69", "age_70_79", "age_80_plus");
        chain("med_one_drug", "med_two_plus_drugs", "med_sedated_procedure");
        chain("equip_one", "equip_two", "equip_three_plus");
        return c;
    }

    void validate(int m) const {
        for (auto [j, k] : pairs) {
            if (j < 0 || j >= m || k < 0 || k >= m)
                throw ValidationError("constraint pair references a column outside the dictionary");
            if (j == k) throw ValidationError("constraint pair is a self-loop");
        }
        // cycle check over the pair digraph
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
        for (auto [j, k] : pairs) adj[static_cast<std::size_t>(j)].push_back(k);
        std::vector<int> state(static_cast<std::size_t>(m), 0);  // 0 new, 1 open, 2 done
        std::vector<int> stack;
        for (int s = 0; s < m; ++s) {
            if (state[static_cast<std::size_t>(s)] != 0) continue;
            stack.push_back(s);
            while (!stack.empty()) {
                int v = stack.back();
                if (state[static_cast<std::size_t>(v)] == 0) {
                    state[static_cast<std::size_t>(v)] = 1;
                    for (int nxt : adj[static_cast<std::size_t>(v)]) {
                        if (state[static_cast<std::size_t>(nxt)] == 1)
                            throw ValidationError("constraint pairs contain a cycle");
                        if (state[static_cast<std::size_t>(nxt)] == 0) stack.push_back(nxt);
                    }
                } else {
                    state[static_cast<std::size_t>(v)] = 2;
                    stack.pop_back();
                }
            }
        }
    }
};

struct FitConfig {
    double lambda = 0.5;
    double t_low = 6.0;
    double t_high = 13.0;
    double tol = 1e-8;
    long max_iter = 1000000;
    // backtracking line search parameters
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    double initial_step = 1.0;
    double active_tol = 1e-7;  // increment treated as at-bound below this
    bool record_trace = false;

    void validate() const {
        if (lambda < 0.0 || lambda > 1.0) throw ValidationError("lambda must be in [0, 1]");
        if (tol <= 0.0) throw ValidationError("tol must be positive");
        if (!(t_low < t_high)) throw ValidationError("thresholds must satisfy t_low < t_high");
        if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
    }
};

/// Balanced-class weights: each class sums to one.
inline Eigen::VectorXd sample_weights(const Eigen::VectorXd& y) {
    const auto n = y.size();
    double n1 = y.sum();
    double n0 = static_cast<double>(n) - n1;
    if (n1 == 0.0 || n0 == 0.0)
        throw ValidationError("sample_weights: both classes must be present");
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = y(i) > 0.5 ? 1.0 / n1 : 1.0 / n0;
    return w;
}

namespace detail {

inline double softplus(double z) {
    // ln(1 + e^z) without overflow
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

inline void check_shapes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& w, const Eigen::VectorXd& beta) {
    if (y.size() != X.rows() || w.size() != X.rows() || beta.size() != X.cols())
        throw ValidationError("log_likelihood: shape mismatch");
}

}  // namespace detail

/// Weighted score log-likelihood at threshold T:
///   sum_i w_i [ y_i (X_i b - T) - ln(1 + exp(X_i b - T)) ]
inline double log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                             double T) {
    detail::check_shapes(X, y, w, beta);
    Eigen::VectorXd s = X * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        double z = s(i) - T;
        total += w(i) * (y(i) * z - detail::softplus(z));
    }
    return total;
}

/// lambda * L_{t_low} + (1 - lambda) * L_{t_high}
inline double objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                        const FitConfig& config) {
    Eigen::VectorXd s = X * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        double zl = s(i) - config.t_low;
        double zh = s(i) - config.t_high;
        total += w(i) * (config.lambda * (y(i) * zl - detail::softplus(zl)) +
                         (1.0 - config.lambda) * (y(i) * zh - detail::softplus(zh)));
    }
    return total;
}

/// Analytic gradient of the objective in coefficient space:
///   sum_T weight_T sum_i w_i (y_i - sigma(X_i b - T)) X_i
inline Eigen::VectorXd gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                                const FitConfig& config) {
    detail::check_shapes(X, y, w, beta);
    Eigen::VectorXd s = X * beta;
    Eigen::VectorXd r(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        double rl = y(i) - detail::sigmoid(s(i) - config.t_low);
        double rh = y(i) - detail::sigmoid(s(i) - config.t_high);
        r(i) = w(i) * (config.lambda * rl + (1.0 - config.lambda) * rh);
    }
    return X.transpose() * r;
}

namespace detail {

/// Change of variables mapping the chain-ordered, non-negative feasible
/// polyhedron onto the non-negative orthant: along each chain the new
/// variables are successive differences, so the feasible set becomes
/// gamma >= 0 and projection is a clamp.
class ChainReparam {
public:
    ChainReparam(int m, const ConstraintSet& constraints) : m_(m) {
        constraints.validate(m);
        std::vector<int> succ(static_cast<std::size_t>(m), -1);
        std::vector<int> pred(static_cast<std::size_t>(m), -1);
        for (auto [j, k] : constraints.pairs) {
            if (succ[static_cast<std::size_t>(j)] != -1 &&
                succ[static_cast<std::size_t>(j)] != k)
                throw ValidationError("constraints beyond disjoint chains are not supported");
            if (pred[static_cast<std::size_t>(k)] != -1 &&
                pred[static_cast<std::size_t>(k)] != j)
                throw ValidationError("constraints beyond disjoint chains are not supported");
            succ[static_cast<std::size_t>(j)] = k;
            pred[static_cast<std::size_t>(k)] = j;
        }
        prev_ = std::move(pred);
    }

    Eigen::VectorXd to_increments(const Eigen::VectorXd& beta) const {
        Eigen::VectorXd g(m_);
        for (int j = 0; j < m_; ++j) {
            int p = prev_[static_cast<std::size_t>(j)];
            g(j) = p < 0 ? beta(j) : beta(j) - beta(p);
        }
        return g;
    }

    Eigen::VectorXd to_beta(const Eigen::VectorXd& gamma) const {
        Eigen::VectorXd beta(m_);
        std::vector<char> done(static_cast<std::size_t>(m_), 0);
        for (int j = 0; j < m_; ++j) resolve(j, gamma, beta, done);
        return beta;
    }

    /// Pullback of a coefficient-space gradient: suffix sums along chains.
    Eigen::VectorXd pullback_gradient(const Eigen::VectorXd& g_beta) const {
        Eigen::VectorXd g = g_beta;
        // gamma_j influences beta_j and every later chain member, so the
        // pulled-back component is the suffix sum along the chain.
        std::vector<int> succ(static_cast<std::size_t>(m_), -1);
        for (int j = 0; j < m_; ++j) {
            int p = prev_[static_cast<std::size_t>(j)];
            if (p >= 0) succ[static_cast<std::size_t>(p)] = j;
        }
        // process nodes in reverse topological order of each chain
        for (int j = 0; j < m_; ++j) {
            if (prev_[static_cast<std::size_t>(j)] >= 0) continue;  // not a head
            // collect the chain from head j
            std::vector<int> chain;
            for (int v = j; v >= 0; v = succ[static_cast<std::size_t>(v)]) chain.push_back(v);
            for (int i = static_cast<int>(chain.size()) - 2; i >= 0; --i)
                g(chain[static_cast<std::size_t>(i)]) += g(chain[static_cast<std::size_t>(i + 1)]);
        }
        return g;
    }

private:
    void resolve(int j, const Eigen::VectorXd& gamma, Eigen::VectorXd& beta,
                 std::vector<char>& done) const {
        if (done[static_cast<std::size_t>(j)]) return;
        int p = prev_[static_cast<std::size_t>(j)];
        if (p < 0) {
            beta(j) = gamma(j);
        } else {
            resolve(p, gamma, beta, done);
            beta(j) = beta(p) + gamma(j);
        }
        done[static_cast<std::size_t>(j)] = 1;
    }

    int m_;
    std::vector<int> prev_;  // predecessor in chain, -1 if none
};

}  // namespace detail

struct KktReport {
    double stationarity = 0.0;
    double primal_feasibility = 0.0;
    double complementary_slackness = 0.0;
};

struct FitMetadata {
    double lambda = 0.5;
    long iterations = 0;
    double objective = 0.0;
    bool converged = false;
    std::string stop_reason;
    KktReport kkt;
    bool near_singular_warning = false;
    std::vector<double> objective_trace;        // accepted iterations, when recorded
    std::vector<Eigen::VectorXd> beta_trace;    // likewise
};

/// Fitted additive score: non-negative coefficients plus the fixed category
/// thresholds the score is read against.
struct ScoreModel {
    FeatureDictionary dictionary;
    Eigen::VectorXd beta;
    double t_low = 6.0;
    double t_high = 13.0;
    FitMetadata fit;
};

/// First-order optimality report for `beta` on the given instance, measured
/// in increment space where the feasible set is the orthant.
inline KktReport kkt_residuals(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                               const ConstraintSet& constraints, const FitConfig& config) {
    detail::ChainReparam reparam(static_cast<int>(X.cols()), constraints);
    KktReport rep;
    rep.primal_feasibility = std::max(0.0, -beta.minCoeff());
    for (auto [j, k] : constraints.pairs)
        rep.primal_feasibility = std::max(rep.primal_feasibility, beta(j) - beta(k));

    Eigen::VectorXd gamma = reparam.to_increments(beta);
    Eigen::VectorXd g = reparam.pullback_gradient(gradient(X, y, w, beta, config));
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        double stat = gamma(j) > config.active_tol ? std::abs(g(j)) : std::max(g(j), 0.0);
        rep.stationarity = std::max(rep.stationarity, stat);
        double mu = std::max(-g(j), 0.0);
        rep.complementary_slackness =
            std::max(rep.complementary_slackness, mu * std::max(gamma(j), 0.0));
    }
    return rep;
}

namespace detail {

inline bool near_singular_reduced_hessian(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                                          const ChainReparam& reparam,
                                          const Eigen::VectorXd& gamma, const FitConfig& config) {
    (void)y;
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < gamma.size(); ++j)
        if (gamma(j) > config.active_tol) free.push_back(j);
    if (free.empty()) return false;

    Eigen::VectorXd s = X * beta;
    Eigen::VectorXd d(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        double pl = sigmoid(s(i) - config.t_low);
        double ph = sigmoid(s(i) - config.t_high);
        d(i) = w(i) * (config.lambda * pl * (1.0 - pl) +
                       (1.0 - config.lambda) * ph * (1.0 - ph));
    }
    // columns of X mapped to free increment directions
    Eigen::MatrixXd cols(X.rows(), static_cast<Eigen::Index>(free.size()));
    for (std::size_t c = 0; c < free.size(); ++c) {
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(gamma.size());
        unit(free[c]) = 1.0;
        cols.col(static_cast<Eigen::Index>(c)) = X * reparam.to_beta(unit);
    }
    Eigen::MatrixXd H = cols.transpose() * d.asDiagonal() * cols;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(H);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    return smax <= 0.0 || smin / smax < 1e-10;
}

}  // namespace detail

/// Maximizes the dual-threshold weighted objective over the non-negative,
/// chain-ordered polyhedron. Projected gradient ascent in increment space
/// with Barzilai-Borwein steps safeguarded by an Armijo backtracking line
/// search; iterates are feasible throughout and the objective never
/// decreases across accepted steps.
inline ScoreModel fit_weighted(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w, const ConstraintSet& constraints,
                               const FitConfig& config, const FeatureDictionary& dictionary,
                               std::optional<Eigen::VectorXd> warm_start = std::nullopt) {
    config.validate();
    if (!X.allFinite() || !y.allFinite() || !w.allFinite())
        throw ValidationError("fit: non-finite input data");
    if (X.rows() < 2) throw ValidationError("fit: need at least two rows");
    const int m = static_cast<int>(X.cols());
    detail::ChainReparam reparam(m, constraints);

    Eigen::VectorXd beta0;
    if (warm_start) {
        if (warm_start->size() != m) throw ValidationError("fit: warm start has wrong size");
        beta0 = *warm_start;
    } else if (dictionary.size() == m) {
        beta0 = baseline_beta(dictionary);
    } else {
        beta0 = Eigen::VectorXd::Zero(m);
    }
    Eigen::VectorXd gamma = reparam.to_increments(beta0).cwiseMax(0.0);

    auto eval = [&](const Eigen::VectorXd& g) {
        return objective(X, y, w, reparam.to_beta(g), config);
    };
    auto eval_grad = [&](const Eigen::VectorXd& g) {
        return reparam.pullback_gradient(
            gradient(X, y, w, reparam.to_beta(g), config));
    };

    FitMetadata meta;
    meta.lambda = config.lambda;

    double f = eval(gamma);
    Eigen::VectorXd g = eval_grad(gamma);
    if (config.record_trace) {
        meta.objective_trace.push_back(f);
        meta.beta_trace.push_back(reparam.to_beta(gamma));
    }

    double step = config.initial_step;
    int small_improvement_streak = 0;
    long iter = 0;
    std::string stop;

    for (; iter < config.max_iter; ++iter) {
        double pg_norm = (gamma - (gamma + g).cwiseMax(0.0)).cwiseAbs().maxCoeff();
        if (pg_norm <= config.tol) {
            stop = "projected_gradient";
            meta.converged = true;
            break;
        }

        double alpha = step;
        Eigen::VectorXd trial;
        double f_trial = f;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            trial = (gamma + alpha * g).cwiseMax(0.0);
            double directional = g.dot(trial - gamma);
            f_trial = eval(trial);
            if (f_trial >= f + config.armijo_c * directional && f_trial >= f) {
                accepted = true;
                break;
            }
            alpha *= config.backtrack;
        }
        if (!accepted) {
            stop = "line_search_stalled";
            meta.converged = pg_norm <= 1e-6;
            break;
        }

        Eigen::VectorXd g_new = eval_grad(trial);
        Eigen::VectorXd s = trial - gamma;
        Eigen::VectorXd r = g_new - g;
        double sr = -s.dot(r);  // positive for a concave objective
        double ss = s.dot(s);
        step = (sr > 1e-16 * ss && ss > 0.0) ? std::clamp(ss / sr, 1e-10, 1e10)
                                             : std::min(alpha * 2.0, 1e10);

        double improvement = f_trial - f;
        gamma = std::move(trial);
        g = std::move(g_new);
        f = f_trial;
        if (config.record_trace) {
            meta.objective_trace.push_back(f);
            meta.beta_trace.push_back(reparam.to_beta(gamma));
        }

        if (improvement < config.tol * std::max(1.0, std::abs(f)))
            ++small_improvement_streak;
        else
            small_improvement_streak = 0;
        if (small_improvement_streak >= 2) {
            ++iter;
            stop = "objective_improvement";
            meta.converged = true;
            break;
        }
    }
    if (stop.empty()) stop = "max_iterations";

    ScoreModel model;
    model.dictionary = dictionary;
    model.beta = reparam.to_beta(gamma);
    model.t_low = config.t_low;
    model.t_high = config.t_high;
    meta.iterations = iter;
    meta.objective = f;
    meta.stop_reason = stop;
    meta.kkt = kkt_residuals(X, y, w, model.beta, constraints, config);
    meta.near_singular_warning =
        detail::near_singular_reduced_hessian(X, y, w, model.beta, reparam, gamma, config);
    model.fit = std::move(meta);
    return model;
}

/// Public entry point: derives the balanced-class weights from y.
inline ScoreModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const ConstraintSet& constraints, const FitConfig& config,
                      const FeatureDictionary& dictionary,
                      std::optional<Eigen::VectorXd> warm_start = std::nullopt) {
    return fit_weighted(X, y, sample_weights(y), constraints, config, dictionary,
                        std::move(warm_start));
}

}  // namespace fallrisk
