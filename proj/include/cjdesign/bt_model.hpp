#pragma once

#include "cjdesign/core.hpp"
#include "cjdesign/rbd.hpp"

#include <Eigen/Dense>

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cjdesign {

/// Aggregated outcomes for one unordered pair: i beat j in `wins` of `trials`.
struct PairRecord {
    Index i = 0;  ///< 1-based, i < j
    Index j = 0;
    double wins = 0.0;
    double trials = 0.0;
};

/// Pairwise comparison outcomes reduced to per-pair sufficient statistics.
class ComparisonData {
public:
    explicit ComparisonData(Index n_objects);

    /// One judgement between a and b (1-based, a != b) won by `winner`.
    void add_judgement(Index a, Index b, Index winner);
    /// `wins` victories of a over b in `trials` comparisons.
    void add_counts(Index a, Index b, double wins, double trials);

    [[nodiscard]] Index n_objects() const noexcept { return n_; }
    /// Records sorted by pair, one per observed pair.
    [[nodiscard]] std::vector<PairRecord> records() const;
    [[nodiscard]] double total_trials() const;
    [[nodiscard]] bool empty() const noexcept { return counts_.empty(); }

private:
    Index n_;
    std::map<std::pair<Index, Index>, std::pair<double, double>> counts_;
};

/// Unnormalised log posterior of the Bradley-Terry model with logit(p_ij) =
/// lambda_i - lambda_j and a MVN(mu, C) prior; binomial coefficients and the
/// prior normaliser are dropped.
class BtPosterior {
public:
    /// Throws SingularPriorError if C is not positive definite.
    BtPosterior(const ComparisonData& data, const PriorSpec& prior);

    [[nodiscard]] double log_posterior(const Eigen::VectorXd& lambda) const;
    [[nodiscard]] Eigen::VectorXd gradient(const Eigen::VectorXd& lambda) const;
    /// Negative Hessian: C^{-1} + sum n p (1 - p) (e_i - e_j)(e_i - e_j)^T.
    [[nodiscard]] Eigen::MatrixXd precision(const Eigen::VectorXd& lambda) const;

    [[nodiscard]] const PriorSpec& prior() const noexcept { return prior_; }

private:
    std::vector<PairRecord> records_;
    PriorSpec prior_;
    Eigen::MatrixXd prior_precision_;
};

[[nodiscard]] double log_posterior(const Eigen::VectorXd& lambda, const ComparisonData& data, const PriorSpec& prior);

/// MAP estimate with the Laplace covariance (inverse negative Hessian at the mode).
struct PosteriorSummary {
    Eigen::VectorXd map_estimate;
    Eigen::MatrixXd covariance;
    bool converged = false;
    Index iterations = 0;
    double gradient_norm = 0.0;
};

struct FitOptions {
    double tolerance = 1e-8;  ///< on the infinity norm of the gradient
    Index max_iter = 100;
    Index max_halvings = 30;
};

/// Newton iteration failed to reach the gradient tolerance; carries the last iterate.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, PosteriorSummary last)
        : std::runtime_error(what), last_(std::move(last)) {}
    [[nodiscard]] const PosteriorSummary& last_iterate() const noexcept { return last_; }

private:
    PosteriorSummary last_;
};

/// Damped Newton from the prior mean with step halving on the objective.
[[nodiscard]] PosteriorSummary map_fit(const ComparisonData& data, const PriorSpec& prior, const FitOptions& options = {});

/// Fits phase-one data and returns the reduced-basis schedule for the
/// zero-mean prior whose covariance is the phase-one Laplace covariance.
[[nodiscard]] SchedulingDistribution two_phase_schedule(const ComparisonData& phase1, const PriorSpec& prior,
                                                        const RbdConfig& cfg = {}, const FitOptions& options = {});

} // namespace cjdesign
