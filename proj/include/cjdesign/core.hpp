#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cjdesign {

using Index = std::int64_t;

/// Number of unordered pairs among n objects, M = n(n-1)/2.
[[nodiscard]] constexpr Index pair_count(Index n) noexcept { return n * (n - 1) / 2; }

/// An unordered pair {i, j} with i < j, together with its position r in the
/// canonical ordering (1,2), (1,3), ..., (1,N), (2,3), ..., (N-1,N).
/// All three indices are 1-based.
struct PairIndex {
    Index i = 0;
    Index j = 0;
    Index r = 0;

    friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

/// r = N(N-1)/2 - (N-i+1)(N-i)/2 + j - i. Throws std::invalid_argument unless
/// 1 <= i < j <= n.
[[nodiscard]] Index pair_to_index(Index i, Index j, Index n);

/// Inverse of pair_to_index. Throws std::invalid_argument unless 1 <= r <= M.
[[nodiscard]] PairIndex index_to_pair(Index r, Index n);

/// Prior over the N object qualities: lambda ~ MVN(mean, covariance).
struct PriorSpec {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    PriorSpec() = default;
    PriorSpec(Eigen::VectorXd mu, Eigen::MatrixXd cov)
        : mean(std::move(mu)), covariance(std::move(cov)) {}

    /// Zero-mean prior with the given covariance.
    static PriorSpec centered(Eigen::MatrixXd cov);

    [[nodiscard]] Index n_objects() const noexcept { return covariance.rows(); }
};

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kPsdTolerance = 1e-8;

struct ValidationReport {
    bool dimensions_ok = true;
    bool symmetric = true;
    bool psd = true;
    /// ||C - C^T||_inf / ||C||_inf
    double symmetry_error = 0.0;
    double min_eigenvalue = 0.0;
    std::vector<std::string> messages;

    [[nodiscard]] bool ok() const noexcept { return dimensions_ok && symmetric && psd; }
    [[nodiscard]] std::string summary() const;
};

/// Checks dimensions, relative symmetry (1e-10, infinity norm) and numerical
/// positive semidefiniteness (min eigenvalue >= -1e-8 * spectral radius).
[[nodiscard]] ValidationReport validate_prior(const PriorSpec& spec);

/// Throws std::invalid_argument carrying the report summary if validation fails.
void require_valid_prior(const PriorSpec& spec);

/// Probability over all unordered pairs, stored in canonical r-order.
class SchedulingDistribution {
public:
    /// Validates q_r >= 0 and |sum - 1| <= 1e-10; throws std::invalid_argument.
    SchedulingDistribution(Index n_objects, Eigen::VectorXd probs);

    [[nodiscard]] Index n_objects() const noexcept { return n_objects_; }
    [[nodiscard]] Index size() const noexcept { return probs_.size(); }
    [[nodiscard]] const Eigen::VectorXd& probs() const noexcept { return probs_; }
    /// Probability of pair (i, j), 1-based, i < j.
    [[nodiscard]] double q(Index i, Index j) const;
    /// Probability at linear index r (1-based).
    [[nodiscard]] double at(Index r) const;

private:
    Index n_objects_;
    Eigen::VectorXd probs_;
};

/// Normalizes nonnegative weights (e.g. pair variances) into a distribution.
/// Negative entries within roundoff are clamped to zero.
[[nodiscard]] SchedulingDistribution normalize_weights(Index n_objects, Eigen::VectorXd weights);

} // namespace cjdesign
