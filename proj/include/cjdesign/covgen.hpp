#pragma once

#include "cjdesign/core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace cjdesign {

/// All random draws in the library go through this engine so that a seed
/// reproduces results on a given build.
using Rng = std::mt19937_64;

/// Binary symmetric adjacency matrix with zero diagonal.
class AdjacencyMatrix {
public:
    /// Throws std::invalid_argument unless entries are 0/1, symmetric, zero diagonal.
    explicit AdjacencyMatrix(Eigen::MatrixXd entries);

    [[nodiscard]] Index n_nodes() const noexcept { return entries_.rows(); }
    [[nodiscard]] const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    [[nodiscard]] Eigen::VectorXd degrees() const { return entries_.rowwise().sum(); }
    [[nodiscard]] Index edge_count() const;

private:
    Eigen::MatrixXd entries_;
};

/// G(n, p): each unordered pair gets an edge independently with probability p.
[[nodiscard]] AdjacencyMatrix erdos_renyi(Index n, double p, std::uint64_t seed);

/// Regularised graph Laplacian prior (D - A + I)^{-1}.
[[nodiscard]] Eigen::MatrixXd laplacian_covariance(const AdjacencyMatrix& adjacency);

/// AR(1)-style Toeplitz covariance C_ij = rho^|i-j|.
[[nodiscard]] Eigen::MatrixXd toeplitz_covariance(Index n, double rho = 0.5);

/// One draw from Inverse-Wishart(I, dof) via the Bartlett decomposition of the
/// corresponding Wishart(I, dof) draw. Requires dof > n + 1.
[[nodiscard]] Eigen::MatrixXd inverse_wishart_covariance(Index n, double dof, std::uint64_t seed);

/// Default degrees of freedom for inverse_wishart_covariance: n + 2.
[[nodiscard]] inline double default_wishart_dof(Index n) { return static_cast<double>(n) + 2.0; }

/// D^{-1/2} C D^{-1/2} with D = diag(C). Requires a strictly positive diagonal.
[[nodiscard]] Eigen::MatrixXd correlation_normalize(const Eigen::MatrixXd& cov);

/// Correlation-normalised matrix exponential of the adjacency matrix,
/// computed as Q exp(diag) Q^T from the symmetric eigendecomposition.
[[nodiscard]] Eigen::MatrixXd expm_covariance(const AdjacencyMatrix& adjacency);

/// exp(S) for symmetric S by eigendecomposition.
[[nodiscard]] Eigen::MatrixXd symmetric_expm(const Eigen::MatrixXd& sym);

} // namespace cjdesign
