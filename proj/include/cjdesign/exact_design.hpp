#pragma once

#include "cjdesign/core.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace cjdesign {

/// Distribution of the pairwise quality differences: lambda_diff ~ N(nu, delta).
struct DeltaModel {
    Index n_objects = 0;
    /// nu_r = mu_i - mu_j. Stored for completeness; the design does not use it.
    Eigen::VectorXd nu;
    /// Dense M x M covariance of all pairwise differences.
    Eigen::MatrixXd delta;
};

/// Eigenpairs sorted by nonincreasing value; vectors are the matching columns.
struct EigenpairSet {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    /// Number of negative roundoff eigenvalues set to zero.
    Index clamped = 0;
};

inline constexpr Index kDefaultDenseCap = 256;

/// Guard against materialising the M x M matrix for large N.
struct DenseOptions {
    Index max_objects = kDefaultDenseCap;
    bool force = false;
};

/// Throws MemoryCapError when n exceeds the cap and force is not set.
void check_dense_cap(Index n, const DenseOptions& options);

/// Fills delta entrywise from the prior covariance.
[[nodiscard]] DeltaModel build_delta(const PriorSpec& spec, const DenseOptions& options = {});

/// Full symmetric eigendecomposition of delta (LAPACK dsyevd). Takes the model
/// by value so the matrix storage can be reused for the eigenvectors.
[[nodiscard]] EigenpairSet full_spectrum(DeltaModel model);

/// q_r = sum_c (u_r^(c))^2 psi^(c) / sum_d psi^(d) from any eigenpair set.
/// Throws DegeneratePriorError when the values sum to (relatively) zero.
[[nodiscard]] SchedulingDistribution schedule_from_eigenpairs(Index n_objects, const EigenpairSet& pairs,
                                                              double scale);

/// Standard method: build delta, decompose it fully, weight squared loadings.
[[nodiscard]] SchedulingDistribution exact_schedule(const PriorSpec& spec, const DenseOptions& options = {});

/// q_r = delta_rr / trace(delta) = (C_ii + C_jj - 2 C_ij) / sum_s delta_ss.
/// Equal to exact_schedule because sum_c psi^(c) u^(c) u^(c)^T = delta; needs
/// no decomposition and O(N^2) work.
[[nodiscard]] SchedulingDistribution closed_form_schedule(const PriorSpec& spec);

/// Relative level below which the total pair variance counts as zero. Scaled
/// by N * trace(C), an upper bound on trace(delta).
inline constexpr double kDegenerateTolerance = 1e-12;

/// N * trace(C), the reference scale for degeneracy checks.
[[nodiscard]] double variance_scale(const Eigen::MatrixXd& cov);

/// Number of values above threshold * max(values).
[[nodiscard]] Index numerical_rank(const Eigen::VectorXd& singular_values, double relative_threshold = 1e-10);

} // namespace cjdesign
