#pragma once

#include "cjdesign/core.hpp"
#include "cjdesign/exact_design.hpp"
#include "cjdesign/sparse_diff.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cjdesign {

enum class RbdInit {
    first_column,   ///< start the greedy loop at column 1
    seeded_random,  ///< start at a column drawn from RbdConfig::seed
};

enum class ResidualUpdate {
    /// Downdate squared column residuals with the newest coefficient row; an
    /// exact recomputation runs automatically once the largest residual is
    /// small enough for cancellation to matter.
    incremental,
    /// Recompute ||E(:,j) - Y T(:,j)|| from scratch after every step.
    recompute,
};

inline constexpr double kDefaultRbdTolerance = 1e-6;
/// Below this tolerance the greedy loop is dominated by rounding error.
inline constexpr double kTightToleranceWarning = 1e-12;

struct RbdConfig {
    double tolerance = kDefaultRbdTolerance;
    /// Cap on the basis size; 0 means N - 1.
    Index d_max = 0;
    RbdInit init = RbdInit::first_column;
    std::uint64_t seed = 0;
    ResidualUpdate residuals = ResidualUpdate::incremental;
};

/// E ~= Y T with Y (M x d) orthonormal columns and T = Y^T E (d x N).
struct ReducedBasis {
    Eigen::MatrixXd basis;
    Eigen::MatrixXd coefficients;
    Index dim = 0;
    /// Largest column residual when the loop stopped.
    double final_residual = 0.0;
    /// True when the loop stopped because the residual fell to the tolerance.
    bool tolerance_reached = false;
    /// Greedy-chosen columns of E in order, 1-based.
    std::vector<Index> selected_columns;
    /// Largest column residual after each accepted basis vector.
    std::vector<double> residual_history;
    std::vector<std::string> warnings;
};

/// Greedy reduced basis decomposition of E with modified Gram-Schmidt. Ties
/// in the largest residual (equal to within a relative 1e-10) go to the
/// smallest column index.
[[nodiscard]] ReducedBasis rbd(const DiffOperator& e, const RbdConfig& cfg = {});

/// Column residual norms ||E(:,j) - Y T(:,j)|| computed from scratch.
[[nodiscard]] Eigen::VectorXd column_residuals(const DiffOperator& e, const Eigen::Ref<const Eigen::MatrixXd>& basis,
                                               const Eigen::Ref<const Eigen::MatrixXd>& coefficients);

/// C~ = T C T^T (d x d).
[[nodiscard]] Eigen::MatrixXd project_covariance(const ReducedBasis& basis, const Eigen::MatrixXd& cov);

/// Eigendecomposition C~ = V Sigma V^T with values sorted nonincreasing and clamped at zero.
struct ProjectedSpectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd rotation;
    Index clamped = 0;
};

[[nodiscard]] ProjectedSpectrum projected_spectrum(const Eigen::MatrixXd& c_tilde);

/// Approximate eigenpairs of delta: values sigma and vectors Y V (M x d).
[[nodiscard]] EigenpairSet approx_eigenpairs(const ReducedBasis& basis, const Eigen::MatrixXd& c_tilde);

} // namespace cjdesign
