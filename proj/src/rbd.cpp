#include "cjdesign/rbd.hpp"

#include "cjdesign/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cjdesign {

namespace {

// Second Gram-Schmidt pass when a pass removes more than this fraction of the norm.
constexpr double kReorthogonalizeRatio = 1e-3;
// Downdated squared residuals lose relative accuracy as they approach
// eps * ||E(:,j)||^2; below this residual they are recomputed exactly.
constexpr double kTieTolerance = 1e-10;
constexpr double kRefreshResidual = 1e-4;
constexpr Index kResidualBlock = 64;

void modified_gram_schmidt(Eigen::Ref<Eigen::VectorXd> v, const Eigen::Ref<const Eigen::MatrixXd>& q) {
    for (Index k = 0; k < q.cols(); ++k) {
        v -= q.col(k).dot(v) * q.col(k);
    }
}

// Max with ties broken towards the smallest index.
// Largest entry; values within a relative kTieTolerance of the maximum count as
// tied and the smallest index wins. Without the tolerance, rounding noise in
// the residuals (which are often exactly tied in exact arithmetic) would decide
// the selection and the two residual update modes could diverge.
std::pair<double, Index> arg_max(const Eigen::VectorXd& v) {
    const double top = v.maxCoeff();
    const double cutoff = top - kTieTolerance * top;
    for (Index k = 0; k < v.size(); ++k) {
        if (v[k] >= cutoff) {
            return {top, k};
        }
    }
    return {top, 0};
}

} // namespace

Eigen::VectorXd column_residuals(const DiffOperator& e, const Eigen::Ref<const Eigen::MatrixXd>& basis,
                                 const Eigen::Ref<const Eigen::MatrixXd>& coefficients) {
    const Index n = e.n_objects();
    const Index m = e.rows();
    if (basis.rows() != m || coefficients.cols() != n || basis.cols() != coefficients.rows()) {
        throw std::invalid_argument("column_residuals: dimension mismatch");
    }
    Eigen::VectorXd out(n);
    if (basis.cols() == 0) {
        out.setConstant(std::sqrt(static_cast<double>(n - 1)));
        return out;
    }
    Eigen::MatrixXd block;
    for (Index start = 0; start < n; start += kResidualBlock) {
        const Index width = std::min(kResidualBlock, n - start);
        block.noalias() = -basis * coefficients.middleCols(start, width);
        for (Index c = 0; c < width; ++c) {
            for (const auto& entry : e.column(start + c + 1)) {
                block(entry.index, c) += entry.value;
            }
            out[start + c] = block.col(c).norm();
        }
    }
    return out;
}

ReducedBasis rbd(const DiffOperator& e, const RbdConfig& cfg) {
    const Index n = e.n_objects();
    const Index m = e.rows();
    const Index d_max = cfg.d_max == 0 ? n - 1 : cfg.d_max;
    if (!(cfg.tolerance > 0.0)) {
        throw std::invalid_argument("rbd: tolerance must be positive");
    }
    if (d_max < 1 || d_max > n - 1) {
        std::ostringstream os;
        os << "rbd: d_max must lie in [1, " << n - 1 << "], got " << d_max;
        throw std::invalid_argument(os.str());
    }

    ReducedBasis out;
    if (cfg.tolerance < kTightToleranceWarning) {
        std::ostringstream os;
        os << "tolerance " << cfg.tolerance << " is below " << kTightToleranceWarning
           << "; residuals at this level are dominated by rounding error";
        out.warnings.push_back(os.str());
    }

    Eigen::MatrixXd y(m, d_max);
    Eigen::MatrixXd t(d_max, n);
    const double column_norm = std::sqrt(static_cast<double>(n - 1));
    Eigen::VectorXd residual_sq = Eigen::VectorXd::Constant(n, static_cast<double>(n - 1));

    Index column = 0;
    if (cfg.init == RbdInit::seeded_random) {
        std::mt19937_64 rng(cfg.seed);
        column = std::uniform_int_distribution<Index>(0, n - 1)(rng);
    }

    Index d = 0;
    double current = std::numeric_limits<double>::infinity();
    Eigen::VectorXd v(m);
    while (d < d_max && current > cfg.tolerance) {
        e.column_into(column, v);
        const auto previous = y.leftCols(d);
        modified_gram_schmidt(v, previous);
        double norm = v.norm();
        if (norm < kReorthogonalizeRatio * column_norm) {
            modified_gram_schmidt(v, previous);
            norm = v.norm();
        }
        if (norm < cfg.tolerance) {
            break;
        }
        y.col(d) = v / norm;
        t.row(d) = e.apply_transpose(y.col(d)).transpose();
        out.selected_columns.push_back(column + 1);
        ++d;

        bool exact = cfg.residuals == ResidualUpdate::recompute;
        if (!exact) {
            residual_sq -= t.row(d - 1).transpose().cwiseAbs2();
            residual_sq = residual_sq.cwiseMax(0.0);
            exact = std::sqrt(residual_sq.maxCoeff()) < kRefreshResidual * column_norm;
        }
        if (exact) {
            residual_sq = column_residuals(e, y.leftCols(d), t.topRows(d)).cwiseAbs2();
        }
        const auto [worst_sq, worst] = arg_max(residual_sq);
        current = std::sqrt(worst_sq);
        column = worst;
        out.residual_history.push_back(current);
    }

    out.dim = d;
    out.final_residual = d == 0 ? column_norm : current;
    out.tolerance_reached = out.final_residual <= cfg.tolerance;
    y.conservativeResize(Eigen::NoChange, d);
    t.conservativeResize(d, Eigen::NoChange);
    out.basis = std::move(y);
    out.coefficients = std::move(t);
    return out;
}

Eigen::MatrixXd project_covariance(const ReducedBasis& basis, const Eigen::MatrixXd& cov) {
    const auto& t = basis.coefficients;
    if (cov.rows() != t.cols() || cov.cols() != t.cols()) {
        throw std::invalid_argument("project_covariance: covariance dimension does not match the basis");
    }
    Eigen::MatrixXd c_tilde = t * cov * t.transpose();
    return 0.5 * (c_tilde + c_tilde.transpose());
}

ProjectedSpectrum projected_spectrum(const Eigen::MatrixXd& c_tilde) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c_tilde);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of the projected covariance failed");
    }
    ProjectedSpectrum out;
    out.values = eig.eigenvalues().reverse();
    out.rotation = eig.eigenvectors().rowwise().reverse();
    for (Index k = 0; k < out.values.size(); ++k) {
        if (out.values[k] < 0.0) {
            out.values[k] = 0.0;
            ++out.clamped;
        }
    }
    return out;
}

EigenpairSet approx_eigenpairs(const ReducedBasis& basis, const Eigen::MatrixXd& c_tilde) {
    if (c_tilde.rows() != basis.dim || c_tilde.cols() != basis.dim) {
        throw std::invalid_argument("approx_eigenpairs: projected covariance does not match the basis");
    }
    ProjectedSpectrum spectrum = projected_spectrum(c_tilde);
    EigenpairSet out;
    out.values = std::move(spectrum.values);
    out.vectors = basis.basis * spectrum.rotation;
    out.clamped = spectrum.clamped;
    return out;
}

} // namespace cjdesign
