#include "cjdesign/covgen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace cjdesign {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("matrix is not positive definite");
    }
    return symmetrized(llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols())));
}

} // namespace

AdjacencyMatrix::AdjacencyMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("adjacency matrix must be square");
    }
    for (Index i = 0; i < entries_.rows(); ++i) {
        if (entries_(i, i) != 0.0) {
            throw std::invalid_argument("adjacency matrix must have a zero diagonal");
        }
        for (Index j = 0; j < entries_.cols(); ++j) {
            const double a = entries_(i, j);
            if (a != 0.0 && a != 1.0) {
                throw std::invalid_argument("adjacency entries must be 0 or 1");
            }
            if (a != entries_(j, i)) {
                throw std::invalid_argument("adjacency matrix must be symmetric");
            }
        }
    }
}

Index AdjacencyMatrix::edge_count() const {
    return static_cast<Index>(entries_.sum() / 2.0);
}

AdjacencyMatrix erdos_renyi(Index n, double p, std::uint64_t seed) {
    if (n < 2 || !(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("erdos_renyi: need n >= 2 and 0 <= p <= 1");
    }
    Rng rng(seed);
    std::bernoulli_distribution edge(p);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (edge(rng)) {
                a(i, j) = 1.0;
                a(j, i) = 1.0;
            }
        }
    }
    return AdjacencyMatrix(std::move(a));
}

Eigen::MatrixXd laplacian_covariance(const AdjacencyMatrix& adjacency) {
    const auto& a = adjacency.entries();
    Eigen::MatrixXd precision = -a;
    precision.diagonal() += adjacency.degrees() + Eigen::VectorXd::Ones(a.rows());
    return spd_inverse(precision);
}

Eigen::MatrixXd toeplitz_covariance(Index n, double rho) {
    if (n < 2 || !(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("toeplitz_covariance: need n >= 2 and 0 < rho < 1");
    }
    Eigen::MatrixXd c(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            c(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
        }
    }
    return c;
}

Eigen::MatrixXd inverse_wishart_covariance(Index n, double dof, std::uint64_t seed) {
    if (n < 1 || !(dof > static_cast<double>(n) + 1.0)) {
        throw std::invalid_argument("inverse_wishart_covariance: degrees of freedom must exceed N + 1");
    }
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Bartlett: L lower triangular, L_kk^2 ~ chi^2(dof - k) for 0-based k, N(0,1) below.
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Index k = 0; k < n; ++k) {
        std::chi_squared_distribution<double> chi2(dof - static_cast<double>(k));
        l(k, k) = std::sqrt(chi2(rng));
        for (Index j = 0; j < k; ++j) {
            l(k, j) = normal(rng);
        }
    }
    // W = L L^T, so W^{-1} = L^{-T} L^{-1}.
    const Eigen::MatrixXd l_inv = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    return symmetrized(l_inv.transpose() * l_inv);
}

Eigen::MatrixXd correlation_normalize(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols()) {
        throw std::invalid_argument("correlation_normalize: matrix must be square");
    }
    const Eigen::VectorXd diag = cov.diagonal();
    if ((diag.array() <= 0.0).any()) {
        throw std::invalid_argument("correlation_normalize: diagonal entries must be positive");
    }
    const Eigen::VectorXd scale = diag.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd out(cov.rows(), cov.cols());
    // fill one triangle and mirror it so the result is exactly symmetric
    for (Index j = 0; j < cov.cols(); ++j) {
        out(j, j) = 1.0;
        for (Index i = 0; i < j; ++i) {
            out(i, j) = out(j, i) = 0.5 * (cov(i, j) + cov(j, i)) * scale[i] * scale[j];
        }
    }
    return out;
}

Eigen::MatrixXd symmetric_expm(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("symmetric_expm: eigendecomposition failed");
    }
    const Eigen::MatrixXd& q = eig.eigenvectors();
    const Eigen::VectorXd exp_values = eig.eigenvalues().array().exp();
    return symmetrized(q * exp_values.asDiagonal() * q.transpose());
}

Eigen::MatrixXd expm_covariance(const AdjacencyMatrix& adjacency) {
    return correlation_normalize(symmetric_expm(adjacency.entries()));
}

} // namespace cjdesign
