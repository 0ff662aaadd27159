#include "cjdesign/core.hpp"

#include "cjdesign/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cjdesign {

namespace {

// Offset of the block of pairs whose first element is i: r(i, j) = offset + j - i.
constexpr Index block_offset(Index i, Index n) noexcept {
    return pair_count(n) - (n - i + 1) * (n - i) / 2;
}

} // namespace

Index pair_to_index(Index i, Index j, Index n) {
    if (i < 1 || j > n || i >= j) {
        std::ostringstream os;
        os << "pair_to_index: need 1 <= i < j <= N, got i=" << i << " j=" << j << " N=" << n;
        throw std::invalid_argument(os.str());
    }
    return block_offset(i, n) + j - i;
}

PairIndex index_to_pair(Index r, Index n) {
    const Index m = pair_count(n);
    if (n < 2 || r < 1 || r > m) {
        std::ostringstream os;
        os << "index_to_pair: need 1 <= r <= " << m << ", got r=" << r;
        throw std::invalid_argument(os.str());
    }
    // Number of pairs at or after r is m - r + 1; blocks from the end have sizes 1, 2, ...
    // Solve k(k+1)/2 >= m - r + 1 for the block counted from the end.
    const double tail = static_cast<double>(m - r + 1);
    auto k = static_cast<Index>(std::ceil((std::sqrt(8.0 * tail + 1.0) - 1.0) / 2.0));
    while (k * (k + 1) / 2 < m - r + 1) {
        ++k;
    }
    while (k > 1 && (k - 1) * k / 2 >= m - r + 1) {
        --k;
    }
    const Index i = n - k;
    const Index j = r - block_offset(i, n) + i;
    return PairIndex{i, j, r};
}

PriorSpec PriorSpec::centered(Eigen::MatrixXd cov) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(cov.rows());
    return PriorSpec(std::move(mu), std::move(cov));
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << (ok() ? "valid" : "invalid") << " prior (symmetry error " << symmetry_error
       << ", min eigenvalue " << min_eigenvalue << ")";
    for (const auto& m : messages) {
        os << "; " << m;
    }
    return os.str();
}

ValidationReport validate_prior(const PriorSpec& spec) {
    ValidationReport report;
    const auto& c = spec.covariance;
    if (c.rows() != c.cols() || c.rows() == 0) {
        report.dimensions_ok = false;
        report.messages.push_back("covariance must be square and nonempty");
        return report;
    }
    if (spec.mean.size() != c.rows()) {
        report.dimensions_ok = false;
        report.messages.push_back("mean length does not match covariance dimension");
    }
    if (!c.allFinite()) {
        report.symmetric = false;
        report.psd = false;
        report.messages.push_back("covariance has non-finite entries");
        return report;
    }

    const double norm = c.cwiseAbs().rowwise().sum().maxCoeff();
    const double asym = (c - c.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
    report.symmetry_error = norm > 0.0 ? asym / norm : asym;
    if (report.symmetry_error > kSymmetryTolerance) {
        report.symmetric = false;
        report.messages.push_back("covariance is not symmetric");
    }

    const Eigen::MatrixXd sym = 0.5 * (c + c.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& values = eig.eigenvalues();
    report.min_eigenvalue = values.minCoeff();
    const double radius = values.cwiseAbs().maxCoeff();
    if (report.min_eigenvalue < -kPsdTolerance * radius) {
        report.psd = false;
        std::ostringstream os;
        os << "covariance is not positive semidefinite (eigenvalue " << report.min_eigenvalue << ")";
        report.messages.push_back(os.str());
    }
    return report;
}

void require_valid_prior(const PriorSpec& spec) {
    const auto report = validate_prior(spec);
    if (!report.ok()) {
        throw std::invalid_argument(report.summary());
    }
}

SchedulingDistribution::SchedulingDistribution(Index n_objects, Eigen::VectorXd probs)
    : n_objects_(n_objects), probs_(std::move(probs)) {
    if (n_objects_ < 2 || probs_.size() != pair_count(n_objects_)) {
        throw std::invalid_argument("scheduling distribution needs N >= 2 and N(N-1)/2 probabilities");
    }
    if (!probs_.allFinite() || probs_.minCoeff() < 0.0) {
        throw std::invalid_argument("scheduling probabilities must be finite and nonnegative");
    }
    if (std::abs(probs_.sum() - 1.0) > 1e-10) {
        throw std::invalid_argument("scheduling probabilities must sum to 1");
    }
}

double SchedulingDistribution::q(Index i, Index j) const {
    return probs_[pair_to_index(i, j, n_objects_) - 1];
}

double SchedulingDistribution::at(Index r) const {
    if (r < 1 || r > probs_.size()) {
        throw std::invalid_argument("linear index out of range");
    }
    return probs_[r - 1];
}

SchedulingDistribution normalize_weights(Index n_objects, Eigen::VectorXd weights) {
    weights = weights.cwiseMax(0.0);
    const double total = weights.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw DegeneratePriorError("all pair variances are zero; the prior is degenerate");
    }
    weights /= total;
    return SchedulingDistribution(n_objects, std::move(weights));
}

} // namespace cjdesign
