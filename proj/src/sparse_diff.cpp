#include "cjdesign/sparse_diff.hpp"

#include <limits>
#include <stdexcept>

namespace cjdesign {

DiffOperator::DiffOperator(Index n_objects) : n_(n_objects) {
    if (n_ < 2) {
        throw std::invalid_argument("DiffOperator: need at least two objects");
    }
    if (n_ > std::numeric_limits<std::int32_t>::max()) {
        throw std::invalid_argument("DiffOperator: too many objects");
    }
    const auto m = static_cast<std::size_t>(pair_count(n_));
    first_.reserve(m);
    second_.reserve(m);
    for (Index i = 0; i < n_; ++i) {
        for (Index j = i + 1; j < n_; ++j) {
            first_.push_back(static_cast<std::int32_t>(i));
            second_.push_back(static_cast<std::int32_t>(j));
        }
    }
}

std::vector<SparseEntry> DiffOperator::column(Index k) const {
    if (k < 1 || k > n_) {
        throw std::invalid_argument("DiffOperator::column: index out of range");
    }
    std::vector<SparseEntry> out;
    out.reserve(static_cast<std::size_t>(n_ - 1));
    // Pairs (i, k) with i < k come first in r-order, then the block (k, j).
    for (Index i = 1; i < k; ++i) {
        out.push_back({pair_to_index(i, k, n_) - 1, -1.0});
    }
    for (Index j = k + 1; j <= n_; ++j) {
        out.push_back({pair_to_index(k, j, n_) - 1, 1.0});
    }
    return out;
}

void DiffOperator::column_into(Index k0, Eigen::Ref<Eigen::VectorXd> out) const {
    out.setZero();
    for (const auto& e : column(k0 + 1)) {
        out[e.index] = e.value;
    }
}

Eigen::VectorXd DiffOperator::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != n_) {
        throw std::invalid_argument("DiffOperator::apply: dimension mismatch");
    }
    Eigen::VectorXd out(rows());
    for (Index r = 0; r < rows(); ++r) {
        out[r] = x[first(r)] - x[second(r)];
    }
    return out;
}

Eigen::VectorXd DiffOperator::apply_transpose(const Eigen::Ref<const Eigen::VectorXd>& v) const {
    if (v.size() != rows()) {
        throw std::invalid_argument("DiffOperator::apply_transpose: dimension mismatch");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (Index r = 0; r < rows(); ++r) {
        out[first(r)] += v[r];
        out[second(r)] -= v[r];
    }
    return out;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> DiffOperator::to_sparse() const {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nonzeros()));
    for (Index r = 0; r < rows(); ++r) {
        triplets.emplace_back(r, first(r), 1.0);
        triplets.emplace_back(r, second(r), -1.0);
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> e(rows(), n_);
    e.setFromTriplets(triplets.begin(), triplets.end());
    return e;
}

double delta_entry(const Eigen::MatrixXd& cov, Index r, Index s) {
    const Index n = cov.rows();
    const PairIndex a = index_to_pair(r, n);
    const PairIndex b = index_to_pair(s, n);
    const Index i = a.i - 1;
    const Index j = a.j - 1;
    const Index k = b.i - 1;
    const Index l = b.j - 1;
    return cov(i, k) - cov(i, l) - cov(j, k) + cov(j, l);
}

} // namespace cjdesign
