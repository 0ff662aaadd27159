#pragma once

#include "cjdesign/core.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <vector>

namespace cjdesign {

/// One stored entry of a sparse vector (0-based position).
struct SparseEntry {
    Index index;
    double value;
};

/// The M x N pairwise difference operator E whose row r is e_i - e_j for
/// (i, j) = index_to_pair(r). Each row holds exactly two nonzeros, so only the
/// two column positions are stored; the values +1/-1 are implicit. Columns are
/// derived analytically from the canonical ordering.
class DiffOperator {
public:
    /// Builds E for n >= 2 objects.
    explicit DiffOperator(Index n_objects);

    [[nodiscard]] Index n_objects() const noexcept { return n_; }
    [[nodiscard]] Index rows() const noexcept { return static_cast<Index>(first_.size()); }
    [[nodiscard]] Index cols() const noexcept { return n_; }
    [[nodiscard]] Index nonzeros() const noexcept { return 2 * rows(); }

    /// 0-based object positions of row r (0-based): +1 at first, -1 at second.
    [[nodiscard]] Index first(Index row) const { return first_[static_cast<std::size_t>(row)]; }
    [[nodiscard]] Index second(Index row) const { return second_[static_cast<std::size_t>(row)]; }

    /// Column k (1-based) as sorted sparse entries: +1 where k is the smaller
    /// object of the pair, -1 where it is the larger. Exactly N-1 entries.
    [[nodiscard]] std::vector<SparseEntry> column(Index k) const;

    /// Writes column k (0-based) densely into out (length M); out is overwritten.
    void column_into(Index k0, Eigen::Ref<Eigen::VectorXd> out) const;

    /// E x (length M).
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    /// E^T v (length N).
    [[nodiscard]] Eigen::VectorXd apply_transpose(const Eigen::Ref<const Eigen::VectorXd>& v) const;

    /// Compressed sparse copy for verification and small problems.
    [[nodiscard]] Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse() const;

private:
    Index n_;
    std::vector<std::int32_t> first_;
    std::vector<std::int32_t> second_;
};

/// Cov(lambda_i - lambda_j, lambda_k - lambda_l) = C_ik - C_il - C_jk + C_jl
/// for (i, j) = pair r and (k, l) = pair s (both 1-based).
[[nodiscard]] double delta_entry(const Eigen::MatrixXd& cov, Index r, Index s);

} // namespace cjdesign
