#pragma once

#include "cjdesign/core.hpp"
#include "cjdesign/rbd.hpp"

#include <cstdint>
#include <vector>

namespace cjdesign {

/// Approximate design together with the diagnostics of the basis that produced it.
struct ApproxDesign {
    SchedulingDistribution schedule;
    Index dim = 0;
    double final_residual = 0.0;
    std::vector<std::string> warnings;
};

/// Reduced-basis route: build E, run the greedy decomposition, project C,
/// decompose the d x d matrix and weight squared loadings of Y V. The M x M
/// pair covariance is never formed; Y V is produced one row block at a time.
[[nodiscard]] ApproxDesign approx_design(const PriorSpec& spec, const RbdConfig& cfg = {});

/// Schedule part of approx_design.
[[nodiscard]] SchedulingDistribution approx_schedule(const PriorSpec& spec, const RbdConfig& cfg = {});

/// q~_r = sum_c (Y V)_rc^2 sigma_c / sum_c sigma_c, evaluated blockwise.
[[nodiscard]] SchedulingDistribution schedule_from_basis(const ReducedBasis& basis, const ProjectedSpectrum& spectrum,
                                                         double scale);

/// D_KL(S || S~) = sum_r S_r log(S_r / S~_r) with 0 log(0/x) = 0. Returns
/// +infinity when S~ is zero somewhere S is positive. Throws
/// std::invalid_argument when the object counts differ.
[[nodiscard]] double kl_divergence(const SchedulingDistribution& s, const SchedulingDistribution& s_tilde);

/// Draws count independent pairs (i < j, 1-based) by inverse CDF over the r-order.
[[nodiscard]] std::vector<PairIndex> sample_pairs(const SchedulingDistribution& s, Index count, std::uint64_t seed);

} // namespace cjdesign
