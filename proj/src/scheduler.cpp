#include "cjdesign/scheduler.hpp"

#include "cjdesign/covgen.hpp"
#include "cjdesign/errors.hpp"
#include "cjdesign/exact_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cjdesign {

namespace {
constexpr Index kRowBlock = 4096;
}

SchedulingDistribution schedule_from_basis(const ReducedBasis& basis, const ProjectedSpectrum& spectrum, double scale) {
    const double total = spectrum.values.sum();
    if (!(total > kDegenerateTolerance * scale)) {
        throw DegeneratePriorError("approximate pair-difference covariance has zero trace; the prior is degenerate");
    }
    const Index m = basis.basis.rows();
    const Index n = basis.coefficients.cols();
    Eigen::VectorXd weights(m);
    Eigen::MatrixXd loadings;
    for (Index start = 0; start < m; start += kRowBlock) {
        const Index rows = std::min(kRowBlock, m - start);
        loadings.noalias() = basis.basis.middleRows(start, rows) * spectrum.rotation;
        weights.segment(start, rows).noalias() = loadings.array().square().matrix() * spectrum.values;
    }
    return normalize_weights(n, std::move(weights));
}

ApproxDesign approx_design(const PriorSpec& spec, const RbdConfig& cfg) {
    require_valid_prior(spec);
    const Index n = spec.n_objects();
    const DiffOperator e(n);
    ReducedBasis basis = rbd(e, cfg);
    const Eigen::MatrixXd c_tilde = project_covariance(basis, spec.covariance);
    const ProjectedSpectrum spectrum = projected_spectrum(c_tilde);
    return ApproxDesign{schedule_from_basis(basis, spectrum, variance_scale(spec.covariance)), basis.dim,
                        basis.final_residual, std::move(basis.warnings)};
}

SchedulingDistribution approx_schedule(const PriorSpec& spec, const RbdConfig& cfg) {
    return approx_design(spec, cfg).schedule;
}

double kl_divergence(const SchedulingDistribution& s, const SchedulingDistribution& s_tilde) {
    if (s.n_objects() != s_tilde.n_objects()) {
        throw std::invalid_argument("kl_divergence: distributions are over different numbers of objects");
    }
    const auto& p = s.probs();
    const auto& q = s_tilde.probs();
    // Each term p (x - 1 - log x) + (q - p) with x = q / p is nonnegative, and
    // the extra terms sum to zero for normalised inputs.
    double total = 0.0;
    for (Index r = 0; r < p.size(); ++r) {
        if (p[r] == 0.0) {
            total += q[r];
            continue;
        }
        if (q[r] == 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        const double h = (q[r] - p[r]) / p[r];
        total += p[r] * (h - std::log1p(h));
    }
    return std::max(total, 0.0);
}

std::vector<PairIndex> sample_pairs(const SchedulingDistribution& s, Index count, std::uint64_t seed) {
    if (count < 0) {
        throw std::invalid_argument("sample_pairs: count must be nonnegative");
    }
    const auto& q = s.probs();
    std::vector<double> cdf(static_cast<std::size_t>(q.size()));
    std::partial_sum(q.data(), q.data() + q.size(), cdf.begin());
    const double total = cdf.back();

    Rng rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, total);
    std::vector<PairIndex> out;
    out.reserve(static_cast<std::size_t>(count));
    for (Index k = 0; k < count; ++k) {
        const double u = uniform(rng);
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) {
            // u landed on total through rounding; take the last pair with mass.
            it = std::lower_bound(cdf.begin(), cdf.end(), total);
        }
        const Index r = static_cast<Index>(it - cdf.begin()) + 1;
        out.push_back(index_to_pair(r, s.n_objects()));
    }
    return out;
}

} // namespace cjdesign
