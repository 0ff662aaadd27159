#include "cjdesign/exact_design.hpp"

#include "cjdesign/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <limits>
#include <sstream>
#include <vector>

namespace cjdesign {

void check_dense_cap(Index n, const DenseOptions& options) {
    if (n > options.max_objects && !options.force) {
        const Index m = pair_count(n);
        std::ostringstream os;
        os << "refusing to build the dense " << m << " x " << m << " pair covariance: N=" << n
           << " exceeds the cap of " << options.max_objects << " objects (override with force)";
        throw MemoryCapError(os.str(), static_cast<std::size_t>(options.max_objects));
    }
}

DeltaModel build_delta(const PriorSpec& spec, const DenseOptions& options) {
    require_valid_prior(spec);
    const Index n = spec.n_objects();
    if (n < 2) {
        throw std::invalid_argument("build_delta: need at least two objects");
    }
    check_dense_cap(n, options);

    const Index m = pair_count(n);
    std::vector<Index> first;
    std::vector<Index> second;
    first.reserve(static_cast<std::size_t>(m));
    second.reserve(static_cast<std::size_t>(m));
    for (Index r = 1; r <= m; ++r) {
        const auto p = index_to_pair(r, n);
        first.push_back(p.i - 1);
        second.push_back(p.j - 1);
    }

    DeltaModel model;
    model.n_objects = n;
    model.nu.resize(m);
    for (Index r = 0; r < m; ++r) {
        model.nu[r] = spec.mean[first[r]] - spec.mean[second[r]];
    }
    const auto& c = spec.covariance;
    model.delta.resize(m, m);
    for (Index s = 0; s < m; ++s) {
        const Index k = first[s];
        const Index l = second[s];
        for (Index r = s; r < m; ++r) {
            const Index i = first[r];
            const Index j = second[r];
            const double v = c(i, k) - c(i, l) - c(j, k) + c(j, l);
            model.delta(r, s) = v;
            model.delta(s, r) = v;
        }
    }
    return model;
}

EigenpairSet full_spectrum(DeltaModel model) {
    Eigen::MatrixXd& a = model.delta;
    const Index m = a.rows();
    if (m == 0 || a.cols() != m) {
        throw std::invalid_argument("full_spectrum: delta must be square and nonempty");
    }
    if (m > std::numeric_limits<lapack_int>::max()) {
        throw std::invalid_argument("full_spectrum: matrix too large for LAPACK");
    }
    Eigen::VectorXd w(m);
    const auto lm = static_cast<lapack_int>(m);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', lm, a.data(), lm, w.data());
    if (info != 0) {
        std::ostringstream os;
        os << "symmetric eigendecomposition failed (dsyevd info=" << info << ")";
        throw NumericalError(os.str());
    }

    // dsyevd returns ascending order.
    EigenpairSet out;
    out.values = w.reverse();
    a.rowwise().reverseInPlace();
    out.vectors = std::move(a);
    for (Index k = 0; k < m; ++k) {
        if (out.values[k] < 0.0) {
            out.values[k] = 0.0;
            ++out.clamped;
        }
    }
    return out;
}

double variance_scale(const Eigen::MatrixXd& cov) {
    return static_cast<double>(cov.rows()) * std::max(cov.trace(), 0.0);
}

SchedulingDistribution schedule_from_eigenpairs(Index n_objects, const EigenpairSet& pairs, double scale) {
    const double total = pairs.values.sum();
    if (!(total > kDegenerateTolerance * scale)) {
        throw DegeneratePriorError("pair-difference covariance has zero trace; the prior is degenerate");
    }
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(pairs.vectors.rows());
    for (Index c = 0; c < pairs.values.size(); ++c) {
        if (pairs.values[c] > 0.0) {
            weights += pairs.values[c] * pairs.vectors.col(c).array().square().matrix();
        }
    }
    return normalize_weights(n_objects, std::move(weights));
}

SchedulingDistribution exact_schedule(const PriorSpec& spec, const DenseOptions& options) {
    const double scale = variance_scale(spec.covariance);
    const Index n = spec.n_objects();
    const EigenpairSet pairs = full_spectrum(build_delta(spec, options));
    return schedule_from_eigenpairs(n, pairs, scale);
}

SchedulingDistribution closed_form_schedule(const PriorSpec& spec) {
    require_valid_prior(spec);
    const Index n = spec.n_objects();
    if (n < 2) {
        throw std::invalid_argument("closed_form_schedule: need at least two objects");
    }
    const auto& c = spec.covariance;
    Eigen::VectorXd weights(pair_count(n));
    Index r = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            weights[r++] = c(i, i) + c(j, j) - 2.0 * c(i, j);
        }
    }
    if (!(weights.sum() > kDegenerateTolerance * variance_scale(c))) {
        throw DegeneratePriorError("pair-difference covariance has zero trace; the prior is degenerate");
    }
    return normalize_weights(n, std::move(weights));
}

Index numerical_rank(const Eigen::VectorXd& singular_values, double relative_threshold) {
    if (singular_values.size() == 0) {
        return 0;
    }
    const double cutoff = relative_threshold * singular_values.cwiseAbs().maxCoeff();
    return static_cast<Index>((singular_values.array().abs() > cutoff).count());
}

} // namespace cjdesign
