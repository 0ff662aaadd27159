#include "cjdesign/bt_model.hpp"

#include "cjdesign/errors.hpp"
#include "cjdesign/scheduler.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <sstream>

namespace cjdesign {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double z = std::exp(x);
    return z / (1.0 + z);
}

void check_objects(Index a, Index b, Index n) {
    if (a < 1 || b < 1 || a > n || b > n || a == b) {
        std::ostringstream os;
        os << "comparison (" << a << ", " << b << ") is not a pair of distinct objects in 1.." << n;
        throw std::invalid_argument(os.str());
    }
}

} // namespace

ComparisonData::ComparisonData(Index n_objects) : n_(n_objects) {
    if (n_ < 2) {
        throw std::invalid_argument("ComparisonData: need at least two objects");
    }
}

void ComparisonData::add_judgement(Index a, Index b, Index winner) {
    if (winner != a && winner != b) {
        throw std::invalid_argument("winner must be one of the compared objects");
    }
    add_counts(a, b, winner == a ? 1.0 : 0.0, 1.0);
}

void ComparisonData::add_counts(Index a, Index b, double wins, double trials) {
    check_objects(a, b, n_);
    if (!(trials >= 0.0) || !(wins >= 0.0) || wins > trials) {
        throw std::invalid_argument("need 0 <= wins <= trials");
    }
    if (a > b) {
        std::swap(a, b);
        wins = trials - wins;
    }
    auto& entry = counts_[{a, b}];
    entry.first += wins;
    entry.second += trials;
}

std::vector<PairRecord> ComparisonData::records() const {
    std::vector<PairRecord> out;
    out.reserve(counts_.size());
    for (const auto& [pair, count] : counts_) {
        out.push_back({pair.first, pair.second, count.first, count.second});
    }
    return out;
}

double ComparisonData::total_trials() const {
    double total = 0.0;
    for (const auto& [pair, count] : counts_) {
        total += count.second;
    }
    return total;
}

BtPosterior::BtPosterior(const ComparisonData& data, const PriorSpec& prior)
    : records_(data.records()), prior_(prior) {
    const Index n = data.n_objects();
    if (prior.covariance.rows() != n || prior.covariance.cols() != n || prior.mean.size() != n) {
        throw std::invalid_argument("prior dimension does not match the number of objects");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (prior.covariance + prior.covariance.transpose()));
    if (llt.info() != Eigen::Success) {
        throw SingularPriorError("prior covariance is not positive definite");
    }
    prior_precision_ = llt.solve(Eigen::MatrixXd::Identity(n, n));
    prior_precision_ = 0.5 * (prior_precision_ + prior_precision_.transpose());
}

double BtPosterior::log_posterior(const Eigen::VectorXd& lambda) const {
    double total = 0.0;
    for (const auto& rec : records_) {
        const double x = lambda[rec.i - 1] - lambda[rec.j - 1];
        // log p = -softplus(-x), log(1 - p) = -softplus(x)
        total -= rec.wins * softplus(-x) + (rec.trials - rec.wins) * softplus(x);
    }
    const Eigen::VectorXd centered = lambda - prior_.mean;
    return total - 0.5 * centered.dot(prior_precision_ * centered);
}

Eigen::VectorXd BtPosterior::gradient(const Eigen::VectorXd& lambda) const {
    Eigen::VectorXd g = -(prior_precision_ * (lambda - prior_.mean));
    for (const auto& rec : records_) {
        const double x = lambda[rec.i - 1] - lambda[rec.j - 1];
        const double score = rec.wins - rec.trials * logistic(x);
        g[rec.i - 1] += score;
        g[rec.j - 1] -= score;
    }
    return g;
}

Eigen::MatrixXd BtPosterior::precision(const Eigen::VectorXd& lambda) const {
    Eigen::MatrixXd h = prior_precision_;
    for (const auto& rec : records_) {
        const Index i = rec.i - 1;
        const Index j = rec.j - 1;
        const double p = logistic(lambda[i] - lambda[j]);
        const double w = rec.trials * p * (1.0 - p);
        h(i, i) += w;
        h(j, j) += w;
        h(i, j) -= w;
        h(j, i) -= w;
    }
    return h;
}

double log_posterior(const Eigen::VectorXd& lambda, const ComparisonData& data, const PriorSpec& prior) {
    return BtPosterior(data, prior).log_posterior(lambda);
}

PosteriorSummary map_fit(const ComparisonData& data, const PriorSpec& prior, const FitOptions& options) {
    const BtPosterior post(data, prior);
    PosteriorSummary summary;
    Eigen::VectorXd lambda = prior.mean;
    double objective = post.log_posterior(lambda);
    Eigen::VectorXd grad = post.gradient(lambda);

    auto finish = [&](bool converged) {
        summary.map_estimate = lambda;
        summary.gradient_norm = grad.cwiseAbs().maxCoeff();
        summary.converged = converged;
        const Eigen::MatrixXd h = post.precision(lambda);
        Eigen::LLT<Eigen::MatrixXd> llt(h);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("posterior precision is not positive definite");
        }
        summary.covariance = llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
        summary.covariance = 0.5 * (summary.covariance + summary.covariance.transpose());
        return summary;
    };

    for (Index iter = 0; iter < options.max_iter; ++iter) {
        if (grad.cwiseAbs().maxCoeff() <= options.tolerance) {
            return finish(true);
        }
        summary.iterations = iter + 1;
        Eigen::LLT<Eigen::MatrixXd> llt(post.precision(lambda));
        if (llt.info() != Eigen::Success) {
            throw NumericalError("posterior precision lost positive definiteness");
        }
        const Eigen::VectorXd step = llt.solve(grad);
        double scale = 1.0;
        bool improved = false;
        // Near the mode the change in the objective drops below its rounding
        // error, so a step whose objective ties within that noise is accepted
        // when it reduces the gradient instead.
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(objective) + 1.0);
        const double grad_norm = grad.cwiseAbs().maxCoeff();
        for (Index h = 0; h <= options.max_halvings; ++h) {
            const Eigen::VectorXd trial = lambda + scale * step;
            const double value = post.log_posterior(trial);
            bool accept = value >= objective;
            Eigen::VectorXd trial_grad;
            if (!accept && value >= objective - noise) {
                trial_grad = post.gradient(trial);
                accept = trial_grad.cwiseAbs().maxCoeff() < grad_norm;
            }
            if (accept) {
                lambda = trial;
                objective = value;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        grad = post.gradient(lambda);
        if (!improved) {
            // No ascent possible at this precision; accept if already stationary.
            break;
        }
    }
    if (grad.cwiseAbs().maxCoeff() <= options.tolerance) {
        return finish(true);
    }
    std::ostringstream os;
    os << "Bradley-Terry fit did not converge within " << options.max_iter << " iterations (gradient norm "
       << grad.cwiseAbs().maxCoeff() << ")";
    throw FitError(os.str(), finish(false));
}

SchedulingDistribution two_phase_schedule(const ComparisonData& phase1, const PriorSpec& prior, const RbdConfig& cfg,
                                          const FitOptions& options) {
    const PosteriorSummary posterior = map_fit(phase1, prior, options);
    return approx_schedule(PriorSpec::centered(posterior.covariance), cfg);
}

} // namespace cjdesign
