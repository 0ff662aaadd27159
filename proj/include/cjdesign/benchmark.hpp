#pragma once

#include "cjdesign/core.hpp"
#include "cjdesign/rbd.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cjdesign {

enum class Structure { laplacian, toeplitz, invwishart, expm };

[[nodiscard]] std::string to_string(Structure s);
/// Accepts laplacian, toeplitz, invwishart (or inverse-wishart), expm.
[[nodiscard]] Structure parse_structure(const std::string& name);

/// Parameters for one generated prior covariance.
struct CovarianceRecipe {
    Structure structure = Structure::laplacian;
    Index n = 8;
    double p = 0.5;        ///< edge probability (laplacian, expm)
    double rho = 0.5;      ///< decay (toeplitz)
    double dof = 0.0;      ///< inverse-Wishart degrees of freedom; 0 means n + 2
    std::uint64_t seed = 0;
    bool normalize = false;
};

[[nodiscard]] Eigen::MatrixXd make_covariance(const CovarianceRecipe& recipe);

/// The structure parameter reported in benchmark rows (p, rho or dof).
[[nodiscard]] double recipe_parameter(const CovarianceRecipe& recipe);

/// splitmix64 finaliser; used to derive per-cell seeds from a base seed.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t x);

/// Monotonic wall-clock seconds spent in f().
template <class F>
double time_seconds(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct BenchmarkConfig {
    std::vector<Structure> structures{Structure::laplacian, Structure::toeplitz, Structure::invwishart};
    std::vector<Index> n_list{8, 16, 32, 64};
    std::vector<double> p_list{0.5};
    double rho = 0.5;
    double dof = 0.0;  ///< 0 means N + 2
    Index reps = 20;
    std::uint64_t seed = 1;
    /// Exact method is skipped for N above this.
    Index skip_exact_above = 150;
    RbdConfig rbd;
    bool normalize = true;
};

struct BenchmarkRow {
    std::string structure;
    Index n = 0;
    double parameter = 0.0;
    std::string method;  ///< "exact" or "rbd"
    Index rep = 0;
    std::uint64_t seed = 0;
    double seconds = 0.0;
    std::optional<double> kl_vs_exact;  ///< rbd rows with an exact counterpart
    std::optional<Index> dim;           ///< rbd rows
    std::string error;
};

struct SlopeFit {
    std::string method;
    double slope = 0.0;
    double intercept = 0.0;
    Index points = 0;
};

struct CellSummary {
    std::string structure;
    Index n = 0;
    double parameter = 0.0;
    std::optional<double> median_exact;
    std::optional<double> median_rbd;
    std::optional<double> speedup;
    std::optional<double> max_kl;
};

struct BenchmarkReport {
    BenchmarkConfig config;
    std::vector<BenchmarkRow> rows;
    std::vector<CellSummary> cells;
    /// Least-squares fit of log(median seconds) on log N, one per method.
    std::vector<SlopeFit> slopes;

    [[nodiscard]] std::optional<SlopeFit> slope(const std::string& method) const;
};

/// Runs every (structure, N, parameter, rep) cell sequentially. Failures are
/// recorded in the row's error field rather than thrown.
[[nodiscard]] BenchmarkReport run_benchmark(const BenchmarkConfig& config);

/// Ordinary least squares of y on x.
[[nodiscard]] SlopeFit fit_log_log(const std::vector<double>& n, const std::vector<double>& seconds);

[[nodiscard]] double median(std::vector<double> values);

void write_benchmark_csv(std::ostream& os, const BenchmarkReport& report);
[[nodiscard]] nlohmann::json benchmark_summary_json(const BenchmarkReport& report);

} // namespace cjdesign
