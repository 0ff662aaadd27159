#pragma once

#include "cjdesign/benchmark.hpp"
#include "cjdesign/exact_design.hpp"
#include "cjdesign/rbd.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

// Command implementations behind the cjdesign executable. Each command reads
// and writes files, prints a JSON result object on `out`, and throws on error.
namespace cjdesign::commands {

struct GenCovOptions {
    std::string structure = "laplacian";
    Index n = 0;
    double p = 0.5;
    double rho = 0.5;
    std::optional<double> dof;
    std::uint64_t seed = 0;
    bool normalize = false;
    /// User-supplied adjacency (laplacian/expm) instead of a random graph.
    std::optional<std::filesystem::path> adjacency;
    std::filesystem::path out;
};

nlohmann::json gen_cov(const GenCovOptions& opt);

struct DesignOptions {
    std::filesystem::path cov;
    std::string method = "rbd";  ///< exact | rbd | closed
    double tol = kDefaultRbdTolerance;
    std::optional<Index> dmax;
    std::optional<std::uint64_t> seed;  ///< random first column for rbd
    std::filesystem::path out;
    std::optional<std::string> format;  ///< json | csv; default from extension
    bool force_dense = false;
    Index dense_cap = kDefaultDenseCap;
};

nlohmann::json design(const DesignOptions& opt);

struct CompareOptions {
    std::filesystem::path first;
    std::filesystem::path second;
};

nlohmann::json compare(const CompareOptions& opt);

struct BenchmarkOptions {
    BenchmarkConfig config;
    /// Writes <out>.csv and <out>.json.
    std::filesystem::path out;
};

nlohmann::json benchmark(const BenchmarkOptions& opt);

struct SampleOptions {
    std::filesystem::path schedule;
    Index count = 0;
    std::uint64_t seed = 0;
    std::filesystem::path out;
};

nlohmann::json sample(const SampleOptions& opt);

struct FitCommandOptions {
    std::filesystem::path comparisons;
    std::optional<Index> n;
    std::optional<std::filesystem::path> prior_mean;
    std::optional<std::filesystem::path> prior_cov;
    std::optional<double> prior_sd;
    double tol_fit = 1e-8;
    Index max_iter = 100;
    std::optional<std::filesystem::path> out_mean;
    std::optional<std::filesystem::path> out_cov;
};

nlohmann::json bt_fit(const FitCommandOptions& opt);

struct PipelineOptions {
    FitCommandOptions fit;
    double tol = kDefaultRbdTolerance;
    std::optional<Index> dmax;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_schedule;
    /// Also time the dense standard method on the phase-one posterior covariance.
    bool compare_exact = false;
    bool force_dense = false;
};

nlohmann::json pipeline(const PipelineOptions& opt);

/// One-line machine-readable error record.
[[nodiscard]] std::string error_line(const std::string& kind, const std::string& message);

} // namespace cjdesign::commands
