#pragma once

#include "cjdesign/bt_model.hpp"
#include "cjdesign/core.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

namespace cjdesign::io {

/// Dense header-free CSV, one matrix row per line, 17 significant digits.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);
[[nodiscard]] Eigen::MatrixXd read_matrix_csv(std::istream& is);

/// Matrix Market coordinate format (real/integer/pattern, general/symmetric).
void write_matrix_market(std::ostream& os, const Eigen::MatrixXd& m);
[[nodiscard]] Eigen::MatrixXd read_matrix_market(std::istream& is);

/// Chooses the format from the extension: .mtx is Matrix Market, anything else CSV.
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
[[nodiscard]] Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

/// Column vector stored one value per line (a single CSV row is also accepted).
[[nodiscard]] Eigen::VectorXd load_vector(const std::filesystem::path& path);
void save_vector(const std::filesystem::path& path, const Eigen::VectorXd& v);

/// Extra fields written under "meta" in the schedule JSON.
struct ScheduleMeta {
    std::string method;
    std::optional<double> tol;
    std::optional<Index> d;
    std::optional<double> residual;
    std::optional<double> seconds;
};

[[nodiscard]] nlohmann::json schedule_to_json(const SchedulingDistribution& s, const ScheduleMeta& meta);
[[nodiscard]] SchedulingDistribution schedule_from_json(const nlohmann::json& j);

/// CSV with header r,i,j,q in canonical order.
void write_schedule_csv(std::ostream& os, const SchedulingDistribution& s);
[[nodiscard]] SchedulingDistribution read_schedule_csv(std::istream& is);

/// .csv selects CSV, anything else JSON.
void save_schedule(const std::filesystem::path& path, const SchedulingDistribution& s, const ScheduleMeta& meta);
[[nodiscard]] SchedulingDistribution load_schedule(const std::filesystem::path& path);

/// Comparison rows with header i,j,y,n (aggregated counts) or i,j,winner (one
/// judgement per row). n_objects = 0 infers N from the largest index seen.
[[nodiscard]] ComparisonData read_comparisons(std::istream& is, Index n_objects = 0);
[[nodiscard]] ComparisonData load_comparisons(const std::filesystem::path& path, Index n_objects = 0);

/// Formats with 17 significant digits so doubles round-trip exactly.
[[nodiscard]] std::string format_double(double v);

} // namespace cjdesign::io
