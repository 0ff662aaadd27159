#include "cjdesign/benchmark.hpp"

#include "cjdesign/covgen.hpp"
#include "cjdesign/exact_design.hpp"
#include "cjdesign/io.hpp"
#include "cjdesign/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>

namespace cjdesign {

std::string to_string(Structure s) {
    switch (s) {
    case Structure::laplacian:
        return "laplacian";
    case Structure::toeplitz:
        return "toeplitz";
    case Structure::invwishart:
        return "invwishart";
    case Structure::expm:
        return "expm";
    }
    return "unknown";
}

Structure parse_structure(const std::string& name) {
    if (name == "laplacian") {
        return Structure::laplacian;
    }
    if (name == "toeplitz") {
        return Structure::toeplitz;
    }
    if (name == "invwishart" || name == "inverse-wishart") {
        return Structure::invwishart;
    }
    if (name == "expm") {
        return Structure::expm;
    }
    throw std::invalid_argument("unknown covariance structure '" + name + "'");
}

Eigen::MatrixXd make_covariance(const CovarianceRecipe& recipe) {
    Eigen::MatrixXd c;
    switch (recipe.structure) {
    case Structure::laplacian:
        c = laplacian_covariance(erdos_renyi(recipe.n, recipe.p, recipe.seed));
        break;
    case Structure::toeplitz:
        c = toeplitz_covariance(recipe.n, recipe.rho);
        break;
    case Structure::invwishart:
        c = inverse_wishart_covariance(recipe.n, recipe.dof > 0.0 ? recipe.dof : default_wishart_dof(recipe.n),
                                       recipe.seed);
        break;
    case Structure::expm:
        // Already correlation-normalised.
        return expm_covariance(erdos_renyi(recipe.n, recipe.p, recipe.seed));
    }
    return recipe.normalize ? correlation_normalize(c) : c;
}

double recipe_parameter(const CovarianceRecipe& recipe) {
    switch (recipe.structure) {
    case Structure::laplacian:
    case Structure::expm:
        return recipe.p;
    case Structure::toeplitz:
        return recipe.rho;
    case Structure::invwishart:
        return recipe.dof > 0.0 ? recipe.dof : default_wishart_dof(recipe.n);
    }
    return 0.0;
}

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of an empty set");
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

SlopeFit fit_log_log(const std::vector<double>& n, const std::vector<double>& seconds) {
    if (n.size() != seconds.size() || n.size() < 2) {
        throw std::invalid_argument("fit_log_log: need at least two matching points");
    }
    const auto k = static_cast<double>(n.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double x = std::log(n[i]);
        const double y = std::log(seconds[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    SlopeFit fit;
    fit.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / k;
    fit.points = static_cast<Index>(n.size());
    return fit;
}

std::optional<SlopeFit> BenchmarkReport::slope(const std::string& method) const {
    for (const auto& s : slopes) {
        if (s.method == method) {
            return s;
        }
    }
    return std::nullopt;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    BenchmarkReport report;
    report.config = config;
    const DenseOptions force_dense{kDefaultDenseCap, true};

    for (std::size_t si = 0; si < config.structures.size(); ++si) {
        const Structure structure = config.structures[si];
        const bool graph = structure == Structure::laplacian || structure == Structure::expm;
        const std::vector<double> params = graph ? config.p_list : std::vector<double>{0.0};
        for (const Index n : config.n_list) {
            for (std::size_t pi = 0; pi < params.size(); ++pi) {
                CovarianceRecipe recipe;
                recipe.structure = structure;
                recipe.n = n;
                recipe.p = params[pi];
                recipe.rho = config.rho;
                recipe.dof = config.dof;
                recipe.normalize = config.normalize;
                CellSummary cell{to_string(structure), n, recipe_parameter(recipe), {}, {}, {}, {}};
                std::vector<double> exact_times;
                std::vector<double> rbd_times;

                for (Index rep = 0; rep < config.reps; ++rep) {
                    recipe.seed = mix_seed(config.seed ^ mix_seed((si << 48) ^ (static_cast<std::uint64_t>(n) << 32) ^
                                                                  (pi << 16) ^ static_cast<std::uint64_t>(rep)));
                    BenchmarkRow base{cell.structure, n, cell.parameter, "", rep, recipe.seed, 0.0, {}, {}, ""};
                    std::optional<PriorSpec> spec;
                    try {
                        spec = PriorSpec::centered(make_covariance(recipe));
                    } catch (const std::exception& ex) {
                        base.method = "generate";
                        base.error = ex.what();
                        report.rows.push_back(base);
                        continue;
                    }

                    std::optional<SchedulingDistribution> exact;
                    if (n <= config.skip_exact_above) {
                        BenchmarkRow row = base;
                        row.method = "exact";
                        try {
                            row.seconds = time_seconds([&] { exact = exact_schedule(*spec, force_dense); });
                            exact_times.push_back(row.seconds);
                        } catch (const std::exception& ex) {
                            row.error = ex.what();
                        }
                        report.rows.push_back(row);
                    }

                    BenchmarkRow row = base;
                    row.method = "rbd";
                    try {
                        std::optional<ApproxDesign> approx;
                        row.seconds = time_seconds([&] { approx = approx_design(*spec, config.rbd); });
                        rbd_times.push_back(row.seconds);
                        row.dim = approx->dim;
                        if (exact) {
                            row.kl_vs_exact = kl_divergence(*exact, approx->schedule);
                            cell.max_kl = std::max(cell.max_kl.value_or(0.0), *row.kl_vs_exact);
                        }
                    } catch (const std::exception& ex) {
                        row.error = ex.what();
                    }
                    report.rows.push_back(row);
                }
                if (!exact_times.empty()) {
                    cell.median_exact = median(exact_times);
                }
                if (!rbd_times.empty()) {
                    cell.median_rbd = median(rbd_times);
                }
                if (cell.median_exact && cell.median_rbd && *cell.median_rbd > 0.0) {
                    cell.speedup = *cell.median_exact / *cell.median_rbd;
                }
                report.cells.push_back(cell);
            }
        }
    }

    for (const std::string method : {"exact", "rbd"}) {
        std::map<Index, std::vector<double>> by_n;
        for (const auto& row : report.rows) {
            if (row.method == method && row.error.empty() && row.seconds > 0.0) {
                by_n[row.n].push_back(row.seconds);
            }
        }
        if (by_n.size() < 2) {
            continue;
        }
        std::vector<double> xs, ys;
        for (auto& [n, times] : by_n) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(median(times));
        }
        SlopeFit fit = fit_log_log(xs, ys);
        fit.method = method;
        report.slopes.push_back(fit);
    }
    return report;
}

void write_benchmark_csv(std::ostream& os, const BenchmarkReport& report) {
    os << "structure,n,parameter,method,rep,seed,wall_time_seconds,kl_vs_exact,rbd_dim,error\n";
    for (const auto& row : report.rows) {
        std::string error = row.error;
        std::replace(error.begin(), error.end(), ',', ';');
        os << row.structure << ',' << row.n << ',' << io::format_double(row.parameter) << ',' << row.method << ','
           << row.rep << ',' << row.seed << ',' << io::format_double(row.seconds) << ','
           << (row.kl_vs_exact ? io::format_double(*row.kl_vs_exact) : "") << ','
           << (row.dim ? std::to_string(*row.dim) : "") << ',' << error << '\n';
    }
}

nlohmann::json benchmark_summary_json(const BenchmarkReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells) {
        nlohmann::json j{{"structure", c.structure}, {"n", c.n}, {"parameter", c.parameter}};
        j["median_exact_seconds"] = c.median_exact ? nlohmann::json(*c.median_exact) : nlohmann::json(nullptr);
        j["median_rbd_seconds"] = c.median_rbd ? nlohmann::json(*c.median_rbd) : nlohmann::json(nullptr);
        j["speedup"] = c.speedup ? nlohmann::json(*c.speedup) : nlohmann::json(nullptr);
        j["max_kl"] = c.max_kl ? nlohmann::json(*c.max_kl) : nlohmann::json(nullptr);
        cells.push_back(std::move(j));
    }
    nlohmann::json slopes = nlohmann::json::object();
    for (const auto& s : report.slopes) {
        slopes[s.method] = {{"slope", s.slope}, {"intercept", s.intercept}, {"points", s.points}};
    }
    Index failures = 0;
    for (const auto& row : report.rows) {
        failures += row.error.empty() ? 0 : 1;
    }
    std::vector<Index> n_list(report.config.n_list.begin(), report.config.n_list.end());
    return {{"seed", report.config.seed},
            {"reps", report.config.reps},
            {"n_list", n_list},
            {"skip_exact_above", report.config.skip_exact_above},
            {"tolerance", report.config.rbd.tolerance},
            {"cells", std::move(cells)},
            {"slopes", std::move(slopes)},
            {"failures", failures}};
}

} // namespace cjdesign
