#include "cjdesign/commands.hpp"

#include "cjdesign/bt_model.hpp"
#include "cjdesign/covgen.hpp"
#include "cjdesign/errors.hpp"
#include "cjdesign/io.hpp"
#include "cjdesign/scheduler.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cjdesign::commands {

namespace {

nlohmann::json validation_json(const ValidationReport& report) {
    return {{"valid", report.ok()},
            {"symmetry_error", report.symmetry_error},
            {"min_eigenvalue", report.min_eigenvalue},
            {"messages", report.messages}};
}

RbdConfig rbd_config(double tol, const std::optional<Index>& dmax, const std::optional<std::uint64_t>& seed) {
    RbdConfig cfg;
    cfg.tolerance = tol;
    cfg.d_max = dmax.value_or(0);
    if (seed) {
        cfg.init = RbdInit::seeded_random;
        cfg.seed = *seed;
    }
    return cfg;
}

void write_schedule(const std::filesystem::path& path, const std::optional<std::string>& format,
                    const SchedulingDistribution& s, const io::ScheduleMeta& meta) {
    if (!format) {
        io::save_schedule(path, s, meta);
        return;
    }
    if (*format != "json" && *format != "csv") {
        throw std::invalid_argument("--format must be json or csv");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    if (*format == "csv") {
        io::write_schedule_csv(out, s);
    } else {
        out << io::schedule_to_json(s, meta).dump(2) << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing '" + path.string() + "'");
    }
}

PriorSpec fit_prior(const FitCommandOptions& opt, Index n) {
    Eigen::MatrixXd cov;
    if (opt.prior_cov) {
        if (opt.prior_sd) {
            throw std::invalid_argument("give either --prior-cov or --prior-sd, not both");
        }
        cov = io::load_matrix(*opt.prior_cov);
    } else {
        const double sd = opt.prior_sd.value_or(1.0);
        if (!(sd > 0.0)) {
            throw std::invalid_argument("--prior-sd must be positive");
        }
        cov = Eigen::MatrixXd::Identity(n, n) * (sd * sd);
    }
    Eigen::VectorXd mean = opt.prior_mean ? io::load_vector(*opt.prior_mean) : Eigen::VectorXd::Zero(cov.rows());
    if (cov.rows() != n || mean.size() != n) {
        throw std::invalid_argument("prior dimension does not match the number of objects");
    }
    return PriorSpec(std::move(mean), std::move(cov));
}

Index infer_objects(const FitCommandOptions& opt) {
    if (opt.n) {
        return *opt.n;
    }
    if (opt.prior_cov) {
        return io::load_matrix(*opt.prior_cov).rows();
    }
    return 0;
}

nlohmann::json posterior_json(const PosteriorSummary& post) {
    return {{"converged", post.converged},
            {"iterations", post.iterations},
            {"gradient_norm", post.gradient_norm},
            {"map_estimate", std::vector<double>(post.map_estimate.data(),
                                                 post.map_estimate.data() + post.map_estimate.size())}};
}

struct FitOutcome {
    PosteriorSummary posterior;
    double seconds = 0.0;
    Index n = 0;
    double comparisons = 0.0;
};

FitOutcome run_fit(const FitCommandOptions& opt) {
    FitOutcome outcome;
    std::optional<PriorSpec> prior;
    std::optional<PosteriorSummary> post;
    // Reading the data counts towards the fitting stage.
    outcome.seconds = time_seconds([&] {
        const ComparisonData data = io::load_comparisons(opt.comparisons, infer_objects(opt));
        outcome.n = data.n_objects();
        outcome.comparisons = data.total_trials();
        prior = fit_prior(opt, data.n_objects());
        post = map_fit(data, *prior, FitOptions{opt.tol_fit, opt.max_iter, 30});
    });
    outcome.posterior = std::move(*post);
    return outcome;
}

} // namespace

std::string error_line(const std::string& kind, const std::string& message) {
    return nlohmann::json{{"error", kind}, {"message", message}}.dump();
}

nlohmann::json gen_cov(const GenCovOptions& opt) {
    if (opt.out.empty()) {
        throw std::invalid_argument("--out is required");
    }
    const Structure structure = parse_structure(opt.structure);
    Eigen::MatrixXd cov;
    if (opt.adjacency) {
        if (structure != Structure::laplacian && structure != Structure::expm) {
            throw std::invalid_argument("--adjacency applies to the laplacian and expm structures only");
        }
        const AdjacencyMatrix a(io::load_matrix(*opt.adjacency));
        cov = structure == Structure::laplacian ? laplacian_covariance(a) : expm_covariance(a);
        if (opt.normalize && structure == Structure::laplacian) {
            cov = correlation_normalize(cov);
        }
    } else {
        if (opt.n < 2) {
            throw std::invalid_argument("--n must be at least 2");
        }
        CovarianceRecipe recipe;
        recipe.structure = structure;
        recipe.n = opt.n;
        recipe.p = opt.p;
        recipe.rho = opt.rho;
        recipe.dof = opt.dof.value_or(0.0);
        recipe.seed = opt.seed;
        recipe.normalize = opt.normalize;
        cov = make_covariance(recipe);
    }
    io::save_matrix(opt.out, cov);
    const auto report = validate_prior(PriorSpec::centered(cov));
    return {{"command", "gen-cov"},
            {"structure", to_string(structure)},
            {"n", cov.rows()},
            {"seed", opt.seed},
            {"out", opt.out.string()},
            {"validation", validation_json(report)}};
}

nlohmann::json design(const DesignOptions& opt) {
    if (opt.out.empty()) {
        throw std::invalid_argument("--out is required");
    }
    const PriorSpec spec = PriorSpec::centered(io::load_matrix(opt.cov));
    require_valid_prior(spec);
    const Index n = spec.n_objects();

    io::ScheduleMeta meta;
    meta.method = opt.method;
    std::optional<SchedulingDistribution> schedule;
    nlohmann::json result{{"command", "design"}, {"method", opt.method}, {"n", n}};
    if (opt.method == "exact") {
        const DenseOptions dense{opt.dense_cap, opt.force_dense};
        check_dense_cap(n, dense);
        meta.seconds = time_seconds([&] { schedule = exact_schedule(spec, dense); });
    } else if (opt.method == "closed") {
        meta.seconds = time_seconds([&] { schedule = closed_form_schedule(spec); });
    } else if (opt.method == "rbd") {
        const RbdConfig cfg = rbd_config(opt.tol, opt.dmax, opt.seed);
        std::optional<ApproxDesign> approx;
        meta.seconds = time_seconds([&] { approx = approx_design(spec, cfg); });
        meta.tol = opt.tol;
        meta.d = approx->dim;
        meta.residual = approx->final_residual;
        result["warnings"] = approx->warnings;
        schedule = std::move(approx->schedule);
    } else {
        throw std::invalid_argument("--method must be exact, rbd or closed");
    }
    write_schedule(opt.out, opt.format, *schedule, meta);
    result["seconds"] = *meta.seconds;
    if (meta.d) {
        result["d"] = *meta.d;
        result["residual"] = *meta.residual;
    }
    result["out"] = opt.out.string();
    return result;
}

nlohmann::json compare(const CompareOptions& opt) {
    const SchedulingDistribution a = io::load_schedule(opt.first);
    const SchedulingDistribution b = io::load_schedule(opt.second);
    if (a.n_objects() != b.n_objects()) {
        throw std::invalid_argument("schedules cover different numbers of objects (" + std::to_string(a.n_objects()) +
                                    " vs " + std::to_string(b.n_objects()) + ")");
    }
    const auto as_json = [](double v) { return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v); };
    return {{"command", "compare"},
            {"n", a.n_objects()},
            {"kl_forward", as_json(kl_divergence(a, b))},
            {"kl_backward", as_json(kl_divergence(b, a))},
            {"max_abs_diff", (a.probs() - b.probs()).cwiseAbs().maxCoeff()}};
}

nlohmann::json benchmark(const BenchmarkOptions& opt) {
    if (opt.out.empty()) {
        throw std::invalid_argument("--out is required");
    }
    const BenchmarkReport report = run_benchmark(opt.config);
    auto csv_path = opt.out;
    csv_path += ".csv";
    auto json_path = opt.out;
    json_path += ".json";
    {
        std::ofstream csv(csv_path);
        if (!csv) {
            throw std::runtime_error("cannot open '" + csv_path.string() + "' for writing");
        }
        write_benchmark_csv(csv, report);
    }
    nlohmann::json summary = benchmark_summary_json(report);
    {
        std::ofstream js(json_path);
        if (!js) {
            throw std::runtime_error("cannot open '" + json_path.string() + "' for writing");
        }
        js << summary.dump(2) << '\n';
    }
    summary["command"] = "benchmark";
    summary["csv"] = csv_path.string();
    summary["json"] = json_path.string();
    return summary;
}

nlohmann::json sample(const SampleOptions& opt) {
    if (opt.out.empty()) {
        throw std::invalid_argument("--out is required");
    }
    const SchedulingDistribution s = io::load_schedule(opt.schedule);
    const auto draws = sample_pairs(s, opt.count, opt.seed);
    std::ofstream out(opt.out);
    if (!out) {
        throw std::runtime_error("cannot open '" + opt.out.string() + "' for writing");
    }
    out << "index,i,j\n";
    for (std::size_t k = 0; k < draws.size(); ++k) {
        out << k + 1 << ',' << draws[k].i << ',' << draws[k].j << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing '" + opt.out.string() + "'");
    }
    return {{"command", "sample"}, {"n", s.n_objects()}, {"count", opt.count}, {"seed", opt.seed},
            {"out", opt.out.string()}};
}

nlohmann::json bt_fit(const FitCommandOptions& opt) {
    const FitOutcome fit = run_fit(opt);
    if (opt.out_mean) {
        io::save_vector(*opt.out_mean, fit.posterior.map_estimate);
    }
    if (opt.out_cov) {
        io::save_matrix(*opt.out_cov, fit.posterior.covariance);
    }
    nlohmann::json result = posterior_json(fit.posterior);
    result["command"] = "bt-fit";
    result["n"] = fit.n;
    result["comparisons"] = fit.comparisons;
    result["seconds"] = fit.seconds;
    return result;
}

nlohmann::json pipeline(const PipelineOptions& opt) {
    if (opt.out_schedule.empty()) {
        throw std::invalid_argument("--out-schedule is required");
    }
    const FitOutcome fit = run_fit(opt.fit);
    if (opt.fit.out_mean) {
        io::save_vector(*opt.fit.out_mean, fit.posterior.map_estimate);
    }
    if (opt.fit.out_cov) {
        io::save_matrix(*opt.fit.out_cov, fit.posterior.covariance);
    }
    const PriorSpec phase2 = PriorSpec::centered(fit.posterior.covariance);
    const RbdConfig cfg = rbd_config(opt.tol, opt.dmax, opt.seed);
    std::optional<ApproxDesign> approx;
    const double design_seconds = time_seconds([&] { approx = approx_design(phase2, cfg); });

    io::ScheduleMeta meta{"rbd", opt.tol, approx->dim, approx->final_residual, design_seconds};
    io::save_schedule(opt.out_schedule, approx->schedule, meta);

    nlohmann::json timing{{"fit_seconds", fit.seconds},
                          {"rbd_design_seconds", design_seconds},
                          {"total_seconds", fit.seconds + design_seconds}};
    nlohmann::json result{{"command", "pipeline"},
                          {"n", fit.n},
                          {"comparisons", fit.comparisons},
                          {"fit", posterior_json(fit.posterior)},
                          {"d", approx->dim},
                          {"residual", approx->final_residual},
                          {"warnings", approx->warnings},
                          {"out_schedule", opt.out_schedule.string()}};
    if (opt.compare_exact) {
        std::optional<SchedulingDistribution> exact;
        const DenseOptions dense{kDefaultDenseCap, opt.force_dense};
        check_dense_cap(fit.n, dense);
        const double exact_seconds = time_seconds([&] { exact = exact_schedule(phase2, dense); });
        timing["exact_design_seconds"] = exact_seconds;
        timing["exact_total_seconds"] = fit.seconds + exact_seconds;
        timing["design_speedup"] = exact_seconds / design_seconds;
        result["kl_exact_vs_rbd"] = kl_divergence(*exact, approx->schedule);
    }
    result["timing"] = std::move(timing);
    return result;
}

} // namespace cjdesign::commands
