// cjdesign: scheduling distributions for Bradley-Terry comparative judgement.

#include "cjdesign/bt_model.hpp"
#include "cjdesign/commands.hpp"
#include "cjdesign/errors.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

namespace cmd = cjdesign::commands;

namespace {

std::vector<cjdesign::Structure> parse_structures(const std::string& list) {
    std::vector<cjdesign::Structure> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(cjdesign::parse_structure(item));
        }
    }
    return out;
}

void add_fit_flags(CLI::App* app, cmd::FitCommandOptions& opt) {
    app->add_option("--comparisons", opt.comparisons, "CSV with header i,j,y,n or i,j,winner")->required();
    app->add_option("--n", opt.n, "number of objects (default: inferred)");
    app->add_option("--prior-mean", opt.prior_mean, "prior mean vector file");
    app->add_option("--prior-cov", opt.prior_cov, "prior covariance matrix file (.csv or .mtx)");
    app->add_option("--prior-sd", opt.prior_sd, "isotropic prior standard deviation");
    app->add_option("--tol-fit", opt.tol_fit, "gradient tolerance")->capture_default_str();
    app->add_option("--max-iter", opt.max_iter, "Newton iteration cap")->capture_default_str();
    app->add_option("--out-mean", opt.out_mean, "write the MAP estimate here");
    app->add_option("--out-cov", opt.out_cov, "write the Laplace covariance here");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static scheduling distributions for Bradley-Terry comparative judgement studies"};
    app.require_subcommand(1);

    cmd::GenCovOptions gen;
    auto* gen_cmd = app.add_subcommand("gen-cov", "generate a prior covariance matrix");
    gen_cmd->add_option("--structure", gen.structure, "laplacian | toeplitz | invwishart | expm")->required();
    gen_cmd->add_option("--n", gen.n, "number of objects");
    gen_cmd->add_option("--p", gen.p, "edge probability (laplacian, expm)")->capture_default_str();
    gen_cmd->add_option("--rho", gen.rho, "Toeplitz decay")->capture_default_str();
    gen_cmd->add_option("--dof", gen.dof, "inverse-Wishart degrees of freedom (default n+2)");
    gen_cmd->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    gen_cmd->add_flag("--normalize", gen.normalize, "apply D^-1/2 C D^-1/2");
    gen_cmd->add_option("--adjacency", gen.adjacency, "adjacency matrix file instead of a random graph");
    gen_cmd->add_option("--out", gen.out, "output file (.csv or .mtx)")->required();

    cmd::DesignOptions des;
    std::uint64_t design_seed = 0;
    auto* des_cmd = app.add_subcommand("design", "compute a scheduling distribution");
    des_cmd->add_option("--cov", des.cov, "prior covariance file (.csv or .mtx)")->required();
    des_cmd->add_option("--method", des.method, "exact | rbd | closed")->capture_default_str();
    des_cmd->add_option("--tol", des.tol, "reduced basis tolerance")->capture_default_str();
    des_cmd->add_option("--dmax", des.dmax, "maximum basis size (default N-1)");
    auto* seed_opt = des_cmd->add_option("--seed", design_seed, "random first column for rbd");
    des_cmd->add_option("--out", des.out, "output schedule file")->required();
    des_cmd->add_option("--format", des.format, "json | csv (default from extension)");
    des_cmd->add_flag("--force-dense", des.force_dense, "allow the exact method above the object cap");
    des_cmd->add_option("--dense-cap", des.dense_cap, "object cap for the exact method")->capture_default_str();

    cmd::CompareOptions cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "KL divergence between two schedules");
    cmp_cmd->add_option("first", cmp.first, "reference schedule")->required();
    cmp_cmd->add_option("second", cmp.second, "approximating schedule")->required();

    cmd::BenchmarkOptions bench;
    std::string structures = "laplacian,toeplitz,invwishart";
    auto* bench_cmd = app.add_subcommand("benchmark", "time exact and reduced-basis designs");
    bench_cmd->add_option("--structures", structures, "comma-separated structures")->capture_default_str();
    bench_cmd->add_option("--n-list", bench.config.n_list, "study sizes")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--p-list", bench.config.p_list, "edge probabilities")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--rho", bench.config.rho, "Toeplitz decay")->capture_default_str();
    bench_cmd->add_option("--dof", bench.config.dof, "inverse-Wishart dof (0 = N+2)")->capture_default_str();
    bench_cmd->add_option("--reps", bench.config.reps, "repetitions per cell")->capture_default_str();
    bench_cmd->add_option("--seed", bench.config.seed, "base seed")->capture_default_str();
    bench_cmd->add_option("--skip-exact-above", bench.config.skip_exact_above, "largest N for the exact method")
        ->capture_default_str();
    bench_cmd->add_option("--tol", bench.config.rbd.tolerance, "reduced basis tolerance")->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "output prefix; writes <out>.csv and <out>.json")->required();

    cmd::SampleOptions smp;
    auto* smp_cmd = app.add_subcommand("sample", "draw comparison pairs from a schedule");
    smp_cmd->add_option("--schedule", smp.schedule, "schedule file")->required();
    smp_cmd->add_option("--n", smp.count, "number of comparisons")->required();
    smp_cmd->add_option("--seed", smp.seed, "random seed")->capture_default_str();
    smp_cmd->add_option("--out", smp.out, "output CSV")->required();

    cmd::FitCommandOptions fit;
    auto* fit_cmd = app.add_subcommand("bt-fit", "MAP fit and Laplace covariance of the Bradley-Terry model");
    add_fit_flags(fit_cmd, fit);

    cmd::PipelineOptions pipe;
    std::uint64_t pipe_seed = 0;
    auto* pipe_cmd = app.add_subcommand("pipeline", "fit phase-one data and design phase two");
    add_fit_flags(pipe_cmd, pipe.fit);
    pipe_cmd->add_option("--tol", pipe.tol, "reduced basis tolerance")->capture_default_str();
    pipe_cmd->add_option("--dmax", pipe.dmax, "maximum basis size (default N-1)");
    auto* pipe_seed_opt = pipe_cmd->add_option("--seed", pipe_seed, "random first column for rbd");
    pipe_cmd->add_option("--out-schedule", pipe.out_schedule, "output schedule file")->required();
    pipe_cmd->add_flag("--compare-exact", pipe.compare_exact, "also time the dense standard method");
    pipe_cmd->add_flag("--force-dense", pipe.force_dense, "allow the dense method above the object cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << cmd::error_line("usage", e.what()) << '\n';
        return 2;
    }

    try {
        nlohmann::json result;
        if (*gen_cmd) {
            result = cmd::gen_cov(gen);
        } else if (*des_cmd) {
            if (*seed_opt) {
                des.seed = design_seed;
            }
            result = cmd::design(des);
        } else if (*cmp_cmd) {
            result = cmd::compare(cmp);
        } else if (*bench_cmd) {
            bench.config.structures = parse_structures(structures);
            result = cmd::benchmark(bench);
        } else if (*smp_cmd) {
            result = cmd::sample(smp);
        } else if (*fit_cmd) {
            result = cmd::bt_fit(fit);
        } else if (*pipe_cmd) {
            if (*pipe_seed_opt) {
                pipe.seed = pipe_seed;
            }
            result = cmd::pipeline(pipe);
        }
        std::cout << result.dump(2) << '\n';
        return 0;
    } catch (const cjdesign::MemoryCapError& e) {
        std::cerr << cmd::error_line("memory_cap", e.what()) << '\n';
    } catch (const cjdesign::DegeneratePriorError& e) {
        std::cerr << cmd::error_line("degenerate_prior", e.what()) << '\n';
    } catch (const cjdesign::FitError& e) {
        const auto& last = e.last_iterate().map_estimate;
        nlohmann::json j{{"error", "fit_divergence"},
                         {"message", e.what()},
                         {"last_iterate", std::vector<double>(last.data(), last.data() + last.size())}};
        std::cerr << j.dump() << '\n';
    } catch (const cjdesign::NumericalError& e) {
        std::cerr << cmd::error_line("numerical", e.what()) << '\n';
    } catch (const std::invalid_argument& e) {
        std::cerr << cmd::error_line("invalid_argument", e.what()) << '\n';
    } catch (const std::exception& e) {
        std::cerr << cmd::error_line("runtime", e.what()) << '\n';
    }
    return 1;
}
