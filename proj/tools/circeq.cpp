// Command-line front end: solve | oracle | verify.
//
// Exit codes: 0 success, 1 computation or verification failure, 2 bad usage
// or bad configuration.  All artifacts are written deterministically.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "circeq/circeq.hpp"

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::size_t> grid;
    std::optional<double> tolerance;
    std::optional<std::string> arcs;
};

void write_error_json(const std::string& path, const std::string& stage,
                      const std::string& message) {
    circeq::detail::JsonOut j;
    j.begin_object();
    j.key("error").begin_object();
    j.key("stage").value(stage);
    j.key("message").value(message);
    j.end_object();
    j.key("pass").value(false);
    j.end_object();
    circeq::detail::write_text(path, j.str() + "\n");
}

std::optional<std::vector<double>> endpoints_from(const CommonArgs& args,
                                                  const circeq::ProblemConfig& cfg) {
    std::vector<std::pair<double, double>> pairs;
    if (args.arcs)
        pairs = circeq::parse_arcs_string(*args.arcs);
    else if (cfg.arcs)
        pairs = *cfg.arcs;
    else
        return std::nullopt;
    std::vector<double> e;
    for (const auto& [a, b] : pairs) {
        e.push_back(a);
        e.push_back(b);
    }
    return e;
}

int cmd_solve(const CommonArgs& args, const circeq::ProblemConfig& cfg) {
    circeq::SolveOptions opt;
    const std::size_t grid = args.grid ? *args.grid : cfg.grid.value_or(2048);
    if (!circeq::is_pow2(grid) || grid < 64) {
        std::fprintf(stderr, "solve: grid must be a power of two, at least 64\n");
        return kExitUsage;
    }
    opt.detection_grid = grid;
    const std::optional<double> tol = args.tolerance ? args.tolerance : cfg.tolerance;
    if (tol) {
        if (*tol <= 0.0) {
            std::fprintf(stderr, "solve: tolerance must be positive\n");
            return kExitUsage;
        }
        opt.endpoint.accept_tolerance = *tol;
        opt.endpoint.stop_tolerance = std::min(*tol, 1e-12);
    }
    opt.initial_endpoints = endpoints_from(args, cfg);

    const std::string solution_path = args.out_dir + "/solution.json";
    try {
        const circeq::EquilibriumSolution sol = circeq::solve_equilibrium(cfg.field, opt);
        const circeq::ResidualReport rep = circeq::full_report(cfg.field, sol);
        circeq::write_solution_json(solution_path, sol, rep);
        circeq::write_density_csv(args.out_dir + "/density.csv", sol.density);
        std::printf("solve: %s, F_w=%s, V_w=%s, capacity=%s, %s\n",
                    sol.support.full_circle() ? "full circle"
                                              : (std::to_string(sol.support.size()) + " arc(s)").c_str(),
                    circeq::fmt17(sol.robin).c_str(), circeq::fmt17(sol.energy).c_str(),
                    circeq::fmt17(sol.capacity).c_str(), rep.pass ? "pass" : "FAIL");
        return rep.pass ? kExitSuccess : kExitFailure;
    } catch (const circeq::SolveError& ex) {
        write_error_json(solution_path, ex.stage, ex.what());
        std::fprintf(stderr, "solve: %s\n", ex.what());
        return kExitFailure;
    } catch (const std::exception& ex) {
        write_error_json(solution_path, "solve", ex.what());
        std::fprintf(stderr, "solve: %s\n", ex.what());
        return kExitFailure;
    }
}

int cmd_oracle(const CommonArgs& args, const circeq::ProblemConfig& cfg) {
    const std::size_t grid = args.grid ? *args.grid : cfg.grid.value_or(1024);
    if (!circeq::is_pow2(grid) || grid < 64) {
        std::fprintf(stderr, "oracle: grid must be a power of two, at least 64\n");
        return kExitUsage;
    }
    circeq::OracleOptions opt;
    const std::optional<double> tol = args.tolerance ? args.tolerance : cfg.tolerance;
    if (tol) {
        if (*tol <= 0.0) {
            std::fprintf(stderr, "oracle: tolerance must be positive\n");
            return kExitUsage;
        }
        opt.tolerance = *tol;
    }
    try {
        const circeq::OracleResult res = circeq::minimize_energy(cfg.field, grid, opt);
        const circeq::ArcSet support = circeq::extract_support(res.measure);
        circeq::write_measure_csv(args.out_dir + "/measure.csv", res.measure);
        circeq::write_oracle_json(args.out_dir + "/oracle_summary.json", res, support);
        std::printf("oracle: N=%zu, V_w=%s, F_w=%s, frostman_gap=%s, %s\n", grid,
                    circeq::fmt17(res.energy).c_str(), circeq::fmt17(res.robin).c_str(),
                    circeq::fmt17(res.frostman_gap).c_str(),
                    res.converged ? "converged" : "NOT CONVERGED");
        return res.converged ? kExitSuccess : kExitFailure;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "oracle: %s\n", ex.what());
        return kExitFailure;
    }
}

int cmd_verify(const CommonArgs& args, const circeq::ProblemConfig& cfg) {
    const std::size_t grid = args.grid ? *args.grid : cfg.grid.value_or(4096);
    const std::string report_path = args.out_dir + "/report.json";
    const auto endpoints = endpoints_from(args, cfg);
    try {
        circeq::DensityProfile profile = [&]() -> circeq::DensityProfile {
            if (!endpoints) {
                const circeq::FullCircleCheck fc = circeq::detect_full_circle(cfg.field);
                if (!fc.is_full_circle)
                    throw std::runtime_error(
                        "the density is negative somewhere on the circle; pass the support "
                        "arcs to verify (--arcs or \"arcs\" in the config)");
                return *fc.density;
            }
            std::vector<std::pair<double, double>> pairs;
            for (std::size_t i = 0; i + 1 < endpoints->size(); i += 2)
                pairs.emplace_back((*endpoints)[i], (*endpoints)[i + 1]);
            double imag_sup = 0.0;
            return circeq::detail::class_density(cfg.field, circeq::ArcSet(pairs), 1024, &imag_sup);
        }();
        const circeq::EquilibriumSolution sol = circeq::assemble_solution(cfg.field, profile);
        const circeq::ResidualReport rep = circeq::full_report(cfg.field, sol, {}, grid);
        circeq::write_solution_json(report_path, sol, rep);
        std::printf("verify: mass_gap=%s, frostman_eq=%s, frostman_ineq=%s, %s\n",
                    circeq::fmt17(rep.mass_gap).c_str(),
                    circeq::fmt17(rep.frostman_equality_sup).c_str(),
                    circeq::fmt17(rep.frostman_inequality_violation).c_str(),
                    rep.pass ? "pass" : "FAIL");
        return rep.pass ? kExitSuccess : kExitFailure;
    } catch (const std::exception& ex) {
        write_error_json(report_path, "verify", ex.what());
        std::fprintf(stderr, "verify: %s\n", ex.what());
        return kExitFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted equilibrium measures on the unit circle"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub, bool with_arcs) {
        sub->add_option("--config", args.config_path, "problem configuration (JSON)")
            ->required();
        sub->add_option("--out", args.out_dir, "output directory")->required();
        sub->add_option("--grid", args.grid, "grid size (power of two)");
        sub->add_option("--tol", args.tolerance, "solver tolerance");
        if (with_arcs)
            sub->add_option("--arcs", args.arcs, "support arcs \"a1,b1;a2,b2\" (radians)");
    };
    CLI::App* solve = app.add_subcommand("solve", "compute the equilibrium measure");
    CLI::App* oracle = app.add_subcommand("oracle", "discretized energy minimization");
    CLI::App* verify = app.add_subcommand("verify", "check a support against all identities");
    add_common(solve, true);
    add_common(oracle, false);
    add_common(verify, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    circeq::ProblemConfig cfg = [&]() -> circeq::ProblemConfig {
        try {
            return circeq::load_config(args.config_path);
        } catch (const std::exception& ex) {
            std::fprintf(stderr, "%s\n", ex.what());
            std::exit(kExitUsage);
        }
    }();

    try {
        std::filesystem::create_directories(args.out_dir);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "cannot create output directory: %s\n", ex.what());
        return kExitUsage;
    }

    if (solve->parsed()) return cmd_solve(args, cfg);
    if (oracle->parsed()) return cmd_oracle(args, cfg);
    return cmd_verify(args, cfg);
}
