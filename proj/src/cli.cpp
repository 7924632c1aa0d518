#include "h2hinf/cli.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <vector>

#include "h2hinf/csv.hpp"
#include "h2hinf/evaluate.hpp"
#include "h2hinf/scenario.hpp"
#include "h2hinf/simulate.hpp"

#ifndef H2HINF_SCENARIO_DIR
#define H2HINF_SCENARIO_DIR "scenarios"
#endif

namespace h2hinf {

namespace {

constexpr std::size_t kVerifyPaths = 200;
constexpr std::size_t kNashPerturbations = 20;
constexpr double kNashMagnitude = 0.1;

struct Prepared {
    Scenario scenario;
    DisturbancePolicy policy;
};

Scenario apply_overrides(Scenario sc, const RunConfig& cfg) {
    if (cfg.gamma)
        sc.model.gamma = *cfg.gamma;
    if (cfg.horizon || cfg.steps) {
        const double T = cfg.horizon.value_or(sc.grid.horizon());
        const std::size_t N = cfg.steps.value_or(sc.grid.steps());
        try {
            sc.grid = TimeGrid(T, N);
        } catch (const std::invalid_argument& e) {
            throw ScenarioParseError(std::string("grid override: ") + e.what());
        }
    }
    return sc;
}

void print_check(std::ostream& out, const CheckResult& c) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.passed) {
        out << " (worst " << format_double(c.worst_value);
        if (c.worst_node)
            out << " at node " << *c.worst_node;
        out << ')';
        if (!c.detail.empty())
            out << ": " << c.detail;
    }
    out << '\n';
}

Prepared prepare(const RunConfig& cfg, std::ostream& err) {
    Prepared p{apply_overrides(read_scenario(cfg.scenario), cfg), {}};
    const ValidationReport report = validate(p.scenario.model, p.scenario.grid);
    if (const CheckResult* failure = report.first_failure()) {
        for (const auto& c : report.checks)
            if (!c.passed)
                print_check(err, c);
        throw AssumptionError(*failure, "assumption violated: " + failure->name);
    }
    const double T = p.scenario.grid.horizon();
    p.policy = p.scenario.disturbance ? p.scenario.disturbance->fitted(T)
                                      : DisturbancePolicy::uniform(T, DisturbanceMode::WorstCase);
    return p;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw std::filesystem::filesystem_error("cannot create output directory", dir, ec);
}

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIO;
    } catch (const CsvError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIO;
    } catch (const AssumptionError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ScenarioError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const SingularObservationNoise& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const FiniteEscape& e) {
        err << "not solvable: Riccati solution escapes at node " << e.node() << " (t = " << format_double(e.time())
            << ")\n";
        return kExitNotSolvable;
    } catch (const NonFinite& e) {
        err << "not solvable: " << e.what() << '\n';
        return kExitNotSolvable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitVerification;
    }
}

void write_synthesis(const SynthesisResult& syn, const TimeGrid& grid, const std::filesystem::path& dir) {
    ensure_dir(dir);
    write_gains(dir / "gains.csv", syn.gains, grid);
    write_riccati(dir / "riccati.csv", syn.riccati, syn.affine, grid);
}

std::string path_file_name(std::size_t index) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "trajectory_%04zu.csv", index);
    return buf;
}

// Writes one trajectory file per path plus ensemble.csv; returns the failures.
std::vector<FailedPath> simulate_paths(const Prepared& p, const SynthesisResult& syn, std::size_t n_paths,
                                       std::uint64_t seed, const std::filesystem::path& dir) {
    ensure_dir(dir);
    const auto& model = p.scenario.model;
    const auto& grid = p.scenario.grid;
    const double h = grid.step();
    std::vector<std::vector<double>> values(n_paths);
    Ensemble ens;
    for (std::size_t i = 0; i < n_paths; ++i) {
        try {
            const SimResult r = simulate_closed_loop(model, syn.gains, syn.plan, grid, p.policy, seed + i);
            write_trajectory(dir / path_file_name(i), r, grid);
            values[i] = {path_integral(r.j1_integrand, h), path_integral(r.j2_integrand, h),
                         r.x.col(r.x.cols() - 1).squaredNorm()};
        } catch (const PathFailure& e) {
            ens.failures.push_back({i, seed + i, e.what()});
        }
    }
    ens.values = std::move(values);
    ens.stats = summarize(ens.values);
    write_ensemble(dir / "ensemble.csv", ens, seed, {"J1", "J2", "xT_sq"});
    return ens.failures;
}

std::vector<ReportRow> verification_rows(const Prepared& p, const SynthesisResult& syn, std::size_t n_paths,
                                         std::uint64_t seed, OutputVariant variant) {
    const auto& model = p.scenario.model;
    const auto& grid = p.scenario.grid;
    std::vector<ReportRow> rows;

    const BoundedRealResult br = bounded_real_check(model, syn.gains.U, grid, {variant, syn.gains.U0, {}, {true, 1e9}});
    rows.push_back({"bounded_real_solvable", br.solvable ? 1.0 : 0.0, 1.0, 0.0, br.solvable});

    EnergyGainOptions eg;
    eg.variant = variant;
    try {
        const GainReport gain = energy_gain(model, syn.gains, syn.plan, grid, p.policy, n_paths, seed, eg);
        rows.push_back({"energy_gain_ratio", gain.ratio, model.gamma, gain.stderr_ratio,
                        gain.ratio < model.gamma && gain.failures.empty()});
    } catch (const ZeroDisturbance&) {
        rows.push_back({"energy_gain_ratio", std::nan(""), model.gamma, std::nan(""), false});
    }

    NashOptions nash;
    nash.n_perturbations = kNashPerturbations;
    nash.magnitude = kNashMagnitude;
    nash.n_paths = n_paths;
    const NashReport nr = nash_check(model, syn.gains, syn.plan, grid, seed, nash);
    rows.push_back({"nash_violations", static_cast<double>(nr.violations), 0.0, 0.0,
                    nr.violations == 0 && nr.failures.empty()});
    for (const auto& t : nr.trials) {
        char name[48];
        std::snprintf(name, sizeof name, "nash_%s_%02zu", t.player == Player::Disturbance ? "j1_dv" : "j2_du",
                      t.index);
        rows.push_back({name, t.perturbed, t.base, t.pooled_stderr, !t.violated});
    }

    const ValueReport vr = value_consistency(model, syn, grid, n_paths, seed);
    const auto within = [](double est, double ref, double se) {
        return std::abs(est - ref) <= 3.0 * (std::isfinite(se) ? se : 0.0) + 1e-9 * std::max(1.0, std::abs(ref));
    };
    rows.push_back({"value_j1", vr.j1_simulated, vr.j1_formula, vr.j1_stderr,
                    within(vr.j1_simulated, vr.j1_formula, vr.j1_stderr)});
    rows.push_back({"value_j2", vr.j2_simulated, vr.j2_formula, vr.j2_stderr,
                    within(vr.j2_simulated, vr.j2_formula, vr.j2_stderr)});

    const DecompositionReport dr = decomposition_check(model, syn.gains, syn.plan, grid, p.policy, n_paths, seed);
    const auto zero_row = [&](const char* name, const Estimate& e) {
        rows.push_back({name, e.mean, 0.0, e.stderr_of_mean, e.within(0.0, 3.0)});
    };
    zero_row("decomposition_residual", dr.residual);
    zero_row("orthogonality_mid", dr.cross_mid);
    zero_row("orthogonality_end", dr.cross_end);
    zero_row("variance_decomposition_mid", dr.variance_mid);
    zero_row("variance_decomposition_end", dr.variance_end);
    return rows;
}

int report_verification(const std::vector<ReportRow>& rows, const std::filesystem::path& dir, std::ostream& out,
                        std::ostream& err) {
    ensure_dir(dir);
    write_report(dir / "report.csv", rows);
    bool ok = true;
    for (const auto& r : rows) {
        if (!r.pass) {
            ok = false;
            err << "check failed: " << r.name << " (estimate " << format_double(r.estimate) << ", reference "
                << format_double(r.reference) << ")\n";
        }
    }
    out << (ok ? "verification passed" : "verification failed") << " (" << rows.size() << " checks)\n";
    return ok ? kExitPass : kExitVerification;
}

double row_value(const std::vector<ReportRow>& rows, const std::string& name) {
    for (const auto& r : rows)
        if (r.name == name)
            return r.estimate;
    return std::nan("");
}

} // namespace

std::filesystem::path bundled_scenario_dir() { return H2HINF_SCENARIO_DIR; }

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Scenario sc = apply_overrides(read_scenario(cfg.scenario), cfg);
        const ValidationReport report = validate(sc.model, sc.grid);
        for (const auto& c : report.checks)
            print_check(c.passed ? out : err, c);
        if (report.passed()) {
            out << "scenario valid\n";
            return static_cast<int>(kExitPass);
        }
        err << "assumption violated: " << report.first_failure()->name << '\n';
        return static_cast<int>(kExitValidation);
    });
}

int cmd_synthesize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Prepared p = prepare(cfg, err);
        const SynthesisResult syn = synthesize(p.scenario.model, p.scenario.grid);
        write_synthesis(syn, p.scenario.grid, cfg.out);
        out << "P1(0) =\n" << syn.riccati.P1.at_node(0) << "\nP2(0) =\n" << syn.riccati.P2.at_node(0) << '\n';
        return static_cast<int>(kExitPass);
    });
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Prepared p = prepare(cfg, err);
        const SynthesisResult syn = synthesize(p.scenario.model, p.scenario.grid);
        const std::size_t n = cfg.paths.value_or(1);
        const auto failures = simulate_paths(p, syn, n, cfg.seed, cfg.out);
        for (const auto& f : failures)
            err << "path " << f.index << " (seed " << f.seed << ") failed: " << f.message << '\n';
        out << "simulated " << n - failures.size() << "/" << n << " paths\n";
        return static_cast<int>(failures.size() == n ? kExitVerification : kExitPass);
    });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Prepared p = prepare(cfg, err);
        const SynthesisResult syn = synthesize(p.scenario.model, p.scenario.grid);
        const auto rows = verification_rows(p, syn, cfg.paths.value_or(kVerifyPaths), cfg.seed, cfg.variant);
        out << "ratio=" << format_double(row_value(rows, "energy_gain_ratio")) << '\n';
        return report_verification(rows, cfg.out, out, err);
    });
}

int cmd_reproduce_uav(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    RunConfig pinned = cfg;
    if (pinned.scenario.empty())
        pinned.scenario = bundled_scenario_dir() / "uav.json";
    pinned.gamma = cfg.gamma.value_or(0.8);
    pinned.horizon = cfg.horizon.value_or(20.0);
    pinned.steps = cfg.steps.value_or(2000);
    pinned.paths = cfg.paths.value_or(kVerifyPaths);

    return guarded(err, [&] {
        Prepared p = prepare(pinned, err);
        const double T = p.scenario.grid.horizon();
        const Eigen::Index m = p.scenario.model.dims().m;
        std::vector<DisturbanceSegment> schedule{{0.0, 1.0, DisturbanceMode::Constant, Eigen::VectorXd::Ones(m)},
                                                 {1.0, 5.0, DisturbanceMode::WorstCase, {}},
                                                 {5.0, std::max(T, 5.0 + 1e-9), DisturbanceMode::Zero, {}}};
        p.policy = DisturbancePolicy(std::move(schedule)).fitted(T);

        const SynthesisResult syn = synthesize(p.scenario.model, p.scenario.grid);
        write_synthesis(syn, p.scenario.grid, pinned.out);
        const auto failures = simulate_paths(p, syn, 1, pinned.seed, pinned.out);
        for (const auto& f : failures)
            err << "path " << f.index << " (seed " << f.seed << ") failed: " << f.message << '\n';

        const auto rows = verification_rows(p, syn, *pinned.paths, pinned.seed, pinned.variant);
        const int code = report_verification(rows, pinned.out, out, err);
        char line[160];
        std::snprintf(line, sizeof line, "ratio=%.6g gamma=%g pass=%s", row_value(rows, "energy_gain_ratio"),
                      p.scenario.model.gamma, code == kExitPass ? "true" : "false");
        out << line << '\n';
        std::ofstream summary(pinned.out / "summary.txt", std::ios::binary | std::ios::trunc);
        if (!summary)
            throw CsvError("cannot write summary.txt");
        summary << line << '\n';
        return code;
    });
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.command == "validate")
        return cmd_validate(cfg, out, err);
    if (cfg.command == "synthesize")
        return cmd_synthesize(cfg, out, err);
    if (cfg.command == "simulate")
        return cmd_simulate(cfg, out, err);
    if (cfg.command == "verify")
        return cmd_verify(cfg, out, err);
    if (cfg.command == "reproduce-uav")
        return cmd_reproduce_uav(cfg, out, err);
    err << "unknown command '" << cfg.command << "'\n";
    return kExitIO;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mixed H2/Hinf synthesis and verification for partially observed linear SDEs", "h2hinf"};
    RunConfig cfg;
    std::string scenario;
    std::string variant = "control";
    double gamma = 0.0, horizon = 0.0;
    std::size_t steps = 0, paths = 0;

    app.add_option("command", cfg.command, "validate | synthesize | simulate | verify | reproduce-uav")
        ->required()
        ->check(CLI::IsMember({"validate", "synthesize", "simulate", "verify", "reproduce-uav"}));
    app.add_option("scenario", scenario, "scenario JSON file (reproduce-uav defaults to the bundled uav.json)");
    auto* gamma_opt = app.add_option("--gamma", gamma, "attenuation level override")->check(CLI::PositiveNumber);
    auto* steps_opt = app.add_option("--steps", steps, "grid step count override")->check(CLI::PositiveNumber);
    auto* horizon_opt = app.add_option("--horizon", horizon, "horizon T override")->check(CLI::PositiveNumber);
    auto* paths_opt = app.add_option("--paths", paths, "Monte Carlo path count")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "base seed; path i uses seed + i");
    std::string out_dir = ".";
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--gain-variant", variant,
                   "energy-gain output: control (state and control, alias def22) | state (state only, alias sec4)")
        ->check(CLI::IsMember({"control", "state", "def22", "sec4"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitIO;
    }

    if (scenario.empty() && cfg.command != "reproduce-uav") {
        err << "error: command '" << cfg.command << "' needs a scenario file\n";
        return kExitIO;
    }
    cfg.scenario = scenario;
    cfg.out = out_dir;
    cfg.variant = (variant == "state" || variant == "sec4") ? OutputVariant::StateOnly : OutputVariant::ControlAugmented;
    if (*gamma_opt)
        cfg.gamma = gamma;
    if (*steps_opt)
        cfg.steps = steps;
    if (*horizon_opt)
        cfg.horizon = horizon;
    if (*paths_opt)
        cfg.paths = paths;
    return run_command(cfg, out, err);
}

} // namespace h2hinf
