#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sfis/averaging.hpp"
#include "sfis/common.hpp"
#include "sfis/config.hpp"
#include "sfis/control.hpp"
#include "sfis/estimator.hpp"
#include "sfis/fkpde.hpp"
#include "sfis/model.hpp"
#include "sfis/simulate.hpp"
#include "sfis/validate.hpp"

namespace {

struct Overrides {
    std::optional<double> beta, epsilon, T, x0, y0, dt, barrier, c;
    std::optional<int> N, nx, m, workers;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode, out, tag;
    std::optional<std::vector<double>> eps;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--beta", ov.beta, "inverse temperature");
    cmd->add_option("--epsilon", ov.epsilon, "time-scale separation");
    cmd->add_option("--T", ov.T, "horizon time");
    cmd->add_option("--x0", ov.x0, "initial slow state");
    cmd->add_option("--y0", ov.y0, "initial fast state");
    cmd->add_option("--dt", ov.dt, "slow time step");
    cmd->add_option("--barrier", ov.barrier, "crossing threshold");
    cmd->add_option("--tag", ov.tag, "model tag (bistable|hconst)");
    cmd->add_option("--c", ov.c, "constant cost for the hconst tag");
    cmd->add_option("--N", ov.N, "trajectory count");
    cmd->add_option("--nx", ov.nx, "pde spatial nodes");
    cmd->add_option("--m", ov.m, "pde time steps");
    cmd->add_option("--workers", ov.workers, "worker threads");
    cmd->add_option("--seed", ov.seed, "master seed");
    cmd->add_option("--mode", ov.mode,
                    "standard-mc | importance-sampling | both");
    cmd->add_option("--out", ov.out, "output path (default stdout)");
    cmd->add_option("--eps", ov.eps, "sweep epsilon list")->delimiter(',');
}

sfis::CliConfig resolve(const std::string& path, const Overrides& ov) {
    sfis::CliConfig cfg =
        path.empty() ? sfis::CliConfig{} : sfis::load_config(path);
    if (ov.beta) cfg.model.beta = *ov.beta;
    if (ov.epsilon) cfg.model.epsilon = *ov.epsilon;
    if (ov.T) cfg.model.T = *ov.T;
    if (ov.x0) cfg.model.x0 = *ov.x0;
    if (ov.y0) cfg.model.y0 = *ov.y0;
    if (ov.dt) cfg.policy.dtSlow = *ov.dt;
    if (ov.barrier) cfg.policy.barrier = *ov.barrier;
    if (ov.tag) {
        if (*ov.tag != "bistable" && *ov.tag != "hconst")
            throw sfis::ParseError("unknown model tag '" + *ov.tag + "'");
        cfg.tag = *ov.tag;
    }
    if (ov.c) cfg.hconstC = *ov.c;
    if (ov.N) cfg.N = *ov.N;
    if (ov.nx) cfg.pde.nx = *ov.nx;
    if (ov.m) cfg.pde.m = *ov.m;
    if (ov.workers) cfg.workers = *ov.workers;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.mode) {
        if (*ov.mode == "standard-mc") cfg.mode = sfis::RunMode::standard_mc;
        else if (*ov.mode == "importance-sampling")
            cfg.mode = sfis::RunMode::importance_sampling;
        else if (*ov.mode == "both") cfg.mode = sfis::RunMode::both;
        else throw sfis::ParseError("unknown mode '" + *ov.mode + "'");
    }
    if (ov.out) cfg.out = *ov.out;
    if (ov.eps) cfg.sweepEps = *ov.eps;
    sfis::validate_config(cfg);
    return cfg;
}

std::string provenance_comment(const sfis::CliConfig& cfg) {
    std::ostringstream os;
    os << "# sfis " << sfis::version() << "\n";
    std::istringstream lines(sfis::config_to_text(cfg));
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty()) os << "# " << line << "\n";
    return os.str();
}

void write_output(const sfis::CliConfig& cfg, const std::string& body) {
    if (cfg.out.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw sfis::ValidationError("cannot open output file '" + cfg.out + "'");
    f << body;
}

struct Pipeline {
    sfis::ModelSpec model;
    sfis::AveragedModel avg;
    std::shared_ptr<sfis::ValueGrid> grid;
    sfis::ControlField control;
};

Pipeline build_pipeline(const sfis::CliConfig& cfg) {
    Pipeline p;
    p.model = sfis::build_model(cfg);
    p.avg = sfis::analytic_average_bistable(
        p.model, sfis::uniform_nodes(cfg.pde.xLo, cfg.pde.xHi, cfg.pde.nx));
    p.grid = std::make_shared<sfis::ValueGrid>(
        sfis::solve_phi0(p.avg, p.model.params, cfg.pde));
    p.control = sfis::make_averaged_control(p.grid, p.model);
    return p;
}

sfis::RunConfig run_config(const sfis::CliConfig& cfg) {
    sfis::RunConfig rc;
    rc.N = cfg.N;
    rc.seed = cfg.seed;
    rc.workers = sfis::resolve_workers(cfg.workers);
    return rc;
}

int cmd_run(const sfis::CliConfig& cfg) {
    const Pipeline p = build_pipeline(cfg);
    const sfis::RunConfig rc = run_config(cfg);

    std::ostringstream body;
    body << provenance_comment(cfg) << sfis::estimate_csv_header() << "\n";
    double wall = 0.0;
    auto emit = [&](const sfis::ControlField& field) {
        const sfis::EstimateResult r =
            sfis::run_estimate(p.model, field, cfg.policy, rc);
        body << sfis::estimate_csv_row(p.model.params, cfg.policy, rc, r);
        wall += r.wallClock;
    };
    if (cfg.mode == sfis::RunMode::standard_mc) {
        emit(sfis::make_zero_control());
    } else if (cfg.mode == sfis::RunMode::importance_sampling) {
        emit(p.control);
    } else {
        emit(sfis::make_zero_control());
        emit(p.control);
    }
    write_output(cfg, body.str());
    std::cerr << "# wall " << sfis::fmt(wall) << " s\n";
    return 0;
}

int cmd_sweep(const sfis::CliConfig& cfg) {
    if (cfg.sweepEps.empty())
        throw sfis::ValidationError("sweep needs a nonempty epsilon list");
    const Pipeline p = build_pipeline(cfg);
    const sfis::RunConfig rc = run_config(cfg);

    const auto entries = sfis::sweep_epsilon(
        [](const sfis::ModelParams& mp) { return sfis::build_bistable_model(mp); },
        p.model.params, cfg.sweepEps, p.control, cfg.policy, rc);

    std::ostringstream body;
    body << provenance_comment(cfg) << sfis::estimate_csv_header() << "\n";
    double wall = 0.0;
    for (const auto& e : entries) {
        sfis::ModelParams mp = p.model.params;
        mp.epsilon = e.epsilon;
        body << sfis::estimate_csv_row(mp, cfg.policy, rc, e.est);
        wall += e.est.wallClock;
    }
    write_output(cfg, body.str());
    std::cerr << "# wall " << sfis::fmt(wall) << " s\n";
    return 0;
}

int cmd_surface(const sfis::CliConfig& cfg) {
    const Pipeline p = build_pipeline(cfg);
    const auto times = sfis::uniform_nodes(p.model.params.t0, p.model.params.T,
                                           cfg.surfaceNs);
    const auto xs = sfis::uniform_nodes(cfg.pde.xLo, cfg.pde.xHi, cfg.surfaceNx);
    std::ostringstream body;
    body << provenance_comment(cfg)
         << sfis::control_surface_csv(p.control, times, xs, cfg.surfaceY);
    write_output(cfg, body.str());
    return 0;
}

int cmd_solve(const sfis::CliConfig& cfg) {
    const sfis::ModelSpec model = sfis::build_model(cfg);
    const sfis::AveragedModel avg = sfis::analytic_average_bistable(
        model, sfis::uniform_nodes(cfg.pde.xLo, cfg.pde.xHi, cfg.pde.nx));
    const sfis::ValueGrid grid = sfis::solve_phi0(avg, model.params, cfg.pde);
    write_output(cfg, provenance_comment(cfg) + sfis::value_grid_csv(grid));
    return 0;
}

int cmd_validate(const sfis::CliConfig& cfg) {
    const Pipeline p = build_pipeline(cfg);
    bool ok = true;
    auto report = [&ok](const std::string& name, bool pass,
                        const std::string& detail) {
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail
                  << "\n";
        ok = ok && pass;
    };

    {
        const int n = std::min(cfg.N, 4000);
        const auto mr = sfis::martingale_check(p.model, p.control, cfg.policy, n,
                                               cfg.seed);
        report("martingale", mr.pass,
               "mean " + sfis::fmt(mr.mean) + " stderr " + sfis::fmt(mr.stdErr));
    }
    for (double c : {0.0, 1.0}) {
        const sfis::ModelSpec hc =
            sfis::build_bistable_model_hconst(p.model.params, c);
        const auto zr = sfis::zero_variance_check(
            hc, cfg.policy, std::min(cfg.N, 200), cfg.seed);
        const bool pass = zr.exactZero && std::abs(zr.I - zr.expected) <
                                              1e-12 * std::max(1.0, zr.expected);
        report("zero-variance c=" + sfis::fmt(c), pass,
               "I " + sfis::fmt(zr.I) + " varU " + sfis::fmt(zr.varU));
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slow-fast importance sampling toolkit"};
    app.require_subcommand(1);

    std::string configPath;
    Overrides ov;
    const char* descs[] = {
        "estimate the path functional per the config mode",
        "estimate across a decreasing epsilon list",
        "export the control surface lattice",
        "run the property suites",
        "solve the backward PDE and print the value grid"};
    CLI::App* subs[5];
    const char* names[] = {"run", "sweep", "surface", "validate", "solve"};
    for (int i = 0; i < 5; ++i) {
        subs[i] = app.add_subcommand(names[i], descs[i]);
        subs[i]->add_option("config", configPath, "config file path");
        add_override_flags(subs[i], ov);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const sfis::CliConfig cfg = resolve(configPath, ov);
        if (subs[0]->parsed()) return cmd_run(cfg);
        if (subs[1]->parsed()) return cmd_sweep(cfg);
        if (subs[2]->parsed()) return cmd_surface(cfg);
        if (subs[3]->parsed()) return cmd_validate(cfg);
        return cmd_solve(cfg);
    } catch (const sfis::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sfis::SimulationDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const sfis::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
