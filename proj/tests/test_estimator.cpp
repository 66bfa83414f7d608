#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <vector>

#include "sfis/averaging.hpp"
#include "sfis/common.hpp"
#include "sfis/control.hpp"
#include "sfis/estimator.hpp"
#include "sfis/fkpde.hpp"
#include "sfis/model.hpp"

using namespace sfis;

namespace {

std::shared_ptr<const ValueGrid> bistable_grid(int nx, int m) {
    PdeConfig cfg;
    cfg.nx = nx;
    cfg.m = m;
    ModelParams p;
    AveragedModel avg = analytic_average_bistable(
        build_bistable_model(p), uniform_nodes(cfg.xLo, cfg.xHi, cfg.nx));
    return std::make_shared<const ValueGrid>(solve_phi0(avg, p, cfg));
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("log-space reduction against a pinned case") {
    const std::vector<double> logs = {-3.5, -3.2, -4.1, -2.9,
                                      -3.8, -3.3, -3.6, -3.05};
    const std::vector<unsigned char> crossed = {1, 0, 0, 1, 0, 1, 0, 0};
    EstimateResult r = reduce_payoffs(logs, crossed);
    CHECK(r.I == doctest::Approx(0.03456150861933654).epsilon(1e-13));
    CHECK(r.varU == doctest::Approx(0.00014624219107145067).epsilon(1e-12));
    CHECK(r.reU == doctest::Approx(0.34989976542609963).epsilon(1e-12));
    CHECK(r.stdErr == doctest::Approx(0.004275543694541238).epsilon(1e-12));
    CHECK(r.Rc == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(r.nDiverged == 0);
}

TEST_CASE("uniform payoffs collapse the variance") {
    const std::vector<double> logs(16, 0.0);
    const std::vector<unsigned char> crossed(16, 0);
    EstimateResult r = reduce_payoffs(logs, crossed);
    CHECK(r.I == 1.0);
    CHECK(r.varU == 0.0);
    CHECK(r.reU == 0.0);
    CHECK(r.stdErr == 0.0);
    CHECK(r.Rc == 0.0);
}

TEST_CASE("reduction guards") {
    std::vector<double> one = {0.0};
    std::vector<unsigned char> onec = {0};
    CHECK_THROWS_AS(reduce_payoffs(one, onec), IllPosedConfig);

    std::vector<double> two = {0.0, 0.0};
    std::vector<unsigned char> mismatched = {0};
    CHECK_THROWS_AS(reduce_payoffs(two, mismatched), IllPosedConfig);

    std::vector<double> gone = {kNegInf, kNegInf};
    std::vector<unsigned char> c2 = {0, 0};
    CHECK_THROWS_AS(reduce_payoffs(gone, c2), SimulationDiverged);
}

TEST_CASE("diverged slots lose their weight") {
    // two live paths at log 0 plus one dead slot: I = 2/3
    const std::vector<double> logs = {0.0, kNegInf, 0.0};
    const std::vector<unsigned char> crossed = {0, 0, 1};
    EstimateResult r = reduce_payoffs(logs, crossed);
    CHECK(r.I == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(r.nDiverged == 1);
    CHECK(r.Rc == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("free martingale is exact under the zero control") {
    ModelParams p;
    ModelSpec m = build_bistable_model_hconst(p, 0.0);
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    pol.dtSlow = 1e-3;
    RunConfig rc;
    rc.N = 64;
    EstimateResult r = run_estimate(m, u0, pol, rc);
    CHECK(r.I == 1.0);
    CHECK(r.varU == 0.0);
    CHECK(r.nDiverged == 0);
}

TEST_CASE("estimate requires at least two paths") {
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    RunConfig rc;
    rc.N = 1;
    CHECK_THROWS_AS(run_estimate(m, u0, pol, rc), IllPosedConfig);
}

TEST_CASE("worker count never changes the numbers") {
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    ControlField u = make_averaged_control(bistable_grid(251, 100), m);
    StepPolicy pol;
    pol.dtSlow = 1e-3;

    RunConfig rc;
    rc.N = 300;
    rc.seed = 17;

    rc.workers = 1;
    EstimateResult serial = run_estimate(m, u, pol, rc);
    for (int w : {2, 3, 7, 32}) {
        rc.workers = w;
        EstimateResult par = run_estimate(m, u, pol, rc);
        CHECK(par.I == serial.I);
        CHECK(par.varU == serial.varU);
        CHECK(par.reU == serial.reU);
        CHECK(par.Rc == serial.Rc);
        CHECK(par.nClamped == serial.nClamped);
        CHECK(par.nOutOfDomain == serial.nOutOfDomain);
    }
}

TEST_CASE("mass divergence aborts with the first failure time") {
    ModelParams p;
    p.T = 8000.0;
    ModelSpec m = build_bistable_model(p);
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    pol.rule = StepRule::fixed;
    pol.dtSlow = 40.0;
    RunConfig rc;
    rc.N = 32;
    try {
        run_estimate(m, u0, pol, rc);
        FAIL("expected the run to abort");
    } catch (const SimulationDiverged& e) {
        CHECK(std::isfinite(e.time));
        CHECK(e.time > 0.0);
    }
}

TEST_CASE("tolerated divergence keeps the live weight") {
    // cubic drift from the origin: escape is noise-triggered, so under a
    // coarse step only part of the ensemble blows up
    ModelParams p;
    p.x0 = 0.0;
    p.T = 5.0;
    ModelSpec m;
    m.params = p;
    m.f = [](double x, double) { return x * x * x; };
    m.g = [](double x, double y) { return x - y; };
    m.alpha1 = [](double) { return 1.0; };
    m.alpha2 = [](double, double) { return 1.0; };
    m.h = [](double) { return 0.0; };

    ControlField u0 = make_zero_control();
    StepPolicy pol;
    pol.rule = StepRule::fixed;
    pol.dtSlow = 0.1;
    RunConfig rc;
    rc.N = 64;
    rc.seed = 11;
    rc.maxDivergedFrac = 1.0;
    EstimateResult r = run_estimate(m, u0, pol, rc);
    CHECK(r.nDiverged > 0);
    CHECK(r.nDiverged < rc.N);
    // cost-free survivors all carry unit weight
    const double live = double(rc.N - r.nDiverged) / double(rc.N);
    CHECK(r.I == doctest::Approx(live).epsilon(1e-12));
}

TEST_CASE("sweep preconditions") {
    ModelParams p;
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    RunConfig rc;
    rc.N = 8;
    auto family = [](const ModelParams& q) { return build_bistable_model(q); };

    CHECK_THROWS_AS(sweep_epsilon(family, p, {}, u0, pol, rc), ValidationError);
    CHECK_THROWS_AS(sweep_epsilon(family, p, {0.1, 0.1}, u0, pol, rc),
                    ValidationError);
    CHECK_THROWS_AS(sweep_epsilon(family, p, {0.05, 0.1}, u0, pol, rc),
                    ValidationError);
}

TEST_CASE("sweep runs one estimate per epsilon") {
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    ControlField u = make_averaged_control(bistable_grid(251, 100), m);
    StepPolicy pol;
    pol.dtSlow = 1e-3;
    RunConfig rc;
    rc.N = 200;
    rc.seed = 5;
    auto family = [](const ModelParams& q) { return build_bistable_model(q); };

    auto rows = sweep_epsilon(family, p, {0.1, 0.05}, u, pol, rc);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].epsilon == 0.1);
    CHECK(rows[1].epsilon == 0.05);
    CHECK(rows[0].est.I > 0.0);
    CHECK(rows[1].est.I > 0.0);

    // single-entry sweep reproduces a direct run bitwise
    ModelParams q = p;
    q.epsilon = 0.1;
    EstimateResult direct = run_estimate(build_bistable_model(q), u, pol, rc);
    CHECK(rows[0].est.I == direct.I);
    CHECK(rows[0].est.varU == direct.varU);
}

TEST_CASE("cost-free family has a silent sweep") {
    ModelParams p;
    ModelSpec flatModel = build_bistable_model_hconst(p, 0.0);

    // the control solved from the cost-free equation is numerically tiny,
    // so the weights stay at 1 up to roundoff
    PdeConfig cfg;
    cfg.nx = 251;
    cfg.m = 100;
    AveragedModel avg = analytic_average_bistable(
        flatModel, uniform_nodes(cfg.xLo, cfg.xHi, cfg.nx));
    auto grid = std::make_shared<const ValueGrid>(solve_phi0(avg, p, cfg));
    ControlField u = make_averaged_control(grid, flatModel);

    StepPolicy pol;
    pol.dtSlow = 1e-3;
    RunConfig rc;
    rc.N = 100;
    auto family = [](const ModelParams& q) {
        return build_bistable_model_hconst(q, 0.0);
    };
    auto rows = sweep_epsilon(family, p, {0.1, 0.05, 0.025}, u, pol, rc);
    for (const auto& row : rows) {
        CHECK(std::abs(row.est.I - 1.0) < 1e-9);
        CHECK(row.est.reU < 1e-9);
    }
}

TEST_CASE("relative error decays along the sweep") {
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    ControlField u = make_averaged_control(bistable_grid(2000, 1000), m);
    StepPolicy pol;
    RunConfig rc;
    rc.N = 1500;
    rc.seed = 1;
    auto family = [](const ModelParams& q) { return build_bistable_model(q); };

    auto rows = sweep_epsilon(family, p, {0.1, 0.03, 0.01}, u, pol, rc);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].est.reU > rows[1].est.reU);
    CHECK(rows[1].est.reU > rows[2].est.reU);

    // efficiency gain in log-log terms: reU shrinks with epsilon
    const double slope =
        (std::log(rows[2].est.reU) - std::log(rows[0].est.reU)) /
        (std::log(rows[2].epsilon) - std::log(rows[0].epsilon));
    CHECK(slope > 0.0);
}

TEST_CASE("variance reduction against the flat baseline") {
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    ControlField u = make_averaged_control(bistable_grid(2000, 1000), m);
    ControlField zero = make_zero_control();
    StepPolicy pol;
    RunConfig rc;
    rc.N = 2000;
    rc.seed = 3;
    for (double eps : {0.1, 0.01}) {
        ModelParams q = p;
        q.epsilon = eps;
        ModelSpec me = build_bistable_model(q);
        EstimateResult controlled = run_estimate(me, u, pol, rc);
        EstimateResult plain = run_estimate(me, zero, pol, rc);
        CHECK(controlled.varU < plain.varU);
    }
}

TEST_CASE("environment override for the worker pool") {
    unsetenv("SFIS_WORKERS");
    CHECK(resolve_workers(3) == 3);
    setenv("SFIS_WORKERS", "8", 1);
    CHECK(resolve_workers(3) == 8);
    setenv("SFIS_WORKERS", "0", 1);
    CHECK(resolve_workers(3) == 3);
    setenv("SFIS_WORKERS", "oops", 1);
    CHECK(resolve_workers(3) == 3);
    setenv("SFIS_WORKERS", "100000", 1);
    CHECK(resolve_workers(3) == 256);
    unsetenv("SFIS_WORKERS");
}

TEST_CASE("csv row carries the full provenance") {
    CHECK(estimate_csv_header() ==
          "beta,epsilon,N,dt,I_N,varU,reU,stdErr,R_c,nClamped,seed,wallClock");
    ModelParams p;
    StepPolicy pol;
    RunConfig rc;
    rc.N = 10000;
    rc.seed = 99;
    EstimateResult r;
    r.I = 0.25;
    r.varU = 0.5;
    r.reU = 2.828;
    r.stdErr = 0.007;
    r.Rc = 0.19;
    r.nClamped = 3;
    r.wallClock = 123.456;  // excluded from the row to keep bytes stable
    const std::string row = estimate_csv_row(p, pol, rc, r);
    CHECK(row == "1,0.1,10000,1e-04,0.25,0.5,2.828,0.007,0.19,3,99,0\n");
}
