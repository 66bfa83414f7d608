#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "sfis/common.hpp"
#include "sfis/control.hpp"
#include "sfis/estimator.hpp"
#include "sfis/model.hpp"
#include "sfis/rng.hpp"
#include "sfis/simulate.hpp"

using namespace sfis;

namespace {

ModelSpec flat_model(double beta = 1.0) {
    ModelParams p;
    p.beta = beta;
    p.x0 = 0.0;
    p.y0 = 0.0;
    ModelSpec m;
    m.params = p;
    m.f = [](double, double) { return 0.0; };
    m.g = [](double, double) { return 0.0; };
    m.alpha1 = [](double) { return 1.0; };
    m.alpha2 = [](double, double) { return 1.0; };
    m.h = [](double) { return 0.0; };
    return m;
}

}  // namespace

TEST_CASE("step policy") {
    StepPolicy pol;
    CHECK(pol.dt(0.1) == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(pol.dt(1e-4) == doctest::Approx(1e-5).epsilon(1e-15));
    pol.rule = StepRule::fixed;
    CHECK(pol.dt(1e-6) == 1e-4);
    pol.dtSlow = 0.0;
    CHECK_THROWS_AS(pol.dt(0.1), IllPosedConfig);
    pol.dtSlow = 1e-4;
    pol.rule = StepRule::epsilon_scaled;
    pol.epsFactor = -1.0;
    CHECK_THROWS_AS(pol.dt(0.1), IllPosedConfig);
}

TEST_CASE("step count covers the horizon") {
    ModelSpec m = flat_model();
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    pol.rule = StepRule::fixed;
    pol.dtSlow = 1e-3;
    auto r = run_trajectory(m, u0, pol, 1, 0);
    CHECK(r.nSteps == 1000);

    pol.dtSlow = 3e-4;  // 3333.3 steps: last one is short
    r = run_trajectory(m, u0, pol, 1, 0);
    CHECK(r.nSteps == 3334);

    pol.dtSlow = 10.0;  // longer than the horizon: single step
    r = run_trajectory(m, u0, pol, 1, 0);
    CHECK(r.nSteps == 1);
}

TEST_CASE("zero control keeps the weight at one") {
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    pol.dtSlow = 1e-3;
    auto r = run_trajectory(m, u0, pol, 77, 3);
    CHECK(r.logZ == 0.0);
    CHECK(r.payoffLog == -p.beta * r.costInt);
}

TEST_CASE("driftless unit-noise slow channel accumulates raw increments") {
    ModelSpec m = flat_model(1.0);
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    pol.rule = StepRule::fixed;
    pol.dtSlow = 1e-3;

    const std::uint64_t seed = 99, stream = 5;
    auto r = run_trajectory(m, u0, pol, seed, stream);

    // replay the increments with the same stream and step schedule
    GaussianStream gs(seed, stream);
    double x = 0.0, t = 0.0;
    const std::int64_t n = 1000;
    for (std::int64_t k = 0; k < n; ++k) {
        const double tNext = k + 1 == n ? 1.0 : double(k + 1) * 1e-3;
        const double dtk = tNext - t;
        const auto z = gs.pair();
        x = x + 0.0 * dtk + 1.0 / std::sqrt(1.0) * (std::sqrt(dtk) * z.first);
        t = tNext;
    }
    CHECK(r.x == x);
    CHECK(r.payoffLog == 0.0);  // h and logZ both identically zero
}

TEST_CASE("one-step drift mean matches the coefficient") {
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    ControlField u0 = make_zero_control();
    const double dt = 1e-3;

    const int N = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < N; ++i) {
        PathState s;
        s.x = -1.0;
        s.y = 0.0;
        auto z = normal_pair(4242, std::uint64_t(i), 0);
        StepPolicy pol;
        em_step(m, u0, pol, s, dt, z.first, z.second);
        const double dx = s.x - (-1.0);
        sum += dx;
        sum2 += dx * dx;
    }
    const double mean = sum / N;
    const double var = sum2 / N - mean * mean;
    const double se = std::sqrt(var / N);
    const double want = m.f(-1.0, 0.0) * dt;
    CHECK(std::abs(mean - want) < 4.0 * se);
}

TEST_CASE("constant cost gives a deterministic payoff") {
    ModelParams p;
    p.beta = 2.0;
    ModelSpec m = build_bistable_model_hconst(p, 1.5);
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    pol.dtSlow = 1e-3;

    std::vector<double> payoffs;
    for (std::uint64_t i = 0; i < 16; ++i)
        payoffs.push_back(run_trajectory(m, u0, pol, 123, i).payoffLog);
    for (double pl : payoffs) CHECK(pl == payoffs[0]);  // bitwise
    CHECK(payoffs[0] ==
          doctest::Approx(-p.beta * 1.5 * (p.T - p.t0)).epsilon(1e-12));
}

TEST_CASE("identical inputs replay bitwise") {
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    auto a = run_trajectory(m, u0, pol, 2024, 17);
    auto b = run_trajectory(m, u0, pol, 2024, 17);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.costInt == b.costInt);
    CHECK(a.logZ == b.logZ);
    CHECK(a.payoffLog == b.payoffLog);
    CHECK(a.crossed == b.crossed);

    auto c = run_trajectory(m, u0, pol, 2024, 18);
    CHECK(a.payoffLog != c.payoffLog);
}

TEST_CASE("barrier flag latches on contact") {
    ModelSpec m = flat_model();
    m.params.x0 = 0.5;
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    pol.dtSlow = 0.25;
    pol.rule = StepRule::fixed;
    auto r = run_trajectory(m, u0, pol, 3, 0);
    CHECK(r.crossed);  // starts at the barrier side

    m.params.x0 = -1.0;
    pol.barrier = 50.0;  // unreachable
    r = run_trajectory(m, u0, pol, 3, 0);
    CHECK_FALSE(r.crossed);
}

TEST_CASE("non-finite state raises with the failure time") {
    ModelParams p;
    p.T = 8000.0;  // outer wells are quadratic, so blow-up is geometric
    ModelSpec m = build_bistable_model(p);
    ControlField u0 = make_zero_control();
    StepPolicy pol;
    pol.rule = StepRule::fixed;
    pol.dtSlow = 40.0;  // wildly unstable for the cubic drift

    bool threw = false;
    for (std::uint64_t i = 0; i < 64 && !threw; ++i) {
        try {
            run_trajectory(m, u0, pol, 7, i);
        } catch (const SimulationDiverged& e) {
            threw = true;
            CHECK(std::isfinite(e.time));
            CHECK(e.time > 0.0);
        }
    }
    CHECK(threw);
}

TEST_CASE("left-endpoint quadrature converges at first order") {
    // noiseless dynamics isolate the deterministic discretization error
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    m.alpha1 = [](double) { return 0.0; };
    m.alpha2 = [](double, double) { return 0.0; };
    ControlField u0 = make_zero_control();

    auto costAt = [&](double dt) {
        StepPolicy pol;
        pol.rule = StepRule::fixed;
        pol.dtSlow = dt;
        return run_trajectory(m, u0, pol, 0, 0).costInt;
    };
    const double c1 = costAt(1e-2);
    const double c2 = costAt(5e-3);
    const double c3 = costAt(2.5e-3);
    const double slope = std::log2((c1 - c2) / (c2 - c3));
    CHECK(slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("halving the step moves the estimate inside its noise band") {
    ModelParams p;
    ModelSpec m = build_bistable_model(p);
    ControlField u0 = make_zero_control();
    RunConfig rc;
    rc.N = 10000;
    rc.seed = 11;

    StepPolicy coarse;
    coarse.rule = StepRule::fixed;
    coarse.dtSlow = 1e-4;
    StepPolicy fine = coarse;
    fine.dtSlow = 5e-5;

    auto a = run_estimate(m, u0, coarse, rc);
    auto b = run_estimate(m, u0, fine, rc);
    const double combined = std::hypot(a.stdErr, b.stdErr);
    CHECK(std::abs(a.I - b.I) < 2.0 * combined);
}
