#include "sfis/validate.hpp"

#include <algorithm>
#include <cmath>

#include "sfis/common.hpp"
#include "sfis/rng.hpp"

namespace sfis {

MartingaleResult martingale_check(const ModelSpec& model,
                                 const ControlField& control,
                                 const StepPolicy& policy, int N,
                                 std::uint64_t seed) {
    ModelSpec costless = model;
    costless.h = [](double) { return 0.0; };

    RunConfig rc;
    rc.N = N;
    rc.seed = seed;
    rc.workers = resolve_workers(1);
    rc.streamBase = kStreamValidate;
    const EstimateResult est = run_estimate(costless, control, policy, rc);

    MartingaleResult out;
    out.mean = est.I;
    out.stdErr = est.stdErr;
    out.nDiverged = est.nDiverged;
    out.pass = std::abs(est.I - 1.0) <= 4.0 * est.stdErr;
    return out;
}

ZeroVarianceResult zero_variance_check(const ModelSpec& model,
                                       const StepPolicy& policy, int N,
                                       std::uint64_t seed) {
    const double c = model.h(0.0);
    for (double probe : {-3.0, -1.0, -0.25, 0.5, 1.75, 4.0})
        if (model.h(probe) != c)
            throw ValidationError("zero-variance check needs a constant cost");

    RunConfig rc;
    rc.N = N;
    rc.seed = seed;
    rc.workers = resolve_workers(1);
    rc.streamBase = kStreamValidate;
    const EstimateResult est =
        run_estimate(model, make_zero_control(), policy, rc);

    ZeroVarianceResult out;
    out.I = est.I;
    out.expected =
        std::exp(-model.params.beta * c * (model.params.T - model.params.t0));
    out.varU = est.varU;
    out.reU = est.reU;
    out.exactZero = est.varU == 0.0 && est.reU == 0.0;
    return out;
}

StrongErrorResult strong_error_4th(const ModelSpec& model,
                                   const AveragedModel& avg,
                                   const StepPolicy& policy, int N,
                                   std::uint64_t seed) {
    if (N < 2) throw IllPosedConfig("strong error probe needs N >= 2");
    const ModelParams& p = model.params;
    const double mix = estimate_mixing_time(model, p.x0);
    if (mix > 5.0 * p.epsilon)
        throw ValidationError("fast relaxation too slow for the averaging probe");

    const double span = p.T - p.t0;
    const double dt = policy.dt(p.epsilon);
    const std::int64_t n =
        std::max<std::int64_t>(1, std::int64_t(std::ceil(span / dt - 1e-9)));
    const double beta = p.beta;
    const double eps = p.epsilon;
    const double rootBeta = std::sqrt(beta);

    const std::uint64_t streamBase = kStreamValidate + (1ull << 30);
    auto simulate = [&](std::uint64_t stream, auto&& perStep) {
        GaussianStream gauss(seed, stream);
        double t = p.t0, x = p.x0, y = p.y0, xa = p.x0;
        for (std::int64_t k = 0; k < n; ++k) {
            const double tNext = k + 1 == n ? p.T : p.t0 + double(k + 1) * dt;
            const double dtk = tNext - t;
            const double sq = std::sqrt(dtk);
            const auto z = gauss.pair();
            const double dW1 = sq * z.first;
            const double dW2 = sq * z.second;
            const double a1 = model.alpha1(x);
            const double xN = x + model.f(x, y) * dtk + a1 / rootBeta * dW1;
            const double yN = y + model.g(x, y) / eps * dtk +
                              model.alpha2(x, y) / (rootBeta * std::sqrt(eps)) * dW2;
            const double xaN =
                xa + avg.fAt(xa) * dtk + avg.aAt(xa) / rootBeta * dW1;
            x = xN;
            y = yN;
            xa = xaN;
            t = tNext;
            if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(xa))
                throw SimulationDiverged(t);
            perStep(k, x - xa);
        }
    };

    std::vector<double> sum4(std::size_t(n), 0.0);
    for (int i = 0; i < N; ++i)
        simulate(streamBase + std::uint64_t(i), [&](std::int64_t k, double d) {
            const double d2 = d * d;
            sum4[std::size_t(k)] += d2 * d2;
        });

    std::size_t kStar = 0;
    for (std::size_t k = 1; k < sum4.size(); ++k)
        if (sum4[k] > sum4[kStar]) kStar = k;

    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < N; ++i)
        simulate(streamBase + std::uint64_t(i), [&](std::int64_t k, double d) {
            if (std::size_t(k) != kStar) return;
            const double d2 = d * d;
            const double d4 = d2 * d2;
            s1 += d4;
            s2 += d4 * d4;
        });

    StrongErrorResult out;
    out.err4 = s1 / double(N);
    const double var = std::max(0.0, s2 / double(N) - out.err4 * out.err4);
    out.stdErr = std::sqrt(var / double(N));
    out.tAt = kStar + 1 == std::size_t(n) ? p.T : p.t0 + double(kStar + 1) * dt;
    return out;
}

MeasureGap cross_measure_gap(const EstimateResult& a, const EstimateResult& b) {
    MeasureGap out;
    out.gap = std::abs(a.I - b.I);
    out.combinedSE = std::hypot(a.stdErr, b.stdErr);
    out.sigmas = out.combinedSE > 0.0 ? out.gap / out.combinedSE
                                      : (out.gap == 0.0 ? 0.0 : INFINITY);
    return out;
}

ControlGap control_gap_probe(const ControlField& suboptimal,
                             const ControlField& oracle,
                             const std::vector<double>& times,
                             const std::vector<double>& xs,
                             const std::vector<double>& ys) {
    ControlGap out;
    for (double t : times)
        for (double x : xs)
            for (double y : ys) {
                const auto us = suboptimal.at(t, x, y);
                const auto uo = oracle.at(t, x, y);
                out.supGap = std::max(out.supGap,
                                      std::hypot(us[0] - uo[0], us[1] - uo[1]));
                out.supU2 = std::max(out.supU2, std::abs(uo[1]));
            }
    return out;
}

}  // namespace sfis
