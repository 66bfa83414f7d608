#pragma once

#include <cstdint>
#include <vector>

#include "sfis/averaging.hpp"
#include "sfis/control.hpp"
#include "sfis/estimator.hpp"
#include "sfis/fkpde.hpp"
#include "sfis/model.hpp"
#include "sfis/simulate.hpp"

namespace sfis {

struct MartingaleResult {
    double mean = 0.0;
    double stdErr = 0.0;
    std::int64_t nDiverged = 0;
    bool pass = false;
};

// Checks E[1/Z] = 1 under the sampling measure: the running cost is
// switched off while drift, diffusion and the supplied control are kept,
// so the estimator must return 1 up to Monte Carlo noise (4 standard
// errors).
MartingaleResult martingale_check(const ModelSpec& model,
                                  const ControlField& control,
                                  const StepPolicy& policy, int N,
                                  std::uint64_t seed);

struct ZeroVarianceResult {
    double I = 0.0;
    double expected = 0.0;
    double varU = 0.0;
    double reU = 0.0;
    bool exactZero = false;
};

// With a constant running cost the payoff is deterministic, so under the
// zero control every path carries the same weight bitwise: the sample
// variance must be exactly zero and I must hit exp(-beta*c*(T-t0)).
// Rejects models whose cost is not constant.
ZeroVarianceResult zero_variance_check(const ModelSpec& model,
                                       const StepPolicy& policy, int N,
                                       std::uint64_t seed);

struct StrongErrorResult {
    double err4 = 0.0;    // max over grid times of E|x - xAvg|^4
    double stdErr = 0.0;  // Monte Carlo error of err4 at the maximizing time
    double tAt = 0.0;
};

// Couples the full pair with the averaged slow dynamics through a shared
// slow Brownian increment and measures the fourth-moment gap. Refuses to
// run when the fast subsystem's estimated relaxation time is not small
// against the averaging assumption.
StrongErrorResult strong_error_4th(const ModelSpec& model,
                                   const AveragedModel& avg,
                                   const StepPolicy& policy, int N,
                                   std::uint64_t seed);

struct MeasureGap {
    double gap = 0.0;
    double combinedSE = 0.0;
    double sigmas = 0.0;
};

// Agreement of two estimates of the same functional in combined-standard-
// error units.
MeasureGap cross_measure_gap(const EstimateResult& a, const EstimateResult& b);

struct ControlGap {
    double supGap = 0.0;  // largest |u_sub - u_oracle| over the lattice
    double supU2 = 0.0;   // largest fast-channel magnitude of the oracle
};

// Sup-norm closeness of the suboptimal control to the oracle over a probe
// lattice, together with the oracle's fast-channel size.
ControlGap control_gap_probe(const ControlField& suboptimal,
                             const ControlField& oracle,
                             const std::vector<double>& times,
                             const std::vector<double>& xs,
                             const std::vector<double>& ys);

}  // namespace sfis
