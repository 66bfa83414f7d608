#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sfis/control.hpp"
#include "sfis/model.hpp"
#include "sfis/simulate.hpp"

namespace sfis {

struct RunConfig {
    int N = 10000;
    std::uint64_t seed = 0;
    int workers = 1;
    double maxDivergedFrac = 0.01;
    std::uint64_t streamBase = kStreamEstimator;
};

struct EstimateResult {
    double I = 0.0;
    double varU = 0.0;
    double reU = 0.0;
    double stdErr = 0.0;
    double Rc = 0.0;
    std::int64_t nClamped = 0;
    std::int64_t nOutOfDomain = 0;
    std::int64_t nDiverged = 0;
    double wallClock = 0.0;
};

// Log-space reduction of per-path log payoffs: logsumexp mean, then a
// second pass for the centered moment. Slots holding -inf (diverged
// paths) contribute zero weight. Deterministic given the slot order.
EstimateResult reduce_payoffs(const std::vector<double>& payoffLog,
                              const std::vector<unsigned char>& crossed);

// Monte Carlo sweep over N independent paths. Path i draws from the
// stream streamBase + i regardless of worker count, payoffs land in
// per-path slots, and the reduction runs serially in slot order, so the
// numbers are identical for any worker split. Diverged paths contribute
// zero weight; more than maxDivergedFrac of them aborts the run.
// Control clamp counters are reset at entry and harvested at exit.
EstimateResult run_estimate(const ModelSpec& model, const ControlField& control,
                            const StepPolicy& policy, const RunConfig& cfg);

struct SweepEntry {
    double epsilon = 0.0;
    EstimateResult est;
};

// One estimate per epsilon, reusing a single control field (the averaged
// value function does not depend on epsilon). The list must be strictly
// decreasing and nonempty.
std::vector<SweepEntry> sweep_epsilon(
    const std::function<ModelSpec(const ModelParams&)>& family,
    ModelParams base, const std::vector<double>& epsList,
    const ControlField& control, const StepPolicy& policy,
    const RunConfig& cfg);

// Requested worker count, overridden by the SFIS_WORKERS environment
// variable when it parses to a positive integer.
int resolve_workers(int requested);

std::string estimate_csv_header();
std::string estimate_csv_row(const ModelParams& params, const StepPolicy& policy,
                             const RunConfig& cfg, const EstimateResult& r);

}  // namespace sfis
