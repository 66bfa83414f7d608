#pragma once

#include <cstdint>

#include "sfis/control.hpp"
#include "sfis/model.hpp"
#include "sfis/rng.hpp"

namespace sfis {

enum class StepRule { fixed, epsilon_scaled };

struct StepPolicy {
    double dtSlow = 1e-4;
    StepRule rule = StepRule::epsilon_scaled;
    double epsFactor = 0.1;
    double barrier = 0.0;

    double dt(double eps) const;
};

struct PathState {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double costInt = 0.0;
    double logZ = 0.0;
    bool crossed = false;
};

struct PathResult {
    double x = 0.0;
    double y = 0.0;
    double costInt = 0.0;
    double logZ = 0.0;
    double payoffLog = 0.0;
    bool crossed = false;
    std::int64_t nSteps = 0;
};

// One Euler-Maruyama step of the controlled pair. All coefficients are
// read at the pre-step state, the running cost uses the left endpoint,
// and the log-likelihood ratio is accumulated with the increments that
// were actually sampled. Barrier crossings are checked after the update.
void em_step(const ModelSpec& model, const ControlField& control,
             const StepPolicy& policy, PathState& state, double dt, double z0,
             double z1);

PathResult run_trajectory(const ModelSpec& model, const ControlField& control,
                          const StepPolicy& policy, std::uint64_t seed,
                          std::uint64_t stream);

}  // namespace sfis
