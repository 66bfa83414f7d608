#include "sfis/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "sfis/common.hpp"

namespace sfis {

double StepPolicy::dt(double eps) const {
    if (!(dtSlow > 0.0)) throw IllPosedConfig("dtSlow must be positive");
    if (rule == StepRule::fixed) return dtSlow;
    if (!(epsFactor > 0.0)) throw IllPosedConfig("epsFactor must be positive");
    return std::min(dtSlow, epsFactor * eps);
}

void em_step(const ModelSpec& model, const ControlField& control,
             const StepPolicy& policy, PathState& state, double dt, double z0,
             double z1) {
    const double beta = model.params.beta;
    const double eps = model.params.epsilon;
    const double x = state.x, y = state.y;

    const double fv = model.f(x, y);
    const double gv = model.g(x, y);
    const double a1 = model.alpha1(x);
    const double a2 = model.alpha2(x, y);
    const double hv = model.h(x);
    const auto u = control.at(state.t, x, y);

    const double sqDt = std::sqrt(dt);
    const double dW1 = sqDt * z0;
    const double dW2 = sqDt * z1;
    const double sqBeta = std::sqrt(beta);

    state.x = x + (fv - a1 * u[0]) * dt + a1 / sqBeta * dW1;
    state.y = y + (gv / eps - a2 * u[1] / std::sqrt(eps)) * dt +
              a2 / (sqBeta * std::sqrt(eps)) * dW2;
    state.logZ += -sqBeta * (u[0] * dW1 + u[1] * dW2) +
                  0.5 * beta * (u[0] * u[0] + u[1] * u[1]) * dt;
    state.costInt += hv * dt;
    state.t += dt;
    if (!std::isfinite(state.x) || !std::isfinite(state.y))
        throw SimulationDiverged(state.t);
    if (state.x >= policy.barrier) state.crossed = true;
}

PathResult run_trajectory(const ModelSpec& model, const ControlField& control,
                          const StepPolicy& policy, std::uint64_t seed,
                          std::uint64_t stream) {
    const ModelParams& p = model.params;
    const double span = p.T - p.t0;
    const double dt = policy.dt(p.epsilon);
    const std::int64_t n =
        std::max<std::int64_t>(1, std::int64_t(std::ceil(span / dt - 1e-9)));

    PathState state;
    state.t = p.t0;
    state.x = p.x0;
    state.y = p.y0;
    if (state.x >= policy.barrier) state.crossed = true;

    GaussianStream gauss(seed, stream);
    for (std::int64_t k = 0; k < n; ++k) {
        const double tNext = k + 1 == n ? p.T : p.t0 + double(k + 1) * dt;
        const double dtk = tNext - state.t;
        const auto z = gauss.pair();
        em_step(model, control, policy, state, dtk, z.first, z.second);
        state.t = tNext;
    }

    PathResult out;
    out.x = state.x;
    out.y = state.y;
    out.costInt = state.costInt;
    out.logZ = state.logZ;
    out.payoffLog = -p.beta * state.costInt - state.logZ;
    out.crossed = state.crossed;
    out.nSteps = n;
    return out;
}

}  // namespace sfis
