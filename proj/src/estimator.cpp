#include "sfis/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "sfis/common.hpp"

namespace sfis {

int resolve_workers(int requested) {
    if (const char* env = std::getenv("SFIS_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return int(std::min(v, 256L));
    }
    return std::max(1, requested);
}

EstimateResult reduce_payoffs(const std::vector<double>& payoffLog,
                              const std::vector<unsigned char>& crossed) {
    const std::size_t N = payoffLog.size();
    if (N < 2 || crossed.size() != N)
        throw IllPosedConfig("reduction needs at least 2 matching slots");

    EstimateResult out;
    double L = -std::numeric_limits<double>::infinity();
    for (double p : payoffLog) L = std::max(L, p);
    if (!std::isfinite(L))
        throw SimulationDiverged(std::numeric_limits<double>::quiet_NaN());
    double S = 0.0;
    for (double p : payoffLog) S += std::exp(p - L);
    // log(S/N) vanishes exactly when every path carries the same weight,
    // which keeps the constant-cost variance at a hard zero
    const double logI = L + std::log(S / double(N));
    out.I = std::exp(logI);

    double sumD2 = 0.0;
    std::int64_t nCross = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const double d = std::exp(payoffLog[i] - logI) - 1.0;
        sumD2 += d * d;
        nCross += crossed[i];
        if (!std::isfinite(payoffLog[i])) ++out.nDiverged;
    }
    const double meanD2 = sumD2 / double(N);
    out.varU = out.I * out.I * meanD2;
    out.reU = std::sqrt(meanD2);
    out.stdErr = std::sqrt(out.varU / double(N));
    out.Rc = double(nCross) / double(N);
    return out;
}

EstimateResult run_estimate(const ModelSpec& model, const ControlField& control,
                            const StepPolicy& policy, const RunConfig& cfg) {
    if (cfg.N < 2) throw IllPosedConfig("sample count must be at least 2");
    if (!(cfg.maxDivergedFrac >= 0.0))
        throw IllPosedConfig("divergence tolerance must be nonnegative");

    const auto t0 = std::chrono::steady_clock::now();
    control.resetCounters();

    const std::size_t N = std::size_t(cfg.N);
    std::vector<double> payoff(N, 0.0);
    std::vector<unsigned char> crossed(N, 0);
    std::atomic<std::int64_t> diverged{0};
    std::mutex errMu;
    double firstDivergedT = std::numeric_limits<double>::quiet_NaN();
    std::exception_ptr fatal;

    const int workers = std::clamp(cfg.workers, 1, int(N));
    auto runChunk = [&](std::size_t lo, std::size_t hi) {
        try {
            for (std::size_t i = lo; i < hi; ++i) {
                try {
                    const PathResult r = run_trajectory(
                        model, control, policy, cfg.seed,
                        cfg.streamBase + std::uint64_t(i));
                    payoff[i] = r.payoffLog;
                    crossed[i] = r.crossed ? 1 : 0;
                } catch (const SimulationDiverged& e) {
                    payoff[i] = -std::numeric_limits<double>::infinity();
                    crossed[i] = 0;
                    diverged.fetch_add(1, std::memory_order_relaxed);
                    std::lock_guard<std::mutex> lk(errMu);
                    if (std::isnan(firstDivergedT)) firstDivergedT = e.time;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(errMu);
            if (!fatal) fatal = std::current_exception();
        }
    };

    if (workers == 1) {
        runChunk(0, N);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(workers));
        for (int w = 0; w < workers; ++w) {
            const std::size_t lo = N * std::size_t(w) / std::size_t(workers);
            const std::size_t hi = N * std::size_t(w + 1) / std::size_t(workers);
            pool.emplace_back(runChunk, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    const std::int64_t nDiverged = diverged.load();
    if (double(nDiverged) > cfg.maxDivergedFrac * double(N))
        throw SimulationDiverged(firstDivergedT);

    EstimateResult out;
    try {
        out = reduce_payoffs(payoff, crossed);
    } catch (const SimulationDiverged&) {
        throw SimulationDiverged(firstDivergedT);
    }
    out.nDiverged = nDiverged;
    out.nClamped = control.clampCount();
    out.nOutOfDomain = control.outOfDomainCount();
    out.wallClock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
}

std::vector<SweepEntry> sweep_epsilon(
    const std::function<ModelSpec(const ModelParams&)>& family,
    ModelParams base, const std::vector<double>& epsList,
    const ControlField& control, const StepPolicy& policy,
    const RunConfig& cfg) {
    if (epsList.empty()) throw ValidationError("epsilon sweep list is empty");
    for (std::size_t i = 1; i < epsList.size(); ++i)
        if (!(epsList[i] < epsList[i - 1]))
            throw ValidationError("epsilon sweep list must be strictly decreasing");

    std::vector<SweepEntry> out;
    out.reserve(epsList.size());
    for (double eps : epsList) {
        base.epsilon = eps;
        const ModelSpec model = family(base);
        SweepEntry e;
        e.epsilon = eps;
        e.est = run_estimate(model, control, policy, cfg);
        out.push_back(std::move(e));
    }
    return out;
}

std::string estimate_csv_header() {
    return "beta,epsilon,N,dt,I_N,varU,reU,stdErr,R_c,nClamped,seed,wallClock";
}

std::string estimate_csv_row(const ModelParams& params, const StepPolicy& policy,
                             const RunConfig& cfg, const EstimateResult& r) {
    std::ostringstream os;
    os << fmt(params.beta) << ',' << fmt(params.epsilon) << ',' << cfg.N << ','
       << fmt(policy.dt(params.epsilon)) << ',' << fmt(r.I) << ',' << fmt(r.varU)
       << ',' << fmt(r.reU) << ',' << fmt(r.stdErr) << ',' << fmt(r.Rc) << ','
       << r.nClamped << ',' << cfg.seed << ',' << fmt(0.0) << '\n';
    return os.str();
}

}  // namespace sfis
