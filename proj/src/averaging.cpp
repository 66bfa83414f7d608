#include "sfis/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sfis/common.hpp"
#include "sfis/rng.hpp"

namespace sfis {

namespace {

double lerp_table(const std::vector<double>& xs, const std::vector<double>& ys,
                  double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = std::size_t(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - t) * ys[i] + t * ys[i + 1];
}

}  // namespace

std::vector<double> uniform_nodes(double lo, double hi, int n) {
    if (n < 2 || !(lo < hi)) throw IllPosedConfig("node grid needs n >= 2, lo < hi");
    std::vector<double> x(static_cast<std::size_t>(n));
    const double dx = (hi - lo) / double(n - 1);
    for (int i = 0; i < n; ++i) x[std::size_t(i)] = lo + double(i) * dx;
    x.back() = hi;
    return x;
}

double AveragedModel::fAt(double x) const { return lerp_table(grid, fTilde, x); }
double AveragedModel::aAt(double x) const { return lerp_table(grid, aTilde, x); }
double AveragedModel::hAt(double x) const { return lerp_table(grid, hTilde, x); }

AveragedModel analytic_average_bistable(const ModelSpec& model,
                                        const std::vector<double>& grid) {
    if (!model.bistable)
        throw ValidationError("analytic averaging applies to the bistable example only");
    if (grid.size() < 2) throw ValidationError("averaging grid needs at least 2 nodes");
    AveragedModel avg;
    avg.grid = grid;
    avg.fTilde.reserve(grid.size());
    avg.aTilde.reserve(grid.size());
    avg.hTilde.reserve(grid.size());
    for (double x : grid) {
        // E_{rho_x}[x - y] = 0, so only the potential part of f survives.
        avg.fTilde.push_back(-V1_prime(x));
        avg.aTilde.push_back(1.0);
        avg.hTilde.push_back(model.h(x));
    }
    avg.provenance = AveragedProvenance::analytic;
    return avg;
}

ErgodicAverage ergodic_average(const ModelSpec& model, double x, long M,
                               long burnIn, double dtFast, std::uint64_t seed) {
    if (M < 1) throw ValidationError("ergodic average needs M >= 1");
    if (!(dtFast > 0.0)) throw ValidationError("dtFast must be positive");
    const double eps = model.params.epsilon;
    const double beta = model.params.beta;
    const double diff = std::sqrt(dtFast / (beta * eps));

    GaussianStream gs(seed, kStreamAveraging);
    double y = model.params.y0;
    for (long i = 0; i < burnIn; ++i) {
        const auto z = gs.pair();
        y += model.g(x, y) / eps * dtFast + model.alpha2(x, y) * diff * z.first;
        if (!std::isfinite(y))
            throw SimulationDiverged("fast subsystem diverged during burn-in",
                                     double(i) * dtFast);
    }

    const long kBatches = 20;
    const long batchLen = std::max<long>(1, M / kBatches);
    double fSum = 0.0, aaSum = 0.0, hSum = 0.0;
    double ySum = 0.0, ySq = 0.0;
    double batchSum = 0.0, batchSq = 0.0, batchAcc = 0.0;
    long batches = 0, inBatch = 0;
    const double a1 = model.alpha1(x);
    const double hx = model.h(x);
    for (long i = 0; i < M; ++i) {
        const double fv = model.f(x, y);
        fSum += fv;
        aaSum += a1 * a1;
        hSum += hx;
        ySum += y;
        ySq += y * y;
        batchAcc += fv;
        if (++inBatch == batchLen) {
            const double bm = batchAcc / double(batchLen);
            batchSum += bm;
            batchSq += bm * bm;
            batchAcc = 0.0;
            inBatch = 0;
            ++batches;
        }
        const auto z = gs.pair();
        y += model.g(x, y) / eps * dtFast + model.alpha2(x, y) * diff * z.first;
        if (!std::isfinite(y))
            throw SimulationDiverged("fast subsystem diverged", double(i) * dtFast);
    }

    ErgodicAverage out;
    out.fBar = fSum / double(M);
    out.aaBar = aaSum / double(M);
    out.hBar = hSum / double(M);
    out.yMean = ySum / double(M);
    out.yVar = std::max(0.0, ySq / double(M) - out.yMean * out.yMean);
    if (out.aaBar <= 0.0)
        throw EllipticityViolation("averaged diffusion is not positive definite");
    if (batches > 1) {
        const double mean = batchSum / double(batches);
        const double var = batchSq / double(batches) - mean * mean;
        out.fStdErr = std::sqrt(std::max(0.0, var) / double(batches));
    }
    return out;
}

long default_burn_in(const ModelSpec& model, double x, double dtFast) {
    const double mix = estimate_mixing_time(model, x);
    return long(std::ceil(20.0 * mix / dtFast));
}

double estimate_mixing_time(const ModelSpec& model, double x) {
    const double eps = model.params.epsilon;
    const double dt = eps / 200.0;
    const long n = 2000;  // probe horizon 10 * eps
    const double beta = model.params.beta;
    const double diff = std::sqrt(dt / (beta * eps));

    GaussianStream gs(0x51ab1eu, kStreamProbe);
    double ya = model.params.y0;
    double yb = model.params.y0 + 1.0;
    // Shared noise cancels in the separation, leaving the contraction rate.
    double sumT = 0.0, sumL = 0.0, sumTT = 0.0, sumTL = 0.0;
    long count = 0;
    for (long i = 0; i < n; ++i) {
        const auto z = gs.pair();
        const double w = diff * z.first;
        ya += model.g(x, ya) / eps * dt + model.alpha2(x, ya) * w;
        yb += model.g(x, yb) / eps * dt + model.alpha2(x, yb) * w;
        const double sep = std::abs(yb - ya);
        if (!std::isfinite(ya) || !std::isfinite(yb) || sep <= 1e-14) break;
        const double t = double(i + 1) * dt;
        const double l = std::log(sep);
        sumT += t;
        sumL += l;
        sumTT += t * t;
        sumTL += t * l;
        ++count;
    }
    const double horizon = double(n) * dt;
    if (count < 10) return horizon;
    const double denom = double(count) * sumTT - sumT * sumT;
    if (denom <= 0.0) return horizon;
    const double slope = (double(count) * sumTL - sumT * sumL) / denom;
    if (slope >= -1e-12) return horizon;  // no contraction detected
    return std::min(-1.0 / slope, horizon);
}

std::string averaged_model_csv(const AveragedModel& avg) {
    std::string out = "x,fTilde,aTilde,hTilde\n";
    for (std::size_t i = 0; i < avg.grid.size(); ++i) {
        out += fmt(avg.grid[i]);
        out += ',';
        out += fmt(avg.fTilde[i]);
        out += ',';
        out += fmt(avg.aTilde[i]);
        out += ',';
        out += fmt(avg.hTilde[i]);
        out += '\n';
    }
    return out;
}

}  // namespace sfis
