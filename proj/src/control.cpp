#include "sfis/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sfis/common.hpp"

namespace sfis {

namespace {

double grid_min(const std::vector<double>& v) {
    return *std::min_element(v.begin(), v.end());
}

// Queries that target a node can miss it by an ulp after the index
// division; snapping keeps node evaluations exact.
double snap_index(double s) {
    const double r = std::nearbyint(s);
    const double tol = 32.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(r));
    return std::abs(s - r) <= tol ? r : s;
}

}  // namespace

ControlField make_zero_control() {
    ControlField f;
    f.kind_ = ControlKind::zero;
    return f;
}

ControlField make_averaged_control(std::shared_ptr<const ValueGrid> grid,
                                   const ModelSpec& model, ControlOptions opts) {
    if (!grid) throw IllPosedConfig("averaged control needs a value grid");
    if (!(opts.uCap > 0.0) || !(opts.floorFrac > 0.0))
        throw IllPosedConfig("control cap and floor fraction must be positive");
    const double minPhi = grid_min(grid->phi);
    if (!(minPhi > 0.0))
        throw PositivityViolation("control construction requires positive phi0");
    ControlField f;
    f.kind_ = ControlKind::averaged_suboptimal;
    f.opts_ = opts;
    f.beta_ = model.params.beta;
    f.eps_ = model.params.epsilon;
    f.floor_ = opts.floorFrac * minPhi;
    f.alpha1_ = model.alpha1;
    f.grid1_ = std::move(grid);
    return f;
}

ControlField make_oracle_control(std::shared_ptr<const ValueGrid2d> grid,
                                 const ModelSpec& model, ControlOptions opts) {
    if (!grid) throw IllPosedConfig("oracle control needs a value grid");
    if (!(opts.uCap > 0.0) || !(opts.floorFrac > 0.0))
        throw IllPosedConfig("control cap and floor fraction must be positive");
    double minPhi = grid->phi.empty() ? 0.0 : grid_min(grid->phi.front());
    for (const auto& slice : grid->phi) minPhi = std::min(minPhi, grid_min(slice));
    if (!(minPhi > 0.0))
        throw PositivityViolation("control construction requires positive phi_eps");
    ControlField f;
    f.kind_ = ControlKind::full_oracle;
    f.opts_ = opts;
    f.beta_ = model.params.beta;
    f.eps_ = model.params.epsilon;
    f.floor_ = opts.floorFrac * minPhi;
    f.alpha1_ = model.alpha1;
    f.alpha2_ = model.alpha2;
    f.grid2_ = std::move(grid);
    return f;
}

std::array<double, 2> ControlField::at(double t, double x, double y) const {
    if (kind_ == ControlKind::zero) return {0.0, 0.0};

    if (kind_ == ControlKind::averaged_suboptimal) {
        const ValueGrid& g = *grid1_;
        const double dtRow = (g.T - g.t0) / double(g.m);
        double tau = snap_index((t - g.t0) / dtRow);
        tau = std::clamp(tau, 0.0, double(g.m));
        const int j = std::min(int(tau), g.m - 1);
        const double wt = tau - double(j);

        const double dx = (g.xHi - g.xLo) / double(g.nx - 1);
        double s = snap_index((x - g.xLo) / dx);
        if (s < 0.0 || s > double(g.nx - 1)) {
            counters_->outOfDomain.fetch_add(1, std::memory_order_relaxed);
            s = std::clamp(s, 0.0, double(g.nx - 1));
        }
        const int i = std::min(int(s), g.nx - 2);
        const double wx = s - double(i);

        const double* p0 = g.phi.data() + std::size_t(j) * g.nx + i;
        const double* p1 = p0 + g.nx;
        const double* d0 = g.dphi.data() + std::size_t(j) * g.nx + i;
        const double* d1 = d0 + g.nx;
        const double phi = (1.0 - wt) * ((1.0 - wx) * p0[0] + wx * p0[1]) +
                           wt * ((1.0 - wx) * p1[0] + wx * p1[1]);
        const double dphi = (1.0 - wt) * ((1.0 - wx) * d0[0] + wx * d0[1]) +
                            wt * ((1.0 - wx) * d1[0] + wx * d1[1]);

        double u1 = 0.0 - alpha1_(x) * dphi / (beta_ * std::max(phi, floor_));
        if (std::abs(u1) > opts_.uCap) {
            u1 = std::copysign(opts_.uCap, u1);
            counters_->clamped.fetch_add(1, std::memory_order_relaxed);
        }
        return {u1, 0.0};
    }

    const ValueGrid2d& g = *grid2_;
    const std::size_t slice = g.sliceIndex(t);
    if (x < g.xLo || x > g.xHi || y < g.yLo || y > g.yHi)
        counters_->outOfDomain.fetch_add(1, std::memory_order_relaxed);
    const double phi = std::max(g.phiEval(slice, x, y), floor_);
    const double dpx = g.dphixEval(slice, x, y);
    const double dpy = g.dphiyEval(slice, x, y);
    double u1 = 0.0 - alpha1_(x) * dpx / (beta_ * phi);
    double u2 = 0.0 - alpha2_(x, y) * dpy / (beta_ * std::sqrt(eps_) * phi);
    bool clamped = false;
    if (std::abs(u1) > opts_.uCap) {
        u1 = std::copysign(opts_.uCap, u1);
        clamped = true;
    }
    if (std::abs(u2) > opts_.uCap) {
        u2 = std::copysign(opts_.uCap, u2);
        clamped = true;
    }
    if (clamped) counters_->clamped.fetch_add(1, std::memory_order_relaxed);
    return {u1, u2};
}

std::int64_t ControlField::clampCount() const {
    return counters_->clamped.load(std::memory_order_relaxed);
}

std::int64_t ControlField::outOfDomainCount() const {
    return counters_->outOfDomain.load(std::memory_order_relaxed);
}

void ControlField::resetCounters() const {
    counters_->clamped.store(0, std::memory_order_relaxed);
    counters_->outOfDomain.store(0, std::memory_order_relaxed);
}

std::string control_surface_csv(const ControlField& field,
                                const std::vector<double>& times,
                                const std::vector<double>& xs, double y) {
    std::ostringstream os;
    os << "s,x,u1\n";
    for (double t : times) {
        for (double x : xs) {
            const auto u = field.at(t, x, y);
            os << fmt(t) << ',' << fmt(x) << ',' << fmt(u[0]) << '\n';
        }
    }
    return os.str();
}

}  // namespace sfis
