#pragma once

#include <string>
#include <vector>

#include "sfis/averaging.hpp"
#include "sfis/model.hpp"

namespace sfis {

enum class BcRule { no_flux, dirichlet_one };

struct PdeConfig {
    int nx = 2000;  // spatial nodes
    int m = 1000;   // time steps
    double xLo = -4.0;
    double xHi = 6.0;
    BcRule bc = BcRule::no_flux;
};

// Backward-time solution phi0 (and its x derivative) on a uniform
// (time x space) grid. Row j holds time t0 + j * (T - t0)/m, so row m
// is the terminal condition and row 0 is the value at t0.
struct ValueGrid {
    double t0 = 0.0;
    double T = 1.0;
    int m = 0;
    int nx = 0;
    double xLo = 0.0;
    double xHi = 0.0;
    std::vector<double> x;
    std::vector<double> phi;   // (m+1) * nx, row-major
    std::vector<double> dphi;  // same layout

    double phiAt(int j, int i) const { return phi[std::size_t(j) * nx + i]; }
    double dphiAt(int j, int i) const { return dphi[std::size_t(j) * nx + i]; }

    // Bilinear in (t, x); queries are clamped to the grid box.
    double phiEval(double t, double xq) const;
    double dphiEval(double t, double xq) const;
};

ValueGrid solve_phi0(const AveragedModel& avg, const ModelParams& params,
                     const PdeConfig& cfg);

// U0 = -log(phi0)/beta on the same grid; phi carries U0, dphi its slope.
ValueGrid log_transform(const ValueGrid& grid, double beta);

struct Pde2dConfig {
    int nx = 331;
    int ny = 121;
    int m = 300;
    double xLo = -3.2;
    double xHi = 3.4;
    double yLo = -4.2;
    double yHi = 4.4;
    int storeEvery = 50;  // keep every k-th time slice (slice 0 always kept)
};

// Stored snapshots of the full two-dimensional solve; used as a
// desk-scale oracle, not in the estimation pipeline.
struct ValueGrid2d {
    double t0 = 0.0;
    double T = 1.0;
    int nx = 0;
    int ny = 0;
    double xLo = 0.0, xHi = 0.0, yLo = 0.0, yHi = 0.0;
    std::vector<double> x, y;
    std::vector<double> times;               // stored slice times, ascending
    std::vector<std::vector<double>> phi;    // per stored slice, nx*ny row-major in x
    std::vector<std::vector<double>> dphix;  // central differences per slice
    std::vector<std::vector<double>> dphiy;
    bool pecletWarning = false;

    std::size_t sliceIndex(double t) const;  // nearest stored slice
    double phiEval(std::size_t slice, double xq, double yq) const;
    double dphixEval(std::size_t slice, double xq, double yq) const;
    double dphiyEval(std::size_t slice, double xq, double yq) const;
};

ValueGrid2d solve_phi_eps_2d(const ModelSpec& model, const Pde2dConfig& cfg);

std::string value_grid_csv(const ValueGrid& grid);

}  // namespace sfis
