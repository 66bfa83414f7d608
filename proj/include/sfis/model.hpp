#pragma once

#include <functional>

namespace sfis {

struct ModelParams {
    double beta = 1.0;      // inverse temperature
    double epsilon = 0.1;   // time-scale separation
    double t0 = 0.0;
    double T = 1.0;
    double x0 = -1.0;       // initial slow state
    double y0 = 0.0;        // initial fast state
};

void validate_params(const ModelParams& p);

// Coefficient functions of the slow-fast SDE. All callbacks are pure;
// a ModelSpec is shared read-only across workers.
struct ModelSpec {
    ModelParams params;
    std::function<double(double, double)> f;       // slow drift f(x, y)
    std::function<double(double, double)> g;       // fast drift g(x, y)
    std::function<double(double)> alpha1;          // slow noise coefficient, x only
    std::function<double(double, double)> alpha2;  // fast noise coefficient
    std::function<double(double)> h;               // running cost, x only, >= 0
    bool bistable = false;  // true for the double-well example family
};

// Bistable double-well example. The mollifier width is fixed at 0.02.
double eta(double z);
double eta_prime(double z);
double V1(double x);
double V1_prime(double x);
double bistable_h(double x);

ModelSpec build_bistable_model(const ModelParams& p);

// Bistable drift/noise structure with the running cost replaced by a
// constant (0 gives the pure weight-martingale setup).
ModelSpec build_bistable_model_hconst(const ModelParams& p, double c);

}  // namespace sfis
