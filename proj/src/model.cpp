#include "sfis/model.hpp"

#include <cmath>

#include "sfis/common.hpp"

namespace sfis {

namespace {

constexpr double kMollifierWidth = 0.02;
constexpr double kCosFreq = 4.0 * M_PI / 5.0;

// exp(-1/z) underflows past z = 1/700; returning 0 there skips the
// denormal range entirely and keeps the function exactly 0 for z <= 0.
constexpr double kEtaCutoff = 1.0 / 700.0;

}  // namespace

double eta(double z) {
    if (z <= kEtaCutoff) return 0.0;
    return std::exp(-1.0 / z);
}

double eta_prime(double z) {
    if (z <= kEtaCutoff) return 0.0;
    return std::exp(-1.0 / z) / (z * z);
}

double V1(double x) {
    const double ep = eta(x);
    const double em = eta(-x);
    const double xm = x - 1.0;
    const double xp = x + 1.0;
    return 0.5 * (1.0 - ep - em) * std::cos(kCosFreq * x) + 3.0 * ep * xm * xm +
           3.0 * em * xp * xp;
}

double V1_prime(double x) {
    const double ep = eta(x);
    const double em = eta(-x);
    const double dp = eta_prime(x);
    const double dm = eta_prime(-x);
    const double xm = x - 1.0;
    const double xp = x + 1.0;
    return 0.5 * (-dp + dm) * std::cos(kCosFreq * x) -
           0.5 * kCosFreq * (1.0 - ep - em) * std::sin(kCosFreq * x) +
           3.0 * dp * xm * xm + 6.0 * ep * xm - 3.0 * dm * xp * xp +
           6.0 * em * xp;
}

double bistable_h(double x) {
    const double a = eta((x + 2.0) / kMollifierWidth);
    const double b = eta((4.0 - x) / kMollifierWidth);
    const double xm = x - 1.0;
    return a * b * xm * xm + 10.0 * (2.0 - a - b);
}

void validate_params(const ModelParams& p) {
    if (!(p.beta > 0.0)) throw ValidationError("beta must be positive");
    if (!(p.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    if (!(p.t0 < p.T)) throw ValidationError("t0 must precede T");
}

ModelSpec build_bistable_model(const ModelParams& p) {
    validate_params(p);
    ModelSpec m;
    m.params = p;
    m.f = [](double x, double y) { return -V1_prime(x) - (x - y); };
    m.g = [](double x, double y) { return x - y; };
    m.alpha1 = [](double) { return 1.0; };
    m.alpha2 = [](double, double) { return 1.0; };
    m.h = [](double x) { return bistable_h(x); };
    m.bistable = true;
    return m;
}

ModelSpec build_bistable_model_hconst(const ModelParams& p, double c) {
    if (c < 0.0) throw ValidationError("constant running cost must be nonnegative");
    ModelSpec m = build_bistable_model(p);
    m.h = [c](double) { return c; };
    return m;
}

}  // namespace sfis
