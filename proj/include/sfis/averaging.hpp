#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfis/model.hpp"

namespace sfis {

enum class AveragedProvenance { analytic, ergodic_average };

std::vector<double> uniform_nodes(double lo, double hi, int n);

// Limiting slow-dynamics coefficients tabulated on the PDE grid and
// linearly interpolated between nodes.
struct AveragedModel {
    std::vector<double> grid;
    std::vector<double> fTilde;
    std::vector<double> aTilde;
    std::vector<double> hTilde;
    AveragedProvenance provenance = AveragedProvenance::analytic;

    double fAt(double x) const;
    double aAt(double x) const;
    double hAt(double x) const;
};

// Closed-form averaging for the bistable example: the fast marginal is
// Gaussian around x, so the coupling term averages out exactly.
AveragedModel analytic_average_bistable(const ModelSpec& model,
                                        const std::vector<double>& grid);

struct ErgodicAverage {
    double fBar = 0.0;
    double aaBar = 0.0;
    double hBar = 0.0;
    double fStdErr = 0.0;  // batch-means standard error of fBar
    double yMean = 0.0;    // fast-sample moments, for invariant-law checks
    double yVar = 0.0;
};

ErgodicAverage ergodic_average(const ModelSpec& model, double x, long M,
                               long burnIn, double dtFast,
                               std::uint64_t seed = 0x9d2c5680u);

long default_burn_in(const ModelSpec& model, double x, double dtFast);

// Contraction-probe estimate of the fast subsystem's relaxation time.
// Returns the probe horizon as a conservative ceiling when no decay is
// detected (the dissipativity guard relies on that).
double estimate_mixing_time(const ModelSpec& model, double x);

std::string averaged_model_csv(const AveragedModel& avg);

}  // namespace sfis
