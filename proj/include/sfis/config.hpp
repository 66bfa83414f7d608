#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfis/fkpde.hpp"
#include "sfis/model.hpp"
#include "sfis/simulate.hpp"

namespace sfis {

enum class RunMode { standard_mc, importance_sampling, both };

// Everything one experiment needs, read from a flat key = value file
// with [section] headers. Unknown keys and malformed values are parse
// errors with line numbers; semantic violations are validation errors.
struct CliConfig {
    std::string tag = "bistable";  // bistable | hconst
    double hconstC = 0.0;          // [model] c, used by the hconst tag
    ModelParams model;
    PdeConfig pde;
    StepPolicy policy;
    int N = 10000;
    std::uint64_t seed = 0;
    int workers = 1;
    RunMode mode = RunMode::importance_sampling;
    std::string out;  // empty means stdout
    std::vector<double> sweepEps;
    int surfaceNs = 41;
    int surfaceNx = 201;
    double surfaceY = 0.0;
};

CliConfig parse_config_text(const std::string& text);
CliConfig load_config(const std::string& path);
std::string config_to_text(const CliConfig& cfg);

void validate_config(const CliConfig& cfg);
ModelSpec build_model(const CliConfig& cfg);

const char* mode_name(RunMode mode);

}  // namespace sfis
