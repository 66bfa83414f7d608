#include "sfis/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sfis/common.hpp"

namespace sfis {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ParseError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, int line) {
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE)
        fail(line, "expected a number, got '" + v + "'");
    return d;
}

std::int64_t parse_int(const std::string& v, int line) {
    errno = 0;
    char* end = nullptr;
    const long long d = std::strtoll(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE)
        fail(line, "expected an integer, got '" + v + "'");
    return d;
}

std::uint64_t parse_uint(const std::string& v, int line) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long d = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE ||
        v.front() == '-')
        fail(line, "expected a nonnegative integer, got '" + v + "'");
    return d;
}

std::vector<double> parse_double_list(const std::string& v, int line) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) out.push_back(parse_double(trim(item), line));
    if (out.empty()) fail(line, "expected a comma-separated number list");
    return out;
}

}  // namespace

const char* mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::standard_mc: return "standard-mc";
        case RunMode::importance_sampling: return "importance-sampling";
        case RunMode::both: return "both";
    }
    return "importance-sampling";
}

CliConfig parse_config_text(const std::string& text) {
    CliConfig cfg;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s.front() == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "model" && section != "pde" && section != "policy" &&
                section != "run" && section != "sweep" && section != "surface")
                fail(line, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        if (section.empty()) fail(line, "key before any [section]");

        if (section == "model") {
            if (key == "tag") {
                if (val != "bistable" && val != "hconst")
                    fail(line, "unknown model tag '" + val + "'");
                cfg.tag = val;
            } else if (key == "beta") {
                cfg.model.beta = parse_double(val, line);
            } else if (key == "epsilon") {
                cfg.model.epsilon = parse_double(val, line);
            } else if (key == "t0") {
                cfg.model.t0 = parse_double(val, line);
            } else if (key == "T") {
                cfg.model.T = parse_double(val, line);
            } else if (key == "x0") {
                cfg.model.x0 = parse_double(val, line);
            } else if (key == "y0") {
                cfg.model.y0 = parse_double(val, line);
            } else if (key == "c") {
                cfg.hconstC = parse_double(val, line);
            } else {
                fail(line, "unknown [model] key '" + key + "'");
            }
        } else if (section == "pde") {
            if (key == "nx") {
                cfg.pde.nx = int(parse_int(val, line));
            } else if (key == "m") {
                cfg.pde.m = int(parse_int(val, line));
            } else if (key == "xlo") {
                cfg.pde.xLo = parse_double(val, line);
            } else if (key == "xhi") {
                cfg.pde.xHi = parse_double(val, line);
            } else if (key == "bc") {
                if (val == "no_flux") cfg.pde.bc = BcRule::no_flux;
                else if (val == "dirichlet_one") cfg.pde.bc = BcRule::dirichlet_one;
                else fail(line, "unknown bc '" + val + "'");
            } else {
                fail(line, "unknown [pde] key '" + key + "'");
            }
        } else if (section == "policy") {
            if (key == "dt") {
                cfg.policy.dtSlow = parse_double(val, line);
            } else if (key == "rule") {
                if (val == "fixed") cfg.policy.rule = StepRule::fixed;
                else if (val == "epsilon_scaled") cfg.policy.rule = StepRule::epsilon_scaled;
                else fail(line, "unknown step rule '" + val + "'");
            } else if (key == "epsfactor") {
                cfg.policy.epsFactor = parse_double(val, line);
            } else if (key == "barrier") {
                cfg.policy.barrier = parse_double(val, line);
            } else {
                fail(line, "unknown [policy] key '" + key + "'");
            }
        } else if (section == "run") {
            if (key == "N") {
                cfg.N = int(parse_int(val, line));
            } else if (key == "seed") {
                cfg.seed = parse_uint(val, line);
            } else if (key == "workers") {
                cfg.workers = int(parse_int(val, line));
            } else if (key == "mode") {
                if (val == "standard-mc") cfg.mode = RunMode::standard_mc;
                else if (val == "importance-sampling") cfg.mode = RunMode::importance_sampling;
                else if (val == "both") cfg.mode = RunMode::both;
                else fail(line, "unknown mode '" + val + "'");
            } else if (key == "out") {
                cfg.out = val;
            } else {
                fail(line, "unknown [run] key '" + key + "'");
            }
        } else if (section == "sweep") {
            if (key == "eps") cfg.sweepEps = parse_double_list(val, line);
            else fail(line, "unknown [sweep] key '" + key + "'");
        } else {
            if (key == "ns") {
                cfg.surfaceNs = int(parse_int(val, line));
            } else if (key == "nx") {
                cfg.surfaceNx = int(parse_int(val, line));
            } else if (key == "y") {
                cfg.surfaceY = parse_double(val, line);
            } else {
                fail(line, "unknown [surface] key '" + key + "'");
            }
        }
    }
    return cfg;
}

CliConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const CliConfig& cfg) {
    std::ostringstream os;
    os << "[model]\n";
    os << "tag = " << cfg.tag << "\n";
    if (cfg.tag == "hconst") os << "c = " << fmt(cfg.hconstC) << "\n";
    os << "beta = " << fmt(cfg.model.beta) << "\n";
    os << "epsilon = " << fmt(cfg.model.epsilon) << "\n";
    os << "t0 = " << fmt(cfg.model.t0) << "\n";
    os << "T = " << fmt(cfg.model.T) << "\n";
    os << "x0 = " << fmt(cfg.model.x0) << "\n";
    os << "y0 = " << fmt(cfg.model.y0) << "\n";
    os << "\n[pde]\n";
    os << "nx = " << cfg.pde.nx << "\n";
    os << "m = " << cfg.pde.m << "\n";
    os << "xlo = " << fmt(cfg.pde.xLo) << "\n";
    os << "xhi = " << fmt(cfg.pde.xHi) << "\n";
    os << "bc = " << (cfg.pde.bc == BcRule::no_flux ? "no_flux" : "dirichlet_one")
       << "\n";
    os << "\n[policy]\n";
    os << "dt = " << fmt(cfg.policy.dtSlow) << "\n";
    os << "rule = "
       << (cfg.policy.rule == StepRule::fixed ? "fixed" : "epsilon_scaled")
       << "\n";
    os << "epsfactor = " << fmt(cfg.policy.epsFactor) << "\n";
    os << "barrier = " << fmt(cfg.policy.barrier) << "\n";
    os << "\n[run]\n";
    os << "N = " << cfg.N << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "workers = " << cfg.workers << "\n";
    os << "mode = " << mode_name(cfg.mode) << "\n";
    if (!cfg.out.empty()) os << "out = " << cfg.out << "\n";
    if (!cfg.sweepEps.empty()) {
        os << "\n[sweep]\neps = ";
        for (std::size_t i = 0; i < cfg.sweepEps.size(); ++i) {
            if (i) os << ',';
            os << fmt(cfg.sweepEps[i]);
        }
        os << "\n";
    }
    os << "\n[surface]\n";
    os << "ns = " << cfg.surfaceNs << "\n";
    os << "nx = " << cfg.surfaceNx << "\n";
    os << "y = " << fmt(cfg.surfaceY) << "\n";
    return os.str();
}

void validate_config(const CliConfig& cfg) {
    validate_params(cfg.model);
    if (cfg.tag == "hconst" && cfg.hconstC < 0.0)
        throw ValidationError("constant running cost must be nonnegative");
    if (cfg.N < 2) throw ValidationError("N must be at least 2");
    if (cfg.workers < 1) throw ValidationError("workers must be at least 1");
    if (cfg.pde.nx < 3 || cfg.pde.m < 1)
        throw ValidationError("pde grid needs nx >= 3 and m >= 1");
    if (!(cfg.pde.xLo < cfg.pde.xHi))
        throw ValidationError("pde domain bounds are inverted");
    if (!(cfg.policy.dtSlow > 0.0)) throw ValidationError("dt must be positive");
    if (!(cfg.policy.epsFactor > 0.0))
        throw ValidationError("epsfactor must be positive");
    if (cfg.surfaceNs < 2 || cfg.surfaceNx < 2)
        throw ValidationError("surface lattice needs ns and nx >= 2");
    for (double e : cfg.sweepEps)
        if (!(e > 0.0)) throw ValidationError("sweep epsilons must be positive");
}

ModelSpec build_model(const CliConfig& cfg) {
    if (cfg.tag == "hconst") return build_bistable_model_hconst(cfg.model, cfg.hconstC);
    return build_bistable_model(cfg.model);
}

}  // namespace sfis
