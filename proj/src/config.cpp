#include "vlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vlab {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

Vec3 parse_vec(const std::string& value, const std::string& key) {
    std::istringstream in(value);
    Vec3 out{};
    int count = 0;
    double x;
    while (in >> x) {
        if (count >= 3) throw std::invalid_argument("config: too many components in " + key);
        out[count++] = x;
    }
    if (count == 0) throw std::invalid_argument("config: empty vector for " + key);
    return out;
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(value, &pos);
        if (trim(value.substr(pos)).empty()) return x;
    } catch (...) {
    }
    throw std::invalid_argument("config: bad number for " + key + ": '" + value + "'");
}

long long parse_int(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(value, &pos);
        if (trim(value.substr(pos)).empty()) return x;
    } catch (...) {
    }
    throw std::invalid_argument("config: bad integer for " + key + ": '" + value + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (dim != 2 && dim != 3) fail("dimension must be 2 or 3");
    if (particles < 2) fail("particles must be >= 2");
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(t_final >= dt)) fail("t_final must be >= dt");
    if (sample_stride < 1) fail("sample_stride must be >= 1");
    if (interaction != "zero" && interaction != "cosine_product" && interaction != "cosine_x1" &&
        interaction != "poisson")
        fail("unknown interaction '" + interaction + "'");
    if (interaction == "poisson" && grid_n < 4) fail("poisson grid_n must be >= 4");
    if (mollify_delta < 0.0) fail("mollify_delta must be >= 0");
    if (magnetic != "constant" && magnetic != "sin_x1")
        fail("unknown magnetic model '" + magnetic + "'");
    if (omega < 0.0) fail("omega must be >= 0");
    if (family != "uniform_zero_v" && family != "maxwellian")
        fail("unknown initial family '" + family + "'");
    if (initial_mode != "shift" && initial_mode != "independent")
        fail("unknown initial mode '" + initial_mode + "'");
    if (method != "exact" && method != "entropic") fail("unknown distance method '" + method + "'");
    if (p != 1 && p != 2) fail("distance p must be 1 or 2");
    if (method == "entropic" && !(epsilon > 0.0)) fail("entropic epsilon must be positive");
    for (const auto& b : bound_set)
        if (b != "dobrushin" && b != "theorem2" && b != "theorem1_qualitative")
            fail("unknown bound '" + b + "'");
    if (slack < 0.0) fail("slack must be >= 0");
    if (!(c0 > 0.0)) fail("c0 must be positive");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (qual == "experiment.dimension") cfg.dim = static_cast<int>(parse_int(value, qual));
        else if (qual == "experiment.seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, qual));
        else if (qual == "experiment.particles") cfg.particles = static_cast<std::size_t>(parse_int(value, qual));
        else if (qual == "experiment.dt") cfg.dt = parse_double(value, qual);
        else if (qual == "experiment.t_final") cfg.t_final = parse_double(value, qual);
        else if (qual == "experiment.sample_stride") cfg.sample_stride = static_cast<int>(parse_int(value, qual));
        else if (qual == "experiment.output_dir") cfg.output_dir = value;
        else if (qual == "interaction.type") cfg.interaction = value;
        else if (qual == "interaction.amplitude") cfg.amplitude = parse_double(value, qual);
        else if (qual == "interaction.grid_n") cfg.grid_n = static_cast<int>(parse_int(value, qual));
        else if (qual == "interaction.mollify_delta") cfg.mollify_delta = parse_double(value, qual);
        else if (qual == "magnetic.type") cfg.magnetic = value;
        else if (qual == "magnetic.omega") cfg.omega = parse_double(value, qual);
        else if (qual == "magnetic.amplitude") cfg.b_amplitude = parse_double(value, qual);
        else if (qual == "initial.family") cfg.family = value;
        else if (qual == "initial.mode") cfg.initial_mode = value;
        else if (qual == "initial.seed2") cfg.seed2 = static_cast<std::uint64_t>(parse_int(value, qual));
        else if (qual == "initial.sigma") cfg.sigma = parse_double(value, qual);
        else if (qual == "initial.shift_x") cfg.shift_x = parse_vec(value, qual);
        else if (qual == "initial.shift_v") cfg.shift_v = parse_vec(value, qual);
        else if (qual == "distance.method") cfg.method = value;
        else if (qual == "distance.p") cfg.p = static_cast<int>(parse_int(value, qual));
        else if (qual == "distance.epsilon") cfg.epsilon = parse_double(value, qual);
        else if (qual == "distance.iterations") cfg.entropic_iters = static_cast<int>(parse_int(value, qual));
        else if (qual == "distance.cap") cfg.exact_cap = static_cast<std::size_t>(parse_int(value, qual));
        else if (qual == "bounds.set") {
            std::istringstream names(value);
            std::string name;
            cfg.bound_set.clear();
            while (names >> name) cfg.bound_set.push_back(name);
        }
        else if (qual == "bounds.slack") cfg.slack = parse_double(value, qual);
        else if (qual == "bounds.c_d") cfg.c_d = parse_double(value, qual);
        else if (qual == "bounds.C_d") cfg.C_d = parse_double(value, qual);
        else if (qual == "bounds.c0") cfg.c0 = parse_double(value, qual);
        else throw std::invalid_argument("config: unknown key '" + qual + "'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string canonical_config(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> kv;
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    kv["experiment.dimension"] = std::to_string(cfg.dim);
    kv["experiment.seed"] = std::to_string(cfg.seed);
    kv["experiment.particles"] = std::to_string(cfg.particles);
    kv["experiment.dt"] = num(cfg.dt);
    kv["experiment.t_final"] = num(cfg.t_final);
    kv["experiment.sample_stride"] = std::to_string(cfg.sample_stride);
    kv["interaction.type"] = cfg.interaction;
    kv["interaction.amplitude"] = num(cfg.amplitude);
    kv["interaction.grid_n"] = std::to_string(cfg.grid_n);
    kv["interaction.mollify_delta"] = num(cfg.mollify_delta);
    kv["magnetic.type"] = cfg.magnetic;
    kv["magnetic.omega"] = num(cfg.omega);
    kv["magnetic.amplitude"] = num(cfg.b_amplitude);
    kv["initial.family"] = cfg.family;
    kv["initial.mode"] = cfg.initial_mode;
    kv["initial.seed2"] = std::to_string(cfg.seed2);
    kv["initial.sigma"] = num(cfg.sigma);
    kv["initial.shift_x"] = num(cfg.shift_x[0]) + " " + num(cfg.shift_x[1]) + " " + num(cfg.shift_x[2]);
    kv["initial.shift_v"] = num(cfg.shift_v[0]) + " " + num(cfg.shift_v[1]) + " " + num(cfg.shift_v[2]);
    kv["distance.method"] = cfg.method;
    kv["distance.p"] = std::to_string(cfg.p);
    kv["distance.epsilon"] = num(cfg.epsilon);
    kv["distance.iterations"] = std::to_string(cfg.entropic_iters);
    kv["distance.cap"] = std::to_string(cfg.exact_cap);
    std::string set;
    for (const auto& b : cfg.bound_set) set += (set.empty() ? "" : " ") + b;
    kv["bounds.set"] = set;
    kv["bounds.slack"] = num(cfg.slack);
    kv["bounds.c_d"] = num(cfg.c_d);
    kv["bounds.C_d"] = num(cfg.C_d);
    kv["bounds.c0"] = num(cfg.c0);

    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string canon = canonical_config(cfg);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace vlab
