// Flat key = value experiment configuration with [section] headers, plus the
// canonical hash embedded in every output.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlab/geometry.hpp"

namespace vlab {

struct ExperimentConfig {
    // [experiment]
    int dim = 2;
    std::uint64_t seed = 1;
    std::size_t particles = 64;
    double dt = 1e-3;
    double t_final = 1.0;
    int sample_stride = 10;
    std::string output_dir;  // empty: no files written

    // [interaction]
    std::string interaction = "zero";  // zero | cosine_product | cosine_x1 | poisson
    double amplitude = 1.0;
    int grid_n = 64;
    double mollify_delta = 0.0;

    // [magnetic]
    std::string magnetic = "constant";  // constant | sin_x1
    double omega = 0.0;
    double b_amplitude = 1.0;

    // [initial]
    std::string family = "maxwellian";
    double sigma = 1.0;
    // mode "shift": second solution = first, rigidly shifted (W(0) known by
    // construction). mode "independent": second solution drawn with seed2
    // (W(0) measured, never assumed).
    std::string initial_mode = "shift";
    std::uint64_t seed2 = 0;  // 0: derived as seed + 1
    Vec3 shift_x{};
    Vec3 shift_v{};

    // [distance]
    std::string method = "exact";  // exact | entropic
    int p = 1;
    double epsilon = 1e-2;
    int entropic_iters = 5000;
    std::size_t exact_cap = 4096;

    // [bounds]
    std::vector<std::string> bound_set;  // dobrushin | theorem2 | theorem1_qualitative
    double slack = 0.01;
    double c_d = 1.0;
    double C_d = 1.0;
    double c0 = 0.1353352832366127;  // placeholder smallness constant, 1/e^2

    void validate() const;  // throws std::invalid_argument on config errors
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical form of the parsed config (sorted section.key=value lines).
std::string canonical_config(const ExperimentConfig& cfg);
// FNV-1a 64-bit hash of the canonical form, hex string.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace vlab
