#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vlab/harness.hpp"

using namespace vlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExperimentConfig small_kernel_config() {
    ExperimentConfig cfg;
    cfg.dim = 2;
    cfg.seed = 12;
    cfg.particles = 32;
    cfg.dt = 1e-2;
    cfg.t_final = 0.2;
    cfg.sample_stride = 5;
    cfg.interaction = "cosine_product";
    cfg.amplitude = 0.5;
    cfg.magnetic = "constant";
    cfg.omega = 2.0;
    cfg.family = "maxwellian";
    cfg.sigma = 1.0;
    cfg.shift_x = {1e-2, 0.0, 0.0};
    cfg.bound_set = {"theorem2", "dobrushin"};
    return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing, canonical hash, errors") {
    const std::string text = R"(
[experiment]
dimension = 2
seed = 7
particles = 16
dt = 1e-2
t_final = 0.1
sample_stride = 2

[interaction]
type = cosine_product
amplitude = 1.0

[magnetic]
type = constant
omega = 2.0

[initial]
family = maxwellian
sigma = 1.0
shift_x = 0.01 0
shift_v = 0 0

[distance]
method = exact
p = 1

[bounds]
set = theorem2 dobrushin
slack = 0.01
)";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.dim == 2);
    CHECK(cfg.particles == 16);
    CHECK(cfg.omega == 2.0);
    CHECK(cfg.shift_x[0] == 0.01);
    CHECK(cfg.bound_set.size() == 2);

    // hashes: stable for equal configs, sensitive to changes
    CHECK(config_hash(cfg) == config_hash(parse_config_text(text)));
    ExperimentConfig other = cfg;
    other.seed = 8;
    CHECK(config_hash(cfg) != config_hash(other));

    CHECK_THROWS_AS(parse_config_text("[experiment]\nunknown_key = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[experiment]\ndimension = 4\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[experiment]\ndt = nope\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/file.cfg"), std::invalid_argument);
}

TEST_CASE("zero perturbation: distances identically zero, bounds trivially pass") {
    ExperimentConfig cfg = small_kernel_config();
    cfg.shift_x = {0.0, 0.0, 0.0};
    const RunArtifacts art = run_stability_experiment(cfg);
    for (double d : art.distance) CHECK(d == 0.0);
    for (int s : art.kinetic_status) CHECK(s == 2);
    CHECK(art.all_pass);
}

TEST_CASE("K=0 with a rigid velocity shift matches the closed-form free-flow gap") {
    ExperimentConfig cfg = small_kernel_config();
    cfg.interaction = "zero";
    cfg.shift_x = {0.0, 0.0, 0.0};
    cfg.shift_v = {5e-3, 0.0, 0.0};
    cfg.omega = 2.0;
    cfg.t_final = 1.0;
    cfg.dt = 1e-3;
    cfg.sample_stride = 100;
    cfg.bound_set = {};
    const RunArtifacts art = run_stability_experiment(cfg);
    for (std::size_t k = 0; k < art.times.size(); ++k) {
        const double t = art.times[k];
        const Vec3 gap = drift_apply(cfg.omega, t, cfg.shift_v, 2);
        const double expect = norm(gap, 2) + norm(cfg.shift_v, 2);
        CHECK(art.distance[k] == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("rigid shift: t=0 distance equals the shift magnitude") {
    ExperimentConfig cfg = small_kernel_config();
    cfg.t_final = cfg.dt;  // one step
    const RunArtifacts art = run_stability_experiment(cfg);
    CHECK(art.distance.front() == doctest::Approx(1e-2).epsilon(1e-12));
    CHECK(art.n_functional.front() == doctest::Approx(1e-2).epsilon(1e-12));
}

TEST_CASE("headline scheme convergence: dt halving moves W1(T) by less than 0.1%") {
    ExperimentConfig cfg = small_kernel_config();
    cfg.particles = 64;
    cfg.amplitude = 1.0;
    cfg.t_final = 0.5;
    cfg.dt = 2e-3;
    cfg.sample_stride = 1000000;  // only t=0 and T
    const RunArtifacts coarse = run_stability_experiment(cfg);
    cfg.dt = 1e-3;
    const RunArtifacts fine = run_stability_experiment(cfg);
    const double rel = std::abs(coarse.distance.back() - fine.distance.back()) /
                       fine.distance.back();
    CHECK(rel < 1e-3);
}

TEST_CASE("outputs are bit-identical across worker counts") {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "vlab_determinism";
    fs::remove_all(base);

    ExperimentConfig cfg = small_kernel_config();
    // exercise the generic particle paths and the poisson solver too
    cfg.interaction = "poisson";
    cfg.grid_n = 16;
    cfg.mollify_delta = 0.05;
    cfg.magnetic = "sin_x1";
    cfg.b_amplitude = 0.5;
    cfg.bound_set = {"theorem1_qualitative"};
    cfg.t_final = 0.05;
    cfg.dt = 1e-2;
    cfg.sample_stride = 1;

    const int saved = omp_get_max_threads();
    cfg.output_dir = (base / "run1").string();
    omp_set_num_threads(1);
    run_stability_experiment(cfg);
    cfg.output_dir = (base / "run4").string();
    omp_set_num_threads(4);
    run_stability_experiment(cfg);
    omp_set_num_threads(saved);

    for (const char* name : {"trajectory_1.csv", "trajectory_2.csv", "distances.csv",
                             "functionals.csv", "bounds_theorem1_qualitative.csv"}) {
        CHECK(slurp(base / "run1" / name) == slurp(base / "run4" / name));
    }
    fs::remove_all(base);
}

TEST_CASE("stability run writes the full artifact set") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "vlab_artifacts";
    fs::remove_all(dir);
    ExperimentConfig cfg = small_kernel_config();
    cfg.output_dir = dir.string();
    const RunArtifacts art = run_stability_experiment(cfg);
    CHECK(art.all_pass);
    for (const char* name : {"trajectory_1.csv", "trajectory_2.csv", "distances.csv",
                             "functionals.csv", "bounds_theorem2.csv", "bounds_dobrushin.csv",
                             "coupling_p1.csv", "report.txt"}) {
        CHECK(fs::exists(dir / name));
    }
    const std::string report = slurp(dir / "report.txt");
    CHECK(report.find(art.config_digest) != std::string::npos);
    CHECK(report.find("overall: PASS") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("config contract errors for incompatible bound sets") {
    ExperimentConfig cfg = small_kernel_config();
    cfg.interaction = "poisson";
    CHECK_THROWS_AS(run_stability_experiment(cfg), std::invalid_argument);

    ExperimentConfig cfg2 = small_kernel_config();
    cfg2.magnetic = "sin_x1";
    CHECK_THROWS_AS(run_stability_experiment(cfg2), std::invalid_argument);

    ExperimentConfig cfg3 = small_kernel_config();
    cfg3.bound_set = {"theorem1_qualitative"};
    CHECK_THROWS_AS(run_stability_experiment(cfg3), std::invalid_argument);
}

TEST_CASE("theorem2 run at omega = 0 takes the limit branch end to end") {
    ExperimentConfig cfg = small_kernel_config();
    cfg.omega = 0.0;
    cfg.shift_x = {0.0, 0.0, 0.0};
    cfg.shift_v = {1e-2, 0.0, 0.0};
    cfg.t_final = 0.5;
    cfg.dt = 1e-3;
    cfg.sample_stride = 50;
    const RunArtifacts art = run_stability_experiment(cfg);
    CHECK(art.all_pass);
    // ballistic symmetry orbit: the gap grows as (t + 1) |dv|
    for (std::size_t k = 0; k < art.times.size(); ++k)
        CHECK(art.distance[k] ==
              doctest::Approx(1e-2 * (art.times[k] + 1.0)).epsilon(1e-7));
}

TEST_CASE("poisson coupling under constant B uses the splitting path") {
    ExperimentConfig cfg = small_kernel_config();
    cfg.interaction = "poisson";
    cfg.grid_n = 16;
    cfg.mollify_delta = 0.05;
    cfg.magnetic = "constant";
    cfg.omega = 1.0;
    cfg.bound_set = {"theorem1_qualitative"};
    cfg.p = 2;
    cfg.t_final = 0.1;
    const RunArtifacts art = run_stability_experiment(cfg);
    CHECK(art.qualitative);
    CHECK(art.a_series.size() == art.times.size());
    for (double a : art.a_series) CHECK(a >= 2.0 - 1e-9);  // two unit-mass densities
    CHECK(std::isfinite(art.fitted_cd));
    CHECK(art.renorm_q.size() == art.times.size());  // constant-B functional present
}

TEST_CASE("entropic distance method is wired through the driver") {
    ExperimentConfig cfg = small_kernel_config();
    cfg.method = "entropic";
    cfg.epsilon = 1e-2;
    cfg.entropic_iters = 3000;
    cfg.bound_set = {};
    cfg.t_final = 0.05;
    cfg.dt = 1e-2;
    const RunArtifacts art = run_stability_experiment(cfg);
    // entropic estimate upper-bounds the true distance at t = 0 (1e-2 shift)
    CHECK(art.distance.front() >= 1e-2 - 1e-9);
}

TEST_CASE("run_simulation writes a trajectory with the sample grid") {
    ExperimentConfig cfg = small_kernel_config();
    cfg.bound_set = {};
    const Trajectory traj = run_simulation(cfg);
    CHECK(traj.frames() == 1 + 4);  // t=0 plus 20 steps at stride 5
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(0.2).epsilon(1e-12));
}

}  // TEST_SUITE
