// Experiment driver: two-solution stability runs, distance and functional
// time series, bound evaluation, and report emission.
#pragma once

#include <string>
#include <vector>

#include "vlab/bounds.hpp"
#include "vlab/config.hpp"
#include "vlab/flow.hpp"
#include "vlab/transport.hpp"

namespace vlab {

struct RunArtifacts {
    std::string config_digest;
    double wall_seconds = 0.0;

    std::vector<double> times;  // sample grid shared by every series
    Trajectory traj1, traj2;

    std::vector<double> distance;       // configured method
    std::vector<double> n_functional;   // Dobrushin N(t)
    std::vector<double> loeper_q;       // lambda = 1
    std::vector<double> kinetic_q;      // fixed point; 0 for coincident clouds
    std::vector<int> kinetic_status;    // 0 ok, 1 outside regime, 2 zero input
    std::vector<double> renorm_q;       // constant-B runs only, else empty

    std::vector<double> a_series;     // poisson runs: ||rho1||_inf + ||rho2||_inf
    std::vector<double> esup_series;  // poisson runs: max grid |E| of solution 2

    std::vector<BoundReport> reports;
    bool qualitative = false;   // Theorem 1 hypotheses not literally met
    double fitted_cd = 0.0;     // theorem1_qualitative: smallest covering c_d
    bool all_pass = true;
};

// Builds both ensembles (second = first shifted rigidly), steps them with
// identical schedules, measures distances at samples, evaluates the
// configured bounds, and writes artifacts into cfg.output_dir when set.
RunArtifacts run_stability_experiment(const ExperimentConfig& cfg);

// Single-ensemble run; writes trajectory.csv when output_dir is set.
Trajectory run_simulation(const ExperimentConfig& cfg);

// Fast invariant suite behind the `selftest` CLI subcommand.
// Prints one line per check; returns the number of failures.
int selftest();

}  // namespace vlab
