// Weighted particle clouds on T^d x R^d standing for probability measures.
// Storage is struct-of-arrays; ensembles are treated as immutable once built
// (the flow module produces stepped copies through its span API).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlab/geometry.hpp"
#include "vlab/grid.hpp"

namespace vlab {

struct PhaseEnsemble {
    int dim = 2;
    std::vector<double> pos;     // N*dim, wrapped to [0,1)
    std::vector<double> vel;     // N*dim
    std::vector<double> weight;  // N, positive, sums to 1

    std::size_t size() const { return weight.size(); }

    Vec3 position(std::size_t i) const {
        Vec3 p{};
        for (int a = 0; a < dim; ++a) p[a] = pos[i * dim + a];
        return p;
    }
    Vec3 velocity(std::size_t i) const {
        Vec3 u{};
        for (int a = 0; a < dim; ++a) u[a] = vel[i * dim + a];
        return u;
    }
};

// Validates dimensions/weights (sum = 1 within 1e-12) and wraps positions.
PhaseEnsemble make_ensemble(int dim, std::vector<double> pos, std::vector<double> vel,
                            std::vector<double> weight);

struct InitialSpec {
    std::string family;   // "uniform_zero_v" | "maxwellian"
    int dim = 2;
    double sigma = 1.0;   // maxwellian velocity scale
};

// Deterministic given (spec, n, seed); equal weights 1/n.
PhaseEnsemble sample_ensemble(const InitialSpec& spec, std::size_t n, std::uint64_t seed);

// Copy with positions shifted by dx (wrapped) and velocities by dv.
PhaseEnsemble shifted_ensemble(const PhaseEnsemble& ens, const Vec3& dx, const Vec3& dv);

// Cloud-in-cell deposition onto an n^d node grid; integrates to 1.
// The default path gathers per node (parallel, thread-count invariant);
// the serial scatter is the reference implementation.
DensityGrid deposit_density(const PhaseEnsemble& ens, int n);
DensityGrid deposit_density_serial(const PhaseEnsemble& ens, int n);

// sum_i w_i |v_i|^k
double velocity_moment(const PhaseEnsemble& ens, int k);

struct MomentCheck {
    bool pass = true;
    int first_failing_k = 0;  // 0 when pass
};

// Checks sum_i w_i |v_i|^k <= (C0*k)^k for k = 1..k_max.
MomentCheck moment_condition_check(const PhaseEnsemble& ens, double c0, int k_max);

void save_ensemble_csv(const PhaseEnsemble& ens, const std::string& path);
PhaseEnsemble load_ensemble_csv(const std::string& path);

}  // namespace vlab
