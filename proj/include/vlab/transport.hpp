// Wasserstein distances on phase space, couplings, and the coupling
// functionals N(t), Q(t) driving the stability estimates.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vlab/ensemble.hpp"
#include "vlab/geometry.hpp"

namespace vlab {

// Phase-space cost: p=1 uses |dx| + |dv| (sum of norms), p=2 uses
// |dx|^2 + |dv|^2 under a final square root. Positions compare with the
// torus minimal image, velocities Euclidean.
struct PhaseMetricConfig {
    int p = 1;
};

struct Coupling {
    std::vector<std::size_t> src;
    std::vector<std::size_t> dst;
    std::vector<double> mass;

    std::size_t entries() const { return mass.size(); }
    static Coupling identity(const PhaseEnsemble& ens);
};

void save_coupling_csv(const Coupling& c, const std::string& path);

struct TransportResult {
    double distance = 0.0;
    Coupling plan;
};

// Globally optimal plan for the discrete problem. Equal-size equal-weight
// ensembles take the O(N^3) assignment path; general weights run the
// transportation simplex. Throws CapacityError beyond size_cap.
TransportResult wasserstein_exact(const PhaseEnsemble& a, const PhaseEnsemble& b,
                                  const PhaseMetricConfig& cfg, std::size_t size_cap = 4096);

// Always runs the transportation simplex; the assignment path validates
// against it on equal-weight clouds.
TransportResult wasserstein_exact_general(const PhaseEnsemble& a, const PhaseEnsemble& b,
                                          const PhaseMetricConfig& cfg);

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EntropicResult {
    double estimate = 0.0;  // upper estimate of the exact distance
    double epsilon = 0.0;
    int iterations = 0;
    bool converged = true;
};

// Log-domain Sinkhorn; the returned plan is rounded onto the transport
// polytope so its cost upper-bounds the exact optimum.
EntropicResult wasserstein_entropic(const PhaseEnsemble& a, const PhaseEnsemble& b,
                                    const PhaseMetricConfig& cfg, double epsilon,
                                    int max_iters = 10000, double marginal_tol = 1e-9);

// N(t) = sum pi0 mass * (|X1-X2|_torus + |V1-V2|), states paired through
// the t=0 coupling by particle identity.
double dobrushin_functional(const Coupling& pi0, const PhaseEnsemble& a, const PhaseEnsemble& b);

// Q(t) = 1/2 sum mass * (lambda |X1-X2|_torus^2 + |V1-V2|^2).
double loeper_functional(const Coupling& pi0, const PhaseEnsemble& a, const PhaseEnsemble& b,
                         double lambda);

struct QuadraticSplit {
    double position_sq = 0.0;  // sum mass |X1-X2|^2
    double velocity_sq = 0.0;  // sum mass |V1-V2|^2
};
QuadraticSplit quadratic_split(const Coupling& pi0, const PhaseEnsemble& a,
                               const PhaseEnsemble& b);

enum class FixedPointStatus { Ok, OutsideRegime };

struct KineticQResult {
    FixedPointStatus status = FixedPointStatus::Ok;
    double q = 0.0;         // root, or endpoint value when outside the regime
    double residual = 0.0;  // |g(q)| at the reported point
};

// Unique root of g(Q) = Q - (|log Q| a + b)/2 in (0, 1/e). a = 0 returns b/2
// exactly; a = b = 0 is a degenerate-input error (callers report Q = 0
// themselves). The estimates only operate in the regime Q < 1/e; when g is
// still negative at the right endpoint the status reports OutsideRegime.
KineticQResult kinetic_q_fixed_point(double a, double b);

// Q(t) of the magnetized Dobrushin proof: renormalized positions differenced
// with the minimal image plus |V1 - V2| (rotation isometry).
double renormalized_functional(const Coupling& pi0, const PhaseEnsemble& a,
                               const PhaseEnsemble& b, double omega, double t);

}  // namespace vlab
