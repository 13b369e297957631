// Characteristic flows: closed-form magnetized free transport, the
// renormalization map X + (D_omega(t)/omega) V, and time integrators for the
// full dynamics. All per-particle updates are independent, so the parallel
// paths are thread-count invariant by construction.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vlab/ensemble.hpp"
#include "vlab/fields.hpp"
#include "vlab/geometry.hpp"

namespace vlab {

using Mat3 = std::array<Vec3, 3>;  // row-major

// Rotation by angle omega*t in the (1,2) plane; identity third row/col for d=3.
Mat3 rotation(double omega, double t, int dim);
Vec3 mat_apply(const Mat3& m, const Vec3& v, int dim);

// (D_omega(t)/omega) v, the drift part of the inverse free flow: entries
// (-sin(wt)/w, (1-cos(wt))/w; (cos(wt)-1)/w, -sin(wt)/w) and -t on the third
// diagonal for d=3. |wt| < 1e-4 switches to 4th-order series to avoid
// cancellation; omega = 0 is the exact limit (-t * v on every axis).
Vec3 drift_apply(double omega, double t, const Vec3& v, int dim);

// Position after inverting the magnetized free flow: X + (D_omega(t)/omega)V.
// NOT wrapped; difference at comparison time uses the minimal image.
Vec3 renormalized_position(double omega, double t, const Vec3& X, const Vec3& V, int dim);

// Exact magnetized free transport from time t to time s (either order).
// Returns (X_omega(s;t,x,v) wrapped, V_omega(s;t,x,v)).
std::pair<Vec3, Vec3> free_flow(double omega, double s, double t, const Vec3& x, const Vec3& v,
                                int dim);

// Bulk in-place free step over tau for flat arrays (n particles).
void free_step(double omega, double tau, std::span<double> pos, std::span<double> vel, int dim);

// Strang step for constant B: half kick with force_begin, exact free step,
// half kick with force_end (pass the same span twice for the single-force
// variant). Forces are N*dim accelerations.
void push_constant_B(std::span<double> pos, std::span<double> vel, int dim, double omega,
                     double dt, std::span<const double> force_begin,
                     std::span<const double> force_end);

// Ensemble convenience wrapper, single supplied force for both kicks.
PhaseEnsemble push_constant_B(const PhaseEnsemble& ens, std::span<const double> force,
                              double omega, double dt);

using EFieldFn = std::function<Vec3(double t, const Vec3& x)>;

// Classical RK4 step for dX = V, dV = E + V x B with arbitrary E closure and
// magnetic model. Positions wrapped at the end of the step.
void push_nonuniform_B(std::span<double> pos, std::span<double> vel, int dim,
                       const EFieldFn& efield, const MagneticFieldModel& bmodel, double t,
                       double dt);
void push_nonuniform_B_serial(std::span<double> pos, std::span<double> vel, int dim,
                              const EFieldFn& efield, const MagneticFieldModel& bmodel, double t,
                              double dt);

PhaseEnsemble push_nonuniform_B(const PhaseEnsemble& ens, const EFieldFn& efield,
                                const MagneticFieldModel& bmodel, double t, double dt);

// Snapshot record of one ensemble's states at increasing sample times.
struct Trajectory {
    int dim = 2;
    std::vector<double> times;               // strictly increasing from 0
    std::vector<std::vector<double>> pos;    // frames, each N*dim (wrapped)
    std::vector<std::vector<double>> vel;    // frames, each N*dim

    std::size_t frames() const { return times.size(); }
    void append(double t, std::span<const double> p, std::span<const double> v);
};

void save_trajectory_csv(const Trajectory& traj, const std::string& path);

struct VelocityBoundReport {
    double min_slack = 0.0;              // min over particles and samples
    std::vector<double> per_sample_min;  // per sample time
    bool pass = true;                    // min_slack >= -tolerance
};

// Checks |V(t)| <= |v| e^{t Bsup} + int_0^t Esup(s) e^{(t-s) Bsup} ds along
// the trajectory (trapezoid quadrature on the sample grid). esup must be
// sampled at the trajectory times.
VelocityBoundReport velocity_bound_check(const Trajectory& traj, std::span<const double> esup,
                                         double bsup, double tolerance = 1e-6);

}  // namespace vlab
