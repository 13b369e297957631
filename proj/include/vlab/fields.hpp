// Force models: periodic spectral Poisson solver, smooth-kernel mean-field
// force, and external magnetic field models with norm functionals.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vlab/ensemble.hpp"
#include "vlab/geometry.hpp"
#include "vlab/grid.hpp"

namespace vlab {

// ---------------------------------------------------------------- magnetic

// B is always external. ConstantUniform is B = (0,0,omega). Non-uniform
// models evaluate a closure returning the full 3-vector; for d = 2 only the
// third component may be nonzero so the dynamics stay planar.
struct MagneticFieldModel {
    enum class Kind { ConstantUniform, AnalyticNonUniform };
    Kind kind = Kind::ConstantUniform;
    int dim = 2;
    double omega = 0.0;  // ConstantUniform

    std::function<Vec3(double t, const Vec3& x)> eval_fn;  // AnalyticNonUniform
    // Declared analytic norms override probing when present; probing is an
    // estimator, never exact.
    std::optional<double> declared_sup;
    std::optional<double> declared_holder;

    static MagneticFieldModel constant_uniform(int dim, double omega);
    static MagneticFieldModel nonuniform(int dim, std::function<Vec3(double, const Vec3&)> fn,
                                         std::optional<double> sup = std::nullopt,
                                         std::optional<double> holder = std::nullopt);
};

Vec3 eval_B(const MagneticFieldModel& model, double t, const Vec3& x);

struct BNorms {
    double sup = 0.0;
    double holder_seminorm = 0.0;
    bool declared = false;  // true when declared constants were used
};

// Sup over a time-space probe grid; Holder seminorm estimated over probe
// pairs with torus distance. alpha in (0,1).
BNorms b_norms(const MagneticFieldModel& model, double horizon, double alpha, int probe_n);

// ------------------------------------------------------------- interaction

struct SmoothKernel {
    // Built-in trigonometric kernels are separable, so their mean-field sums
    // factor into per-particle moments; kernel_force dispatches on the kind.
    enum class Kind { Zero, CosineX1, CosineProduct, Custom };
    Kind kind = Kind::Custom;
    double amplitude = 0.0;  // built-in amplitude a
    std::string name;
    std::function<double(const Vec3&, int dim)> value;
    std::function<Vec3(const Vec3&, int dim)> grad;
    std::optional<double> analytic_hessian;  // H = sup ||D^2 K|| for built-ins
};

SmoothKernel make_zero_kernel();
// K(x) = a cos(2 pi x1) / (4 pi^2), H = |a|
SmoothKernel make_cosine_x1_kernel(double a);
// K(x) = a cos(2 pi x1) cos(2 pi x2) / (4 pi^2), H = |a|
SmoothKernel make_cosine_product_kernel(double a);

struct PoissonCoupling {
    int n = 64;           // solver grid resolution, >= 4
    double delta = 0.0;   // Gaussian mollification radius, 0 = none
};

// force_i = sum_j w_j gradK(x_i - x_j), minimal-image displacement, j = i
// included. Output is N*dim. Parallel over targets with a fixed per-target
// summation tree; bit-identical for any worker count.
std::vector<double> kernel_force(const PhaseEnsemble& ens, const SmoothKernel& kernel);
std::vector<double> kernel_force_serial(const PhaseEnsemble& ens, const SmoothKernel& kernel);

// Max over an n^d probe grid of the spectral norm of the finite-difference
// Hessian; built-in kernels report their analytic constant instead.
double kernel_hessian_bound(const SmoothKernel& kernel, int dim, int probe_n);

// ----------------------------------------------------------------- poisson

struct FieldSample {
    DensityGrid potential;              // zero mean
    std::vector<DensityGrid> efield;    // dim grids, E = -grad U spectrally
    int dim = 2;

    Vec3 interpolate_E(const Vec3& x) const;
    double max_E_norm() const;
};

// Solves the periodic problem Laplacian U = 1 - rho spectrally (zero-mean U),
// E = -grad U. delta > 0 applies Gaussian mollification to rho in spectral
// space first. Requires mean(rho) = 1 within 1e-8.
FieldSample solve_poisson(const DensityGrid& rho, double delta = 0.0);

struct EfieldBoundReport {
    double measured_sup_E = 0.0;
    double reference = 0.0;  // 1 + ||rho||_{L^p}
    double ratio = 0.0;
};

// Measured/reference pair for ||E||_inf <= C (1 + ||rho||_{L^p}); p > dim.
EfieldBoundReport efield_bound_report(const DensityGrid& rho, double p);

// Row-major CSV with a "# n=.. d=.." header; columns u,e1,..,ed per node.
void save_field_csv(const FieldSample& field, const std::string& path);

// Deposit + (mollified) solve + gather E at particle positions. Returns
// per-particle force (N*dim) and optionally exposes the solve.
std::vector<double> poisson_force(const PhaseEnsemble& ens, const PoissonCoupling& coupling,
                                  FieldSample* out_field = nullptr,
                                  DensityGrid* out_rho = nullptr);

}  // namespace vlab
