#include "vlab/fields.hpp"

#include <fftw3.h>
#include <omp.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "vlab/reduce.hpp"

namespace vlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class F>
Vec3 pairwise_sum_vec(std::size_t begin, std::size_t end, F&& f) {
    const std::size_t n = end - begin;
    if (n <= kPairwiseLeaf) {
        Vec3 acc{};
        for (std::size_t i = begin; i < end; ++i) {
            const Vec3 term = f(i);
            acc[0] += term[0];
            acc[1] += term[1];
            acc[2] += term[2];
        }
        return acc;
    }
    const std::size_t mid = begin + n / 2;
    const Vec3 left = pairwise_sum_vec(begin, mid, f);
    const Vec3 right = pairwise_sum_vec(mid, end, f);
    return {left[0] + right[0], left[1] + right[1], left[2] + right[2]};
}

}  // namespace

// ---------------------------------------------------------------- magnetic

MagneticFieldModel MagneticFieldModel::constant_uniform(int dim, double omega) {
    require_dim(dim);
    if (omega < 0.0) throw std::domain_error("constant_uniform: omega >= 0 required");
    MagneticFieldModel m;
    m.kind = Kind::ConstantUniform;
    m.dim = dim;
    m.omega = omega;
    m.declared_sup = omega;
    m.declared_holder = 0.0;
    return m;
}

MagneticFieldModel MagneticFieldModel::nonuniform(int dim,
                                                  std::function<Vec3(double, const Vec3&)> fn,
                                                  std::optional<double> sup,
                                                  std::optional<double> holder) {
    require_dim(dim);
    MagneticFieldModel m;
    m.kind = Kind::AnalyticNonUniform;
    m.dim = dim;
    m.eval_fn = std::move(fn);
    m.declared_sup = sup;
    m.declared_holder = holder;
    return m;
}

Vec3 eval_B(const MagneticFieldModel& model, double t, const Vec3& x) {
    if (model.kind == MagneticFieldModel::Kind::ConstantUniform) return {0.0, 0.0, model.omega};
    const Vec3 b = model.eval_fn(t, x);
    for (int a = 0; a < 3; ++a)
        if (!std::isfinite(b[a])) throw std::domain_error("eval_B: non-finite field value");
    return b;
}

BNorms b_norms(const MagneticFieldModel& model, double horizon, double alpha, int probe_n) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("b_norms: alpha in (0,1) required");
    BNorms out;
    if (model.declared_sup && model.declared_holder) {
        out.sup = *model.declared_sup;
        out.holder_seminorm = *model.declared_holder;
        out.declared = true;
        return out;
    }
    const int d = model.dim;
    const int nt = 9;
    std::vector<Vec3> points;
    if (d == 2) {
        for (int i = 0; i < probe_n; ++i)
            for (int j = 0; j < probe_n; ++j)
                points.push_back({double(i) / probe_n, double(j) / probe_n, 0.0});
    } else {
        for (int i = 0; i < probe_n; ++i)
            for (int j = 0; j < probe_n; ++j)
                for (int k = 0; k < probe_n; ++k)
                    points.push_back(
                        {double(i) / probe_n, double(j) / probe_n, double(k) / probe_n});
    }
    // Cap the pair count; stride keeps the subset deterministic.
    std::size_t stride = 1;
    while (points.size() / stride > 512) ++stride;

    double sup = 0.0, semi = 0.0;
    for (int it = 0; it <= nt; ++it) {
        const double t = horizon * it / nt;
        std::vector<Vec3> vals(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) vals[i] = eval_B(model, t, points[i]);
        for (const Vec3& v : vals) sup = std::max(sup, norm(v, 3));
        for (std::size_t i = 0; i < points.size(); i += stride) {
            for (std::size_t j = i + stride; j < points.size(); j += stride) {
                const double dist = torus_distance(points[i], points[j], d);
                if (dist <= 0.0) continue;
                Vec3 diff{vals[i][0] - vals[j][0], vals[i][1] - vals[j][1],
                          vals[i][2] - vals[j][2]};
                semi = std::max(semi, norm(diff, 3) / std::pow(dist, alpha));
            }
        }
    }
    if (model.declared_sup) {
        out.sup = *model.declared_sup;
    } else {
        out.sup = sup;
    }
    if (model.declared_holder) {
        out.holder_seminorm = *model.declared_holder;
    } else {
        out.holder_seminorm = semi;
    }
    return out;
}

// ------------------------------------------------------------- interaction

SmoothKernel make_zero_kernel() {
    SmoothKernel k;
    k.kind = SmoothKernel::Kind::Zero;
    k.name = "zero";
    k.value = [](const Vec3&, int) { return 0.0; };
    k.grad = [](const Vec3&, int) { return Vec3{}; };
    k.analytic_hessian = 0.0;
    return k;
}

SmoothKernel make_cosine_x1_kernel(double a) {
    SmoothKernel k;
    k.kind = SmoothKernel::Kind::CosineX1;
    k.amplitude = a;
    k.name = "cosine_x1";
    k.value = [a](const Vec3& x, int) { return a * std::cos(kTwoPi * x[0]) / (kTwoPi * kTwoPi); };
    k.grad = [a](const Vec3& x, int) {
        return Vec3{-a * std::sin(kTwoPi * x[0]) / kTwoPi, 0.0, 0.0};
    };
    k.analytic_hessian = std::abs(a);
    return k;
}

SmoothKernel make_cosine_product_kernel(double a) {
    SmoothKernel k;
    k.kind = SmoothKernel::Kind::CosineProduct;
    k.amplitude = a;
    k.name = "cosine_product";
    k.value = [a](const Vec3& x, int) {
        return a * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]) / (kTwoPi * kTwoPi);
    };
    // grad K = -a/(2 pi) (sin(2pi x1) cos(2pi x2), cos(2pi x1) sin(2pi x2), 0);
    // |c1 c2| + |s1 s2| <= 1 gives the operator-norm bound H = |a|.
    k.grad = [a](const Vec3& x, int) {
        const double s1 = std::sin(kTwoPi * x[0]);
        const double c1 = std::cos(kTwoPi * x[0]);
        const double s2 = std::sin(kTwoPi * x[1]);
        const double c2 = std::cos(kTwoPi * x[1]);
        return Vec3{-a * s1 * c2 / kTwoPi, -a * c1 * s2 / kTwoPi, 0.0};
    };
    k.analytic_hessian = std::abs(a);
    return k;
}

namespace {

// Separable trig kernels: sum_j w_j gradK(x_i - x_j) expands by angle
// addition into per-particle trig moments, so the mean-field force costs
// O(N). The wrap never matters because the kernels are 1-periodic.
std::vector<double> cosine_x1_force(const PhaseEnsemble& ens, double a) {
    const int d = ens.dim;
    const std::size_t n = ens.size();
    std::vector<double> s1(n), c1(n);
    for (std::size_t j = 0; j < n; ++j) {
        s1[j] = std::sin(kTwoPi * ens.pos[j * d]);
        c1[j] = std::cos(kTwoPi * ens.pos[j * d]);
    }
    const double ms = pairwise_sum(std::size_t{0}, n, [&](std::size_t j) { return ens.weight[j] * s1[j]; });
    const double mc = pairwise_sum(std::size_t{0}, n, [&](std::size_t j) { return ens.weight[j] * c1[j]; });
    std::vector<double> force(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        // -a/(2pi) sin(2pi(x_i - x_j)) summed over j
        force[i * d] = -a / kTwoPi * (s1[i] * mc - c1[i] * ms);
    }
    return force;
}

std::vector<double> cosine_product_force(const PhaseEnsemble& ens, double a) {
    const int d = ens.dim;
    const std::size_t n = ens.size();
    std::vector<double> s1(n), c1(n), s2(n), c2(n);
    for (std::size_t j = 0; j < n; ++j) {
        s1[j] = std::sin(kTwoPi * ens.pos[j * d]);
        c1[j] = std::cos(kTwoPi * ens.pos[j * d]);
        s2[j] = std::sin(kTwoPi * ens.pos[j * d + 1]);
        c2[j] = std::cos(kTwoPi * ens.pos[j * d + 1]);
    }
    auto moment = [&](const std::vector<double>& u, const std::vector<double>& v) {
        return pairwise_sum(std::size_t{0}, n,
                            [&](std::size_t j) { return ens.weight[j] * u[j] * v[j]; });
    };
    const double mcc = moment(c1, c2), mcs = moment(c1, s2);
    const double msc = moment(s1, c2), mss = moment(s1, s2);
    std::vector<double> force(n * d, 0.0);
    const double scale = -a / kTwoPi;
    for (std::size_t i = 0; i < n; ++i) {
        // sin(d1)cos(d2) and cos(d1)sin(d2) expanded over j
        force[i * d] = scale * (s1[i] * c2[i] * mcc + s1[i] * s2[i] * mcs -
                                c1[i] * c2[i] * msc - c1[i] * s2[i] * mss);
        force[i * d + 1] = scale * (c1[i] * s2[i] * mcc - c1[i] * c2[i] * mcs +
                                    s1[i] * s2[i] * msc - s1[i] * c2[i] * mss);
    }
    return force;
}

}  // namespace

std::vector<double> kernel_force(const PhaseEnsemble& ens, const SmoothKernel& kernel) {
    const int d = ens.dim;
    const std::size_t n = ens.size();
    switch (kernel.kind) {
        case SmoothKernel::Kind::Zero:
            return std::vector<double>(n * d, 0.0);
        case SmoothKernel::Kind::CosineX1:
            return cosine_x1_force(ens, kernel.amplitude);
        case SmoothKernel::Kind::CosineProduct:
            return cosine_product_force(ens, kernel.amplitude);
        case SmoothKernel::Kind::Custom:
            break;
    }
    std::vector<double> force(n * d);
    const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < ni; ++i) {
        const Vec3 xi = ens.position(static_cast<std::size_t>(i));
        const Vec3 f = pairwise_sum_vec(std::size_t{0}, n, [&](std::size_t j) {
            const Vec3 g = kernel.grad(torus_displacement(xi, ens.position(j), d), d);
            return Vec3{ens.weight[j] * g[0], ens.weight[j] * g[1], ens.weight[j] * g[2]};
        });
        for (int a = 0; a < d; ++a) force[static_cast<std::size_t>(i) * d + a] = f[a];
    }
    return force;
}

std::vector<double> kernel_force_serial(const PhaseEnsemble& ens, const SmoothKernel& kernel) {
    const int d = ens.dim;
    const std::size_t n = ens.size();
    std::vector<double> force(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 xi = ens.position(i);
        double acc[3] = {0.0, 0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const Vec3 g = kernel.grad(torus_displacement(xi, ens.position(j), d), d);
            for (int a = 0; a < d; ++a) acc[a] += ens.weight[j] * g[a];
        }
        for (int a = 0; a < d; ++a) force[i * d + a] = acc[a];
    }
    return force;
}

namespace {

// Largest |eigenvalue| of a symmetric d x d matrix via Jacobi sweeps.
double sym_max_abs_eig(double m[3][3], int d) {
    for (int sweep = 0; sweep < 16; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += m[p][q] * m[p][q];
        if (off < 1e-26) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                if (std::abs(m[p][q]) < 1e-300) continue;
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double mkp = m[k][p], mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for (int k = 0; k < d; ++k) {
                    const double mpk = m[p][k], mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    double best = 0.0;
    for (int p = 0; p < d; ++p) best = std::max(best, std::abs(m[p][p]));
    return best;
}

}  // namespace

double kernel_hessian_bound(const SmoothKernel& kernel, int dim, int probe_n) {
    if (kernel.analytic_hessian) return *kernel.analytic_hessian;
    require_dim(dim);
    const double h = 1e-4;
    auto K = [&](const Vec3& x) { return kernel.value(x, dim); };
    double best = 0.0;
    const int nk = (dim == 3) ? probe_n : 1;
    for (int i = 0; i < probe_n; ++i) {
        for (int j = 0; j < probe_n; ++j) {
            for (int k = 0; k < nk; ++k) {
                Vec3 x{double(i) / probe_n, double(j) / probe_n, double(k) / probe_n};
                double hess[3][3] = {};
                for (int a = 0; a < dim; ++a) {
                    for (int b = a; b < dim; ++b) {
                        Vec3 pp = x, pm = x, mp = x, mm = x;
                        pp[a] += h; pp[b] += h;
                        pm[a] += h; pm[b] -= h;
                        mp[a] -= h; mp[b] += h;
                        mm[a] -= h; mm[b] -= h;
                        const double val =
                            (K(pp) - K(pm) - K(mp) + K(mm)) / (4.0 * h * h);
                        hess[a][b] = hess[b][a] = val;
                    }
                }
                best = std::max(best, sym_max_abs_eig(hess, dim));
            }
        }
    }
    return best;
}

// ----------------------------------------------------------------- poisson

namespace {

std::mutex g_fftw_planner_mutex;  // FFTW planning is not thread-safe

struct SpectralWorkspace {
    int dim;
    int n;
    std::size_t nreal;
    std::size_t ncplx;
    double* real;
    fftw_complex* cplx;

    SpectralWorkspace(int dim_, int n_) : dim(dim_), n(n_) {
        nreal = 1;
        for (int a = 0; a < dim; ++a) nreal *= static_cast<std::size_t>(n);
        ncplx = nreal / n * (n / 2 + 1);
        real = fftw_alloc_real(nreal);
        cplx = fftw_alloc_complex(ncplx);
    }
    ~SpectralWorkspace() {
        fftw_free(real);
        fftw_free(cplx);
    }
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    void forward() {
        std::lock_guard<std::mutex> lock(g_fftw_planner_mutex);
        fftw_plan plan = (dim == 2)
                             ? fftw_plan_dft_r2c_2d(n, n, real, cplx, FFTW_ESTIMATE)
                             : fftw_plan_dft_r2c_3d(n, n, n, real, cplx, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    void backward() {
        std::lock_guard<std::mutex> lock(g_fftw_planner_mutex);
        fftw_plan plan = (dim == 2)
                             ? fftw_plan_dft_c2r_2d(n, n, cplx, real, FFTW_ESTIMATE)
                             : fftw_plan_dft_c2r_3d(n, n, n, cplx, real, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
};

int signed_freq(int idx, int n) { return (idx <= n / 2) ? idx : idx - n; }

}  // namespace

FieldSample solve_poisson(const DensityGrid& rho, double delta) {
    const int d = rho.dim;
    const int n = rho.n;
    if (std::abs(rho.mean() - 1.0) > 1e-8)
        throw std::invalid_argument("solve_poisson: density must integrate to 1");

    SpectralWorkspace ws(d, n);
    std::copy(rho.v.begin(), rho.v.end(), ws.real);
    ws.forward();

    const int nz = n / 2 + 1;
    const std::size_t nmodes = ws.ncplx;
    std::vector<std::complex<double>> uhat(nmodes);
    const double norm_factor = 1.0 / static_cast<double>(ws.nreal);

    for (std::size_t m = 0; m < nmodes; ++m) {
        int k[3] = {0, 0, 0};
        std::size_t rem = m;
        k[d - 1] = static_cast<int>(rem % nz);
        rem /= nz;
        for (int a = d - 2; a >= 0; --a) {
            k[a] = signed_freq(static_cast<int>(rem % n), n);
            rem /= n;
        }
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) k2 += double(k[a]) * k[a];
        std::complex<double> rh{ws.cplx[m][0], ws.cplx[m][1]};
        if (k2 == 0.0) {
            uhat[m] = 0.0;  // zero-mean gauge
            continue;
        }
        const double lap = kTwoPi * kTwoPi * k2;
        const double moll = (delta > 0.0) ? std::exp(-0.5 * delta * delta * lap) : 1.0;
        // Laplacian U = 1 - rho  =>  Uhat = rhohat / |2 pi k|^2 for k != 0
        uhat[m] = rh * (moll / lap) * norm_factor;
    }

    FieldSample out;
    out.dim = d;
    out.potential = DensityGrid(d, n);
    for (std::size_t m = 0; m < nmodes; ++m) {
        ws.cplx[m][0] = uhat[m].real();
        ws.cplx[m][1] = uhat[m].imag();
    }
    ws.backward();
    std::copy(ws.real, ws.real + ws.nreal, out.potential.v.begin());

    out.efield.assign(d, DensityGrid(d, n));
    for (int axis = 0; axis < d; ++axis) {
        for (std::size_t m = 0; m < nmodes; ++m) {
            int k[3] = {0, 0, 0};
            std::size_t rem = m;
            k[d - 1] = static_cast<int>(rem % nz);
            rem /= nz;
            for (int a = d - 2; a >= 0; --a) {
                k[a] = signed_freq(static_cast<int>(rem % n), n);
                rem /= n;
            }
            // E = -grad U; the Nyquist mode has no well-defined derivative
            // and is dropped.
            std::complex<double> val = 0.0;
            if (std::abs(k[axis]) * 2 != n) {
                val = -std::complex<double>(0.0, kTwoPi * k[axis]) * uhat[m];
            }
            ws.cplx[m][0] = val.real();
            ws.cplx[m][1] = val.imag();
        }
        ws.backward();
        std::copy(ws.real, ws.real + ws.nreal, out.efield[axis].v.begin());
    }
    return out;
}

Vec3 FieldSample::interpolate_E(const Vec3& x) const {
    Vec3 e{};
    for (int a = 0; a < dim; ++a) e[a] = efield[a].interpolate(x);
    return e;
}

double FieldSample::max_E_norm() const {
    double best = 0.0;
    for (std::size_t i = 0; i < potential.size(); ++i) {
        double s = 0.0;
        for (int a = 0; a < dim; ++a) s += efield[a].v[i] * efield[a].v[i];
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

void save_field_csv(const FieldSample& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# n=" << field.potential.n << " d=" << field.dim << "\n";
    out << "u";
    for (int a = 0; a < field.dim; ++a) out << ",e" << (a + 1);
    out << "\n";
    char buf[32];
    for (std::size_t m = 0; m < field.potential.size(); ++m) {
        std::snprintf(buf, sizeof buf, "%.17g", field.potential.v[m]);
        out << buf;
        for (int a = 0; a < field.dim; ++a) {
            std::snprintf(buf, sizeof buf, "%.17g", field.efield[a].v[m]);
            out << ',' << buf;
        }
        out << "\n";
    }
}

EfieldBoundReport efield_bound_report(const DensityGrid& rho, double p) {
    if (!(p > rho.dim)) throw std::domain_error("efield_bound_report: p > d required");
    const FieldSample field = solve_poisson(rho);
    EfieldBoundReport rep;
    rep.measured_sup_E = field.max_E_norm();
    rep.reference = 1.0 + lp_norm(rho, p);
    rep.ratio = rep.measured_sup_E / rep.reference;
    return rep;
}

std::vector<double> poisson_force(const PhaseEnsemble& ens, const PoissonCoupling& coupling,
                                  FieldSample* out_field, DensityGrid* out_rho) {
    if (coupling.n < 4) throw std::domain_error("poisson_force: grid n >= 4 required");
    if (coupling.delta < 0.0) throw std::domain_error("poisson_force: delta >= 0 required");
    const DensityGrid rho = deposit_density(ens, coupling.n);
    const FieldSample field = solve_poisson(rho, coupling.delta);
    const int d = ens.dim;
    const std::size_t n = ens.size();
    std::vector<double> force(n * d);
    const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < ni; ++i) {
        const Vec3 e = field.interpolate_E(ens.position(static_cast<std::size_t>(i)));
        for (int a = 0; a < d; ++a) force[static_cast<std::size_t>(i) * d + a] = e[a];
    }
    if (out_field) *out_field = field;
    if (out_rho) *out_rho = rho;
    return force;
}

}  // namespace vlab
