#include "vlab/flow.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <cstdint>
#include <limits>

namespace vlab {

namespace {

constexpr double kSmallAngle = 1e-4;  // |omega t| below this uses the series

// sin(wt)/w. Series keeps terms through u^4 relative order.
double sin_term(double omega, double t) {
    const double u = omega * t;
    if (std::abs(u) < kSmallAngle) {
        const double u2 = u * u;
        return t * (1.0 - u2 / 6.0 + u2 * u2 / 120.0);
    }
    return std::sin(u) / omega;
}

// (1 - cos(wt))/w = 2 sin^2(wt/2)/w.
double cos_term(double omega, double t) {
    const double u = omega * t;
    if (std::abs(u) < kSmallAngle) {
        const double u2 = u * u;
        return t * (u / 2.0) * (1.0 - u2 / 12.0 + u2 * u2 / 360.0);
    }
    const double s = std::sin(0.5 * u);
    return 2.0 * s * s / omega;
}

}  // namespace

Mat3 rotation(double omega, double t, int dim) {
    require_dim(dim);
    const double c = std::cos(omega * t);
    const double s = std::sin(omega * t);
    Mat3 m{Vec3{c, -s, 0.0}, Vec3{s, c, 0.0}, Vec3{0.0, 0.0, 1.0}};
    return m;
}

Vec3 mat_apply(const Mat3& m, const Vec3& v, int dim) {
    Vec3 out{};
    for (int a = 0; a < dim; ++a) {
        double s = 0.0;
        for (int b = 0; b < dim; ++b) s += m[a][b] * v[b];
        out[a] = s;
    }
    return out;
}

Vec3 drift_apply(double omega, double t, const Vec3& v, int dim) {
    require_dim(dim);
    const double st = sin_term(omega, t);
    const double ct = cos_term(omega, t);
    Vec3 out{-st * v[0] + ct * v[1], -ct * v[0] - st * v[1], 0.0};
    if (dim == 3) out[2] = -t * v[2];
    return out;
}

Vec3 renormalized_position(double omega, double t, const Vec3& X, const Vec3& V, int dim) {
    const Vec3 drift = drift_apply(omega, t, V, dim);
    Vec3 out{};
    for (int a = 0; a < dim; ++a) out[a] = X[a] + drift[a];
    return out;
}

std::pair<Vec3, Vec3> free_flow(double omega, double s, double t, const Vec3& x, const Vec3& v,
                                int dim) {
    require_dim(dim);
    const double tau = s - t;
    const double st = sin_term(omega, tau);
    const double ct = cos_term(omega, tau);
    const double c = std::cos(omega * tau);
    const double sn = std::sin(omega * tau);

    Vec3 xout{x[0] + st * v[0] + ct * v[1], x[1] - ct * v[0] + st * v[1], 0.0};
    Vec3 vout{c * v[0] + sn * v[1], -sn * v[0] + c * v[1], 0.0};
    if (dim == 3) {
        xout[2] = x[2] + tau * v[2];
        vout[2] = v[2];
    }
    return {torus_wrap(xout, dim), vout};
}

void free_step(double omega, double tau, std::span<double> pos, std::span<double> vel, int dim) {
    const double st = sin_term(omega, tau);
    const double ct = cos_term(omega, tau);
    const double c = std::cos(omega * tau);
    const double sn = std::sin(omega * tau);
    const std::int64_t n = static_cast<std::int64_t>(pos.size() / dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        double* x = &pos[static_cast<std::size_t>(i) * dim];
        double* v = &vel[static_cast<std::size_t>(i) * dim];
        const double v0 = v[0], v1 = v[1];
        x[0] = wrap_unit(x[0] + st * v0 + ct * v1);
        x[1] = wrap_unit(x[1] - ct * v0 + st * v1);
        v[0] = c * v0 + sn * v1;
        v[1] = -sn * v0 + c * v1;
        if (dim == 3) x[2] = wrap_unit(x[2] + tau * v[2]);
    }
}

void push_constant_B(std::span<double> pos, std::span<double> vel, int dim, double omega,
                     double dt, std::span<const double> force_begin,
                     std::span<const double> force_end) {
    if (!(dt > 0.0)) throw std::domain_error("push_constant_B: dt > 0 required");
    const std::size_t total = pos.size();
    const double half = 0.5 * dt;
    for (std::size_t i = 0; i < total; ++i) vel[i] += half * force_begin[i];
    free_step(omega, dt, pos, vel, dim);
    for (std::size_t i = 0; i < total; ++i) vel[i] += half * force_end[i];
}

PhaseEnsemble push_constant_B(const PhaseEnsemble& ens, std::span<const double> force,
                              double omega, double dt) {
    PhaseEnsemble out = ens;
    push_constant_B(std::span<double>(out.pos), std::span<double>(out.vel), out.dim, omega, dt,
                    force, force);
    return out;
}

namespace {

inline Vec3 lorentz_accel(const EFieldFn& efield, const MagneticFieldModel& bmodel, double t,
                          const Vec3& x_raw, const Vec3& v, int dim) {
    const Vec3 x = torus_wrap(x_raw, dim);
    const Vec3 e = efield ? efield(t, x) : Vec3{};
    const Vec3 b = eval_B(bmodel, t, x);
    // v x B; for d=2 only the b3 component acts and the motion stays planar
    Vec3 a{e[0] + v[1] * b[2], e[1] - v[0] * b[2], 0.0};
    if (dim == 3) {
        a[0] += -v[2] * b[1];
        a[1] += v[2] * b[0];
        a[2] = e[2] + v[0] * b[1] - v[1] * b[0];
    }
    return a;
}

inline void rk4_particle(double* x, double* v, int dim, const EFieldFn& efield,
                         const MagneticFieldModel& bmodel, double t, double dt) {
    Vec3 x0{}, v0{};
    for (int a = 0; a < dim; ++a) {
        x0[a] = x[a];
        v0[a] = v[a];
    }
    auto stage = [&](double ts, const Vec3& xs, const Vec3& vs, Vec3& kx, Vec3& kv) {
        kx = vs;
        kv = lorentz_accel(efield, bmodel, ts, xs, vs, dim);
    };
    Vec3 k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
    stage(t, x0, v0, k1x, k1v);
    Vec3 xs{}, vs{};
    for (int a = 0; a < dim; ++a) {
        xs[a] = x0[a] + 0.5 * dt * k1x[a];
        vs[a] = v0[a] + 0.5 * dt * k1v[a];
    }
    stage(t + 0.5 * dt, xs, vs, k2x, k2v);
    for (int a = 0; a < dim; ++a) {
        xs[a] = x0[a] + 0.5 * dt * k2x[a];
        vs[a] = v0[a] + 0.5 * dt * k2v[a];
    }
    stage(t + 0.5 * dt, xs, vs, k3x, k3v);
    for (int a = 0; a < dim; ++a) {
        xs[a] = x0[a] + dt * k3x[a];
        vs[a] = v0[a] + dt * k3v[a];
    }
    stage(t + dt, xs, vs, k4x, k4v);
    for (int a = 0; a < dim; ++a) {
        x[a] = wrap_unit(x0[a] + dt / 6.0 * (k1x[a] + 2.0 * k2x[a] + 2.0 * k3x[a] + k4x[a]));
        v[a] = v0[a] + dt / 6.0 * (k1v[a] + 2.0 * k2v[a] + 2.0 * k3v[a] + k4v[a]);
    }
}

}  // namespace

void push_nonuniform_B(std::span<double> pos, std::span<double> vel, int dim,
                       const EFieldFn& efield, const MagneticFieldModel& bmodel, double t,
                       double dt) {
    if (!(dt > 0.0)) throw std::domain_error("push_nonuniform_B: dt > 0 required");
    const std::int64_t n = static_cast<std::int64_t>(pos.size() / dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        rk4_particle(&pos[static_cast<std::size_t>(i) * dim],
                     &vel[static_cast<std::size_t>(i) * dim], dim, efield, bmodel, t, dt);
    }
}

void push_nonuniform_B_serial(std::span<double> pos, std::span<double> vel, int dim,
                              const EFieldFn& efield, const MagneticFieldModel& bmodel, double t,
                              double dt) {
    if (!(dt > 0.0)) throw std::domain_error("push_nonuniform_B: dt > 0 required");
    const std::size_t n = pos.size() / dim;
    for (std::size_t i = 0; i < n; ++i) {
        rk4_particle(&pos[i * dim], &vel[i * dim], dim, efield, bmodel, t, dt);
    }
}

PhaseEnsemble push_nonuniform_B(const PhaseEnsemble& ens, const EFieldFn& efield,
                                const MagneticFieldModel& bmodel, double t, double dt) {
    PhaseEnsemble out = ens;
    push_nonuniform_B(std::span<double>(out.pos), std::span<double>(out.vel), out.dim, efield,
                      bmodel, t, dt);
    return out;
}

void Trajectory::append(double t, std::span<const double> p, std::span<const double> v) {
    if (!times.empty() && t <= times.back())
        throw std::invalid_argument("Trajectory: sample times must increase");
    times.push_back(t);
    pos.emplace_back(p.begin(), p.end());
    vel.emplace_back(v.begin(), v.end());
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const int d = traj.dim;
    out << "t,particle_id";
    for (int a = 0; a < d; ++a) out << ",x" << (a + 1);
    for (int a = 0; a < d; ++a) out << ",v" << (a + 1);
    out << "\n";
    char buf[32];
    auto emit = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << ',' << buf;
    };
    for (std::size_t f = 0; f < traj.frames(); ++f) {
        const std::size_t n = traj.pos[f].size() / d;
        for (std::size_t i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", traj.times[f]);
            out << buf << ',' << i;
            for (int a = 0; a < d; ++a) emit(traj.pos[f][i * d + a]);
            for (int a = 0; a < d; ++a) emit(traj.vel[f][i * d + a]);
            out << "\n";
        }
    }
}

VelocityBoundReport velocity_bound_check(const Trajectory& traj, std::span<const double> esup,
                                         double bsup, double tolerance) {
    if (esup.size() != traj.times.size())
        throw std::invalid_argument("velocity_bound_check: E series and trajectory grids differ");
    const int d = traj.dim;
    const std::size_t n = traj.pos.empty() ? 0 : traj.pos[0].size() / d;

    VelocityBoundReport rep;
    rep.per_sample_min.assign(traj.frames(), 0.0);

    std::vector<double> v0(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += traj.vel[0][i * d + a] * traj.vel[0][i * d + a];
        v0[i] = std::sqrt(s);
    }

    double integral = 0.0;  // trapezoid of Esup(s) e^{(t-s) Bsup}, advanced in t
    double min_slack = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < traj.frames(); ++f) {
        const double t = traj.times[f];
        if (f > 0) {
            const double h = t - traj.times[f - 1];
            const double grow = std::exp(h * bsup);
            integral = integral * grow + 0.5 * h * (esup[f - 1] * grow + esup[f]);
        }
        const double egrow = std::exp(t * bsup);
        double sample_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (int a = 0; a < d; ++a) s += traj.vel[f][i * d + a] * traj.vel[f][i * d + a];
            const double slack = v0[i] * egrow + integral - std::sqrt(s);
            sample_min = std::min(sample_min, slack);
        }
        rep.per_sample_min[f] = sample_min;
        min_slack = std::min(min_slack, sample_min);
    }
    rep.min_slack = min_slack;
    rep.pass = min_slack >= -tolerance;
    return rep;
}

}  // namespace vlab
