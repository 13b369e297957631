// Acceptance suite: every criterion prints one pass/fail line with the
// numbers behind the verdict. Exit code is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <vector>

#include "vlab/bounds.hpp"
#include "vlab/fields.hpp"
#include "vlab/flow.hpp"
#include "vlab/harness.hpp"
#include "vlab/transport.hpp"

using namespace vlab;

namespace {

constexpr double kPi = std::numbers::pi;
int g_failed = 0;

void verdict(int id, bool pass, const char* what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what,
                detail.c_str());
    if (!pass) ++g_failed;
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return std::string(buf);
}

// ---------------------------------------------------------------- 1 and 2

ExperimentConfig theorem2_config(int dim, double amplitude, double omega) {
    ExperimentConfig cfg;
    cfg.dim = dim;
    cfg.seed = 2024;
    cfg.particles = 256;
    cfg.dt = 1e-3;
    cfg.t_final = 2.0;
    cfg.sample_stride = 20;
    cfg.interaction = "cosine_product";
    cfg.amplitude = amplitude;
    cfg.magnetic = "constant";
    cfg.omega = omega;
    cfg.family = "maxwellian";
    cfg.sigma = 1.0;
    // rigid velocity shift: W1(0) = |dv| exactly (duality lower bound meets
    // the identity coupling), and the two solutions genuinely separate
    cfg.shift_v = {1e-2, 0.0, 0.0};
    cfg.method = "exact";
    cfg.p = 1;
    cfg.bound_set = {"theorem2"};
    cfg.slack = 0.01;
    return cfg;
}

void run_theorem2_criterion(int id, int dim) {
    // Rigid velocity shifts evolve along an exact symmetry orbit of the
    // mean-field dynamics (the offset free-rotates), so they verify the gain
    // prefactor sharply; independent clouds break the symmetry and exercise
    // the interaction term of the bound as well.
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    double worst_rigid = 0.0, worst_indep = 0.0, worst_t = 0.0, worst_a = 0.0, worst_w = 0.0;
    for (double a : {0.1, 1.0}) {
        for (double omega : {0.5, 2.0, 8.0}) {
            const RunArtifacts art = run_stability_experiment(theorem2_config(dim, a, omega));
            const BoundReport& rep = art.reports.front();
            for (const auto& s : rep.samples) {
                const double ratio = (s.bound > 0) ? s.measured / s.bound : 0.0;
                if (ratio > worst_rigid) {
                    worst_rigid = ratio;
                    worst_t = s.t;
                    worst_a = a;
                    worst_w = omega;
                }
                pass = pass && s.pass;
            }

            ExperimentConfig indep = theorem2_config(dim, a, omega);
            indep.initial_mode = "independent";
            indep.seed2 = indep.seed + 977;
            const RunArtifacts art2 = run_stability_experiment(indep);
            for (const auto& s : art2.reports.front().samples) {
                const double ratio = (s.bound > 0) ? s.measured / s.bound : 0.0;
                worst_indep = std::max(worst_indep, ratio);
                pass = pass && s.pass;
            }
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    verdict(id, pass, dim == 2 ? "theorem 2 quantitative (d=2)" : "theorem 2 quantitative (d=3)",
            fmt("worst measured/bound: rigid %.4f at t=%.2f (a=%g, omega=%g), independent %.4f; "
                "%.1fs for 12 runs",
                worst_rigid, worst_t, worst_a, worst_w, worst_indep, secs));
}

// ------------------------------------------------------------------- rest

void criterion3() {
    bool pass = true;
    double worst = 0.0;
    for (double t : {0.25, 0.5, 1.0, 1.7, 2.0}) {
        const double g2 = theorem2_gain(2, 1e-8, t);
        const double g3 = theorem2_gain(3, 1e-8, t);
        const double e2 = std::abs(g2 - (t + 1.0)) / (t + 1.0);
        const double e3 = std::abs(g3 - (std::sqrt(2.0) * t + 1.0)) / (std::sqrt(2.0) * t + 1.0);
        const double drift = 2.0 * sin_drift_term(1e-8, t);
        const double ed = std::abs(drift - t * t * t / 3.0) / (t * t * t / 3.0);
        worst = std::max({worst, e2, e3, ed});
    }
    pass = worst < 1e-6;
    verdict(3, pass, "omega->0 consistency of gain and exponent terms",
            fmt("max relative deviation %.3e (tolerance 1e-6)", worst));
}

void criterion4() {
    const double omega = 2.7, dt = 1e-3;
    const long nsteps = 10000;
    const InitialSpec spec{"maxwellian", 2, 1.0};
    const PhaseEnsemble a0 = sample_ensemble(spec, 16, 77);
    const PhaseEnsemble b0 = shifted_ensemble(a0, {0.01, 0.0, 0.0}, {0.0, 0.005, 0.0});
    const Coupling pi0 = wasserstein_exact(a0, b0, PhaseMetricConfig{1}).plan;

    PhaseEnsemble a = a0, b = b0;
    const std::vector<double> zero(a.size() * 2, 0.0);
    const double q0 = renormalized_functional(pi0, a0, b0, omega, 0.0);
    double max_coord_err = 0.0, max_q_drift = 0.0;
    for (long k = 0; k < nsteps; ++k) {
        a = push_constant_B(a, zero, omega, dt);
        b = push_constant_B(b, zero, omega, dt);
        if ((k + 1) % 500 == 0) {
            const double q = renormalized_functional(pi0, a, b, omega, (k + 1) * dt);
            max_q_drift = std::max(max_q_drift, std::abs(q - q0));
        }
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto exact = free_flow(omega, nsteps * dt, 0.0, a0.position(i), a0.velocity(i), 2);
        for (int ax = 0; ax < 2; ++ax) {
            max_coord_err = std::max(
                max_coord_err, std::abs(wrap_half(a.pos[i * 2 + ax] - exact.first[ax])));
            max_coord_err =
                std::max(max_coord_err, std::abs(a.vel[i * 2 + ax] - exact.second[ax]));
        }
    }
    const bool pass = max_coord_err < 1e-10 && max_q_drift < 1e-10;
    verdict(4, pass, "free-flow exactness over 1e4 splitting steps",
            fmt("max coordinate error %.2e, max Q drift %.2e (tolerance 1e-10)", max_coord_err,
                max_q_drift));
}

void criterion5() {
    bool pass = true;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 6;  // 2..7
        const PhaseEnsemble a = sample_ensemble({"maxwellian", 2, 0.8}, n, 1000 + trial);
        const PhaseEnsemble b = sample_ensemble({"maxwellian", 2, 0.8}, n, 5000 + trial);
        for (int p : {1, 2}) {
            const double got = wasserstein_exact(a, b, PhaseMetricConfig{p}).distance;
            // exhaustive permutation oracle
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            double best = 1e300;
            do {
                double cost = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dx = torus_distance(a.position(i), b.position(perm[i]), 2);
                    double dv2 = 0.0;
                    for (int ax = 0; ax < 2; ++ax) {
                        const double dv = a.vel[i * 2 + ax] - b.vel[perm[i] * 2 + ax];
                        dv2 += dv * dv;
                    }
                    cost += (p == 1 ? dx + std::sqrt(dv2) : dx * dx + dv2) / double(n);
                }
                best = std::min(best, cost);
            } while (std::next_permutation(perm.begin(), perm.end()));
            if (p == 2) best = std::sqrt(best);
            worst = std::max(worst, std::abs(got - best));
            pass = pass && std::abs(got - best) < 1e-9;
        }
    }
    verdict(5, pass, "exact transport equals brute force (N<=7, 100 trials, p=1,2)",
            fmt("max |solver - oracle| = %.2e (tolerance 1e-9)", worst));
}

void criterion6() {
    DensityGrid rho(2, 64);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j)
            rho.at(i, j) = 1.0 + std::cos(2.0 * kPi * i / 64.0);
    const FieldSample f = solve_poisson(rho);
    double err = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double x = i / 64.0;
        const double u = std::cos(2.0 * kPi * x) / (4.0 * kPi * kPi);
        const double e1 = std::sin(2.0 * kPi * x) / (2.0 * kPi);
        for (int j = 0; j < 64; ++j) {
            err = std::max(err, std::abs(f.potential.at(i, j) - u));
            err = std::max(err, std::abs(f.efield[0].at(i, j) - e1));
            err = std::max(err, std::abs(f.efield[1].at(i, j)));
        }
    }
    verdict(6, err < 1e-10, "poisson manufactured solution at n=64",
            fmt("max-norm error %.2e (tolerance 1e-10)", err));
}

void criterion7() {
    bool pass = true;
    double worst_res = 0.0;
    for (double a : {0.0, 0.05, 0.1, 0.2, 0.3}) {
        for (double b : {0.0, 0.05, 0.1, 0.2, 0.3}) {
            if (a + b >= 0.5 || (a == 0.0 && b == 0.0)) continue;
            const KineticQResult r = kinetic_q_fixed_point(a, b);
            pass = pass && r.status == FixedPointStatus::Ok;
            worst_res = std::max(worst_res, r.residual);
            pass = pass && r.residual < 1e-12;
            if (a == 0.0) pass = pass && r.q == 0.5 * b;  // exact closed form
            if (a > 0.0) {
                // uniqueness: one sign change of g on (0, 1/e), 1e6-point scan
                int changes = 0;
                const double qmax = std::exp(-1.0) - 1e-12;
                double prev = 1e-12 + 0.5 * a * std::log(1e-12) - 0.5 * b;
                const int npts = 1000000;
                for (int i = 1; i <= npts; ++i) {
                    const double q = 1e-12 + (qmax - 1e-12) * double(i) / npts;
                    const double g = q + 0.5 * a * std::log(q) - 0.5 * b;
                    if ((g > 0) != (prev > 0)) ++changes;
                    prev = g;
                }
                pass = pass && changes == 1;
            }
        }
    }
    verdict(7, pass, "kinetic fixed point: residual, uniqueness, a=0 closed form",
            fmt("max residual %.2e (tolerance 1e-12)", worst_res));
}

void criterion8() {
    std::vector<double> times(10001);
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = double(i) / 10000.0;
    const std::vector<double> one(times.size(), 1.0);
    const double q0 = std::exp(-4.0);

    const GronwallResult ll = gronwall_ode_solve(GronwallKind::LogLinear, times, one, q0);
    const double err_ll = std::abs(ll.q.back() - std::exp(-4.0 * std::exp(-1.0)));
    const GronwallResult sl = gronwall_ode_solve(GronwallKind::SqrtLog, times, one, q0);
    const double err_sl = std::abs(sl.q.back() - std::exp(-2.25));  // exp(-(2 - 1/2)^2)

    // statement closures with unit constants on a sampled non-constant J
    std::vector<double> j(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) j[k] = 1.0 + 0.5 * times[k];
    const auto jint = cumulative_trapezoid(times, j);
    const StatementCheck s1 = statement1_check(q0, jint.back(), 1.0);
    const GronwallResult o1 = gronwall_ode_solve(GronwallKind::LogLinear, times, j, q0);
    double err_s1 = 0.0;
    for (std::size_t k = 0; k < times.size(); k += 500)
        err_s1 = std::max(err_s1, std::abs(o1.q[k] - s1.rhs(jint[k])) / s1.rhs(jint[k]));

    // statement 2 stays in the regime Q < 1/e with a smaller start
    std::vector<double> j2(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) j2[k] = 2.0 * j[k];
    const double w0s = std::exp(-8.0);
    const double q0_eff = w0s * std::abs(std::log(0.5 * w0s));
    const StatementCheck s2 = statement2_check(w0s, jint.back(), 1.0, 1.0);
    const GronwallResult o2 = gronwall_ode_solve(GronwallKind::SqrtLog, times, j2, q0_eff);
    double err_s2 = 0.0;
    for (std::size_t k = 0; k < times.size(); k += 500)
        err_s2 = std::max(err_s2, std::abs(2.0 * o2.q[k] - s2.rhs(jint[k])) / s2.rhs(jint[k]));

    const bool pass = err_ll < 1e-8 && err_sl < 1e-8 && err_s1 < 1e-6 && err_s2 < 1e-6;
    verdict(8, pass, "gronwall ODE cross-validation of the statement closures",
            fmt("closed-form errors %.1e/%.1e, closure errors %.1e/%.1e", err_ll, err_sl, err_s1,
                err_s2));
}

void criterion9() {
    const double e0 = 0.3;
    const MagneticFieldModel b = MagneticFieldModel::nonuniform(
        2, [](double, const Vec3& x) { return Vec3{0.0, 0.0, std::sin(2.0 * kPi * x[0])}; }, 1.0,
        2.0 * kPi);
    const EFieldFn efield = [e0](double, const Vec3& x) {
        return Vec3{e0 * std::sin(2.0 * kPi * x[1]), e0 * std::cos(2.0 * kPi * x[0]), 0.0};
    };
    const double esup = e0 * std::sqrt(2.0), bsup = 1.0, dt = 1e-3;
    bool pass = true;
    double worst = 1e300;
    for (int run = 0; run < 50; ++run) {
        PhaseEnsemble e = sample_ensemble({"maxwellian", 2, 1.0}, 16, 9000 + run);
        Trajectory traj;
        traj.dim = 2;
        traj.append(0.0, e.pos, e.vel);
        for (int k = 0; k < 1000; ++k) {
            e = push_nonuniform_B(e, efield, b, k * dt, dt);
            if ((k + 1) % 20 == 0) traj.append((k + 1) * dt, e.pos, e.vel);
        }
        const std::vector<double> esup_series(traj.frames(), esup);
        const VelocityBoundReport rep = velocity_bound_check(traj, esup_series, bsup, 1e-6);
        pass = pass && rep.pass;
        worst = std::min(worst, rep.min_slack);
    }
    verdict(9, pass, "velocity characteristic bound on 50 nonuniform-B runs",
            fmt("min slack %.3e (must be >= -1e-6)", worst));
}

void criterion10() {
    // formula suite
    bool formulas = true;
    {
        std::vector<double> times(100001);
        for (std::size_t i = 0; i < times.size(); ++i) times[i] = double(i) / 100000.0;
        const std::vector<double> a(times.size(), 2.0), rho(times.size(), 1.0);
        const auto j0 = j_series(times, a, rho, 1.0, 0.0);
        formulas = formulas && std::abs(j0.back() - 2.0) < 1e-10;  // Bhol=0 reduction
        const auto j1 = j_series(times, a, rho, 1.0, 1.0);
        const double expect = 2.0 + std::exp(1.0) + 2.0 * (std::exp(1.0) - 1.0);
        formulas = formulas && std::abs(j1.back() - expect) < 1e-10;

        // admissibility thresholds behave per the condition displays
        formulas = formulas && !statement1_check(0.2, 0.0, 1.0).smallness_ok;
        formulas = formulas && statement1_check(1e-3, 0.0, 1.0).admissible;
        formulas = formulas && !statement1_check(1e-3, 3.0, 1.0).condition_ok;  // e^3 > |log 1e-3|
        formulas = formulas && statement2_check(1e-6, 0.5, 1.0, 0.1353).admissible;
        formulas = formulas && !statement2_check(1e-3, 10.0, 1.0, 0.1353).admissible;
        for (double w : {1e-8, 1e-5, 1e-3}) {
            const double s0 = std::sqrt(std::abs(std::log(w * std::abs(std::log(0.5 * w)))));
            const StatementCheck st = statement2_check(w, 0.0, 1.0, 0.1353);
            formulas = formulas && (st.condition_ok == (s0 >= 1.0));
        }
    }

    // labeled qualitative mollified-poisson run with fitted c_d
    ExperimentConfig cfg;
    cfg.dim = 2;
    cfg.seed = 31;
    cfg.particles = 256;
    cfg.dt = 1e-3;
    cfg.t_final = 0.5;
    cfg.sample_stride = 25;
    cfg.interaction = "poisson";
    cfg.grid_n = 32;
    cfg.mollify_delta = 0.05;
    cfg.magnetic = "sin_x1";
    cfg.b_amplitude = 0.5;
    cfg.family = "maxwellian";
    cfg.sigma = 0.5;
    cfg.shift_v = {5e-3, 0.0, 0.0};
    cfg.method = "exact";
    cfg.p = 2;
    cfg.bound_set = {"theorem1_qualitative"};
    const RunArtifacts art = run_stability_experiment(cfg);
    const bool run_ok = art.qualitative && std::isfinite(art.fitted_cd) && art.fitted_cd >= 0.0 &&
                        art.reports.size() == 1 && art.reports.front().all_pass();

    verdict(10, formulas && run_ok, "theorem 1 formula suite + qualitative poisson run",
            fmt("formulas %s; fitted c_d = %.3f covering W2^2(t) over [0,%.2g]",
                formulas ? "ok" : "FAILED", art.fitted_cd, cfg.t_final));
}

}  // namespace

int main() {
    std::printf("vlasovlab acceptance suite\n");
    run_theorem2_criterion(1, 2);
    run_theorem2_criterion(2, 3);
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    std::printf("%d criterion(s) failed\n", g_failed);
    return g_failed;
}
