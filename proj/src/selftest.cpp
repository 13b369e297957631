// Fast invariant suite behind `vlasovlab selftest`: a few representative
// checks from each module, small enough to finish in seconds.
#include <cmath>
#include <cstdio>
#include <random>

#include "vlab/bounds.hpp"
#include "vlab/fields.hpp"
#include "vlab/flow.hpp"
#include "vlab/harness.hpp"
#include "vlab/transport.hpp"
#include <algorithm>
#include <array>
#include <numbers>

namespace vlab {

namespace {

int g_failures = 0;

void check(bool ok, const char* label) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", label);
    if (!ok) ++g_failures;
}

double rand01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

}  // namespace

int selftest() {
    g_failures = 0;
    std::mt19937_64 rng(7);

    // torus arithmetic
    {
        bool ok = true;
        for (int trial = 0; trial < 200; ++trial) {
            Vec3 x{rand01(rng) * 4 - 2, rand01(rng) * 4 - 2, rand01(rng) * 4 - 2};
            Vec3 y{rand01(rng), rand01(rng), rand01(rng)};
            const Vec3 xw = torus_wrap(x, 3);
            for (int a = 0; a < 3; ++a) ok = ok && xw[a] >= 0.0 && xw[a] < 1.0;
            const double dxy = torus_distance(xw, y, 3);
            ok = ok && std::abs(dxy - torus_distance(y, xw, 3)) < 1e-15;
            ok = ok && dxy <= std::sqrt(3.0) / 2.0 + 1e-15;
        }
        check(ok, "geometry: wrap range, distance symmetry, diameter bound");
    }

    // rotation group property and drift norm identity
    {
        bool ok = true;
        const Mat3 r1 = rotation(1.3, 0.4, 2);
        const Mat3 r2 = rotation(1.3, 0.9, 2);
        const Mat3 r12 = rotation(1.3, 1.3, 2);
        Vec3 v{0.3, -1.2, 0.0};
        const Vec3 a = mat_apply(r1, mat_apply(r2, v, 2), 2);
        const Vec3 b = mat_apply(r12, v, 2);
        ok = ok && std::abs(a[0] - b[0]) < 1e-12 && std::abs(a[1] - b[1]) < 1e-12;
        const Vec3 w{0.7, -0.2, 0.5};
        const Vec3 dr = drift_apply(2.0, 1.5, w, 3);
        const double expect = std::sqrt(2.0 * (w[0] * w[0] + w[1] * w[1]) *
                                            (1.0 - std::cos(2.0 * 1.5)) / 4.0 +
                                        1.5 * 1.5 * w[2] * w[2]);
        ok = ok && std::abs(norm(dr, 3) - expect) < 1e-12;
        check(ok, "flow: rotation group property, drift norm identity");
    }

    // free flow composition
    {
        Vec3 x{0.2, 0.8, 0.1}, v{1.0, -0.5, 0.25};
        const auto mid = free_flow(1.7, 0.6, 0.0, x, v, 3);
        const auto end = free_flow(1.7, 1.1, 0.6, mid.first, mid.second, 3);
        const auto direct = free_flow(1.7, 1.1, 0.0, x, v, 3);
        bool ok = torus_distance(end.first, direct.first, 3) < 1e-10;
        for (int a = 0; a < 3; ++a) ok = ok && std::abs(end.second[a] - direct.second[a]) < 1e-10;
        check(ok, "flow: free flow is a flow");
    }

    // exact transport vs brute force, N = 5
    {
        bool ok = true;
        for (int trial = 0; trial < 10; ++trial) {
            const InitialSpec spec{"maxwellian", 2, 0.5};
            const PhaseEnsemble a = sample_ensemble(spec, 5, 100 + trial);
            const PhaseEnsemble b = sample_ensemble(spec, 5, 200 + trial);
            const double got = wasserstein_exact(a, b, PhaseMetricConfig{1}).distance;
            std::array<int, 5> perm{0, 1, 2, 3, 4};
            double best = 1e300;
            do {
                double cost = 0.0;
                for (int i = 0; i < 5; ++i) {
                    const double dx = torus_distance(a.position(i), b.position(perm[i]), 2);
                    double dv2 = 0.0;
                    for (int ax = 0; ax < 2; ++ax) {
                        const double dv = a.vel[i * 2 + ax] - b.vel[perm[i] * 2 + ax];
                        dv2 += dv * dv;
                    }
                    cost += 0.2 * (dx + std::sqrt(dv2));
                }
                best = std::min(best, cost);
            } while (std::next_permutation(perm.begin(), perm.end()));
            ok = ok && std::abs(got - best) < 1e-9;
        }
        check(ok, "transport: assignment equals brute-force optimum");
    }

    // poisson manufactured solution at n = 32
    {
        DensityGrid rho(2, 32);
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 32; ++j)
                rho.at(i, j) = 1.0 + std::cos(2.0 * std::numbers::pi * i / 32.0);
        const FieldSample f = solve_poisson(rho);
        double err = 0.0;
        for (int i = 0; i < 32; ++i) {
            const double x = double(i) / 32.0;
            const double u_exact = std::cos(2.0 * std::numbers::pi * x) / (4.0 * std::numbers::pi * std::numbers::pi);
            const double e_exact = std::sin(2.0 * std::numbers::pi * x) / (2.0 * std::numbers::pi);
            for (int j = 0; j < 32; ++j) {
                err = std::max(err, std::abs(f.potential.at(i, j) - u_exact));
                err = std::max(err, std::abs(f.efield[0].at(i, j) - e_exact));
                err = std::max(err, std::abs(f.efield[1].at(i, j)));
            }
        }
        check(err < 1e-10, "fields: poisson manufactured solution");
    }

    // kinetic fixed point residuals
    {
        bool ok = true;
        for (double a : {0.0, 0.05, 0.2}) {
            for (double b : {0.05, 0.2}) {
                const KineticQResult r = kinetic_q_fixed_point(a, b);
                ok = ok && r.status == FixedPointStatus::Ok && r.residual < 1e-12;
                if (a == 0.0) ok = ok && r.q == 0.5 * b;
            }
        }
        check(ok, "transport: kinetic fixed point residual < 1e-12");
    }

    // free-flow exactness of the constant-B splitting over 100 steps
    {
        const InitialSpec spec{"maxwellian", 2, 1.0};
        PhaseEnsemble e = sample_ensemble(spec, 8, 11);
        const PhaseEnsemble e0 = e;
        const std::vector<double> zero(e.size() * 2, 0.0);
        const double omega = 2.1, dt = 1e-2;
        for (int k = 0; k < 100; ++k) e = push_constant_B(e, zero, omega, dt);
        bool ok = true;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const auto ref = free_flow(omega, 1.0, 0.0, e0.position(i), e0.velocity(i), 2);
            ok = ok && torus_distance(e.position(i), ref.first, 2) < 1e-12;
            for (int a = 0; a < 2; ++a)
                ok = ok && std::abs(e.velocity(i)[a] - ref.second[a]) < 1e-12;
        }
        check(ok, "flow: splitting exact for force-free motion");
    }

    // theorem 2 gain limit
    {
        const double g2 = theorem2_gain(2, 1e-8, 1.0);
        const double g3 = theorem2_gain(3, 1e-8, 1.0);
        bool ok = std::abs(g2 - 2.0) < 1e-6 && std::abs(g3 - (std::sqrt(2.0) + 1.0)) < 1e-6;
        check(ok, "bounds: small-omega gain limits");
    }

    std::printf("selftest: %d failure(s)\n", g_failures);
    return g_failures;
}

}  // namespace vlab
