// Kernel benchmark: OpenMP paths against their serial references, with the
// max deviation between the two results printed alongside the speedup.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "vlab/ensemble.hpp"
#include "vlab/fields.hpp"
#include "vlab/flow.hpp"
#include <algorithm>
#include <numbers>

using namespace vlab;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void report(const char* name, double serial_s, double parallel_s, double dev) {
    std::printf("%-28s serial %8.2f ms   omp %8.2f ms   speedup %5.2fx   max|diff| %.3e\n", name,
                serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s, dev);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());

    {
        const InitialSpec spec{"maxwellian", 2, 1.0};
        const PhaseEnsemble ens = sample_ensemble(spec, 2048, 42);
        SmoothKernel generic = make_cosine_product_kernel(1.0);
        generic.kind = SmoothKernel::Kind::Custom;  // force the O(N^2) pair loop
        std::vector<double> fs, fp;
        const double ts = time_best_of(3, [&] { fs = kernel_force_serial(ens, generic); });
        const double tp = time_best_of(3, [&] { fp = kernel_force(ens, generic); });
        report("pair_force N=2048 (custom)", ts, tp, max_abs_diff(fs, fp));

        const SmoothKernel separable = make_cosine_product_kernel(1.0);
        std::vector<double> fm;
        const double tm = time_best_of(3, [&] { fm = kernel_force(ens, separable); });
        report("moment_force N=2048", ts, tm, max_abs_diff(fs, fm));
    }

    {
        const InitialSpec spec{"maxwellian", 2, 1.0};
        const PhaseEnsemble ens = sample_ensemble(spec, 500000, 43);
        DensityGrid gs, gp;
        const double ts = time_best_of(3, [&] { gs = deposit_density_serial(ens, 64); });
        const double tp = time_best_of(3, [&] { gp = deposit_density(ens, 64); });
        report("deposit_density N=5e5 n=64", ts, tp, max_abs_diff(gs.v, gp.v));
    }

    {
        const InitialSpec spec{"maxwellian", 3, 1.0};
        const PhaseEnsemble ens = sample_ensemble(spec, 200000, 44);
        const MagneticFieldModel b = MagneticFieldModel::nonuniform(
            3, [](double, const Vec3& x) { return Vec3{0.0, 0.0, std::sin(2 * std::numbers::pi * x[0])}; });
        const EFieldFn e = [](double, const Vec3& x) {
            return Vec3{0.1 * std::sin(2 * std::numbers::pi * x[1]), 0.1 * std::cos(2 * std::numbers::pi * x[0]), 0.0};
        };
        PhaseEnsemble es = ens, ep = ens;
        const double ts = time_best_of(3, [&] {
            es = ens;
            push_nonuniform_B_serial(std::span<double>(es.pos), std::span<double>(es.vel), 3, e, b,
                                     0.0, 1e-3);
        });
        const double tp = time_best_of(3, [&] {
            ep = ens;
            push_nonuniform_B(std::span<double>(ep.pos), std::span<double>(ep.vel), 3, e, b, 0.0,
                              1e-3);
        });
        std::vector<double> ss = es.pos, pp = ep.pos;
        ss.insert(ss.end(), es.vel.begin(), es.vel.end());
        pp.insert(pp.end(), ep.vel.begin(), ep.vel.end());
        report("rk4_push N=2e5", ts, tp, max_abs_diff(ss, pp));
    }

    return 0;
}
