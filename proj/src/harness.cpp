#include "vlab/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vlab/fields.hpp"
#include "vlab/version.hpp"
#include <limits>
#include <memory>

namespace vlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

MagneticFieldModel make_magnetic(const ExperimentConfig& cfg) {
    if (cfg.magnetic == "constant") return MagneticFieldModel::constant_uniform(cfg.dim, cfg.omega);
    // sin_x1: b(t,x) = amp sin(2 pi x1); Lipschitz constant 2 pi |amp|
    // dominates every alpha-seminorm on the torus (diameter < 1).
    const double amp = cfg.b_amplitude;
    return MagneticFieldModel::nonuniform(
        cfg.dim,
        [amp](double, const Vec3& x) { return Vec3{0.0, 0.0, amp * std::sin(kTwoPi * x[0])}; },
        std::abs(amp), kTwoPi * std::abs(amp));
}

SmoothKernel make_kernel(const ExperimentConfig& cfg) {
    if (cfg.interaction == "cosine_product") return make_cosine_product_kernel(cfg.amplitude);
    if (cfg.interaction == "cosine_x1") return make_cosine_x1_kernel(cfg.amplitude);
    return make_zero_kernel();
}

// Per-ensemble stepping state. Constant-B runs keep the standing force so
// each step costs one force evaluation (kick-rotate-kick with the second
// kick's force reused as the next step's first).
struct Stepper {
    const ExperimentConfig& cfg;
    MagneticFieldModel bmodel;
    SmoothKernel kernel;
    bool has_kernel_force = false;
    bool has_poisson_force = false;
    PoissonCoupling coupling;
    std::vector<double> force;

    explicit Stepper(const ExperimentConfig& c) : cfg(c), bmodel(make_magnetic(c)) {
        if (c.interaction == "cosine_product" || c.interaction == "cosine_x1") {
            kernel = make_kernel(c);
            has_kernel_force = true;
        } else if (c.interaction == "poisson") {
            coupling = PoissonCoupling{c.grid_n, c.mollify_delta};
            has_poisson_force = true;
        }
    }

    std::vector<double> compute_force(const PhaseEnsemble& e) const {
        if (has_kernel_force) return kernel_force(e, kernel);
        if (has_poisson_force) return poisson_force(e, coupling);
        return std::vector<double>(e.size() * e.dim, 0.0);
    }

    void init(const PhaseEnsemble& e) { force = compute_force(e); }

    void step(PhaseEnsemble& e, double t) {
        const int d = e.dim;
        if (cfg.magnetic == "constant") {
            const double half = 0.5 * cfg.dt;
            const bool kick = has_kernel_force || has_poisson_force;
            if (kick)
                for (std::size_t i = 0; i < e.vel.size(); ++i) e.vel[i] += half * force[i];
            free_step(cfg.omega, cfg.dt, std::span<double>(e.pos), std::span<double>(e.vel), d);
            if (kick) {
                force = compute_force(e);
                for (std::size_t i = 0; i < e.vel.size(); ++i) e.vel[i] += half * force[i];
            }
            return;
        }
        // Non-uniform B: field frozen over the step, classical RK4 per particle.
        EFieldFn efield;
        if (has_kernel_force) {
            const auto frozen = std::make_shared<PhaseEnsemble>(e);
            const SmoothKernel& k = kernel;
            efield = [frozen, &k](double, const Vec3& x) {
                const int dd = frozen->dim;
                Vec3 acc{};
                for (std::size_t j = 0; j < frozen->size(); ++j) {
                    const Vec3 g = k.grad(torus_displacement(x, frozen->position(j), dd), dd);
                    for (int a = 0; a < dd; ++a) acc[a] += frozen->weight[j] * g[a];
                }
                return acc;
            };
        } else if (has_poisson_force) {
            auto field = std::make_shared<FieldSample>();
            poisson_force(e, coupling, field.get());
            efield = [field](double, const Vec3& x) { return field->interpolate_E(x); };
        }
        push_nonuniform_B(std::span<double>(e.pos), std::span<double>(e.vel), d, efield, bmodel,
                          t, cfg.dt);
    }
};

struct PoissonSample {
    double a = 0.0;        // ||rho1||_inf + ||rho2||_inf
    double rho2sup = 0.0;  // ||rho2||_inf
    double esup = 0.0;     // max grid |E| of solution 2
};

PoissonSample poisson_sample(const ExperimentConfig& cfg, const PhaseEnsemble& e1,
                             const PhaseEnsemble& e2) {
    const PoissonCoupling coupling{cfg.grid_n, cfg.mollify_delta};
    FieldSample field2;
    DensityGrid rho2;
    poisson_force(e2, coupling, &field2, &rho2);
    const DensityGrid rho1 = deposit_density(e1, cfg.grid_n);
    PoissonSample s;
    s.rho2sup = lp_norm(rho2, std::numeric_limits<double>::infinity());
    s.a = lp_norm(rho1, std::numeric_limits<double>::infinity()) + s.rho2sup;
    s.esup = field2.max_E_norm();
    return s;
}

bool wants_bound(const ExperimentConfig& cfg, const std::string& name) {
    for (const auto& b : cfg.bound_set)
        if (b == name) return true;
    return false;
}

void write_distances_csv(const std::string& path, const ExperimentConfig& cfg,
                         const std::vector<double>& times, const std::vector<double>& dist) {
    std::ofstream out(path);
    out << "# method=" << cfg.method << " p=" << cfg.p;
    if (cfg.method == "entropic") out << " epsilon=" << cfg.epsilon;
    out << "\nt,distance\n";
    char buf[32];
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", times[k]);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", dist[k]);
        out << buf << '\n';
    }
}

void write_functionals_csv(const std::string& path, const RunArtifacts& art) {
    std::ofstream out(path);
    out << "t,n_functional,loeper_q,kinetic_q,kinetic_status,renorm_q\n";
    char buf[32];
    auto emit = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << buf;
    };
    for (std::size_t k = 0; k < art.times.size(); ++k) {
        emit(art.times[k]);
        out << ',';
        emit(art.n_functional[k]);
        out << ',';
        emit(art.loeper_q[k]);
        out << ',';
        emit(art.kinetic_q[k]);
        out << ',' << art.kinetic_status[k] << ',';
        emit(art.renorm_q.empty() ? std::numeric_limits<double>::quiet_NaN() : art.renorm_q[k]);
        out << '\n';
    }
}

}  // namespace

RunArtifacts run_stability_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const bool theorem2 = wants_bound(cfg, "theorem2");
    const bool dobrushin = wants_bound(cfg, "dobrushin");
    const bool theorem1q = wants_bound(cfg, "theorem1_qualitative");
    if ((theorem2 || dobrushin) && cfg.interaction == "poisson")
        throw std::invalid_argument(
            "config: theorem2/dobrushin bounds need a smooth kernel (H is undefined for poisson)");
    if (theorem2 && cfg.magnetic != "constant")
        throw std::invalid_argument("config: the theorem2 bound assumes constant uniform B");
    if (theorem1q && cfg.interaction != "poisson")
        throw std::invalid_argument("config: theorem1_qualitative needs the poisson interaction");

    const auto t_start = std::chrono::steady_clock::now();
    RunArtifacts art;
    art.config_digest = config_hash(cfg);

    const InitialSpec spec{cfg.family, cfg.dim, cfg.sigma};
    PhaseEnsemble e1 = sample_ensemble(spec, cfg.particles, cfg.seed);
    PhaseEnsemble e2 =
        (cfg.initial_mode == "independent")
            ? sample_ensemble(spec, cfg.particles, cfg.seed2 ? cfg.seed2 : cfg.seed + 1)
            : shifted_ensemble(e1, cfg.shift_x, cfg.shift_v);

    const Coupling pi0_1 = wasserstein_exact(e1, e2, PhaseMetricConfig{1}, cfg.exact_cap).plan;
    const Coupling pi0_2 = wasserstein_exact(e1, e2, PhaseMetricConfig{2}, cfg.exact_cap).plan;

    const bool constant_b = cfg.magnetic == "constant";
    const bool need_w1 = theorem2 || dobrushin;
    const bool need_w2 = theorem1q;

    Stepper stepper1(cfg), stepper2(cfg);
    if (constant_b) {
        stepper1.init(e1);
        stepper2.init(e2);
    }

    art.traj1.dim = art.traj2.dim = cfg.dim;
    std::vector<double> w1_series, w2sq_series;
    std::vector<double> rho2sup_series;

    const long nsteps = std::llround(cfg.t_final / cfg.dt);

    auto sample = [&](double t) {
        art.times.push_back(t);
        art.traj1.append(t, e1.pos, e1.vel);
        art.traj2.append(t, e2.pos, e2.vel);

        double w1 = 0.0, w2 = 0.0;
        bool have_w1 = false, have_w2 = false;
        if (cfg.method == "exact") {
            const auto res = wasserstein_exact(e1, e2, PhaseMetricConfig{cfg.p}, cfg.exact_cap);
            art.distance.push_back(res.distance);
            if (cfg.p == 1) {
                w1 = res.distance;
                have_w1 = true;
            } else {
                w2 = res.distance;
                have_w2 = true;
            }
        } else {
            const auto res = wasserstein_entropic(e1, e2, PhaseMetricConfig{cfg.p}, cfg.epsilon,
                                                  cfg.entropic_iters);
            art.distance.push_back(res.estimate);
        }
        if (need_w1 && !have_w1)
            w1 = wasserstein_exact(e1, e2, PhaseMetricConfig{1}, cfg.exact_cap).distance;
        if (need_w2 && !have_w2)
            w2 = wasserstein_exact(e1, e2, PhaseMetricConfig{2}, cfg.exact_cap).distance;
        if (need_w1) w1_series.push_back(w1);
        if (need_w2) w2sq_series.push_back(w2 * w2);

        art.n_functional.push_back(dobrushin_functional(pi0_1, e1, e2));
        art.loeper_q.push_back(loeper_functional(pi0_2, e1, e2, 1.0));
        const QuadraticSplit split = quadratic_split(pi0_2, e1, e2);
        if (split.position_sq + split.velocity_sq == 0.0) {
            art.kinetic_q.push_back(0.0);
            art.kinetic_status.push_back(2);
        } else {
            const KineticQResult kq = kinetic_q_fixed_point(split.position_sq, split.velocity_sq);
            art.kinetic_q.push_back(kq.q);
            art.kinetic_status.push_back(kq.status == FixedPointStatus::Ok ? 0 : 1);
        }
        if (constant_b) art.renorm_q.push_back(renormalized_functional(pi0_1, e1, e2, cfg.omega, t));

        if (cfg.interaction == "poisson") {
            const PoissonSample ps = poisson_sample(cfg, e1, e2);
            art.a_series.push_back(ps.a);
            rho2sup_series.push_back(ps.rho2sup);
            art.esup_series.push_back(ps.esup);
        }
    };

    sample(0.0);
    for (long k = 0; k < nsteps; ++k) {
        const double t = k * cfg.dt;
        stepper1.step(e1, t);
        stepper2.step(e2, t);
        if ((k + 1) % cfg.sample_stride == 0 || k + 1 == nsteps) sample((k + 1) * cfg.dt);
    }

    // ------------------------------------------------------------- bounds
    double H = 0.0;
    if (cfg.interaction != "poisson")
        H = kernel_hessian_bound(make_kernel(cfg), cfg.dim, 32);

    if (theorem2) {
        const double w1_0 = w1_series.front();
        std::vector<double> bound(art.times.size());
        for (std::size_t k = 0; k < art.times.size(); ++k)
            bound[k] = theorem2_bound(cfg.dim, H, cfg.omega, art.times[k], w1_0);
        BoundReport rep = make_bound_report("theorem2", art.times, w1_series, bound, cfg.slack);
        rep.inputs = {{"H", H},          {"omega", cfg.omega}, {"dim", double(cfg.dim)},
                      {"W1_0", w1_0},    {"dt", cfg.dt},       {"quadrature_step",
                                                                cfg.dt * cfg.sample_stride}};
        art.reports.push_back(std::move(rep));
    }
    if (dobrushin) {
        const double w1_0 = w1_series.front();
        std::vector<double> bound(art.times.size());
        for (std::size_t k = 0; k < art.times.size(); ++k)
            bound[k] = dobrushin_bound(H, art.times[k], w1_0);
        BoundReport rep = make_bound_report("dobrushin", art.times, w1_series, bound, cfg.slack);
        rep.inputs = {{"H", H}, {"W1_0", w1_0}, {"dt", cfg.dt}};
        art.reports.push_back(std::move(rep));
    }
    if (theorem1q) {
        art.qualitative = true;
        const BNorms bn = b_norms(make_magnetic(cfg), cfg.t_final, 0.5, 8);
        const std::vector<double> j =
            j_series(art.times, art.a_series, rho2sup_series, bn.sup, bn.holder_seminorm);
        const std::vector<double> jint = cumulative_trapezoid(art.times, j);
        const double w0 = w2sq_series.front();
        // Smallest c_d whose statement-1 rhs covers the measured series.
        double fitted = 0.0;
        bool fit_ok = w0 > 0.0 && w0 < 1.0;
        if (fit_ok) {
            const double logw0 = std::log(w0);
            for (std::size_t k = 1; k < art.times.size(); ++k) {
                if (!(w2sq_series[k] > 0.0) || w2sq_series[k] >= 1.0 || jint[k] <= 0.0) continue;
                const double ratio = std::log(w2sq_series[k]) / logw0;
                if (ratio >= 1.0) continue;  // contracted below the start
                fitted = std::max(fitted, -std::log(ratio) / jint[k]);
            }
        }
        art.fitted_cd = fit_ok ? fitted : std::numeric_limits<double>::quiet_NaN();
        std::vector<double> bound(art.times.size());
        for (std::size_t k = 0; k < art.times.size(); ++k) {
            const StatementCheck st = statement1_check(std::max(w0, 1e-300), jint.back(), fitted);
            bound[k] = st.rhs(jint[k]);
        }
        BoundReport rep =
            make_bound_report("theorem1_qualitative", art.times, w2sq_series, bound, cfg.slack);
        rep.inputs = {{"fitted_c_d", fitted},
                      {"Bsup", bn.sup},
                      {"Bholder", bn.holder_seminorm},
                      {"W2sq_0", w0},
                      {"mollify_delta", cfg.mollify_delta},
                      {"quadrature_step", cfg.dt * cfg.sample_stride}};
        art.reports.push_back(std::move(rep));
    }

    art.all_pass = true;
    for (const auto& rep : art.reports) art.all_pass = art.all_pass && rep.all_pass();

    const auto t_end = std::chrono::steady_clock::now();
    art.wall_seconds = std::chrono::duration<double>(t_end - t_start).count();

    // ------------------------------------------------------------ outputs
    if (!cfg.output_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.output_dir);
        const fs::path dir(cfg.output_dir);
        save_trajectory_csv(art.traj1, (dir / "trajectory_1.csv").string());
        save_trajectory_csv(art.traj2, (dir / "trajectory_2.csv").string());
        write_distances_csv((dir / "distances.csv").string(), cfg, art.times, art.distance);
        write_functionals_csv((dir / "functionals.csv").string(), art);
        save_coupling_csv(pi0_1, (dir / "coupling_p1.csv").string());
        for (const auto& rep : art.reports)
            save_bound_report_csv(rep, (dir / ("bounds_" + rep.label + ".csv")).string());

        std::ofstream rp(dir / "report.txt");
        rp << "vlasovlab stability report (" << kVersion << ")\n";
        rp << "config_hash: " << art.config_digest << "\n";
        rp << "wall_seconds: " << art.wall_seconds << "\n";
        rp << "constants: c_d=" << cfg.c_d << " C_d=" << cfg.C_d << " c0=" << cfg.c0
           << " (c0 is a placeholder smallness constant)\n";
        rp << "slack: " << cfg.slack << "\n";
        rp << "quadrature_step: " << cfg.dt * cfg.sample_stride << "\n";
        if (art.qualitative) {
            rp << "note: poisson-case run; bounded-density hypotheses are not literally met\n"
               << "      by particle data, verdicts below are qualitative\n";
            rp << "fitted_c_d: " << art.fitted_cd << "\n";
        }
        for (const auto& rep : art.reports) {
            double min_slack = std::numeric_limits<double>::infinity();
            double at_t = 0.0;
            for (const auto& s : rep.samples)
                if (s.slack < min_slack) {
                    min_slack = s.slack;
                    at_t = s.t;
                }
            rp << "bound " << rep.label << ": " << (rep.all_pass() ? "PASS" : "FAIL")
               << (art.qualitative ? " (qualitative)" : "") << "  min_slack=" << min_slack
               << " at t=" << at_t << "\n";
        }
        int regime_exits = 0;
        for (int s : art.kinetic_status)
            if (s == 1) ++regime_exits;
        if (regime_exits > 0)
            rp << "note: kinetic fixed point outside regime Q < 1/e at " << regime_exits
               << " samples\n";
        rp << "overall: " << (art.all_pass ? "PASS" : "FAIL") << "\n";
    }
    return art;
}

Trajectory run_simulation(const ExperimentConfig& cfg) {
    cfg.validate();
    const InitialSpec spec{cfg.family, cfg.dim, cfg.sigma};
    PhaseEnsemble e = sample_ensemble(spec, cfg.particles, cfg.seed);
    Stepper stepper(cfg);
    if (cfg.magnetic == "constant") stepper.init(e);

    Trajectory traj;
    traj.dim = cfg.dim;
    traj.append(0.0, e.pos, e.vel);
    const long nsteps = std::llround(cfg.t_final / cfg.dt);
    for (long k = 0; k < nsteps; ++k) {
        stepper.step(e, k * cfg.dt);
        if ((k + 1) % cfg.sample_stride == 0 || k + 1 == nsteps)
            traj.append((k + 1) * cfg.dt, e.pos, e.vel);
    }
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        save_trajectory_csv(traj,
                            (std::filesystem::path(cfg.output_dir) / "trajectory.csv").string());
    }
    return traj;
}

}  // namespace vlab
