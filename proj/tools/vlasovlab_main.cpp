// Command-line front end: simulate | stability | transport | bounds | selftest.
// Exit codes: 0 pass, 1 verdict failure, 2 configuration error.
#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "vlab/harness.hpp"
#include "vlab/version.hpp"

namespace {

int run_simulate(const std::string& config_path, const std::string& out_override) {
    vlab::ExperimentConfig cfg = vlab::parse_config_file(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (cfg.output_dir.empty()) cfg.output_dir = "out";
    vlab::run_simulation(cfg);
    std::printf("trajectory written to %s\n", cfg.output_dir.c_str());
    return 0;
}

int run_stability(const std::string& config_path, const std::string& out_override) {
    vlab::ExperimentConfig cfg = vlab::parse_config_file(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (cfg.output_dir.empty()) cfg.output_dir = "out";
    const vlab::RunArtifacts art = vlab::run_stability_experiment(cfg);
    for (const auto& rep : art.reports)
        std::printf("bound %s: %s%s\n", rep.label.c_str(), rep.all_pass() ? "PASS" : "FAIL",
                    art.qualitative ? " (qualitative)" : "");
    std::printf("outputs in %s (config %s, %.2fs)\n", cfg.output_dir.c_str(),
                art.config_digest.c_str(), art.wall_seconds);
    return art.all_pass ? 0 : 1;
}

int run_transport(const std::string& file_a, const std::string& file_b, int p, double entropic_eps,
                  int iters) {
    const vlab::PhaseEnsemble a = vlab::load_ensemble_csv(file_a);
    const vlab::PhaseEnsemble b = vlab::load_ensemble_csv(file_b);
    const vlab::PhaseMetricConfig cfg{p};
    if (entropic_eps > 0.0) {
        const auto res = vlab::wasserstein_entropic(a, b, cfg, entropic_eps, iters);
        std::printf("%.12g (entropic, eps=%g, iters=%d%s)\n", res.estimate, res.epsilon,
                    res.iterations, res.converged ? "" : ", NOT converged");
        return res.converged ? 0 : 1;
    }
    const auto res = vlab::wasserstein_exact(a, b, cfg);
    std::printf("%.12g\n", res.distance);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(vlab::kVersion) +
                 " - magnetized Vlasov stability laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto* sim = app.add_subcommand("simulate", "run one ensemble and write its trajectory");
    sim->add_option("--config", config_path, "experiment config file")->required();
    sim->add_option("--out", out_dir, "output directory override");

    auto* stab = app.add_subcommand("stability", "two-solution stability experiment");
    stab->add_option("--config", config_path, "experiment config file")->required();
    stab->add_option("--out", out_dir, "output directory override");

    std::string file_a, file_b;
    int p = 1, iters = 5000;
    double entropic_eps = 0.0;
    auto* tr = app.add_subcommand("transport", "distance between two ensemble CSV files");
    tr->add_option("--a", file_a, "first ensemble csv")->required();
    tr->add_option("--b", file_b, "second ensemble csv")->required();
    tr->add_option("--p", p, "order (1 or 2)")->check(CLI::IsMember({1, 2}));
    tr->add_option("--entropic", entropic_eps, "use the entropic solver with this epsilon");
    tr->add_option("--iters", iters, "entropic iteration cap");

    bool want_dobrushin = false, want_theorem2 = false, want_gain = false;
    double H = 0.0, t = 0.0, w1 = 1.0, omega = 0.0;
    int dim = 2;
    auto* bd = app.add_subcommand("bounds", "evaluate bound formulas");
    bd->add_flag("--dobrushin", want_dobrushin, "e^{(1+2H)t} W1(0)");
    bd->add_flag("--theorem2", want_theorem2, "magnetized bound (needs --d, --omega)");
    bd->add_flag("--gain", want_gain, "theorem-2 prefactor (needs --d, --omega)");
    bd->add_option("--H", H, "kernel hessian bound");
    bd->add_option("--t", t, "time");
    bd->add_option("--w1", w1, "initial W1 distance");
    bd->add_option("--omega", omega, "gyrofrequency");
    bd->add_option("--d", dim, "dimension")->check(CLI::IsMember({2, 3}));

    auto* st = app.add_subcommand("selftest", "run the built-in invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return run_simulate(config_path, out_dir);
        if (stab->parsed()) return run_stability(config_path, out_dir);
        if (tr->parsed()) return run_transport(file_a, file_b, p, entropic_eps, iters);
        if (bd->parsed()) {
            if (!want_dobrushin && !want_theorem2 && !want_gain) {
                std::fprintf(stderr, "bounds: pick one of --dobrushin --theorem2 --gain\n");
                return 2;
            }
            if (want_dobrushin) std::printf("%.12g\n", vlab::dobrushin_bound(H, t, w1));
            if (want_theorem2)
                std::printf("%.12g\n", vlab::theorem2_bound(dim, H, omega, t, w1));
            if (want_gain) std::printf("%.12g\n", vlab::theorem2_gain(dim, omega, t));
            return 0;
        }
        if (st->parsed()) return vlab::selftest() == 0 ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
