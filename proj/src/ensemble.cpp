#include "vlab/ensemble.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vlab/reduce.hpp"

namespace vlab {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller on explicit uniforms so the stream does not depend on the
// standard library's distribution internals.
struct GaussianSource {
    std::mt19937_64& rng;
    bool have_spare = false;
    double spare = 0.0;

    double next() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01(rng);
        } while (u1 <= 0.0);
        const double u2 = uniform01(rng);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare = r * std::sin(a);
        have_spare = true;
        return r * std::cos(a);
    }
};

double pow_int(double x, int k) {
    double acc = 1.0;
    for (int i = 0; i < k; ++i) acc *= x;
    return acc;
}

}  // namespace

PhaseEnsemble make_ensemble(int dim, std::vector<double> pos, std::vector<double> vel,
                            std::vector<double> weight) {
    require_dim(dim);
    const std::size_t n = weight.size();
    if (n == 0) throw std::domain_error("ensemble: needs at least one particle");
    if (pos.size() != n * dim || vel.size() != n * dim)
        throw std::domain_error("ensemble: array sizes do not match particle count");
    for (std::size_t i = 0; i < pos.size(); ++i) {
        if (!std::isfinite(pos[i]) || !std::isfinite(vel[i]))
            throw std::domain_error("ensemble: non-finite state");
        pos[i] = wrap_unit(pos[i]);
    }
    const double total = pairwise_sum(weight.data(), n);
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::domain_error("ensemble: weights must be positive");
    for (double& w : weight) {
        if (!(w > 0.0)) throw std::domain_error("ensemble: weights must be positive");
        w /= total;
    }
    PhaseEnsemble ens;
    ens.dim = dim;
    ens.pos = std::move(pos);
    ens.vel = std::move(vel);
    ens.weight = std::move(weight);
    return ens;
}

PhaseEnsemble sample_ensemble(const InitialSpec& spec, std::size_t n, std::uint64_t seed) {
    require_dim(spec.dim);
    if (n < 1) throw std::domain_error("sample_ensemble: N >= 1 required");
    const int d = spec.dim;
    std::vector<double> pos(n * d), vel(n * d, 0.0), weight(n, 1.0 / static_cast<double>(n));
    std::mt19937_64 rng(seed);

    if (spec.family == "uniform_zero_v") {
        for (std::size_t i = 0; i < n * d; ++i) pos[i] = uniform01(rng);
    } else if (spec.family == "maxwellian") {
        GaussianSource gauss{rng};
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < d; ++a) pos[i * d + a] = uniform01(rng);
            for (int a = 0; a < d; ++a) vel[i * d + a] = spec.sigma * gauss.next();
        }
    } else {
        throw std::invalid_argument("sample_ensemble: unknown family '" + spec.family + "'");
    }
    return make_ensemble(d, std::move(pos), std::move(vel), std::move(weight));
}

PhaseEnsemble shifted_ensemble(const PhaseEnsemble& ens, const Vec3& dx, const Vec3& dv) {
    PhaseEnsemble out = ens;
    const int d = ens.dim;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        for (int a = 0; a < d; ++a) {
            out.pos[i * d + a] = wrap_unit(out.pos[i * d + a] + dx[a]);
            out.vel[i * d + a] += dv[a];
        }
    }
    return out;
}

namespace {

struct CicIndex {
    std::vector<int> cell0;     // N*dim lower node per axis
    std::vector<double> frac;   // N*dim fractional offset
    std::vector<std::size_t> cell_start;  // n^d + 1 prefix
    std::vector<std::size_t> order;       // particles sorted by cell, stable
};

CicIndex build_cic_index(const PhaseEnsemble& ens, int n) {
    const int d = ens.dim;
    const std::size_t np = ens.size();
    std::size_t ncells = 1;
    for (int a = 0; a < d; ++a) ncells *= static_cast<std::size_t>(n);

    CicIndex idx;
    idx.cell0.resize(np * d);
    idx.frac.resize(np * d);
    std::vector<std::size_t> flat(np);
    for (std::size_t i = 0; i < np; ++i) {
        std::size_t f = 0;
        for (int a = 0; a < d; ++a) {
            const double s = ens.pos[i * d + a] * n;
            int i0 = static_cast<int>(std::floor(s));
            if (i0 >= n) i0 = n - 1;
            idx.cell0[i * d + a] = i0;
            idx.frac[i * d + a] = s - i0;
            f = f * n + static_cast<std::size_t>(i0);
        }
        flat[i] = f;
    }
    idx.cell_start.assign(ncells + 1, 0);
    for (std::size_t i = 0; i < np; ++i) ++idx.cell_start[flat[i] + 1];
    for (std::size_t c = 0; c < ncells; ++c) idx.cell_start[c + 1] += idx.cell_start[c];
    idx.order.resize(np);
    std::vector<std::size_t> cursor(idx.cell_start.begin(), idx.cell_start.end() - 1);
    for (std::size_t i = 0; i < np; ++i) idx.order[cursor[flat[i]]++] = i;
    return idx;
}

}  // namespace

DensityGrid deposit_density(const PhaseEnsemble& ens, int n) {
    if (n < 2) throw std::domain_error("deposit_density: n >= 2 required");
    const int d = ens.dim;
    DensityGrid grid(d, n);
    const CicIndex idx = build_cic_index(ens, n);
    const double scale = static_cast<double>(grid.size());  // n^d
    const int corners = 1 << d;
    const std::int64_t nnodes = static_cast<std::int64_t>(grid.size());

    // Gather form: each node collects from the 2^d cells touching it, cells
    // and particles visited in a fixed order, so the result does not depend
    // on how nodes are distributed over threads.
#pragma omp parallel for schedule(static)
    for (std::int64_t node = 0; node < nnodes; ++node) {
        int k[3] = {0, 0, 0};
        std::size_t rem = static_cast<std::size_t>(node);
        for (int a = d - 1; a >= 0; --a) {
            k[a] = static_cast<int>(rem % n);
            rem /= n;
        }
        double acc = 0.0;
        for (int off = 0; off < corners; ++off) {
            std::size_t cell = 0;
            for (int a = 0; a < d; ++a) {
                const int bit = (off >> a) & 1;  // 1: particle sits one cell below
                const int c = bit ? (k[a] + n - 1) % n : k[a];
                cell = cell * n + static_cast<std::size_t>(c);
            }
            for (std::size_t s = idx.cell_start[cell]; s < idx.cell_start[cell + 1]; ++s) {
                const std::size_t p = idx.order[s];
                double w = ens.weight[p];
                for (int a = 0; a < d; ++a) {
                    const int bit = (off >> a) & 1;
                    const double f = idx.frac[p * d + a];
                    w *= bit ? f : (1.0 - f);
                }
                acc += w;
            }
        }
        grid.v[static_cast<std::size_t>(node)] = acc * scale;
    }
    return grid;
}

DensityGrid deposit_density_serial(const PhaseEnsemble& ens, int n) {
    if (n < 2) throw std::domain_error("deposit_density: n >= 2 required");
    const int d = ens.dim;
    DensityGrid grid(d, n);
    const double scale = static_cast<double>(grid.size());
    const int corners = 1 << d;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        int i0[3] = {0, 0, 0};
        double frac[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) {
            const double s = ens.pos[i * d + a] * n;
            int c = static_cast<int>(std::floor(s));
            if (c >= n) c = n - 1;
            i0[a] = c;
            frac[a] = s - c;
        }
        for (int off = 0; off < corners; ++off) {
            double w = ens.weight[i] * scale;
            std::size_t node = 0;
            for (int a = 0; a < d; ++a) {
                const int bit = (off >> a) & 1;
                node = node * n + static_cast<std::size_t>((i0[a] + bit) % n);
                w *= bit ? frac[a] : (1.0 - frac[a]);
            }
            grid.v[node] += w;
        }
    }
    return grid;
}

double velocity_moment(const PhaseEnsemble& ens, int k) {
    if (k < 1) throw std::domain_error("velocity_moment: k >= 1 required");
    const int d = ens.dim;
    return pairwise_sum(std::size_t{0}, ens.size(), [&](std::size_t i) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += ens.vel[i * d + a] * ens.vel[i * d + a];
        return ens.weight[i] * pow_int(std::sqrt(s), k);
    });
}

MomentCheck moment_condition_check(const PhaseEnsemble& ens, double c0, int k_max) {
    if (!(c0 > 0.0)) throw std::domain_error("moment_condition_check: C0 > 0 required");
    if (k_max < 1) throw std::domain_error("moment_condition_check: k_max >= 1 required");
    for (int k = 1; k <= k_max; ++k) {
        if (velocity_moment(ens, k) > pow_int(c0 * k, k)) return {false, k};
    }
    return {true, 0};
}

void save_ensemble_csv(const PhaseEnsemble& ens, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const int d = ens.dim;
    for (int a = 0; a < d; ++a) out << "x" << (a + 1) << ",";
    for (int a = 0; a < d; ++a) out << "v" << (a + 1) << ",";
    out << "w\n";
    char buf[32];
    auto emit = [&](double x, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << buf << sep;
    };
    for (std::size_t i = 0; i < ens.size(); ++i) {
        for (int a = 0; a < d; ++a) emit(ens.pos[i * d + a], ',');
        for (int a = 0; a < d; ++a) emit(ens.vel[i * d + a], ',');
        emit(ens.weight[i], '\n');
    }
}

PhaseEnsemble load_ensemble_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty ensemble file " + path);
    const std::size_t cols = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
    if (cols != 5 && cols != 7) throw std::runtime_error("ensemble csv: expected 5 or 7 columns");
    const int d = (cols == 5) ? 2 : 3;

    std::vector<double> pos, vel, weight;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(row, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != cols) throw std::runtime_error("ensemble csv: bad row");
        for (int a = 0; a < d; ++a) pos.push_back(vals[a]);
        for (int a = 0; a < d; ++a) vel.push_back(vals[d + a]);
        weight.push_back(vals[2 * d]);
    }
    return make_ensemble(d, std::move(pos), std::move(vel), std::move(weight));
}

}  // namespace vlab
