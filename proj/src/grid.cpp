#include "vlab/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "vlab/reduce.hpp"

namespace vlab {

DensityGrid::DensityGrid(int dim_, int n_) : dim(dim_), n(n_) {
    require_dim(dim_);
    if (n_ < 2) throw std::domain_error("DensityGrid: n must be >= 2");
    std::size_t total = 1;
    for (int a = 0; a < dim_; ++a) total *= static_cast<std::size_t>(n_);
    v.assign(total, 0.0);
}

double DensityGrid::cell_volume() const {
    double vol = 1.0;
    for (int a = 0; a < dim; ++a) vol /= n;
    return vol;
}

double DensityGrid::mean() const {
    return pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

double DensityGrid::max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double DensityGrid::interpolate(const Vec3& x) const {
    int idx0[3] = {0, 0, 0};
    double frac[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        double s = wrap_unit(x[a]) * n;
        int i0 = static_cast<int>(std::floor(s));
        if (i0 >= n) i0 = n - 1;  // s can round up to n for x just below 1
        idx0[a] = i0;
        frac[a] = s - i0;
    }
    double acc = 0.0;
    const int corners = 1 << dim;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        int id[3] = {0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            const int off = (c >> a) & 1;
            id[a] = (idx0[a] + off) % n;
            w *= off ? frac[a] : (1.0 - frac[a]);
        }
        const double val = (dim == 2) ? at(id[0], id[1]) : at(id[0], id[1], id[2]);
        acc += w * val;
    }
    return acc;
}

double lp_norm(const DensityGrid& g, double p) {
    if (std::isinf(p)) return g.max_abs();
    if (p < 1.0) throw std::domain_error("lp_norm: p must be >= 1 or infinity");
    const double vol = g.cell_volume();
    const double total = pairwise_sum(std::size_t{0}, g.size(), [&](std::size_t i) {
        return std::pow(std::abs(g.v[i]), p) * vol;
    });
    return std::pow(total, 1.0 / p);
}

void save_grid_csv(const DensityGrid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# n=" << g.n << " d=" << g.dim << "\n";
    char buf[32];
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", g.v[i]);
        out << buf << ((i + 1) % static_cast<std::size_t>(g.n) == 0 ? '\n' : ',');
    }
}

}  // namespace vlab
