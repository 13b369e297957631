// Uniform periodic grids on the unit torus: scalar density/potential fields
// and their CSV export. Nodes sit at k/n per axis; storage is row-major with
// x1 the slowest axis.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vlab/geometry.hpp"

namespace vlab {

struct DensityGrid {
    int dim = 2;
    int n = 0;
    std::vector<double> v;  // size n^dim

    DensityGrid() = default;
    DensityGrid(int dim_, int n_);

    std::size_t size() const { return v.size(); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n + j; }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n + j) * n + k;
    }
    double& at(int i, int j) { return v[index(i, j)]; }
    double at(int i, int j) const { return v[index(i, j)]; }
    double& at(int i, int j, int k) { return v[index(i, j, k)]; }
    double at(int i, int j, int k) const { return v[index(i, j, k)]; }

    double cell_volume() const;
    // Mean over nodes == integral over the unit torus for node sampling.
    double mean() const;
    double max_abs() const;

    // Periodic multilinear interpolation at a point of the torus.
    double interpolate(const Vec3& x) const;
};

// (sum_cells |g|^p * cellvol)^(1/p); p may be infinity.
double lp_norm(const DensityGrid& g, double p);

void save_grid_csv(const DensityGrid& g, const std::string& path);

}  // namespace vlab
