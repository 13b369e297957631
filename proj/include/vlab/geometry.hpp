// Torus arithmetic on [0,1)^d, d = 2 or 3, and the phase-space vector
// conventions shared by every module. Positions live on the unit torus,
// velocities in R^d. Vectors are fixed-capacity arrays; the third slot is
// zero when d = 2.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace vlab {

using Vec3 = std::array<double, 3>;

inline bool valid_dim(int d) { return d == 2 || d == 3; }

inline void require_dim(int d) {
    if (!valid_dim(d)) throw std::domain_error("dimension must be 2 or 3");
}

// Reduce a coordinate into [0,1).
inline double wrap_unit(double x) {
    double y = x - std::floor(x);
    if (y >= 1.0) y = 0.0;  // guards x = -eps, where x - floor(x) rounds to 1
    return y;
}

// Representative of a coordinate difference in [-1/2, 1/2).
// A tie at exactly 1/2 resolves to -1/2.
inline double wrap_half(double dx) {
    double y = dx - std::floor(dx + 0.5);
    if (y >= 0.5) y = -0.5;
    return y;
}

inline Vec3 torus_wrap(const Vec3& x, int d) {
    require_dim(d);
    Vec3 out{};
    for (int a = 0; a < d; ++a) {
        if (!std::isfinite(x[a])) throw std::domain_error("torus_wrap: non-finite coordinate");
        out[a] = wrap_unit(x[a]);
    }
    return out;
}

// Minimal-image representative of x - y, coordinates in [-1/2, 1/2).
inline Vec3 torus_displacement(const Vec3& x, const Vec3& y, int d) {
    Vec3 out{};
    for (int a = 0; a < d; ++a) out[a] = wrap_half(x[a] - y[a]);
    return out;
}

inline double norm(const Vec3& v, int d) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += v[a] * v[a];
    return std::sqrt(s);
}

inline double norm_sq(const Vec3& v, int d) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += v[a] * v[a];
    return s;
}

// Geodesic distance on the torus.
inline double torus_distance(const Vec3& x, const Vec3& y, int d) {
    return norm(torus_displacement(x, y, d), d);
}

}  // namespace vlab
