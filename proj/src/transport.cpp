#include "vlab/transport.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "vlab/flow.hpp"
#include "vlab/reduce.hpp"
#include <cstdint>

namespace vlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pairwise phase-space cost; p=1: |dx|+|dv|, p=2: |dx|^2+|dv|^2.
double pair_cost(const PhaseEnsemble& a, std::size_t i, const PhaseEnsemble& b, std::size_t j,
                 int p) {
    const int d = a.dim;
    double dx2 = 0.0, dv2 = 0.0;
    for (int ax = 0; ax < d; ++ax) {
        const double dd = wrap_half(a.pos[i * d + ax] - b.pos[j * d + ax]);
        dx2 += dd * dd;
        const double dv = a.vel[i * d + ax] - b.vel[j * d + ax];
        dv2 += dv * dv;
    }
    if (p == 1) return std::sqrt(dx2) + std::sqrt(dv2);
    return dx2 + dv2;
}

std::vector<double> cost_matrix(const PhaseEnsemble& a, const PhaseEnsemble& b, int p) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<double> c(n * m);
    const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < ni; ++i)
        for (std::size_t j = 0; j < m; ++j)
            c[static_cast<std::size_t>(i) * m + j] = pair_cost(a, static_cast<std::size_t>(i), b, j, p);
    return c;
}

// Exact square assignment via shortest augmenting paths with potentials.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<double> minv(n + 1);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), char{0});
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * static_cast<std::size_t>(n) + (j - 1)] -
                                   u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> rowsol(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) rowsol[p[j] - 1] = j - 1;
    return rowsol;
}

// Dense transportation simplex (u-v method) for general nonnegative masses.
struct SimplexCell {
    int r, c;
    double flow;
};

class TransportSimplex {
  public:
    TransportSimplex(std::vector<double> a, std::vector<double> b, const std::vector<double>& cost)
        : a_(std::move(a)), b_(std::move(b)), cost_(cost), n_(static_cast<int>(a_.size())),
          m_(static_cast<int>(b_.size())) {}

    std::vector<SimplexCell> solve() {
        northwest_corner();
        double cmax = 1e-30;
        for (double c : cost_) cmax = std::max(cmax, std::abs(c));
        const double tol = 1e-11 * cmax;

        const long max_pivots = 200L * (n_ + m_) * (n_ + m_) + 10000;
        long degenerate_streak = 0;
        for (long pivot = 0; pivot < max_pivots; ++pivot) {
            compute_potentials();
            const bool bland = degenerate_streak > 4L * (n_ + m_);
            int er = -1, ec = -1;
            double best = -tol;
            for (int r = 0; r < n_ && (er < 0 || !bland); ++r) {
                for (int c = 0; c < m_; ++c) {
                    if (in_basis_[r * static_cast<std::size_t>(m_) + c]) continue;
                    const double rc = cost_[r * static_cast<std::size_t>(m_) + c] - u_[r] - v_[c];
                    if (rc < best) {
                        best = rc;
                        er = r;
                        ec = c;
                        if (bland) break;  // first eligible cell
                    }
                }
            }
            if (er < 0) break;  // optimal
            const double theta = pivot_on(er, ec);
            degenerate_streak = (theta <= 0.0) ? degenerate_streak + 1 : 0;
        }

        std::vector<SimplexCell> plan;
        for (const auto& cell : basis_)
            if (cell.flow > 0.0) plan.push_back(cell);
        return plan;
    }

  private:
    void add_basis(int r, int c, double flow) {
        in_basis_[r * static_cast<std::size_t>(m_) + c] = 1;
        basis_.push_back({r, c, flow});
        row_adj_[r].push_back(static_cast<int>(basis_.size()) - 1);
        col_adj_[c].push_back(static_cast<int>(basis_.size()) - 1);
    }

    void rebuild_adjacency() {
        for (auto& v : row_adj_) v.clear();
        for (auto& v : col_adj_) v.clear();
        for (int k = 0; k < static_cast<int>(basis_.size()); ++k) {
            row_adj_[basis_[k].r].push_back(k);
            col_adj_[basis_[k].c].push_back(k);
        }
    }

    void northwest_corner() {
        in_basis_.assign(static_cast<std::size_t>(n_) * m_, 0);
        row_adj_.assign(n_, {});
        col_adj_.assign(m_, {});
        std::vector<double> ra = a_, rb = b_;
        int i = 0, j = 0;
        while (true) {
            const double f = std::min(ra[i], rb[j]);
            add_basis(i, j, f);
            ra[i] -= f;
            rb[j] -= f;
            if (i == n_ - 1 && j == m_ - 1) break;
            if (j == m_ - 1 || (ra[i] <= rb[j] && i < n_ - 1)) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    // Solve u_r + v_c = C_rc over the basis tree, u_0 = 0.
    void compute_potentials() {
        u_.assign(n_, kInf);
        v_.assign(m_, kInf);
        u_[0] = 0.0;
        std::vector<int> stack{0};  // row nodes 0..n-1, col nodes n..n+m-1
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            if (node < n_) {
                for (int k : row_adj_[node]) {
                    const auto& cell = basis_[k];
                    if (v_[cell.c] == kInf) {
                        v_[cell.c] = cost_[cell.r * static_cast<std::size_t>(m_) + cell.c] -
                                     u_[cell.r];
                        stack.push_back(n_ + cell.c);
                    }
                }
            } else {
                const int c = node - n_;
                for (int k : col_adj_[c]) {
                    const auto& cell = basis_[k];
                    if (u_[cell.r] == kInf) {
                        u_[cell.r] = cost_[cell.r * static_cast<std::size_t>(m_) + cell.c] -
                                     v_[cell.c];
                        stack.push_back(cell.r);
                    }
                }
            }
        }
    }

    // Add entering cell (er, ec), push theta around the induced cycle, drop
    // the limiting basic cell. Returns theta.
    double pivot_on(int er, int ec) {
        // Path from row er to col ec through the basis tree.
        const int nn = n_ + m_;
        std::vector<int> prev_node(nn, -1), prev_cell(nn, -1);
        std::vector<char> seen(nn, 0);
        std::vector<int> queue{er};
        seen[er] = 1;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int node = queue[qi];
            if (node == n_ + ec) break;
            if (node < n_) {
                for (int k : row_adj_[node]) {
                    const int next = n_ + basis_[k].c;
                    if (!seen[next]) {
                        seen[next] = 1;
                        prev_node[next] = node;
                        prev_cell[next] = k;
                        queue.push_back(next);
                    }
                }
            } else {
                for (int k : col_adj_[node - n_]) {
                    const int next = basis_[k].r;
                    if (!seen[next]) {
                        seen[next] = 1;
                        prev_node[next] = node;
                        prev_cell[next] = k;
                        queue.push_back(next);
                    }
                }
            }
        }
        if (!seen[n_ + ec]) throw std::runtime_error("transport simplex: basis not spanning");

        // Cells along the path, alternating -,+,-,... after the entering +.
        std::vector<int> cycle;
        for (int node = n_ + ec; node != er; node = prev_node[node])
            cycle.push_back(prev_cell[node]);
        // cycle[0] is adjacent to ec; orientation: entering is +, then the
        // path cells alternate starting with -. Walking from ec back to er,
        // cells at even positions leave mass.
        double theta = kInf;
        int leave = -1;
        for (std::size_t idx = 0; idx < cycle.size(); ++idx) {
            if (idx % 2 == 0) {
                const double f = basis_[cycle[idx]].flow;
                if (f < theta) {
                    theta = f;
                    leave = cycle[idx];
                }
            }
        }
        for (std::size_t idx = 0; idx < cycle.size(); ++idx) {
            basis_[cycle[idx]].flow += (idx % 2 == 0) ? -theta : theta;
        }
        // Replace the leaving cell with the entering one.
        in_basis_[basis_[leave].r * static_cast<std::size_t>(m_) + basis_[leave].c] = 0;
        in_basis_[er * static_cast<std::size_t>(m_) + ec] = 1;
        basis_[leave] = {er, ec, theta};
        rebuild_adjacency();
        return theta;
    }

    std::vector<double> a_, b_;
    const std::vector<double>& cost_;
    int n_, m_;
    std::vector<SimplexCell> basis_;
    std::vector<char> in_basis_;
    std::vector<std::vector<int>> row_adj_, col_adj_;
    std::vector<double> u_, v_;
};

bool equal_weights(const PhaseEnsemble& e) {
    const double w0 = 1.0 / static_cast<double>(e.size());
    for (double w : e.weight)
        if (std::abs(w - w0) > 1e-12 * w0) return false;
    return true;
}

}  // namespace

Coupling Coupling::identity(const PhaseEnsemble& ens) {
    Coupling c;
    c.src.resize(ens.size());
    c.dst.resize(ens.size());
    c.mass = ens.weight;
    for (std::size_t i = 0; i < ens.size(); ++i) c.src[i] = c.dst[i] = i;
    return c;
}

void save_coupling_csv(const Coupling& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "i,j,mass\n";
    char buf[32];
    for (std::size_t k = 0; k < c.entries(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", c.mass[k]);
        out << c.src[k] << ',' << c.dst[k] << ',' << buf << "\n";
    }
}

namespace {

TransportResult finish_result(TransportResult result, const std::vector<double>& cost,
                              std::size_t m, int p) {
    const double total = pairwise_sum(std::size_t{0}, result.plan.entries(), [&](std::size_t k) {
        return result.plan.mass[k] * cost[result.plan.src[k] * m + result.plan.dst[k]];
    });
    result.distance = (p == 1) ? total : std::sqrt(total);
    return result;
}

}  // namespace

TransportResult wasserstein_exact_general(const PhaseEnsemble& a, const PhaseEnsemble& b,
                                          const PhaseMetricConfig& cfg) {
    if (a.dim != b.dim) throw std::invalid_argument("wasserstein_exact: dimension mismatch");
    if (cfg.p != 1 && cfg.p != 2) throw std::domain_error("wasserstein_exact: p must be 1 or 2");
    const std::vector<double> cost = cost_matrix(a, b, cfg.p);
    TransportResult result;
    TransportSimplex simplex(a.weight, b.weight, cost);
    for (const auto& cell : simplex.solve()) {
        result.plan.src.push_back(static_cast<std::size_t>(cell.r));
        result.plan.dst.push_back(static_cast<std::size_t>(cell.c));
        result.plan.mass.push_back(cell.flow);
    }
    return finish_result(std::move(result), cost, b.size(), cfg.p);
}

TransportResult wasserstein_exact(const PhaseEnsemble& a, const PhaseEnsemble& b,
                                  const PhaseMetricConfig& cfg, std::size_t size_cap) {
    if (a.dim != b.dim) throw std::invalid_argument("wasserstein_exact: dimension mismatch");
    if (cfg.p != 1 && cfg.p != 2) throw std::domain_error("wasserstein_exact: p must be 1 or 2");
    if (a.size() + b.size() > size_cap)
        throw CapacityError("wasserstein_exact: ensembles exceed the exact-solver cap; "
                            "use wasserstein_entropic");

    const std::vector<double> cost = cost_matrix(a, b, cfg.p);
    TransportResult result;

    if (a.size() == b.size() && equal_weights(a) && equal_weights(b)) {
        const int n = static_cast<int>(a.size());
        const std::vector<int> rowsol = solve_assignment(cost, n);
        result.plan.src.resize(a.size());
        result.plan.dst.resize(a.size());
        result.plan.mass.assign(a.size(), 1.0 / static_cast<double>(n));
        for (int i = 0; i < n; ++i) {
            result.plan.src[i] = static_cast<std::size_t>(i);
            result.plan.dst[i] = static_cast<std::size_t>(rowsol[i]);
        }
    } else {
        TransportSimplex simplex(a.weight, b.weight, cost);
        const std::vector<SimplexCell> plan = simplex.solve();
        for (const auto& cell : plan) {
            result.plan.src.push_back(static_cast<std::size_t>(cell.r));
            result.plan.dst.push_back(static_cast<std::size_t>(cell.c));
            result.plan.mass.push_back(cell.flow);
        }
    }
    return finish_result(std::move(result), cost, b.size(), cfg.p);
}

namespace {

double logsumexp(const std::vector<double>& terms) {
    double mx = -kInf;
    for (double t : terms) mx = std::max(mx, t);
    if (mx == -kInf) return -kInf;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    return mx + std::log(s);
}

}  // namespace

EntropicResult wasserstein_entropic(const PhaseEnsemble& a, const PhaseEnsemble& b,
                                    const PhaseMetricConfig& cfg, double epsilon, int max_iters,
                                    double marginal_tol) {
    if (a.dim != b.dim) throw std::invalid_argument("wasserstein_entropic: dimension mismatch");
    if (!(epsilon > 0.0)) throw std::domain_error("wasserstein_entropic: epsilon > 0 required");
    const std::size_t n = a.size(), m = b.size();
    const std::vector<double> cost = cost_matrix(a, b, cfg.p);

    std::vector<double> f(n, 0.0), g(m, 0.0), loga(n), logb(m);
    for (std::size_t i = 0; i < n; ++i) loga[i] = std::log(a.weight[i]);
    for (std::size_t j = 0; j < m; ++j) logb[j] = std::log(b.weight[j]);

    EntropicResult out;
    out.epsilon = epsilon;
    out.converged = false;

    std::vector<double> buf(std::max(n, m));
    int it = 0;
    for (; it < max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            buf.resize(m);
            for (std::size_t j = 0; j < m; ++j) buf[j] = (g[j] - cost[i * m + j]) / epsilon;
            f[i] = epsilon * (loga[i] - logsumexp(buf));
        }
        for (std::size_t j = 0; j < m; ++j) {
            buf.resize(n);
            for (std::size_t i = 0; i < n; ++i) buf[i] = (f[i] - cost[i * m + j]) / epsilon;
            g[j] = epsilon * (logb[j] - logsumexp(buf));
        }
        // Column marginals are exact after the g-update; check rows.
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double rs = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                rs += std::exp((f[i] + g[j] - cost[i * m + j]) / epsilon);
            err += std::abs(rs - a.weight[i]);
        }
        if (err < marginal_tol) {
            out.converged = true;
            ++it;
            break;
        }
    }
    out.iterations = it;

    // Round the plan onto the transport polytope so the reported cost is a
    // genuine upper bound for the exact optimum.
    std::vector<double> plan(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            plan[i * m + j] = std::exp((f[i] + g[j] - cost[i * m + j]) / epsilon);
    for (std::size_t i = 0; i < n; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < m; ++j) rs += plan[i * m + j];
        const double scale = (rs > a.weight[i]) ? a.weight[i] / rs : 1.0;
        for (std::size_t j = 0; j < m; ++j) plan[i * m + j] *= scale;
    }
    std::vector<double> colsum(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) colsum[j] += plan[i * m + j];
    for (std::size_t j = 0; j < m; ++j) {
        const double scale = (colsum[j] > b.weight[j]) ? b.weight[j] / colsum[j] : 1.0;
        if (scale < 1.0)
            for (std::size_t i = 0; i < n; ++i) plan[i * m + j] *= scale;
    }
    std::vector<double> rowdef(n, 0.0), coldef(m, 0.0);
    double defsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < m; ++j) rs += plan[i * m + j];
        rowdef[i] = a.weight[i] - rs;
        defsum += rowdef[i];
    }
    for (std::size_t j = 0; j < m; ++j) {
        double cs = 0.0;
        for (std::size_t i = 0; i < n; ++i) cs += plan[i * m + j];
        coldef[j] = b.weight[j] - cs;
    }
    if (defsum > 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                plan[i * m + j] += rowdef[i] * coldef[j] / defsum;
    }

    const double total = pairwise_sum(std::size_t{0}, n, [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += plan[i * m + j] * cost[i * m + j];
        return s;
    });
    out.estimate = (cfg.p == 1) ? total : std::sqrt(total);
    return out;
}

// ------------------------------------------------------------- functionals

double dobrushin_functional(const Coupling& pi0, const PhaseEnsemble& a, const PhaseEnsemble& b) {
    const int d = a.dim;
    return pairwise_sum(std::size_t{0}, pi0.entries(), [&](std::size_t k) {
        const std::size_t i = pi0.src[k], j = pi0.dst[k];
        double dx2 = 0.0, dv2 = 0.0;
        for (int ax = 0; ax < d; ++ax) {
            const double dd = wrap_half(a.pos[i * d + ax] - b.pos[j * d + ax]);
            dx2 += dd * dd;
            const double dv = a.vel[i * d + ax] - b.vel[j * d + ax];
            dv2 += dv * dv;
        }
        return pi0.mass[k] * (std::sqrt(dx2) + std::sqrt(dv2));
    });
}

QuadraticSplit quadratic_split(const Coupling& pi0, const PhaseEnsemble& a,
                               const PhaseEnsemble& b) {
    const int d = a.dim;
    QuadraticSplit out;
    out.position_sq = pairwise_sum(std::size_t{0}, pi0.entries(), [&](std::size_t k) {
        const std::size_t i = pi0.src[k], j = pi0.dst[k];
        double dx2 = 0.0;
        for (int ax = 0; ax < d; ++ax) {
            const double dd = wrap_half(a.pos[i * d + ax] - b.pos[j * d + ax]);
            dx2 += dd * dd;
        }
        return pi0.mass[k] * dx2;
    });
    out.velocity_sq = pairwise_sum(std::size_t{0}, pi0.entries(), [&](std::size_t k) {
        const std::size_t i = pi0.src[k], j = pi0.dst[k];
        double dv2 = 0.0;
        for (int ax = 0; ax < d; ++ax) {
            const double dv = a.vel[i * d + ax] - b.vel[j * d + ax];
            dv2 += dv * dv;
        }
        return pi0.mass[k] * dv2;
    });
    return out;
}

double loeper_functional(const Coupling& pi0, const PhaseEnsemble& a, const PhaseEnsemble& b,
                         double lambda) {
    if (!(lambda > 0.0)) throw std::domain_error("loeper_functional: lambda > 0 required");
    const QuadraticSplit split = quadratic_split(pi0, a, b);
    return 0.5 * (lambda * split.position_sq + split.velocity_sq);
}

KineticQResult kinetic_q_fixed_point(double a, double b) {
    if (a < 0.0 || b < 0.0) throw std::domain_error("kinetic_q_fixed_point: a, b >= 0 required");
    if (a == 0.0 && b == 0.0)
        throw std::domain_error("kinetic_q_fixed_point: degenerate input a = b = 0 (Q = 0)");

    KineticQResult out;
    if (a < 1e-280) {  // g is (numerically) linear; closed form
        out.q = 0.5 * b;
        out.residual = (out.q > 0.0) ? 0.5 * a * std::abs(std::log(out.q)) : 0.0;
        if (out.q >= std::exp(-1.0)) {
            out.status = FixedPointStatus::OutsideRegime;
        }
        return out;
    }

    // g(Q) = Q + (a/2) log Q - b/2 on (0, 1/e); strictly increasing.
    auto g = [&](double q) { return q + 0.5 * a * std::log(q) - 0.5 * b; };
    const double qmax = std::exp(-1.0) - 1e-12;
    if (g(qmax) <= 0.0) {
        out.status = FixedPointStatus::OutsideRegime;
        out.q = 0.5 * (a + b);  // fixed-point map image at |log Q| = 1
        out.residual = std::abs(g(qmax));
        return out;
    }

    double lo = 1e-300, hi = qmax;
    double mid = hi;
    for (int iter = 0; iter < 2200; ++iter) {
        mid = (hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        const double val = g(mid);
        if (std::abs(val) < 1e-13) break;
        (val < 0.0 ? lo : hi) = mid;
    }
    for (int iter = 0; iter < 8; ++iter) {  // Newton polish
        const double val = g(mid);
        const double deriv = 1.0 + 0.5 * a / mid;
        const double next = mid - val / deriv;
        if (next > 0.0 && next < std::exp(-1.0)) mid = next;
        if (std::abs(g(mid)) < 1e-14) break;
    }
    out.q = mid;
    out.residual = std::abs(g(mid));
    return out;
}

double renormalized_functional(const Coupling& pi0, const PhaseEnsemble& a,
                               const PhaseEnsemble& b, double omega, double t) {
    const int d = a.dim;
    return pairwise_sum(std::size_t{0}, pi0.entries(), [&](std::size_t k) {
        const std::size_t i = pi0.src[k], j = pi0.dst[k];
        const Vec3 ra = renormalized_position(omega, t, a.position(i), a.velocity(i), d);
        const Vec3 rb = renormalized_position(omega, t, b.position(j), b.velocity(j), d);
        double dx2 = 0.0, dv2 = 0.0;
        for (int ax = 0; ax < d; ++ax) {
            const double dd = wrap_half(ra[ax] - rb[ax]);
            dx2 += dd * dd;
            const double dv = a.vel[i * d + ax] - b.vel[j * d + ax];
            dv2 += dv * dv;
        }
        return pi0.mass[k] * (std::sqrt(dx2) + std::sqrt(dv2));
    });
}

}  // namespace vlab
