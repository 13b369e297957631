#include "vlab/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <limits>

namespace vlab {

namespace {
constexpr double kSmallAngle = 1e-4;
constexpr double kInvE = 0.36787944117144233;  // 1/e

void require_dim2or3(int d) {
    if (d != 2 && d != 3) throw std::domain_error("dimension must be 2 or 3");
}
}  // namespace

double dobrushin_bound(double H, double t, double w1_0) {
    if (H < 0.0 || t < 0.0 || w1_0 < 0.0)
        throw std::domain_error("dobrushin_bound: nonnegative inputs required");
    return std::exp((1.0 + 2.0 * H) * t) * w1_0;
}

double cos_drift_term(double omega, double t) {
    const double u = omega * t;
    if (std::abs(u) < kSmallAngle) {
        const double u2 = u * u;
        return t * t * (1.0 - u2 / 12.0 + u2 * u2 / 360.0);
    }
    // 2(1 - cos u) = 4 sin^2(u/2), stable near full periods and small u
    const double s = std::sin(0.5 * u);
    return 4.0 * s * s / (omega * omega);
}

double sin_drift_term(double omega, double t) {
    const double u = omega * t;
    // u - sin(u) cancels badly below ~1e-2; the 3-term series is exact to
    // ~1e-16 relative there
    if (std::abs(u) < 1e-2) {
        const double u2 = u * u;
        return t * t * t / 6.0 * (1.0 - u2 / 20.0 + u2 * u2 / 840.0);
    }
    return (t - std::sin(u) / omega) / (omega * omega);
}

double theorem2_gain(int dim, double omega, double t) {
    require_dim2or3(dim);
    if (omega < 0.0 || t < 0.0) throw std::domain_error("theorem2_gain: omega, t >= 0 required");
    const double core = cos_drift_term(omega, t);
    return (dim == 2) ? std::sqrt(core) + 1.0 : std::sqrt(core + t * t) + 1.0;
}

double theorem2_exponent(int dim, double H, double omega, double t) {
    require_dim2or3(dim);
    const double base = 2.0 * sin_drift_term(omega, t) + t;
    return (dim == 2) ? 4.0 * H * base : 4.0 * H * (base + t * t * t / 3.0);
}

double theorem2_bound(int dim, double H, double omega, double t, double w1_0) {
    if (H < 0.0 || omega < 0.0 || t < 0.0 || w1_0 < 0.0)
        throw std::domain_error("theorem2_bound: nonnegative inputs required");
    const double magnetized =
        theorem2_gain(dim, omega, t) * std::exp(theorem2_exponent(dim, H, omega, t));
    const double dobrushin = std::exp((1.0 + 2.0 * H) * t);
    return std::min(magnetized, dobrushin) * w1_0;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& times,
                                         const std::vector<double>& values) {
    if (times.size() != values.size())
        throw std::invalid_argument("cumulative_trapezoid: grid mismatch");
    std::vector<double> out(times.size(), 0.0);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double h = times[k] - times[k - 1];
        if (h <= 0.0) throw std::invalid_argument("cumulative_trapezoid: times must increase");
        out[k] = out[k - 1] + 0.5 * h * (values[k - 1] + values[k]);
    }
    return out;
}

std::vector<double> j_series(const std::vector<double>& times, const std::vector<double>& a_series,
                             const std::vector<double>& rho2sup_series, double bsup, double bhol) {
    const std::size_t n = times.size();
    if (a_series.size() != n || rho2sup_series.size() != n)
        throw std::invalid_argument("j_series: series must share the time grid");
    std::vector<double> out(n);
    // inner(s) = int_0^s (1 + rho2sup(u)) e^{(s-u) bsup} du, advanced by the
    // trapezoid rule through the exact exponential recurrence.
    double inner = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            const double h = times[k] - times[k - 1];
            if (h <= 0.0) throw std::invalid_argument("j_series: times must increase");
            const double grow = std::exp(h * bsup);
            inner = inner * grow +
                    0.5 * h * ((1.0 + rho2sup_series[k - 1]) * grow + (1.0 + rho2sup_series[k]));
        }
        out[k] = a_series[k] + bhol * (std::exp(times[k] * bsup) + inner);
    }
    return out;
}

StatementCheck statement1_check(double w2sq_0, double jint_T, double c_d) {
    if (!(w2sq_0 > 0.0)) throw std::domain_error("statement1_check: W2^2(0) > 0 required");
    StatementCheck out;
    out.smallness_ok = w2sq_0 < std::exp(-2.0);
    out.condition_ok = std::abs(std::log(w2sq_0)) >= std::exp(c_d * jint_T);
    out.admissible = out.smallness_ok && out.condition_ok;
    const double log_w0 = std::log(w2sq_0);
    out.rhs = [log_w0, c_d](double jint_t) {
        return std::exp(log_w0 * std::exp(-c_d * jint_t));
    };
    return out;
}

StatementCheck statement2_check(double w2sq_0, double jint_T, double C_d, double c0) {
    if (!(w2sq_0 > 0.0)) throw std::domain_error("statement2_check: W2^2(0) > 0 required");
    StatementCheck out;
    const double inner = w2sq_0 * std::abs(std::log(0.5 * w2sq_0));
    out.inner_product_ok = inner < 1.0;
    const double s0 = std::sqrt(std::abs(std::log(inner)));
    out.smallness_ok = w2sq_0 < c0;
    out.condition_ok = s0 >= C_d * jint_T + 1.0;
    out.admissible = out.smallness_ok && out.condition_ok && out.inner_product_ok;
    out.rhs = [s0, C_d](double jint_t) {
        const double gap = s0 - C_d * jint_t;
        return 2.0 * std::exp(-gap * gap);
    };
    return out;
}

GronwallResult gronwall_ode_solve(GronwallKind kind, const std::vector<double>& times,
                                  const std::vector<double>& j, double q0, double rate) {
    if (times.size() != j.size()) throw std::invalid_argument("gronwall_ode_solve: grid mismatch");
    if (times.empty()) throw std::invalid_argument("gronwall_ode_solve: empty grid");
    if (!(q0 > 0.0 && q0 < kInvE))
        throw std::domain_error("gronwall_ode_solve: Q0 in (0, 1/e) required");

    const auto phi = [kind](double q) {
        const double l = std::abs(std::log(q));
        return (kind == GronwallKind::LogLinear) ? q * l : q * std::sqrt(l);
    };

    GronwallResult out;
    out.q.assign(times.size(), q0);
    double q = q0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double h = times[k] - times[k - 1];
        const double j0 = j[k - 1];
        const double j1 = j[k];
        const double jm = 0.5 * (j0 + j1);  // linear interpolant at midpoint
        const double k1 = rate * j0 * phi(q);
        const double k2 = rate * jm * phi(q + 0.5 * h * k1);
        const double k3 = rate * jm * phi(q + 0.5 * h * k2);
        const double k4 = rate * j1 * phi(q + h * k3);
        q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!(q < kInvE) || !std::isfinite(q)) {
            out.regime_exit = true;
            out.exit_index = k;
            for (std::size_t r = k; r < times.size(); ++r) out.q[r] = kInvE;
            return out;
        }
        out.q[k] = q;
    }
    return out;
}

IntegrabilityCheck efield_condition_check(const std::vector<double>& times,
                                          const std::vector<double>& a_series) {
    if (times.size() != a_series.size())
        throw std::invalid_argument("efield_condition_check: grid mismatch");
    IntegrabilityCheck out;
    for (double v : a_series) {
        if (!std::isfinite(v)) {
            out.pass = false;
            out.integral = std::numeric_limits<double>::infinity();
            return out;
        }
    }
    double acc = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k)
        acc += 0.5 * (times[k] - times[k - 1]) * (a_series[k - 1] + a_series[k]);
    out.integral = acc;
    out.pass = std::isfinite(acc);
    return out;
}

bool BoundReport::all_pass() const {
    for (const auto& s : samples)
        if (!s.pass) return false;
    return true;
}

BoundReport make_bound_report(std::string label, const std::vector<double>& times,
                              const std::vector<double>& measured,
                              const std::vector<double>& bound, double tolerance) {
    if (times.size() != measured.size() || times.size() != bound.size())
        throw std::invalid_argument("make_bound_report: series must share the time grid");
    BoundReport rep;
    rep.label = std::move(label);
    rep.tolerance = tolerance;
    rep.samples.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        BoundSample& s = rep.samples[k];
        s.t = times[k];
        s.measured = measured[k];
        s.bound = bound[k];
        s.slack = bound[k] - measured[k];
        s.pass = measured[k] <= bound[k] * (1.0 + tolerance);
    }
    return rep;
}

void save_bound_report_csv(const BoundReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# bound=" << report.label << " tolerance=" << report.tolerance << "\n";
    char buf[32];
    for (const auto& kv : report.inputs) {
        std::snprintf(buf, sizeof buf, "%.17g", kv.second);
        out << "# " << kv.first << "=" << buf << "\n";
    }
    out << "t,measured,bound,slack,verdict\n";
    auto emit = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << buf;
    };
    for (const auto& s : report.samples) {
        emit(s.t);
        out << ',';
        emit(s.measured);
        out << ',';
        emit(s.bound);
        out << ',';
        emit(s.slack);
        out << ',' << (s.pass ? "pass" : "fail") << "\n";
    }
}

}  // namespace vlab
