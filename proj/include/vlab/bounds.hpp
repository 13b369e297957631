// Closed-form evaluators for the stability bounds and admissibility
// conditions, plus a Gronwall ODE cross-checker. Pure functions over
// immutable series; dimensional constants are caller inputs, never invented.
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace vlab {

// e^{(1+2H)t} W1_0
double dobrushin_bound(double H, double t, double w1_0);

// 2(1-cos(wt))/w^2 with a Taylor branch below |wt| = 1e-4 (limit t^2).
double cos_drift_term(double omega, double t);
// (t - sin(wt)/w)/w^2 with a Taylor branch (limit t^3/6).
double sin_drift_term(double omega, double t);

// d=2: sqrt(2(1-cos wt)/w^2) + 1; d=3: sqrt(2(1-cos wt)/w^2 + t^2) + 1.
double theorem2_gain(int dim, double omega, double t);

// Exponent of the magnetized branch: 4H(2 sin_drift_term + t) in d=2 and
// 4H(2 sin_drift_term + t^3/3 + t) in d=3.
double theorem2_exponent(int dim, double H, double omega, double t);

// min(gain * e^{exponent}, e^{(1+2H)t}) * W1_0
double theorem2_bound(int dim, double H, double omega, double t, double w1_0);

// Running trapezoid integral on a shared time grid; out[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& times,
                                         const std::vector<double>& values);

// J(s) = A(s) + Bhol (e^{s Bsup} + int_0^s (1 + rho2sup(u)) e^{(s-u) Bsup} du)
// evaluated at every sample time; the inner integral is the trapezoid rule on
// the same grid (computed by an exact exponential recurrence).
std::vector<double> j_series(const std::vector<double>& times, const std::vector<double>& a_series,
                             const std::vector<double>& rho2sup_series, double bsup, double bhol);

struct StatementCheck {
    bool admissible = false;
    bool smallness_ok = false;   // initial-distance smallness condition
    bool condition_ok = false;   // the log/integral condition on [0,T]
    bool inner_product_ok = true;  // statement 2 only: W2^2 |log(W2^2/2)| < 1
    // rhs as a function of the running integral int_0^t J.
    std::function<double(double)> rhs;
};

// Theorem 1, statement 1. Admissible iff W2sq_0 < 1/e^2 and
// |log W2sq_0| >= exp(c_d * Jint_T). rhs(I) = exp(log(W2sq_0) e^{-c_d I}).
StatementCheck statement1_check(double w2sq_0, double jint_T, double c_d);

// Theorem 1, statement 2. S0 = sqrt(|log(W2sq_0 |log(W2sq_0/2)|)|);
// admissible iff W2sq_0 < c0 and S0 >= C_d Jint_T + 1. rhs(I) =
// 2 exp(-(S0 - C_d I)^2). Inputs where the inner product reaches 1 are
// reported through inner_product_ok and marked inadmissible.
StatementCheck statement2_check(double w2sq_0, double jint_T, double C_d, double c0);

enum class GronwallKind { LogLinear, SqrtLog };

struct GronwallResult {
    std::vector<double> q;   // Q at every sample time
    bool regime_exit = false;
    std::size_t exit_index = 0;  // first index with Q >= 1/e when exited
};

// Integrates Q' = rate * J(t) * Q * |log Q| (LogLinear) or
// Q' = rate * J(t) * Q * sqrt(|log Q|) (SqrtLog) with classical RK4 on the
// sample grid, J linearly interpolated. Q0 must lie in (0, 1/e).
GronwallResult gronwall_ode_solve(GronwallKind kind, const std::vector<double>& times,
                                  const std::vector<double>& j, double q0, double rate = 1.0);

struct IntegrabilityCheck {
    bool pass = false;
    double integral = 0.0;
};

// (condi:A)-style check: trapezoid integral of the series, failing on any
// non-finite sample.
IntegrabilityCheck efield_condition_check(const std::vector<double>& times,
                                          const std::vector<double>& a_series);

// ------------------------------------------------------------- reporting

struct BoundSample {
    double t = 0.0;
    double measured = 0.0;
    double bound = 0.0;
    double slack = 0.0;  // bound - measured
    bool pass = true;    // measured <= bound * (1 + tolerance)
};

struct BoundReport {
    std::string label;
    double tolerance = 0.0;
    std::vector<std::pair<std::string, double>> inputs;  // recorded BoundInputs
    std::vector<BoundSample> samples;
    bool all_pass() const;
};

BoundReport make_bound_report(std::string label, const std::vector<double>& times,
                              const std::vector<double>& measured,
                              const std::vector<double>& bound, double tolerance);

void save_bound_report_csv(const BoundReport& report, const std::string& path);

}  // namespace vlab
