#pragma once

#include <Eigen/Core>
#include <string>

#include "rebound/windows.hpp"

namespace rebound {

// Parameters of the log-periodic power law
//
//   ln p(t) = A + B (tc - t)^m + C (tc - t)^m cos(omega ln(tc - t) - phi)
//
// with tc expressed in days since 1970-01-01, the same units as observation
// times.
struct LpplParams {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double m = 0.5;
    double omega = 6.0;
    double phi = 1.0;
    double tc = 0.0;
};

// Sign of the hazard-rate amplitude: b = -B m - |C| sqrt(m^2 + omega^2).
// b >= 0 together with B < 0 marks a positive bubble; B > 0 with b < 0 marks
// a negative bubble.
double hazard_positivity(const LpplParams& p);

enum class BubbleClass { PositiveBubble, NegativeBubble, Neither };

std::string to_string(BubbleClass c);

// Model value at time t (days). Requires t < tc; throws ModelDomainError
// otherwise. Templated on scalar so tests can instantiate alternate
// precisions.
template <typename Scalar>
Scalar evaluate_lppl_basic(Scalar A, Scalar B, Scalar C, Scalar m, Scalar omega, Scalar phi,
                           Scalar tc, Scalar t);

double evaluate_lppl(const LpplParams& p, double t);

// Hazard rate h(t) = B'(tc-t)^(m-1) + C'(tc-t)^(m-1) cos(omega ln(tc-t) - phi').
// Diagnostic only; the calibration never touches it.
double hazard_rate(double Bp, double Cp, double m, double omega, double phip, double tc,
                   double t);

// Result of slaving the linear parameters (A, B, C) to a nonlinear 4-tuple.
struct SlavedFit {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double sse = 0.0;        // sum of squared log-price residuals
    double residual_q = 0.0; // root-mean-square residual
};

// Exact least squares of log-prices on the basis {1, f, f cos(...)} with
// f = (tc - t)^m, solved through the 3x3 normal equations. The regressors'
// u -> 0+ limit (zero) is used where tc coincides with an observation time.
// Throws DegenerateBasisError when the normal matrix condition number
// exceeds 1e12 (m -> 0 collapses f onto the constant column).
SlavedFit slave_linear_params(const Eigen::Ref<const Eigen::VectorXd>& times,
                              const Eigen::Ref<const Eigen::VectorXd>& log_prices, double m,
                              double omega, double phi, double tc);

SlavedFit slave_linear_params(const PriceSeries& log_window, double m, double omega, double phi,
                              double tc);

// One window's calibrated parameter set plus fit diagnostics.
struct LpplFit {
    LpplParams params;
    WindowSpec window;
    double residual_q = 0.0;
    double b = 0.0;
    int n_obs = 0;

    int length() const { return window.length(); }
};

// NegativeBubble iff B > 0 and b < 0; PositiveBubble iff B < 0, b >= 0 and
// 0 < m < 1; Neither otherwise.
BubbleClass classify_fit(const LpplFit& fit);

// ---- template definition ----

template <typename Scalar>
Scalar evaluate_lppl_basic(Scalar A, Scalar B, Scalar C, Scalar m, Scalar omega, Scalar phi,
                           Scalar tc, Scalar t) {
    using std::cos;
    using std::log;
    using std::pow;
    const Scalar u = tc - t;
    const Scalar f = pow(u, m);
    return A + B * f + C * f * cos(omega * log(u) - phi);
}

} // namespace rebound
