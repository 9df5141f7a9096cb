#include "rebound/lppl.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rebound/errors.hpp"

namespace rebound {

double hazard_positivity(const LpplParams& p) {
    return -p.B * p.m - std::abs(p.C) * std::sqrt(p.m * p.m + p.omega * p.omega);
}

std::string to_string(BubbleClass c) {
    switch (c) {
        case BubbleClass::PositiveBubble: return "positive";
        case BubbleClass::NegativeBubble: return "negative";
        default: return "neither";
    }
}

double evaluate_lppl(const LpplParams& p, double t) {
    if (!(t < p.tc))
        throw ModelDomainError("evaluate_lppl: t >= tc (model undefined at/after tc)");
    return evaluate_lppl_basic(p.A, p.B, p.C, p.m, p.omega, p.phi, p.tc, t);
}

double hazard_rate(double Bp, double Cp, double m, double omega, double phip, double tc,
                   double t) {
    if (!(t < tc))
        throw ModelDomainError("hazard_rate: t >= tc");
    const double u = tc - t;
    const double f = std::pow(u, m - 1.0);
    return Bp * f + Cp * f * std::cos(omega * std::log(u) - phip);
}

SlavedFit slave_linear_params(const Eigen::Ref<const Eigen::VectorXd>& times,
                              const Eigen::Ref<const Eigen::VectorXd>& log_prices, double m,
                              double omega, double phi, double tc) {
    const Eigen::Index n = times.size();
    if (n == 0)
        throw InsufficientDataError("slave_linear_params: empty window");
    if (times.size() != log_prices.size())
        throw ValidationError("slave_linear_params: time/value length mismatch");

    Eigen::VectorXd f(n), g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = tc - times[i];
        if (u < 0.0)
            throw ModelDomainError("slave_linear_params: tc precedes observation at index " +
                                   std::to_string(i));
        if (u == 0.0) {
            // limit of u^m and u^m cos(omega ln u - phi) as u -> 0+ for m > 0
            f[i] = 0.0;
            g[i] = 0.0;
        } else {
            f[i] = std::pow(u, m);
            g[i] = f[i] * std::cos(omega * std::log(u) - phi);
        }
    }

    Eigen::Matrix3d normal;
    const double sf = f.sum(), sg = g.sum();
    normal << static_cast<double>(n), sf, sg,
              sf, f.dot(f), f.dot(g),
              sg, f.dot(g), g.dot(g);
    Eigen::Vector3d rhs(log_prices.sum(), f.dot(log_prices), g.dot(log_prices));

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal);
    const Eigen::Vector3d ev = eig.eigenvalues();
    const double lmax = ev.maxCoeff();
    const double lmin = ev.minCoeff();
    if (!(lmin > 0.0) || lmax > 1e12 * lmin)
        throw DegenerateBasisError("slave_linear_params: near-singular normal matrix");

    const Eigen::Vector3d coeff =
        eig.eigenvectors() * (eig.eigenvectors().transpose() * rhs).cwiseQuotient(ev);

    SlavedFit out;
    out.A = coeff[0];
    out.B = coeff[1];
    out.C = coeff[2];
    const Eigen::VectorXd resid =
        log_prices - (Eigen::VectorXd::Constant(n, out.A) + out.B * f + out.C * g);
    out.sse = resid.squaredNorm();
    out.residual_q = std::sqrt(out.sse / static_cast<double>(n));
    return out;
}

SlavedFit slave_linear_params(const PriceSeries& log_window, double m, double omega, double phi,
                              double tc) {
    return slave_linear_params(log_window.times(), log_window.values, m, omega, phi, tc);
}

BubbleClass classify_fit(const LpplFit& fit) {
    const double B = fit.params.B;
    const double m = fit.params.m;
    if (B > 0.0 && fit.b < 0.0) return BubbleClass::NegativeBubble;
    if (B < 0.0 && fit.b >= 0.0 && m > 0.0 && m < 1.0) return BubbleClass::PositiveBubble;
    return BubbleClass::Neither;
}

} // namespace rebound
