#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rebound/lppl.hpp"

namespace rebound {

// Nonlinear parameter vector ordered (m, omega, phi, tc).
using NonlinearParams = std::array<double, 4>;

// Search box for the four nonlinear parameters. tc spans
// [t2, t2 + tc_range_factor * (t2 - t1)] in day units.
struct SearchBounds {
    NonlinearParams lo{0.001, 0.01, 0.001, 0.0};
    NonlinearParams hi{0.999, 40.0, 2.0 * 3.14159265358979323846, 0.0};

    static SearchBounds for_window(const WindowSpec& w, double tc_range_factor = 0.375);

    double range(int dim) const { return hi[dim] - lo[dim]; }
    bool contains(const NonlinearParams& x) const;
    NonlinearParams clamp(const NonlinearParams& x) const;
};

struct OptimizerConfig {
    int tabu_iterations = 60;
    int tabu_neighbors = 12;
    int tabu_list_size = 64;
    int lm_max_iterations = 120;
    double lm_tolerance = 1e-9;
    std::uint64_t seed = 12345;
    int restarts = 5;

    void validate() const;
};

// Deterministic seed mixer (splitmix64 over a combined word); used to derive
// per-restart, per-window and per-draw streams from one master seed so that
// parallel execution reproduces the single-threaded results.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Sum of squared log-price residuals against the LPPL with slaved (A, B, C).
// Propagates DegenerateBasisError from the slaving step.
double objective(const Eigen::Ref<const Eigen::VectorXd>& times,
                 const Eigen::Ref<const Eigen::VectorXd>& log_prices,
                 const NonlinearParams& x);
double objective(const PriceSeries& log_window, const NonlinearParams& x);

// Tabu search over the nonlinear box. Gaussian neighborhood with
// per-dimension scale 5% of the bound range; tabu list over a 32^3
// discretization of (m, omega, tc), phi free. Returns the cfg.restarts best
// candidates found, best first; deterministic given cfg.seed.
std::vector<NonlinearParams> tabu_search(const Eigen::Ref<const Eigen::VectorXd>& times,
                                         const Eigen::Ref<const Eigen::VectorXd>& log_prices,
                                         const SearchBounds& bounds, const OptimizerConfig& cfg);

struct LmResult {
    NonlinearParams x;
    double objective = 0.0;
    int iterations = 0;
};

// Levenberg-Marquardt on the nonlinears with (A, B, C) re-slaved at every
// evaluation (variable projection). Forward-difference Jacobian with step
// 1e-6 of the bound range per dimension; steps are clamped to the bounds.
// Never returns a worse objective than the initial point.
LmResult lm_refine(const Eigen::Ref<const Eigen::VectorXd>& times,
                   const Eigen::Ref<const Eigen::VectorXd>& log_prices, const NonlinearParams& init,
                   const SearchBounds& bounds, const OptimizerConfig& cfg);

// Full single-window calibration: tabu candidates, LM refinement of each,
// best refit returned with slaved linears, residual_q and b populated.
// Throws InsufficientDataError (< 8 observations) or FitFailureError (every
// candidate failed numerically).
LpplFit fit_window(const PriceSeries& log_window, const WindowSpec& w, const SearchBounds& bounds,
                   const OptimizerConfig& cfg);
LpplFit fit_window(const PriceSeries& log_window, const WindowSpec& w, const OptimizerConfig& cfg,
                   double tc_range_factor = 0.375);

} // namespace rebound
