#include "rebound/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <unordered_set>

#include "rebound/errors.hpp"

namespace rebound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Objective wrapper treating degenerate bases and domain violations as +inf
// so the heuristic can roam freely.
double safe_objective(const Eigen::Ref<const Eigen::VectorXd>& times,
                      const Eigen::Ref<const Eigen::VectorXd>& logp, const NonlinearParams& x) {
    try {
        const double v = objective(times, logp, x);
        return std::isfinite(v) ? v : kInf;
    } catch (const DegenerateBasisError&) {
        return kInf;
    } catch (const ModelDomainError&) {
        return kInf;
    }
}

// Best phase for fixed (m, omega, tc): writing C u^m cos(w ln u - phi) as
// C2 u^m cos(w ln u) + C3 u^m sin(w ln u) makes the model linear in
// (A, B, C2, C3); the least-squares phase is atan2(C3, C2). Used to hop off
// the phi ridge; the public 3-regressor slaving contract is unchanged.
std::optional<double> optimal_phase(const Eigen::Ref<const Eigen::VectorXd>& times,
                                    const Eigen::Ref<const Eigen::VectorXd>& logp, double m,
                                    double omega, double tc) {
    const Eigen::Index n = times.size();
    Eigen::MatrixXd design(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = tc - times[i];
        if (u < 0.0) return std::nullopt;
        if (u == 0.0) {
            design.row(i) << 1.0, 0.0, 0.0, 0.0;
            continue;
        }
        const double f = std::pow(u, m);
        const double theta = omega * std::log(u);
        design.row(i) << 1.0, f, f * std::cos(theta), f * std::sin(theta);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 4) return std::nullopt;
    const Eigen::Vector4d coeff = qr.solve(logp);
    if (coeff[2] == 0.0 && coeff[3] == 0.0) return std::nullopt;
    double phi = std::atan2(coeff[3], coeff[2]);
    if (phi <= 0.0) phi += 2.0 * 3.14159265358979323846;
    return phi;
}

// Probe candidates along the known ripple direction of the projected
// objective: small tc offsets, each with its phase re-solved in closed form.
std::vector<NonlinearParams> ripple_hops(const Eigen::Ref<const Eigen::VectorXd>& times,
                                         const Eigen::Ref<const Eigen::VectorXd>& logp,
                                         const SearchBounds& bounds, const NonlinearParams& x) {
    static constexpr double fracs[] = {0.0,   -0.005, 0.005, -0.01, 0.01,  -0.02, 0.02,
                                       -0.04, 0.04,   -0.08, 0.08,  -0.15, 0.15};
    std::vector<NonlinearParams> out;
    out.reserve(std::size(fracs));
    for (double frac : fracs) {
        const double tc =
            std::clamp(x[3] + frac * bounds.range(3), bounds.lo[3], bounds.hi[3]);
        const auto phi = optimal_phase(times, logp, x[0], x[1], tc);
        if (!phi) continue;
        out.push_back({x[0], x[1], std::clamp(*phi, bounds.lo[2], bounds.hi[2]), tc});
    }
    return out;
}

// Deterministic local refinement with the phase re-solved per probe: 1-D
// sweeps on m and a joint (omega, tc) sweep. The model's ripple modes couple
// omega and tc, so single-coordinate moves stall between modes; the joint
// sweep crosses them.
template <typename Objective>
std::pair<double, NonlinearParams> coordinate_polish(
    const Eigen::Ref<const Eigen::VectorXd>& times,
    const Eigen::Ref<const Eigen::VectorXd>& logp, const SearchBounds& bounds,
    std::pair<double, NonlinearParams> best, const Objective& score, int rounds) {
    static constexpr double fracs[] = {0.0,   -0.002, 0.002, -0.005, 0.005, -0.01, 0.01,
                                       -0.02, 0.02,   -0.04, 0.04,   -0.08, 0.08};
    auto consider = [&](NonlinearParams cand) {
        const auto phi = optimal_phase(times, logp, cand[0], cand[1], cand[3]);
        if (phi) cand[2] = std::clamp(*phi, bounds.lo[2], bounds.hi[2]);
        const std::pair<double, NonlinearParams> scored{score(cand), cand};
        if (scored.first < best.first ||
            (scored.first == best.first && scored.second < best.second))
            best = scored;
    };
    for (int round = 0; round < rounds; ++round) {
        std::pair<double, NonlinearParams> anchor = best;
        for (double fm : fracs) {
            NonlinearParams cand = anchor.second;
            cand[0] = std::clamp(anchor.second[0] + fm * bounds.range(0), bounds.lo[0],
                                 bounds.hi[0]);
            consider(cand);
        }
        anchor = best;
        for (double fw : fracs)
            for (double ft : fracs) {
                NonlinearParams cand = anchor.second;
                cand[1] = std::clamp(anchor.second[1] + fw * bounds.range(1), bounds.lo[1],
                                     bounds.hi[1]);
                cand[3] = std::clamp(anchor.second[3] + ft * bounds.range(3), bounds.lo[3],
                                     bounds.hi[3]);
                consider(cand);
            }
        if (best.second == anchor.second) break; // no sweep improved anything
    }
    return best;
}

std::uint64_t tabu_cell(const SearchBounds& b, const NonlinearParams& x) {
    // 32 cells per discretized dimension (m, omega, tc); phi is not keyed.
    auto cell = [&](int dim) -> std::uint64_t {
        const double range = b.range(dim);
        if (range <= 0.0) return 0;
        const double f = (x[dim] - b.lo[dim]) / range;
        const auto i = static_cast<long>(f * 32.0);
        return static_cast<std::uint64_t>(std::clamp(i, 0L, 31L));
    };
    return (cell(0) * 32 + cell(1)) * 32 + cell(3);
}

bool less_candidate(const std::pair<double, NonlinearParams>& a,
                    const std::pair<double, NonlinearParams>& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
}

} // namespace

SearchBounds SearchBounds::for_window(const WindowSpec& w, double tc_range_factor) {
    SearchBounds b;
    b.lo[3] = static_cast<double>(w.t2);
    b.hi[3] = static_cast<double>(w.t2) + tc_range_factor * w.length();
    return b;
}

bool SearchBounds::contains(const NonlinearParams& x) const {
    for (int d = 0; d < 4; ++d)
        if (x[d] < lo[d] || x[d] > hi[d]) return false;
    return true;
}

NonlinearParams SearchBounds::clamp(const NonlinearParams& x) const {
    NonlinearParams out;
    for (int d = 0; d < 4; ++d) out[d] = std::clamp(x[d], lo[d], hi[d]);
    return out;
}

void OptimizerConfig::validate() const {
    if (tabu_iterations < 1 || tabu_neighbors < 1 || tabu_list_size < 1 || lm_max_iterations < 1 ||
        restarts < 1)
        throw ValidationError("optimizer config: all counts must be >= 1");
    if (!(lm_tolerance > 0.0))
        throw ValidationError("optimizer config: lm_tolerance must be positive");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double objective(const Eigen::Ref<const Eigen::VectorXd>& times,
                 const Eigen::Ref<const Eigen::VectorXd>& log_prices, const NonlinearParams& x) {
    return slave_linear_params(times, log_prices, x[0], x[1], x[2], x[3]).sse;
}

double objective(const PriceSeries& log_window, const NonlinearParams& x) {
    return objective(log_window.times(), log_window.values, x);
}

std::vector<NonlinearParams> tabu_search(const Eigen::Ref<const Eigen::VectorXd>& times,
                                         const Eigen::Ref<const Eigen::VectorXd>& logp,
                                         const SearchBounds& bounds, const OptimizerConfig& cfg) {
    cfg.validate();
    if (times.size() < 8)
        throw InsufficientDataError("tabu_search: needs >= 8 observations, got " +
                                    std::to_string(times.size()));

    std::array<double, 4> scale;
    for (int d = 0; d < 4; ++d) scale[d] = 0.05 * bounds.range(d);

    std::vector<std::pair<double, NonlinearParams>> winners;
    winners.reserve(cfg.restarts);

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        NonlinearParams current;
        for (int d = 0; d < 4; ++d) current[d] = bounds.lo[d] + uni(rng) * bounds.range(d);
        std::pair<double, NonlinearParams> best{safe_objective(times, logp, current), current};

        std::deque<std::uint64_t> tabu_order;
        std::unordered_set<std::uint64_t> tabu;
        auto push_tabu = [&](std::uint64_t key) {
            if (tabu.count(key)) return;
            tabu.insert(key);
            tabu_order.push_back(key);
            if (static_cast<int>(tabu_order.size()) > cfg.tabu_list_size) {
                tabu.erase(tabu_order.front());
                tabu_order.pop_front();
            }
        };
        push_tabu(tabu_cell(bounds, current));

        for (int iter = 0; iter < cfg.tabu_iterations; ++iter) {
            bool have_move = false;
            std::pair<double, NonlinearParams> move{kInf, current};
            bool have_fallback = false;
            std::pair<double, NonlinearParams> fallback{kInf, current};
            for (int k = 0; k < cfg.tabu_neighbors; ++k) {
                NonlinearParams cand;
                if (uni(rng) < 0.15) {
                    // kick move: teleport one coordinate uniformly, keep the
                    // rest; local Gaussians alone cannot cross the flat
                    // plateau in omega where the objective carries no signal
                    cand = current;
                    const int dk = static_cast<int>(rng() % 4);
                    cand[dk] = bounds.lo[dk] + uni(rng) * bounds.range(dk);
                } else {
                    for (int d = 0; d < 4; ++d) {
                        const double step = scale[d] > 0.0 ? scale[d] * gauss(rng) : 0.0;
                        cand[d] = std::clamp(current[d] + step, bounds.lo[d], bounds.hi[d]);
                    }
                }
                const double obj = safe_objective(times, logp, cand);
                const std::pair<double, NonlinearParams> scored{obj, cand};
                const bool is_tabu = tabu.count(tabu_cell(bounds, cand)) > 0;
                // aspiration: a tabu cell is admissible when it beats the best so far
                if (!is_tabu || scored.first < best.first) {
                    if (!have_move || less_candidate(scored, move)) {
                        move = scored;
                        have_move = true;
                    }
                } else if (!have_fallback || less_candidate(scored, fallback)) {
                    fallback = scored;
                    have_fallback = true;
                }
            }
            if (!have_move) {
                if (!have_fallback) continue;
                move = fallback;
            }
            current = move.second;
            push_tabu(tabu_cell(bounds, current));
            if (less_candidate(move, best)) best = move;
        }

        // intensification: a short small-step local phase, then deterministic
        // coordinate refinement with the phase re-solved in closed form
        const int polish_iters = cfg.tabu_iterations / 2;
        for (int iter = 0; iter < polish_iters; ++iter) {
            for (int k = 0; k < cfg.tabu_neighbors; ++k) {
                NonlinearParams cand;
                for (int d = 0; d < 4; ++d) {
                    const double step = scale[d] > 0.0 ? 0.125 * scale[d] * gauss(rng) : 0.0;
                    cand[d] = std::clamp(best.second[d] + step, bounds.lo[d], bounds.hi[d]);
                }
                const std::pair<double, NonlinearParams> scored{
                    safe_objective(times, logp, cand), cand};
                if (less_candidate(scored, best)) best = scored;
            }
        }
        best = coordinate_polish(
            times, logp, bounds, best,
            [&](const NonlinearParams& c) { return safe_objective(times, logp, c); }, 4);
        winners.emplace_back(best);
    }

    std::sort(winners.begin(), winners.end(), less_candidate);
    std::vector<NonlinearParams> out;
    out.reserve(winners.size());
    for (const auto& w : winners) out.push_back(w.second);
    return out;
}

LmResult lm_refine(const Eigen::Ref<const Eigen::VectorXd>& times,
                   const Eigen::Ref<const Eigen::VectorXd>& logp, const NonlinearParams& init,
                   const SearchBounds& bounds, const OptimizerConfig& cfg) {
    cfg.validate();
    if (!bounds.contains(init))
        throw ValidationError("lm_refine: initial point outside bounds");
    const Eigen::Index n = times.size();

    auto residuals = [&](const NonlinearParams& x, Eigen::VectorXd& r) -> bool {
        try {
            const SlavedFit s = slave_linear_params(times, logp, x[0], x[1], x[2], x[3]);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double u = x[3] - times[i];
                double model = s.A;
                if (u > 0.0) {
                    const double f = std::pow(u, x[0]);
                    model += s.B * f + s.C * f * std::cos(x[1] * std::log(u) - x[2]);
                }
                r[i] = model - logp[i];
            }
            return r.allFinite();
        } catch (const DegenerateBasisError&) {
            return false;
        } catch (const ModelDomainError&) {
            return false;
        }
    };

    NonlinearParams x = init;
    Eigen::VectorXd r(n), r_trial(n), r_step(n);
    if (!residuals(x, r))
        throw NumericFailureError("lm_refine: objective not finite at initial point", init,
                                  kInf);
    double sse = r.squaredNorm();

    std::array<double, 4> fd_step;
    for (int d = 0; d < 4; ++d) {
        fd_step[d] = 1e-6 * bounds.range(d);
        if (fd_step[d] == 0.0) fd_step[d] = 1e-12;
    }

    // Nielsen's gain-ratio damping control
    double lambda = 1e-3;
    double nu = 2.0;
    int iterations = 0;
    int recenter_rounds = 0;
    int stagnant_streak = 0;
    constexpr double sse_floor = 1e-20;

    for (; iterations < cfg.lm_max_iterations; ++iterations) {
        if (sse <= sse_floor) break;

        Eigen::Matrix<double, Eigen::Dynamic, 4> jac(n, 4);
        bool jac_ok = true;
        for (int d = 0; d < 4; ++d) {
            NonlinearParams xs = x;
            double h = fd_step[d];
            if (xs[d] + h > bounds.hi[d]) h = -h; // backward difference at the upper bound
            xs[d] += h;
            if (!residuals(xs, r_step)) {
                jac_ok = false;
                break;
            }
            jac.col(d) = (r_step - r) / h;
        }
        if (!jac_ok)
            throw NumericFailureError("lm_refine: Jacobian evaluation failed", x, sse);

        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Eigen::Vector4d jtr = jac.transpose() * r;

        // hop along the tc ripple (phase re-solved per probe) when progress dies
        auto try_recenter = [&]() -> bool {
            if (recenter_rounds >= 3) return false;
            ++recenter_rounds;
            bool found = false;
            NonlinearParams best_x = x;
            double best_sse = sse;
            for (const NonlinearParams& cand : ripple_hops(times, logp, bounds, x)) {
                if (!residuals(cand, r_trial)) continue;
                const double cand_sse = r_trial.squaredNorm();
                if (cand_sse < best_sse) {
                    best_sse = cand_sse;
                    best_x = cand;
                    found = true;
                }
            }
            if (!found) return false;
            x = best_x;
            residuals(x, r);
            sse = best_sse;
            lambda = 1e-3;
            nu = 2.0;
            stagnant_streak = 0;
            return true;
        };

        bool accepted = false;
        bool converged = false;
        for (int attempt = 0; attempt < 24 && !accepted; ++attempt) {
            Eigen::Matrix4d lhs = jtj;
            for (int d = 0; d < 4; ++d)
                lhs(d, d) += lambda * std::max(jtj(d, d), 1e-30);
            const Eigen::Vector4d delta = lhs.ldlt().solve(-jtr);
            NonlinearParams trial;
            for (int d = 0; d < 4; ++d)
                trial[d] = std::clamp(x[d] + delta[d], bounds.lo[d], bounds.hi[d]);
            bool ok = residuals(trial, r_trial);
            double trial_sse = ok ? r_trial.squaredNorm() : kInf;
            if (ok && trial_sse < sse) {
                // predicted reduction by the damped linear model
                Eigen::Vector4d step;
                for (int d = 0; d < 4; ++d) step[d] = trial[d] - x[d];
                double predicted = 0.0;
                for (int d = 0; d < 4; ++d)
                    predicted +=
                        step[d] * (lambda * std::max(jtj(d, d), 1e-30) * step[d] - jtr[d]);
                const double rel = (sse - trial_sse) / std::max(sse, 1e-300);
                const double gain = predicted > 0.0 ? (sse - trial_sse) / predicted : 0.0;
                const double lambda_used = lambda;
                x = trial;
                r.swap(r_trial);
                sse = trial_sse;
                const double shrink = 1.0 - std::pow(2.0 * gain - 1.0, 3.0);
                lambda = std::max(lambda * std::max(1.0 / 3.0, shrink), 1e-13);
                nu = 2.0;
                accepted = true;
                // a tiny relative decrease signals convergence outright for a
                // near-Gauss-Newton step; heavily damped steps are always
                // small, so those only count once progress has crawled for
                // several iterations in a row
                stagnant_streak = rel < cfg.lm_tolerance ? stagnant_streak + 1 : 0;
                converged = (rel < cfg.lm_tolerance && lambda_used <= 1e-2) ||
                            stagnant_streak >= 3;
                break;
            }
            lambda *= nu;
            nu *= 2.0;
            if (lambda > 1e15) break;
        }
        if (converged) {
            if (!try_recenter()) return {x, sse, iterations + 1};
            continue;
        }
        if (!accepted && !try_recenter()) break; // stalled at every damping
    }
    return {x, sse, iterations};
}

LpplFit fit_window(const PriceSeries& log_window, const WindowSpec& w, const SearchBounds& bounds,
                   const OptimizerConfig& cfg) {
    const Eigen::VectorXd times = log_window.times();
    const Eigen::VectorXd& values = log_window.values;
    const auto candidates = tabu_search(times, values, bounds, cfg);

    bool have_best = false;
    NonlinearParams best_x{};
    double best_obj = kInf;
    for (const auto& cand : candidates) {
        try {
            const LmResult res = lm_refine(times, values, cand, bounds, cfg);
            if (!std::isfinite(res.objective)) continue;
            if (!have_best || res.objective < best_obj ||
                (res.objective == best_obj && res.x < best_x)) {
                best_x = res.x;
                best_obj = res.objective;
                have_best = true;
            }
        } catch (const NumericFailureError&) {
            continue;
        } catch (const DegenerateBasisError&) {
            continue;
        }
    }
    if (!have_best)
        throw FitFailureError("fit_window: all candidates failed for window " +
                              format_date(w.t1) + ".." + format_date(w.t2));

    const SlavedFit s = slave_linear_params(times, values, best_x[0], best_x[1], best_x[2],
                                            best_x[3]);
    LpplFit fit;
    fit.params = {s.A, s.B, s.C, best_x[0], best_x[1], best_x[2], best_x[3]};
    fit.window = w;
    fit.residual_q = s.residual_q;
    fit.b = hazard_positivity(fit.params);
    fit.n_obs = static_cast<int>(times.size());
    return fit;
}

LpplFit fit_window(const PriceSeries& log_window, const WindowSpec& w, const OptimizerConfig& cfg,
                   double tc_range_factor) {
    return fit_window(log_window, w, SearchBounds::for_window(w, tc_range_factor), cfg);
}

} // namespace rebound
