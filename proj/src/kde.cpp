#include "rebound/kde.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rebound/errors.hpp"

namespace rebound {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double silverman_bandwidth(Eigen::VectorXd sorted) {
    const auto n = sorted.size();
    const double mean = sorted.mean();
    const double var = (sorted.array() - mean).square().sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt(std::max(var, 0.0));
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        const auto i = static_cast<Eigen::Index>(pos);
        const double frac = pos - static_cast<double>(i);
        if (i + 1 >= n) return sorted[n - 1];
        return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    if (spread <= 0.0) {
        // all samples (nearly) identical: pick a token width so the density
        // degenerates to a sharp spike at that value
        const double scale = std::max(std::abs(sorted[0]), 1.0);
        return 1e-9 * scale;
    }
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

} // namespace

double Pdf::density_at(double x) const {
    if (x < lo() || x > hi()) return 0.0;
    const double step = (hi() - lo()) / static_cast<double>(grid.size() - 1);
    const double pos = (x - lo()) / step;
    const auto i = std::min(static_cast<Eigen::Index>(pos), grid.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return density[i] * (1.0 - frac) + density[i + 1] * frac;
}

double Pdf::cdf_at(double x) const {
    if (x <= lo()) return 0.0;
    if (x >= hi()) return total_mass();
    const double step = (hi() - lo()) / static_cast<double>(grid.size() - 1);
    const double pos = (x - lo()) / step;
    const auto i = std::min(static_cast<Eigen::Index>(pos), grid.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return cdf[i] * (1.0 - frac) + cdf[i + 1] * frac;
}

Pdf adaptive_kde(const Eigen::Ref<const Eigen::VectorXd>& samples, int grid_points) {
    const auto n = samples.size();
    if (n < 2)
        throw InsufficientDataError("adaptive_kde: needs >= 2 samples, got " +
                                    std::to_string(n));
    if (grid_points < 8)
        throw ValidationError("adaptive_kde: grid too coarse");

    Eigen::VectorXd sorted = samples;
    std::sort(sorted.data(), sorted.data() + n);
    const double h = silverman_bandwidth(sorted);

    // fixed-bandwidth pilot evaluated at the sample points
    Eigen::VectorXd pilot(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double z = (sorted[k] - sorted[j]) / h;
            acc += std::exp(-0.5 * z * z);
        }
        pilot[k] = acc * kInvSqrt2Pi / (static_cast<double>(n) * h);
    }

    const double log_geo_mean = pilot.array().log().mean();
    Eigen::VectorXd bw(n);
    for (Eigen::Index k = 0; k < n; ++k)
        bw[k] = h * std::exp(-0.5 * (std::log(pilot[k]) - log_geo_mean));

    const double pad = 4.0 * bw.maxCoeff();
    const double lo = sorted[0] - pad;
    const double hi = sorted[n - 1] + pad;

    Pdf out;
    out.grid = Eigen::VectorXd::LinSpaced(grid_points, lo, hi);
    out.density.resize(grid_points);
    for (int g = 0; g < grid_points; ++g) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double z = (out.grid[g] - sorted[k]) / bw[k];
            acc += std::exp(-0.5 * z * z) / bw[k];
        }
        out.density[g] = acc * kInvSqrt2Pi / static_cast<double>(n);
    }

    out.cdf.resize(grid_points);
    out.cdf[0] = 0.0;
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    for (int g = 1; g < grid_points; ++g)
        out.cdf[g] = out.cdf[g - 1] + 0.5 * (out.density[g - 1] + out.density[g]) * step;
    return out;
}

double ks_distance(const Pdf& a, const Pdf& b) {
    double sup = 0.0;
    for (const Pdf* p : {&a, &b})
        for (Eigen::Index i = 0; i < p->grid.size(); ++i) {
            const double x = p->grid[i];
            sup = std::max(sup, std::abs(a.cdf_at(x) - b.cdf_at(x)));
        }
    return sup;
}

} // namespace rebound
