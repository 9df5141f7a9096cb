#pragma once

#include <Eigen/Core>

namespace rebound {

// Density estimate tabulated on a uniform grid, with its cumulative integral.
// Linear interpolation between grid points; zero density outside the grid.
struct Pdf {
    Eigen::VectorXd grid;
    Eigen::VectorXd density;
    Eigen::VectorXd cdf;

    double lo() const { return grid[0]; }
    double hi() const { return grid[grid.size() - 1]; }
    double density_at(double x) const;
    double cdf_at(double x) const; // 0 left of the grid, total mass right of it
    double total_mass() const { return cdf[cdf.size() - 1]; }
};

// Adaptive kernel density estimate (Gaussian kernels): a Silverman-rule
// pilot sets per-point bandwidths h * (pilot(x_k) / geometric mean)^(-1/2).
// The grid spans every kernel's +-4 sigma so the tabulated density
// integrates to 1 within 1e-3. Throws InsufficientDataError for < 2 samples.
Pdf adaptive_kde(const Eigen::Ref<const Eigen::VectorXd>& samples, int grid_points = 512);

// Sup-norm distance between two tabulated CDFs, evaluated on the union of
// both grids.
double ks_distance(const Pdf& a, const Pdf& b);

} // namespace rebound
