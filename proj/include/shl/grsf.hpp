// Regulated Gaussian random scalar fields on grids.
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shl/grid.hpp"
#include "shl/rng.hpp"

namespace shl {

enum class KernelFamily { exponential, squared_exponential };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

struct CovarianceKernel {
    KernelFamily family = KernelFamily::exponential;
    double zeta = 1.0;  // field variance
    double ell = 1.0;   // correlation length

    // Correlation J as a function of separation; J(0) = 1.
    double correlation(double r) const;
};

double covariance(const CovarianceKernel& k, std::span<const double> x, std::span<const double> y);

struct FieldSample {
    std::shared_ptr<const Grid> grid;
    std::vector<double> values;
    SeedPath seed;
};

// Dense Cholesky factor of the grid covariance matrix. Jitter starts at
// 1e-12 zeta and grows tenfold up to 1e-6 zeta before giving up.
class FieldSampler {
public:
    static constexpr std::size_t max_nodes = 4096;

    FieldSampler(std::shared_ptr<const Grid> grid, CovarianceKernel kernel);

    const Grid& grid() const { return *grid_; }
    std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
    const CovarianceKernel& kernel() const { return kernel_; }
    double jitter() const { return jitter_; }
    const Eigen::MatrixXd& factor() const { return L_; }
    Eigen::MatrixXd covariance_matrix() const;

    // Standard normal vector for one stream.
    Eigen::VectorXd draw_standard(SeedPath s) const;
    FieldSample sample(SeedPath s) const;

    // L^T W: turns node-weight functionals W (M x P) into per-sample
    // coefficients on the standard normal draw.
    Eigen::MatrixXd project(const Eigen::MatrixXd& W) const;

private:
    std::shared_ptr<const Grid> grid_;
    CovarianceKernel kernel_;
    Eigen::MatrixXd L_;
    double jitter_ = 0.0;
};

FieldSample sample_field(std::shared_ptr<const Grid> grid, const CovarianceKernel& k, SeedPath s);

// 1/2 [zeta^{p/2} + (-1)^p zeta^{p/2}]: the convention used in every moment bound.
double printed_abs_moment(int p, double zeta);

// True E|X|^p for X ~ N(0, zeta).
double gaussian_abs_moment(int p, double zeta);

// Riemann sum of weight * field * cell volume.
double stochastic_integral(const FieldSample& s, std::span<const double> weight);

FieldSample gaussian_smooth(const FieldSample& s, double scale);

struct MsDifferentiabilityReport {
    std::vector<double> h;
    std::vector<double> second_difference;
    bool converges = false;
    double limit = 0.0;  // last value when converging
    std::string verdict;
};

// Mixed second difference of the covariance at coincident points,
// [C(x+h,x+h) - C(x+h,x) - C(x,x+h) + C(x,x)] / h^2 = 2 (zeta - C(h)) / h^2.
MsDifferentiabilityReport ms_differentiability_check(const CovarianceKernel& k,
                                                     const std::vector<double>& h_sequence);

}  // namespace shl
