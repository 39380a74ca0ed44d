// Deterministic, inhomogeneous and stochastic Cauchy problems for the heat equation.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shl/grid.hpp"
#include "shl/grsf.hpp"
#include "shl/report.hpp"

namespace shl {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;  // f(x, s)

enum class Perturbation { none, additive, multiplicative };

struct InitialData {
    Fn1 phi = [](double) { return 0.0; };
    std::string preset = "custom";
    Perturbation perturbation = Perturbation::none;
    CovarianceKernel kernel{};

    static InitialData constant(double C);
    // Beer-law laser profile beta e^{-alpha z}.
    static InitialData laser(double beta, double alpha);
};

enum class Provenance { deterministic, realization, ensemble_mean };

struct SolutionField {
    std::shared_ptr<const Grid> grid;
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // [time][node]
    Provenance provenance = Provenance::deterministic;
    std::optional<SeedPath> seed;
};

// int_a^b h(x-y,t) phi(y) dy in 1-D by composite Gauss-Legendre on the part
// of [a,b] within 2 K sqrt(t) of x. a, b may be infinite.
double convolve_1d(const Fn1& phi, double a, double b, double x, double t);

// d/dx of convolve_1d.
double convolve_1d_dx(const Fn1& phi, double a, double b, double x, double t);

// Duhamel term int_0^t int_a^b h(x-y,t-s) f(y,s) dy ds. Uses s = t - sigma^2
// (removes the 1/sqrt(t-s) clustering) and the analytic kernel mass when t-s < 1e-6.
double duhamel_1d(const Fn2& f, double a, double b, double x, double t);

// u(x,t) on the 1-D eval grid for data supported on [a,b].
SolutionField solve_deterministic(const InitialData& data, double a, double b,
                                  std::shared_ptr<const Grid> eval, const std::vector<double>& times);

SolutionField solve_inhomogeneous(const InitialData& data, const Fn2& source, double a, double b,
                                  std::shared_ptr<const Grid> eval, const std::vector<double>& times);

// Weight of source node j in the convolution at point x (ring: x = {theta}).
double convolution_weight(const Grid& src, std::size_t j, std::span<const double> x, double t);

// Functional matrix (source nodes x (points*times)): column c = p*times.size()+k
// holds the Riemann weights of int h(x_p - y, t_k) g(y) J(y) dy, with
// g = phi for multiplicative noise and g = 1 otherwise.
Eigen::MatrixXd convolution_functionals(const Grid& src, const std::vector<std::vector<double>>& points,
                                        const std::vector<double>& times, const Fn1* multiplier = nullptr);

// One realization on a 1-D eval grid; noise lives on the sampler grid.
// additive: u + int h J; multiplicative: int h phi J. The same field is used at all times.
SolutionField solve_stochastic_realization(const InitialData& data, const FieldSampler& sampler,
                                           std::shared_ptr<const Grid> eval, const std::vector<double>& times,
                                           SeedPath seed);

// Same, with a caller-supplied field sample (e.g. forced to zero).
SolutionField solve_with_field(const InitialData& data, const FieldSample& field,
                               std::shared_ptr<const Grid> eval, const std::vector<double>& times);

// N samples of the linear functionals: row i = offset + (L^T W)^T z_i with
// z_i drawn from stream i. Rows are in stream order.
Eigen::MatrixXd sample_functionals(const FieldSampler& sampler, const Eigen::MatrixXd& W,
                                   const Eigen::VectorXd& offset, int N, std::uint64_t master_seed);

// ----- spectral path -----

struct SpectralBasis {
    enum class Kind { dirichlet_interval, ring } kind = Kind::dirichlet_interval;
    double L = 1.0;
    int K = 1;
    double eigenvalue(int k) const;         // dirichlet: (k pi/L)^2, k >= 1
    double eval(int k, double x) const;      // dirichlet: sqrt(2/L) sin(k pi x / L)
};

SpectralBasis dirichlet_basis(double L, int K);

// Smallest K with exp(-theta_K t_min) <= tol.
int dirichlet_truncation(double L, double t_min, double tol = 1e-12);

// max |int chi_i chi_j - delta_ij| over i, j <= K.
double orthonormality_error(const SpectralBasis& b);

// Throws if exp(-theta_K t_min) > 1e-12.
SolutionField eigen_solution(const SpectralBasis& b, const Fn1& u0, std::shared_ptr<const Grid> eval,
                             const std::vector<double>& times);

// Dirichlet problem on [0,L] by odd-periodic image extension of the convolution.
double image_solution(const Fn1& u0, double L, double x, double t);

struct RingCoefficients {
    std::vector<double> A;  // A[0] is the mean, (1/2 pi) int q
    std::vector<double> B;  // B[0] unused
};

// Trapezoid projection of ring-grid values onto modes 0..K.
RingCoefficients ring_coefficients(const Grid& ring, std::span<const double> values, int K);

double ring_series(const RingCoefficients& c, double theta, double t);

// Fourier solution on the ring grid; with a sampler, the data is q + J.
SolutionField ring_solve(const Fn1& q, std::shared_ptr<const Grid> ring, const std::vector<double>& times, int K,
                         const FieldSampler* sampler = nullptr, SeedPath seed = {});

// ----- classical properties -----

struct ClassicalReport {
    double mass_rel_err = 0.0;        // max over t of |int u - int phi| / |int phi|
    double gradient_ratio = 0.0;      // max over t of sup|u_x| sqrt(t) / sup|phi|
    double gradient_constant = 0.0;   // c(n) = Gamma((n+1)/2)/Gamma(n/2)
    double sup_excess = 0.0;          // max over t of sup u - sup phi
    bool mass_ok = false;
    bool gradient_ok = false;
    bool sup_ok = false;
};

double gradient_constant(int n);

// 1-D checks on [x_lo, x_hi] sampled with `nodes` points; phi supported on [a,b].
ClassicalReport classical_checks(const Fn1& phi, double a, double b, const std::vector<double>& times,
                                 double x_lo, double x_hi, int nodes);

// Centered FD residual u_t - u_xx - f at (x,t) for a callable solution.
double heat_residual_1d(const Fn2& u, double x, double t, double dx, double dt, const Fn2* f = nullptr);

// ----- heat ball (n = 1) -----

inline double heat_ball_tau_max(double R) { return R * R / (4.0 * 3.14159265358979323846); }

// (1/4R) iint_{heat ball} u(y,s) (x-y)^2/(t-s)^2 dy ds. The ball boundary is
// parametrized analytically: tau = tau_max e^{-w^2}, y = x + rho(tau) xi.
// Throws if the ball reaches below s = 0.
double heat_ball_mean_value(const Fn2& u, double x, double t, double R, int w_nodes = 96, int xi_nodes = 24);

// Same region by thresholding h >= 1/R on a midpoint grid in (y, log tau),
// tau = t - s. Cell counts are refine * 2 rho_max / dy across and
// refine * 40 tau_max / ds in log tau.
double heat_ball_mean_value_threshold(const Fn2& u, double x, double t, double R, double dy, double ds,
                                      int refine = 8);

// Quadrature nodes of heat_ball_mean_value as (y, s, weight) triples, so
// the mean value of a linear solution becomes a linear functional.
struct SpaceTimeRule {
    std::vector<double> y, s, w;
};
SpaceTimeRule heat_ball_rule(double x, double t, double R, int w_nodes = 96, int xi_nodes = 24);

// Node weights on a 1-D source grid of the heat-ball mean value of
// int h(. - y, s) g(y) J(y) dy, i.e. the stochastic convolution part.
Eigen::VectorXd heat_ball_functional(const Grid& src, double x, double t, double R, const Fn1* multiplier = nullptr);

}  // namespace shl
