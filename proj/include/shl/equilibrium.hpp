// Dirichlet problem on a ball with deterministic or random boundary data.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "shl/grid.hpp"
#include "shl/grsf.hpp"
#include "shl/report.hpp"

namespace shl {

using PointFn = std::function<double(const std::vector<double>&)>;

double unit_sphere_area(int n);

// (R^2 - |x|^2) / (area(S^{n-1}) R |x - y|^n), n = x.size() >= 2.
// Throws std::invalid_argument unless |x| < R and |y| = R.
double poisson_kernel(const std::vector<double>& x, const std::vector<double>& y, double R);

// Green's function of the ball in R^3 with zero boundary values:
// 1/(4 pi |x-y|) - 1/(4 pi sqrt(|x|^2 |y|^2 / R^2 - 2 x.y + R^2)).
double dirichlet_green(const std::vector<double>& x, const std::vector<double>& y, double R);

// Lap u = f in B_R(0) in R^3, u = psi + g(y) + J(y) on the sphere.
struct BallProblem {
    double R = 1.0;
    double psi = 0.0;
    PointFn boundary;                     // optional g, added to psi
    std::optional<CovarianceKernel> noise;  // J sampled on the sphere grid with chordal distances
    PointFn source;                       // optional f
    int n_theta = 16;
    int n_phi = 32;
};

std::shared_ptr<const Grid> boundary_grid(const BallProblem& p);

// Cell centres of ball_grid(R, cells) with |x| <= fraction R.
std::vector<std::vector<double>> interior_points(double R, int cells, double fraction);

// Node weights w_k P(x, y_k) of the surface quadrature.
Eigen::VectorXd poisson_weights(const Grid& sphere, const std::vector<double>& x);

// -int_B G(x,y) f(y) dy in spherical coordinates about x, so the 1/|x-y|
// singularity is absorbed by the Jacobian.
double source_potential(const PointFn& f, double R, const std::vector<double>& x, int n_dir_theta = 16,
                        int n_dir_phi = 32, int n_radial = 24);

struct DirichletSolution {
    std::vector<std::vector<double>> points;
    std::vector<double> values;
    std::vector<double> boundary;  // data at the sphere nodes, noise included
    std::optional<SeedPath> seed;
};

// Deterministic when `seed` is empty or the problem has no noise. Pass a
// sampler built on boundary_grid(p) to reuse its factor.
DirichletSolution solve_dirichlet(const BallProblem& p, const std::vector<std::vector<double>>& points,
                                  std::optional<SeedPath> seed = std::nullopt, const FieldSampler* sampler = nullptr);

// N samples (rows) of u at the points (columns), one boundary field per stream.
Eigen::MatrixXd dirichlet_ensemble(const BallProblem& p, const std::vector<std::vector<double>>& points, int N,
                                   std::uint64_t seed, const FieldSampler* sampler = nullptr);

// ----- volatility bound at (0,0,alpha) -----

// 1/2 (zeta + psi^2) R^2 (R^2 - alpha^2)^2 int_{-1}^{1} dmu / (R^2 - 2 alpha R mu + alpha^2)^3.
double ball_volatility_bound_quadrature(double alpha, double R, double zeta, double psi);
// The same integral in closed form: (zeta + psi^2) R^2 (R^2 + alpha^2) / (R^2 - alpha^2)^2.
double ball_volatility_bound_closed(double alpha, double R, double zeta, double psi);
// As printed: (zeta + psi^2) R (R^2 - alpha^2)^2 / (8 alpha) [1/(R-alpha)^2 - 1/(R+alpha)^2].
double ball_volatility_bound_printed(double alpha, double R, double zeta, double psi);

// alpha -> 0 of either form, from alpha = R 10^{-k}, k = 2..7; throws if the
// sequence has not settled to 1e-9 relative.
double ball_volatility_bound_limit(double R, double zeta, double psi, bool printed);

// Bound report against an MC estimate of E|u(0,0,alpha)|^2; bound is the
// quadrature form, extras carry the closed and printed forms.
BoundReport volatility_bound_ball(double alpha, double R, double zeta, double psi,
                                  const std::optional<Estimate>& empirical = std::nullopt);

struct BallVolatilityPoint {
    double alpha = 0.0;
    Estimate volatility;
    BoundReport report;
};

// MC volatility of solve_dirichlet at (0,0,alpha) for each alpha.
std::vector<BallVolatilityPoint> ball_volatility_mc(const BallProblem& p, const std::vector<double>& alphas, int N,
                                                    std::uint64_t seed);

// ----- thermal equilibrium -----

// Radial problem in B_R(0) in R^3: u(.,0) = 0, u = psi on the sphere for t > 0.
// r u - r psi solves the 1-D Dirichlet problem on [0,R]; the steady state is psi.
struct EquilibriumLimit {
    std::vector<double> times;
    std::vector<double> gap;  // max over r of |u(r,t) - psi|
    bool decreasing = false;
};

EquilibriumLimit equilibrium_limit(double R, double psi, const std::vector<double>& times, int radial_points = 41);

}  // namespace shl
