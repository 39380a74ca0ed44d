// Cole-Hopf transform: quasilinear parabolic PDE and viscous Burgers via the
// heat equation with conductance a.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "shl/cauchy.hpp"
#include "shl/grsf.hpp"
#include "shl/inequalities.hpp"
#include "shl/report.hpp"

namespace shl {

// psi_t - a Lap psi + b |grad psi|^2 = 0.
struct ColeHopfParams {
    double a = 1.0;
    double b = 1.0;
    void validate() const;  // throws std::invalid_argument unless a > 0, b != 0
};

// u = exp(-(b/a) psi) and back. The inverse throws on u <= 0.
double cole_hopf_forward(double psi, const ColeHopfParams& p);
double cole_hopf_inverse(double u, const ColeHopfParams& p);
std::vector<double> cole_hopf_forward(const std::vector<double>& psi, const ColeHopfParams& p);
std::vector<double> cole_hopf_inverse(const std::vector<double>& u, const ColeHopfParams& p);

// Quadrature in y = x + 2 sqrt(a t) z over |z_i| <= z_max per axis, split at
// `breakpoints` (discontinuities of the data, same list for every axis).
// Panels are at most `panel` long in y and at most 0.5 in z.
struct ConvolutionOptions {
    double z_max = 8.0;
    double panel = 0.05;
    std::vector<double> breakpoints;
};

// log of (4 pi a t)^{-n/2} int e^{-|x-y|^2/4at} e^{g(y)} dy by log-sum-exp. n in {1, 2, 3}.
double log_heat_convolution_exp(const FieldFn& g, double a, const std::vector<double>& x, double t,
                                const ConvolutionOptions& o = {});

// (4 pi a t)^{-n/2} int e^{-|x-y|^2/4at} I(y) dy.
double heat_evolve(const FieldFn& I, double a, const std::vector<double>& x, double t,
                   const ConvolutionOptions& o = {});

// psi(x,t) = -(a/b) log((4 pi a t)^{-n/2} int e^{-|x-y|^2/4at} e^{-(b/a) I(y)} dy).
double quasilinear_value(const FieldFn& I, const ColeHopfParams& p, const std::vector<double>& x, double t,
                         const ConvolutionOptions& o = {});

// Rows are times, columns points.
Eigen::MatrixXd solve_quasilinear(const FieldFn& I, const ColeHopfParams& p,
                                  const std::vector<std::vector<double>>& points, const std::vector<double>& times,
                                  const ConvolutionOptions& o = {});

// psi_t - a Lap psi + b |grad psi|^2 by central differences.
double quasilinear_residual(const FieldFn& psi, const ColeHopfParams& p, const std::vector<double>& x, double t,
                            FdSteps h = {});

// Linear residual eps = max |u_t - a Lap u| and quasilinear residual of
// psi = -(a/b) log u over the sweep. Exactly, the latter is (a/|b|) |u_t - a Lap u| / u,
// so it is at most C eps with C = a / (|b| min u).
struct TransformConsistency {
    double linear_residual = 0.0;
    double quasilinear_residual = 0.0;
    double C = 0.0;
    double observed_ratio = 0.0;  // quasilinear / linear
    bool pass = false;            // quasilinear <= C eps + 1e-6
};

TransformConsistency transform_consistency(const FieldFn& u, const ColeHopfParams& p,
                                           const std::vector<std::vector<double>>& points,
                                           const std::vector<double>& times, FdSteps h = {});

// ----- Burgers, n = 1 -----

// v_t + v v_x = a v_xx on the line with v(x,0) = I(x), I given on [lo, hi]
// and zero outside. The potential J(y) = int_lo^y I enters as
// v(x,t) = int ((x-y)/t) K dy / int K dy, K = e^{-(x-y)^2/4at - J(y)/2a}.
class BurgersSolver {
public:
    BurgersSolver(Fn1 I, double a, double lo, double hi, int panels = 1600);

    double velocity(double x, double t) const;
    // Ratio printed with |x-y| for (x-y) and 4t for 4at, over [lo, hi] only.
    double velocity_printed(double x, double t) const;
    double potential(double y) const;  // J(y), constant outside [lo, hi]

    double a() const { return a_; }

private:
    double ratio(double x, double t, bool printed) const;

    Fn1 I_;
    double a_, lo_, hi_;
    std::vector<double> nodes_, weights_, J_;
    double J_hi_ = 0.0;
};

enum class BurgersBoundary { periodic, outflow };

// Conservative finite volumes: Godunov flux for v^2/2, central diffusion,
// explicit Euler with dt = 0.4 min(dx / max|v|, dx^2 / 2a). Cell averages
// are initialised by Gauss-Legendre. Rows are the requested times.
struct BurgersFd {
    std::vector<double> centers;
    std::vector<double> times;
    Eigen::MatrixXd values;
    int steps = 0;
    double dx = 0.0;
};

BurgersFd burgers_fd(const Fn1& I, double a, double lo, double hi, int cells, const std::vector<double>& times,
                     BurgersBoundary bc);

// ----- random initial data -----

// psi(x,0) = phi + J on the grid of `sampler` (an interval), zero outside.
// u_hat = (1 - m_Q(x, a t)) + sum_k w_k h(x - y_k, a t) e^{-(b/a)(phi_k + J_k)}
// is summed in log space.
struct StochasticColeHopf {
    std::vector<double> points, times;
    Eigen::MatrixXd psi;  // N x (times * points), column = ti * points + xi
    Eigen::MatrixXd u;    // pre-log field, same layout
    std::size_t column(std::size_t ti, std::size_t xi) const { return ti * points.size() + xi; }
    Estimate moment(int p, std::size_t ti, std::size_t xi) const;
};

StochasticColeHopf stochastic_cole_hopf(const Fn1& phi, const FieldSampler& sampler, const ColeHopfParams& p,
                                        const std::vector<double>& points, const std::vector<double>& times, int N,
                                        std::uint64_t seed);

// The same sum with the field set to zero.
double cole_hopf_grid_value(const Grid& g, const std::vector<double>& data, const ColeHopfParams& p, double x,
                            double t);

// E u_hat with E e^{-(b/a) J_k} = e^{(b/a)^2 var_k / 2}, var_k the diagonal of the sampled covariance.
double lognormal_mean_u(const Fn1& phi, const FieldSampler& sampler, const ColeHopfParams& p, double x, double t);

}  // namespace shl
