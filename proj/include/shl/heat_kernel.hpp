// Euclidean heat kernel h(x-y,t) = (4 pi t)^{-n/2} exp(-|x-y|^2 / 4t) and its properties.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shl/report.hpp"

namespace shl {

// Half-width multiplier for truncating R^n: integrals run over x +- 2 K sqrt(t).
inline constexpr double truncation_K = 12.0;

struct KernelQuery {
    int n = 1;
    std::vector<double> x;
    std::vector<double> y;
    double t = 1.0;
};

// Scalar forms used in hot loops. heat_kernel returns 0 for t <= 0.
double heat_kernel(int n, double r2, double t);
double log_heat_kernel(int n, double r2, double t);

struct KernelValue {
    double value = 0.0;
    bool zero_by_convention = false;  // t <= 0
};

KernelValue kernel(const KernelQuery& q);

struct KernelDerivatives {
    double dt = 0.0;
    std::vector<double> grad;
    double laplacian = 0.0;
    double residual() const { return dt - laplacian; }
};

// Throws for t <= 0.
KernelDerivatives kernel_derivatives(const KernelQuery& q);

double lp_norm_closed_form(int n, double t, double p);

// Quadrature of (int |h|^p)^{1/p} over the truncated R^n; n in {1,2,3}.
double lp_norm_quadrature(int n, double t, double p);

// Quadrature of int h(x-y,t) dy over the truncated R^n; n in {1,2,3}.
double normalization_quadrature(int n, double t);

struct BoundConstants {
    double lambda1 = 0.0;
    double rate1 = 4.0;
    double lambda2 = 0.0;
    double rate2 = 4.0;

    static BoundConstants equality(int n);  // both sides equal the kernel
    static BoundConstants standard(int n);  // lambda/2 rate 2, 2 lambda rate 8
};

struct GaussianSurrogate {
    double lambda;
    double rate;
    double value(int n, double r2, double t) const;                 // lambda t^{-n/2} e^{-r^2/(rate t)}
    double power(int n, double r2, double t, double p) const;       // p-th power form
    double gradient(int n, double r, double t) const;               // lambda t^{-n/2} (2r/(rate t)) e^{-r^2/(rate t)}
};

// Pointwise check of the value, squared, p-power (p = 3, 4) and gradient
// forms. bound = upper value, empirical = kernel value; lower forms in extra.
BoundReport check_double_sided_bound(const KernelQuery& q, const BoundConstants& c);

// Sweep of the pointwise check over separation r in [0, r_max] and t in [t_min, t_max].
InequalityVerdict double_sided_sweep(int n, const BoundConstants& c, double r_max, double t_min,
                                     double t_max, int nr = 51, int nt = 41);

// Max over probe pairs of |int h(x-z,t) h(y-z,s) dz - h(x-y,t+s)| by trapezoid
// quadrature on [a,b] with `nodes` nodes; n = 1.
double semigroup_check(double t, double s, double a, double b, int nodes, int probes = 41);

// Quadrature of int h(x-y,t)^2 dy over truncated R^n; equals (8 pi t)^{-n/2}.
double squared_kernel_integral(int n, double t);

// |int h(x-z,t) phi(z) dz - phi(x)| for n = 1.
double delta_approximation_error(const std::function<double(double)>& phi, double x, double t);

struct VaradhanReport {
    std::vector<double> t;
    std::vector<double> value;     // -4 t log h
    std::vector<double> analytic;  // r^2 + 2 n t log(4 pi t)
    double limit = 0.0;            // r^2
    double final_error = 0.0;
    bool converged = false;
};

VaradhanReport varadhan_limit(int n, const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& t_sequence, double tol = 1e-3);

// Gamma(n/2-1) / (4 pi^{n/2} r^{n-2}); requires n >= 3 and x != y.
double greens_function(int n, const std::vector<double>& x, const std::vector<double>& y);

struct GreensQuadrature {
    double value = 0.0;
    bool diverges = false;
    std::string note;
};

// int_0^inf h(x-y,t) dt: quadrature in log t up to T = 100 r^2 plus an
// alternating series for the tail. n <= 2 is reported divergent.
GreensQuadrature greens_via_time_quadrature(int n, const std::vector<double>& x, const std::vector<double>& y);

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
    double volume() const;
};

double set_distance(const Box& a, const Box& b);

// Double integral of h over Q x Q' by per-axis Gauss-Legendre quadrature.
double box_kernel_double_integral(const Box& Q, const Box& Qp, double t);

// Checks the two-set estimate sqrt(v(Q) v(Q')) e^{-d^2/4t}; for coincident
// sets also the v(Q) bound (recorded in extra).
BoundReport davies_two_set_bound(const Box& Q, const Box& Qp, double t);

// Periodic kernel on the ring: 1/(2 pi) + (1/pi) sum_{m=1}^{K} e^{-m^2 t} cos(m theta).
double ring_kernel(double theta, double t, int K, bool include_zero_mode = true);

// Truncation order so that the dropped tail is below tol.
int ring_truncation(double t, double tol = 1e-16);

// Eigen L_p estimate on the ring: int |k|^p <= k(0,t)^{p/2} lambda(t),
// lambda = e^{-alpha t}/(1-e^{-alpha t}), alpha = 1. k excludes the zero mode
// (the constant mode does not decay); the full-kernel value is in extra.
BoundReport ring_eigen_lp_estimate(double p, double t);

}  // namespace shl
