// Li-Yau and parabolic Harnack checks, deterministic and in expectation.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "shl/grsf.hpp"
#include "shl/heat_kernel.hpp"
#include "shl/report.hpp"

namespace shl {

// u(x, t) for x in R^n.
using FieldFn = std::function<double(const std::vector<double>&, double)>;

struct FdSteps {
    double dx = 1e-3;
    double dt = 1e-4;
};

struct FdDerivatives {
    double u = 0.0;
    double ut = 0.0;
    std::vector<double> grad;
    double laplacian = 0.0;
    double grad2() const;
};

// Central differences in every axis and in t.
FdDerivatives fd_derivatives(const FieldFn& u, const std::vector<double>& x, double t, FdSteps h);

// sum_i w_i h(x - c_i, t + s_i); positive solution of the heat equation for t > -min s_i.
struct BumpSolution {
    int n = 1;
    std::vector<std::vector<double>> centers;
    std::vector<double> weights;
    std::vector<double> shifts;
    double operator()(const std::vector<double>& x, double t) const;
};

BumpSolution random_bumps(int n, int count, double box, std::uint64_t seed);

// Box(log u) against |grad u|^2/u^2, -|u| Box(u log u) against |grad u|^2 and
// u^2 Box(log u) against -|u| Box(u log u). Margins are minus the discrepancy.
// Throws std::invalid_argument on a nonpositive value.
InequalityVerdict log_identities_check(const FieldFn& u, const std::vector<std::vector<double>>& points,
                                       const std::vector<double>& times, FdSteps h = {}, double tolerance = 5e-3);

// margin = n/2t - (|grad u|^2/u^2 - u_t/u). Derivatives at h and h/2; the
// finer value is used and twice their gap is the FD budget, so the
// tolerance is 1e-6 plus the largest budget seen.
InequalityVerdict li_yau_check(const FieldFn& u, int n, const std::vector<std::vector<double>>& points,
                               const std::vector<double>& times, FdSteps h = {});

// Printed left side for constant data on the half line, n = 1:
// e^{-x^2/2t}/(pi (erf(x/2 sqrt t)+1)^2) + x e^{-x^2/4t}/(2 sqrt(pi t) (erf(x/2 sqrt t)+1)); bound 1/2.
double li_yau_constant_data_printed(double x, double t);

struct KernelIntegralForm {
    double grad_sq = 0.0;     // int |grad_x h|^2
    double dt_sq = 0.0;       // int |d_t h|^2
    double h_sq = 0.0;        // int h^2
    double geometric = 0.0;   // sqrt(dt_sq h_sq)
    double rhs = 0.0;         // (n/2t) h_sq
    double lower = 0.0;       // lambda1^2 t^{-n} int (2r/(rate1 t))^2 e^{-2 r^2/(rate1 t)}
    double upper = 0.0;       // lambda2^2 t^{-n} int e^{-2 r^2/(rate2 t)}
    bool ordered = false;     // grad_sq <= geometric <= rhs
    bool sandwich = false;    // lower <= geometric <= upper
};

// n = 1, Q = [a, b], probe x.
KernelIntegralForm li_yau_kernel_integral_form(double a, double b, double x, double t,
                                               const BoundConstants& c = BoundConstants::standard(1));

struct HarnackPair {
    std::vector<double> x;
    double t1 = 0.0;
    std::vector<double> y;
    double t2 = 0.0;
};

// margin = log u(y,t2) - log[u(x,t1) (t1/t2)^{n/2} e^{-|x-y|^2/4(t2-t1)}].
// Throws std::invalid_argument if t1 >= t2.
InequalityVerdict harnack_check(const FieldFn& u, int n, const std::vector<HarnackPair>& pairs,
                                double tolerance = 1e-10);

std::vector<HarnackPair> random_pairs(int n, int count, double lo, double hi, double t_lo, double t_hi,
                                      std::uint64_t seed);

// Half-line constant data, n = 1: erf(y/2 sqrt t2)+1 >= (t1/t2)^{1/2} e^{-(x-y)^2/4(t2-t1)} (erf(x/2 sqrt t_x)+1),
// with t_x = t2 as printed or t_x = t1 for the exact Harnack instance. Margin in log form.
InequalityVerdict harnack_erf_check(const std::vector<HarnackPair>& pairs, bool printed);

// ----- expectation level -----

// phi = C on [a, b] plus a field sampled on an interval grid of [a, b].
struct StochasticLine {
    double C = 10.0;
    double a = 0.0;
    double b = 1.0;
    CovarianceKernel kernel{KernelFamily::exponential, 0.1, 1.0};
    int nodes = 201;
};

// Realizations of u, u_x, u_t and u_xx at (x, t). Each realization is linear
// in the field, so FD on the realization equals FD on the functional weights.
struct PointSamples {
    std::vector<double> u, ux, ut, uxx;
};

PointSamples sample_point(const StochasticLine& line, double x, double t, int N, std::uint64_t seed, FdSteps h = {});

struct StochasticLiYauReport {
    InequalityVerdict product_form;  // E|grad u|^2 - E[u_t u] <= (n/2t) E|u|^2, margins in standard errors
    InequalityVerdict ratio_form;    // E|grad u|^2/E|u|^2 - E|u_t|/E|u| <= n/2t, batch standard errors
    InequalityVerdict deterministic; // the zeta = 0 solution at the same points
    std::size_t rejected = 0;        // samples with u <= 0, dropped
    std::size_t total = 0;
};

// Throws std::runtime_error if more than 1% of the samples are nonpositive.
StochasticLiYauReport stochastic_li_yau(const StochasticLine& line, const std::vector<double>& xs,
                                        const std::vector<double>& times, int N, std::uint64_t seed, FdSteps h = {});

// E|u(y,t2)|^2 >= E|u(x,t1)|^2 (t1/t2)^n e^{-|x-y|^2/(denom |t2-t1|)} per pair,
// from the per-sample difference. denom = 2 squares the deterministic
// inequality; denom = 4 is stronger and fails for some smooth data.
InequalityVerdict stochastic_harnack(const StochasticLine& line, const std::vector<HarnackPair>& pairs, int N,
                                     std::uint64_t seed, double denom = 2.0);

struct MeanResidual {
    Estimate ensemble;      // mean of u_t - u_xx over realizations
    double deterministic;   // same FD stencil on the zeta = 0 solution
    bool pass = false;      // |ensemble| <= |deterministic| + 4 se
};

MeanResidual ensemble_mean_residual(const StochasticLine& line, double x, double t, int N, std::uint64_t seed,
                                    FdSteps h = {});

}  // namespace shl
