// Quadrature rules and small numeric helpers shared by every module.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace shl {

inline constexpr double pi = std::numbers::pi;

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [-1,1]; nodes ascending.
const QuadratureRule& gauss_legendre(int n);

// Gauss-Legendre rule mapped to [a,b].
QuadratureRule gauss_legendre(int n, double a, double b);

// Composite Gauss-Legendre on [a,b] with `panels` equal panels of `order` points.
QuadratureRule composite_gauss(double a, double b, int panels, int order = 8);

double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels, int order = 8);

// Trapezoid weights for `n` uniform nodes on [a,b].
std::vector<double> trapezoid_weights(double a, double b, int n);

std::vector<double> linspace(double a, double b, int n);
std::vector<double> logspace(double log10_a, double log10_b, int n);

// Interval kernel mass: integral over [a,b] of the 1-D heat kernel centred at x.
double interval_mass(double x, double a, double b, double t);

// Streaming log-sum-exp.
class LogSumExp {
public:
    void add(double log_term, double weight = 1.0);
    double value() const;  // log of the accumulated sum; -inf if empty
private:
    double max_ = -INFINITY;
    double scaled_ = 0.0;
};

// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

double double_factorial(int k);

}  // namespace shl
