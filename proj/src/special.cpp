#include "shl/special.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace shl {

namespace {

QuadratureRule build_gauss_legendre(int n) {
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
    return it->second;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    const QuadratureRule& ref = gauss_legendre(n);
    QuadratureRule r;
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    r.nodes.reserve(n);
    r.weights.reserve(n);
    for (int i = 0; i < n; ++i) {
        r.nodes.push_back(mid + half * ref.nodes[i]);
        r.weights.push_back(half * ref.weights[i]);
    }
    return r;
}

QuadratureRule composite_gauss(double a, double b, int panels, int order) {
    if (panels < 1) throw std::invalid_argument("composite_gauss: panels must be >= 1");
    const QuadratureRule& ref = gauss_legendre(order);
    QuadratureRule r;
    r.nodes.reserve(static_cast<std::size_t>(panels) * order);
    r.weights.reserve(static_cast<std::size_t>(panels) * order);
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double mid = a + (p + 0.5) * h;
        for (int i = 0; i < order; ++i) {
            r.nodes.push_back(mid + 0.5 * h * ref.nodes[i]);
            r.weights.push_back(0.5 * h * ref.weights[i]);
        }
    }
    return r;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels, int order) {
    QuadratureRule q = composite_gauss(a, b, panels, order);
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f(q.nodes[i]);
    return s;
}

std::vector<double> trapezoid_weights(double a, double b, int n) {
    if (n < 2) throw std::invalid_argument("trapezoid_weights: need at least 2 nodes");
    double h = (b - a) / (n - 1);
    std::vector<double> w(n, h);
    w.front() = w.back() = 0.5 * h;
    return w;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

std::vector<double> logspace(double log10_a, double log10_b, int n) {
    std::vector<double> v = linspace(log10_a, log10_b, n);
    for (double& x : v) x = std::pow(10.0, x);
    return v;
}

double interval_mass(double x, double a, double b, double t) {
    double s = 2.0 * std::sqrt(t);
    return 0.5 * (std::erf((x - a) / s) - std::erf((x - b) / s));
}

void LogSumExp::add(double log_term, double weight) {
    if (weight <= 0.0) return;
    double lt = log_term + std::log(weight);
    if (lt == -INFINITY) return;
    if (lt > max_) {
        scaled_ = scaled_ * std::exp(max_ - lt) + 1.0;
        max_ = lt;
    } else {
        scaled_ += std::exp(lt - max_);
    }
}

double LogSumExp::value() const {
    if (scaled_ == 0.0) return -INFINITY;
    return max_ + std::log(scaled_);
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
    std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_slope: need matching series of length >= 2");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

double double_factorial(int k) {
    double r = 1.0;
    for (int i = k; i > 1; i -= 2) r *= i;
    return r;
}

}  // namespace shl
