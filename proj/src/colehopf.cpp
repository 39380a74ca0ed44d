#include "shl/colehopf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shl/heat_kernel.hpp"
#include "shl/special.hpp"

namespace shl {

void ColeHopfParams::validate() const {
    if (!(a > 0.0)) throw std::invalid_argument("ColeHopfParams: a must be positive");
    if (b == 0.0 || !std::isfinite(b)) throw std::invalid_argument("ColeHopfParams: b must be nonzero");
}

double cole_hopf_forward(double psi, const ColeHopfParams& p) {
    p.validate();
    return std::exp(-(p.b / p.a) * psi);
}

double cole_hopf_inverse(double u, const ColeHopfParams& p) {
    p.validate();
    if (!(u > 0.0)) throw std::invalid_argument("cole_hopf_inverse: u must be positive");
    return -(p.a / p.b) * std::log(u);
}

std::vector<double> cole_hopf_forward(const std::vector<double>& psi, const ColeHopfParams& p) {
    std::vector<double> u(psi.size());
    std::transform(psi.begin(), psi.end(), u.begin(), [&](double v) { return cole_hopf_forward(v, p); });
    return u;
}

std::vector<double> cole_hopf_inverse(const std::vector<double>& u, const ColeHopfParams& p) {
    std::vector<double> psi(u.size());
    std::transform(u.begin(), u.end(), psi.begin(), [&](double v) { return cole_hopf_inverse(v, p); });
    return psi;
}

namespace {

// 1-D rule on [c - z_max s, c + z_max s] split at the breakpoints.
QuadratureRule axis_rule(double c, double s, const ConvolutionOptions& o) {
    const double lo = c - o.z_max * s, hi = c + o.z_max * s;
    std::vector<double> cuts{lo};
    for (double b : o.breakpoints)
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    const double width = std::min(o.panel, 0.5 * s);
    QuadratureRule r;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double len = cuts[k + 1] - cuts[k];
        if (len <= 0.0) continue;
        QuadratureRule q = composite_gauss(cuts[k], cuts[k + 1], std::max(1, static_cast<int>(std::ceil(len / width))));
        r.nodes.insert(r.nodes.end(), q.nodes.begin(), q.nodes.end());
        r.weights.insert(r.weights.end(), q.weights.begin(), q.weights.end());
    }
    return r;
}

// Calls f(y, log(weight * kernel)) over the tensor rule around x.
template <class F>
void for_each_node(double a, const std::vector<double>& x, double t, const ConvolutionOptions& o, F&& f) {
    const int n = static_cast<int>(x.size());
    if (n < 1 || n > 3) throw std::invalid_argument("heat convolution: dimension must be 1, 2 or 3");
    if (!(t > 0.0)) throw std::invalid_argument("heat convolution: t must be positive");
    const double at = a * t, s = 2.0 * std::sqrt(at);
    std::vector<QuadratureRule> rules;
    for (int i = 0; i < n; ++i) rules.push_back(axis_rule(x[i], s, o));
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> y(n);
    const double log_norm = -0.5 * n * std::log(4.0 * pi * at);
    while (true) {
        double lw = log_norm, r2 = 0.0;
        for (int i = 0; i < n; ++i) {
            y[i] = rules[i].nodes[idx[i]];
            lw += std::log(rules[i].weights[idx[i]]);
            r2 += (x[i] - y[i]) * (x[i] - y[i]);
        }
        f(y, lw - r2 / (4.0 * at));
        int i = 0;
        while (i < n && ++idx[i] == rules[i].nodes.size()) idx[i++] = 0;
        if (i == n) break;
    }
}

}  // namespace

double log_heat_convolution_exp(const FieldFn& g, double a, const std::vector<double>& x, double t,
                                const ConvolutionOptions& o) {
    LogSumExp acc;
    for_each_node(a, x, t, o, [&](const std::vector<double>& y, double lw) { acc.add(lw + g(y, 0.0)); });
    const double v = acc.value();
    if (!std::isfinite(v)) throw std::runtime_error("log_heat_convolution_exp: integral underflowed");
    return v;
}

double heat_evolve(const FieldFn& I, double a, const std::vector<double>& x, double t, const ConvolutionOptions& o) {
    double sum = 0.0;
    for_each_node(a, x, t, o, [&](const std::vector<double>& y, double lw) { sum += std::exp(lw) * I(y, 0.0); });
    return sum;
}

double quasilinear_value(const FieldFn& I, const ColeHopfParams& p, const std::vector<double>& x, double t,
                         const ConvolutionOptions& o) {
    p.validate();
    const double k = p.b / p.a;
    FieldFn g = [&](const std::vector<double>& y, double) { return -k * I(y, 0.0); };
    return -(p.a / p.b) * log_heat_convolution_exp(g, p.a, x, t, o);
}

Eigen::MatrixXd solve_quasilinear(const FieldFn& I, const ColeHopfParams& p,
                                  const std::vector<std::vector<double>>& points, const std::vector<double>& times,
                                  const ConvolutionOptions& o) {
    Eigen::MatrixXd out(times.size(), points.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        for (std::size_t xi = 0; xi < points.size(); ++xi) out(ti, xi) = quasilinear_value(I, p, points[xi], times[ti], o);
    return out;
}

double quasilinear_residual(const FieldFn& psi, const ColeHopfParams& p, const std::vector<double>& x, double t,
                            FdSteps h) {
    FdDerivatives d = fd_derivatives(psi, x, t, h);
    return d.ut - p.a * d.laplacian + p.b * d.grad2();
}

TransformConsistency transform_consistency(const FieldFn& u, const ColeHopfParams& p,
                                           const std::vector<std::vector<double>>& points,
                                           const std::vector<double>& times, FdSteps h) {
    p.validate();
    FieldFn psi = [&](const std::vector<double>& x, double t) { return cole_hopf_inverse(u(x, t), p); };
    TransformConsistency r;
    double umin = INFINITY;
    for (double t : times)
        for (const auto& x : points) {
            FdDerivatives d = fd_derivatives(u, x, t, h);
            umin = std::min(umin, d.u);
            r.linear_residual = std::max(r.linear_residual, std::abs(d.ut - p.a * d.laplacian));
            r.quasilinear_residual = std::max(r.quasilinear_residual, std::abs(quasilinear_residual(psi, p, x, t, h)));
        }
    r.C = p.a / (std::abs(p.b) * umin);
    r.observed_ratio = r.linear_residual > 0.0 ? r.quasilinear_residual / r.linear_residual : 0.0;
    r.pass = r.quasilinear_residual <= r.C * r.linear_residual + 1e-6;
    return r;
}

// ----- Burgers -----

BurgersSolver::BurgersSolver(Fn1 I, double a, double lo, double hi, int panels)
    : I_(std::move(I)), a_(a), lo_(lo), hi_(hi) {
    if (!(a > 0.0)) throw std::invalid_argument("BurgersSolver: a must be positive");
    if (!(hi > lo) || panels < 1) throw std::invalid_argument("BurgersSolver: need lo < hi and panels >= 1");
    QuadratureRule q = composite_gauss(lo, hi, panels);
    nodes_ = q.nodes;
    weights_ = q.weights;
    J_.resize(nodes_.size());
    const double h = (hi - lo) / panels;
    double before = 0.0;  // J at the start of the current panel
    for (int k = 0; k < panels; ++k) {
        const double p0 = lo + k * h;
        for (std::size_t j = k * 8; j < static_cast<std::size_t>((k + 1) * 8); ++j) {
            QuadratureRule g = gauss_legendre(8, p0, nodes_[j]);
            double s = 0.0;
            for (std::size_t m = 0; m < g.nodes.size(); ++m) s += g.weights[m] * I_(g.nodes[m]);
            J_[j] = before + s;
        }
        QuadratureRule g = gauss_legendre(8, p0, p0 + h);
        for (std::size_t m = 0; m < g.nodes.size(); ++m) before += g.weights[m] * I_(g.nodes[m]);
    }
    J_hi_ = before;
}

double BurgersSolver::potential(double y) const {
    if (y >= hi_) return J_hi_;
    const double yc = std::clamp(y, lo_, hi_);
    const int panels = static_cast<int>(nodes_.size() / 8);
    const double h = (hi_ - lo_) / panels;
    const int k = std::min(panels - 1, static_cast<int>((yc - lo_) / h));
    double s = 0.0;
    for (int m = 0; m < k; ++m) {
        QuadratureRule g = gauss_legendre(8, lo_ + m * h, lo_ + (m + 1) * h);
        for (std::size_t j = 0; j < g.nodes.size(); ++j) s += g.weights[j] * I_(g.nodes[j]);
    }
    QuadratureRule g = gauss_legendre(8, lo_ + k * h, yc);
    for (std::size_t j = 0; j < g.nodes.size(); ++j) s += g.weights[j] * I_(g.nodes[j]);
    return s;
}

double BurgersSolver::ratio(double x, double t, bool printed) const {
    if (!(t > 0.0)) throw std::invalid_argument("BurgersSolver: t must be positive");
    const double at = a_ * t;
    const double h = (hi_ - lo_) / static_cast<double>(nodes_.size() / 8);
    if (std::sqrt(at) < h) throw std::invalid_argument("BurgersSolver: panels too coarse for a t");
    const double spread = printed ? 4.0 * t : 4.0 * at;
    LogSumExp den, pos, neg;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        const double d = x - nodes_[j];
        const double le = std::log(weights_[j]) - d * d / spread - J_[j] / (2.0 * a_);
        den.add(le);
        const double m = (printed ? std::abs(d) : d) / t;
        if (m > 0.0) pos.add(le, m);
        if (m < 0.0) neg.add(le, -m);
    }
    if (!printed) {
        // I = 0 off [lo, hi]: J is constant there and both tails are closed form.
        const double s = 2.0 * std::sqrt(at), jhi = J_hi_ / (2.0 * a_);
        den.add(0.5 * std::log(pi * at), std::erfc((x - lo_) / s));
        den.add(0.5 * std::log(pi * at) - jhi, std::erfc((hi_ - x) / s));
        pos.add(-(x - lo_) * (x - lo_) / (4.0 * at), 2.0 * a_);
        neg.add(-(x - hi_) * (x - hi_) / (4.0 * at) - jhi, 2.0 * a_);
    }
    const double ld = den.value();
    return std::exp(pos.value() - ld) - std::exp(neg.value() - ld);
}

double BurgersSolver::velocity(double x, double t) const { return ratio(x, t, false); }
double BurgersSolver::velocity_printed(double x, double t) const { return ratio(x, t, true); }

namespace {

double godunov(double l, double r) {
    auto f = [](double v) { return 0.5 * v * v; };
    if (l <= r) {
        if (l > 0.0) return f(l);
        if (r < 0.0) return f(r);
        return 0.0;
    }
    return std::max(f(l), f(r));
}

}  // namespace

BurgersFd burgers_fd(const Fn1& I, double a, double lo, double hi, int cells, const std::vector<double>& times,
                     BurgersBoundary bc) {
    if (!(a > 0.0) || !(hi > lo) || cells < 4) throw std::invalid_argument("burgers_fd: bad parameters");
    if (!std::is_sorted(times.begin(), times.end())) throw std::invalid_argument("burgers_fd: times must be sorted");
    BurgersFd out;
    out.dx = (hi - lo) / cells;
    out.times = times;
    const double dx = out.dx;
    std::vector<double> v(cells), flux(cells + 1);
    for (int i = 0; i < cells; ++i) {
        out.centers.push_back(lo + (i + 0.5) * dx);
        QuadratureRule g = gauss_legendre(8, lo + i * dx, lo + (i + 1) * dx);
        double s = 0.0;
        for (std::size_t m = 0; m < g.nodes.size(); ++m) s += g.weights[m] * I(g.nodes[m]);
        v[i] = s / dx;
    }
    out.values.resize(times.size(), cells);
    double t = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        while (t < times[k]) {
            double vmax = 0.0;
            for (double w : v) vmax = std::max(vmax, std::abs(w));
            double dt = 0.4 * std::min(vmax > 0.0 ? dx / vmax : INFINITY, dx * dx / (2.0 * a));
            dt = std::min(dt, times[k] - t);
            for (int i = 0; i <= cells; ++i) {
                double l, r;
                if (bc == BurgersBoundary::periodic) {
                    l = v[(i - 1 + cells) % cells];
                    r = v[i % cells];
                } else {
                    l = v[std::max(i - 1, 0)];
                    r = v[std::min(i, cells - 1)];
                }
                flux[i] = godunov(l, r) - a * (r - l) / dx;
            }
            for (int i = 0; i < cells; ++i) v[i] -= dt / dx * (flux[i + 1] - flux[i]);
            t += dt;
            ++out.steps;
        }
        for (int i = 0; i < cells; ++i) out.values(k, i) = v[i];
    }
    return out;
}

// ----- random initial data -----

Estimate StochasticColeHopf::moment(int p, std::size_t ti, std::size_t xi) const {
    Eigen::VectorXd c = psi.col(static_cast<Eigen::Index>(column(ti, xi)));
    return abs_moment(std::span<const double>(c.data(), static_cast<std::size_t>(c.size())), p);
}

namespace {

const std::pair<double, double>& interval_bounds(const Grid& g) {
    if (g.kind != DomainKind::interval || g.bounds.empty())
        throw std::invalid_argument("Cole-Hopf with random data: grid must be an interval");
    return g.bounds[0];
}

// log u_hat; `log_factor[k]` is log of the data factor at node k.
double log_u_hat(const Grid& g, const std::vector<double>& log_factor, double a, double x, double t) {
    const auto& [lo, hi] = interval_bounds(g);
    const double at = a * t;
    LogSumExp acc;
    const double outside = 1.0 - interval_mass(x, lo, hi, at);
    if (outside > 0.0) acc.add(std::log(outside));
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double y = g.coords[k];
        acc.add(std::log(g.weights[k]) + log_heat_kernel(1, (x - y) * (x - y), at) + log_factor[k]);
    }
    return acc.value();
}

}  // namespace

double cole_hopf_grid_value(const Grid& g, const std::vector<double>& data, const ColeHopfParams& p, double x,
                            double t) {
    p.validate();
    std::vector<double> lf(data.size());
    for (std::size_t k = 0; k < data.size(); ++k) lf[k] = -(p.b / p.a) * data[k];
    return -(p.a / p.b) * log_u_hat(g, lf, p.a, x, t);
}

StochasticColeHopf stochastic_cole_hopf(const Fn1& phi, const FieldSampler& sampler, const ColeHopfParams& p,
                                        const std::vector<double>& points, const std::vector<double>& times, int N,
                                        std::uint64_t seed) {
    p.validate();
    if (N < 1) throw std::invalid_argument("stochastic_cole_hopf: N must be positive");
    const Grid& g = sampler.grid();
    interval_bounds(g);
    StochasticColeHopf r;
    r.points = points;
    r.times = times;
    const Eigen::Index cols = static_cast<Eigen::Index>(points.size() * times.size());
    r.psi.resize(N, cols);
    r.u.resize(N, cols);
    std::vector<double> base(g.size()), lf(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) base[k] = phi(g.coords[k]);
    for (int i = 0; i < N; ++i) {
        FieldSample s = sampler.sample({seed, static_cast<std::uint64_t>(i)});
        for (std::size_t k = 0; k < g.size(); ++k) lf[k] = -(p.b / p.a) * (base[k] + s.values[k]);
        for (std::size_t ti = 0; ti < times.size(); ++ti)
            for (std::size_t xi = 0; xi < points.size(); ++xi) {
                const double lu = log_u_hat(g, lf, p.a, points[xi], times[ti]);
                const Eigen::Index c = static_cast<Eigen::Index>(r.column(ti, xi));
                r.u(i, c) = std::exp(lu);
                r.psi(i, c) = -(p.a / p.b) * lu;
            }
    }
    return r;
}

double lognormal_mean_u(const Fn1& phi, const FieldSampler& sampler, const ColeHopfParams& p, double x, double t) {
    p.validate();
    const Grid& g = sampler.grid();
    const double k = p.b / p.a;
    std::vector<double> lf(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double var = sampler.factor().row(static_cast<Eigen::Index>(j)).squaredNorm();
        lf[j] = -k * phi(g.coords[j]) + 0.5 * k * k * var;
    }
    return std::exp(log_u_hat(g, lf, p.a, x, t));
}

}  // namespace shl
