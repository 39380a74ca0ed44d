#include "shl/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "shl/cauchy.hpp"
#include "shl/rng.hpp"
#include "shl/special.hpp"

namespace shl {

double FdDerivatives::grad2() const {
    double s = 0.0;
    for (double g : grad) s += g * g;
    return s;
}

FdDerivatives fd_derivatives(const FieldFn& u, const std::vector<double>& x, double t, FdSteps h) {
    FdDerivatives d;
    d.u = u(x, t);
    d.ut = (u(x, t + h.dt) - u(x, t - h.dt)) / (2.0 * h.dt);
    std::vector<double> xp = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h.dx;
        const double up = u(xp, t);
        xp[i] = x[i] - h.dx;
        const double um = u(xp, t);
        xp[i] = x[i];
        d.grad.push_back((up - um) / (2.0 * h.dx));
        d.laplacian += (up - 2.0 * d.u + um) / (h.dx * h.dx);
    }
    return d;
}

double BumpSolution::operator()(const std::vector<double>& x, double t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        double r2 = 0.0;
        for (int k = 0; k < n; ++k) r2 += (x[k] - centers[i][k]) * (x[k] - centers[i][k]);
        s += weights[i] * heat_kernel(n, r2, t + shifts[i]);
    }
    return s;
}

BumpSolution random_bumps(int n, int count, double box, std::uint64_t seed) {
    auto eng = make_engine({seed, 0});
    std::uniform_real_distribution<double> pos(-box, box), w(0.5, 2.0), s(0.1, 1.0);
    BumpSolution b;
    b.n = n;
    for (int i = 0; i < count; ++i) {
        std::vector<double> c(n);
        for (double& v : c) v = pos(eng);
        b.centers.push_back(c);
        b.weights.push_back(w(eng));
        b.shifts.push_back(s(eng));
    }
    return b;
}

namespace {

std::vector<double> with_time(std::vector<double> x, double t) {
    x.push_back(t);
    return x;
}

void require_positive(double u, const std::vector<double>& x, double t) {
    if (!(u > 0.0)) {
        std::ostringstream os;
        os << "nonpositive solution value " << u << " at t=" << t << ", x[0]=" << (x.empty() ? 0.0 : x[0]);
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

InequalityVerdict log_identities_check(const FieldFn& u, const std::vector<std::vector<double>>& points,
                                       const std::vector<double>& times, FdSteps h, double tolerance) {
    InequalityVerdict v;
    v.name = "log_identities";
    v.sweep = std::to_string(points.size()) + " points x " + std::to_string(times.size()) + " times, dx=" +
              std::to_string(h.dx) + ", dt=" + std::to_string(h.dt);
    v.tolerance = tolerance;
    FieldFn logu = [&](const std::vector<double>& x, double t) {
        const double val = u(x, t);
        require_positive(val, x, t);
        return std::log(val);
    };
    FieldFn ulogu = [&](const std::vector<double>& x, double t) {
        const double val = u(x, t);
        return val * std::log(val);
    };
    for (double t : times)
        for (const auto& x : points) {
            FdDerivatives d = fd_derivatives(u, x, t, h);
            require_positive(d.u, x, t);
            FdDerivatives dl = fd_derivatives(logu, x, t, h);
            FdDerivatives dg = fd_derivatives(ulogu, x, t, h);
            const double box_log = dl.ut - dl.laplacian;
            const double box_ulogu = dg.ut - dg.laplacian;
            const double d1 = std::abs(box_log - d.grad2() / (d.u * d.u));
            const double d2 = std::abs(-d.u * box_ulogu - d.grad2());
            const double d3 = std::abs(d.u * d.u * box_log + d.u * box_ulogu);
            record_margin(v, -std::max({d1, d2, d3}), with_time(x, t));
        }
    finish(v);
    return v;
}

InequalityVerdict li_yau_check(const FieldFn& u, int n, const std::vector<std::vector<double>>& points,
                               const std::vector<double>& times, FdSteps h) {
    InequalityVerdict v;
    v.name = "li_yau";
    v.sweep = std::to_string(points.size()) + " points x " + std::to_string(times.size()) + " times";
    const FdSteps fine{0.5 * h.dx, 0.5 * h.dt};
    double budget = 0.0;
    for (double t : times) {
        if (!(t > h.dt)) throw std::invalid_argument("li_yau_check: need t > dt");
        for (const auto& x : points) {
            FdDerivatives c = fd_derivatives(u, x, t, h);
            FdDerivatives f = fd_derivatives(u, x, t, fine);
            require_positive(f.u, x, t);
            const double lc = c.grad2() / (c.u * c.u) - c.ut / c.u;
            const double lf = f.grad2() / (f.u * f.u) - f.ut / f.u;
            budget = std::max(budget, 2.0 * std::abs(lc - lf));
            record_margin(v, n / (2.0 * t) - lf, with_time(x, t));
        }
    }
    v.tolerance = 1e-6 + budget;
    v.note = "FD budget " + std::to_string(budget);
    finish(v);
    return v;
}

double li_yau_constant_data_printed(double x, double t) {
    const double e = std::erf(x / (2.0 * std::sqrt(t))) + 1.0;
    return std::exp(-x * x / (2.0 * t)) / pi / (e * e) + x * std::exp(-x * x / (4.0 * t)) / (2.0 * std::sqrt(pi * t)) / e;
}

KernelIntegralForm li_yau_kernel_integral_form(double a, double b, double x, double t, const BoundConstants& c) {
    if (!(b > a) || !(t > 0.0)) throw std::invalid_argument("li_yau_kernel_integral_form: need a < b, t > 0");
    const int panels = std::clamp(static_cast<int>(std::ceil((b - a) / (0.25 * std::sqrt(t)))), 8, 20000);
    QuadratureRule q = composite_gauss(a, b, panels);
    GaussianSurrogate lo{c.lambda1, c.rate1}, hi{c.lambda2, c.rate2};
    KernelIntegralForm k;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double r = x - q.nodes[i], w = q.weights[i];
        const double h = heat_kernel(1, r * r, t);
        const double hx = -r / (2.0 * t) * h;
        const double ht = h * (r * r / (4.0 * t * t) - 1.0 / (2.0 * t));
        k.grad_sq += w * hx * hx;
        k.dt_sq += w * ht * ht;
        k.h_sq += w * h * h;
        const double g = lo.gradient(1, std::abs(r), t);
        k.lower += w * g * g;
        const double s = hi.value(1, r * r, t);
        k.upper += w * s * s;
    }
    k.geometric = std::sqrt(k.dt_sq * k.h_sq);
    k.rhs = 0.5 / t * k.h_sq;
    k.ordered = k.grad_sq <= k.geometric && k.geometric <= k.rhs;
    k.sandwich = k.lower <= k.geometric && k.geometric <= k.upper;
    return k;
}

InequalityVerdict harnack_check(const FieldFn& u, int n, const std::vector<HarnackPair>& pairs, double tolerance) {
    InequalityVerdict v;
    v.name = "harnack";
    v.sweep = std::to_string(pairs.size()) + " point pairs";
    v.tolerance = tolerance;
    for (const auto& p : pairs) {
        if (!(p.t1 < p.t2)) throw std::invalid_argument("harnack_check: need t1 < t2");
        const double ux = u(p.x, p.t1), uy = u(p.y, p.t2);
        require_positive(ux, p.x, p.t1);
        require_positive(uy, p.y, p.t2);
        const double d2 = distance2(p.x, p.y);
        const double rhs = std::log(ux) + 0.5 * n * std::log(p.t1 / p.t2) - d2 / (4.0 * (p.t2 - p.t1));
        std::vector<double> pt = p.x;
        pt.insert(pt.end(), p.y.begin(), p.y.end());
        pt.push_back(p.t1);
        pt.push_back(p.t2);
        record_margin(v, std::log(uy) - rhs, pt);
    }
    finish(v);
    return v;
}

std::vector<HarnackPair> random_pairs(int n, int count, double lo, double hi, double t_lo, double t_hi,
                                      std::uint64_t seed) {
    auto eng = make_engine({seed, 1});
    std::uniform_real_distribution<double> pos(lo, hi), tim(t_lo, t_hi);
    std::vector<HarnackPair> out;
    while (static_cast<int>(out.size()) < count) {
        HarnackPair p;
        for (int k = 0; k < n; ++k) p.x.push_back(pos(eng));
        for (int k = 0; k < n; ++k) p.y.push_back(pos(eng));
        double a = tim(eng), b = tim(eng);
        if (std::abs(a - b) < 1e-3) continue;
        p.t1 = std::min(a, b);
        p.t2 = std::max(a, b);
        out.push_back(std::move(p));
    }
    return out;
}

InequalityVerdict harnack_erf_check(const std::vector<HarnackPair>& pairs, bool printed) {
    InequalityVerdict v;
    v.name = printed ? "harnack_erf_printed" : "harnack_erf_exact";
    v.sweep = std::to_string(pairs.size()) + " point pairs, half-line constant data";
    v.tolerance = 1e-12;
    for (const auto& p : pairs) {
        if (!(p.t1 < p.t2)) throw std::invalid_argument("harnack_erf_check: need t1 < t2");
        const double x = p.x.at(0), y = p.y.at(0);
        const double tx = printed ? p.t2 : p.t1;
        const double lhs = std::log(std::erfc(-y / (2.0 * std::sqrt(p.t2))));
        const double rhs = 0.5 * std::log(p.t1 / p.t2) - (x - y) * (x - y) / (4.0 * (p.t2 - p.t1)) +
                           std::log(std::erfc(-x / (2.0 * std::sqrt(tx))));
        record_margin(v, lhs - rhs, {x, y, p.t1, p.t2});
    }
    finish(v);
    return v;
}

// ----- expectation level -----

namespace {

Grid line_grid(const StochasticLine& line) { return interval_grid(line.a, line.b, line.nodes); }

// Samples of u at the given (point, time) pairs; column j for pair j.
Eigen::MatrixXd sample_pairs(const StochasticLine& line, const std::vector<std::pair<double, double>>& xt, int N,
                             std::uint64_t seed) {
    auto grid = std::make_shared<Grid>(line_grid(line));
    const Eigen::Index m = static_cast<Eigen::Index>(xt.size());
    Eigen::VectorXd off(m);
    for (Eigen::Index j = 0; j < m; ++j) off[j] = line.C * interval_mass(xt[j].first, line.a, line.b, xt[j].second);
    if (line.kernel.zeta == 0.0) return off.transpose().replicate(N, 1);
    Eigen::MatrixXd W(static_cast<Eigen::Index>(grid->size()), m);
    for (Eigen::Index j = 0; j < m; ++j)
        W.col(j) = convolution_functionals(*grid, {{xt[j].first}}, {xt[j].second}).col(0);
    FieldSampler sampler(grid, line.kernel);
    return sample_functionals(sampler, W, off, N, seed);
}

double det_u(const StochasticLine& line, double x, double t) { return line.C * interval_mass(x, line.a, line.b, t); }

}  // namespace

PointSamples sample_point(const StochasticLine& line, double x, double t, int N, std::uint64_t seed, FdSteps h) {
    if (!(t > h.dt)) throw std::invalid_argument("sample_point: need t > dt");
    // Stencil: centre, x +- dx, t +- dt.
    Eigen::MatrixXd S = sample_pairs(line, {{x, t}, {x + h.dx, t}, {x - h.dx, t}, {x, t + h.dt}, {x, t - h.dt}}, N, seed);
    PointSamples p;
    for (int i = 0; i < N; ++i) {
        p.u.push_back(S(i, 0));
        p.ux.push_back((S(i, 1) - S(i, 2)) / (2.0 * h.dx));
        p.uxx.push_back((S(i, 1) - 2.0 * S(i, 0) + S(i, 2)) / (h.dx * h.dx));
        p.ut.push_back((S(i, 3) - S(i, 4)) / (2.0 * h.dt));
    }
    return p;
}

StochasticLiYauReport stochastic_li_yau(const StochasticLine& line, const std::vector<double>& xs,
                                        const std::vector<double>& times, int N, std::uint64_t seed, FdSteps h) {
    StochasticLiYauReport r;
    r.product_form.name = "stochastic_li_yau_product";
    r.ratio_form.name = "stochastic_li_yau_ratio";
    r.product_form.sweep = r.ratio_form.sweep =
        std::to_string(xs.size()) + " points x " + std::to_string(times.size()) + " times, N=" + std::to_string(N);
    double se_prod = 0.0, se_ratio = 0.0;
    std::uint64_t stream_block = 0;
    for (double t : times)
        for (double x : xs) {
            PointSamples p = sample_point(line, x, t, N, seed + stream_block++, h);
            std::vector<double> d, ux2, uu, aut, au;
            for (int i = 0; i < N; ++i) {
                ++r.total;
                if (!(p.u[i] > 0.0)) {
                    ++r.rejected;
                    continue;
                }
                d.push_back(p.ux[i] * p.ux[i] - p.ut[i] * p.u[i] - 0.5 / t * p.u[i] * p.u[i]);
                ux2.push_back(p.ux[i] * p.ux[i]);
                uu.push_back(p.u[i] * p.u[i]);
                aut.push_back(std::abs(p.ut[i]));
                au.push_back(std::abs(p.u[i]));
            }
            if (r.rejected > r.total / 100) {
                std::ostringstream os;
                os << "stochastic_li_yau: " << r.rejected << " of " << r.total
                   << " samples nonpositive; raise C relative to sqrt(zeta)";
                throw std::runtime_error(os.str());
            }
            Estimate e = mean_estimate(d);
            se_prod = std::max(se_prod, e.stderr_);
            record_margin(r.product_form, -e.value, {x, t});

            auto ratio = [&](std::size_t lo, std::size_t hi) {
                double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
                for (std::size_t i = lo; i < hi; ++i) {
                    s1 += ux2[i];
                    s2 += uu[i];
                    s3 += aut[i];
                    s4 += au[i];
                }
                return s1 / s2 - s3 / s4;
            };
            const std::size_t M = d.size(), B = 20;
            std::vector<double> batches;
            for (std::size_t k = 0; k < B; ++k) batches.push_back(ratio(k * M / B, (k + 1) * M / B));
            se_ratio = std::max(se_ratio, mean_estimate(batches).stderr_);
            record_margin(r.ratio_form, 0.5 / t - ratio(0, M), {x, t});
        }
    r.product_form.tolerance = sigma_margin * se_prod;
    r.ratio_form.tolerance = sigma_margin * se_ratio;
    r.product_form.note = r.ratio_form.note = "tolerance is 4 times the largest standard error in the sweep";
    finish(r.product_form);
    finish(r.ratio_form);

    std::vector<std::vector<double>> pts;
    for (double x : xs) pts.push_back({x});
    r.deterministic = li_yau_check([&](const std::vector<double>& x, double t) { return det_u(line, x[0], t); }, 1, pts,
                                   times, h);
    return r;
}

InequalityVerdict stochastic_harnack(const StochasticLine& line, const std::vector<HarnackPair>& pairs, int N,
                                     std::uint64_t seed, double denom) {
    InequalityVerdict v;
    v.name = "stochastic_harnack";
    v.sweep = std::to_string(pairs.size()) + " point pairs, N=" + std::to_string(N) +
              ", exponent denominator " + std::to_string(denom);
    std::vector<std::pair<double, double>> xt;
    for (const auto& p : pairs) {
        if (!(p.t1 < p.t2)) throw std::invalid_argument("stochastic_harnack: need t1 < t2");
        const double side = std::exp(-distance2(p.x, p.y) / (2.0 * (p.t2 - p.t1)));
        if (!(side <= 1.0)) throw std::logic_error("stochastic_harnack: side condition failed");
        xt.push_back({p.x.at(0), p.t1});
        xt.push_back({p.y.at(0), p.t2});
    }
    Eigen::MatrixXd S = sample_pairs(line, xt, N, seed);
    double se_max = 0.0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const auto& p = pairs[j];
        const double c = (p.t1 / p.t2) * std::exp(-distance2(p.x, p.y) / (denom * (p.t2 - p.t1)));
        std::vector<double> d(N), uy2(N);
        for (int i = 0; i < N; ++i) {
            const double ux = S(i, 2 * j), uy = S(i, 2 * j + 1);
            uy2[i] = uy * uy;
            d[i] = uy * uy - c * ux * ux;
        }
        const double scale = mean_estimate(uy2).value;
        Estimate e = mean_estimate(d);
        se_max = std::max(se_max, e.stderr_ / scale);
        record_margin(v, e.value / scale, {p.x[0], p.y[0], p.t1, p.t2});
    }
    v.tolerance = sigma_margin * se_max;
    v.note = "margins relative to E|u(y,t2)|^2; tolerance is 4 times the largest relative standard error";
    finish(v);
    return v;
}

MeanResidual ensemble_mean_residual(const StochasticLine& line, double x, double t, int N, std::uint64_t seed,
                                    FdSteps h) {
    PointSamples p = sample_point(line, x, t, N, seed, h);
    std::vector<double> res(N);
    for (int i = 0; i < N; ++i) res[i] = p.ut[i] - p.uxx[i];
    MeanResidual m;
    m.ensemble = mean_estimate(res);
    FdDerivatives d = fd_derivatives([&](const std::vector<double>& y, double s) { return det_u(line, y[0], s); }, {x},
                                     t, h);
    m.deterministic = d.ut - d.laplacian;
    m.pass = std::abs(m.ensemble.value) <= std::abs(m.deterministic) + sigma_margin * m.ensemble.stderr_;
    return m;
}

}  // namespace shl
