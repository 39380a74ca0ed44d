#include "shl/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shl/heat_kernel.hpp"
#include "shl/special.hpp"

namespace shl {

namespace {

constexpr double data_scale = 0.05;  // finest feature size assumed for callable data
constexpr int max_panels = 20000;

int panel_count(double len, double t) {
    double width = std::min(0.5 * std::sqrt(t), std::max(data_scale, 0.05 * std::sqrt(t)));
    return std::clamp(static_cast<int>(std::ceil(len / width)), 2, max_panels);
}

template <class F>
double windowed(double a, double b, double x, double t, F&& integrand) {
    const double half = 2.0 * truncation_K * std::sqrt(t);
    const double lo = std::max(a, x - half), hi = std::min(b, x + half);
    if (!(hi > lo)) return 0.0;
    QuadratureRule q = composite_gauss(lo, hi, panel_count(hi - lo, t), 8);
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * integrand(q.nodes[i]);
    return s;
}

}  // namespace

InitialData InitialData::constant(double C) {
    InitialData d;
    d.phi = [C](double) { return C; };
    d.preset = "constant";
    return d;
}

InitialData InitialData::laser(double beta, double alpha) {
    InitialData d;
    d.phi = [beta, alpha](double z) { return beta * std::exp(-alpha * z); };
    d.preset = "laser";
    return d;
}

double convolve_1d(const Fn1& phi, double a, double b, double x, double t) {
    if (t <= 0.0) throw std::invalid_argument("convolve_1d: t must be positive");
    return windowed(a, b, x, t, [&](double y) { return heat_kernel(1, (x - y) * (x - y), t) * phi(y); });
}

double convolve_1d_dx(const Fn1& phi, double a, double b, double x, double t) {
    if (t <= 0.0) throw std::invalid_argument("convolve_1d_dx: t must be positive");
    return windowed(a, b, x, t, [&](double y) {
        return -(x - y) / (2.0 * t) * heat_kernel(1, (x - y) * (x - y), t) * phi(y);
    });
}

double duhamel_1d(const Fn2& f, double a, double b, double x, double t) {
    if (t <= 0.0) return 0.0;
    QuadratureRule q = composite_gauss(0.0, std::sqrt(t), 16, 8);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double sigma = q.nodes[i];
        const double tau = sigma * sigma;
        const double s = t - tau;
        double g;
        if (tau < 1e-6) {
            g = f(x, s) * interval_mass(x, a, b, tau);
        } else {
            g = windowed(a, b, x, tau, [&](double y) { return heat_kernel(1, (x - y) * (x - y), tau) * f(y, s); });
        }
        acc += q.weights[i] * 2.0 * sigma * g;
    }
    return acc;
}

SolutionField solve_deterministic(const InitialData& data, double a, double b,
                                  std::shared_ptr<const Grid> eval, const std::vector<double>& times) {
    if (eval->dim != 1) throw std::invalid_argument("solve_deterministic: eval grid must be 1-D");
    SolutionField s;
    s.grid = eval;
    s.times = times;
    s.provenance = Provenance::deterministic;
    for (double t : times) {
        if (t <= 0.0) throw std::invalid_argument("solve_deterministic: times must be positive");
        std::vector<double> row(eval->size());
        for (std::size_t i = 0; i < eval->size(); ++i) row[i] = convolve_1d(data.phi, a, b, eval->coords[i], t);
        s.values.push_back(std::move(row));
    }
    return s;
}

SolutionField solve_inhomogeneous(const InitialData& data, const Fn2& source, double a, double b,
                                  std::shared_ptr<const Grid> eval, const std::vector<double>& times) {
    SolutionField s = solve_deterministic(data, a, b, eval, times);
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t i = 0; i < eval->size(); ++i)
            s.values[k][i] += duhamel_1d(source, a, b, eval->coords[i], times[k]);
    return s;
}

double convolution_weight(const Grid& src, std::size_t j, std::span<const double> x, double t) {
    if (src.kind == DomainKind::ring) {
        return ring_kernel(x[0] - src.angle[j], t, ring_truncation(t)) * src.weights[j];
    }
    return heat_kernel(src.dim, distance2(x, src.point(j)), t) * src.weights[j];
}

Eigen::MatrixXd convolution_functionals(const Grid& src, const std::vector<std::vector<double>>& points,
                                        const std::vector<double>& times, const Fn1* multiplier) {
    const std::size_t m = src.size();
    Eigen::MatrixXd W(m, points.size() * times.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double t = times[k];
            const int K = src.kind == DomainKind::ring ? ring_truncation(t) : 0;
            const Eigen::Index c = static_cast<Eigen::Index>(p * times.size() + k);
            for (std::size_t j = 0; j < m; ++j) {
                double w;
                if (src.kind == DomainKind::ring) {
                    w = ring_kernel(points[p][0] - src.angle[j], t, K) * src.weights[j];
                } else {
                    w = heat_kernel(src.dim, distance2(points[p], src.point(j)), t) * src.weights[j];
                }
                if (multiplier) w *= (*multiplier)(src.kind == DomainKind::ring ? src.angle[j] : src.coords[j * src.dim]);
                W(static_cast<Eigen::Index>(j), c) = w;
            }
        }
    }
    return W;
}

SolutionField solve_with_field(const InitialData& data, const FieldSample& field,
                               std::shared_ptr<const Grid> eval, const std::vector<double>& times) {
    if (data.perturbation == Perturbation::none)
        throw std::invalid_argument("solve_with_field: perturbation must be additive or multiplicative");
    const Grid& src = *field.grid;
    if (src.dim != 1 || src.bounds.empty()) throw std::invalid_argument("solve_with_field: noise grid must be an interval");
    const double a = src.bounds[0].first, b = src.bounds[0].second;
    SolutionField s;
    s.grid = eval;
    s.times = times;
    s.provenance = Provenance::realization;
    s.seed = field.seed;
    for (double t : times) {
        std::vector<double> row(eval->size(), 0.0);
        for (std::size_t i = 0; i < eval->size(); ++i) {
            const double x = eval->coords[i];
            double noise = 0.0;
            for (std::size_t j = 0; j < src.size(); ++j) {
                double y = src.coords[j];
                double w = heat_kernel(1, (x - y) * (x - y), t) * src.weights[j] * field.values[j];
                if (data.perturbation == Perturbation::multiplicative) w *= data.phi(y);
                noise += w;
            }
            double det = data.perturbation == Perturbation::additive ? convolve_1d(data.phi, a, b, x, t) : 0.0;
            row[i] = det + noise;
        }
        s.values.push_back(std::move(row));
    }
    return s;
}

SolutionField solve_stochastic_realization(const InitialData& data, const FieldSampler& sampler,
                                           std::shared_ptr<const Grid> eval, const std::vector<double>& times,
                                           SeedPath seed) {
    return solve_with_field(data, sampler.sample(seed), std::move(eval), times);
}

Eigen::MatrixXd sample_functionals(const FieldSampler& sampler, const Eigen::MatrixXd& W,
                                   const Eigen::VectorXd& offset, int N, std::uint64_t master_seed) {
    if (offset.size() != W.cols()) throw std::invalid_argument("sample_functionals: offset size mismatch");
    const Eigen::MatrixXd V = sampler.project(W);
    Eigen::MatrixXd out(N, W.cols());
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd z = sampler.draw_standard({master_seed, static_cast<std::uint64_t>(i)});
        out.row(i) = (offset + V.transpose() * z).transpose();
    }
    return out;
}

double SpectralBasis::eigenvalue(int k) const {
    if (kind == Kind::ring) return static_cast<double>(k) * k;
    double w = k * pi / L;
    return w * w;
}

double SpectralBasis::eval(int k, double x) const {
    if (kind == Kind::ring) throw std::logic_error("SpectralBasis::eval: ring modes are handled by ring_series");
    return std::sqrt(2.0 / L) * std::sin(k * pi * x / L);
}

SpectralBasis dirichlet_basis(double L, int K) {
    if (!(L > 0.0) || K < 1) throw std::invalid_argument("dirichlet_basis: need L > 0, K >= 1");
    SpectralBasis b;
    b.kind = SpectralBasis::Kind::dirichlet_interval;
    b.L = L;
    b.K = K;
    return b;
}

int dirichlet_truncation(double L, double t_min, double tol) {
    if (!(t_min > 0.0)) throw std::invalid_argument("dirichlet_truncation: t_min must be positive");
    double kk = L / pi * std::sqrt(-std::log(tol) / t_min);
    return std::max(1, static_cast<int>(std::ceil(kk)));
}

double orthonormality_error(const SpectralBasis& b) {
    QuadratureRule q = composite_gauss(0.0, b.L, std::max(16, 2 * b.K), 8);
    double worst = 0.0;
    for (int i = 1; i <= b.K; ++i)
        for (int j = i; j <= b.K; ++j) {
            double s = 0.0;
            for (std::size_t n = 0; n < q.nodes.size(); ++n) s += q.weights[n] * b.eval(i, q.nodes[n]) * b.eval(j, q.nodes[n]);
            worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

SolutionField eigen_solution(const SpectralBasis& b, const Fn1& u0, std::shared_ptr<const Grid> eval,
                             const std::vector<double>& times) {
    if (times.empty()) throw std::invalid_argument("eigen_solution: empty time list");
    const double t_min = *std::min_element(times.begin(), times.end());
    if (!(t_min > 0.0)) throw std::invalid_argument("eigen_solution: times must be positive");
    if (std::exp(-b.eigenvalue(b.K) * t_min) > 1e-12)
        throw std::runtime_error("eigen_solution: truncation under-resolved, exp(-theta_K t_min) > 1e-12");
    QuadratureRule q = composite_gauss(0.0, b.L, std::max(64, 2 * b.K), 8);
    std::vector<double> coef(b.K + 1, 0.0);
    for (int k = 1; k <= b.K; ++k)
        for (std::size_t n = 0; n < q.nodes.size(); ++n) coef[k] += q.weights[n] * u0(q.nodes[n]) * b.eval(k, q.nodes[n]);
    SolutionField s;
    s.grid = eval;
    s.times = times;
    for (double t : times) {
        std::vector<double> row(eval->size(), 0.0);
        for (std::size_t i = 0; i < eval->size(); ++i) {
            double x = eval->coords[i];
            for (int k = 1; k <= b.K; ++k) row[i] += std::exp(-b.eigenvalue(k) * t) * coef[k] * b.eval(k, x);
        }
        s.values.push_back(std::move(row));
    }
    return s;
}

double image_solution(const Fn1& u0, double L, double x, double t) {
    const int M = static_cast<int>(std::ceil(2.0 * truncation_K * std::sqrt(t) / (2.0 * L))) + 1;
    double s = 0.0;
    for (int m = -M; m <= M; ++m) {
        s += convolve_1d(u0, 0.0, L, x - 2.0 * m * L, t);
        s -= convolve_1d(u0, 0.0, L, 2.0 * m * L - x, t);
    }
    return s;
}

RingCoefficients ring_coefficients(const Grid& ring, std::span<const double> values, int K) {
    if (ring.kind != DomainKind::ring) throw std::invalid_argument("ring_coefficients: grid must be a ring");
    if (values.size() != ring.size()) throw std::invalid_argument("ring_coefficients: size mismatch");
    RingCoefficients c;
    c.A.assign(K + 1, 0.0);
    c.B.assign(K + 1, 0.0);
    for (std::size_t j = 0; j < ring.size(); ++j) {
        const double th = ring.angle[j], w = ring.weights[j] * values[j];
        c.A[0] += w / (2.0 * pi);
        for (int m = 1; m <= K; ++m) {
            c.A[m] += w * std::cos(m * th) / pi;
            c.B[m] += w * std::sin(m * th) / pi;
        }
    }
    return c;
}

double ring_series(const RingCoefficients& c, double theta, double t) {
    double s = c.A[0];
    for (std::size_t m = 1; m < c.A.size(); ++m)
        s += std::exp(-static_cast<double>(m * m) * t) * (c.A[m] * std::cos(m * theta) + c.B[m] * std::sin(m * theta));
    return s;
}

SolutionField ring_solve(const Fn1& q, std::shared_ptr<const Grid> ring, const std::vector<double>& times, int K,
                         const FieldSampler* sampler, SeedPath seed) {
    if (ring->kind != DomainKind::ring) throw std::invalid_argument("ring_solve: grid must be a ring");
    if (2 * K >= static_cast<int>(ring->size())) throw std::invalid_argument("ring_solve: K must be below half the node count");
    std::vector<double> data(ring->size());
    for (std::size_t j = 0; j < ring->size(); ++j) data[j] = q(ring->angle[j]);
    SolutionField s;
    s.grid = ring;
    s.times = times;
    if (sampler) {
        if (sampler->grid().size() != ring->size() || sampler->grid().kind != DomainKind::ring)
            throw std::invalid_argument("ring_solve: sampler must live on the same ring grid");
        FieldSample f = sampler->sample(seed);
        for (std::size_t j = 0; j < data.size(); ++j) data[j] += f.values[j];
        s.provenance = Provenance::realization;
        s.seed = seed;
    }
    RingCoefficients c = ring_coefficients(*ring, data, K);
    for (double t : times) {
        std::vector<double> row(ring->size());
        for (std::size_t j = 0; j < ring->size(); ++j) row[j] = ring_series(c, ring->angle[j], t);
        s.values.push_back(std::move(row));
    }
    return s;
}

double gradient_constant(int n) { return std::tgamma(0.5 * (n + 1)) / std::tgamma(0.5 * n); }

ClassicalReport classical_checks(const Fn1& phi, double a, double b, const std::vector<double>& times,
                                 double x_lo, double x_hi, int nodes) {
    ClassicalReport r;
    r.gradient_constant = gradient_constant(1);
    const double sa = std::isfinite(a) ? a : x_lo, sb = std::isfinite(b) ? b : x_hi;
    const double mass0 = integrate(phi, sa, sb, 400);
    double sup_phi = -INFINITY, sup_abs_phi = 0.0;
    for (double y : linspace(sa, sb, 20001)) {
        sup_phi = std::max(sup_phi, phi(y));
        sup_abs_phi = std::max(sup_abs_phi, std::abs(phi(y)));
    }
    std::vector<double> xs = linspace(x_lo, x_hi, nodes);
    std::vector<double> w = trapezoid_weights(x_lo, x_hi, nodes);
    r.sup_excess = -INFINITY;
    for (double t : times) {
        double mass = 0.0, sup_u = -INFINITY, sup_grad = 0.0;
        for (int i = 0; i < nodes; ++i) {
            double u = convolve_1d(phi, a, b, xs[i], t);
            mass += w[i] * u;
            sup_u = std::max(sup_u, u);
            sup_grad = std::max(sup_grad, std::abs(convolve_1d_dx(phi, a, b, xs[i], t)));
        }
        r.mass_rel_err = std::max(r.mass_rel_err, std::abs(mass - mass0) / std::abs(mass0));
        r.gradient_ratio = std::max(r.gradient_ratio, sup_grad * std::sqrt(t) / sup_abs_phi);
        r.sup_excess = std::max(r.sup_excess, sup_u - sup_phi);
    }
    r.mass_ok = r.mass_rel_err <= 1e-5;
    r.gradient_ok = r.gradient_ratio <= r.gradient_constant * (1.0 + 1e-9);
    r.sup_ok = r.sup_excess <= 1e-8;
    return r;
}

double heat_residual_1d(const Fn2& u, double x, double t, double dx, double dt, const Fn2* f) {
    double ut = (u(x, t + dt) - u(x, t - dt)) / (2.0 * dt);
    double uxx = (u(x + dx, t) - 2.0 * u(x, t) + u(x - dx, t)) / (dx * dx);
    return ut - uxx - (f ? (*f)(x, t) : 0.0);
}

SpaceTimeRule heat_ball_rule(double x, double t, double R, int w_nodes, int xi_nodes) {
    const double tau_max = heat_ball_tau_max(R);
    if (tau_max > t) throw std::invalid_argument("heat ball clipped by the initial time: need R^2/(4 pi) <= t");
    const double w_max = 12.0;
    QuadratureRule qw = composite_gauss(0.0, w_max, std::max(1, w_nodes / 8), 8);
    const QuadratureRule& qx = gauss_legendre(xi_nodes);
    SpaceTimeRule r;
    for (std::size_t i = 0; i < qw.nodes.size(); ++i) {
        const double w = qw.nodes[i];
        const double tau = tau_max * std::exp(-w * w);
        const double rho = w * std::sqrt(2.0 * tau);
        // (1/4R) * rho^3/tau^2 * |d tau/dw| = (1/4R) 2^{5/2} w^4 sqrt(tau).
        const double jac = std::pow(2.0, 2.5) * std::pow(w, 4) * std::sqrt(tau) / (4.0 * R);
        for (std::size_t k = 0; k < qx.nodes.size(); ++k) {
            const double xi = qx.nodes[k];
            r.y.push_back(x + rho * xi);
            r.s.push_back(t - tau);
            r.w.push_back(qw.weights[i] * qx.weights[k] * jac * xi * xi);
        }
    }
    return r;
}

double heat_ball_mean_value(const Fn2& u, double x, double t, double R, int w_nodes, int xi_nodes) {
    SpaceTimeRule r = heat_ball_rule(x, t, R, w_nodes, xi_nodes);
    double s = 0.0;
    for (std::size_t i = 0; i < r.w.size(); ++i) s += r.w[i] * u(r.y[i], r.s[i]);
    return s;
}

Eigen::VectorXd heat_ball_functional(const Grid& src, double x, double t, double R, const Fn1* multiplier) {
    if (src.dim != 1) throw std::invalid_argument("heat_ball_functional: source grid must be 1-D");
    SpaceTimeRule r = heat_ball_rule(x, t, R);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(src.size()));
    for (std::size_t j = 0; j < src.size(); ++j) {
        const double y = src.coords[j];
        double acc = 0.0;
        for (std::size_t q = 0; q < r.w.size(); ++q) acc += r.w[q] * heat_kernel(1, (r.y[q] - y) * (r.y[q] - y), r.s[q]);
        w[static_cast<Eigen::Index>(j)] = acc * src.weights[j] * (multiplier ? (*multiplier)(y) : 1.0);
    }
    return w;
}

double heat_ball_mean_value_threshold(const Fn2& u, double x, double t, double R, double dy, double ds, int refine) {
    const double tau_max = heat_ball_tau_max(R);
    if (tau_max > t) throw std::invalid_argument("heat ball clipped by the initial time: need R^2/(4 pi) <= t");
    // The weight r^2/tau^2 concentrates where tau << tau_max, so rows are
    // uniform in log(tau) and each row's y cells scale with the ball width.
    const double rho_max = std::sqrt(2.0 * tau_max / std::exp(1.0));
    const double log_span = 40.0;
    const int ns = static_cast<int>(std::ceil(log_span * refine / ds * tau_max));
    const int ny = static_cast<int>(std::ceil(2.0 * rho_max * refine / dy));
    const double level = 1.0 / R;
    const double du = log_span / ns;
    double acc = 0.0;
    for (int a = 0; a < ns; ++a) {
        const double tau = tau_max * std::exp(-(a + 0.5) * du);
        const double half = 1.2 * std::sqrt(2.0 * tau * (a + 0.5) * du);
        const double cy = 2.0 * half / ny;
        for (int b = 0; b < ny; ++b) {
            const double r = -half + (b + 0.5) * cy;
            if (heat_kernel(1, r * r, tau) >= level) acc += u(x + r, t - tau) * r * r / tau * du * cy;
        }
    }
    return acc / (4.0 * R);
}

}  // namespace shl
