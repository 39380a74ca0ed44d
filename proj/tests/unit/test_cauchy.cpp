#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "shl/cauchy.hpp"
#include "shl/heat_kernel.hpp"
#include "shl/report.hpp"
#include "shl/special.hpp"

using namespace shl;

namespace {

std::shared_ptr<const Grid> line(double a, double b, int n) { return std::make_shared<Grid>(interval_grid(a, b, n)); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Fn1 bump = [](double x) { return std::exp(-x * x); };

}  // namespace

TEST_CASE("deterministic solution") {
    auto eval = line(-2.0, 2.0, 21);
    SolutionField c = solve_deterministic(InitialData::constant(3.0), -30.0, 30.0, eval, {0.5, 1.0, 2.0});
    for (const auto& row : c.values)
        for (double v : row) CHECK(std::abs(v - 3.0) <= 1e-6);

    const double s = 0.3;
    InitialData d;
    d.phi = [s](double y) { return heat_kernel(1, y * y, s); };
    std::vector<double> ts{0.1, 0.7, 2.0};
    SolutionField u = solve_deterministic(d, -30.0, 30.0, eval, ts);
    for (std::size_t k = 0; k < ts.size(); ++k)
        for (std::size_t i = 0; i < eval->size(); ++i) {
            double x = eval->coords[i];
            CHECK(std::abs(u.values[k][i] - heat_kernel(1, x * x, s + ts[k])) <= 1e-6);
        }

    InitialData g;
    g.phi = bump;
    double prev = INFINITY;
    for (double t : {1.0, 10.0, 100.0, 1e4}) {
        double v = convolve_1d(bump, -10.0, 10.0, 0.0, t);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-2);
    CHECK_THROWS_AS(solve_deterministic(g, -10.0, 10.0, eval, {0.0}), std::invalid_argument);
}

TEST_CASE("linearity") {
    Fn1 f = [](double x) { return std::sin(x) * std::exp(-0.1 * x * x); };
    Fn1 sum = [&](double x) { return 2.0 * bump(x) - 0.5 * f(x); };
    for (double x : {-1.0, 0.2, 3.0}) {
        double lhs = convolve_1d(sum, -20.0, 20.0, x, 0.8);
        double rhs = 2.0 * convolve_1d(bump, -20.0, 20.0, x, 0.8) - 0.5 * convolve_1d(f, -20.0, 20.0, x, 0.8);
        CHECK(std::abs(lhs - rhs) <= 1e-14);
    }
}

TEST_CASE("inhomogeneous solution") {
    auto eval = line(-1.0, 1.0, 5);
    Fn2 zero = [](double, double) { return 0.0; };
    Fn2 one = [](double, double) { return 1.0; };
    InitialData g;
    g.phi = bump;
    SolutionField a = solve_inhomogeneous(g, zero, -20.0, 20.0, eval, {0.5});
    SolutionField b = solve_deterministic(g, -20.0, 20.0, eval, {0.5});
    CHECK(max_abs_diff(a.values[0], b.values[0]) == 0.0);
    for (double t : {0.1, 1.0, 3.0}) {
        SolutionField u = solve_inhomogeneous(InitialData::constant(0.0), one, -30.0, 30.0, eval, {t});
        for (double v : u.values[0]) CHECK(std::abs(v - t) <= 1e-6);
    }
    Fn2 f = [](double x, double s) { return std::cos(x) * std::exp(-s) + 0.2 * x; };
    Fn2 u = [&](double x, double t) { return convolve_1d(bump, -20.0, 20.0, x, t) + duhamel_1d(f, -20.0, 20.0, x, t); };
    for (double x : {-0.5, 0.0, 0.7})
        for (double t : {0.3, 1.0}) CHECK(std::abs(heat_residual_1d(u, x, t, 1e-2, 1e-3, &f)) <= 5e-3);
}

TEST_CASE("stochastic realizations") {
    auto noise = line(-5.0, 5.0, 201);
    FieldSampler sampler(noise, {KernelFamily::exponential, 1.0, 1.0});
    InitialData d;
    d.phi = bump;
    d.perturbation = Perturbation::additive;
    auto eval = line(-1.0, 1.0, 5);

    FieldSample zero{noise, std::vector<double>(noise->size(), 0.0), {}};
    SolutionField z = solve_with_field(d, zero, eval, {0.5, 1.0});
    SolutionField det = solve_deterministic(d, -5.0, 5.0, eval, {0.5, 1.0});
    for (int k = 0; k < 2; ++k) CHECK(max_abs_diff(z.values[k], det.values[k]) <= 1e-12);

    // Realization and the linear-functional route agree.
    SolutionField r = solve_stochastic_realization(d, sampler, eval, {0.5}, {7, 3});
    CHECK(r.provenance == Provenance::realization);
    std::vector<std::vector<double>> pts;
    for (double x : eval->coords) pts.push_back({x});
    Eigen::MatrixXd W = convolution_functionals(*noise, pts, {0.5});
    Eigen::VectorXd off(5);
    for (int i = 0; i < 5; ++i) off[i] = det.values[0][i];
    Eigen::MatrixXd S = sample_functionals(sampler, W, off, 4, 7);
    for (int i = 0; i < 5; ++i) CHECK(S(3, i) == doctest::Approx(r.values[0][i]).epsilon(1e-10));

    // Ensemble mean equals the deterministic solution.
    Eigen::MatrixXd E = sample_functionals(sampler, W, off, 10000, 11);
    for (int i = 0; i < 5; ++i) {
        std::vector<double> col(E.rows());
        for (Eigen::Index n = 0; n < E.rows(); ++n) col[n] = E(n, i);
        Estimate m = mean_estimate(col);
        CHECK(std::abs(m.value - det.values[0][i]) <= sigma_margin * m.stderr_);
    }

    // Pure noise is smoothed to zero.
    InitialData pure;
    pure.perturbation = Perturbation::additive;
    double prev = INFINITY;
    for (double t : {1.0, 10.0, 100.0, 1000.0}) {
        SolutionField u = solve_stochastic_realization(pure, sampler, eval, {t}, {5, 0});
        double sup = 0.0;
        for (double v : u.values[0]) sup = std::max(sup, std::abs(v));
        CHECK(sup < prev);
        prev = sup;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("stochastic L_p, L_2 and energy") {
    const int M = 121;
    auto noise = line(-3.0, 3.0, M);
    FieldSampler sampler(noise, {KernelFamily::exponential, 0.5, 0.5});
    std::vector<std::vector<double>> pts;
    for (double x : noise->coords) pts.push_back({x});
    std::vector<double> ts{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0};
    Eigen::MatrixXd W = convolution_functionals(*noise, pts, ts);
    Eigen::VectorXd phi(M), off(M * ts.size());
    for (int j = 0; j < M; ++j) phi[j] = bump(noise->coords[j]);
    for (int j = 0; j < M; ++j)
        for (std::size_t k = 0; k < ts.size(); ++k) off[j * ts.size() + k] = W.col(j * ts.size() + k).dot(phi);

    const int N = 4000;
    Eigen::MatrixXd S = sample_functionals(sampler, W, off, N, 99);
    std::vector<std::vector<double>> energy(ts.size(), std::vector<double>(N));
    std::vector<double> initial(N);
    for (int n = 0; n < N; ++n) {
        Eigen::VectorXd z = sampler.draw_standard({99, static_cast<std::uint64_t>(n)});
        Eigen::VectorXd data = phi + sampler.factor() * z;
        initial[n] = 0.0;
        for (int j = 0; j < M; ++j) initial[n] += noise->weights[j] * data[j] * data[j];
        std::vector<double> l3(ts.size(), 0.0);
        for (std::size_t k = 0; k < ts.size(); ++k) {
            double e = 0.0;
            for (int j = 0; j < M; ++j) {
                double v = S(n, j * ts.size() + k);
                e += noise->weights[j] * v * v;
                l3[k] += noise->weights[j] * std::pow(std::abs(v), 3.0);
            }
            energy[k][n] = 0.5 * e;
        }
        if (n < 50)
            for (std::size_t k = 1; k < ts.size(); ++k) CHECK(l3[k] < l3[k - 1]);
    }
    Estimate e0 = mean_estimate(initial);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        Estimate ek = mean_estimate(energy[k]);
        CHECK(2.0 * ek.value <= e0.value + sigma_margin * e0.stderr_);
        if (k > 0) CHECK(ek.value < mean_estimate(energy[k - 1]).value);
    }
    CHECK(mean_estimate(energy.back()).value < 0.1 * mean_estimate(energy.front()).value);
}

TEST_CASE("spectral solutions") {
    const double L = pi;
    int K = dirichlet_truncation(L, 0.1);
    SpectralBasis b = dirichlet_basis(L, K);
    CHECK(orthonormality_error(b) <= 1e-8);
    for (int k = 1; k < K; ++k) CHECK(b.eigenvalue(k) <= b.eigenvalue(k + 1));
    auto eval = line(0.0, L, 41);
    std::vector<double> ts{0.1, 0.5, 2.0};
    SolutionField s = eigen_solution(b, [](double x) { return std::sin(x); }, eval, ts);
    for (std::size_t k = 0; k < ts.size(); ++k)
        for (std::size_t i = 0; i < eval->size(); ++i)
            CHECK(std::abs(s.values[k][i] - std::exp(-ts[k]) * std::sin(eval->coords[i])) <= 1e-8);
    SolutionField m = eigen_solution(b, [&](double x) { return b.eval(2, x); }, eval, {0.3});
    for (std::size_t i = 0; i < eval->size(); ++i)
        CHECK(std::abs(m.values[0][i] - std::exp(-4.0 * 0.3) * b.eval(2, eval->coords[i])) <= 1e-10);

    Fn1 tent = [L](double x) { return x * (L - x); };
    SolutionField e = eigen_solution(b, tent, eval, ts);
    for (std::size_t k = 0; k < ts.size(); ++k)
        for (std::size_t i = 0; i < eval->size(); i += 4)
            CHECK(std::abs(e.values[k][i] - image_solution(tent, L, eval->coords[i], ts[k])) <= 1e-4);
    CHECK_THROWS_AS(eigen_solution(dirichlet_basis(L, 3), tent, eval, ts), std::runtime_error);
}

TEST_CASE("ring solutions") {
    auto ring = std::make_shared<Grid>(ring_grid(128));
    std::vector<double> ts{0.1, 1.0, 3.0};
    SolutionField c = ring_solve([](double th) { return std::cos(th); }, ring, ts, 16);
    for (std::size_t k = 0; k < ts.size(); ++k)
        for (std::size_t j = 0; j < ring->size(); ++j)
            CHECK(std::abs(c.values[k][j] - std::exp(-ts[k]) * std::cos(ring->angle[j])) <= 1e-12);
    SolutionField q = ring_solve([](double) { return 2.5; }, ring, ts, 16);
    for (const auto& row : q.values)
        for (double v : row) CHECK(std::abs(v - 2.5) <= 1e-12);
    CHECK_THROWS_AS(ring_solve([](double) { return 1.0; }, ring, ts, 64), std::invalid_argument);

    // Fourier route and ring-kernel convolution agree for random data.
    FieldSampler sampler(ring, {KernelFamily::squared_exponential, 1.0, 0.5});
    SolutionField r = ring_solve([](double) { return 0.0; }, ring, {0.5}, 63, &sampler, {3, 1});
    FieldSample f = sampler.sample({3, 1});
    for (std::size_t j = 0; j < ring->size(); j += 16) {
        double conv = 0.0;
        std::vector<double> x{ring->angle[j]};
        for (std::size_t i = 0; i < ring->size(); ++i) conv += convolution_weight(*ring, i, x, 0.5) * f.values[i];
        CHECK(std::abs(conv - r.values[0][j]) <= 1e-10);
    }
}

TEST_CASE("classical properties") {
    ClassicalReport r = classical_checks(bump, -10.0, 10.0, {0.1, 0.5, 1.0, 2.0, 5.0}, -40.0, 40.0, 1601);
    CHECK(r.mass_ok);
    CHECK(r.mass_rel_err <= 1e-5);
    CHECK(r.sup_ok);
    CHECK(r.gradient_ok);
    CHECK(r.gradient_constant == doctest::Approx(1.0 / std::sqrt(pi)));

    // Ensemble mean of the additive problem obeys the same sup bound.
    auto noise = line(-5.0, 5.0, 101);
    FieldSampler sampler(noise, {KernelFamily::exponential, 1.0, 1.0});
    std::vector<std::vector<double>> pts{{0.0}, {0.5}};
    std::vector<double> ts{0.2, 1.0};
    Eigen::MatrixXd W = convolution_functionals(*noise, pts, ts);
    Eigen::VectorXd off(4);
    for (int p = 0; p < 2; ++p)
        for (int k = 0; k < 2; ++k) off[p * 2 + k] = convolve_1d(bump, -5.0, 5.0, pts[p][0], ts[k]);
    Eigen::MatrixXd S = sample_functionals(sampler, W, off, 10000, 5);
    for (int c = 0; c < 4; ++c) {
        std::vector<double> col(S.rows());
        for (Eigen::Index n = 0; n < S.rows(); ++n) col[n] = S(n, c);
        Estimate m = mean_estimate(col);
        CHECK(m.value <= 1.0 + sigma_margin * m.stderr_);
    }
}

TEST_CASE("heat ball mean value") {
    const double R = 1.0, t = 1.0, x = 0.3;
    CHECK(std::abs(heat_ball_mean_value([](double, double) { return 2.0; }, x, t, R) - 2.0) <= 1e-10);
    Fn2 caloric = [](double y, double s) { return y * y + 2.0 * s; };
    CHECK(std::abs(heat_ball_mean_value(caloric, x, t, R) / caloric(x, t) - 1.0) <= 1e-8);
    Fn2 evolved = [](double y, double s) { return heat_kernel(1, y * y, s + 0.5); };
    double mv = heat_ball_mean_value(evolved, x, t, R);
    CHECK(std::abs(mv / evolved(x, t) - 1.0) <= 1e-6);
    double th = heat_ball_mean_value_threshold(evolved, x, t, R, 0.01, 0.005);
    CHECK(std::abs(th / evolved(x, t) - 1.0) <= 1e-2);
    CHECK(std::abs(heat_ball_mean_value_threshold([](double, double) { return 1.0; }, x, t, R, 0.01, 0.005) - 1.0) <= 1e-2);
    CHECK_THROWS_AS(heat_ball_mean_value(caloric, x, 0.05, R), std::invalid_argument);

    // Stochastic version: the ensemble mean of the ball average matches u(x,t).
    auto noise = line(-6.0, 6.0, 241);
    FieldSampler sampler(noise, {KernelFamily::exponential, 1.0, 1.0});
    Eigen::VectorXd w = heat_ball_functional(*noise, x, t, R);
    Eigen::MatrixXd W(w.size(), 1);
    W.col(0) = w;
    Fn2 det = [](double y, double s) { return convolve_1d(bump, -6.0, 6.0, y, s); };
    Eigen::VectorXd off(1);
    off[0] = heat_ball_mean_value(det, x, t, R);
    CHECK(std::abs(off[0] - det(x, t)) <= 1e-6);
    Eigen::MatrixXd S = sample_functionals(sampler, W, off, 10000, 17);
    std::vector<double> col(S.data(), S.data() + S.rows());
    Estimate m = mean_estimate(col);
    CHECK(std::abs(m.value - det(x, t)) <= sigma_margin * m.stderr_);
}
