#include <doctest.h>

#include <cmath>
#include <random>

#include "shl/colehopf.hpp"
#include "shl/special.hpp"

using namespace shl;

namespace {

double bump(double x) { return std::abs(x) < 1.0 ? std::pow(1.0 - x * x, 4) : 0.0; }

}  // namespace

TEST_CASE("transform") {
    ColeHopfParams p{0.7, 1.3};
    CHECK(cole_hopf_forward(0.0, p) == 1.0);

    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> dist(1e-3, 50.0);
    std::vector<double> u(1000);
    for (double& v : u) v = dist(eng);
    auto back = cole_hopf_forward(cole_hopf_inverse(u, p), p);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(back[i] - u[i]) / u[i]);
    CHECK(worst <= 1e-14);

    CHECK_THROWS_AS(cole_hopf_inverse(0.0, p), std::invalid_argument);
    CHECK_THROWS_AS(cole_hopf_forward(1.0, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(cole_hopf_forward(1.0, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("heat solutions map to quasilinear solutions") {
    for (ColeHopfParams p : {ColeHopfParams{1.0, 1.0}, ColeHopfParams{0.3, -2.0}, ColeHopfParams{2.0, 0.5}}) {
        // u = 1 + h(x, a(t + 1/2)) solves u_t = a u_xx.
        FieldFn u = [a = p.a](const std::vector<double>& x, double t) {
            return 1.0 + heat_kernel(1, x[0] * x[0], a * (t + 0.5));
        };
        FieldFn psi = [&](const std::vector<double>& x, double t) { return cole_hopf_inverse(u(x, t), p); };
        for (double t : {0.2, 1.0})
            for (double x : {-1.0, 0.0, 0.5}) CHECK(std::abs(quasilinear_residual(psi, p, {x}, t)) <= 5e-3);
    }
}

TEST_CASE("transform consistency constant") {
    ColeHopfParams p{0.5, 2.0};
    std::vector<std::vector<double>> pts{{-1.0}, {0.0}, {0.7}};
    // Not a solution: the linear residual is O(delta) and psi inherits it times a/(|b| u).
    for (double delta : {1e-1, 1e-2}) {
        FieldFn u = [&](const std::vector<double>& x, double t) {
            return 2.0 + std::exp(-p.a * t) * std::sin(x[0]) + delta * t * x[0] * x[0];
        };
        auto r = transform_consistency(u, p, pts, {0.5, 1.0});
        CHECK(r.pass);
        CHECK(r.linear_residual > 0.5 * delta);
        CHECK(r.observed_ratio <= r.C * (1.0 + 1e-6));
    }
}

TEST_CASE("quasilinear solution") {
    ColeHopfParams p{0.5, 1.5};
    FieldFn c = [](const std::vector<double>&, double) { return 0.8; };
    for (double t : {0.01, 1.0, 10.0}) CHECK(quasilinear_value(c, p, {0.3}, t) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(quasilinear_value(c, p, {0.3, -1.0}, 0.5) == doctest::Approx(0.8).epsilon(1e-12));

    FieldFn I1 = [](const std::vector<double>& y, double) { return std::sin(y[0]) + 0.5 * std::cos(2.0 * y[0]); };
    FieldFn psi1 = [&](const std::vector<double>& x, double t) { return quasilinear_value(I1, p, x, t); };
    for (double t : {0.1, 0.5, 2.0})
        for (double x : {-1.0, 0.0, 0.9}) CHECK(std::abs(quasilinear_residual(psi1, p, {x}, t)) <= 5e-3);

    FieldFn I2 = [](const std::vector<double>& y, double) { return std::cos(y[0]) * std::sin(0.5 * y[1]); };
    ConvolutionOptions coarse;
    coarse.panel = 0.25;
    coarse.z_max = 6.0;
    FieldFn psi2 = [&](const std::vector<double>& x, double t) { return quasilinear_value(I2, p, x, t, coarse); };
    for (double t : {0.3, 1.0}) CHECK(std::abs(quasilinear_residual(psi2, p, {0.2, -0.4}, t)) <= 5e-3);

    auto m = solve_quasilinear(I1, p, {{0.0}, {1.0}}, {0.5, 1.0});
    CHECK(m.rows() == 2);
    CHECK(m(1, 1) == doctest::Approx(quasilinear_value(I1, p, {1.0}, 1.0)).epsilon(1e-15));
}

TEST_CASE("small b approaches the linear heat solution") {
    FieldFn I = [](const std::vector<double>& y, double) { return 1.0 + std::sin(y[0]); };
    // heat_evolve on sin: e^{-a t} sin x.
    CHECK(heat_evolve(I, 0.4, {0.6}, 1.5) == doctest::Approx(1.0 + std::exp(-0.6) * std::sin(0.6)).epsilon(1e-12));
    double prev = INFINITY;
    for (double b : {1e-1, 1e-2, 1e-3}) {
        ColeHopfParams p{0.4, b};
        double err = 0.0;
        for (double x : {-1.0, 0.0, 0.6, 2.0}) {
            const double lin = heat_evolve(I, p.a, {x}, 1.5);
            err = std::max(err, std::abs(quasilinear_value(I, p, {x}, 1.5) - lin) / std::abs(lin));
        }
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev <= 1e-2);
}

TEST_CASE("Burgers formula") {
    BurgersSolver zero([](double) { return 0.0; }, 0.3, -10.0, 10.0, 400);
    for (double x : {-2.0, 0.0, 3.0}) CHECK(std::abs(zero.velocity(x, 1.0)) <= 1e-14);

    // Compactly supported data: the tails carry no mass and J(hi) = int I.
    BurgersSolver b(bump, 0.2, -1.0, 1.0, 200);
    CHECK(b.potential(5.0) == doctest::Approx(integrate(bump, -1.0, 1.0, 64)).epsilon(1e-12));
    CHECK(b.potential(-3.0) == 0.0);
    CHECK(b.potential(0.0) == doctest::Approx(0.5 * b.potential(5.0)).epsilon(1e-12));

    // Mass: int v dx = int I for every t.
    const double mass = integrate(bump, -1.0, 1.0, 64);
    for (double t : {0.2, 1.0, 3.0}) {
        const double m = integrate([&](double x) { return b.velocity(x, t); }, -15.0, 15.0, 600);
        CHECK(m == doctest::Approx(mass).epsilon(1e-3));
    }

    CHECK_THROWS_AS(b.velocity(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(b.velocity(0.0, 1e-6), std::invalid_argument);
}

TEST_CASE("Burgers formula against finite volumes") {
    const double a = 0.1, t = 0.5;
    Fn1 I = [](double x) { return std::sin(x); };
    BurgersSolver formula(I, a, -8.0 * pi, 10.0 * pi, 1600);
    auto fd = burgers_fd(I, a, 0.0, 2.0 * pi, 2048, {t}, BurgersBoundary::periodic);
    double linf = 0.0;
    for (std::size_t i = 0; i < fd.centers.size(); i += 4)
        linf = std::max(linf, std::abs(formula.velocity(fd.centers[i], t) - fd.values(0, i)));
    CHECK(linf <= 1e-2);

    // The printed ratio is a different function.
    CHECK(std::abs(formula.velocity_printed(1.0, t) - formula.velocity(1.0, t)) > 1e-2);

    // Finite-volume mass is conserved on the periodic domain and, for compact data, with outflow.
    double s0 = 0.0;
    auto fb = burgers_fd(bump, 0.2, -10.0, 10.0, 2000, {0.0, 1.0, 3.0}, BurgersBoundary::outflow);
    for (int i = 0; i < fb.values.cols(); ++i) s0 += fb.values(0, i) * fb.dx;
    for (int k = 1; k < 3; ++k) {
        double s = 0.0;
        for (int i = 0; i < fb.values.cols(); ++i) s += fb.values(k, i) * fb.dx;
        CHECK(s == doctest::Approx(s0).epsilon(1e-3));
    }
    CHECK(s0 == doctest::Approx(integrate(bump, -1.0, 1.0, 64)).epsilon(1e-10));

    CHECK_THROWS_AS(burgers_fd(I, 0.0, 0.0, 1.0, 10, {1.0}, BurgersBoundary::periodic), std::invalid_argument);
}

TEST_CASE("Burgers diffusion-dominated limit") {
    Fn1 I = [](double x) { return std::sin(x); };
    // Fixed a t = 1: the linear answer is e^{-1} sin x and nonlinear effects shrink like 1/a.
    double prev = INFINITY;
    for (double a : {1.0, 10.0, 100.0}) {
        BurgersSolver s(I, a, -8.0 * pi, 10.0 * pi, 400);
        const double t = 1.0 / a;
        double err = 0.0;
        for (double x : {0.3, 1.2, 2.5, 4.0}) err = std::max(err, std::abs(s.velocity(x, t) - std::exp(-1.0) * std::sin(x)));
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev <= 1e-2);
}

TEST_CASE("random initial data") {
    auto grid = std::make_shared<Grid>(interval_grid(0.0, 1.0, 201));
    ColeHopfParams p{0.5, 1.0};
    Fn1 phi = [](double y) { return 1.0 + 0.5 * y; };

    // Field set to zero: the grid sum matches solve_quasilinear with data phi on [0,1], 0 outside.
    std::vector<double> data(grid->size());
    for (std::size_t k = 0; k < grid->size(); ++k) data[k] = phi(grid->coords[k]);
    FieldFn I = [&](const std::vector<double>& y, double) { return y[0] >= 0.0 && y[0] <= 1.0 ? phi(y[0]) : 0.0; };
    ConvolutionOptions o;
    o.breakpoints = {0.0, 1.0};
    for (double x : {-0.5, 0.3, 1.2})
        for (double t : {0.2, 1.0})
            CHECK(cole_hopf_grid_value(*grid, data, p, x, t) == doctest::Approx(quasilinear_value(I, p, {x}, t, o)).epsilon(1e-4));

    FieldSampler sampler(grid, {KernelFamily::exponential, 0.5, 0.3});
    const std::vector<double> xs{0.2, 0.5, 1.5}, ts{0.2, 1.0};
    const int N = 4000;
    auto r = stochastic_cole_hopf(phi, sampler, p, xs, ts, N, 61);
    for (std::size_t ti = 0; ti < ts.size(); ++ti)
        for (std::size_t xi = 0; xi < xs.size(); ++xi) {
            Eigen::VectorXd c = r.u.col(static_cast<Eigen::Index>(r.column(ti, xi)));
            Estimate m = mean_estimate(std::span<const double>(c.data(), static_cast<std::size_t>(c.size())));
            const double det = std::exp(-(p.b / p.a) * cole_hopf_grid_value(*grid, data, p, xs[xi], ts[ti]));
            const double ln = lognormal_mean_u(phi, sampler, p, xs[xi], ts[ti]);
            CHECK(ln >= det);
            CHECK(std::abs(m.value - ln) <= 4.0 * m.stderr_);
            CHECK(m.value >= det);

            Eigen::VectorXd s = r.psi.col(static_cast<Eigen::Index>(r.column(ti, xi)));
            CHECK(r.moment(2, ti, xi).value == doctest::Approx(s.squaredNorm() / N).epsilon(1e-12));
        }

    // Each realization solves the quasilinear equation.
    for (std::uint64_t i : {0u, 7u}) {
        FieldSample f = sampler.sample({61, i});
        std::vector<double> d(grid->size());
        for (std::size_t k = 0; k < grid->size(); ++k) d[k] = data[k] + f.values[k];
        FieldFn psi = [&](const std::vector<double>& x, double t) { return cole_hopf_grid_value(*grid, d, p, x[0], t); };
        for (double x : {0.2, 0.5, 1.5}) CHECK(std::abs(quasilinear_residual(psi, p, {x}, 0.5)) <= 5e-3);
        CHECK(psi({0.5}, 1.0) == doctest::Approx(r.psi(static_cast<Eigen::Index>(i), r.column(1, 1))).epsilon(1e-13));
    }

    auto again = stochastic_cole_hopf(phi, sampler, p, xs, ts, 50, 61);
    CHECK(again.psi == r.psi.topRows(50));
}
