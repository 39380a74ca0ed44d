#include <doctest.h>

#include <cmath>
#include <random>

#include "shl/heat_kernel.hpp"
#include "shl/special.hpp"

using namespace shl;

TEST_CASE("kernel values") {
    CHECK(kernel({1, {0.0}, {0.0}, 1.0 / (4.0 * pi)}).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(kernel({1, {0.4}, {0.4}, 1.0}).value == doctest::Approx(0.28209479177387814).epsilon(1e-14));
    CHECK(kernel({3, {0.0, 0.0, 0.0}, {0.0, 0.0, 2.0}, 1.0}).value ==
          doctest::Approx(0.00825830126612423).epsilon(1e-13));
    KernelValue z = kernel({1, {0.0}, {0.0}, -1.0});
    CHECK(z.value == 0.0);
    CHECK(z.zero_by_convention);
}

TEST_CASE("kernel derivatives") {
    std::mt19937_64 eng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0), ut(0.05, 3.0);
    for (int n = 1; n <= 3; ++n) {
        for (int i = 0; i < 50; ++i) {
            KernelQuery q{n, {}, {}, ut(eng)};
            for (int d = 0; d < n; ++d) q.x.push_back(u(eng)), q.y.push_back(u(eng));
            KernelDerivatives d = kernel_derivatives(q);
            CHECK(std::abs(d.residual()) <= 1e-12);
            // Central differences in t and in each x coordinate.
            const double step = 1e-5;
            KernelQuery a = q, b = q;
            a.t += step;
            b.t -= step;
            double fd_t = (kernel(a).value - kernel(b).value) / (2.0 * step);
            CHECK(std::abs(fd_t - d.dt) <= 1e-5 * std::abs(d.dt) + 1e-10);
            for (int k = 0; k < n; ++k) {
                KernelQuery p = q, m = q;
                p.x[k] += step;
                m.x[k] -= step;
                double fd = (kernel(p).value - kernel(m).value) / (2.0 * step);
                CHECK(std::abs(fd - d.grad[k]) <= 1e-5 * std::abs(d.grad[k]) + 1e-10);
            }
        }
    }
    KernelDerivatives at0 = kernel_derivatives({2, {0.5, 0.5}, {0.5, 0.5}, 1.0});
    CHECK(at0.grad[0] == 0.0);
    CHECK(at0.grad[1] == 0.0);
    KernelQuery q{1, {1.0}, {0.0}, 0.25};
    KernelDerivatives d = kernel_derivatives(q);
    KernelQuery p = q, m = q;
    p.x[0] += 1e-5;
    m.x[0] -= 1e-5;
    double fd = (kernel(p).value - kernel(m).value) / 2e-5;
    CHECK(std::abs(fd - d.grad[0]) <= 1e-6 * std::abs(d.grad[0]));
    CHECK_THROWS_AS(kernel_derivatives({1, {0.0}, {0.0}, 0.0}), std::invalid_argument);
}

TEST_CASE("normalization and scaling") {
    for (int n = 1; n <= 3; ++n)
        for (double t : {0.1, 1.0, 10.0}) CHECK(std::abs(normalization_quadrature(n, t) - 1.0) <= 1e-6);
    std::mt19937_64 eng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0), ua(0.2, 5.0), ut(0.1, 4.0);
    for (int i = 0; i < 100; ++i) {
        double x = u(eng), a = ua(eng), t = ut(eng);
        for (int n = 1; n <= 3; ++n) {
            double lhs = std::pow(a, n) * heat_kernel(n, a * a * x * x, a * a * t);
            CHECK(lhs == doctest::Approx(heat_kernel(n, x * x, t)).epsilon(1e-12));
        }
    }
}

TEST_CASE("L_p norms") {
    for (double t : {0.3, 1.0, 4.0}) {
        CHECK(lp_norm_closed_form(2, t, 1.0) == doctest::Approx(1.0));
        for (double p : {1.0, 2.0, 3.0, 4.0}) {
            double cf = lp_norm_closed_form(1, t, p);
            CHECK(std::abs(lp_norm_quadrature(1, t, p) - cf) <= 1e-6 * cf);
        }
    }
    CHECK(lp_norm_closed_form(1, 1.0, 2.0) == doctest::Approx(0.44662192086900115).epsilon(1e-12));
    double prev = INFINITY;
    for (double t = 0.5; t < 1e5; t *= 1.7) {
        double v = lp_norm_closed_form(2, t, 3.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("double-sided bounds") {
    for (int n = 1; n <= 3; ++n) {
        BoundReport r = check_double_sided_bound({n, std::vector<double>(n, 0.1), std::vector<double>(n, 0.9), 0.7},
                                                 BoundConstants::equality(n));
        CHECK(r.verdict == Verdict::holds);
        CHECK(r.bound == doctest::Approx(r.empirical).epsilon(1e-14));
        CHECK(r.extra["lower"] == doctest::Approx(r.empirical).epsilon(1e-14));
    }
    InequalityVerdict eq = double_sided_sweep(1, BoundConstants::equality(1), 5.0, 0.1, 10.0);
    CHECK(eq.pass);
    CHECK(eq.worst_margin == 0.0);
    InequalityVerdict st = double_sided_sweep(1, BoundConstants::standard(1), 5.0, 0.1, 10.0);
    CHECK(st.pass);
    BoundConstants low = BoundConstants::equality(1);
    low.lambda2 *= 0.9;
    BoundReport bad = check_double_sided_bound({1, {0.0}, {0.0}, 1.0}, low);
    CHECK(bad.verdict == Verdict::violated);
    CHECK(bad.note.find("value upper") != std::string::npos);
    InequalityVerdict sw = double_sided_sweep(1, low, 5.0, 0.1, 10.0);
    CHECK_FALSE(sw.pass);
    CHECK(sw.worst_margin == doctest::Approx(-0.1));
    // The gradient form with lambda1 on the upper side fails near the origin.
    BoundReport std1 = check_double_sided_bound({1, {0.0}, {0.05}, 1.0}, BoundConstants::standard(1));
    CHECK(std1.verdict == Verdict::holds);
    CHECK(std1.extra["grad_upper_printed"] < std1.extra["grad"]);
}

TEST_CASE("semigroup") {
    CHECK(semigroup_check(0.5, 0.5, -10.0, 10.0, 2001) <= 1e-6);
    for (int n = 1; n <= 3; ++n)
        for (double t : {0.2, 1.0, 3.0}) {
            double want = std::pow(8.0 * pi * t, -0.5 * n);
            CHECK(std::abs(squared_kernel_integral(n, t) - want) <= 1e-8 * want);
        }
    auto phi = [](double z) { return std::cos(z) + 0.3 * z * z; };
    CHECK(delta_approximation_error(phi, 0.4, 1e-4) <= 1e-3);
}

TEST_CASE("Varadhan limit") {
    std::vector<double> ts{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    VaradhanReport a = varadhan_limit(1, {0.0}, {0.0}, ts);
    CHECK(a.limit == 0.0);
    CHECK(a.converged);
    VaradhanReport b = varadhan_limit(1, {0.0}, {2.0}, ts);
    CHECK(b.converged);
    CHECK(std::abs(b.value.back() - 4.0) <= 1e-3);
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(b.value[i] == doctest::Approx(b.analytic[i]).epsilon(1e-12));
    VaradhanReport c = varadhan_limit(1, {0.0}, {4.0}, ts);
    CHECK(c.limit == doctest::Approx(4.0 * b.limit));
}

TEST_CASE("Green's function") {
    std::vector<double> o{0.0, 0.0, 0.0};
    CHECK(greens_function(3, o, {0.0, 1.0, 0.0}) == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-14));
    CHECK(greens_function(3, o, {0.0, 0.0, 2.0}) == doctest::Approx(1.0 / (8.0 * pi)).epsilon(1e-14));
    for (double r : {0.3, 1.0, 2.5}) {
        GreensQuadrature g = greens_via_time_quadrature(3, o, {r, 0.0, 0.0});
        CHECK_FALSE(g.diverges);
        CHECK(std::abs(g.value - 1.0 / (4.0 * pi * r)) <= 1e-4 / (4.0 * pi * r));
    }
    std::vector<double> o4(4, 0.0), e4{1.0, 0.0, 0.0, 0.0};
    CHECK(greens_via_time_quadrature(4, o4, e4).value == doctest::Approx(greens_function(4, o4, e4)).epsilon(1e-6));
    CHECK(greens_via_time_quadrature(2, {0.0, 0.0}, {1.0, 0.0}).diverges);
    CHECK_THROWS_AS(greens_function(3, o, o), std::invalid_argument);
    CHECK_THROWS_AS(greens_function(2, {0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("two-set estimate") {
    // Closed-form double integral over intervals for the 1-D kernel.
    auto G = [](double z, double t) { return 0.5 * z * std::erf(z / (2.0 * std::sqrt(t))) + std::sqrt(t / pi) * std::exp(-z * z / (4.0 * t)); };
    auto exact = [&](double a, double b, double c, double d, double t) {
        return G(b - c, t) - G(b - d, t) - G(a - c, t) + G(a - d, t);
    };
    for (double t : {0.01, 0.3, 1.0, 20.0}) {
        Box Q{{0.0}, {1.0}};
        BoundReport r = davies_two_set_bound(Q, Q, t);
        CHECK(r.verdict == Verdict::holds);
        CHECK(r.empirical <= 1.0);
        CHECK(r.empirical == doctest::Approx(exact(0, 1, 0, 1, t)).epsilon(1e-10));
    }
    Box A{{-0.5}, {0.5}}, B{{9.5}, {10.5}};
    BoundReport far = davies_two_set_bound(A, B, 1.0);
    CHECK(far.verdict == Verdict::holds);
    CHECK(far.bound == doctest::Approx(std::exp(-81.0 / 4.0)));
    CHECK(far.empirical == doctest::Approx(exact(-0.5, 0.5, 9.5, 10.5, 1.0)).epsilon(1e-8));
    // Measured between centres, as printed, the estimate fails for this pair.
    CHECK(far.extra["bound_centre_distance"] == doctest::Approx(std::exp(-25.0)));
    CHECK(far.empirical > far.extra["bound_centre_distance"]);
    Box Q2{{0.0, 0.0}, {1.0, 2.0}};
    BoundReport late = davies_two_set_bound(Q2, Q2, 1e4);
    CHECK(late.verdict == Verdict::holds);
    CHECK(late.empirical < 1e-3);
}

TEST_CASE("ring kernel eigen L_p estimate") {
    for (double p : {2.0, 3.0, 4.0})
        for (double t : {0.5, 1.0, 2.0, 5.0}) CHECK(ring_eigen_lp_estimate(p, t).verdict == Verdict::holds);
    // With the non-decaying zero mode the estimate cannot hold for large t.
    BoundReport r = ring_eigen_lp_estimate(2.0, 5.0);
    CHECK(r.extra["integral_with_zero_mode"] > r.extra["bound_with_zero_mode"]);
    CHECK(ring_kernel(0.3, 2.0, ring_truncation(2.0)) > 0.0);
}
