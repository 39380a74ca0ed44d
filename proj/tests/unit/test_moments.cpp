#include <doctest.h>

#include <cmath>

#include "shl/moments.hpp"
#include "shl/special.hpp"

using namespace shl;

namespace {

MomentProblem interval_problem(double zeta) {
    MomentProblem p;
    p.kernel = {KernelFamily::exponential, zeta, 1.0};
    return p;
}

double interval_sq_mass_closed(double x, double l, double t) {
    return (std::erf(x / std::sqrt(2.0 * t)) - std::erf((x - l) / std::sqrt(2.0 * t))) / (4.0 * std::sqrt(2.0 * pi * t));
}

}  // namespace

TEST_CASE("domain names") {
    for (auto d : {MomentDomain::interval, MomentDomain::ball, MomentDomain::ring})
        CHECK(moment_domain_from_string(to_string(d)) == d);
    CHECK_THROWS_AS(moment_domain_from_string("torus"), std::invalid_argument);
}

TEST_CASE("kernel masses") {
    // 1/2 erf(1/2), frozen from an independent erf evaluation.
    CHECK(interval_kernel_mass(0.0, 1.0, 1.0) == doctest::Approx(0.2602499389).epsilon(1e-9));
    CHECK(interval_kernel_mass(0.5, 1.0, 1e-6) == doctest::Approx(1.0).epsilon(1e-12));

    for (double t : {0.05, 0.3, 1.0, 4.0})
        for (double a : {0.0, 0.2, 0.6, 1.0})
            CHECK(ball_kernel_mass_quadrature(1.0, a, t) == doctest::Approx(ball_kernel_mass_closed(1.0, a, t)).epsilon(1e-8));
    CHECK(ball_kernel_mass_closed(12.0, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ball_kernel_mass_closed(1.0, 0.0, 1e4) < 1e-5);
    CHECK(ball_kernel_mass_quadrature(1.0, 1.0, 1e-4) == doctest::Approx(0.5).epsilon(2e-2));
    // The printed form only agrees at a = 0 where both limits are taken.
    CHECK(std::abs(ball_kernel_mass_printed(1.0, 0.5, 0.2) - ball_kernel_mass_closed(1.0, 0.5, 0.2)) > 1e-3);
    CHECK_THROWS_AS(ball_kernel_mass_closed(1.0, 1.5, 1.0), std::invalid_argument);

    MomentProblem ring;
    ring.domain = MomentDomain::ring;
    CHECK(kernel_mass(ring, 0.3) == 1.0);
    CHECK(domain_radial_integral(ring, [&](double r2) { return domain_kernel(ring, r2, 0.3); }, std::sqrt(0.3)) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("squared kernel mass") {
    MomentProblem p = interval_problem(1.0);
    for (double x : {0.0, 0.3, 0.5})
        for (double t : {0.1, 1.0, 5.0}) {
            p.x = x;
            CHECK(kernel_squared_mass(p, t) == doctest::Approx(interval_sq_mass_closed(x, 1.0, t)).epsilon(1e-10));
            CHECK(kernel_squared_mass(p, t) <= std::pow(8.0 * pi * t, -0.5));
        }
    MomentProblem b;
    b.domain = MomentDomain::ball;
    b.kernel = {KernelFamily::exponential, 1.0, 1.0};
    for (double t : {0.2, 1.0}) {
        BoundEval e = bound_alternative(b, 2, t, 0.0);
        CHECK(e.extra["squared_mass"] == doctest::Approx(e.extra["squared_mass_closed"]).epsilon(1e-8));
        CHECK(e.extra["squared_mass"] <= std::pow(8.0 * pi * t, -1.5));
    }
}

TEST_CASE("Duhamel terms") {
    MomentProblem p = interval_problem(1.0);
    p.source = SourceTerm{SourceTerm::Spatial::uniform, [](double) { return 1.0; }};
    for (double t : {0.3, 1.0, 2.0})
        CHECK(duhamel_term(p, t) ==
              doctest::Approx(duhamel_1d([](double, double) { return 1.0; }, 0.0, 1.0, 0.5, t)).epsilon(1e-6));

    MomentProblem r;
    r.domain = MomentDomain::ring;
    r.x = 0.4;
    r.source = matrix_source(MomentDomain::ring);
    for (double t : {0.5, 1.0, 5.0})
        CHECK(duhamel_term(r, t) ==
              doctest::Approx(std::cos(0.4) * (std::exp(-t) - std::exp(-4.0 * t)) / 3.0).epsilon(1e-10));
    r.source = SourceTerm{SourceTerm::Spatial::uniform, [](double) { return 1.0; }};
    CHECK(duhamel_term(r, 2.5) == doctest::Approx(2.5).epsilon(1e-12));

    MomentProblem b;
    b.domain = MomentDomain::ball;
    b.source = SourceTerm{SourceTerm::Spatial::uniform, [](double) { return 1.0; }};
    const double ref = integrate([](double s) { return ball_kernel_mass_quadrature(1.0, 0.0, s); }, 1e-12, 1.0, 64);
    CHECK(duhamel_term(b, 1.0) == doctest::Approx(ref).epsilon(1e-6));

    p.source = matrix_source(MomentDomain::interval);
    p.C = 2.0;
    CHECK(deterministic_part(p, 1.0) == doctest::Approx(2.0 * kernel_mass(p, 1.0) + duhamel_term(p, 1.0)));
    p.domain = MomentDomain::interval;
    p.source = SourceTerm{SourceTerm::Spatial::cos_theta, [](double) { return 1.0; }};
    CHECK_THROWS_AS(duhamel_term(p, 1.0), std::invalid_argument);
}

TEST_CASE("Monte Carlo moments") {
    MomentProblem p = interval_problem(1.0);
    MomentEnsemble a = mc_moments(p, {0.5, 50.0}, 2000, 11);
    MomentEnsemble b = mc_moments(p, {0.5, 50.0}, 8000, 11);
    const double ratio = b.per_time[0].raw_abs(2).stderr_ / a.per_time[0].raw_abs(2).stderr_;
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
    CHECK(b.per_time[1].raw_abs(2).value < b.per_time[0].raw_abs(2).value / 10.0);
    const Estimate c3 = b.per_time[0].central(3);
    CHECK(std::abs(c3.value) <= sigma_margin * c3.stderr_);
    const Estimate m = mean_estimate(b.per_time[0].samples);
    CHECK(std::abs(m.value) <= sigma_margin * m.stderr_);

    // Streams are shared: the first 2000 draws coincide.
    for (int i = 0; i < 2000; ++i) REQUIRE(a.per_time[0].samples[i] == b.per_time[0].samples[i]);

    FieldSampler sampler(make_moment_grid(p), p.kernel);
    MomentEnsemble c = mc_moments(p, {1.0}, 8000, 5, &sampler);
    const double exact = noise_second_moment(sampler, c.functionals.col(0));
    const Estimate e2 = c.per_time[0].raw_abs(2);
    CHECK(std::abs(e2.value - exact) <= sigma_margin * e2.stderr_);

    MomentProblem z = p;
    z.perturbation = Perturbation::multiplicative;
    z.C = 0.0;
    MomentEnsemble zero = mc_moments(z, {1.0}, 100, 5);
    for (double s : zero.per_time[0].samples) CHECK(s == 0.0);
    z.perturbation = Perturbation::none;
    CHECK_THROWS_AS(mc_moments(z, {1.0}, 100, 5), std::invalid_argument);
}

TEST_CASE("Hoelder and related bounds") {
    MomentProblem p = interval_problem(0.7);
    for (double t : {0.5, 2.0}) {
        // p = 2: zeta v int h^2.
        CHECK(bound_holder(p, 2, t).value == doctest::Approx(0.7 * interval_sq_mass_closed(0.5, 1.0, t)).epsilon(1e-9));
        CHECK(bound_holder(p, 4, t).value_true_moment == doctest::Approx(3.0 * bound_holder(p, 4, t).value));
    }
    CHECK(bound_holder(p, 2, 10.0).value < bound_holder(p, 2, 1.0).value);
    MomentProblem z = interval_problem(0.0);
    CHECK(bound_holder(z, 2, 1.0).value == 0.0);
    CHECK(bound_holder(z, 1, 1.0).value == 0.0);

    // With C = 0 only the beta = p term survives.
    const double M = kernel_mass(p, 1.0);
    CHECK(bound_binomial(p, 2, 1.0).value == doctest::Approx(0.7 * M * M).epsilon(1e-12));

    MomentProblem m = p;
    m.perturbation = Perturbation::multiplicative;
    CHECK(bound_multiplicative(m, 2, 1.0).value == 0.0);
    m.C = 1.5;
    BoundEval bm = bound_multiplicative(m, 2, 1.0);
    CHECK(bm.value == doctest::Approx(bm.extra["constant_data_form"]).epsilon(1e-12));

    MomentProblem b;
    b.domain = MomentDomain::ball;
    b.kernel = p.kernel;
    b.C = 1.0;
    BoundEval bb = bound_ball(b, 2, 1.0);
    CHECK(bb.extra["mass_quadrature"] == doctest::Approx(bb.extra["mass_closed"]).epsilon(1e-8));
    CHECK(bb.value == doctest::Approx(2.0 * b.volume() * 1.7 * std::pow(bb.extra["mass_quadrature"], 2)).epsilon(1e-12));
    CHECK_THROWS_AS(bound_ball(p, 2, 1.0), std::invalid_argument);

    MomentProblem alt = interval_problem(0.0);
    CHECK(bound_alternative(alt, 2, 1.0, 0.0).value == 0.0);
}

TEST_CASE("inhomogeneous bound") {
    MomentProblem p = interval_problem(1.0);
    CHECK(bound_inhomogeneous(p, 2, 1.0).value == doctest::Approx(3.0 * kernel_mass(p, 1.0) * kernel_mass(p, 1.0)));
    p.source = SourceTerm{SourceTerm::Spatial::uniform, [](double) { return 1.0; }};
    MomentEnsemble e = mc_moments(p, {1.0}, 4000, 3);
    BoundReport r = make_bound_report("inhomogeneous", "test", p, 2, 1.0, bound_inhomogeneous(p, 2, 1.0),
                                      e.per_time[0].raw_abs(2));
    CHECK(r.verdict == Verdict::holds);
}

TEST_CASE("double-sided volatility bound") {
    MomentProblem p = interval_problem(1.0);
    for (double t : {0.5, 1.0, 2.0}) {
        BoundEval eq = double_sided_volatility(p, 2, t, BoundConstants::equality(1));
        CHECK(eq.value == doctest::Approx(eq.extra["lower"]).epsilon(1e-12));
        CHECK(eq.value == doctest::Approx(bound_holder(p, 2, t).value).epsilon(1e-9));
        BoundEval st = double_sided_volatility(p, 2, t, BoundConstants::standard(1));
        CHECK(st.extra["lower"] <= st.extra["kernel_form"]);
        CHECK(st.extra["kernel_form"] <= st.value);
    }
    MomentEnsemble e = mc_moments(p, {0.5, 1.0, 2.0}, 4000, 9);
    for (std::size_t k = 0; k < 3; ++k) {
        const double t = e.per_time[k].t;
        BoundEval st = double_sided_volatility(p, 2, t, BoundConstants::standard(1));
        BoundReport r = make_bound_report("double_sided", "test", p, 2, t, st, e.per_time[k].raw_abs(2), st.extra["lower"]);
        CHECK(r.verdict == Verdict::holds);
    }
}

TEST_CASE("report verdicts") {
    MomentProblem p = interval_problem(1.0);
    BoundEval b;
    b.value = 1.0;
    b.value_true_moment = 3.0;
    CHECK(make_bound_report("x", "r", p, 4, 1.0, b, {2.0, 0.01}).verdict == Verdict::printed_convention_only);
    CHECK(make_bound_report("x", "r", p, 2, 1.0, b, {2.0, 0.01}).verdict == Verdict::violated);
    CHECK(make_bound_report("x", "r", p, 4, 1.0, b, {0.5, 0.01}).verdict == Verdict::holds);
    CHECK(make_bound_report("x", "r", p, 2, 1.0, b, {0.5, 0.01}, 0.9).verdict == Verdict::violated);
    CHECK(make_bound_report("x", "r", p, 2, 1.0, b, {0.5, 0.01}, 0.2).verdict == Verdict::holds);
}

TEST_CASE("ring theorem bound") {
    RingCoefficients zero{std::vector<double>(13, 0.0), std::vector<double>(13, 0.0)};
    CHECK(ring_moment_bound(zero, 0.3, 1.0, 2, 0.0, 12).value == 0.0);
    RingCoefficients one = zero;
    one.A[1] = 1.0;
    CHECK(ring_moment_bound(one, 0.0, 1.0, 2, 0.0, 12).value == doctest::Approx(std::exp(-2.0) / 64.0).epsilon(1e-12));

    MomentProblem r;
    r.domain = MomentDomain::ring;
    r.x = 0.0;
    r.kernel = {KernelFamily::exponential, 1.0, 1.0};
    MomentEnsemble e = mc_moments(r, {2.0}, 4000, 17);
    BoundEval b2 = ring_moment_bound(zero, 0.0, 2.0, 2, 1.0, 12);
    CHECK(make_bound_report("ring", "test", r, 2, 2.0, b2, e.per_time[0].raw_abs(2)).verdict == Verdict::holds);
    // The 2^{-3p} prefactor is too small at p = 4, even with the true Gaussian moment.
    BoundEval b4 = ring_moment_bound(zero, 0.0, 2.0, 4, 1.0, 12);
    CHECK(make_bound_report("ring", "test", r, 4, 2.0, b4, e.per_time[0].raw_abs(4)).verdict == Verdict::violated);
}

TEST_CASE("Dirichlet energy") {
    for (double t : {0.2, 1.0, 3.0}) {
        const double l = 1.0;
        const double ref = 2.0 * (l * std::sqrt(pi * t / 2.0) * std::erf(l / std::sqrt(2.0 * t)) -
                                  t * (1.0 - std::exp(-l * l / (2.0 * t)))) /
                           (4.0 * pi * t);
        CHECK(energy_excess_quadrature(0.8, l, t) == doctest::Approx(0.8 * l * ref).epsilon(1e-10));
    }
    CHECK(energy_excess_quadrature(0.0, 1.0, 1.0) == 0.0);

    MomentProblem p = interval_problem(1.0);
    p.C = 1.0;
    EnergyReport rep = dirichlet_energy(p, {0.5, 1.0, 2.0}, 4000, 4);
    CHECK(rep.decreasing);
    for (const auto& pt : rep.points) CHECK(pt.verdict == Verdict::holds);
    MomentProblem q = interval_problem(0.0);
    q.C = 1.0;
    EnergyReport det = dirichlet_energy(q, {1.0}, 50, 4);
    CHECK(det.points[0].empirical.value == doctest::Approx(det.points[0].deterministic).epsilon(1e-3));
    CHECK(det.points[0].empirical.stderr_ <= 1e-15);
    CHECK(det.points[0].excess == 0.0);
    MomentProblem ring;
    ring.domain = MomentDomain::ring;
    CHECK_THROWS_AS(dirichlet_energy(ring, {1.0}, 10, 1), std::invalid_argument);
}

TEST_CASE("Lyapunov exponent") {
    std::vector<double> t = linspace(1.0, 5.0, 9), up, down, flat;
    for (double s : t) {
        up.push_back(2.0 * std::exp(3.0 * s));
        down.push_back(0.5 * std::exp(-3.0 * s));
        flat.push_back(1.0);
    }
    CHECK(lyapunov_fit(t, up).exponent == doctest::Approx(3.0).epsilon(0.03));
    CHECK(lyapunov_fit(t, up).classification == Stability::unstable);
    CHECK(lyapunov_fit(t, down).exponent == doctest::Approx(-3.0).epsilon(0.03));
    CHECK(lyapunov_fit(t, down).classification == Stability::stable);
    CHECK(lyapunov_fit(t, flat).classification == Stability::stable);
    std::vector<double> under(t.size(), 0.0);
    CHECK(lyapunov_fit(t, under).classification == Stability::superstable);
    std::vector<double> steep;
    for (double s : t) steep.push_back(std::exp(-500.0 * s));
    CHECK(lyapunov_fit(t, steep).classification == Stability::superstable);

    MomentProblem p = interval_problem(1.0);
    LyapunovReport r = lyapunov_exponent(p, {10.0, 20.0, 30.0, 40.0, 50.0}, 1000, 2);
    CHECK(r.exponent <= 0.02);
    CHECK_THROWS_AS(lyapunov_exponent(p, {1.0, 5.0}, 100, 2), std::invalid_argument);
}

TEST_CASE("white noise comparison") {
    WhiteNoiseReport w = white_noise_she_variance(1, logspace(0.0, 2.0, 11));
    CHECK(w.fitted_exponent == doctest::Approx(0.5).epsilon(1e-6));
    CHECK_FALSE(w.diverges);
    for (std::size_t i = 0; i < w.t.size(); ++i)
        CHECK(w.integral_quadrature[i] == doctest::Approx(w.integral_analytic[i]).epsilon(1e-10));
    WhiteNoiseReport four = white_noise_she_variance(1, {4.0});
    CHECK(four.integral_analytic[0] == doctest::Approx(4.0));
    CHECK(four.variance[0] == doctest::Approx(4.0 / std::sqrt(8.0 * pi)));
    WhiteNoiseReport two = white_noise_she_variance(2, {1.0, 2.0});
    CHECK(two.diverges);
    CHECK(std::isinf(two.integral_analytic[0]));
}

TEST_CASE("moment matrix on a reduced configuration") {
    MatrixConfig cfg;
    cfg.domains = {MomentDomain::interval, MomentDomain::ring};
    cfg.zetas = {1.0};
    cfg.times = {0.5, 2.0};
    cfg.N = 2000;
    MomentMatrix m = run_moment_matrix(cfg);
    CHECK(m.identity_pass);
    CHECK(m.decay_pass);
    for (const auto& r : m.reports) {
        if (r.bound_name == "alternative") continue;
        if (r.bound_name == "double_sided" && r.inputs.at("p") == 4.0 && r.inputs.count("theta")) continue;
        INFO(r.bound_name << " p=" << r.inputs.at("p") << " t=" << r.inputs.at("t"));
        CHECK((r.verdict == Verdict::holds || r.verdict == Verdict::printed_convention_only));
    }
}
