#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ellipflow/emden.hpp"
#include "ellipflow/profile.hpp"
#include "test_support.hpp"

using namespace ellipflow;

namespace {

ModelParams gaussian2d() {
    ModelParams p;
    p.n = 2;
    p.gamma = 1.0;
    p.k_pressure = 1.0;
    p.xi = 2.0;
    p.alpha = 1.0;
    return p;
}

}  // namespace

TEST_CASE("s_variable matches the quadratic form") {
    ModelParams p = gaussian2d();
    EmdenState st{0.0, {1.0, 2.0}, {0.0, 0.0}};

    SUBCASE("center of the ellipsoid") {
        p.d = {0.3, -0.7};
        CHECK(s_variable(st, std::vector<double>{-0.3, 0.7}, p) == 0.0);
    }
    SUBCASE("direct substitution, N=2") {
        CHECK(s_variable(st, std::vector<double>{1.0, 2.0}, p) == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("direct substitution, N=1 with drift") {
        ModelParams q;
        q.n = 1;
        q.gamma = 1.0;
        q.xi = 1.0;
        q.d = {1.0};
        EmdenState s1{0.0, {2.0}, {0.0}};
        CHECK(s_variable(s1, std::vector<double>{1.0}, q) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(s_variable(st, std::vector<double>{1.0}, p), input_error);
    }
}

TEST_CASE("profile_value branches") {
    SUBCASE("f(0) = alpha for gamma = 1") {
        ModelParams p = gaussian2d();
        CHECK(profile_value(0.0, p) == 1.0);
    }
    SUBCASE("isothermal exponential") {
        ModelParams p = gaussian2d();  // xi/(2K) = 1
        CHECK(profile_value(1.0, p) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    }
    SUBCASE("truncation at the support boundary") {
        ModelParams p;
        p.n = 1;
        p.gamma = 2.0;
        p.xi = 1.0;
        p.alpha = 1.0;
        CHECK(profile_value(4.0, p) == 0.0);
        CHECK(profile_value(5.0, p) == 0.0);
        CHECK(profile_value(3.999, p) > 0.0);
    }
    SUBCASE("polytropic substitution") {
        ModelParams p;
        p.n = 1;
        p.gamma = 3.0;
        p.xi = 3.0;
        p.alpha = 4.0;
        CHECK(profile_value(1.0, p) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    }
    SUBCASE("amplitude enters inside the power for gamma > 1") {
        ModelParams p;
        p.n = 1;
        p.gamma = 3.0;
        p.xi = 1.0;
        p.alpha = 4.0;
        CHECK(profile_value(0.0, p) == doctest::Approx(2.0).epsilon(1e-15));  // alpha^{1/(gamma-1)}
    }
    SUBCASE("negative s rejected") {
        CHECK_THROWS_AS(profile_value(-0.1, gaussian2d()), input_error);
    }
}

TEST_CASE("profile_derivative") {
    SUBCASE("hand-derived isothermal slope with finite-difference cross-check") {
        ModelParams p = gaussian2d();  // f = e^{-s}, f'(0) = -1
        CHECK(profile_derivative(0.0, p) == doctest::Approx(-1.0).epsilon(1e-14));
        const double h = 1e-6;
        const double fd = (profile_value(1.0 + h, p) - profile_value(1.0 - h, p)) / (2.0 * h);
        CHECK(profile_derivative(1.0, p) == doctest::Approx(fd).epsilon(1e-8));
    }
    SUBCASE("flat profile for xi = 0") {
        ModelParams p = gaussian2d();
        p.xi = 0.0;
        CHECK(profile_derivative(2.0, p) == 0.0);
        ModelParams q;
        q.n = 1;
        q.gamma = 2.0;
        q.xi = 0.0;
        CHECK(profile_derivative(2.0, q) == 0.0);
    }
    SUBCASE("linear branch for gamma = 2") {
        ModelParams p;
        p.n = 1;
        p.gamma = 2.0;
        p.xi = 1.0;
        p.alpha = 1.0;
        CHECK(profile_derivative(1.0, p) == doctest::Approx(-0.25).epsilon(1e-15));
        // governing identity xi/(2 K gamma) + f^{gamma-2} f' = 0 at s = 1
        const double lhs = p.xi / (2.0 * p.k_pressure * p.gamma) +
                           std::pow(profile_value(1.0, p), p.gamma - 2.0) * profile_derivative(1.0, p);
        CHECK(std::fabs(lhs) <= 1e-15);
    }
    SUBCASE("vacuum edge rejected") {
        ModelParams p;
        p.n = 1;
        p.gamma = 2.0;
        p.xi = 1.0;
        CHECK_THROWS_AS(profile_derivative(4.0, p), boundary_error);
        CHECK_THROWS_AS(profile_derivative(9.0, p), boundary_error);
    }
}

TEST_CASE("profile ODE identity over random parameters") {
    testsupport::Rng rng(20240517);
    const std::vector<double> gammas{1.0, 1.4, 2.0, 3.0};
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        ModelParams p;
        p.n = 1;
        p.gamma = rng.choice(gammas);
        p.k_pressure = rng.uniform(0.3, 3.0);
        p.xi = rng.uniform(-5.0, 5.0);
        p.alpha = rng.uniform(0.2, 3.0);
        const double s = rng.uniform(0.0, 4.0);
        if (profile_value(s, p) <= 0.0) continue;
        const double target = p.xi / (2.0 * p.k_pressure * p.gamma);
        const double lhs =
            target + std::pow(profile_value(s, p), p.gamma - 2.0) * profile_derivative(s, p);
        CHECK(std::fabs(lhs) <= 1e-10 * (1.0 + std::fabs(target)));
        ++checked;
    }
    CHECK(checked > 500);
}

TEST_CASE("evaluate_field") {
    SUBCASE("static scales give zero velocity") {
        ModelParams p = gaussian2d();
        EmdenState st{0.0, {1.3, 0.8}, {0.0, 0.0}};
        const FieldSample fs = evaluate_field(st, std::vector<double>{0.4, -0.2}, p);
        CHECK(fs.u[0] == 0.0);
        CHECK(fs.u[1] == 0.0);
    }
    SUBCASE("substitution example") {
        ModelParams p = gaussian2d();
        EmdenState st{0.0, {1.0, 2.0}, {1.0, -1.0}};
        const FieldSample fs = evaluate_field(st, std::vector<double>{1.0, 2.0}, p);
        CHECK(fs.s == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(fs.rho == doctest::Approx(std::exp(-2.0) / 2.0).epsilon(1e-15));
        CHECK(fs.rho == doctest::Approx(0.0676676416183063).epsilon(1e-12));
        CHECK(fs.u[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(fs.u[1] == doctest::Approx(-1.0).epsilon(1e-15));
    }
    SUBCASE("unit scales reduce to the pure profile") {
        ModelParams p = gaussian2d();
        EmdenState st{0.0, {1.0, 1.0}, {0.0, 0.0}};
        const std::vector<double> x{0.7, -0.4};
        const FieldSample fs = evaluate_field(st, x, p);
        CHECK(fs.rho ==
              doctest::Approx(profile_value(x[0] * x[0] + x[1] * x[1], p)).epsilon(1e-15));
    }
    SUBCASE("density is compositionally consistent") {
        testsupport::Rng rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            ModelParams p;
            p.n = 3;
            p.gamma = 1.4;
            p.xi = rng.uniform(0.1, 2.0);
            p.alpha = rng.uniform(0.5, 2.0);
            p.d = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            EmdenState st{0.0,
                          {rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 2)},
                          {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}};
            const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            const FieldSample fs = evaluate_field(st, x, p);
            CHECK(fs.rho == profile_value(s_variable(st, x, p), p) / product(st.a));
        }
    }
    SUBCASE("ellipsoid symmetry: equal s gives equal density") {
        ModelParams p = gaussian2d();
        p.d = {0.5, -0.25};
        EmdenState st{0.0, {1.5, 0.75}, {0.2, -0.1}};
        const double s = 1.3;
        // Two points on the same level set, one per axis direction.
        const std::vector<double> xa{st.a[0] * std::sqrt(s) - p.d[0], -p.d[1]};
        const std::vector<double> xb{-p.d[0], st.a[1] * std::sqrt(s) - p.d[1]};
        const FieldSample fa = evaluate_field(st, xa, p);
        const FieldSample fb = evaluate_field(st, xb, p);
        CHECK(fa.s == doctest::Approx(s).epsilon(1e-14));
        CHECK(fa.rho == doctest::Approx(fb.rho).epsilon(1e-14));
    }
}

TEST_CASE("support_geometry") {
    SUBCASE("bounded polytropic support") {
        ModelParams p;
        p.n = 2;
        p.gamma = 2.0;
        p.xi = 1.0;
        p.alpha = 1.0;
        EmdenState st{0.0, {1.0, 2.0}, {0.0, 0.0}};
        const SupportGeometry g = support_geometry(st, p);
        REQUIRE(g.bounded);
        CHECK(*g.s_max == doctest::Approx(4.0).epsilon(1e-15));
        CHECK((*g.semi_axes)[0] == doctest::Approx(2.0).epsilon(1e-15));
        CHECK((*g.semi_axes)[1] == doctest::Approx(4.0).epsilon(1e-15));
        CHECK(profile_value(*g.s_max, p) == 0.0);
        CHECK(profile_value(*g.s_max * 0.999, p) > 0.0);
    }
    SUBCASE("isothermal profiles never vanish") {
        ModelParams p = gaussian2d();
        p.xi = -3.0;
        EmdenState st{0.0, {1.0, 1.0}, {0.0, 0.0}};
        CHECK_FALSE(support_geometry(st, p).bounded);
        p.xi = 3.0;
        CHECK_FALSE(support_geometry(st, p).bounded);
    }
    SUBCASE("expanding inner term is unbounded") {
        ModelParams p;
        p.n = 1;
        p.gamma = 2.0;
        p.xi = -1.0;
        EmdenState st{0.0, {1.0}, {0.0}};
        CHECK_FALSE(support_geometry(st, p).bounded);
    }
}

TEST_CASE("total_mass") {
    SUBCASE("planar Gaussian integrates to pi") {
        ModelParams p = gaussian2d();  // f(s) = e^{-s}
        EmdenState st{0.0, {1.0, 1.0}, {0.0, 0.0}};
        const MassResult m = total_mass(st, p, {});
        CHECK(m.value == doctest::Approx(M_PI).epsilon(1e-8));
        CHECK(m.tail_bound < 1e-12);
    }
    SUBCASE("mass is invariant along a trajectory") {
        ModelParams p = gaussian2d();
        EmdenState init{0.0, {1.0, 1.0}, {0.0, 0.0}};
        const Trajectory traj = integrate(p, init, 0.5);
        const double m0 = total_mass(init, p, {}).value;
        const double m1 = total_mass(traj.state_at(0.5), p, {}).value;
        CHECK(std::fabs(m1 - m0) <= 1e-6 * std::fabs(m0));
        // drift and anisotropic scales move the quadrature box with the support
        ModelParams q = gaussian2d();
        q.d = {0.4, -0.9};
        EmdenState init2{0.0, {1.0, 2.0}, {0.5, -0.2}};
        const Trajectory traj2 = integrate(q, init2, 0.5);
        const double n0 = total_mass(init2, q, {}).value;
        const double n1 = total_mass(traj2.state_at(0.5), q, {}).value;
        CHECK(std::fabs(n1 - n0) <= 1e-6 * std::fabs(n0));
        CHECK(n0 == doctest::Approx(M_PI).epsilon(1e-6));  // same f, same mass
    }
    SUBCASE("compact support against a dense trapezoid oracle") {
        ModelParams p;
        p.n = 1;
        p.gamma = 2.0;
        p.xi = 1.0;
        p.alpha = 1.0;  // rho = 1 - x^2/4 on [-2, 2]
        EmdenState st{0.0, {1.0}, {0.0}};
        QuadratureSpec quad;
        quad.nodes_per_axis = 1 << 15;
        const double mass = total_mass(st, p, quad).value;
        // Independent oracle: dense trapezoid over the support.
        const long n = 1 << 21;
        const double a = -2.0, b = 2.0, h = (b - a) / n;
        double oracle = 0.0;
        for (long i = 0; i <= n; ++i) {
            const double x = a + i * h;
            const double f = profile_value(x * x, p);
            oracle += (i == 0 || i == n) ? 0.5 * f : f;
        }
        oracle *= h;
        CHECK(oracle == doctest::Approx(8.0 / 3.0).epsilon(1e-10));
        CHECK(mass == doctest::Approx(oracle).epsilon(1e-8));
    }
    SUBCASE("infinite-mass regimes are rejected") {
        ModelParams p = gaussian2d();
        p.xi = -1.0;
        EmdenState st{0.0, {1.0, 1.0}, {0.0, 0.0}};
        CHECK_THROWS_AS(total_mass(st, p, {}), unsupported_regime_error);
        ModelParams q;
        q.n = 1;
        q.gamma = 2.0;
        q.xi = 0.0;
        EmdenState s1{0.0, {1.0}, {0.0}};
        CHECK_THROWS_AS(total_mass(s1, q, {}), unsupported_regime_error);
    }
}

TEST_CASE("parameter validation") {
    ModelParams p = gaussian2d();
    p.n = 0;
    CHECK_THROWS_AS(p.validate(), input_error);
    p = gaussian2d();
    p.gamma = 0.9;
    CHECK_THROWS_AS(p.validate(), input_error);
    p = gaussian2d();
    p.k_pressure = 0.0;
    CHECK_THROWS_AS(p.validate(), input_error);
    p = gaussian2d();
    p.d = {1.0};
    CHECK_THROWS_AS(p.validate(), input_error);
    EmdenState st{0.0, {1.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(st.validate(gaussian2d()), input_error);
}
