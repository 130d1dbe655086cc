#include <doctest.h>

#include <lux/newton.hpp>

#include <cmath>
#include <vector>

using namespace lux;

TEST_CASE("gaussian elimination solves a dense system") {
    // A = [[2,1,-1],[-3,-1,2],[-2,1,2]], b = [8,-11,-3], x = [2,3,-1].
    std::vector<double> A{2, 1, -1, -3, -1, 2, -2, 1, 2};
    std::vector<double> b{8, -11, -3};
    REQUIRE(solve_linear(A, b, 3));
    CHECK(b[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(b[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(b[2] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("gaussian elimination reports singular matrices") {
    std::vector<double> A{1, 2, 2, 4};
    std::vector<double> b{1, 2};
    CHECK_FALSE(solve_linear(A, b, 2));
}

TEST_CASE("newton solves a coupled nonlinear system") {
    // x^2 + y^2 = 4, e^x + y = 1; root near (-1.8163, 0.8374).
    const ResidualFn F = [](const std::vector<double>& x)
        -> std::optional<std::vector<double>> {
        return std::vector<double>{x[0] * x[0] + x[1] * x[1] - 4.0,
                                   std::exp(x[0]) + x[1] - 1.0};
    };
    const NewtonReport rep = damped_newton(F, {-1.0, 1.0}, {});
    REQUIRE(rep.converged);
    CHECK(rep.residual_norm <= 1e-10);
    CHECK(rep.x[0] == doctest::Approx(-1.81626).epsilon(1e-4));
    CHECK(rep.x[1] == doctest::Approx(0.83737).epsilon(1e-4));
}

TEST_CASE("newton backtracks through a stiff valley") {
    // Rosenbrock gradient system; the full step overshoots badly from afar.
    const ResidualFn F = [](const std::vector<double>& x)
        -> std::optional<std::vector<double>> {
        return std::vector<double>{10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]};
    };
    const NewtonReport rep = damped_newton(F, {-1.2, 1.0}, {});
    REQUIRE(rep.converged);
    CHECK(rep.x[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.x[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("newton treats evaluation failures as barriers") {
    // sqrt(x) - 2 = 0 with the residual undefined for x < 0: the damping
    // must shrink steps that leave the domain instead of crashing.
    const ResidualFn F = [](const std::vector<double>& x)
        -> std::optional<std::vector<double>> {
        if (x[0] < 0.0) return std::nullopt;
        return std::vector<double>{std::sqrt(x[0]) - 2.0};
    };
    const NewtonReport rep = damped_newton(F, {0.1}, {});
    REQUIRE(rep.converged);
    CHECK(rep.x[0] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("newton gives up cleanly when no root exists") {
    const ResidualFn F = [](const std::vector<double>& x)
        -> std::optional<std::vector<double>> {
        return std::vector<double>{x[0] * x[0] + 1.0};
    };
    const NewtonReport rep = damped_newton(F, {3.0}, {});
    CHECK_FALSE(rep.converged);
    CHECK_FALSE(rep.message.empty());
}
