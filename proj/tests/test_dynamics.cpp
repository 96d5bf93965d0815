#include "delaygame/dynamics.hpp"
#include "delaygame/example_game.hpp"
#include "delaygame/games.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace delaygame;

namespace {

Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

GamePosition delay_linear_start() { return {0.0, vec({1}), History::constant(1.0, vec({1}))}; }

double delay_linear_at(double theta, std::size_t steps, Scheme scheme) {
    const GameSpec g = games::delay_linear_spec(theta);
    const auto zero = ControlSignal::constant(0.0, theta, vec({0}));
    return integrate(g, delay_linear_start(), zero, zero, steps, scheme).terminal_state()(0);
}

GamePosition example_position() { return {2.5, vec({1, 0}), History::zero(1.0, 2)}; }

} // namespace

TEST(ControlBox, GridContainsEndpoints) {
    const ControlBox b = ControlBox::interval(-1.0, 1.0, 5);
    const auto g = b.grid();
    ASSERT_EQ(g.size(), 5u);
    EXPECT_EQ(g.front()(0), -1.0);
    EXPECT_EQ(g.back()(0), 1.0);
    EXPECT_DOUBLE_EQ(b.spacing(), 0.5);
    EXPECT_EQ(b.grid({3})[1](0), 0.0);
    const auto mid = b.grid({1});
    ASSERT_EQ(mid.size(), 1u);
    EXPECT_EQ(mid[0](0), 0.0);
}

TEST(ControlBox, ProductGridAndValidation) {
    const ControlBox b(vec({0, -2}), vec({1, 2}), {2, 3});
    EXPECT_EQ(b.grid().size(), 6u);
    EXPECT_TRUE(b.contains(vec({1, -2})));
    EXPECT_FALSE(b.contains(vec({1.1, 0})));
    EXPECT_THROW(ControlBox(vec({1}), vec({0}), {2}), DomainError);
    EXPECT_THROW(ControlBox::interval(0.0, 1.0, 1), DomainError);
    EXPECT_THROW(b.grid({3}), DomainError);
}

TEST(ControlSignal, RightContinuousCells) {
    const auto s = ControlSignal::uniform(0.0, 1.0, {vec({1}), vec({2})});
    EXPECT_EQ(s.value_at(0.0)(0), 1.0);
    EXPECT_EQ(s.value_at(0.4999)(0), 1.0);
    EXPECT_EQ(s.value_at(0.5)(0), 2.0);
    EXPECT_EQ(s.value_at(1.0)(0), 2.0);
    const ControlBox box = ControlBox::interval(0.0, 1.5, 2);
    EXPECT_THROW(s.validate(box, 0.0, 1.0), DomainError);
}

TEST(Integrate, DelayLinearEulerOnFirstInterval) {
    EXPECT_NEAR(delay_linear_at(1.0, 1000, Scheme::Euler), oracle::delay_linear_exact(1.0), 1e-3);
    EXPECT_NEAR(delay_linear_at(1.0, 1000, Scheme::Heun), oracle::delay_linear_exact(1.0), 1e-3);
}

TEST(Integrate, EulerIsFirstOrder) {
    const double e1 = std::abs(delay_linear_at(2.0, 200, Scheme::Euler) - oracle::delay_linear_exact(2.0));
    const double e2 = std::abs(delay_linear_at(2.0, 400, Scheme::Euler) - oracle::delay_linear_exact(2.0));
    const double e3 = std::abs(delay_linear_at(2.0, 800, Scheme::Euler) - oracle::delay_linear_exact(2.0));
    EXPECT_GT(e1, 0.0);
    EXPECT_NEAR(e1 / e2, 2.0, 0.1);
    EXPECT_NEAR(e2 / e3, 2.0, 0.1);
}

TEST(Integrate, HeunIsSecondOrder) {
    const double e1 = std::abs(delay_linear_at(2.0, 20, Scheme::Heun) - oracle::delay_linear_exact(2.0));
    const double e2 = std::abs(delay_linear_at(2.0, 40, Scheme::Heun) - oracle::delay_linear_exact(2.0));
    EXPECT_LT(e2, e1);
    EXPECT_GT(e1 / std::max(e2, 1e-300), 3.0);
}

TEST(Integrate, ExampleTrajectoryAndPayoff) {
    const GameSpec g = demo::example_spec();
    const double u = -1.0 / std::sqrt(2.0);
    const auto us = ControlSignal::constant(2.5, 3.0, vec({u}));
    const auto vs = ControlSignal::constant(2.5, 3.0, vec({0}));
    const Motion m = integrate(g, example_position(), us, vs, 50);
    EXPECT_NEAR(m.terminal_state()(0), 1.0 + 0.5 * u, 1e-12);
    EXPECT_NEAR(m.terminal_state()(1), 0.0, 1e-15);
    EXPECT_NEAR(payoff(g, m, us, vs), 1.0 - std::sqrt(2.0) / 2.0, 1e-12);
}

TEST(Integrate, SliceAgreesWithStateAt) {
    const GameSpec g = demo::example_spec();
    const GamePosition pos{0.0, vec({0.3, -0.2}), History(1.0, {-1.0, -0.4, 0.0}, {ConstantPiece{vec({1, 1})}, ConstantPiece{vec({0, -1})}})};
    const auto us = ControlSignal::uniform(0.0, 3.0, {vec({0.5}), vec({-1}), vec({0.2})});
    const auto vs = ControlSignal::uniform(0.0, 3.0, {vec({2}), vec({-2})});
    const Motion m = integrate(g, pos, us, vs, 300);
    for (double t : {0.0, 0.35, 1.0, 1.57, 2.99, 3.0}) {
        const History xt = m.slice(t);
        for (double xi : {-1.0, -0.61, -0.3, -0.001}) EXPECT_NEAR((xt.eval(xi) - m.state_at(t + xi)).norm(), 0.0, 1e-12);
    }
    EXPECT_THROW(m.slice(3.1), DomainError);
    EXPECT_THROW(m.state_at(-1.5), DomainError);
}

TEST(Integrate, Deterministic) {
    const GameSpec g = demo::example_spec();
    const auto us = ControlSignal::uniform(2.5, 3.0, {vec({0.1}), vec({-0.7})});
    const auto vs = ControlSignal::constant(2.5, 3.0, vec({2}));
    const Motion a = integrate(g, example_position(), us, vs, 77, Scheme::Heun);
    const Motion b = integrate(g, example_position(), us, vs, 77, Scheme::Heun);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.state(k), b.state(k));
}

TEST(Integrate, LipschitzEstimateBoundsVelocity) {
    const GameSpec g = demo::example_spec();
    const auto us = ControlSignal::constant(2.5, 3.0, vec({1}));
    const auto vs = ControlSignal::constant(2.5, 3.0, vec({2}));
    const Motion m = integrate(g, example_position(), us, vs, 10);
    EXPECT_NEAR(m.lipschitz_estimate(), std::sqrt(1.0 + 4.0), 1e-12);
}

TEST(Integrate, PayoffQuadratureMatchesScheme) {
    GameSpec g = games::trivial_spec(1, 1.0);
    g.f0 = [](double t, const Vec&, const History&, const Vec&, const Vec&) { return t; };
    g.sigma = [](const Vec&, const History&) { return 0.0; };
    const GamePosition pos{0.0, vec({0}), History::zero(1.0, 1)};
    const auto zero = ControlSignal::constant(0.0, 1.0, vec({0}));
    const std::size_t n = 10;
    const double euler = payoff(g, integrate(g, pos, zero, zero, n, Scheme::Euler), zero, zero);
    const double heun = payoff(g, integrate(g, pos, zero, zero, n, Scheme::Heun), zero, zero);
    EXPECT_NEAR(euler, 0.5 - 0.5 / n, 1e-14);  // left rectangles
    EXPECT_NEAR(heun, 0.5, 1e-14);             // trapezoid is exact for t
}

TEST(Integrate, RejectsBadInput) {
    const GameSpec g = demo::example_spec();
    const auto bad_u = ControlSignal::constant(2.5, 3.0, vec({1.5}));
    const auto vs = ControlSignal::constant(2.5, 3.0, vec({0}));
    EXPECT_THROW(integrate(g, example_position(), bad_u, vs, 10), DomainError);
    const auto short_u = ControlSignal::constant(2.5, 2.9, vec({0}));
    EXPECT_THROW(integrate(g, example_position(), short_u, vs, 10), DomainError);
    GamePosition late = example_position();
    late.tau = 3.0;
    EXPECT_THROW(integrate(g, late, vs, vs, 10), DomainError);
}

TEST(Integrate, NonFiniteDynamicsThrow) {
    GameSpec g = games::trivial_spec(1, 1.0);
    g.f = [](double t, const Vec&, const History&, const Vec&, const Vec&) {
        return Vec::Constant(1, t > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0).eval();
    };
    const GamePosition pos{0.0, vec({0}), History::zero(1.0, 1)};
    const auto zero = ControlSignal::constant(0.0, 1.0, vec({0}));
    try {
        integrate(g, pos, zero, zero, 10);
        FAIL() << "expected IntegrationError";
    } catch (const IntegrationError& e) {
        EXPECT_GT(e.time(), 0.5);
    }
}
