#include "delaygame/example_game.hpp"
#include "delaygame/games.hpp"
#include "delaygame/valuesolver.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace delaygame;
namespace ex = delaygame::demo;

namespace {

Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

DPConfig config(std::size_t steps, std::vector<int> u = {}, std::vector<int> v = {}) {
    DPConfig c;
    c.steps = steps;
    c.u_grid = std::move(u);
    c.v_grid = std::move(v);
    return c;
}

} // namespace

TEST(ValueSolver, TrivialGameIsZero) {
    const GameSpec g = games::trivial_spec(2, 1.0);
    const GamePosition pos{0.0, Vec::Ones(2), History::zero(1.0, 2)};
    const ValueEstimate lo = lower_value(g, pos, config(2));
    EXPECT_EQ(lo.value, 0.0);
    EXPECT_EQ(upper_value(g, pos, config(2)).value, 0.0);
    EXPECT_EQ(programmed_maximin(g, pos, config(2)).value, 0.0);
    EXPECT_EQ(lo.node_count, 81u);
    EXPECT_EQ(lo.u_grid, std::vector<int>{3});
    EXPECT_EQ(lo.steps, 2u);
}

TEST(ValueSolver, BudgetIsEnforced) {
    const GameSpec g = games::trivial_spec(1, 1.0);
    const GamePosition pos{0.0, vec({0}), History::zero(1.0, 1)};
    try {
        lower_value(g, pos, config(10));
        FAIL() << "expected ResourceError";
    } catch (const ResourceError& e) {
        EXPECT_NEAR(e.required(), std::pow(9.0, 10.0), 1.0);
        EXPECT_EQ(e.budget(), 1e7);
    }
    DPConfig small = config(3);
    small.node_budget = 9.0 * 9.0 * 9.0;
    EXPECT_NO_THROW(lower_value(g, pos, small));
}

TEST(ValueSolver, DelayLinearMatchesEuler) {
    const GameSpec g = games::delay_linear_spec(2.0);
    const GamePosition pos{0.0, vec({1}), History::constant(1.0, vec({1}))};
    DPConfig c = config(4);
    c.substeps = 50;
    const double v = lower_value(g, pos, c).value;
    const auto zero = ControlSignal::constant(0.0, 2.0, vec({0}));
    const double euler = integrate(g, pos, zero, zero, 200).terminal_state()(0);
    EXPECT_NEAR(v, euler, 1e-12);
    EXPECT_NEAR(v, oracle::delay_linear_exact(2.0), 0.02);
}

TEST(ValueSolver, NonIsaacsOrdering) {
    const GameSpec g = games::nonisaacs_spec();
    const GamePosition pos{0.0, vec({0}), History::zero(1.0, 1)};
    const double lo = lower_value(g, pos, config(2)).value;
    const double up = upper_value(g, pos, config(2)).value;
    EXPECT_NEAR(lo, 1.0, 1e-12);
    EXPECT_NEAR(up, 0.0, 1e-12);
    EXPECT_GE(lo - up, 0.4);
    EXPECT_NEAR(programmed_maximin(g, pos, config(2)).value, 0.0, 1e-12);
}

TEST(ValueSolver, InformationOrdering) {
    // more information for the answering player can only help it
    const GameSpec g = ex::example_spec(5, 3);
    for (const GamePosition& pos : ex::sample_positions(6, 17)) {
        const DPConfig c = config(2);
        const double lo = lower_value(g, pos, c).value;
        const double up = upper_value(g, pos, c).value;
        const double pm = programmed_maximin(g, pos, c).value;
        EXPECT_LE(pm, up + 1e-12);
        EXPECT_LE(up, lo + 1e-12);
    }
}

TEST(ValueSolver, MemoizationDoesNotChangeValues) {
    const GameSpec g = ex::example_spec(3, 3);
    const GamePosition pos{2.0, vec({0.2, -0.4}), History::constant(1.0, vec({0.0, 0.5}))};
    DPConfig c = config(3);
    const double plain = lower_value(g, pos, c).value;
    c.memoize = true;
    EXPECT_NEAR(lower_value(g, pos, c).value, plain, 1e-12);
}

TEST(ValueSolver, ExampleValueOneStage) {
    const GameSpec g = ex::example_spec();
    const GamePosition pos{2.5, vec({1, 0}), History::zero(1.0, 2)};
    const double target = 1.0 - std::sqrt(2.0) / 2.0;
    EXPECT_NEAR(lower_value(g, pos, config(1)).value, target, 1e-5);
    EXPECT_NEAR(upper_value(g, pos, config(1)).value, target, 1e-5);
}

TEST(ValueSolver, RejectsBadInput) {
    const GameSpec g = games::trivial_spec(1, 1.0);
    const GamePosition pos{1.0, vec({0}), History::zero(1.0, 1)};
    EXPECT_THROW(lower_value(g, pos, config(1)), DomainError);
    const GamePosition ok{0.0, vec({0}), History::zero(1.0, 1)};
    EXPECT_THROW(lower_value(g, ok, config(0)), DomainError);
    EXPECT_THROW(lower_value(g, ok, config(1, {3, 3})), DomainError);
}

TEST(Stability, TrivialFunctionalIsStable) {
    const GameSpec g = games::trivial_spec(1, 1.0);
    const Functional phi{[](const GamePosition& p) { return std::abs(p.z(0)); }, 0.0, 1.0};
    const GamePosition pos{0.2, vec({0.7}), History::zero(1.0, 1)};
    const StabilityResiduals r = stability_residuals(phi, g, pos, 0.5, config(2));
    EXPECT_NEAR(r.u_residual, 0.0, 1e-15);
    EXPECT_NEAR(r.v_residual, 0.0, 1e-15);
    EXPECT_EQ(r.node_count, 2u * 81u);
    EXPECT_THROW(stability_residuals(phi, g, pos, 0.2, config(1)), DomainError);
    EXPECT_THROW(stability_residuals(phi, g, pos, 1.5, config(1)), DomainError);
}

TEST(Stability, PerturbedFunctionalIsNotVStable) {
    // along every motion phi + 0.2 z1 drops at rate about sqrt(2.44) - sqrt(2)
    const GameSpec g = ex::example_spec(201, 3);
    const GamePosition pos{2.5, vec({1, 0}), History::zero(1.0, 2)};
    DPConfig c = config(1);
    c.substeps = 4;
    const StabilityResiduals r = stability_residuals(ex::perturbed_phi_functional(), g, pos, 2.6, c);
    EXPECT_LT(r.v_residual, -0.01);
    EXPECT_LE(r.u_residual, 0.0);
}
