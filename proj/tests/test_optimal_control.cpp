#include <gtest/gtest.h>

#include <random>

#include "hpv/cea.hpp"
#include "hpv/optimal_control.hpp"
#include "support.hpp"

using namespace hpv;
using hpv::testing::random_adjoint;
using hpv::testing::random_controls;
using hpv::testing::random_interior;
using hpv::testing::rel_err;

namespace {
const ControlVector kS4Rates{0.3, 0, 0.127, 0, 0};

/// Bounded by the constant rates and started from them, as in the bundled table4 config.
FbsmConfig s4_config(double tolerance = 1e-3)
{
    FbsmConfig cfg;
    cfg.tolerance    = tolerance;
    cfg.bounds.upper = kS4Rates;
    cfg.warm_start   = kS4Rates;
    return cfg;
}

const OptimalSolution& s4_solution()
{
    static const OptimalSolution sol = fbsm_solve(strategy_mask("S4"), {}, {}, {}, s4_config());
    return sol;
}

double dH_dx(const ReducedState& y, const AdjointState& psi, const ControlVector& c, std::size_t i)
{
    const double h = 1e-4;
    auto a = y.to_array(), b = y.to_array();
    a[i] += h;
    b[i] -= h;
    return (hamiltonian(ReducedState::from_array(a), psi, c, {}, {}) -
            hamiltonian(ReducedState::from_array(b), psi, c, {}, {})) /
           (2 * h);
}
} // namespace

TEST(Objective, InfectionFreeUncontrolledIsZero)
{
    const auto grid = TimeGrid::covering(10, 0.02);
    const Trajectory tr{grid, std::vector<State>(grid.size(), State{1, 0, 0, 0, 1, 0, 0}), {}};
    EXPECT_EQ(objective_J(tr, ControlSchedule::constant(grid, {}, strategy_mask("S1")), {}), 0.0);
}

TEST(Objective, ConstantControlsWithoutInfection)
{
    const CostWeights w;
    const ControlVector c{0.2, 0.4, 0.1, 0.3, 0.5};
    const auto grid = TimeGrid::covering(10, 0.02);
    const Trajectory tr{grid, std::vector<State>(grid.size(), State{1, 0, 0, 0, 1, 0, 0}), {}};
    const double want =
        10 * 0.5 * (w.A1 * (0.04 + 0.16) + w.A2 * (0.01 + 0.09) + w.A3 * 0.25);
    EXPECT_NEAR(objective_J(tr, ControlSchedule::constant(grid, c, strategy_mask("S1")), w), want, 1e-12);
}

TEST(Hamiltonian, ZeroAdjointIsRunningCost)
{
    std::mt19937_64 rng(30);
    const auto y = random_interior(rng);
    const auto c = random_controls(rng);
    EXPECT_EQ(hamiltonian(y, {}, c, {}, {}), running_cost(y, c, {}));
    const CostWeights none{1, 5, 1, 0, 0};
    EXPECT_EQ(hamiltonian(y, {}, {}, {}, none), 0.0);
}

TEST(Hamiltonian, DerivativeInCohortVaccination)
{
    std::mt19937_64 rng(31);
    const CostWeights w;
    const ModelParameters q;
    for (int i = 0; i < 50; ++i) {
        const auto y   = random_interior(rng);
        const auto psi = random_adjoint(rng, 10);
        auto c         = random_controls(rng);
        const double h = 1e-5;
        auto up = c, dn = c;
        up.w1 += h;
        dn.w1 -= h;
        const double fd = (hamiltonian(y, psi, up, q, w) - hamiltonian(y, psi, dn, q, w)) / (2 * h);
        EXPECT_NEAR(fd, w.A1 * c.w1 + psi.psi3 * q.mu_f, 1e-6);
    }
}

TEST(AdjointRhs, ConstantTermsAtTheOrigin)
{
    const CostWeights w;
    const auto d = adjoint_rhs({}, {}, {}, {}, w);
    EXPECT_EQ(d.psi1, -w.B1);
    EXPECT_EQ(d.psi2, -w.B2);
    EXPECT_EQ(d.psi3, 0.0);
    EXPECT_EQ(d.psi4, 0.0);
    EXPECT_EQ(d.psi5, 0.0);
}

TEST(AdjointRhs, HomogeneousWithoutInfectionCosts)
{
    std::mt19937_64 rng(32);
    const CostWeights w{1, 5, 1, 0, 0};
    const auto d = adjoint_rhs(random_interior(rng), {}, random_controls(rng), {}, w);
    for (double v : d.to_array()) EXPECT_EQ(v, 0.0);
}

TEST(AdjointRhs, IsMinusStateGradientOfHamiltonian)
{
    std::mt19937_64 rng(33);
    for (int n = 0; n < 100; ++n) {
        const auto y   = random_interior(rng);
        const auto psi = random_adjoint(rng, 50);
        const auto c   = random_controls(rng);
        const auto d   = adjoint_rhs(y, psi, c, {}, {}).to_array();
        for (std::size_t i = 0; i < kNumReduced; ++i) {
            const double fd = -dH_dx(y, psi, c, i);
            EXPECT_LT(std::abs(fd - d[i]), 1e-5 * std::max(std::abs(d[i]), 1.0)) << "component " << i;
        }
    }
}

TEST(Characterize, ZeroAdjointGivesZeroControls)
{
    std::mt19937_64 rng(34);
    EXPECT_EQ(characterize_controls(random_interior(rng), {}, strategy_mask("S1"), {}, {}, {}), ControlVector{});
}

TEST(Characterize, UpperClampOfCohortVaccination)
{
    const ModelParameters q;
    const CostWeights w;
    AdjointState psi;
    psi.psi3 = -w.A1 / q.mu_f;
    const auto c = characterize_controls({0.1, 0.1, 0.1, 0.1, 0.1}, psi, strategy_mask("S1"), {}, q, w);
    EXPECT_DOUBLE_EQ(c.w1, 1.0);
    psi.psi3 *= 3;
    EXPECT_EQ(characterize_controls({0.1, 0.1, 0.1, 0.1, 0.1}, psi, strategy_mask("S1"), {}, q, w).w1, 1.0);
}

TEST(Characterize, InactiveControlsStayZero)
{
    std::mt19937_64 rng(35);
    const auto c = characterize_controls(random_interior(rng), {5, -5, -5, 5, -5}, strategy_mask("S4"), {}, {}, {});
    EXPECT_TRUE(strategy_mask("S4").admits(c));
    EXPECT_GT(c.w1, 0.0);
}

TEST(Characterize, BeatsGridSearchOfHamiltonian)
{
    std::mt19937_64 rng(36);
    const auto& mask = strategy_mask("S1");
    for (int n = 0; n < 20; ++n) {
        const auto y    = random_interior(rng);
        const auto psi  = random_adjoint(rng, 20);
        const double hc = hamiltonian(y, psi, characterize_controls(y, psi, mask, {}, {}, {}), {}, {});
        double best     = std::numeric_limits<double>::infinity();
        ControlVector c;
        for (int a = 0; a <= 10; ++a)
            for (int b = 0; b <= 10; ++b)
                for (int d = 0; d <= 10; ++d)
                    for (int e = 0; e <= 10; ++e)
                        for (int f = 0; f <= 10; ++f) {
                            c    = {a / 10.0, b / 10.0, d / 10.0, e / 10.0, f / 10.0};
                            best = std::min(best, hamiltonian(y, psi, c, {}, {}));
                        }
        EXPECT_LE(hc, best + 1e-12);
    }
}

TEST(SolveAdjoint, VanishesWithoutInfectionCosts)
{
    SimulationConfig sim;
    const auto sched = ControlSchedule::constant(sim.grid(), {}, strategy_mask("S1"));
    const auto tr    = integrate_forward({}, sched, sim);
    for (const auto& p : solve_adjoint(tr, sched, {}, {1, 5, 1, 0, 0})) ASSERT_EQ(p, AdjointState{});
}

TEST(Fbsm, NoInfectionCostMeansNoControl)
{
    const auto sol = fbsm_solve(strategy_mask("S1"), {}, {1, 5, 1, 0, 0}, {}, {});
    EXPECT_TRUE(sol.converged);
    EXPECT_LE(sol.iterations, 2u);
    EXPECT_EQ(sol.j_value, 0.0);
    for (const auto& c : sol.schedule.values) ASSERT_EQ(c, ControlVector{});
}

TEST(Fbsm, RequiresPositiveWeightsForActiveControls)
{
    EXPECT_THROW(fbsm_solve(strategy_mask("S4"), {}, {0, 5, 1, 15, 10}, {}, {}), InvalidArgument);
    EXPECT_NO_THROW(fbsm_solve(strategy_mask("S5"), {}, {1, 5, 0, 0, 0}, {}, {}));
}

TEST(Fbsm, FemaleVaccinationMatchesPublishedOptimum)
{
    const auto& sol = s4_solution();
    ASSERT_TRUE(sol.converged);
    SimulationConfig sim;
    const auto base = integrate_forward({}, ControlVector{}, sim);
    EXPECT_LT(rel_err(cost(sol.state, sol.schedule, {}, {}), 47.92), 0.10);
    EXPECT_LT(rel_err(effectiveness(sol.state, base), 32.39), 0.10);
}

TEST(Fbsm, FixedPointTransversalityAndBox)
{
    const auto& sol = s4_solution();
    const auto cfg  = s4_config();
    ASSERT_TRUE(sol.converged);
    EXPECT_LT(fixed_point_residual(sol, strategy_mask("S4"), {}, {}, cfg.bounds), cfg.tolerance);
    EXPECT_EQ(sol.adjoint.back(), AdjointState{});
    for (const auto& c : sol.schedule.values) {
        ASSERT_TRUE(strategy_mask("S4").admits(c));
        for (auto k : kAllControls) {
            ASSERT_GE(c[k], 0.0);
            ASSERT_LE(c[k], cfg.bounds.upper_of(k));
        }
    }
}

TEST(Fbsm, VaccinationStartsAtBoundAndDecaysToZero)
{
    const auto& v = s4_solution().schedule.values;
    EXPECT_NEAR(v.front().w1, kS4Rates.w1, 1e-9);
    EXPECT_NEAR(v.front().u1, kS4Rates.u1, 1e-9);
    EXPECT_EQ(v.back().w1, 0.0);
    EXPECT_EQ(v.back().u1, 0.0);
    EXPECT_LT(v[v.size() / 2].w1, kS4Rates.w1);
}

TEST(Fbsm, ObjectiveTrendIsDownhill)
{
    const auto& sol = s4_solution();
    EXPECT_LT(sol.j_value, sol.j_history.front());
    EXPECT_LE(sol.monotonicity_violations, sol.iterations / 10);
}

TEST(Fbsm, BeatsConstantControls)
{
    SimulationConfig sim;
    const auto sched = ControlSchedule::constant(sim.grid(), kS4Rates, strategy_mask("S4"));
    const auto tr    = integrate_forward({}, sched, sim);
    EXPECT_LE(s4_solution().j_value, objective_J(tr, sched, {}));
}

TEST(Fbsm, TighterToleranceChangesObjectiveLittle)
{
    const auto fine = fbsm_solve(strategy_mask("S4"), {}, {}, {}, s4_config(1e-5));
    ASSERT_TRUE(fine.converged);
    EXPECT_LT(rel_err(s4_solution().j_value, fine.j_value), 0.005);
}

TEST(Fbsm, UnitBoundsFromZeroConverge)
{
    const auto sol = fbsm_solve(strategy_mask("S4"), {}, {}, {}, {});
    ASSERT_TRUE(sol.converged);
    EXPECT_LT(sol.j_value, s4_solution().j_value);
    EXPECT_LT(fixed_point_residual(sol, strategy_mask("S4"), {}, {}, {}), 1e-3);
}

TEST(Fbsm, Deterministic)
{
    const auto again = fbsm_solve(strategy_mask("S4"), {}, {}, {}, s4_config());
    EXPECT_EQ(again.j_value, s4_solution().j_value);
    EXPECT_EQ(again.state.states, s4_solution().state.states);
}

TEST(FbsmConfig, Validation)
{
    FbsmConfig c;
    c.relaxation = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.tolerance = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.bounds.upper.u1 = 2;
    EXPECT_THROW(c.validate(), InvalidArgument);
}
