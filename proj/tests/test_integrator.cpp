#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hpv/integrator.hpp"

using namespace hpv;

TEST(Rk4, ExponentialDecay)
{
    const auto grid = TimeGrid::covering(1.0, 0.1);
    const auto ys = integrate_fixed_step<1>([](double, const Vec<1>& y) { return Vec<1>{-y[0]}; }, {1.0}, grid);
    EXPECT_EQ(ys.size(), 11u);
    // Ten steps of the RK4 stability polynomial. Its gap to exp(-1) is
    // about 3.3e-7 at this step, so the analytic value is checked at dt = 0.05.
    const double h = 0.1, r = 1 - h + h * h / 2 - h * h * h / 6 + h * h * h * h / 24;
    EXPECT_NEAR(ys.back()[0], std::pow(r, 10), 1e-15);
    EXPECT_NEAR(ys.back()[0], std::exp(-1.0), 4e-7);

    const auto fine = integrate_fixed_step<1>([](double, const Vec<1>& y) { return Vec<1>{-y[0]}; }, {1.0},
                                              TimeGrid::covering(1.0, 0.05));
    EXPECT_NEAR(fine.back()[0], std::exp(-1.0), 1e-7);
}

TEST(Rk4, BackwardScalarClosedForm)
{
    // psi' = a psi - b, psi(T) = 0  =>  psi(t) = (b/a) (1 - exp(a (t - T)))
    const double a = 0.7, b = 2.0, T = 5.0;
    const auto grid = TimeGrid::covering(T, 0.01);
    const auto ps = integrate_backward<1>([&](double, const Vec<1>& p) { return Vec<1>{a * p[0] - b}; }, {0.0}, grid);
    EXPECT_EQ(ps.back()[0], 0.0);
    for (std::size_t i = 0; i < grid.size(); i += 50) {
        const double t = grid.t(i);
        EXPECT_NEAR(ps[i][0], b / a * (1.0 - std::exp(a * (t - T))), 1e-7) << "t=" << t;
    }
}

TEST(Rk4, DivergenceAborts)
{
    const auto grid = TimeGrid::covering(10.0, 0.1);
    EXPECT_THROW(integrate_fixed_step<1>([](double, const Vec<1>& y) { return Vec<1>{y[0]}; }, {1.0}, grid),
                 DomainError);
}

TEST(TimeGrid, RequiresWholeNumberOfSteps)
{
    EXPECT_EQ(TimeGrid::covering(100, 0.02).steps, 5000u);
    EXPECT_THROW(TimeGrid::covering(1.0, 0.3), InvalidArgument);
    EXPECT_THROW(TimeGrid::covering(1.0, 0.0), InvalidArgument);
    EXPECT_THROW(TimeGrid::covering(-1.0, 0.1), InvalidArgument);
}

TEST(SimulationConfig, InitialStateMustLieOnTheSimplex)
{
    SimulationConfig sim;
    sim.initial_state.S_f = 0.9;
    EXPECT_THROW(sim.validate(), InvalidArgument);
}

TEST(Quadrature, ConstantOverCentury)
{
    const auto grid = TimeGrid::covering(100, 0.02);
    EXPECT_NEAR(integrate_on_grid(grid, [](std::size_t) { return 1.0; }), 100.0, 1e-9);
}

TEST(Quadrature, LinearIsExact)
{
    const auto grid = TimeGrid::covering(1.0, 0.02);
    EXPECT_NEAR(integrate_on_grid(grid, [&](std::size_t i) { return grid.t(i); }), 0.5, 1e-14);
}

TEST(Quadrature, Sine)
{
    const double dt = std::numbers::pi / 500;
    std::vector<double> s(501);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(dt * static_cast<double>(i));
    EXPECT_NEAR(trapezoid(s, dt), 2.0, 1e-4);
}

TEST(Quadrature, NeedsTwoSamples)
{
    const std::vector<double> one{1.0};
    EXPECT_THROW(trapezoid(one, 0.1), InvalidArgument);
}

TEST(ControlSchedule, LinearInterpolation)
{
    const auto grid = TimeGrid::covering(1.0, 0.5);
    ControlSchedule s{grid, {{0, 0, 0, 0, 0}, {1, 0, 0, 0, 0}, {1, 0, 0, 0, 1}}, strategy_mask("S1")};
    EXPECT_EQ(s.at(0.25).w1, 0.5);
    EXPECT_EQ(s.at(0.5).w1, 1.0);
    EXPECT_EQ(s.at(0.75).alpha, 0.5);
    EXPECT_EQ(s.at(5.0).alpha, 1.0);
    s.mask = strategy_mask("S2");
    EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(IntegrateForward, SimplexDriftStaysBelowThreshold)
{
    SimulationConfig sim;
    for (const ControlVector& c : {ControlVector{}, ControlVector{0.1, 0.07, 0.05, 0.03, 0.1}, ControlVector{1, 1, 1, 1, 1}}) {
        const auto tr = integrate_forward({}, c, sim);
        EXPECT_TRUE(tr.renormalizations.empty());
        for (const auto& s : tr.states) {
            ASSERT_LT(std::abs(s.female_total() - 1.0), 1e-9);
            ASSERT_LT(std::abs(s.male_total() - 1.0), 1e-9);
        }
    }
}

TEST(IntegrateForward, EmpiricalOrderIsFour)
{
    SimulationConfig sim;
    sim.t_final = 20;
    const ControlVector c{0.1, 0.07, 0.05, 0.03, 0.1};
    auto end_at = [&](double dt) {
        sim.dt = dt;
        return integrate_forward({}, c, sim).final_state().to_array();
    };
    const auto ref = end_at(0.1 / 64);
    auto err = [&](double dt) {
        const auto y = end_at(dt);
        double e = 0;
        for (std::size_t i = 0; i < y.size(); ++i) e = std::max(e, std::abs(y[i] - ref[i]));
        return e;
    };
    const double order = std::log2(err(0.1) / err(0.05));
    EXPECT_GE(order, 3.7);
    EXPECT_LE(order, 4.3);
}

TEST(IntegrateForward, Deterministic)
{
    SimulationConfig sim;
    const auto a = integrate_forward({}, ControlVector{0.3, 0, 0.127, 0, 0}, sim);
    const auto b = integrate_forward({}, ControlVector{0.3, 0, 0.127, 0, 0}, sim);
    EXPECT_EQ(a.states, b.states);
}

TEST(IntegrateForward, ConstantScheduleMatchesConstantControls)
{
    SimulationConfig sim;
    const ControlVector c{0.3, 0, 0.127, 0, 0};
    const auto a = integrate_forward({}, c, sim);
    const auto b = integrate_forward({}, ControlSchedule::constant(sim.grid(), c, strategy_mask("S4")), sim);
    EXPECT_EQ(a.states, b.states);
}

TEST(IntegrateForward, ReducedSystemTracksFullModel)
{
    SimulationConfig sim;
    const auto sched = ControlSchedule::constant(sim.grid(), {0.1, 0.07, 0.05, 0.03, 0.1}, strategy_mask("S1"));
    const auto full    = integrate_forward({}, sched, sim);
    const auto reduced = integrate_forward_reduced({}, sim.initial_state, sched);
    for (std::size_t i = 0; i < full.states.size(); i += 100) {
        const auto a = full.states[i].to_array();
        const auto b = reduced.states[i].to_array();
        for (std::size_t k = 0; k < a.size(); ++k) ASSERT_NEAR(a[k], b[k], 1e-12);
    }
}

TEST(IntegrateForward, ScheduleOnAnotherGridIsRejected)
{
    SimulationConfig sim;
    const auto sched = ControlSchedule::constant(TimeGrid::covering(100, 0.05), {}, strategy_mask("S1"));
    EXPECT_THROW(integrate_forward({}, sched, sim), InvalidArgument);
}

TEST(IntegrateForward, UncontrolledRunSettlesAtEndemicLevel)
{
    SimulationConfig sim;
    const auto tr = integrate_forward({}, ControlVector{}, sim);
    const State& end = tr.final_state();
    EXPECT_GT(end.U_f, 0.01);
    EXPECT_GT(end.I_m, 0.01);
    const std::size_t from = tr.grid.size() - 1 - static_cast<std::size_t>(10.0 / sim.dt);
    for (std::size_t i = from; i < tr.states.size(); ++i) {
        ASSERT_NEAR(tr.states[i].U_f, end.U_f, 1e-6);
        ASSERT_NEAR(tr.states[i].I_f, end.I_f, 1e-6);
        ASSERT_NEAR(tr.states[i].I_m, end.I_m, 1e-6);
    }
}

TEST(TrajectoryCsv, HeaderAndRows)
{
    SimulationConfig sim;
    sim.t_final = 0.04;
    const auto tr    = integrate_forward({}, ControlVector{}, sim);
    const auto sched = ControlSchedule::constant(sim.grid(), {}, strategy_mask("S1"));
    std::ostringstream os;
    write_trajectory_csv(os, tr, &sched);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,S_f,U_f,I_f,V_f,S_m,I_m,V_m,w1,w2,u1,u2,alpha");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 3);
}
