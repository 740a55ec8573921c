#ifndef HPV_INTEGRATOR_HPP
#define HPV_INTEGRATOR_HPP

// Fixed-step classical Runge-Kutta integration on a uniform grid, forward for
// the model and backward for adjoint systems, plus trapezoid quadrature on the
// same grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hpv/error.hpp"
#include "hpv/model.hpp"

namespace hpv {

/// Uniform grid t_i = i * dt, i = 0..steps.
struct TimeGrid {
    double dt         = 0.02;
    std::size_t steps = 5000;

    std::size_t size() const { return steps + 1; }
    double t(std::size_t i) const { return static_cast<double>(i) * dt; }
    double t_final() const { return t(steps); }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

    /// Grid covering [0, t_final]; t_final must be an integer multiple of dt.
    static TimeGrid covering(double t_final, double dt)
    {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
        if (!(t_final > 0.0) || !std::isfinite(t_final)) throw InvalidArgument("t_final must be > 0");
        const double n = std::round(t_final / dt);
        if (n < 1.0 || std::abs(n * dt - t_final) > 1e-9 * std::max(1.0, t_final)) {
            throw InvalidArgument("t_final / dt must be a whole number of steps");
        }
        return {dt, static_cast<std::size_t>(n)};
    }
};

struct SimulationConfig {
    double t_final      = 100.0;
    double dt           = 0.02;
    State initial_state = default_initial_state();

    TimeGrid grid() const { return TimeGrid::covering(t_final, dt); }

    void validate() const
    {
        (void)grid();
        const State& s = initial_state;
        for (double v : s.to_array()) {
            if (!(v >= 0.0)) throw InvalidArgument("initial state compartments must be >= 0");
        }
        if (std::abs(s.female_total() - 1.0) > 1e-9 || std::abs(s.male_total() - 1.0) > 1e-9) {
            throw InvalidArgument("initial state: female and male compartments must each sum to 1");
        }
    }
};

/// Time-dependent controls sampled on a grid, linearly interpolated in between.
struct ControlSchedule {
    TimeGrid grid;
    std::vector<ControlVector> values;
    StrategyMask mask;

    static ControlSchedule constant(const TimeGrid& grid, const ControlVector& c, StrategyMask mask)
    {
        return {grid, std::vector<ControlVector>(grid.size(), mask.apply(c)), std::move(mask)};
    }

    ControlVector at(double t) const
    {
        const double pos = t / grid.dt;
        if (pos <= 0.0) return values.front();
        if (pos >= static_cast<double>(grid.steps)) return values.back();
        const auto i      = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        if (frac == 0.0) return values[i];
        ControlVector out;
        for (auto k : kAllControls) out[k] = (1.0 - frac) * values[i][k] + frac * values[i + 1][k];
        return out;
    }

    void validate() const
    {
        if (values.size() != grid.size()) throw InvalidArgument("control schedule length does not match its grid");
        for (const auto& c : values) {
            if (!c.in_box()) throw InvalidArgument("control schedule leaves [0,1]");
            if (!mask.admits(c)) throw InvalidArgument("control schedule uses a control inactive in " + mask.id);
        }
    }
};

/// Recorded whenever a step's simplex drift exceeded kRenormalizationThreshold
/// and the state was projected back.
struct RenormalizationEvent {
    std::size_t step = 0;
    double female_drift = 0.0;
    double male_drift   = 0.0;
};

inline constexpr double kRenormalizationThreshold = 1e-9;
/// States are fractions, so any component beyond this means the run blew up.
inline constexpr double kDivergenceBound = 10.0;
/// Costates carry cost units and are O(B / rate); the guard only catches overflow.
inline constexpr double kAdjointDivergenceBound = 1e8;

struct Trajectory {
    TimeGrid grid;
    std::vector<State> states;
    std::vector<RenormalizationEvent> renormalizations;

    const State& final_state() const { return states.back(); }
};

// ---------------------------------------------------------------------------
// Generic stepping

template <std::size_t N>
using Vec = std::array<double, N>;

namespace detail {
template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double a, const Vec<N>& k)
{
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + a * k[i];
    return out;
}

template <std::size_t N>
void check_divergence(const Vec<N>& y, double t, double bound = kDivergenceBound)
{
    for (double v : y) {
        if (!std::isfinite(v) || std::abs(v) > bound) {
            throw DomainError("integration diverged at t = " + std::to_string(t) + " (component " +
                              std::to_string(v) + ")");
        }
    }
}
} // namespace detail

/// One classical RK4 step of y' = rhs(t, y). A negative h steps backward.
template <std::size_t N, class Rhs>
Vec<N> rk4_step(Rhs&& rhs, double t, const Vec<N>& y, double h)
{
    const Vec<N> k1 = rhs(t, y);
    const Vec<N> k2 = rhs(t + 0.5 * h, detail::axpy(y, 0.5 * h, k1));
    const Vec<N> k3 = rhs(t + 0.5 * h, detail::axpy(y, 0.5 * h, k2));
    const Vec<N> k4 = rhs(t + h, detail::axpy(y, h, k3));
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

/// Integrates y' = rhs(t, y) from y(0) = y0 over the grid. Returns one sample per grid point.
template <std::size_t N, class Rhs>
std::vector<Vec<N>> integrate_fixed_step(Rhs&& rhs, const Vec<N>& y0, const TimeGrid& grid)
{
    std::vector<Vec<N>> out;
    out.reserve(grid.size());
    out.push_back(y0);
    for (std::size_t i = 0; i < grid.steps; ++i) {
        out.push_back(rk4_step<N>(rhs, grid.t(i), out.back(), grid.dt));
        detail::check_divergence(out.back(), grid.t(i + 1));
    }
    return out;
}

/// Integrates y' = rhs(t, y) backward from y(T) = terminal. Samples are
/// returned in forward time order, so out.back() == terminal exactly.
template <std::size_t N, class Rhs>
std::vector<Vec<N>> integrate_backward(Rhs&& rhs, const Vec<N>& terminal, const TimeGrid& grid,
                                       double divergence_bound = kDivergenceBound)
{
    std::vector<Vec<N>> out(grid.size());
    out[grid.steps] = terminal;
    for (std::size_t i = grid.steps; i > 0; --i) {
        out[i - 1] = rk4_step<N>(rhs, grid.t(i), out[i], -grid.dt);
        detail::check_divergence(out[i - 1], grid.t(i - 1), divergence_bound);
    }
    return out;
}

/// Linear interpolation of grid samples at time t.
template <class T, class Lerp>
T sample_linear(const TimeGrid& grid, std::span<const T> samples, double t, Lerp&& lerp)
{
    const double pos = t / grid.dt;
    if (pos <= 0.0) return samples.front();
    if (pos >= static_cast<double>(grid.steps)) return samples.back();
    const auto i      = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (frac == 0.0) return samples[i];
    return lerp(samples[i], samples[i + 1], frac);
}

inline State lerp_state(const State& a, const State& b, double s)
{
    const auto x = a.to_array();
    const auto y = b.to_array();
    Vec<kNumCompartments> r;
    for (std::size_t i = 0; i < kNumCompartments; ++i) r[i] = (1.0 - s) * x[i] + s * y[i];
    return State::from_array(r);
}

inline State state_at(const Trajectory& tr, double t)
{
    return sample_linear<State>(tr.grid, tr.states, t, lerp_state);
}

// ---------------------------------------------------------------------------
// Model integration

namespace detail {
inline std::optional<RenormalizationEvent> renormalize(State& s, std::size_t step)
{
    const double df = s.female_total() - 1.0;
    const double dm = s.male_total() - 1.0;
    if (std::abs(df) <= kRenormalizationThreshold && std::abs(dm) <= kRenormalizationThreshold) return std::nullopt;
    if (std::abs(df) > kRenormalizationThreshold) {
        const double k = 1.0 / s.female_total();
        s.S_f *= k;
        s.U_f *= k;
        s.I_f *= k;
        s.V_f *= k;
    }
    if (std::abs(dm) > kRenormalizationThreshold) {
        const double k = 1.0 / s.male_total();
        s.S_m *= k;
        s.I_m *= k;
        s.V_m *= k;
    }
    return RenormalizationEvent{step, df, dm};
}

template <class ControlAt>
Trajectory integrate_full(const ModelParameters& q, const State& initial, const TimeGrid& grid, ControlAt&& control_at)
{
    auto rhs = [&](double t, const Vec<kNumCompartments>& y) {
        return rhs_full(State::from_array(y), control_at(t), q).to_array();
    };
    Trajectory tr{grid, {}, {}};
    tr.states.reserve(grid.size());
    tr.states.push_back(initial);
    for (std::size_t i = 0; i < grid.steps; ++i) {
        auto y = rk4_step<kNumCompartments>(rhs, grid.t(i), tr.states.back().to_array(), grid.dt);
        check_divergence(y, grid.t(i + 1));
        State s = State::from_array(y);
        if (auto ev = renormalize(s, i + 1)) tr.renormalizations.push_back(*ev);
        tr.states.push_back(s);
    }
    return tr;
}
} // namespace detail

/// Full-model trajectory under constant controls.
inline Trajectory integrate_forward(const ModelParameters& q, const ControlVector& c, const SimulationConfig& cfg)
{
    cfg.validate();
    c.validate();
    return detail::integrate_full(q, cfg.initial_state, cfg.grid(), [&](double) { return c; });
}

/// Full-model trajectory under a time-dependent schedule on the config's grid.
inline Trajectory integrate_forward(const ModelParameters& q, const ControlSchedule& schedule,
                                    const SimulationConfig& cfg)
{
    cfg.validate();
    schedule.validate();
    if (!(schedule.grid == cfg.grid())) throw InvalidArgument("control schedule grid differs from simulation grid");
    return detail::integrate_full(q, cfg.initial_state, schedule.grid,
                                  [&](double t) { return schedule.at(t); });
}

/// Reduced-system trajectory (lifted back to all seven compartments) under a
/// schedule. Used by the sweep solver, whose adjoints live on the reduced system.
inline Trajectory integrate_forward_reduced(const ModelParameters& q, const State& initial,
                                            const ControlSchedule& schedule)
{
    auto rhs = [&](double t, const Vec<kNumReduced>& y) {
        return rhs_control(ReducedState::from_array(y), schedule.at(t), q).to_array();
    };
    const auto ys = integrate_fixed_step<kNumReduced>(rhs, ReducedState::from_full(initial).to_array(), schedule.grid);
    Trajectory tr{schedule.grid, {}, {}};
    tr.states.reserve(ys.size());
    tr.states.push_back(initial);
    for (std::size_t i = 1; i < ys.size(); ++i) tr.states.push_back(ReducedState::from_array(ys[i]).lift());
    return tr;
}

// ---------------------------------------------------------------------------
// Quadrature

/// Composite trapezoid rule over uniformly spaced samples.
inline double trapezoid(std::span<const double> samples, double dt)
{
    if (samples.size() < 2) throw InvalidArgument("trapezoid rule needs at least two samples");
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) interior += samples[i];
    return dt * (interior + 0.5 * (samples.front() + samples.back()));
}

/// Trapezoid rule of f(i) for i over the grid.
template <class F>
double integrate_on_grid(const TimeGrid& grid, F&& f)
{
    std::vector<double> samples(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) samples[i] = f(i);
    return trapezoid(samples, grid.dt);
}

// ---------------------------------------------------------------------------
// CSV

/// Writes `t,S_f,U_f,I_f,V_f,S_m,I_m,V_m[,w1,w2,u1,u2,alpha]`, one row per grid point.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const ControlSchedule* controls = nullptr)
{
    if (controls && controls->values.size() != tr.states.size()) {
        throw InvalidArgument("trajectory and control schedule lengths differ");
    }
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    os << "t,S_f,U_f,I_f,V_f,S_m,I_m,V_m";
    if (controls) os << ",w1,w2,u1,u2,alpha";
    os << '\n';
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        os << tr.grid.t(i);
        for (double v : tr.states[i].to_array()) os << ',' << v;
        if (controls) {
            for (auto k : kAllControls) os << ',' << controls->values[i][k];
        }
        os << '\n';
    }
    os.precision(old_precision);
}

} // namespace hpv

#endif // HPV_INTEGRATOR_HPP
