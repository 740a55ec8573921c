#ifndef HPV_OPTIMAL_CONTROL_HPP
#define HPV_OPTIMAL_CONTROL_HPP

// Optimality system of the time-dependent control problem
//
//   min J(c) = int_0^T B1 U_f + B2 I_f + 1/2 [A1 (w1^2 + w2^2) + A2 (u1^2 + u2^2) + A3 alpha^2] dt
//
// subject to the reduced control system, and its forward-backward sweep solver.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hpv/cea.hpp"
#include "hpv/error.hpp"
#include "hpv/integrator.hpp"
#include "hpv/model.hpp"

namespace hpv {

/// Costates paired with (U_f, I_f, V_f, I_m, V_m).
struct AdjointState {
    double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0, psi4 = 0.0, psi5 = 0.0;

    std::array<double, kNumReduced> to_array() const { return {psi1, psi2, psi3, psi4, psi5}; }
    static AdjointState from_array(const std::array<double, kNumReduced>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }

    friend bool operator==(const AdjointState&, const AdjointState&) = default;
};

struct AdjointDerivative {
    double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0, psi4 = 0.0, psi5 = 0.0;

    std::array<double, kNumReduced> to_array() const { return {psi1, psi2, psi3, psi4, psi5}; }
};

/// Upper bound of each control; lower bounds are 0.
struct ControlBounds {
    ControlVector upper{1.0, 1.0, 1.0, 1.0, 1.0};

    double upper_of(Control c) const { return upper[c]; }
};

struct FbsmConfig {
    std::size_t max_iterations = 2000;
    double tolerance           = 1e-3;
    double relaxation          = 0.1; ///< weight of the freshly characterized controls
    ControlBounds bounds;
    std::optional<ControlVector> warm_start; ///< constant initial guess; zero when unset

    void validate() const
    {
        if (max_iterations == 0) throw InvalidArgument("fbsm: max_iterations must be >= 1");
        if (!(tolerance > 0.0)) throw InvalidArgument("fbsm: tolerance must be > 0");
        if (!(relaxation > 0.0 && relaxation <= 1.0)) throw InvalidArgument("fbsm: relaxation must lie in (0,1]");
        if (!bounds.upper.in_box()) throw InvalidArgument("fbsm: control bounds must lie in [0,1]");
        if (warm_start) warm_start->validate();
    }
};

/// Running cost of the objective.
inline double running_cost(const ReducedState& y, const ControlVector& c, const CostWeights& w)
{
    return w.B1 * y.U_f + w.B2 * y.I_f +
           0.5 * (w.A1 * (c.w1 * c.w1 + c.w2 * c.w2) + w.A2 * (c.u1 * c.u1 + c.u2 * c.u2) +
                  w.A3 * c.alpha * c.alpha);
}

inline double objective_J(const Trajectory& tr, const ControlSchedule& schedule, const CostWeights& w)
{
    if (!(schedule.grid == tr.grid) || schedule.values.size() != tr.states.size()) {
        throw InvalidArgument("objective: schedule and trajectory are on different grids");
    }
    return integrate_on_grid(tr.grid, [&](std::size_t i) {
        return running_cost(ReducedState::from_full(tr.states[i]), schedule.values[i], w);
    });
}

inline double hamiltonian(const ReducedState& y, const AdjointState& psi, const ControlVector& c,
                          const ModelParameters& q, const CostWeights& w)
{
    const ReducedDerivative f = rhs_control(y, c, q);
    return running_cost(y, c, w) + psi.psi1 * f.U_f + psi.psi2 * f.I_f + psi.psi3 * f.V_f + psi.psi4 * f.I_m +
           psi.psi5 * f.V_m;
}

/// psi' = -dH/dx, written out term by term.
inline AdjointDerivative adjoint_rhs(const ReducedState& y, const AdjointState& psi, const ControlVector& c,
                                     const ModelParameters& q, const CostWeights& w)
{
    const double eps        = q.epsilon;
    const double exposed_f  = y.S_f() + eps * y.V_f;
    const double exposed_m  = y.S_m() + eps * y.V_m;
    const double male_force = q.beta_f * y.U_f + q.beta_f_tilde * y.I_f;
    const double bIm        = q.beta_m * y.I_m;
    const double to_female  = (1.0 - q.p) * psi.psi1 + q.p * psi.psi2;

    AdjointDerivative d;
    d.psi1 = -w.B1 + ((1.0 - q.p) * bIm + q.gamma_f + c.alpha + q.mu_f) * psi.psi1 + (q.p * bIm - c.alpha) * psi.psi2 +
             c.u1 * psi.psi3 - q.beta_f * exposed_m * psi.psi4 + q.beta_f * eps * y.V_m * psi.psi5;
    d.psi2 = -w.B2 + (1.0 - q.p) * bIm * psi.psi1 + (q.p * bIm + q.gamma_f + q.mu_f) * psi.psi2 + c.u1 * psi.psi3 -
             q.beta_f_tilde * exposed_m * psi.psi4 + q.beta_f_tilde * eps * y.V_m * psi.psi5;
    d.psi3 = to_female * (1.0 - eps) * bIm + (eps * bIm + c.u1 + q.mu_f + q.theta) * psi.psi3;
    d.psi4 = -q.beta_m * exposed_f * to_female + eps * q.beta_m * y.V_f * psi.psi3 +
             (male_force + q.gamma_m + q.mu_m) * psi.psi4 + c.u2 * psi.psi5;
    d.psi5 = male_force * ((1.0 - eps) * psi.psi4 + eps * psi.psi5) + (c.u2 + q.theta + q.mu_m) * psi.psi5;
    return d;
}

/// Pointwise minimizer of the Hamiltonian over the control box; inactive controls are 0.
inline ControlVector characterize_controls(const ReducedState& y, const AdjointState& psi, const StrategyMask& mask,
                                           const ControlBounds& bounds, const ModelParameters& q,
                                           const CostWeights& w)
{
    ControlVector c;
    c.w1    = -q.mu_f * psi.psi3 / w.A1;
    c.w2    = -q.mu_m * psi.psi5 / w.A1;
    c.u1    = -y.S_f() * psi.psi3 / w.A2;
    c.u2    = -y.S_m() * psi.psi5 / w.A2;
    c.alpha = (psi.psi1 - psi.psi2) * y.U_f / w.A3;
    for (auto k : kAllControls) {
        c[k] = mask.is_active(k) ? std::clamp(c[k], 0.0, bounds.upper_of(k)) : 0.0;
    }
    return c;
}

/// Costates on the trajectory's grid, from psi(T) = 0 backward.
inline std::vector<AdjointState> solve_adjoint(const Trajectory& tr, const ControlSchedule& schedule,
                                               const ModelParameters& q, const CostWeights& w)
{
    auto rhs = [&](double t, const Vec<kNumReduced>& psi) {
        const ReducedState y = ReducedState::from_full(state_at(tr, t));
        return adjoint_rhs(y, AdjointState::from_array(psi), schedule.at(t), q, w).to_array();
    };
    const auto raw = integrate_backward<kNumReduced>(rhs, Vec<kNumReduced>{}, tr.grid, kAdjointDivergenceBound);
    std::vector<AdjointState> out;
    out.reserve(raw.size());
    for (const auto& a : raw) out.push_back(AdjointState::from_array(a));
    return out;
}

struct OptimalSolution {
    ControlSchedule schedule;
    Trajectory state;
    std::vector<AdjointState> adjoint;
    double j_value          = 0.0;
    std::size_t iterations  = 0;
    bool converged          = false;
    double control_residual = std::numeric_limits<double>::infinity(); ///< last sweep, relative sup norm
    double state_residual   = std::numeric_limits<double>::infinity();
    std::vector<double> j_history;                 ///< J of the iterate entering each sweep
    std::size_t monotonicity_violations = 0;       ///< J increases > kJIncreaseTolerance after warm-up
};

inline constexpr std::size_t kJWarmupIterations = 10;
inline constexpr double kJIncreaseTolerance     = 1e-6;

namespace detail {
/// max over components of ||a_k - b_k||_inf / max(||a_k||_inf, 1e-12)
template <std::size_t N, class GetNew, class GetOld>
double relative_sup_change(std::size_t n, GetNew&& get_new, GetOld&& get_old)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = get_new(i)[k];
            diff           = std::max(diff, std::abs(a - get_old(i)[k]));
            scale          = std::max(scale, std::abs(a));
        }
        worst = std::max(worst, diff / std::max(scale, 1e-12));
    }
    return worst;
}

inline std::array<double, kNumControls> controls_array(const ControlVector& c)
{
    return {c.w1, c.w2, c.u1, c.u2, c.alpha};
}
} // namespace detail

/// Forward-backward sweep. Each sweep integrates the state under the current
/// schedule, the adjoint backward from zero, characterizes the controls and
/// relaxes toward them. Stops when both the characterized controls and the
/// state agree with the previous sweep to `tolerance` in relative sup norm;
/// the returned schedule, state and adjoint are mutually consistent.
inline OptimalSolution fbsm_solve(const StrategyMask& mask, const ModelParameters& q, const CostWeights& w,
                                  const SimulationConfig& sim, const FbsmConfig& cfg)
{
    q.validate();
    w.validate();
    sim.validate();
    cfg.validate();
    for (auto k : mask.active_controls()) {
        const double weight = (k == Control::w1 || k == Control::w2) ? w.A1
                              : (k == Control::alpha)                ? w.A3
                                                                     : w.A2;
        if (!(weight > 0.0)) {
            throw InvalidArgument("fbsm: active control " + std::string(control_name(k)) +
                                  " needs a strictly positive cost weight");
        }
    }

    const TimeGrid grid = sim.grid();
    ControlVector guess = cfg.warm_start.value_or(ControlVector{});
    for (auto k : kAllControls) guess[k] = std::min(guess[k], cfg.bounds.upper_of(k));
    ControlSchedule schedule = ControlSchedule::constant(grid, guess, mask);

    OptimalSolution sol;
    std::optional<Trajectory> previous_state;
    double best_j = std::numeric_limits<double>::infinity();
    bool polishing          = false;
    double polish_threshold = cfg.tolerance;

    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        Trajectory tr                   = integrate_forward_reduced(q, sim.initial_state, schedule);
        std::vector<AdjointState> psi   = solve_adjoint(tr, schedule, q, w);
        const double j                  = objective_J(tr, schedule, w);

        std::vector<ControlVector> characterized(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            characterized[i] =
                characterize_controls(ReducedState::from_full(tr.states[i]), psi[i], mask, cfg.bounds, q, w);
        }

        sol.control_residual = detail::relative_sup_change<kNumControls>(
            grid.size(), [&](std::size_t i) { return detail::controls_array(characterized[i]); },
            [&](std::size_t i) { return detail::controls_array(schedule.values[i]); });
        sol.state_residual =
            previous_state
                ? detail::relative_sup_change<kNumReduced>(
                      grid.size(), [&](std::size_t i) { return ReducedState::from_full(tr.states[i]).to_array(); },
                      [&](std::size_t i) {
                          return ReducedState::from_full(previous_state->states[i]).to_array();
                      })
                : std::numeric_limits<double>::infinity();

        sol.j_history.push_back(j);
        if (it > kJWarmupIterations && j > best_j + kJIncreaseTolerance) ++sol.monotonicity_violations;
        if (it > kJWarmupIterations) best_j = std::min(best_j, j);
        sol.iterations = it;

        const bool done = sol.control_residual < cfg.tolerance && sol.state_residual < cfg.tolerance;
        // Once converged, one un-relaxed sweep replaces the schedule by the
        // characterized controls, so the returned controls satisfy the
        // optimality conditions pointwise (and vanish at T). When that sweep
        // lands outside the tolerance the relaxed iteration resumes and the
        // next attempt waits for a tenfold smaller residual.
        const bool at_fixed_point = done && (polishing || characterized == schedule.values);
        if (polishing && !done) polish_threshold *= 0.1;
        if (at_fixed_point || it == cfg.max_iterations) {
            sol.converged = done;
            sol.j_value   = j;
            sol.state     = std::move(tr);
            sol.adjoint   = std::move(psi);
            sol.schedule  = schedule;
            break;
        }

        polishing = !polishing && sol.control_residual < polish_threshold && sol.state_residual < polish_threshold;
        if (polishing) {
            schedule.values = std::move(characterized);
        } else {
            for (std::size_t i = 0; i < grid.size(); ++i) {
                for (auto k : kAllControls) {
                    const double v = cfg.relaxation * characterized[i][k] + (1.0 - cfg.relaxation) * schedule.values[i][k];
                    schedule.values[i][k] = std::clamp(v, 0.0, cfg.bounds.upper_of(k));
                }
            }
        }
        previous_state = std::move(tr);
    }
    return sol;
}

/// Largest relative sup-norm gap between a schedule and the controls
/// characterized from the given state and adjoint.
inline double fixed_point_residual(const OptimalSolution& sol, const StrategyMask& mask, const ModelParameters& q,
                                   const CostWeights& w, const ControlBounds& bounds)
{
    const std::size_t n = sol.schedule.values.size();
    std::vector<ControlVector> ch(n);
    for (std::size_t i = 0; i < n; ++i) {
        ch[i] = characterize_controls(ReducedState::from_full(sol.state.states[i]), sol.adjoint[i], mask, bounds, q, w);
    }
    return detail::relative_sup_change<kNumControls>(
        n, [&](std::size_t i) { return detail::controls_array(ch[i]); },
        [&](std::size_t i) { return detail::controls_array(sol.schedule.values[i]); });
}

} // namespace hpv

#endif // HPV_OPTIMAL_CONTROL_HPP
