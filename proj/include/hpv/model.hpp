#ifndef HPV_MODEL_HPP
#define HPV_MODEL_HPP

// Two-sex SIVS model: parameters, controls, compartments and the right-hand
// sides of the full 7-compartment system and the reduced 5-compartment
// control system obtained by eliminating S_f and S_m.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hpv/error.hpp"

namespace hpv {

/// Epidemiological constants. Defaults are the baseline means: 95% vaccine
/// efficacy, 20 years of protection, infectious periods of 1.3 (female) and
/// 0.6 (male) years, 20 (female) and 25 (male) years of sexual activity.
struct ModelParameters {
    double epsilon      = 0.05;      // vaccine leakage, efficacy = 1 - epsilon
    double theta        = 1.0 / 20;  // waning of vaccine protection
    double beta_m       = 2.0;       // male -> female transmission
    double beta_f       = 2.0;       // unaware female -> male transmission
    double beta_f_tilde = 0.5;       // aware female -> male transmission
    double gamma_f      = 1.0 / 1.3;
    double gamma_m      = 1.0 / 0.6;
    double p            = 0.4;       // fraction of infected females that become aware
    double mu_f         = 1.0 / 20;
    double mu_m         = 1.0 / 25;

    /// Throws InvalidArgument on negative rates or epsilon, p outside [0,1].
    void validate() const
    {
        const std::pair<const char*, double> fields[] = {
            {"epsilon", epsilon}, {"theta", theta},     {"beta_m", beta_m},     {"beta_f", beta_f},
            {"beta_f_tilde", beta_f_tilde}, {"gamma_f", gamma_f}, {"gamma_m", gamma_m},
            {"p", p},             {"mu_f", mu_f},       {"mu_m", mu_m}};
        for (const auto& [name, value] : fields) {
            if (!std::isfinite(value) || value < 0.0) {
                throw InvalidArgument(std::string("parameter ") + name + " must be finite and >= 0");
            }
        }
        if (epsilon > 1.0) throw InvalidArgument("parameter epsilon must lie in [0,1]");
        if (p > 1.0) throw InvalidArgument("parameter p must lie in [0,1]");
        if (mu_f <= 0.0 || mu_m <= 0.0) {
            throw InvalidArgument("parameters mu_f and mu_m must be strictly positive");
        }
    }

    /// Plausibility warnings: values outside the literature ranges, or an aware
    /// female transmitting at least as much as an unaware one. Never fatal.
    std::vector<std::string> range_warnings() const
    {
        struct Range {
            const char* name;
            double value, lo, hi;
        };
        // ranges are given for 1-epsilon, 1/theta, 1/gamma_f, 1/gamma_m in the literature
        const Range ranges[] = {
            {"vaccine efficacy (1-epsilon)", 1.0 - epsilon, 0.9, 1.0},
            {"protection duration (1/theta)", theta > 0 ? 1.0 / theta : INFINITY, 5.0, 50.0},
            {"beta_m", beta_m, 0.05, 5.0},
            {"beta_f", beta_f, 0.05, 5.0},
            {"beta_f_tilde", beta_f_tilde, 0.025, 2.5},
            {"female infectious period (1/gamma_f)", gamma_f > 0 ? 1.0 / gamma_f : INFINITY, 0.83, 2.0},
            {"male infectious period (1/gamma_m)", gamma_m > 0 ? 1.0 / gamma_m : INFINITY, 0.33, 1.2},
            {"p", p, 0.0, 1.0},
            {"mu_f", mu_f, 0.02, 1.0},
            {"mu_m", mu_m, 0.02, 1.0},
        };
        std::vector<std::string> out;
        for (const auto& r : ranges) {
            if (r.value < r.lo || r.value > r.hi) {
                out.push_back(std::string(r.name) + " = " + std::to_string(r.value) + " outside [" +
                              std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
            }
        }
        if (!(beta_f_tilde < beta_f)) {
            out.emplace_back("beta_f_tilde >= beta_f: aware females expected to transmit less");
        }
        return out;
    }
};

enum class Control : std::size_t { w1 = 0, w2, u1, u2, alpha };
inline constexpr std::size_t kNumControls = 5;
inline constexpr std::array<Control, kNumControls> kAllControls = {Control::w1, Control::w2, Control::u1,
                                                                   Control::u2, Control::alpha};

constexpr std::string_view control_name(Control c)
{
    constexpr std::array<std::string_view, kNumControls> names = {"w1", "w2", "u1", "u2", "alpha"};
    return names[static_cast<std::size_t>(c)];
}

inline Control control_from_name(std::string_view name)
{
    for (auto c : kAllControls) {
        if (control_name(c) == name) return c;
    }
    throw InvalidArgument("unknown control '" + std::string(name) + "' (expected w1, w2, u1, u2 or alpha)");
}

/// Cohort vaccination fractions (w1, w2), adult vaccination rates (u1, u2) and
/// the screening rate alpha.
struct ControlVector {
    double w1    = 0.0;
    double w2    = 0.0;
    double u1    = 0.0;
    double u2    = 0.0;
    double alpha = 0.0;

    double& operator[](Control c) { return this->*member(c); }
    double operator[](Control c) const { return this->*member(c); }

    bool in_box(double tol = 0.0) const
    {
        for (auto c : kAllControls) {
            const double v = (*this)[c];
            if (!(v >= -tol && v <= 1.0 + tol)) return false;
        }
        return true;
    }

    void validate() const
    {
        if (!in_box()) throw InvalidArgument("controls must lie in [0,1]");
    }

    friend bool operator==(const ControlVector&, const ControlVector&) = default;

private:
    static constexpr double ControlVector::*member(Control c)
    {
        constexpr std::array<double ControlVector::*, kNumControls> members = {
            &ControlVector::w1, &ControlVector::w2, &ControlVector::u1, &ControlVector::u2, &ControlVector::alpha};
        return members[static_cast<std::size_t>(c)];
    }
};

/// Which controls a strategy may use.
struct StrategyMask {
    std::string id;
    std::array<bool, kNumControls> active{};

    bool is_active(Control c) const { return active[static_cast<std::size_t>(c)]; }

    ControlVector apply(ControlVector c) const
    {
        for (auto k : kAllControls) {
            if (!is_active(k)) c[k] = 0.0;
        }
        return c;
    }

    bool admits(const ControlVector& c) const
    {
        for (auto k : kAllControls) {
            if (!is_active(k) && c[k] != 0.0) return false;
        }
        return true;
    }

    std::vector<Control> active_controls() const
    {
        std::vector<Control> out;
        for (auto k : kAllControls) {
            if (is_active(k)) out.push_back(k);
        }
        return out;
    }
};

/// The eight intervention families S1..S8.
inline const std::array<StrategyMask, 8>& standard_strategies()
{
    //                                       w1     w2     u1     u2     alpha
    static const std::array<StrategyMask, 8> masks = {{
        {"S1", {true, true, true, true, true}},    // all controls
        {"S2", {true, true, false, false, false}},  // vaccination before sexual debut
        {"S3", {false, false, true, true, false}},  // vaccination of sexually active adults
        {"S4", {true, false, true, false, false}},  // females' vaccination
        {"S5", {false, true, false, true, false}},  // males' vaccination
        {"S6", {true, true, false, false, true}},   // S2 + screening
        {"S7", {false, false, true, true, true}},   // S3 + screening
        {"S8", {true, false, true, false, true}},   // S4 + screening
    }};
    return masks;
}

inline const StrategyMask& strategy_mask(std::string_view id)
{
    for (const auto& m : standard_strategies()) {
        if (m.id == id) return m;
    }
    throw InvalidArgument("unknown strategy '" + std::string(id) + "' (expected S1..S8)");
}

inline constexpr std::size_t kNumCompartments = 7;
inline constexpr std::size_t kNumReduced      = 5;

/// Population fractions; each sex sums to one.
struct State {
    double S_f = 0.0, U_f = 0.0, I_f = 0.0, V_f = 0.0;
    double S_m = 0.0, I_m = 0.0, V_m = 0.0;

    std::array<double, kNumCompartments> to_array() const { return {S_f, U_f, I_f, V_f, S_m, I_m, V_m}; }
    static State from_array(const std::array<double, kNumCompartments>& a)
    {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
    }

    double female_total() const { return S_f + U_f + I_f + V_f; }
    double male_total() const { return S_m + I_m + V_m; }
    double infected() const { return U_f + I_f + I_m; }

    friend bool operator==(const State&, const State&) = default;
};

/// Time derivative of a State, per year.
struct StateDerivative {
    double S_f = 0.0, U_f = 0.0, I_f = 0.0, V_f = 0.0;
    double S_m = 0.0, I_m = 0.0, V_m = 0.0;

    std::array<double, kNumCompartments> to_array() const { return {S_f, U_f, I_f, V_f, S_m, I_m, V_m}; }
};

/// State of the control system; susceptibles are implied by conservation.
struct ReducedState {
    double U_f = 0.0, I_f = 0.0, V_f = 0.0, I_m = 0.0, V_m = 0.0;

    double S_f() const { return 1.0 - U_f - I_f - V_f; }
    double S_m() const { return 1.0 - I_m - V_m; }

    std::array<double, kNumReduced> to_array() const { return {U_f, I_f, V_f, I_m, V_m}; }
    static ReducedState from_array(const std::array<double, kNumReduced>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }

    static ReducedState from_full(const State& s) { return {s.U_f, s.I_f, s.V_f, s.I_m, s.V_m}; }
    State lift() const { return {S_f(), U_f, I_f, V_f, S_m(), I_m, V_m}; }
};

struct ReducedDerivative {
    double U_f = 0.0, I_f = 0.0, V_f = 0.0, I_m = 0.0, V_m = 0.0;

    std::array<double, kNumReduced> to_array() const { return {U_f, I_f, V_f, I_m, V_m}; }
};

/// Slack allowed on compartment bounds before a state is treated as a solver blow-up.
inline constexpr double kStateBoundTolerance = 1e-6;

namespace detail {
template <std::size_t N>
void check_fractions(const std::array<double, N>& x, double tol)
{
    for (double v : x) {
        if (!(v >= -tol && v <= 1.0 + tol)) {
            throw DomainError("compartment value " + std::to_string(v) + " outside [0,1]; integration blew up?");
        }
    }
}
} // namespace detail

/// Right-hand side of the full model.
inline StateDerivative rhs_full(const State& x, const ControlVector& c, const ModelParameters& q)
{
    detail::check_fractions(x.to_array(), kStateBoundTolerance);

    const double female_force = q.beta_m * x.I_m;                      // per susceptible female
    const double male_force   = q.beta_f * x.U_f + q.beta_f_tilde * x.I_f; // per susceptible male
    const double exposed_f    = x.S_f + q.epsilon * x.V_f;
    const double exposed_m    = x.S_m + q.epsilon * x.V_m;

    StateDerivative d;
    d.S_f = (1.0 - c.w1) * q.mu_f - female_force * x.S_f - (c.u1 + q.mu_f) * x.S_f + q.gamma_f * (x.U_f + x.I_f) +
            q.theta * x.V_f;
    d.U_f = exposed_f * (1.0 - q.p) * female_force - (q.gamma_f + c.alpha + q.mu_f) * x.U_f;
    d.I_f = exposed_f * q.p * female_force + c.alpha * x.U_f - (q.gamma_f + q.mu_f) * x.I_f;
    d.V_f = c.w1 * q.mu_f + c.u1 * x.S_f - q.epsilon * female_force * x.V_f - (q.mu_f + q.theta) * x.V_f;
    d.S_m = (1.0 - c.w2) * q.mu_m - male_force * x.S_m - (c.u2 + q.mu_m) * x.S_m + q.gamma_m * x.I_m +
            q.theta * x.V_m;
    d.I_m = male_force * exposed_m - (q.gamma_m + q.mu_m) * x.I_m;
    d.V_m = c.w2 * q.mu_m - male_force * q.epsilon * x.V_m + c.u2 * x.S_m - (q.mu_m + q.theta) * x.V_m;
    return d;
}

/// Right-hand side of the reduced control system, S_f = 1-U_f-I_f-V_f and S_m = 1-I_m-V_m.
inline ReducedDerivative rhs_control(const ReducedState& y, const ControlVector& c, const ModelParameters& q)
{
    const double S_f = y.S_f();
    const double S_m = y.S_m();
    detail::check_fractions(std::array<double, 7>{y.U_f, y.I_f, y.V_f, y.I_m, y.V_m, S_f, S_m},
                            kStateBoundTolerance);

    const double male_force = q.beta_f * y.U_f + q.beta_f_tilde * y.I_f;
    const double exposed_f  = S_f + q.epsilon * y.V_f;
    const double exposed_m  = S_m + q.epsilon * y.V_m;

    ReducedDerivative d;
    d.U_f = exposed_f * (1.0 - q.p) * q.beta_m * y.I_m - (q.gamma_f + c.alpha + q.mu_f) * y.U_f;
    d.I_f = exposed_f * q.p * q.beta_m * y.I_m + c.alpha * y.U_f - (q.gamma_f + q.mu_f) * y.I_f;
    d.V_f = c.w1 * q.mu_f + c.u1 * S_f - q.epsilon * q.beta_m * y.V_f * y.I_m - (q.mu_f + q.theta) * y.V_f;
    d.I_m = male_force * exposed_m - (q.gamma_m + q.mu_m) * y.I_m;
    d.V_m = c.w2 * q.mu_m - male_force * q.epsilon * y.V_m + c.u2 * S_m - (q.mu_m + q.theta) * y.V_m;
    return d;
}

/// Initial condition used for the prevalence runs.
inline State default_initial_state()
{
    return {0.95, 0.03, 0.02, 0.0, 0.95, 0.05, 0.0};
}

} // namespace hpv

#endif // HPV_MODEL_HPP
