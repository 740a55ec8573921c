#ifndef HPV_TESTS_SUPPORT_HPP
#define HPV_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <random>

#include "hpv/model.hpp"
#include "hpv/optimal_control.hpp"

namespace hpv::testing {

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

/// Random point of the simplex product: female and male fractions each sum to 1.
inline State random_state(std::mt19937_64& rng)
{
    std::exponential_distribution<double> e(1.0);
    double f[4], m[3], fs = 0, ms = 0;
    for (double& v : f) fs += (v = e(rng));
    for (double& v : m) ms += (v = e(rng));
    return {f[0] / fs, f[1] / fs, f[2] / fs, f[3] / fs, m[0] / ms, m[1] / ms, m[2] / ms};
}

inline ControlVector random_controls(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(rng), u(rng), u(rng), u(rng), u(rng)};
}

/// Parameters drawn around the baseline means (each rate scaled by 0.5..2).
inline ModelParameters random_parameters(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> s(0.5, 2.0), u(0.0, 1.0);
    ModelParameters q;
    q.epsilon      = u(rng);
    q.p            = u(rng);
    q.theta       *= s(rng);
    q.beta_m      *= s(rng);
    q.beta_f      *= s(rng);
    q.beta_f_tilde = q.beta_f * u(rng);
    q.gamma_f     *= s(rng);
    q.gamma_m     *= s(rng);
    q.mu_f        *= s(rng);
    q.mu_m        *= s(rng);
    return q;
}

inline AdjointState random_adjoint(std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng), u(rng), u(rng)};
}

/// Reduced state strictly inside the simplex, away from the boundary.
inline ReducedState random_interior(std::mt19937_64& rng)
{
    State s;
    do {
        s = random_state(rng);
    } while (std::min({s.S_f, s.U_f, s.I_f, s.V_f, s.S_m, s.I_m, s.V_m}) < 0.01);
    return ReducedState::from_full(s);
}

} // namespace hpv::testing

#endif
