#ifndef HPV_REPRODUCTION_HPP
#define HPV_REPRODUCTION_HPP

// Disease-free equilibrium, next-generation matrix and effective reproduction
// number of the controlled model.
//
// With infected compartments (U_f, I_f, I_m) and the DFE exposure weights
//   sigma_f = S_f* + eps V_f*,   sigma_m = S_m* + eps V_m*,
// the new-infection and transition Jacobians are
//
//        | 0            0                 (1-p) beta_m sigma_f |        | a_U     0     0   |
//   F =  | 0            0                 p beta_m sigma_f     |   V =  | -alpha  a_I   0   |
//        | beta_f s_m   beta~_f sigma_m   0                    |        | 0       0     a_m |
//
// with a_U = gamma_f + alpha + mu_f, a_I = gamma_f + mu_f, a_m = gamma_m + mu_m.
// K = F V^-1 has characteristic polynomial lambda (lambda^2 - T_mf T_fm) where
//   T_mf = beta_m sigma_f / a_m
//   T_fm = sigma_m [ (1-p) beta_f / a_U + beta~_f ( p / a_I + (1-p) alpha / (a_U a_I) ) ]
// so R_e = sqrt(T_mf T_fm).

#include <array>
#include <cmath>

#include "hpv/model.hpp"

namespace hpv {

using Matrix3 = std::array<std::array<double, 3>, 3>;

struct ReproductionBreakdown {
    double T_m_f = 0.0; ///< expected female infections caused by one infected male
    double T_f_m = 0.0; ///< expected male infections caused by one newly infected female
    double R_e   = 0.0;
};

enum class DfeStability { stable, unstable, indeterminate };

inline const char* to_string(DfeStability s)
{
    switch (s) {
    case DfeStability::stable: return "stable";
    case DfeStability::unstable: return "unstable";
    case DfeStability::indeterminate: return "indeterminate";
    }
    return "?";
}

/// Infection-free equilibrium of the controlled model. Zeroing U_f, I_f, I_m
/// leaves the linear balance
///   0 = w1 mu_f + u1 (1 - V_f) - (mu_f + theta) V_f
/// and its male analogue.
inline State compute_dfe(const ControlVector& c, const ModelParameters& q)
{
    const double V_f = (c.w1 * q.mu_f + c.u1) / (q.mu_f + q.theta + c.u1);
    const double V_m = (c.w2 * q.mu_m + c.u2) / (q.mu_m + q.theta + c.u2);
    return {1.0 - V_f, 0.0, 0.0, V_f, 1.0 - V_m, 0.0, V_m};
}

/// New-infection Jacobian over (U_f, I_f, I_m) at the DFE.
inline Matrix3 new_infection_matrix(const ControlVector& c, const ModelParameters& q)
{
    const State dfe       = compute_dfe(c, q);
    const double sigma_f  = dfe.S_f + q.epsilon * dfe.V_f;
    const double sigma_m  = dfe.S_m + q.epsilon * dfe.V_m;
    Matrix3 f{};
    f[0][2] = (1.0 - q.p) * q.beta_m * sigma_f;
    f[1][2] = q.p * q.beta_m * sigma_f;
    f[2][0] = q.beta_f * sigma_m;
    f[2][1] = q.beta_f_tilde * sigma_m;
    return f;
}

/// Transition Jacobian over (U_f, I_f, I_m).
inline Matrix3 transition_matrix(const ControlVector& c, const ModelParameters& q)
{
    Matrix3 v{};
    v[0][0] = q.gamma_f + c.alpha + q.mu_f;
    v[1][0] = -c.alpha;
    v[1][1] = q.gamma_f + q.mu_f;
    v[2][2] = q.gamma_m + q.mu_m;
    return v;
}

/// K = F V^-1. V is lower triangular so its inverse is written out.
inline Matrix3 next_generation_matrix(const ControlVector& c, const ModelParameters& q)
{
    const Matrix3 f = new_infection_matrix(c, q);
    const Matrix3 v = transition_matrix(c, q);

    Matrix3 v_inv{};
    v_inv[0][0] = 1.0 / v[0][0];
    v_inv[1][1] = 1.0 / v[1][1];
    v_inv[1][0] = -v[1][0] / (v[0][0] * v[1][1]);
    v_inv[2][2] = 1.0 / v[2][2];

    Matrix3 k{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int l = 0; l < 3; ++l) k[i][j] += f[i][l] * v_inv[l][j];
        }
    }
    return k;
}

inline ReproductionBreakdown effective_R(const ControlVector& c, const ModelParameters& q)
{
    const State dfe      = compute_dfe(c, q);
    const double sigma_f = dfe.S_f + q.epsilon * dfe.V_f;
    const double sigma_m = dfe.S_m + q.epsilon * dfe.V_m;
    const double a_u     = q.gamma_f + c.alpha + q.mu_f;
    const double a_i     = q.gamma_f + q.mu_f;
    const double a_m     = q.gamma_m + q.mu_m;

    ReproductionBreakdown r;
    r.T_m_f = q.beta_m * sigma_f / a_m;
    r.T_f_m = sigma_m * ((1.0 - q.p) * q.beta_f / a_u +
                         q.beta_f_tilde * (q.p / a_i + (1.0 - q.p) * c.alpha / (a_u * a_i)));
    r.R_e   = std::sqrt(r.T_m_f * r.T_f_m);
    return r;
}

/// Threshold tolerance below which |R_e - 1| is reported as indeterminate.
inline constexpr double kThresholdTolerance = 1e-9;

inline DfeStability classify_dfe(const ControlVector& c, const ModelParameters& q)
{
    const double r = effective_R(c, q).R_e;
    if (std::abs(r - 1.0) < kThresholdTolerance) return DfeStability::indeterminate;
    return r < 1.0 ? DfeStability::stable : DfeStability::unstable;
}

} // namespace hpv

#endif // HPV_REPRODUCTION_HPP
