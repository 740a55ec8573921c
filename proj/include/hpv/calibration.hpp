#ifndef HPV_CALIBRATION_HPP
#define HPV_CALIBRATION_HPP

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hpv/error.hpp"
#include "hpv/model.hpp"
#include "hpv/reproduction.hpp"

namespace hpv {

/// One or more controls that share a single free value (e.g. w1 = w2).
struct FreeControls {
    std::vector<Control> tied;

    /// Parses "u1" or "w1+w2".
    static FreeControls parse(const std::string& spec)
    {
        FreeControls out;
        if (spec.empty() || spec.back() == '+') throw InvalidArgument("malformed free spec '" + spec + "'");
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, '+')) {
            const auto b = item.find_first_not_of(" \t");
            const auto e = item.find_last_not_of(" \t");
            if (b == std::string::npos) throw InvalidArgument("empty control in free spec '" + spec + "'");
            out.tied.push_back(control_from_name(item.substr(b, e - b + 1)));
        }
        if (out.tied.empty()) throw InvalidArgument("free spec is empty");
        return out;
    }

    std::string to_string() const
    {
        std::string s;
        for (auto c : tied) {
            if (!s.empty()) s += '+';
            s += control_name(c);
        }
        return s;
    }
};

inline constexpr double kCalibrationTolerance = 1e-6;

/// Solves R_e(c) = target for the free value by bisection on [0, 1]. R_e is
/// nonincreasing in every control, so the target must lie between R_e with
/// the free value at 0 and at 1.
inline ControlVector calibrate_rate(const StrategyMask& mask, const ControlVector& fixed, const FreeControls& free,
                                    double target, const ModelParameters& q)
{
    for (auto c : free.tied) {
        if (!mask.is_active(c)) {
            throw InvalidArgument("calibration: free control " + std::string(control_name(c)) + " is inactive in " +
                                  mask.id);
        }
    }
    ControlVector c = mask.apply(fixed);
    c.validate();
    auto with = [&](double x) {
        ControlVector v = c;
        for (auto k : free.tied) v[k] = x;
        return v;
    };
    auto residual = [&](double x) { return effective_R(with(x), q).R_e - target; };

    const double r_lo = residual(0.0);
    if (std::abs(r_lo) < kCalibrationTolerance) return with(0.0);
    const double r_hi = residual(1.0);
    if (std::abs(r_hi) < kCalibrationTolerance) return with(1.0);
    if (!(r_lo > 0.0 && r_hi < 0.0)) {
        std::ostringstream msg;
        msg << "calibration of " << free.to_string() << " for " << mask.id << ": target R_e = " << target
            << " not bracketed (R_e = " << r_lo + target << " at 0, " << r_hi + target << " at 1)";
        throw NoBracket(msg.str());
    }

    double lo = 0.0, hi = 1.0, mid = 0.5;
    for (int i = 0; i < 200; ++i) {
        mid            = 0.5 * (lo + hi);
        const double r = residual(mid);
        if (std::abs(r) < kCalibrationTolerance) break;
        (r > 0.0 ? lo : hi) = mid;
    }
    return with(mid);
}

} // namespace hpv

#endif // HPV_CALIBRATION_HPP
