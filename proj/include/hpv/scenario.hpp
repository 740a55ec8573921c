#ifndef HPV_SCENARIO_HPP
#define HPV_SCENARIO_HPP

// Scenario configuration (INI text) and the batch runner that reproduces the
// constant- and time-dependent-strategy experiments.
//
// Sections, all optional:
//   [model]        epsilon theta beta_m beta_f beta_f_tilde gamma_f gamma_m p mu_f mu_m
//   [simulation]   t_final dt S_f U_f I_f V_f S_m I_m V_m
//   [costs]        A1 A2 A3 B1 B2
//   [fbsm]         max_iterations tolerance relaxation bounds(unit|rates) w_max u_max alpha_max warm_start
//   [strategy N]   mask w1 w2 u1 u2 alpha constant optimize calibrate
//   [calibrate N]  mask free target w1 w2 u1 u2 alpha
//   [compare]      pairs = A:B, C:D
// Unknown sections and keys are rejected. See configs/SCHEMA.md.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hpv/calibration.hpp"
#include "hpv/cea.hpp"
#include "hpv/error.hpp"
#include "hpv/integrator.hpp"
#include "hpv/model.hpp"
#include "hpv/optimal_control.hpp"
#include "hpv/reproduction.hpp"

namespace hpv {

enum class BoundsPolicy {
    unit,  ///< w_max, u_max, alpha_max from [fbsm]
    rates, ///< each strategy's listed rates are the upper bounds of its controls
};

struct CalibrationRequest {
    std::string name;
    StrategyMask mask;
    ControlVector fixed;
    FreeControls free;
    double target = 0.9;
};

struct StrategySpec {
    std::string name;
    StrategyMask mask;
    ControlVector rates;
    bool constant  = true;
    bool optimize  = false;
    bool calibrate = false; ///< take rates from the [calibrate <name>] request
};

struct ScenarioConfig {
    ModelParameters model;
    SimulationConfig simulation;
    CostWeights costs;
    FbsmConfig fbsm;
    BoundsPolicy bounds_policy = BoundsPolicy::unit;
    bool warm_start_from_rates = false;
    std::vector<StrategySpec> strategies;
    std::vector<CalibrationRequest> calibrations;
    std::vector<std::pair<std::string, std::string>> comparisons;

    const StrategySpec& strategy(const std::string& name) const
    {
        for (const auto& s : strategies) {
            if (s.name == name) return s;
        }
        throw InvalidArgument("no strategy '" + name + "' in config");
    }

    const CalibrationRequest* calibration(const std::string& name) const
    {
        for (const auto& c : calibrations) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }

    /// FBSM settings for one strategy: bounds and warm start follow the policy.
    FbsmConfig fbsm_for(const StrategySpec& s) const
    {
        FbsmConfig cfg = fbsm;
        if (bounds_policy == BoundsPolicy::rates) {
            for (auto k : kAllControls) cfg.bounds.upper[k] = s.mask.is_active(k) ? s.rates[k] : 0.0;
        }
        if (warm_start_from_rates) cfg.warm_start = s.mask.apply(s.rates);
        return cfg;
    }

    void validate() const
    {
        model.validate();
        simulation.validate();
        costs.validate();
        fbsm.validate();
        std::set<std::string> names;
        for (const auto& s : strategies) {
            if (!names.insert(s.name).second) throw InvalidArgument("duplicate strategy " + s.name);
            s.rates.validate();
            if (!s.mask.admits(s.rates)) {
                throw InvalidArgument("strategy " + s.name + " sets a control inactive in mask " + s.mask.id);
            }
            if (s.calibrate && !calibration(s.name)) {
                throw InvalidArgument("strategy " + s.name + " wants calibrated rates but has no [calibrate " +
                                      s.name + "] section");
            }
        }
        for (const auto& [a, b] : comparisons) {
            for (const auto& id : {a, b}) {
                const bool optimal = !id.empty() && id.back() == '*';
                const auto& s = strategy(optimal ? id.substr(0, id.size() - 1) : id);
                if (optimal ? !s.optimize : !s.constant) {
                    throw InvalidArgument("comparison refers to " + id + " which the config does not produce");
                }
            }
        }
    }
};

namespace detail {
using boost::property_tree::ptree;

inline double parse_number(const std::string& section, const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double v   = std::stod(text, &used);
        if (text.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("[" + section + "] " + key + ": '" + text + "' is not a number");
    }
}

inline bool parse_bool(const std::string& section, const std::string& key, const std::string& text)
{
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    throw InvalidArgument("[" + section + "] " + key + ": '" + text + "' is not a boolean");
}

inline void check_keys(const std::string& section, const ptree& tree, std::initializer_list<const char*> allowed)
{
    for (const auto& [key, _] : tree) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw InvalidArgument("unknown key '" + key + "' in [" + section + "]");
        }
    }
}

template <class Fn>
void for_each_number(const std::string& section, const ptree& tree, Fn&& fn)
{
    for (const auto& [key, value] : tree) {
        fn(key, parse_number(section, key, value.data()));
    }
}

inline ControlVector read_rates(const std::string& section, const ptree& tree)
{
    ControlVector c;
    for (auto k : kAllControls) {
        if (auto v = tree.get_optional<std::string>(std::string(control_name(k)))) {
            c[k] = parse_number(section, std::string(control_name(k)), *v);
        }
    }
    return c;
}

inline std::pair<std::string, std::string> split_section(const std::string& header)
{
    const auto space = header.find(' ');
    if (space == std::string::npos) return {header, ""};
    std::string rest = header.substr(space + 1);
    rest.erase(0, rest.find_first_not_of(' '));
    return {header.substr(0, space), rest};
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}
} // namespace detail

/// Parses "A:B,C:D" into pairs.
inline std::vector<std::pair<std::string, std::string>> parse_pairs(const std::string& text)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InvalidArgument("pair '" + item + "' must be A:B");
        out.emplace_back(detail::trim(item.substr(0, colon)), detail::trim(item.substr(colon + 1)));
    }
    return out;
}

/// Parses the INI-style scenario text. Every value has a default.
inline ScenarioConfig parse_scenario_config(std::istream& in)
{
    using detail::ptree;
    std::stringstream text;
    text << in.rdbuf();

    // read_ini drops sections without keys, so headers are collected here to
    // keep empty sections and their order.
    std::vector<std::string> headers;
    {
        std::istringstream lines(text.str());
        std::string line;
        while (std::getline(lines, line)) {
            line = detail::trim(line);
            if (line.size() < 2 || line.front() != '[' || line.back() != ']') continue;
            std::string h = detail::trim(line.substr(1, line.size() - 2));
            if (std::find(headers.begin(), headers.end(), h) != headers.end()) {
                throw InvalidArgument("duplicate section [" + h + "]");
            }
            headers.push_back(std::move(h));
        }
    }

    ptree root;
    try {
        boost::property_tree::ini_parser::read_ini(text, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidArgument(std::string("config syntax: ") + e.what());
    }
    for (const auto& [key, _] : root) {
        if (std::find(headers.begin(), headers.end(), key) == headers.end()) {
            throw InvalidArgument("key '" + key + "' outside any section");
        }
    }

    ScenarioConfig cfg;
    for (const auto& header : headers) {
        const auto found  = root.find(header);
        const ptree& body = found == root.not_found() ? ptree() : found->second;
        const auto [kind, name] = detail::split_section(header);

        if (kind == "model" && name.empty()) {
            ModelParameters& m = cfg.model;
            const std::map<std::string, double*> fields = {
                {"epsilon", &m.epsilon}, {"theta", &m.theta},     {"beta_m", &m.beta_m},
                {"beta_f", &m.beta_f},   {"beta_f_tilde", &m.beta_f_tilde}, {"gamma_f", &m.gamma_f},
                {"gamma_m", &m.gamma_m}, {"p", &m.p},             {"mu_f", &m.mu_f}, {"mu_m", &m.mu_m}};
            detail::for_each_number(header, body, [&](const std::string& key, double v) {
                auto it = fields.find(key);
                if (it == fields.end()) throw InvalidArgument("unknown key '" + key + "' in [model]");
                *it->second = v;
            });
        } else if (kind == "simulation" && name.empty()) {
            SimulationConfig& s = cfg.simulation;
            State& x            = s.initial_state;
            const std::map<std::string, double*> fields = {
                {"t_final", &s.t_final}, {"dt", &s.dt},   {"S_f", &x.S_f}, {"U_f", &x.U_f}, {"I_f", &x.I_f},
                {"V_f", &x.V_f},         {"S_m", &x.S_m}, {"I_m", &x.I_m}, {"V_m", &x.V_m}};
            detail::for_each_number(header, body, [&](const std::string& key, double v) {
                auto it = fields.find(key);
                if (it == fields.end()) throw InvalidArgument("unknown key '" + key + "' in [simulation]");
                *it->second = v;
            });
        } else if (kind == "costs" && name.empty()) {
            CostWeights& w = cfg.costs;
            const std::map<std::string, double*> fields = {
                {"A1", &w.A1}, {"A2", &w.A2}, {"A3", &w.A3}, {"B1", &w.B1}, {"B2", &w.B2}};
            detail::for_each_number(header, body, [&](const std::string& key, double v) {
                auto it = fields.find(key);
                if (it == fields.end()) throw InvalidArgument("unknown key '" + key + "' in [costs]");
                *it->second = v;
            });
        } else if (kind == "fbsm" && name.empty()) {
            detail::check_keys(header, body,
                               {"max_iterations", "tolerance", "relaxation", "bounds", "w_max", "u_max",
                                "alpha_max", "warm_start"});
            FbsmConfig& f = cfg.fbsm;
            for (const auto& [key, value] : body) {
                const std::string& text = value.data();
                if (key == "bounds") {
                    if (text == "unit") {
                        cfg.bounds_policy = BoundsPolicy::unit;
                    } else if (text == "rates") {
                        cfg.bounds_policy = BoundsPolicy::rates;
                    } else {
                        throw InvalidArgument("[fbsm] bounds must be 'unit' or 'rates'");
                    }
                } else if (key == "warm_start") {
                    cfg.warm_start_from_rates = detail::parse_bool(header, key, text);
                } else {
                    const double v = detail::parse_number(header, key, text);
                    if (key == "max_iterations") {
                        if (v < 1 || v != std::floor(v)) throw InvalidArgument("[fbsm] max_iterations must be a positive integer");
                        f.max_iterations = static_cast<std::size_t>(v);
                    } else if (key == "tolerance") {
                        f.tolerance = v;
                    } else if (key == "relaxation") {
                        f.relaxation = v;
                    } else if (key == "w_max") {
                        f.bounds.upper.w1 = f.bounds.upper.w2 = v;
                    } else if (key == "u_max") {
                        f.bounds.upper.u1 = f.bounds.upper.u2 = v;
                    } else if (key == "alpha_max") {
                        f.bounds.upper.alpha = v;
                    }
                }
            }
        } else if (kind == "strategy" && !name.empty()) {
            detail::check_keys(header, body,
                               {"mask", "w1", "w2", "u1", "u2", "alpha", "constant", "optimize", "calibrate"});
            StrategySpec s;
            s.name  = name;
            s.mask  = strategy_mask(body.get<std::string>("mask", name));
            s.rates = detail::read_rates(header, body);
            if (auto v = body.get_optional<std::string>("constant")) s.constant = detail::parse_bool(header, "constant", *v);
            if (auto v = body.get_optional<std::string>("optimize")) s.optimize = detail::parse_bool(header, "optimize", *v);
            if (auto v = body.get_optional<std::string>("calibrate")) s.calibrate = detail::parse_bool(header, "calibrate", *v);
            if (s.name.back() == '*') throw InvalidArgument("strategy names may not end in '*'");
            cfg.strategies.push_back(std::move(s));
        } else if (kind == "calibrate" && !name.empty()) {
            detail::check_keys(header, body, {"mask", "free", "target", "w1", "w2", "u1", "u2", "alpha"});
            CalibrationRequest r;
            r.name  = name;
            r.mask  = strategy_mask(body.get<std::string>("mask", name));
            r.fixed = detail::read_rates(header, body);
            auto free = body.get_optional<std::string>("free");
            if (!free) throw InvalidArgument("[" + header + "] needs a 'free' key");
            r.free = FreeControls::parse(*free);
            if (auto t = body.get_optional<std::string>("target")) r.target = detail::parse_number(header, "target", *t);
            cfg.calibrations.push_back(std::move(r));
        } else if (kind == "compare" && name.empty()) {
            detail::check_keys(header, body, {"pairs"});
            const auto pairs = parse_pairs(body.get<std::string>("pairs", ""));
            cfg.comparisons.insert(cfg.comparisons.end(), pairs.begin(), pairs.end());
        } else {
            throw InvalidArgument("unknown section [" + header + "]");
        }
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_scenario_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config " + path.string());
    return parse_scenario_config(in);
}

// ---------------------------------------------------------------------------
// Running

enum class Family { constant, optimal };

inline const char* to_string(Family f) { return f == Family::constant ? "constant" : "optimal"; }

struct OptimizationSummary {
    double j_value         = 0.0;
    std::size_t iterations = 0;
    bool converged         = false;
    double control_residual = 0.0;
    double state_residual   = 0.0;
    std::size_t monotonicity_violations = 0;
    FbsmConfig config;
};

struct StrategyResult {
    std::string id; ///< "S4" for constant, "S4*" for time-dependent
    Family family = Family::constant;
    StrategyMask mask;
    ControlVector rates; ///< constant rates, or the schedule's value at t = 0
    ReproductionBreakdown reproduction; ///< at `rates`
    ControlSchedule schedule;
    Trajectory trajectory;
    OutcomeRecord outcome;
    std::optional<OptimizationSummary> optimization;
};

struct CalibrationResult {
    CalibrationRequest request;
    ControlVector rates;
    double R_e = 0.0;
};

struct ScenarioReport {
    Trajectory baseline;
    std::vector<CalibrationResult> calibrations;
    std::vector<StrategyResult> strategies;
    std::optional<RankingReport> constant_ranking;
    std::optional<RankingReport> optimal_ranking;
    std::vector<PairComparison> comparisons;

    const StrategyResult& result(const std::string& id) const
    {
        for (const auto& r : strategies) {
            if (r.id == id) return r;
        }
        throw InvalidArgument("no result for strategy " + id);
    }
};

inline CalibrationResult run_calibration(const CalibrationRequest& r, const ModelParameters& q)
{
    CalibrationResult out{r, calibrate_rate(r.mask, r.fixed, r.free, r.target, q), 0.0};
    out.R_e = effective_R(out.rates, q).R_e;
    return out;
}

/// Rates actually used for a constant strategy (calibrated when requested).
inline ControlVector resolve_rates(const ScenarioConfig& cfg, const StrategySpec& s)
{
    if (!s.calibrate) return s.rates;
    return run_calibration(*cfg.calibration(s.name), cfg.model).rates;
}

namespace detail {
template <class Fn>
auto with_context(const std::string& what, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(what + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(what + ": " + e.what());
    } catch (const UndefinedRatio& e) {
        throw UndefinedRatio(what + ": " + e.what());
    } catch (const NoBracket& e) {
        throw NoBracket(what + ": " + e.what());
    }
}
} // namespace detail

inline StrategyResult run_constant(const ScenarioConfig& cfg, const StrategySpec& s, const Trajectory& baseline)
{
    return detail::with_context("strategy " + s.name, [&] {
        StrategyResult r;
        r.id           = s.name;
        r.family       = Family::constant;
        r.mask         = s.mask;
        r.rates        = s.mask.apply(resolve_rates(cfg, s));
        r.reproduction = effective_R(r.rates, cfg.model);
        r.schedule     = ControlSchedule::constant(cfg.simulation.grid(), r.rates, s.mask);
        r.trajectory   = integrate_forward(cfg.model, r.rates, cfg.simulation);
        r.outcome      = {r.id, cost(r.trajectory, r.rates, cfg.model, cfg.costs),
                          effectiveness(r.trajectory, baseline)};
        return r;
    });
}

inline StrategyResult run_optimal(const ScenarioConfig& cfg, const StrategySpec& s, const Trajectory& baseline)
{
    return detail::with_context("strategy " + s.name + "*", [&] {
        StrategySpec spec = s;
        spec.rates        = resolve_rates(cfg, s);
        const FbsmConfig fcfg = cfg.fbsm_for(spec);
        OptimalSolution sol   = fbsm_solve(s.mask, cfg.model, cfg.costs, cfg.simulation, fcfg);

        StrategyResult r;
        r.id           = s.name + "*";
        r.family       = Family::optimal;
        r.mask         = s.mask;
        r.rates        = sol.schedule.values.front();
        r.reproduction = effective_R(r.rates, cfg.model);
        r.outcome      = {r.id, cost(sol.state, sol.schedule, cfg.model, cfg.costs),
                          effectiveness(sol.state, baseline)};
        r.optimization = OptimizationSummary{sol.j_value,          sol.iterations,     sol.converged,
                                             sol.control_residual, sol.state_residual, sol.monotonicity_violations,
                                             fcfg};
        r.schedule     = std::move(sol.schedule);
        r.trajectory   = std::move(sol.state);
        return r;
    });
}

inline Trajectory run_baseline(const ScenarioConfig& cfg)
{
    return integrate_forward(cfg.model, ControlVector{}, cfg.simulation);
}

/// Baseline once, then every strategy, both rankings and the requested pairwise comparisons.
inline ScenarioReport run_scenario(const ScenarioConfig& cfg)
{
    cfg.validate();
    ScenarioReport report;
    report.baseline = run_baseline(cfg);

    for (const auto& c : cfg.calibrations) {
        report.calibrations.push_back(detail::with_context("calibration " + c.name, [&] {
            return run_calibration(c, cfg.model);
        }));
    }
    for (const auto& s : cfg.strategies) {
        if (s.constant) report.strategies.push_back(run_constant(cfg, s, report.baseline));
    }
    for (const auto& s : cfg.strategies) {
        if (s.optimize) report.strategies.push_back(run_optimal(cfg, s, report.baseline));
    }

    std::vector<OutcomeRecord> constant, optimal;
    for (const auto& r : report.strategies) {
        (r.family == Family::constant ? constant : optimal).push_back(r.outcome);
    }
    if (!constant.empty()) report.constant_ranking = rank(constant);
    if (!optimal.empty()) report.optimal_ranking = rank(optimal);

    for (const auto& [a, b] : cfg.comparisons) {
        report.comparisons.push_back(compare_pair(report.result(a).outcome, report.result(b).outcome));
    }
    return report;
}

} // namespace hpv

#endif // HPV_SCENARIO_HPP
