#ifndef HPV_REPORT_HPP
#define HPV_REPORT_HPP

// Output files of a scenario run: trajectory and ranking CSVs, elimination
// logs, a JSON run summary per optimized strategy, and a text summary.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "json.hpp"

#include "hpv/scenario.hpp"

namespace hpv {

inline nlohmann::json to_json(const FbsmConfig& c)
{
    nlohmann::json bounds;
    for (auto k : kAllControls) bounds[std::string(control_name(k))] = c.bounds.upper[k];
    nlohmann::json j = {{"max_iterations", c.max_iterations},
                        {"tolerance", c.tolerance},
                        {"relaxation", c.relaxation},
                        {"upper_bounds", bounds}};
    if (c.warm_start) {
        nlohmann::json ws;
        for (auto k : kAllControls) ws[std::string(control_name(k))] = (*c.warm_start)[k];
        j["warm_start"] = ws;
    }
    return j;
}

/// Run summary of one time-dependent strategy.
inline nlohmann::json run_summary_json(const StrategyResult& r)
{
    nlohmann::json j = {{"strategy", r.id},
                        {"mask", r.mask.id},
                        {"cost", r.outcome.cost},
                        {"effectiveness", r.outcome.effectiveness}};
    if (r.outcome.effectiveness != 0.0) j["acer"] = acer(r.outcome);
    if (r.optimization) {
        const auto& o = *r.optimization;
        j["J"]                       = o.j_value;
        j["iterations"]              = o.iterations;
        j["converged"]               = o.converged;
        j["control_residual"]        = o.control_residual;
        j["state_residual"]          = o.state_residual;
        j["monotonicity_violations"] = o.monotonicity_violations;
        j["config"]                  = to_json(o.config);
    }
    return j;
}

inline std::string file_stem(const std::string& id)
{
    std::string s = id;
    if (!s.empty() && s.back() == '*') {
        s.pop_back();
        s += "_opt";
    }
    return s;
}

inline void write_summary_text(std::ostream& os, const ScenarioReport& r)
{
    const auto flags = os.flags();
    os << std::fixed << std::setprecision(4);
    if (!r.calibrations.empty()) {
        os << "calibration\n";
        for (const auto& c : r.calibrations) {
            os << "  " << c.request.name << " (" << c.request.free.to_string() << " free, target "
               << c.request.target << "):";
            for (auto k : c.request.mask.active_controls()) os << ' ' << control_name(k) << '=' << c.rates[k];
            os << "  R_e=" << std::setprecision(7) << c.R_e << std::setprecision(4) << '\n';
        }
    }
    if (!r.strategies.empty()) {
        os << "strategies\n";
        for (const auto& s : r.strategies) {
            os << "  " << std::left << std::setw(8) << s.id << std::right << " C=" << std::setw(9) << s.outcome.cost
               << " E=" << std::setw(8) << s.outcome.effectiveness;
            if (s.outcome.effectiveness != 0.0) os << " ACER=" << std::setw(7) << acer(s.outcome);
            if (s.family == Family::constant) os << " R_e=" << s.reproduction.R_e;
            if (s.optimization) {
                os << " J=" << s.optimization->j_value << " sweeps=" << s.optimization->iterations
                   << (s.optimization->converged ? " converged" : " NOT CONVERGED");
            }
            os << '\n';
        }
    }
    auto print_ranking = [&](const std::optional<RankingReport>& rep, const char* family) {
        if (!rep) return;
        os << family << " ranking:";
        for (const auto& e : rep->entries) os << ' ' << e.rank << '=' << e.record.strategy;
        os << '\n';
    };
    print_ranking(r.constant_ranking, "constant");
    print_ranking(r.optimal_ranking, "optimal");
    if (!r.comparisons.empty()) {
        os << "comparisons\n";
        for (const auto& c : r.comparisons) {
            os << "  ICER(" << c.cheaper.strategy << ", " << c.costlier.strategy << ") = " << c.icer_value
               << ", ACER(" << c.cheaper.strategy << ") = " << c.acer_cheaper << " [" << to_string(c.rule)
               << "] -> " << c.preferred << " more cost-effective\n";
        }
    }
    const State& end = r.baseline.final_state();
    os << "baseline at t=" << r.baseline.grid.t_final() << ": U_f=" << std::setprecision(6) << end.U_f
       << " I_f=" << end.I_f << " I_m=" << end.I_m << '\n';
    os.flags(flags);
}

/// Writes every artifact of a run into `dir` (created if missing).
inline void write_scenario_outputs(const ScenarioReport& r, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name);
        if (!f) throw InvalidArgument("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("baseline.csv");
        write_trajectory_csv(f, r.baseline);
    }
    for (const auto& s : r.strategies) {
        auto f = open(file_stem(s.id) + ".csv");
        write_trajectory_csv(f, s.trajectory, &s.schedule);
        if (s.optimization) {
            auto js = open(file_stem(s.id) + "_summary.json");
            js << std::setw(2) << run_summary_json(s) << '\n';
        }
    }
    auto ranking = [&](const std::optional<RankingReport>& rep, const std::string& family) {
        if (!rep) return;
        auto csv = open("ranking_" + family + ".csv");
        write_ranking_csv(csv, *rep);
        auto log = open("ranking_" + family + "_log.txt");
        write_elimination_log(log, *rep);
    };
    ranking(r.constant_ranking, "constant");
    ranking(r.optimal_ranking, "optimal");
    if (!r.comparisons.empty()) {
        auto f = open("comparisons.csv");
        f << std::setprecision(17) << "cheaper,costlier,icer,acer_cheaper,acer_costlier,preferred\n";
        for (const auto& c : r.comparisons) {
            f << c.cheaper.strategy << ',' << c.costlier.strategy << ',' << c.icer_value << ',' << c.acer_cheaper
              << ',' << c.acer_costlier << ',' << c.preferred << '\n';
        }
    }
    auto summary = open("summary.txt");
    write_summary_text(summary, r);
}

} // namespace hpv

#endif // HPV_REPORT_HPP
