// hpvcea: simulate the two-sex HPV model, compute reproduction numbers,
// calibrate rates, rank strategies and solve the optimal control problem.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hpv/report.hpp"
#include "hpv/scenario.hpp"

#ifndef HPV_BUNDLED_CONFIG_DIR
#define HPV_BUNDLED_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;

namespace {

/// A path, or the name of a bundled config ("table3" -> configs/table3.ini).
fs::path resolve_config(const std::string& arg)
{
    if (fs::exists(arg)) return arg;
    for (const auto& dir : {fs::path("configs"), fs::path(HPV_BUNDLED_CONFIG_DIR)}) {
        for (const auto& candidate : {dir / arg, dir / (arg + ".ini")}) {
            if (fs::exists(candidate)) return candidate;
        }
    }
    throw hpv::InvalidArgument("config '" + arg + "' is neither a file nor a bundled config name");
}

hpv::ScenarioConfig load(const std::string& arg)
{
    auto cfg = hpv::load_scenario_config(resolve_config(arg));
    for (const auto& w : cfg.model.range_warnings()) std::cerr << "warning: " << w << '\n';
    return cfg;
}

/// Writes to `path`, or to stdout when the path is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& fn)
{
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream f(path);
    if (!f) throw hpv::InvalidArgument("cannot write " + path);
    fn(f);
}

hpv::ControlVector parse_controls(const std::string& text)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw hpv::InvalidArgument("--controls: '" + item + "' is not a number");
        }
    }
    if (v.size() != hpv::kNumControls) throw hpv::InvalidArgument("--controls needs five values w1,w2,u1,u2,alpha");
    return {v[0], v[1], v[2], v[3], v[4]};
}

hpv::ControlVector parse_fixed(const std::string& text)
{
    hpv::ControlVector c;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw hpv::InvalidArgument("--fixed entries must look like u2=0.05");
        c[hpv::control_from_name(item.substr(0, eq))] = std::stod(item.substr(eq + 1));
    }
    return c;
}

/// The strategy spec for `name` from the config, or a bare mask when the config has none.
hpv::StrategySpec find_or_mask(const hpv::ScenarioConfig& cfg, const std::string& name)
{
    for (const auto& s : cfg.strategies) {
        if (s.name == name) return s;
    }
    hpv::StrategySpec s;
    s.name = name;
    s.mask = hpv::strategy_mask(name);
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-sex HPV model: simulation, reproduction numbers, cost-effectiveness and optimal control"};
    app.require_subcommand(1);

    std::string config;
    std::string output;

    auto* simulate = app.add_subcommand("simulate", "Write a trajectory CSV (baseline when no strategy is given)");
    std::string strategy;
    simulate->add_option("--config", config, "Config file or bundled name")->required();
    simulate->add_option("--strategy", strategy, "Strategy name; a trailing * solves the time-dependent version");
    simulate->add_option("-o,--output", output, "Output CSV (default stdout)");

    auto* reproduction = app.add_subcommand("reproduction", "Effective reproduction number and DFE stability");
    std::string controls_text;
    reproduction->add_option("--config", config, "Config file or bundled name")->required();
    reproduction->add_option("--controls", controls_text, "w1,w2,u1,u2,alpha")->required();

    auto* calibrate = app.add_subcommand("calibrate", "Solve for a rate giving a target R_e");
    std::string mask_id, free_text, fixed_text;
    double target = 0.9;
    calibrate->add_option("--config", config, "Config file or bundled name")->required();
    calibrate->add_option("--mask", mask_id, "Strategy mask S1..S8")->required();
    calibrate->add_option("--target", target, "Target R_e")->required();
    calibrate->add_option("--free", free_text, "Free control(s), e.g. u1 or w1+w2 (default: config, else all active tied)");
    calibrate->add_option("--fixed", fixed_text, "Fixed rates, e.g. u2=0.05 (default: config)");

    auto* rank_cmd = app.add_subcommand("rank", "Rank one family of strategies by cost-effectiveness");
    std::string family = "constant";
    std::string log_path;
    rank_cmd->add_option("--config", config, "Config file or bundled name")->required();
    rank_cmd->add_option("--family", family, "constant or optimal")
        ->check(CLI::IsMember({"constant", "optimal"}));
    rank_cmd->add_option("-o,--output", output, "Ranking CSV (default stdout)");
    rank_cmd->add_option("--log", log_path, "Elimination log (default stderr)");

    auto* optimize = app.add_subcommand("optimize", "Solve the time-dependent strategy for one mask");
    std::string summary_path;
    optimize->add_option("--config", config, "Config file or bundled name")->required();
    optimize->add_option("--mask", mask_id, "Strategy S1..S8 (or a strategy name from the config)")->required();
    optimize->add_option("-o,--output", output, "Trajectory+controls CSV (default stdout)");
    optimize->add_option("--summary", summary_path, "JSON run summary (default stderr)");

    auto* compare = app.add_subcommand("compare", "Pairwise ICER/ACER comparisons");
    std::string pairs_text;
    compare->add_option("--config", config, "Config file or bundled name")->required();
    compare->add_option("--pairs", pairs_text, "A:B,... (S4* denotes the time-dependent S4)")->required();

    auto* run = app.add_subcommand("run", "Run the whole scenario and write every output");
    std::string out_dir = "out";
    run->add_option("--config", config, "Config file or bundled name")->required();
    run->add_option("--out-dir", out_dir, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            const auto cfg      = load(config);
            const auto baseline = hpv::run_baseline(cfg);
            if (strategy.empty()) {
                emit(output, [&](std::ostream& os) { hpv::write_trajectory_csv(os, baseline); });
            } else {
                const bool optimal = strategy.back() == '*';
                const auto spec    = find_or_mask(cfg, optimal ? strategy.substr(0, strategy.size() - 1) : strategy);
                const auto r       = optimal ? hpv::run_optimal(cfg, spec, baseline) : hpv::run_constant(cfg, spec, baseline);
                emit(output, [&](std::ostream& os) { hpv::write_trajectory_csv(os, r.trajectory, &r.schedule); });
                std::cerr << r.id << ": cost=" << r.outcome.cost << " effectiveness=" << r.outcome.effectiveness << '\n';
            }
        } else if (*reproduction) {
            const auto cfg = load(config);
            const auto c   = parse_controls(controls_text);
            c.validate();
            const auto r   = hpv::effective_R(c, cfg.model);
            const auto dfe = hpv::compute_dfe(c, cfg.model);
            std::cout << std::setprecision(10) << "R_e   = " << r.R_e << "\nT_m_f = " << r.T_m_f
                      << "\nT_f_m = " << r.T_f_m << "\nDFE   = S_f " << dfe.S_f << ", V_f " << dfe.V_f << ", S_m "
                      << dfe.S_m << ", V_m " << dfe.V_m << "\nDFE is "
                      << hpv::to_string(hpv::classify_dfe(c, cfg.model)) << '\n';
        } else if (*calibrate) {
            const auto cfg       = load(config);
            const auto& mask     = hpv::strategy_mask(mask_id);
            const auto* request  = cfg.calibration(mask_id);
            hpv::ControlVector fixed = request ? request->fixed : hpv::ControlVector{};
            hpv::FreeControls free;
            if (!free_text.empty()) {
                free = hpv::FreeControls::parse(free_text);
            } else if (request) {
                free = request->free;
            } else {
                free.tied = mask.active_controls();
            }
            if (!fixed_text.empty()) fixed = parse_fixed(fixed_text);
            const auto c = hpv::calibrate_rate(mask, fixed, free, target, cfg.model);
            std::cout << std::setprecision(8);
            for (auto k : hpv::kAllControls) std::cout << hpv::control_name(k) << " = " << c[k] << '\n';
            std::cout << "R_e = " << hpv::effective_R(c, cfg.model).R_e << '\n';
        } else if (*rank_cmd) {
            auto cfg = load(config);
            for (auto& s : cfg.strategies) {
                s.constant = family == "constant" && s.constant;
                s.optimize = family == "optimal" && s.optimize;
            }
            cfg.comparisons.clear();
            const auto report = hpv::run_scenario(cfg);
            const auto& ranking = family == "constant" ? report.constant_ranking : report.optimal_ranking;
            if (!ranking) throw hpv::InvalidArgument("config has no " + family + " strategies");
            emit(output, [&](std::ostream& os) { hpv::write_ranking_csv(os, *ranking); });
            if (log_path.empty()) {
                hpv::write_elimination_log(std::cerr, *ranking);
            } else {
                emit(log_path, [&](std::ostream& os) { hpv::write_elimination_log(os, *ranking); });
            }
        } else if (*optimize) {
            const auto cfg      = load(config);
            const auto baseline = hpv::run_baseline(cfg);
            const auto r        = hpv::run_optimal(cfg, find_or_mask(cfg, mask_id), baseline);
            emit(output, [&](std::ostream& os) { hpv::write_trajectory_csv(os, r.trajectory, &r.schedule); });
            const auto js = hpv::run_summary_json(r).dump(2);
            if (summary_path.empty()) {
                std::cerr << js << '\n';
            } else {
                emit(summary_path, [&](std::ostream& os) { os << js << '\n'; });
            }
            if (!r.optimization->converged) return 3;
        } else if (*compare) {
            auto cfg        = load(config);
            cfg.comparisons = hpv::parse_pairs(pairs_text);
            std::set<std::string> wanted;
            for (const auto& [a, b] : cfg.comparisons) wanted.insert({a, b});
            for (auto& s : cfg.strategies) {
                s.constant = s.constant && wanted.count(s.name);
                s.optimize = s.optimize && wanted.count(s.name + "*");
            }
            const auto report = hpv::run_scenario(cfg);
            std::cout << std::fixed << std::setprecision(4);
            for (const auto& c : report.comparisons) {
                std::cout << "ICER(" << c.cheaper.strategy << ", " << c.costlier.strategy << ") = " << c.icer_value
                          << "  ACER(" << c.cheaper.strategy << ") = " << c.acer_cheaper << "  ACER("
                          << c.costlier.strategy << ") = " << c.acer_costlier << "  -> " << c.preferred
                          << " is more cost-effective [" << hpv::to_string(c.rule) << "]\n";
            }
        } else if (*run) {
            const auto cfg    = load(config);
            const auto report = hpv::run_scenario(cfg);
            hpv::write_scenario_outputs(report, out_dir);
            hpv::write_summary_text(std::cout, report);
        }
    } catch (const hpv::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
