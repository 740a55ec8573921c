#ifndef HPV_CEA_HPP
#define HPV_CEA_HPP

// Cost and effectiveness functionals, ACER/ICER, and the elimination-based
// cost-effectiveness ranking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "hpv/error.hpp"
#include "hpv/integrator.hpp"
#include "hpv/model.hpp"

namespace hpv {

/// Relative costs. A1: cohort vaccination, A2: adult vaccination, A3:
/// screening; B1, B2: illness cost per person-year of unaware / aware
/// infection. The defaults keep A1 < A2 (school delivery is cheaper),
/// A3 ~ A1 and B1 >= B2 (unaware infections carry more cancer risk).
struct CostWeights {
    double A1 = 1.0;
    double A2 = 5.0;
    double A3 = 1.0;
    double B1 = 15.0;
    double B2 = 10.0;

    void validate() const
    {
        for (double v : {A1, A2, A3, B1, B2}) {
            if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("cost weights must be finite and >= 0");
        }
    }
};

struct OutcomeRecord {
    std::string strategy;
    double cost          = 0.0;
    double effectiveness = 0.0;
};

/// Cumulative infected female person-years averted relative to the baseline run.
inline double effectiveness(const Trajectory& intervention, const Trajectory& baseline)
{
    if (!(intervention.grid == baseline.grid) || intervention.states.size() != baseline.states.size()) {
        throw InvalidArgument("effectiveness: trajectories are on different grids");
    }
    return integrate_on_grid(intervention.grid, [&](std::size_t i) {
        const State& b = baseline.states[i];
        const State& s = intervention.states[i];
        return (b.U_f - s.U_f) + (b.I_f - s.I_f);
    });
}

/// Instantaneous cost rate: vaccination and screening counts plus illness.
/// Screening is billed on S_f + U_f even though only U_f changes status.
inline double cost_rate(const State& s, const ControlVector& c, const ModelParameters& q, const CostWeights& w)
{
    const double interventions = w.A1 * (c.w1 * q.mu_f + c.w2 * q.mu_m) + w.A2 * (c.u1 * s.S_f + c.u2 * s.S_m) +
                                 w.A3 * c.alpha * (s.U_f + s.S_f);
    return interventions + w.B1 * s.U_f + w.B2 * s.I_f;
}

inline double cost(const Trajectory& tr, const ControlSchedule& schedule, const ModelParameters& q,
                   const CostWeights& w)
{
    w.validate();
    if (!(schedule.grid == tr.grid) || schedule.values.size() != tr.states.size()) {
        throw InvalidArgument("cost: schedule and trajectory are on different grids");
    }
    return integrate_on_grid(tr.grid,
                             [&](std::size_t i) { return cost_rate(tr.states[i], schedule.values[i], q, w); });
}

inline double cost(const Trajectory& tr, const ControlVector& c, const ModelParameters& q, const CostWeights& w)
{
    w.validate();
    return integrate_on_grid(tr.grid, [&](std::size_t i) { return cost_rate(tr.states[i], c, q, w); });
}

inline double acer(const OutcomeRecord& r)
{
    if (r.effectiveness == 0.0) throw UndefinedRatio("ACER undefined for " + r.strategy + ": zero effectiveness");
    return r.cost / r.effectiveness;
}

/// Extra cost of `b` over `a` per extra unit of effectiveness. Symmetric in its arguments.
inline double icer(const OutcomeRecord& a, const OutcomeRecord& b)
{
    const double de = b.effectiveness - a.effectiveness;
    if (de == 0.0) {
        throw UndefinedRatio("ICER undefined for " + a.strategy + " vs " + b.strategy + ": equal effectiveness");
    }
    return (b.cost - a.cost) / de;
}

// ---------------------------------------------------------------------------
// Ranking

enum class EliminationRule {
    icer_non_positive,   ///< ICER(A,B) <= 0: B removed
    icer_at_least_acer,  ///< ICER(A,B) >= ACER(A): B removed
    icer_below_acer,     ///< 0 < ICER(A,B) < ACER(A): A removed
    equal_effectiveness, ///< ICER undefined: the costlier B removed
};

inline const char* to_string(EliminationRule r)
{
    switch (r) {
    case EliminationRule::icer_non_positive: return "ICER<=0";
    case EliminationRule::icer_at_least_acer: return "ICER>=ACER";
    case EliminationRule::icer_below_acer: return "0<ICER<ACER";
    case EliminationRule::equal_effectiveness: return "tie:equal-effectiveness";
    }
    return "?";
}

struct EliminationStep {
    std::size_t round = 0; ///< rank being decided
    std::string head;      ///< S_A, the cheaper of the compared pair
    std::string challenger;
    std::string removed;
    EliminationRule rule = EliminationRule::icer_non_positive;
    double icer_value    = std::numeric_limits<double>::quiet_NaN();
    double head_acer     = std::numeric_limits<double>::quiet_NaN();

    friend bool operator==(const EliminationStep& a, const EliminationStep& b)
    {
        auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
        return a.round == b.round && a.head == b.head && a.challenger == b.challenger && a.removed == b.removed &&
               a.rule == b.rule && same(a.icer_value, b.icer_value) && same(a.head_acer, b.head_acer);
    }
};

struct RankedOutcome {
    OutcomeRecord record;
    std::size_t rank = 0;
};

struct RankingReport {
    std::vector<RankedOutcome> entries; ///< in rank order
    std::vector<EliminationStep> log;

    std::size_t rank_of(const std::string& strategy) const
    {
        for (const auto& e : entries) {
            if (e.record.strategy == strategy) return e.rank;
        }
        throw InvalidArgument("strategy " + strategy + " not in ranking");
    }
};

namespace detail {
inline void sort_by_cost(std::vector<OutcomeRecord>& v)
{
    std::stable_sort(v.begin(), v.end(), [](const OutcomeRecord& a, const OutcomeRecord& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        return a.strategy < b.strategy;
    });
}
} // namespace detail

/// Runs the elimination loop once: sort by cost, compare the two cheapest,
/// drop one, repeat. Returns the index (in `records`) of the survivor.
inline std::size_t eliminate(const std::vector<OutcomeRecord>& records, std::size_t round,
                             std::vector<EliminationStep>* log = nullptr)
{
    if (records.empty()) throw InvalidArgument("cannot rank an empty list of strategies");
    std::vector<OutcomeRecord> list = records;
    detail::sort_by_cost(list);

    while (list.size() > 1) {
        const OutcomeRecord& a = list[0];
        const OutcomeRecord& b = list[1];
        EliminationStep step;
        step.round      = round;
        step.head       = a.strategy;
        step.challenger = b.strategy;
        bool remove_head = false;
        if (a.effectiveness == b.effectiveness) {
            step.rule = EliminationRule::equal_effectiveness;
        } else {
            step.icer_value = icer(a, b);
            step.head_acer  = acer(a);
            if (step.icer_value <= 0.0) {
                step.rule = EliminationRule::icer_non_positive;
            } else if (step.icer_value >= step.head_acer) {
                step.rule = EliminationRule::icer_at_least_acer;
            } else {
                step.rule   = EliminationRule::icer_below_acer;
                remove_head = true;
            }
        }
        step.removed = remove_head ? a.strategy : b.strategy;
        if (log) log->push_back(step);
        list.erase(list.begin() + (remove_head ? 0 : 1));
    }

    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].strategy == list.front().strategy) return i;
    }
    return 0; // unreachable
}

/// Full ranking: rank k+1 is the elimination winner among the strategies not
/// yet ranked.
inline RankingReport rank(std::vector<OutcomeRecord> records)
{
    if (records.empty()) throw InvalidArgument("cannot rank an empty list of strategies");
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = i + 1; j < records.size(); ++j) {
            if (records[i].strategy == records[j].strategy) {
                throw InvalidArgument("duplicate strategy id " + records[i].strategy);
            }
        }
    }
    RankingReport report;
    std::size_t next_rank = 1;
    while (!records.empty()) {
        const std::size_t w = eliminate(records, next_rank, &report.log);
        report.entries.push_back({records[w], next_rank++});
        records.erase(records.begin() + static_cast<std::ptrdiff_t>(w));
    }
    return report;
}

/// Rebuilds a report from the records and a decision log, without evaluating
/// any ratios. Throws if the log is inconsistent with the records.
inline RankingReport replay(const std::vector<OutcomeRecord>& records, const std::vector<EliminationStep>& log)
{
    std::vector<OutcomeRecord> pool = records;
    RankingReport report;
    report.log = log;
    std::size_t pos = 0;
    for (std::size_t round = 1; !pool.empty(); ++round) {
        std::vector<std::string> alive;
        for (const auto& r : pool) alive.push_back(r.strategy);
        while (alive.size() > 1) {
            if (pos >= log.size() || log[pos].round != round) throw InvalidArgument("elimination log too short");
            const auto it = std::find(alive.begin(), alive.end(), log[pos].removed);
            if (it == alive.end()) throw InvalidArgument("elimination log removes unknown strategy");
            alive.erase(it);
            ++pos;
        }
        const auto w = std::find_if(pool.begin(), pool.end(),
                                    [&](const OutcomeRecord& r) { return r.strategy == alive.front(); });
        report.entries.push_back({*w, round});
        pool.erase(w);
    }
    if (pos != log.size()) throw InvalidArgument("elimination log has trailing entries");
    return report;
}

/// Pairwise verdict: the elimination step applied to two strategies.
struct PairComparison {
    OutcomeRecord cheaper;
    OutcomeRecord costlier;
    double icer_value = 0.0; ///< ICER(cheaper, costlier)
    double acer_cheaper = 0.0;
    double acer_costlier = 0.0;
    EliminationRule rule = EliminationRule::icer_non_positive;
    std::string preferred;
};

inline PairComparison compare_pair(const OutcomeRecord& a, const OutcomeRecord& b)
{
    std::vector<EliminationStep> log;
    const std::vector<OutcomeRecord> pair = {a, b};
    const std::size_t w = eliminate(pair, 1, &log);
    PairComparison out;
    const bool a_cheaper = a.cost < b.cost || (a.cost == b.cost && a.strategy < b.strategy);
    out.cheaper          = a_cheaper ? a : b;
    out.costlier         = a_cheaper ? b : a;
    out.icer_value       = log.front().icer_value;
    out.acer_cheaper     = acer(out.cheaper);
    out.acer_costlier    = acer(out.costlier);
    out.rule             = log.front().rule;
    out.preferred        = pair[w].strategy;
    return out;
}

inline void write_ranking_csv(std::ostream& os, const RankingReport& report)
{
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    os << "strategy,cost,effectiveness,acer,rank\n";
    for (const auto& e : report.entries) {
        const double a = e.record.effectiveness != 0.0 ? acer(e.record) : std::numeric_limits<double>::quiet_NaN();
        os << e.record.strategy << ',' << e.record.cost << ',' << e.record.effectiveness << ',' << a << ','
           << e.rank << '\n';
    }
    os.precision(old_precision);
}

inline void write_elimination_log(std::ostream& os, const RankingReport& report)
{
    const auto flags = os.flags();
    const auto old_precision = os.precision(6);
    std::size_t round = 0;
    for (const auto& s : report.log) {
        if (s.round != round) {
            round = s.round;
            os << "rank " << round << ":\n";
        }
        os << "  " << s.head << " vs " << s.challenger << ": ";
        if (s.rule == EliminationRule::equal_effectiveness) {
            os << "equal effectiveness";
        } else {
            os << "ICER=" << s.icer_value << " ACER(" << s.head << ")=" << s.head_acer;
        }
        os << " [" << to_string(s.rule) << "] -> remove " << s.removed << '\n';
    }
    os << "result:";
    for (const auto& e : report.entries) os << ' ' << e.rank << '=' << e.record.strategy;
    os << '\n';
    os.precision(old_precision);
    os.flags(flags);
}

} // namespace hpv

#endif // HPV_CEA_HPP
