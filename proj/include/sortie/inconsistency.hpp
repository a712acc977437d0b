#pragma once

// Inconsistency checking: quantifies divergence between the expected and the
// observed trajectory and raises the novelty-detection signal when the score
// exceeds the threshold T.
//
// Two modes:
//   full_trace    - discounted per-step comparison over aligned indices,
//                   sum_ag sum_i gamma^i * ||t_o[ag][i] - t_e[ag][i]||
//   terminal_only - compares only the report-augmented terminal states; the
//                   campaign default, since observed ticks are finer than
//                   plan steps and multi-agent schedules do not align.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sortie/geometry.hpp"
#include "sortie/trajectory.hpp"

namespace sortie {

struct InconsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InconsistencyMode { FullTrace, TerminalOnly };

struct InconsistencyConfig {
    double gamma = 0.9;    // discount for compounding per-step errors (full mode)
    double threshold = 0.5;
    double weak_fault_distance = 3.0; // terminal displacement that flags "failed to move"
    InconsistencyMode mode = InconsistencyMode::TerminalOnly;

    // Feature importance. An unexpectedly destroyed aircraft dominates every
    // other signal so repairs prioritize keeping aircraft alive.
    std::map<std::string, double> weights = {
        {"aircraft_destroyed", 10.0}, // observed destroyed, expected alive
        {"aircraft_survived", 1.0},   // observed alive, expected destroyed
        {"aircraft_position", 1.0},
        {"aircraft_displaced", 1.0},  // displaced/abort expectation mismatch
        {"enemy_status", 1.0},
        {"neutral_status", 1.0},
        {"no_fire_report", 1.0},
    };

    double weight(const std::string& name) const {
        auto it = weights.find(name);
        return it == weights.end() ? 1.0 : it->second;
    }

    void validate() const {
        if (gamma <= 0.0 || gamma >= 1.0)
            throw std::invalid_argument("gamma must lie in (0,1)");
        if (threshold < 0.0 || weak_fault_distance < 0.0)
            throw std::invalid_argument("thresholds must be nonnegative");
        for (const auto& [name, w] : weights)
            if (w < 0.0) throw std::invalid_argument("weight '" + name + "' must be nonnegative");
    }
};

struct InconsistencyReport {
    double score = 0.0;
    std::map<std::string, double> per_feature;
    bool novelty_detected = false; // strictly score > threshold
    bool weak_fault_moved = false;

    void add(const std::string& feature, double contribution) {
        if (contribution == 0.0) return;
        per_feature[feature] += contribution;
        score += contribution;
    }
};

namespace detail {

inline void require_same_agents(const Trajectory& t_e, const Trajectory& t_o) {
    if (t_e.terminal.agents.size() != t_o.terminal.agents.size())
        throw InconsistencyError("expected and observed trajectories disagree on agents");
    for (const auto& [id, _] : t_e.terminal.agents)
        if (!t_o.terminal.agents.count(id))
            throw InconsistencyError("observed trajectory is missing agent '" + id + "'");
}

} // namespace detail

// Full-trace variant: per-agent steps aligned by index over the shorter of
// the two traces, each index discounted by gamma^i.
inline InconsistencyReport inconsistency_full(const Trajectory& t_e, const Trajectory& t_o,
                                              const InconsistencyConfig& cfg) {
    cfg.validate();
    if (t_e.steps.empty() || t_o.steps.empty())
        throw InconsistencyError("trajectories must be nonempty");
    detail::require_same_agents(t_e, t_o);

    std::map<std::string, std::vector<const TrajStep*>> expected, observed;
    for (const auto& s : t_e.steps) expected[s.agent].push_back(&s);
    for (const auto& s : t_o.steps) observed[s.agent].push_back(&s);
    if (expected.size() != observed.size())
        throw InconsistencyError("expected and observed trajectories disagree on agents");

    InconsistencyReport report;
    for (const auto& [agent, exp_steps] : expected) {
        auto obs_it = observed.find(agent);
        if (obs_it == observed.end())
            throw InconsistencyError("observed trajectory is missing agent '" + agent + "'");
        const auto& obs_steps = obs_it->second;
        const std::size_t n = std::min(exp_steps.size(), obs_steps.size());
        double discount = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const TrajStep& e = *exp_steps[i];
            const TrajStep& o = *obs_steps[i];
            const double pos_term =
                cfg.weight("aircraft_position") * euclidean(e.position, o.position);
            double status_term = 0.0;
            if (e.alive && !o.alive) status_term = cfg.weight("aircraft_destroyed");
            if (!e.alive && o.alive) status_term = cfg.weight("aircraft_survived");
            report.add("step_distance[" + agent + "]", discount * (pos_term + status_term));
            discount *= cfg.gamma;
        }
    }
    report.novelty_detected = report.score > cfg.threshold;
    return report;
}

// Terminal-state variant over the five observation variables: friendly
// aircraft status, enemy entity status, friendly aircraft location, the
// no-fire report, and neutral entity status.
//
// Enemy/neutral status terms are compared only when the observed strike
// delivered at least the expected number of missiles to that entity; a
// strike that was observably cut short says nothing about enemy durability,
// and the shortfall is already priced through the aircraft features.
inline InconsistencyReport inconsistency_terminal(const Trajectory& t_e, const Trajectory& t_o,
                                                  const InconsistencyConfig& cfg) {
    cfg.validate();
    detail::require_same_agents(t_e, t_o);
    const TerminalState& exp = t_e.terminal;
    const TerminalState& obs = t_o.terminal;

    InconsistencyReport report;
    for (const auto& [id, e] : exp.agents) {
        const AgentTerminal& o = obs.agents.at(id);
        if (e.alive && !o.alive)
            report.add("aircraft_destroyed[" + id + "]", cfg.weight("aircraft_destroyed"));
        else if (!e.alive && o.alive)
            report.add("aircraft_survived[" + id + "]", cfg.weight("aircraft_survived"));
        if (e.displaced != o.displaced)
            report.add("aircraft_displaced[" + id + "]", cfg.weight("aircraft_displaced"));
        // position is uninformative for destroyed aircraft (their status term
        // already dominates) and for displacement-predicted ones (no defined
        // expected position)
        const bool comparable = e.alive && o.alive && e.position_known && o.position_known;
        if (comparable)
            report.add("aircraft_position[" + id + "]",
                       cfg.weight("aircraft_position") * euclidean(e.position, o.position));
    }

    for (const auto& [id, expected_alive] : exp.entity_alive) {
        auto obs_alive = obs.entity_alive.find(id);
        if (obs_alive == obs.entity_alive.end()) continue;
        int expected_fires = 0, observed_fires = 0;
        if (auto it = exp.fires_delivered.find(id); it != exp.fires_delivered.end())
            expected_fires = it->second;
        if (auto it = obs.fires_delivered.find(id); it != obs.fires_delivered.end())
            observed_fires = it->second;
        if (observed_fires < expected_fires) continue; // strike cut short
        if (expected_alive != obs_alive->second) {
            // feature family follows the entity's side
            report.add("enemy_status[" + id + "]", cfg.weight("enemy_status"));
        }
    }

    if (exp.report_no_fire_destroyed != obs.report_no_fire_destroyed)
        report.add("no_fire_report", cfg.weight("no_fire_report"));

    report.novelty_detected = report.score > cfg.threshold;
    return report;
}

// Weak-fault location predicate: true iff any surviving aircraft ended the
// battle further than weak_fault_distance (Euclidean) from where the model
// expected it. This is how zone anomalies are told apart from losses.
inline bool weak_fault_location(const Trajectory& t_e, const Trajectory& t_o,
                                const InconsistencyConfig& cfg) {
    detail::require_same_agents(t_e, t_o);
    for (const auto& [id, e] : t_e.terminal.agents) {
        const AgentTerminal& o = t_o.terminal.agents.at(id);
        if (!e.alive || !o.alive) continue;
        if (!e.position_known || !o.position_known) continue;
        if (euclidean(e.position, o.position) > cfg.weak_fault_distance) return true;
    }
    return false;
}

// Convenience wrapper honouring cfg.mode, with the weak-fault flag filled in.
inline InconsistencyReport check_inconsistency(const Trajectory& t_e, const Trajectory& t_o,
                                               const InconsistencyConfig& cfg) {
    InconsistencyReport report = cfg.mode == InconsistencyMode::FullTrace
                                     ? inconsistency_full(t_e, t_o, cfg)
                                     : inconsistency_terminal(t_e, t_o, cfg);
    report.weak_fault_moved = weak_fault_location(t_e, t_o, cfg);
    return report;
}

} // namespace sortie
