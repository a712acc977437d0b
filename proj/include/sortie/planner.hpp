#pragma once

// Centralized multi-aircraft planner. Produces the strike plan for the
// current planning model (shortest safe route to a fire standoff, fire
// actions, return leg) and simulates the model forward into the expected
// trajectory t_e. Pure functions of immutable inputs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "sortie/geometry.hpp"
#include "sortie/model.hpp"
#include "sortie/scenario.hpp"
#include "sortie/trajectory.hpp"

namespace sortie {

struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Cost map over the grid under the current beliefs. LETHAL cells are
// effectively forbidden: any believed weapon envelope, env zone or no-fly
// zone.
struct ThreatField {
    static constexpr double kLethal = 1e9;

    int rows = 0;
    int cols = 0;
    std::vector<double> cost; // row-major

    double at(Cell c) const { return cost[static_cast<std::size_t>(c.row) * cols + c.col]; }
    bool lethal(Cell c) const { return at(c) >= kLethal; }
};

inline ThreatField threat_field(const PlanningModel& m, const ScenarioConfig& cfg) {
    ThreatField field;
    field.rows = cfg.grid.rows;
    field.cols = cfg.grid.cols;
    field.cost.assign(static_cast<std::size_t>(field.rows) * field.cols, 1.0);

    auto mark = [&](Cell c) {
        field.cost[static_cast<std::size_t>(c.row) * field.cols + c.col] = ThreatField::kLethal;
    };

    for (const auto& [id, range] : m.weapon_range) {
        if (range <= 0) continue;
        auto hp = m.entity_hp.find(id);
        if (hp != m.entity_hp.end() && hp->second <= 0) continue; // believed destroyed
        const EntitySpec* e = cfg.find(id);
        if (!e) continue;
        for (int r = std::max(0, e->position.row - range);
             r <= std::min(cfg.grid.rows - 1, e->position.row + range); ++r)
            for (int c = std::max(0, e->position.col - range);
                 c <= std::min(cfg.grid.cols - 1, e->position.col + range); ++c)
                mark(Cell{r, c});
    }
    for (Cell c : m.env_zones)
        if (cfg.grid.contains(c)) mark(c);
    for (Cell c : m.no_fly_zones)
        if (cfg.grid.contains(c)) mark(c);
    return field;
}

// ---- deterministic shortest paths -------------------------------------------

// Single-source shortest paths over the threat field, 8-connected. Expansion
// and relaxation order are fixed so that tie-breaking is deterministic:
// the frontier pops by (cost, row, col) and equal-cost relaxations never
// re-parent.
struct ShortestPaths {
    std::vector<double> dist;
    std::vector<int> parent; // flat index of predecessor, -1 at source/unreached
    int rows = 0, cols = 0;

    double dist_at(Cell c) const { return dist[static_cast<std::size_t>(c.row) * cols + c.col]; }
    bool reached(Cell c) const {
        return dist_at(c) < std::numeric_limits<double>::infinity();
    }
    std::vector<Cell> path_to(Cell goal) const {
        std::vector<Cell> out;
        int idx = goal.row * cols + goal.col;
        while (idx >= 0 && parent[static_cast<std::size_t>(idx)] != idx) {
            out.push_back(Cell{idx / cols, idx % cols});
            idx = parent[static_cast<std::size_t>(idx)];
        }
        std::reverse(out.begin(), out.end());
        return out; // excludes the source cell
    }
};

inline ShortestPaths shortest_paths(const ThreatField& field, Cell source) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const int rows = field.rows, cols = field.cols;
    ShortestPaths sp;
    sp.rows = rows;
    sp.cols = cols;
    sp.dist.assign(static_cast<std::size_t>(rows) * cols, kInf);
    sp.parent.assign(static_cast<std::size_t>(rows) * cols, -1);

    const int src = source.row * cols + source.col;
    sp.dist[static_cast<std::size_t>(src)] = 0.0;
    sp.parent[static_cast<std::size_t>(src)] = src;

    using Item = std::tuple<double, int, int>; // cost, row, col
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> frontier;
    frontier.emplace(0.0, source.row, source.col);

    static constexpr Offset kNeighbors[] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                            {0, 1},   {1, -1}, {1, 0},  {1, 1}};
    std::vector<char> done(static_cast<std::size_t>(rows) * cols, 0);
    while (!frontier.empty()) {
        auto [cost, r, c] = frontier.top();
        frontier.pop();
        const int idx = r * cols + c;
        if (done[static_cast<std::size_t>(idx)]) continue;
        done[static_cast<std::size_t>(idx)] = 1;
        for (Offset o : kNeighbors) {
            const Cell next{r + o.drow, c + o.dcol};
            if (next.row < 0 || next.row >= rows || next.col < 0 || next.col >= cols) continue;
            if (field.lethal(next)) continue;
            const int nidx = next.row * cols + next.col;
            const double ncost = cost + field.at(next);
            if (ncost < sp.dist[static_cast<std::size_t>(nidx)]) {
                sp.dist[static_cast<std::size_t>(nidx)] = ncost;
                sp.parent[static_cast<std::size_t>(nidx)] = idx;
                frontier.emplace(ncost, next.row, next.col);
            }
        }
    }
    return sp;
}

// ---- plans -------------------------------------------------------------------

struct Plan {
    std::map<std::string, std::vector<Action>> per_agent;
    int makespan = 0;
    bool is_abort = false;
    std::vector<Cell> outbound_route; // cells after leaving base; last is the standoff
    Cell standoff;
    int fire_count = 0;
    std::vector<std::string> fire_order; // aircraft assigned to each fire, in step order

    auto operator<=>(const Plan&) const = default;
};

constexpr int kMissileDamage = 1;
constexpr int kMaxRouteSteps = 64;

// Builds the multi-aircraft plan for model m. Falls back to an abort plan --
// never throws -- when the collateral flag is set for the goal target or no
// safe standoff is reachable.
inline Plan plan(const PlanningModel& m, const ScenarioConfig& cfg) {
    const auto aircraft = cfg.aircraft_ids();
    if (aircraft.empty()) throw PlanError("scenario has no friendly aircraft");

    auto abort_plan = [&]() {
        Plan p;
        p.is_abort = true;
        p.makespan = 1;
        for (const auto& id : aircraft)
            p.per_agent[id] = {Action{id, ActionKind::Abort, {}, "", 0, 1}};
        return p;
    };

    auto no_fire = m.no_fire_near_target.find(cfg.goal.target_id);
    if (no_fire != m.no_fire_near_target.end() && no_fire->second) return abort_plan();

    auto believed_hp = m.entity_hp.find(cfg.goal.target_id);
    const int hp = believed_hp == m.entity_hp.end() ? 1 : believed_hp->second;
    if (hp <= 0) return abort_plan(); // believed already destroyed
    const int fires_needed = (hp + kMissileDamage - 1) / kMissileDamage;
    int missiles_total = 0;
    for (const auto& e : cfg.entities)
        if (e.kind == EntityKind::FriendlyAircraft) missiles_total += e.missiles;
    if (fires_needed > missiles_total) return abort_plan();

    const ThreatField field = threat_field(m, cfg);
    const Cell base = cfg.home_base().position;
    const Cell target = cfg.target().position;
    const ShortestPaths sp = shortest_paths(field, base);

    // candidate standoffs: non-lethal cells within missile range of the target
    Cell best{-1, -1};
    double best_dist = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.grid.rows; ++r) {
        for (int c = 0; c < cfg.grid.cols; ++c) {
            const Cell cell{r, c};
            if (chebyshev(cell, target) > m.friendly_missile_range) continue;
            if (field.lethal(cell) || !sp.reached(cell)) continue;
            const double d = sp.dist_at(cell);
            if (d < best_dist) {
                best_dist = d;
                best = cell;
            }
        }
    }
    if (best.row < 0) return abort_plan();

    const std::vector<Cell> route = sp.path_to(best);
    if (static_cast<int>(route.size()) > kMaxRouteSteps) return abort_plan();

    Plan p;
    p.outbound_route = route;
    p.standoff = best;
    p.fire_count = fires_needed;
    const int route_len = static_cast<int>(route.size());

    // schedule: moves at steps 1..L, fires one per step round-robin across
    // aircraft, reverse moves afterwards
    for (const auto& id : aircraft) {
        std::vector<Action>& actions = p.per_agent[id];
        for (int i = 0; i < route_len; ++i)
            actions.push_back(Action{id, ActionKind::Move, route[static_cast<std::size_t>(i)],
                                     "", i + 1, 1});
    }
    for (int j = 0; j < fires_needed; ++j) {
        const std::string& shooter = aircraft[static_cast<std::size_t>(j) % aircraft.size()];
        p.fire_order.push_back(shooter);
        p.per_agent[shooter].push_back(
            Action{shooter, ActionKind::Fire, {}, cfg.goal.target_id, route_len + 1 + j, 1});
    }
    const int return_start = route_len + fires_needed + 1;
    for (const auto& id : aircraft)
        p.per_agent[id].push_back(
            Action{id, ActionKind::ReturnToBase, base, "", return_start, route_len});
    p.makespan = 2 * route_len + fires_needed;
    return p;
}

// Position of an aircraft at a given plan step; base once the schedule is
// exhausted. Route cell i is occupied at step i (1-based).
inline Cell plan_position_at(const Plan& p, Cell base, int step) {
    if (p.is_abort) return base;
    const int route_len = static_cast<int>(p.outbound_route.size());
    if (step <= 0) return base;
    if (step <= route_len) return p.outbound_route[static_cast<std::size_t>(step - 1)];
    if (step <= route_len + p.fire_count) return p.standoff; // loiter during fires
    const int back = step - route_len - p.fire_count;        // 1..route_len
    if (back < route_len) return p.outbound_route[static_cast<std::size_t>(route_len - 1 - back)];
    return base;
}

// ---- expected trajectory -----------------------------------------------------

// Deterministic forward simulation of the plan under the model's beliefs.
// The default model predicts a clean mission; a stale plan evaluated under a
// repaired model may predict losses or zone displacement instead, which is
// exactly what the repair search compares against observations.
inline Trajectory expected_trajectory(const PlanningModel& m, const Plan& p,
                                      const ScenarioConfig& cfg) {
    const Cell base = cfg.home_base().position;
    const auto aircraft = cfg.aircraft_ids();
    for (const auto& [agent, actions] : p.per_agent) {
        if (!cfg.find(agent)) throw PlanError("plan references unknown agent '" + agent + "'");
        for (const auto& a : actions)
            if (a.kind == ActionKind::Fire && !cfg.find(a.fire_target))
                throw PlanError("plan fires at unknown entity '" + a.fire_target + "'");
    }

    struct State {
        Cell pos;
        bool alive = true;
        bool displaced = false;
        bool fired = false;
    };
    std::map<std::string, State> st;
    for (const auto& id : aircraft) st[id] = State{base};

    std::map<std::string, int> believed_hp = m.entity_hp;
    std::map<std::string, int> fires_delivered;

    Trajectory traj;
    auto emit = [&](int step, const std::string& id, ActionKind kind) {
        traj.steps.push_back(TrajStep{step, id, kind, st[id].pos, st[id].alive});
    };
    for (const auto& id : aircraft) emit(0, id, ActionKind::Wait);

    if (p.is_abort) {
        for (const auto& id : aircraft) emit(1, id, ActionKind::Abort);
    } else {
        // armed believed threats
        struct Threat {
            Cell pos;
            int range;
        };
        std::vector<Threat> threats;
        for (const auto& [id, range] : m.weapon_range) {
            if (range <= 0) continue;
            auto hp = believed_hp.find(id);
            if (hp != believed_hp.end() && hp->second <= 0) continue;
            if (const EntitySpec* e = cfg.find(id)) threats.push_back({e->position, range});
        }

        for (int step = 1; step <= p.makespan; ++step) {
            for (const auto& id : aircraft) {
                State& s = st[id];
                if (!s.alive || s.displaced) continue;
                const Cell prev = s.pos;
                const Cell next = plan_position_at(p, base, step);
                ActionKind kind = ActionKind::Wait;
                if (next != prev) {
                    kind = step <= static_cast<int>(p.outbound_route.size())
                               ? ActionKind::Move
                               : ActionKind::ReturnToBase;
                    s.pos = next;
                    if (m.env_zones.count(next) || m.no_fly_zones.count(next)) {
                        s.displaced = true;
                        emit(step, id, kind);
                        continue;
                    }
                    bool lethal = false;
                    for (const auto& t : threats)
                        if (chebyshev(next, t.pos) <= t.range) lethal = true;
                    if (lethal) {
                        s.alive = false;
                        emit(step, id, kind);
                        continue;
                    }
                }
                // fire scheduled for this aircraft at this step?
                if (auto acts = p.per_agent.find(id); acts != p.per_agent.end()) {
                    for (const auto& a : acts->second) {
                        if (a.kind == ActionKind::Fire && a.start_step == step) {
                            kind = ActionKind::Fire;
                            s.fired = true;
                            ++fires_delivered[a.fire_target];
                            auto hp = believed_hp.find(a.fire_target);
                            if (hp != believed_hp.end())
                                hp->second = std::max(0, hp->second - kMissileDamage);
                        }
                    }
                }
                emit(step, id, kind);
            }
        }
    }

    TerminalState& term = traj.terminal;
    bool any_displaced = false;
    for (const auto& id : aircraft) {
        const State& s = st.at(id);
        AgentTerminal at;
        at.alive = s.alive;
        at.displaced = s.displaced;
        at.position_known = !s.displaced;
        at.position = s.pos;
        at.fired = s.fired;
        term.agents[id] = at;
        if (s.displaced) any_displaced = true;
    }
    for (const auto& e : cfg.entities) {
        if (e.kind == EntityKind::FriendlyAircraft || e.kind == EntityKind::HomeBase ||
            e.kind == EntityKind::SurveillanceDrone)
            continue;
        bool alive = true;
        auto hp = believed_hp.find(e.id);
        if (hp != believed_hp.end()) alive = hp->second > 0;
        term.entity_alive[e.id] = alive;
    }
    term.fires_delivered = fires_delivered;
    term.mission_aborted = p.is_abort || any_displaced;
    // report expected only when the model believes a no-fire entity sits next
    // to a target that actually got struck
    auto flag = m.no_fire_near_target.find(cfg.goal.target_id);
    term.report_no_fire_destroyed = flag != m.no_fire_near_target.end() && flag->second &&
                                    fires_delivered.count(cfg.goal.target_id) > 0;
    return traj;
}

// ---- plan serialization ------------------------------------------------------

// Line format: `step agent action args`.
inline std::string serialize_plan(const Plan& p) {
    std::vector<std::pair<int, std::string>> lines;
    for (const auto& [agent, actions] : p.per_agent) {
        for (const auto& a : actions) {
            std::string s = std::to_string(a.start_step) + " " + agent + " ";
            switch (a.kind) {
                case ActionKind::Move:
                    s += "move " + std::to_string(a.move_to.row) + " " +
                         std::to_string(a.move_to.col);
                    break;
                case ActionKind::Fire: s += "fire " + a.fire_target; break;
                case ActionKind::ReturnToBase: s += "return_to_base"; break;
                case ActionKind::Abort: s += "abort"; break;
                case ActionKind::Wait: s += "wait"; break;
            }
            lines.emplace_back(a.start_step, s);
        }
    }
    std::stable_sort(lines.begin(), lines.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    for (const auto& [step, s] : lines) {
        out += s;
        out += '\n';
    }
    return out;
}

} // namespace sortie
