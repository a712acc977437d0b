#pragma once

// Ground-truth environment: executes plans under the true (possibly
// novelty-shifted) dynamics with seeded stochasticity, producing observed
// trajectories and post-battle reports. All failures are in-world outcomes,
// never exceptions.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sortie/geometry.hpp"
#include "sortie/model.hpp"
#include "sortie/planner.hpp"
#include "sortie/rng.hpp"
#include "sortie/scenario.hpp"
#include "sortie/trajectory.hpp"

namespace sortie {

struct SimulatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Environment {
    std::map<std::string, int> true_weapon_range;
    std::map<std::string, int> true_hp;
    std::map<std::string, Cell> entity_pos; // true positions (object novelty relocates)
    std::set<Cell> true_env_zones;
    std::set<Cell> patrol_region;       // goal novelty: lethal, no dodge
    std::set<Cell> interceptor_region;  // event novelty: lethal, no dodge
    double dodge_probability = 0.5;
    // Zone displacement lands at least this far (Euclidean) from the home
    // base so the weak-fault predicate can always fire.
    double displacement_min_distance = 4.0;

    auto operator<=>(const Environment&) const = default;
};

inline Environment environment_from_scenario(const ScenarioConfig& cfg) {
    Environment env;
    for (const auto& e : cfg.entities) {
        env.entity_pos[e.id] = e.position;
        if (is_enemy(e.kind) || is_neutral_side(e.kind)) {
            env.true_hp[e.id] = e.hp;
            if (e.weapon_range > 0 && is_enemy(e.kind)) env.true_weapon_range[e.id] = e.weapon_range;
        }
    }
    return env;
}

// ---- novelty ----------------------------------------------------------------

enum class NoveltyClass { Object, Agent, Relation, Environment, Goal, Event };

inline const char* to_string(NoveltyClass c) {
    switch (c) {
        case NoveltyClass::Object: return "object";
        case NoveltyClass::Agent: return "agent";
        case NoveltyClass::Relation: return "relation";
        case NoveltyClass::Environment: return "environment";
        case NoveltyClass::Goal: return "goal";
        case NoveltyClass::Event: return "event";
    }
    return "?";
}

inline std::optional<NoveltyClass> novelty_class_from_string(std::string_view s) {
    static const std::pair<const char*, NoveltyClass> table[] = {
        {"object", NoveltyClass::Object},     {"agent", NoveltyClass::Agent},
        {"relation", NoveltyClass::Relation}, {"environment", NoveltyClass::Environment},
        {"goal", NoveltyClass::Goal},         {"event", NoveltyClass::Event},
    };
    for (const auto& [name, cls] : table)
        if (s == name) return cls;
    return std::nullopt;
}

struct NoveltyParams {
    std::string entity;        // which SAM / target / no-fire entity
    std::optional<Cell> seed;  // environment: zone seed cell
    std::vector<Cell> cells;   // goal/event: explicit region override
};

struct NoveltySpec {
    NoveltyClass cls = NoveltyClass::Agent;
    double strength = 1.0;
    NoveltyParams params;
};

// Effect magnitude in the class's natural unit, clamped to at least 1.
inline int novelty_effect(double strength) {
    return std::max(1, static_cast<int>(std::lround(strength)));
}

namespace detail {

inline std::string first_entity_of_kind(const ScenarioConfig& cfg, EntityKind kind) {
    std::string best;
    for (const auto& e : cfg.entities)
        if (e.kind == kind && (best.empty() || e.id < best)) best = e.id;
    return best;
}

// Contiguous zone grown breadth-first from the seed, fixed neighbor order.
inline std::set<Cell> grow_zone(const ScenarioConfig& cfg, Cell seed, int size, Cell home) {
    static constexpr Offset kGrowth[] = {{0, -1}, {0, 1},  {-1, 0}, {1, 0},
                                         {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
    std::set<Cell> zone;
    std::vector<Cell> frontier{seed};
    std::size_t next = 0;
    while (static_cast<int>(zone.size()) < size && next < frontier.size()) {
        const Cell cur = frontier[next++];
        if (!cfg.grid.contains(cur) || cur == home || zone.count(cur)) continue;
        zone.insert(cur);
        for (Offset o : kGrowth) frontier.push_back(cur + o);
    }
    return zone;
}

// Route cells sitting exactly one cell outside the primary SAM's true reach;
// the region goal/event novelties occupy.
inline std::vector<Cell> ring_route_cells(const ScenarioConfig& cfg, const Environment& env,
                                          const std::vector<Cell>& route) {
    const std::string sam = first_entity_of_kind(cfg, EntityKind::Sam);
    if (sam.empty()) return route;
    const Cell sam_pos = env.entity_pos.at(sam);
    const int ring = env.true_weapon_range.at(sam) + 1;
    std::vector<Cell> out;
    for (Cell c : route)
        if (chebyshev(c, sam_pos) == ring) out.push_back(c);
    if (out.empty()) out = route;
    return out;
}

} // namespace detail

// Applies one novelty to a nominal environment. Route-correlated classes
// (environment/goal/event) anchor their region to the route the default
// model would fly, unless params pin it explicitly.
inline Environment inject_novelty(const Environment& env, const NoveltySpec& spec,
                                  const ScenarioConfig& cfg) {
    Environment out = env;
    const Cell home = cfg.home_base().position;
    const int effect = novelty_effect(spec.strength);

    auto nominal_route = [&]() {
        const Plan p = plan(model_from_scenario(cfg), cfg);
        if (p.is_abort || p.outbound_route.empty())
            throw SimulatorError("cannot anchor novelty: no nominal route");
        return p.outbound_route;
    };

    switch (spec.cls) {
        case NoveltyClass::Object: {
            std::string id = spec.params.entity;
            if (id.empty()) id = detail::first_entity_of_kind(cfg, EntityKind::NoFireEntity);
            if (id.empty() || !env.entity_pos.count(id))
                throw SimulatorError("object novelty needs a no-fire entity");
            const Cell target = env.entity_pos.at(cfg.goal.target_id);
            std::optional<Cell> dest;
            for (int dr = -cfg.goal.collateral_distance;
                 !dest && dr <= cfg.goal.collateral_distance; ++dr) {
                for (int dc = -cfg.goal.collateral_distance;
                     !dest && dc <= cfg.goal.collateral_distance; ++dc) {
                    const Cell c = target + Offset{dr, dc};
                    if (!cfg.grid.contains(c) || c == target || c == home) continue;
                    bool occupied = false;
                    for (const auto& [eid, pos] : env.entity_pos)
                        if (pos == c) occupied = true;
                    if (!occupied) dest = c;
                }
            }
            if (!dest) throw SimulatorError("object novelty found no cell near the target");
            out.entity_pos[id] = *dest;
            break;
        }
        case NoveltyClass::Agent: {
            std::string id = spec.params.entity;
            if (id.empty()) id = detail::first_entity_of_kind(cfg, EntityKind::Sam);
            if (id.empty() || !out.true_weapon_range.count(id))
                throw SimulatorError("agent novelty needs an armed enemy");
            out.true_weapon_range[id] += effect;
            break;
        }
        case NoveltyClass::Relation: {
            std::string id = spec.params.entity.empty() ? cfg.goal.target_id : spec.params.entity;
            if (!out.true_hp.count(id))
                throw SimulatorError("relation novelty: unknown entity '" + id + "'");
            out.true_hp[id] += effect;
            break;
        }
        case NoveltyClass::Environment: {
            Cell seed;
            if (spec.params.seed) {
                seed = *spec.params.seed;
            } else {
                const auto route = nominal_route();
                seed = route[std::min<std::size_t>(2, route.size() - 1)]; // 3rd route cell
            }
            if (seed == home)
                throw SimulatorError("environment zone may not cover the home base");
            const auto zone = detail::grow_zone(cfg, seed, effect, home);
            if (zone.empty())
                throw SimulatorError("environment zone could not be placed");
            out.true_env_zones.insert(zone.begin(), zone.end());
            break;
        }
        case NoveltyClass::Goal:
        case NoveltyClass::Event: {
            std::vector<Cell> cells = spec.params.cells;
            if (cells.empty()) {
                const auto ring = detail::ring_route_cells(cfg, env, nominal_route());
                const int k = std::min<int>(effect, static_cast<int>(ring.size()));
                if (spec.cls == NoveltyClass::Goal) {
                    cells.assign(ring.begin(), ring.begin() + k);
                } else {
                    cells.assign(ring.end() - k, ring.end());
                }
            }
            auto& region = spec.cls == NoveltyClass::Goal ? out.patrol_region
                                                          : out.interceptor_region;
            for (Cell c : cells) {
                if (!cfg.grid.contains(c))
                    throw SimulatorError("novelty region cell outside the grid");
                region.insert(c);
            }
            break;
        }
    }
    return out;
}

// Deterministic Gaussian-strength novelty sampler.
struct GaussianParams {
    double mean = 1.5;
    double stddev = 0.5;
};

inline NoveltySpec sample_novelty(const std::map<NoveltyClass, double>& class_weights,
                                  const std::map<NoveltyClass, GaussianParams>& gaussian_params,
                                  std::uint64_t rng_seed) {
    double total = 0.0;
    for (const auto& [cls, w] : class_weights) {
        if (w < 0.0) throw SimulatorError("novelty class weights must be nonnegative");
        total += w;
    }
    if (total <= 0.0) throw SimulatorError("novelty class weights are all zero");

    Rng rng(rng_seed);
    std::uniform_real_distribution<double> uniform(0.0, total);
    double pick = uniform(rng);
    NoveltyClass cls = class_weights.begin()->first;
    for (const auto& [c, w] : class_weights) {
        if (pick < w) {
            cls = c;
            break;
        }
        pick -= w;
    }
    GaussianParams gp;
    if (auto it = gaussian_params.find(cls); it != gaussian_params.end()) gp = it->second;
    std::normal_distribution<double> gauss(gp.mean, gp.stddev);

    NoveltySpec spec;
    spec.cls = cls;
    spec.strength = gauss(rng);
    return spec;
}

// ---- battle execution --------------------------------------------------------

struct BattleOutcome {
    Trajectory observed;
    std::set<std::string> reports;
    bool win = false;
    int losses = 0;
    bool aborted = false;
    std::vector<std::string> events; // replayable `tick agent event args` lines
};

constexpr int kTicksPerStep = 2;

// Executes a plan against the true environment. Pure function of
// (env, plan, cfg, rng_seed).
inline BattleOutcome execute(const Environment& env, const Plan& p, const ScenarioConfig& cfg,
                             std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const Cell base = cfg.home_base().position;
    const auto aircraft = cfg.aircraft_ids();

    struct State {
        Cell pos;
        bool alive = true;
        bool displaced = false;
        bool fired = false;
    };
    std::map<std::string, State> st;
    for (const auto& id : aircraft) st[id] = State{base};

    std::map<std::string, int> hp = env.true_hp;
    std::map<std::string, int> fires_delivered;

    BattleOutcome out;
    auto event = [&](int tick, const std::string& agent, const std::string& what) {
        out.events.push_back(std::to_string(tick) + " " + (agent.empty() ? "-" : agent) + " " +
                             what);
    };
    auto emit = [&](int tick, const std::string& id, ActionKind kind) {
        const State& s = st[id];
        out.observed.steps.push_back(TrajStep{tick, id, kind, s.pos, s.alive});
        event(tick, id,
              std::string("pos ") + std::to_string(s.pos.row) + " " + std::to_string(s.pos.col));
    };

    // true armed threats, deterministic order
    struct Threat {
        std::string id;
        Cell pos;
        int range;
    };
    std::vector<Threat> threats;
    for (const auto& [id, range] : env.true_weapon_range) {
        if (range <= 0) continue;
        auto it = hp.find(id);
        if (it != hp.end() && it->second <= 0) continue;
        threats.push_back({id, env.entity_pos.at(id), range});
    }

    // hazard-free displacement target; resampled deterministically from rng
    auto sample_displacement = [&]() {
        std::uniform_int_distribution<int> row_dist(0, cfg.grid.rows - 1);
        std::uniform_int_distribution<int> col_dist(0, cfg.grid.cols - 1);
        for (int attempt = 0; attempt < 4096; ++attempt) {
            const Cell c{row_dist(rng), col_dist(rng)};
            if (c == base) continue;
            if (euclidean(c, base) < env.displacement_min_distance) continue;
            if (env.true_env_zones.count(c) || env.patrol_region.count(c) ||
                env.interceptor_region.count(c))
                continue;
            bool in_envelope = false;
            for (const auto& t : threats)
                if (chebyshev(c, t.pos) <= t.range) in_envelope = true;
            if (in_envelope) continue;
            return c;
        }
        return Cell{0, cfg.grid.cols - 1}; // degenerate grids only
    };

    for (const auto& id : aircraft) emit(0, id, ActionKind::Wait);

    bool report_no_fire = false;
    const int makespan = p.is_abort ? 1 : p.makespan;
    for (int step = 1; step <= makespan; ++step) {
        const int tick = kTicksPerStep * step - 1;
        for (const auto& id : aircraft) {
            State& s = st[id];
            if (!s.alive || s.displaced) continue;
            if (p.is_abort) {
                emit(tick, id, ActionKind::Abort);
                continue;
            }
            const Cell prev = s.pos;
            const Cell next = plan_position_at(p, base, step);
            ActionKind kind = ActionKind::Wait;
            if (next != prev) {
                kind = step <= static_cast<int>(p.outbound_route.size())
                           ? ActionKind::Move
                           : ActionKind::ReturnToBase;
                s.pos = next;
                // environment zones displace and abort, never destroy
                if (env.true_env_zones.count(next)) {
                    s.pos = sample_displacement();
                    s.displaced = true;
                    event(tick, id,
                          "displaced " + std::to_string(s.pos.row) + " " +
                              std::to_string(s.pos.col));
                    emit(tick, id, kind);
                    continue;
                }
                // patrol / interceptor regions are lethal without a dodge
                if (env.patrol_region.count(next) || env.interceptor_region.count(next)) {
                    s.alive = false;
                    event(tick, id, "intercepted");
                    emit(tick, id, kind);
                    continue;
                }
                // each in-range cell entered is one lock: dodge or die
                for (const auto& t : threats) {
                    if (chebyshev(next, t.pos) > t.range) continue;
                    const bool dodged = unit(rng) < env.dodge_probability;
                    event(tick, id, (dodged ? "dodged " : "hit_by ") + t.id);
                    if (!dodged) {
                        s.alive = false;
                        break;
                    }
                }
                if (!s.alive) {
                    emit(tick, id, kind);
                    continue;
                }
            }
            // scheduled fire actions
            auto actions = p.per_agent.find(id);
            if (actions != p.per_agent.end()) {
                for (const auto& a : actions->second) {
                    if (a.kind != ActionKind::Fire || a.start_step != step) continue;
                    kind = ActionKind::Fire;
                    s.fired = true;
                    ++fires_delivered[a.fire_target];
                    event(tick, id, "fire " + a.fire_target);
                    auto target_hp = hp.find(a.fire_target);
                    if (target_hp != hp.end() && target_hp->second > 0) {
                        target_hp->second -= kMissileDamage;
                        if (target_hp->second <= 0)
                            event(tick, "", "target_destroyed " + a.fire_target);
                    }
                    // collateral: firing with a no-fire entity near the target
                    if (a.fire_target == cfg.goal.target_id) {
                        const Cell target_pos = env.entity_pos.at(a.fire_target);
                        for (const auto& e : cfg.entities) {
                            if (e.kind != EntityKind::NoFireEntity) continue;
                            if (chebyshev(env.entity_pos.at(e.id), target_pos) <=
                                cfg.goal.collateral_distance) {
                                hp[e.id] = 0;
                                if (!report_no_fire)
                                    event(tick, "", "report no_fire_entity_destroyed");
                                report_no_fire = true;
                            }
                        }
                    }
                }
            }
            emit(tick, id, kind);
        }
        // trailing no-action tick: the observed stream is finer than the
        // action granularity, so steps pad with idle tuples
        for (const auto& id : aircraft) {
            const State& s = st[id];
            if (!s.alive || s.displaced) continue;
            emit(kTicksPerStep * step, id, ActionKind::Wait);
        }
    }

    // terminal state, report-augmented
    TerminalState& term = out.observed.terminal;
    for (const auto& id : aircraft) {
        const State& s = st.at(id);
        AgentTerminal at;
        at.alive = s.alive;
        at.displaced = s.displaced;
        at.position_known = true;
        at.position = s.pos;
        at.fired = s.fired;
        term.agents[id] = at;
        if (!s.alive) ++out.losses;
        if (s.displaced) out.aborted = true;
    }
    for (const auto& e : cfg.entities) {
        if (e.kind == EntityKind::FriendlyAircraft || e.kind == EntityKind::HomeBase ||
            e.kind == EntityKind::SurveillanceDrone)
            continue;
        if (is_neutral_side(e.kind)) {
            // battle damage to protected sites is not directly observable;
            // the agent learns of it only through the post-battle report
            term.entity_alive[e.id] = true;
        } else {
            auto it = hp.find(e.id);
            term.entity_alive[e.id] = it == hp.end() || it->second > 0;
        }
    }
    term.fires_delivered = fires_delivered;
    term.report_no_fire_destroyed = report_no_fire;
    term.mission_aborted = p.is_abort || out.aborted;

    if (report_no_fire) out.reports.insert("no_fire_entity_destroyed");
    out.win = hp.count(cfg.goal.target_id) && hp.at(cfg.goal.target_id) <= 0;
    out.aborted = out.aborted || p.is_abort;
    event(kTicksPerStep * makespan + 1, "", "end");
    return out;
}

} // namespace sortie
