#pragma once

// The agent's internal planning model: a repairable approximation of the
// environment, plus the catalog of model manipulation operators (MMOs) that
// the repair search applies to it. Models are immutable values; apply_mmo
// returns a modified copy.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sortie/geometry.hpp"
#include "sortie/scenario.hpp"
#include "sortie/textdoc.hpp"

namespace sortie {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlanningModel {
    std::map<std::string, int> weapon_range;       // believed enemy weapon reach
    std::map<std::string, int> entity_hp;          // believed remaining enemy HP
    std::set<Cell> env_zones;                      // believed hazardous weather zones
    std::set<Cell> no_fly_zones;                   // believed forbidden airspace
    std::map<std::string, bool> no_fire_near_target; // believed collateral risk per target
    int friendly_speed = 1;                        // cells per time step
    int friendly_missile_range = 1;                // fire standoff distance
    std::map<std::string, bool> aircraft_fired;    // per-aircraft fired-this-battle belief
    std::map<std::string, int> hp_repair_cap;      // nominal + cap; repair never exceeds

    auto operator<=>(const PlanningModel&) const = default;
};

// Default non-novel model: nominal values copied from the scenario, empty
// zones, no collateral flags.
inline PlanningModel model_from_scenario(const ScenarioConfig& cfg) {
    constexpr int kHpRepairHeadroom = 3;
    PlanningModel m;
    for (const auto& e : cfg.entities) {
        if (is_enemy(e.kind)) {
            if (e.weapon_range > 0) m.weapon_range[e.id] = e.weapon_range;
            m.entity_hp[e.id] = e.hp;
            m.hp_repair_cap[e.id] = e.hp + kHpRepairHeadroom;
        }
        if (e.kind == EntityKind::FriendlyAircraft) {
            m.aircraft_fired[e.id] = false;
            if (e.weapon_range > 0) m.friendly_missile_range = e.weapon_range;
        }
        if (e.kind == EntityKind::TargetRadar) m.no_fire_near_target[e.id] = false;
    }
    return m;
}

// ---- model manipulation operators -------------------------------------------

enum class MmoKind {
    WeaponRange,  // weapon_range[entity] += delta
    EntityHp,     // entity_hp[entity] += delta
    EnvZone,      // add env zone at cell (or ref + offset when relative)
    NoFlyZone,    // add no-fly zone likewise
    NoFireFlag,   // no_fire_near_target[entity] flipped via numeric cast
};

// A single atomic edit of one model variable by a fixed delta. Boolean
// variables are cast through numerics: proposition true iff value > 0.
struct Mmo {
    MmoKind kind = MmoKind::WeaponRange;
    std::string entity;  // for WeaponRange / EntityHp / NoFireFlag
    Offset offset;       // for zone kinds; interpreted relative to ref when relative
    bool relative = true;
    int delta = 0;

    auto operator<=>(const Mmo&) const = default;
};

inline Mmo inverse(const Mmo& op) {
    Mmo inv = op;
    inv.delta = -op.delta;
    return inv;
}

inline std::string to_string(const Mmo& op) {
    auto signed_delta = [](int d) {
        return d >= 0 ? "+" + std::to_string(d) : std::to_string(d);
    };
    switch (op.kind) {
        case MmoKind::WeaponRange:
            return "weapon_range[" + op.entity + "]" + signed_delta(op.delta);
        case MmoKind::EntityHp:
            return "entity_hp[" + op.entity + "]" + signed_delta(op.delta);
        case MmoKind::EnvZone:
            return "env_zone" + to_string(op.offset) + (op.relative ? "" : "!");
        case MmoKind::NoFlyZone:
            return "no_fly_zone" + to_string(op.offset) + (op.relative ? "" : "!");
        case MmoKind::NoFireFlag:
            return "no_fire_near_target[" + op.entity + "]" +
                   std::string(op.delta > 0 ? "=true" : "=false");
    }
    return "?";
}

namespace detail {

inline Cell resolve_zone_cell(const Mmo& op, std::optional<Cell> ref) {
    if (!op.relative) return Cell{op.offset.drow, op.offset.dcol};
    if (!ref) throw ModelError("relative zone MMO needs a reference position");
    return *ref + op.offset;
}

} // namespace detail

// Applies one MMO and returns the modified model. Numeric values clamp at 0
// from below; the repair search only enumerates candidates that do not clamp,
// which keeps apply/un-apply an exact inverse pair there.
inline PlanningModel apply_mmo(const PlanningModel& m, const Mmo& op, const ScenarioConfig& cfg,
                               std::optional<Cell> ref = std::nullopt) {
    PlanningModel out = m;
    switch (op.kind) {
        case MmoKind::WeaponRange: {
            auto it = out.weapon_range.find(op.entity);
            if (it == out.weapon_range.end())
                throw ModelError("unknown weapon_range variable '" + op.entity + "'");
            it->second = std::max(0, it->second + op.delta);
            break;
        }
        case MmoKind::EntityHp: {
            auto it = out.entity_hp.find(op.entity);
            if (it == out.entity_hp.end())
                throw ModelError("unknown entity_hp variable '" + op.entity + "'");
            it->second = std::max(0, it->second + op.delta);
            break;
        }
        case MmoKind::EnvZone:
        case MmoKind::NoFlyZone: {
            const Cell cell = detail::resolve_zone_cell(op, ref);
            if (!cfg.grid.contains(cell))
                throw ModelError("zone cell " + to_string(cell) + " outside the grid");
            if (cell == cfg.home_base().position)
                throw ModelError("the home base cell may not become a zone");
            auto& zones = op.kind == MmoKind::EnvZone ? out.env_zones : out.no_fly_zones;
            if (op.delta >= 0)
                zones.insert(cell);
            else
                zones.erase(cell);
            break;
        }
        case MmoKind::NoFireFlag: {
            auto it = out.no_fire_near_target.find(op.entity);
            if (it == out.no_fire_near_target.end())
                throw ModelError("unknown no_fire_near_target variable '" + op.entity + "'");
            // numeric cast: value 0/1, add delta, re-cast as (> 0)
            const int numeric = (it->second ? 1 : 0) + op.delta;
            it->second = numeric > 0;
            break;
        }
    }
    return out;
}

// ---- catalog ----------------------------------------------------------------

struct MmoTemplate {
    MmoKind kind = MmoKind::WeaponRange;
    std::string entity;          // for per-entity kinds
    std::vector<int> deltas;     // for numeric kinds
    bool all_grid_offsets = false; // for zone kinds: every in-grid cell as target
};

// Ordered list of MMO templates; catalog order is the final tie-breaker of
// the repair search, so it must be deterministic.
struct MmoCatalog {
    std::vector<MmoTemplate> entries;
};

// Default catalog: ranges +-1/+-2 per armed enemy, HP +1 per destroyable
// enemy, the collateral flag per target, and zone placements anywhere in-grid.
inline MmoCatalog default_catalog(const ScenarioConfig& cfg) {
    MmoCatalog cat;
    for (const auto& e : cfg.entities) {
        if (is_enemy(e.kind) && e.weapon_range > 0)
            cat.entries.push_back({MmoKind::WeaponRange, e.id, {1, -1, 2, -2}, false});
    }
    for (const auto& e : cfg.entities) {
        if (is_enemy(e.kind)) cat.entries.push_back({MmoKind::EntityHp, e.id, {1}, false});
    }
    for (const auto& e : cfg.entities) {
        if (e.kind == EntityKind::TargetRadar)
            cat.entries.push_back({MmoKind::NoFireFlag, e.id, {1}, false});
    }
    cat.entries.push_back({MmoKind::EnvZone, "", {1}, true});
    cat.entries.push_back({MmoKind::NoFlyZone, "", {1}, true});
    return cat;
}

// Expands the catalog into concrete applicable MMO instances, in a
// deterministic order. Instances whose application would error or clamp are
// excluded, as are zone placements on already-zoned cells.
inline std::vector<Mmo> enumerate_mmos(const MmoCatalog& catalog, const PlanningModel& m,
                                       const ScenarioConfig& cfg, Cell ref) {
    std::vector<Mmo> out;
    const Cell base = cfg.home_base().position;
    for (const auto& tpl : catalog.entries) {
        switch (tpl.kind) {
            case MmoKind::WeaponRange: {
                auto it = m.weapon_range.find(tpl.entity);
                if (it == m.weapon_range.end()) break;
                for (int d : tpl.deltas)
                    if (it->second + d >= 0) out.push_back({tpl.kind, tpl.entity, {}, false, d});
                break;
            }
            case MmoKind::EntityHp: {
                auto it = m.entity_hp.find(tpl.entity);
                if (it == m.entity_hp.end()) break;
                auto cap = m.hp_repair_cap.find(tpl.entity);
                const int max_hp =
                    cap == m.hp_repair_cap.end() ? it->second + 1 : cap->second;
                for (int d : tpl.deltas) {
                    const int next = it->second + d;
                    if (next >= 0 && next <= max_hp)
                        out.push_back({tpl.kind, tpl.entity, {}, false, d});
                }
                break;
            }
            case MmoKind::EnvZone:
            case MmoKind::NoFlyZone: {
                if (!tpl.all_grid_offsets) break;
                const auto& zones =
                    tpl.kind == MmoKind::EnvZone ? m.env_zones : m.no_fly_zones;
                for (int r = 0; r < cfg.grid.rows; ++r) {
                    for (int c = 0; c < cfg.grid.cols; ++c) {
                        const Cell cell{r, c};
                        if (cell == base || zones.count(cell)) continue;
                        out.push_back({tpl.kind, "", cell - ref, true, 1});
                    }
                }
                break;
            }
            case MmoKind::NoFireFlag: {
                auto it = m.no_fire_near_target.find(tpl.entity);
                if (it == m.no_fire_near_target.end()) break;
                // flip toward the opposite truth value
                out.push_back({tpl.kind, tpl.entity, {}, false, it->second ? -1 : 1});
                break;
            }
        }
    }
    return out;
}

// ---- snapshot serialization --------------------------------------------------

inline std::string serialize_model(const PlanningModel& m) {
    TextNode root{"model"};
    auto map_child = [&](const char* name, const auto& kv, auto format) {
        TextNode node{name};
        for (const auto& [key, value] : kv) node.entries.push_back({key, {format(value)}});
        root.children.push_back(std::move(node));
    };
    map_child("weapon_range", m.weapon_range, [](int v) { return std::to_string(v); });
    map_child("entity_hp", m.entity_hp, [](int v) { return std::to_string(v); });
    map_child("hp_repair_cap", m.hp_repair_cap, [](int v) { return std::to_string(v); });
    map_child("no_fire_near_target", m.no_fire_near_target,
              [](bool v) { return std::string(v ? "true" : "false"); });
    map_child("aircraft_fired", m.aircraft_fired,
              [](bool v) { return std::string(v ? "true" : "false"); });

    auto zone_child = [&](const char* name, const std::set<Cell>& zones) {
        TextNode node{name};
        for (Cell c : zones)
            node.entries.push_back(
                {"cell", {std::to_string(c.row), std::to_string(c.col)}});
        root.children.push_back(std::move(node));
    };
    zone_child("env_zones", m.env_zones);
    zone_child("no_fly_zones", m.no_fly_zones);

    root.entries.push_back({"friendly_speed", {std::to_string(m.friendly_speed)}});
    root.entries.push_back(
        {"friendly_missile_range", {std::to_string(m.friendly_missile_range)}});
    return write_textdoc({root});
}

inline PlanningModel parse_model(std::string_view text) {
    auto roots = parse_textdoc(text);
    if (roots.size() != 1 || roots[0].name != "model")
        throw ModelError("expected a single model block");
    const TextNode& root = roots[0];

    PlanningModel m;
    if (const TextEntry* e = root.find_entry("friendly_speed"))
        m.friendly_speed = static_cast<int>(textdoc_int(*e, 0));
    if (const TextEntry* e = root.find_entry("friendly_missile_range"))
        m.friendly_missile_range = static_cast<int>(textdoc_int(*e, 0));

    for (const auto& child : root.children) {
        if (child.name == "weapon_range")
            for (const auto& e : child.entries)
                m.weapon_range[e.key] = static_cast<int>(textdoc_int(e, 0));
        else if (child.name == "entity_hp")
            for (const auto& e : child.entries)
                m.entity_hp[e.key] = static_cast<int>(textdoc_int(e, 0));
        else if (child.name == "hp_repair_cap")
            for (const auto& e : child.entries)
                m.hp_repair_cap[e.key] = static_cast<int>(textdoc_int(e, 0));
        else if (child.name == "no_fire_near_target")
            for (const auto& e : child.entries) m.no_fire_near_target[e.key] = textdoc_bool(e, 0);
        else if (child.name == "aircraft_fired")
            for (const auto& e : child.entries) m.aircraft_fired[e.key] = textdoc_bool(e, 0);
        else if (child.name == "env_zones" || child.name == "no_fly_zones") {
            auto& zones = child.name == "env_zones" ? m.env_zones : m.no_fly_zones;
            for (const auto& e : child.entries)
                zones.insert(Cell{static_cast<int>(textdoc_int(e, 0)),
                                  static_cast<int>(textdoc_int(e, 1))});
        } else {
            throw ModelError("unknown model block '" + child.name + "'");
        }
    }
    return m;
}

} // namespace sortie
