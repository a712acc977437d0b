#pragma once

// Mission scenario definition: grid geometry, entities, goal and campaign
// settings. The parsed ScenarioConfig is the single source of truth from
// which both the ground-truth environment and the agent's initial planning
// model are built. Immutable after parse.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sortie/geometry.hpp"
#include "sortie/textdoc.hpp"

namespace sortie {

struct ScenarioError : std::runtime_error {
    std::string field; // offending field or entity id, when known
    explicit ScenarioError(const std::string& msg, std::string field_ = "")
        : std::runtime_error(msg), field(std::move(field_)) {}
};

enum class EntityKind {
    FriendlyAircraft,
    SurveillanceDrone,
    Sam,
    TargetRadar,
    RadarSensor,
    NoFireEntity,
    Neutral,
    EnemyOther,
    HomeBase,
};

inline const char* to_string(EntityKind k) {
    switch (k) {
        case EntityKind::FriendlyAircraft: return "friendly_aircraft";
        case EntityKind::SurveillanceDrone: return "surveillance_drone";
        case EntityKind::Sam: return "sam";
        case EntityKind::TargetRadar: return "target_radar";
        case EntityKind::RadarSensor: return "radar_sensor";
        case EntityKind::NoFireEntity: return "no_fire_entity";
        case EntityKind::Neutral: return "neutral";
        case EntityKind::EnemyOther: return "enemy_other";
        case EntityKind::HomeBase: return "home_base";
    }
    return "?";
}

inline std::optional<EntityKind> entity_kind_from_string(std::string_view s) {
    static const std::pair<const char*, EntityKind> table[] = {
        {"friendly_aircraft", EntityKind::FriendlyAircraft},
        {"surveillance_drone", EntityKind::SurveillanceDrone},
        {"sam", EntityKind::Sam},
        {"target_radar", EntityKind::TargetRadar},
        {"radar_sensor", EntityKind::RadarSensor},
        {"no_fire_entity", EntityKind::NoFireEntity},
        {"neutral", EntityKind::Neutral},
        {"enemy_other", EntityKind::EnemyOther},
        {"home_base", EntityKind::HomeBase},
    };
    for (const auto& [name, kind] : table)
        if (s == name) return kind;
    return std::nullopt;
}

// Enemy side, as opposed to friendly assets and protected/neutral sites.
inline bool is_enemy(EntityKind k) {
    return k == EntityKind::Sam || k == EntityKind::TargetRadar ||
           k == EntityKind::RadarSensor || k == EntityKind::EnemyOther;
}

inline bool is_neutral_side(EntityKind k) {
    return k == EntityKind::NoFireEntity || k == EntityKind::Neutral;
}

// Entities that can be destroyed in-world and therefore carry hit points.
inline bool is_destroyable(EntityKind k) { return k != EntityKind::HomeBase; }

struct GridSpec {
    int rows = 0;
    int cols = 0;
    double cell_size = 1.0;

    bool contains(Cell c) const {
        return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
    }
    auto operator<=>(const GridSpec&) const = default;
};

struct EntitySpec {
    std::string id;
    EntityKind kind = EntityKind::Neutral;
    Cell position;
    int hp = 0;
    int weapon_range = 0; // cells; 0 for unarmed entities
    int missiles = 0;

    auto operator<=>(const EntitySpec&) const = default;
};

struct GoalSpec {
    std::string target_id;       // the designated target to destroy
    int collateral_distance = 1; // no-fire entity within this range forces abort

    auto operator<=>(const GoalSpec&) const = default;
};

struct ScenarioConfig {
    GridSpec grid;
    GoalSpec goal;
    std::vector<EntitySpec> entities;

    auto operator<=>(const ScenarioConfig&) const = default;

    const EntitySpec* find(std::string_view id) const {
        for (const auto& e : entities)
            if (e.id == id) return &e;
        return nullptr;
    }
    const EntitySpec& home_base() const {
        for (const auto& e : entities)
            if (e.kind == EntityKind::HomeBase) return e;
        throw ScenarioError("scenario has no home base");
    }
    const EntitySpec& target() const {
        const EntitySpec* t = find(goal.target_id);
        if (!t) throw ScenarioError("goal target not found", goal.target_id);
        return *t;
    }
    std::vector<std::string> aircraft_ids() const {
        std::vector<std::string> out;
        for (const auto& e : entities)
            if (e.kind == EntityKind::FriendlyAircraft) out.push_back(e.id);
        return out;
    }
    int friendly_count() const { return static_cast<int>(aircraft_ids().size()); }
};

// ---- validation ------------------------------------------------------------

inline void validate_scenario(const ScenarioConfig& cfg) {
    if (cfg.grid.rows < 3 || cfg.grid.cols < 3)
        throw ScenarioError("grid must be at least 3x3", "grid");
    if (cfg.grid.cell_size <= 0.0)
        throw ScenarioError("cell_size must be positive", "grid.cell_size");
    if (cfg.goal.collateral_distance < 0)
        throw ScenarioError("collateral_distance must be >= 0", "goal.collateral_distance");

    std::set<std::string> ids;
    int home_count = 0;
    int target_count = 0;
    for (const auto& e : cfg.entities) {
        if (e.id.empty()) throw ScenarioError("entity with empty id", e.id);
        if (!ids.insert(e.id).second)
            throw ScenarioError("duplicate entity id '" + e.id + "'", e.id);
        if (!cfg.grid.contains(e.position))
            throw ScenarioError("entity '" + e.id + "' position out of bounds", e.id);
        if (e.hp < 0 || e.weapon_range < 0 || e.missiles < 0)
            throw ScenarioError("entity '" + e.id + "' has a negative field", e.id);
        if (e.weapon_range > 0 && e.kind != EntityKind::Sam &&
            e.kind != EntityKind::FriendlyAircraft && e.kind != EntityKind::EnemyOther)
            throw ScenarioError("entity '" + e.id + "' of kind " + to_string(e.kind) +
                                    " may not be armed",
                                e.id);
        if (is_destroyable(e.kind) && e.hp < 1)
            throw ScenarioError("destroyable entity '" + e.id + "' needs hp >= 1", e.id);
        if (e.kind == EntityKind::HomeBase) ++home_count;
        if (e.kind == EntityKind::TargetRadar && e.id == cfg.goal.target_id) ++target_count;
    }
    if (home_count != 1)
        throw ScenarioError("scenario must contain exactly one home_base", "home_base");
    if (cfg.goal.target_id.empty())
        throw ScenarioError("goal.target_id missing", "goal.target_id");
    const EntitySpec* target = cfg.find(cfg.goal.target_id);
    if (!target || target->kind != EntityKind::TargetRadar || target_count != 1)
        throw ScenarioError("goal target '" + cfg.goal.target_id +
                                "' must be a unique target_radar entity",
                            cfg.goal.target_id);

    const Cell base = cfg.home_base().position;
    for (const auto& e : cfg.entities)
        if (e.kind == EntityKind::FriendlyAircraft && e.position != base)
            throw ScenarioError("aircraft '" + e.id + "' must start at the home base", e.id);
}

// ---- parse / serialize -----------------------------------------------------

namespace detail {

inline void reject_unknown_entries(const TextNode& node,
                                   std::initializer_list<std::string_view> allowed) {
    for (const auto& e : node.entries) {
        bool ok = false;
        for (auto a : allowed)
            if (e.key == a) ok = true;
        if (!ok)
            throw TextParseError(e.line, 1,
                                 "unknown key '" + e.key + "' in block '" + node.name + "'");
    }
}

inline int entry_int_field(const TextNode& node, std::string_view key, int line) {
    const TextEntry* e = node.find_entry(key);
    if (!e)
        throw TextParseError(line, 1,
                             "block '" + node.name + "' is missing key '" + std::string(key) + "'");
    return static_cast<int>(textdoc_int(*e, 0));
}

} // namespace detail

// Parses the documented scenario format. Unknown keys are rejected.
inline ScenarioConfig parse_scenario(std::string_view text) {
    auto roots = parse_textdoc(text);

    ScenarioConfig cfg;
    bool saw_grid = false, saw_goal = false, saw_entities = false;
    for (const auto& node : roots) {
        if (node.name == "grid") {
            detail::reject_unknown_entries(node, {"rows", "cols", "cell_size"});
            cfg.grid.rows = detail::entry_int_field(node, "rows", node.line);
            cfg.grid.cols = detail::entry_int_field(node, "cols", node.line);
            if (const TextEntry* e = node.find_entry("cell_size"))
                cfg.grid.cell_size = textdoc_real(*e, 0);
            saw_grid = true;
        } else if (node.name == "goal") {
            detail::reject_unknown_entries(node, {"target_id", "collateral_distance"});
            const TextEntry* t = node.find_entry("target_id");
            if (!t || t->values.empty())
                throw TextParseError(node.line, 1, "goal block needs target_id");
            cfg.goal.target_id = t->values[0];
            cfg.goal.collateral_distance =
                detail::entry_int_field(node, "collateral_distance", node.line);
            saw_goal = true;
        } else if (node.name == "entities") {
            if (!node.entries.empty())
                throw TextParseError(node.entries[0].line, 1,
                                     "entities block contains only entity sub-blocks");
            for (const auto& ent : node.children) {
                if (ent.name != "entity")
                    throw TextParseError(ent.line, 1,
                                         "unexpected block '" + ent.name + "' in entities");
                if (ent.id.empty())
                    throw TextParseError(ent.line, 1, "entity block needs an id");
                detail::reject_unknown_entries(
                    ent, {"kind", "position", "hp", "weapon_range", "missiles"});
                EntitySpec spec;
                spec.id = ent.id;
                const TextEntry* kind = ent.find_entry("kind");
                if (!kind || kind->values.empty())
                    throw TextParseError(ent.line, 1, "entity '" + ent.id + "' needs kind");
                auto parsed = entity_kind_from_string(kind->values[0]);
                if (!parsed)
                    throw TextParseError(kind->line, 1,
                                         "unknown entity kind '" + kind->values[0] + "'");
                spec.kind = *parsed;
                const TextEntry* pos = ent.find_entry("position");
                if (!pos || pos->values.size() != 2)
                    throw TextParseError(ent.line, 1,
                                         "entity '" + ent.id + "' needs position row col");
                spec.position =
                    Cell{static_cast<int>(textdoc_int(*pos, 0)),
                         static_cast<int>(textdoc_int(*pos, 1))};
                if (const TextEntry* e = ent.find_entry("hp"))
                    spec.hp = static_cast<int>(textdoc_int(*e, 0));
                if (const TextEntry* e = ent.find_entry("weapon_range"))
                    spec.weapon_range = static_cast<int>(textdoc_int(*e, 0));
                if (const TextEntry* e = ent.find_entry("missiles"))
                    spec.missiles = static_cast<int>(textdoc_int(*e, 0));
                cfg.entities.push_back(std::move(spec));
            }
            saw_entities = true;
        } else {
            throw TextParseError(node.line, 1, "unknown top-level block '" + node.name + "'");
        }
    }
    if (!saw_grid) throw ScenarioError("scenario is missing the grid block", "grid");
    if (!saw_goal) throw ScenarioError("scenario is missing the goal block", "goal");
    if (!saw_entities) throw ScenarioError("scenario is missing the entities block", "entities");

    validate_scenario(cfg);
    return cfg;
}

inline std::string serialize_scenario(const ScenarioConfig& cfg) {
    std::vector<TextNode> roots;

    TextNode grid{"grid"};
    grid.entries.push_back({"rows", {std::to_string(cfg.grid.rows)}});
    grid.entries.push_back({"cols", {std::to_string(cfg.grid.cols)}});
    grid.entries.push_back({"cell_size", {textdoc_format_real(cfg.grid.cell_size)}});
    roots.push_back(std::move(grid));

    TextNode goal{"goal"};
    goal.entries.push_back({"target_id", {cfg.goal.target_id}});
    goal.entries.push_back({"collateral_distance", {std::to_string(cfg.goal.collateral_distance)}});
    roots.push_back(std::move(goal));

    TextNode entities{"entities"};
    for (const auto& e : cfg.entities) {
        TextNode ent{"entity", e.id};
        ent.entries.push_back({"kind", {to_string(e.kind)}});
        ent.entries.push_back(
            {"position", {std::to_string(e.position.row), std::to_string(e.position.col)}});
        ent.entries.push_back({"hp", {std::to_string(e.hp)}});
        ent.entries.push_back({"weapon_range", {std::to_string(e.weapon_range)}});
        ent.entries.push_back({"missiles", {std::to_string(e.missiles)}});
        entities.children.push_back(std::move(ent));
    }
    roots.push_back(std::move(entities));

    return write_textdoc(roots);
}

// ---- terminal rendering ----------------------------------------------------

struct GridOverlay {
    std::vector<Cell> route;           // rendered as '*'
    std::vector<Cell> secondary_route; // rendered as '+'
    std::vector<Cell> zones;           // rendered as '#'
};

inline char entity_glyph(EntityKind k) {
    switch (k) {
        case EntityKind::FriendlyAircraft: return 'A';
        case EntityKind::SurveillanceDrone: return 'd';
        case EntityKind::Sam: return 'S';
        case EntityKind::TargetRadar: return 'T';
        case EntityKind::RadarSensor: return 'r';
        case EntityKind::NoFireEntity: return 'N';
        case EntityKind::Neutral: return 'n';
        case EntityKind::EnemyOther: return 'e';
        case EntityKind::HomeBase: return 'B';
    }
    return '?';
}

// Draw precedence when several entities share a cell.
inline int glyph_priority(EntityKind k) {
    switch (k) {
        case EntityKind::FriendlyAircraft: return 9;
        case EntityKind::Sam: return 8;
        case EntityKind::TargetRadar: return 8;
        case EntityKind::SurveillanceDrone: return 7;
        case EntityKind::NoFireEntity: return 6;
        case EntityKind::RadarSensor: return 5;
        case EntityKind::EnemyOther: return 4;
        case EntityKind::Neutral: return 3;
        case EntityKind::HomeBase: return 2;
    }
    return 0;
}

// Deterministic character-grid rendering; pure function of (cfg, overlay).
inline std::string render_grid(const ScenarioConfig& cfg, const GridOverlay& overlay = {}) {
    std::vector<std::string> rows(static_cast<std::size_t>(cfg.grid.rows),
                                  std::string(static_cast<std::size_t>(cfg.grid.cols), '.'));
    auto put = [&](Cell c, char glyph) { rows[c.row][c.col] = glyph; };

    for (Cell c : overlay.zones) {
        if (!cfg.grid.contains(c)) throw ScenarioError("overlay zone cell out of bounds");
        put(c, '#');
    }
    for (Cell c : overlay.secondary_route) {
        if (!cfg.grid.contains(c)) throw ScenarioError("overlay route cell out of bounds");
        put(c, '+');
    }
    for (Cell c : overlay.route) {
        if (!cfg.grid.contains(c)) throw ScenarioError("overlay route cell out of bounds");
        put(c, '*');
    }

    std::map<Cell, const EntitySpec*> best;
    for (const auto& e : cfg.entities) {
        auto it = best.find(e.position);
        if (it == best.end() || glyph_priority(e.kind) > glyph_priority(it->second->kind))
            best[e.position] = &e;
    }
    for (const auto& [cell, ent] : best) put(cell, entity_glyph(ent->kind));

    std::string out;
    for (const auto& r : rows) {
        out += r;
        out += '\n';
    }
    return out;
}

} // namespace sortie
