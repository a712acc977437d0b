#include "doctest.h"

#include <random>

#include "sortie/model.hpp"
#include "test_support.hpp"

using namespace sortie;
using namespace sortie::test;

TEST_CASE("model_from_scenario copies nominal values and starts clean") {
    ScenarioConfig cfg = default_scenario();
    PlanningModel m = model_from_scenario(cfg);
    CHECK(m.weapon_range.at("sam1") == 2);
    CHECK(m.entity_hp.at("target1") == 1);
    CHECK(m.entity_hp.at("sam1") == 2);
    CHECK(m.env_zones.empty());
    CHECK(m.no_fly_zones.empty());
    CHECK_FALSE(m.no_fire_near_target.at("target1"));
    CHECK_FALSE(m.aircraft_fired.at("eagle1"));
    CHECK(m.hp_repair_cap.at("target1") == 4); // nominal + 3

    // a config with no enemy entities yields empty range/HP maps
    ScenarioConfig no_enemies;
    no_enemies.grid = GridSpec{3, 3, 1.0};
    no_enemies.goal = GoalSpec{"t1", 0};
    no_enemies.entities.push_back({"base", EntityKind::HomeBase, Cell{2, 0}, 0, 0, 0});
    no_enemies.entities.push_back({"a1", EntityKind::FriendlyAircraft, Cell{2, 0}, 1, 1, 2});
    PlanningModel m2 = model_from_scenario(no_enemies);
    CHECK(m2.weapon_range.empty());
    CHECK(m2.entity_hp.empty());
}

TEST_CASE("apply_mmo arithmetic matches the repair catalog semantics") {
    ScenarioConfig cfg = default_scenario();
    PlanningModel m = model_from_scenario(cfg);

    PlanningModel r1 = apply_mmo(m, {MmoKind::WeaponRange, "sam1", {}, false, 1}, cfg);
    CHECK(r1.weapon_range.at("sam1") == 3);

    PlanningModel r2 = apply_mmo(m, {MmoKind::EntityHp, "target1", {}, false, 1}, cfg);
    CHECK(r2.entity_hp.at("target1") == 2);

    // zone at offset (-2,-1) from reference (5,5) lands at (3,4)
    PlanningModel r3 = apply_mmo(m, {MmoKind::EnvZone, "", {-2, -1}, true, 1}, cfg, Cell{5, 5});
    CHECK(r3.env_zones.count(Cell{3, 4}) == 1);

    // original model untouched (value semantics)
    CHECK(m.weapon_range.at("sam1") == 2);
    CHECK(m.env_zones.empty());
}

TEST_CASE("apply_mmo error paths") {
    ScenarioConfig cfg = default_scenario();
    PlanningModel m = model_from_scenario(cfg);
    CHECK_THROWS_AS(apply_mmo(m, {MmoKind::WeaponRange, "nosuch", {}, false, 1}, cfg), ModelError);
    // relative zone resolving out of the grid
    CHECK_THROWS_AS(apply_mmo(m, {MmoKind::EnvZone, "", {-5, 0}, true, 1}, cfg, Cell{2, 2}),
                    ModelError);
    // the home base cell may never become a zone
    const Cell base = cfg.home_base().position;
    CHECK_THROWS_AS(
        apply_mmo(m, {MmoKind::EnvZone, "", {base.row, base.col}, false, 1}, cfg), ModelError);
    // relative op without a reference
    CHECK_THROWS_AS(apply_mmo(m, {MmoKind::EnvZone, "", {0, 1}, true, 1}, cfg), ModelError);
    // ranges clamp at zero from below
    PlanningModel clamped = apply_mmo(m, {MmoKind::WeaponRange, "sam1", {}, false, -5}, cfg);
    CHECK(clamped.weapon_range.at("sam1") == 0);
}

TEST_CASE("numeric MMOs un-apply exactly; boolean flips round-trip") {
    ScenarioConfig cfg = default_scenario();
    PlanningModel m = model_from_scenario(cfg);
    MmoCatalog cat = default_catalog(cfg);

    std::mt19937_64 rng(99);
    auto instances = enumerate_mmos(cat, m, cfg, cfg.home_base().position);
    REQUIRE(!instances.empty());
    for (int trial = 0; trial < 64; ++trial) {
        const Mmo& op = instances[std::uniform_int_distribution<std::size_t>(
            0, instances.size() - 1)(rng)];
        PlanningModel applied = apply_mmo(m, op, cfg, cfg.home_base().position);
        PlanningModel restored = apply_mmo(applied, inverse(op), cfg, cfg.home_base().position);
        CHECK(restored == m);
    }

    // no_fire flag: flipping twice restores the original truth value
    Mmo flip{MmoKind::NoFireFlag, "target1", {}, false, 1};
    PlanningModel once = apply_mmo(m, flip, cfg);
    CHECK(once.no_fire_near_target.at("target1"));
    PlanningModel twice = apply_mmo(once, inverse(flip), cfg);
    CHECK(twice == m);
}

TEST_CASE("enumerate_mmos determinism, exclusions and counts") {
    ScenarioConfig cfg = minimal_scenario();
    // catalog with only range +-1 for one sam
    ScenarioConfig with_sam = cfg;
    with_sam.entities.push_back({"s1", EntityKind::Sam, Cell{1, 2}, 2, 1, 2});
    validate_scenario(with_sam);
    PlanningModel m = model_from_scenario(with_sam);
    MmoCatalog cat;
    cat.entries.push_back({MmoKind::WeaponRange, "s1", {1, -1}, false});
    auto instances = enumerate_mmos(cat, m, with_sam, with_sam.home_base().position);
    CHECK(instances.size() == 2);

    // zone template on a 3x3 grid: nine cells minus the home base
    MmoCatalog zones;
    zones.entries.push_back({MmoKind::EnvZone, "", {1}, true});
    auto zone_instances = enumerate_mmos(zones, m, with_sam, Cell{1, 1});
    CHECK(zone_instances.size() == 8);

    // empty catalog -> empty list
    CHECK(enumerate_mmos(MmoCatalog{}, m, with_sam, Cell{1, 1}).empty());

    // deterministic ordering
    auto again = enumerate_mmos(zones, m, with_sam, Cell{1, 1});
    CHECK(zone_instances == again);

    // HP repairs never enumerate past the cap
    PlanningModel capped = m;
    capped.entity_hp["t1"] = capped.hp_repair_cap["t1"];
    MmoCatalog hp_cat;
    hp_cat.entries.push_back({MmoKind::EntityHp, "t1", {1}, false});
    CHECK(enumerate_mmos(hp_cat, capped, with_sam, Cell{1, 1}).empty());

    // range decrements that would clamp are not enumerated
    PlanningModel zero = m;
    zero.weapon_range["s1"] = 0;
    auto no_clamp = enumerate_mmos(cat, zero, with_sam, Cell{1, 1});
    CHECK(no_clamp.size() == 1); // only +1 remains
}

TEST_CASE("model snapshots serialize and parse back") {
    ScenarioConfig cfg = default_scenario();
    PlanningModel m = model_from_scenario(cfg);
    m.weapon_range["sam1"] = 3;
    m.env_zones.insert(Cell{6, 0});
    m.no_fire_near_target["target1"] = true;

    PlanningModel parsed = parse_model(serialize_model(m));
    CHECK(parsed == m);
}
