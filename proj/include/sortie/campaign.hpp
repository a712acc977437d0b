#pragma once

// Campaign driver: runs the N-battle tournament with novelty injection,
// drives the detect -> repair loop for the adaptive agent (the baseline
// never repairs), and computes the detection/accommodation metrics.

#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sortie/inconsistency.hpp"
#include "sortie/model.hpp"
#include "sortie/planner.hpp"
#include "sortie/repair.hpp"
#include "sortie/rng.hpp"
#include "sortie/scenario.hpp"
#include "sortie/simulator.hpp"
#include "sortie/textdoc.hpp"

namespace sortie {

struct CampaignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AgentMode { Baseline, Hydra };

inline const char* to_string(AgentMode m) {
    return m == AgentMode::Baseline ? "baseline" : "hydra";
}

struct CampaignConfig {
    ScenarioConfig scenario;
    int battles = 20;
    std::optional<NoveltySpec> novelty; // fixed novelty, if any
    bool sample_novelty_spec = false;   // sample class/strength instead
    std::map<NoveltyClass, double> class_weights = {
        {NoveltyClass::Object, 1.0},     {NoveltyClass::Agent, 1.0},
        {NoveltyClass::Relation, 1.0},   {NoveltyClass::Environment, 1.0},
        {NoveltyClass::Goal, 1.0},       {NoveltyClass::Event, 1.0},
    };
    std::map<NoveltyClass, GaussianParams> gaussians;
    int t_n = 0;          // battle of injection; battles+1 means never
    bool random_tn = false;
    AgentMode agent_mode = AgentMode::Hydra;
    std::uint64_t master_seed = 1;
    InconsistencyConfig inconsistency;
    MmoCatalog catalog; // empty entries: build the default catalog for the scenario
};

struct BattleRecord {
    int index = 0;
    bool post_novelty = false;
    bool win = false;
    int losses = 0;
    bool aborted = false;
    bool report_no_fire = false;
    double c_score = 0.0;
    bool exceeded = false;   // c_score > threshold (mode-independent)
    bool detected = false;   // the agent's detector fired this battle
    bool aware = false;      // entered the battle with novelty already detected
    bool weak_fault = false;
    std::string repair = "none";
    double c_before = 0.0;
    double c_after = 0.0;
    int candidates_evaluated = 0;
};

struct CampaignResult {
    std::vector<BattleRecord> records;
    PlanningModel final_model;
    int resolved_tn = 0;
    std::optional<NoveltySpec> resolved_novelty;
    std::vector<std::string> plans;                 // serialized, one per battle
    std::vector<std::string> models;                // model snapshot used per battle
    std::vector<std::vector<std::string>> events;   // simulator event lines per battle
};

inline CampaignResult run_campaign(const CampaignConfig& cfg) {
    if (cfg.battles < 1) throw CampaignError("campaign needs at least one battle");

    // resolve novelty spec and injection battle deterministically
    std::optional<NoveltySpec> novelty = cfg.novelty;
    if (cfg.sample_novelty_spec)
        novelty = sample_novelty(cfg.class_weights, cfg.gaussians,
                                 derive_seed(cfg.master_seed, 0x5a3d1e));
    int t_n = cfg.t_n;
    if (novelty && cfg.random_tn) {
        Rng rng(derive_seed(cfg.master_seed, 0x7c4b2a));
        std::uniform_int_distribution<int> dist(1, cfg.battles);
        t_n = dist(rng);
    }
    if (!novelty) t_n = cfg.battles + 1;
    if (t_n < 1 || t_n > cfg.battles + 1)
        throw CampaignError("novelty battle t_n out of range");

    const Environment nominal_env = environment_from_scenario(cfg.scenario);
    Environment novel_env = nominal_env;
    if (novelty && t_n <= cfg.battles) novel_env = inject_novelty(nominal_env, *novelty, cfg.scenario);

    const PlanningModel default_model = model_from_scenario(cfg.scenario);
    const MmoCatalog catalog =
        cfg.catalog.entries.empty() ? default_catalog(cfg.scenario) : cfg.catalog;
    const RepairContext ctx{cfg.scenario, cfg.inconsistency};

    PlanningModel current = default_model;
    RepairMemory memory;
    bool aware = false;

    CampaignResult result;
    result.resolved_tn = t_n;
    result.resolved_novelty = novelty;

    for (int battle = 1; battle <= cfg.battles; ++battle) {
        const bool post = battle >= t_n;
        const Environment& env = post ? novel_env : nominal_env;
        const PlanningModel& model =
            cfg.agent_mode == AgentMode::Baseline ? default_model : current;

        const Plan p = plan(model, cfg.scenario);
        const Trajectory t_e = expected_trajectory(model, p, cfg.scenario);
        const BattleOutcome outcome =
            execute(env, p, cfg.scenario, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(battle)));
        const InconsistencyReport report =
            check_inconsistency(t_e, outcome.observed, cfg.inconsistency);

        BattleRecord rec;
        rec.index = battle;
        rec.post_novelty = post;
        rec.win = outcome.win;
        rec.losses = outcome.losses;
        rec.aborted = outcome.aborted;
        rec.report_no_fire = outcome.reports.count("no_fire_entity_destroyed") > 0;
        rec.c_score = report.score;
        rec.exceeded = report.novelty_detected;
        rec.aware = aware;
        rec.weak_fault = report.weak_fault_moved;
        rec.detected = cfg.agent_mode == AgentMode::Hydra && report.novelty_detected;

        result.plans.push_back(serialize_plan(p));
        result.models.push_back(serialize_model(model));
        result.events.push_back(outcome.events);

        if (rec.detected) {
            aware = true;
            try {
                RepairResult rr =
                    report.weak_fault_moved && !p.is_abort
                        ? repair_environment_zone(current, p, outcome.observed, memory, ctx)
                        : repair_model(current, p, outcome.observed, catalog, memory, ctx);
                rec.c_before = rr.c_before;
                rec.c_after = rr.c_after;
                rec.candidates_evaluated = rr.candidates_evaluated;
                if (rr.accepted) {
                    rec.repair = rr.accepted->to_log_string();
                    current = rr.repaired_model;
                }
            } catch (const RepairExhausted&) {
                rec.repair = "exhausted";
                rec.c_before = rec.c_score;
                rec.c_after = rec.c_score;
            }
        }
        result.records.push_back(std::move(rec));
    }
    result.final_model = cfg.agent_mode == AgentMode::Baseline ? default_model : current;
    return result;
}

// ---- metrics ------------------------------------------------------------------

struct MetricsReport {
    double detection_pct = 0.0;
    double false_pos_pct = 0.0;
    double false_neg_pct = 0.0;
    double target_destroy_pre = 0.0;
    double target_destroy_post = 0.0;
    double aircraft_survive_pre = 0.0;
    double aircraft_survive_post = 0.0;
    double no_fire_destroy_pre = 0.0;
    double no_fire_destroy_post = 0.0;
    int repair_count = 0;
    double inconsistency_reduction_current = 0.0;
    double inconsistency_reduction_next = 0.0;
};

// Detection conventions: a post-novelty battle counts as detected once the
// agent has declared novelty by that battle's end; the false-negative count
// collects outcome-affecting battles the agent entered unaware (the
// one-battle observation lag shows up as exactly one such battle), expressed
// against the total battle count.
inline MetricsReport compute_metrics(const std::vector<BattleRecord>& records, int t_n) {
    if (records.empty()) throw CampaignError("no battle records");
    const int battles = static_cast<int>(records.size());
    if (t_n < 1 || t_n > battles + 1) throw CampaignError("t_n out of range");

    MetricsReport m;
    int pre = 0, post = 0;
    int pre_wins = 0, post_wins = 0, pre_clean = 0, post_clean = 0;
    int pre_nofire = 0, post_nofire = 0, pre_det = 0;
    int post_detected_by_end = 0, missed = 0;
    bool declared = false;
    for (const auto& r : records) {
        if (r.detected) declared = true;
        if (r.index >= t_n) {
            ++post;
            if (declared) ++post_detected_by_end;
            if (r.exceeded && !r.aware) ++missed;
            if (r.win) ++post_wins;
            if (r.losses == 0) ++post_clean;
            if (r.report_no_fire) ++post_nofire;
        } else {
            ++pre;
            if (r.detected) ++pre_det;
            if (r.win) ++pre_wins;
            if (r.losses == 0) ++pre_clean;
            if (r.report_no_fire) ++pre_nofire;
        }
    }
    auto pct = [](int num, int den) { return den == 0 ? 0.0 : 100.0 * num / den; };
    m.detection_pct = pct(post_detected_by_end, post);
    m.false_pos_pct = pct(pre_det, pre);
    m.false_neg_pct = pct(missed, battles);
    m.target_destroy_pre = pct(pre_wins, pre);
    m.target_destroy_post = pct(post_wins, post);
    m.aircraft_survive_pre = pct(pre_clean, pre);
    m.aircraft_survive_post = pct(post_clean, post);
    m.no_fire_destroy_pre = pct(pre_nofire, pre);
    m.no_fire_destroy_post = pct(post_nofire, post);

    // reduction on the final repair battle, and carry-over to the next battle
    int last_repair = -1;
    for (int i = 0; i < battles; ++i)
        if (records[static_cast<std::size_t>(i)].repair != "none" &&
            records[static_cast<std::size_t>(i)].repair != "exhausted") {
            ++m.repair_count;
            last_repair = i;
        }
    if (last_repair >= 0) {
        const BattleRecord& r = records[static_cast<std::size_t>(last_repair)];
        if (r.c_before > 0.0) {
            auto clamp_pct = [](double v) { return std::min(100.0, std::max(0.0, v)); };
            m.inconsistency_reduction_current =
                clamp_pct(100.0 * (r.c_before - r.c_after) / r.c_before);
            if (last_repair + 1 < battles) {
                const double c_next =
                    records[static_cast<std::size_t>(last_repair + 1)].c_score;
                m.inconsistency_reduction_next =
                    clamp_pct(100.0 * (r.c_before - c_next) / r.c_before);
            } else {
                m.inconsistency_reduction_next = m.inconsistency_reduction_current;
            }
        }
    }
    return m;
}

// ---- threshold calibration -----------------------------------------------------

// Runs n clean battles and sets the detection threshold to the midpoint
// between the worst clean score and the smallest injected-unit signal (1.0);
// the weak-fault distance sits a margin above the largest clean displacement.
// env_override lets test harnesses feed jittered environments through the
// same calibration path.
inline InconsistencyConfig calibrate_thresholds(const ScenarioConfig& scenario, int n_clean_battles,
                                                std::uint64_t master_seed,
                                                const std::optional<Environment>& env_override =
                                                    std::nullopt) {
    if (n_clean_battles < 10)
        throw CampaignError("calibration needs at least 10 clean battles");

    const PlanningModel model = model_from_scenario(scenario);
    const Environment env =
        env_override ? *env_override : environment_from_scenario(scenario);
    const Plan p = plan(model, scenario);
    const Trajectory t_e = expected_trajectory(model, p, scenario);

    InconsistencyConfig cfg;
    double max_score = 0.0;
    double max_displacement = 0.0;
    for (int i = 1; i <= n_clean_battles; ++i) {
        const BattleOutcome outcome =
            execute(env, p, scenario, derive_seed(master_seed, static_cast<std::uint64_t>(i)));
        const InconsistencyReport report =
            inconsistency_terminal(t_e, outcome.observed, cfg);
        max_score = std::max(max_score, report.score);
        for (const auto& [id, e] : t_e.terminal.agents) {
            const AgentTerminal& o = outcome.observed.terminal.agents.at(id);
            if (e.alive && o.alive && e.position_known)
                max_displacement = std::max(max_displacement, euclidean(e.position, o.position));
        }
    }
    constexpr double kMinInjectedUnit = 1.0;
    constexpr double kWeakFaultMargin = 3.0;
    cfg.threshold = (max_score + kMinInjectedUnit) / 2.0;
    cfg.weak_fault_distance = max_displacement + kWeakFaultMargin;
    return cfg;
}

// ---- serialization --------------------------------------------------------------

inline std::string metrics_csv_header() {
    return "detection_pct,false_pos_pct,false_neg_pct,target_destroy_pre,target_destroy_post,"
           "aircraft_survive_pre,aircraft_survive_post,no_fire_destroy_pre,no_fire_destroy_post,"
           "repair_count,inconsistency_reduction_current,inconsistency_reduction_next";
}

inline std::string metrics_csv_row(const MetricsReport& m) {
    auto f = textdoc_format_real;
    std::string out;
    out += f(m.detection_pct) + "," + f(m.false_pos_pct) + "," + f(m.false_neg_pct) + ",";
    out += f(m.target_destroy_pre) + "," + f(m.target_destroy_post) + ",";
    out += f(m.aircraft_survive_pre) + "," + f(m.aircraft_survive_post) + ",";
    out += f(m.no_fire_destroy_pre) + "," + f(m.no_fire_destroy_post) + ",";
    out += std::to_string(m.repair_count) + ",";
    out += f(m.inconsistency_reduction_current) + "," + f(m.inconsistency_reduction_next);
    return out;
}

inline std::string metrics_to_csv(const MetricsReport& m) {
    return metrics_csv_header() + "\n" + metrics_csv_row(m) + "\n";
}

inline std::string metrics_to_textdoc(const MetricsReport& m) {
    TextNode node{"metrics"};
    auto put = [&](const char* key, double v) {
        node.entries.push_back({key, {textdoc_format_real(v)}});
    };
    put("detection_pct", m.detection_pct);
    put("false_pos_pct", m.false_pos_pct);
    put("false_neg_pct", m.false_neg_pct);
    put("target_destroy_pre", m.target_destroy_pre);
    put("target_destroy_post", m.target_destroy_post);
    put("aircraft_survive_pre", m.aircraft_survive_pre);
    put("aircraft_survive_post", m.aircraft_survive_post);
    put("no_fire_destroy_pre", m.no_fire_destroy_pre);
    put("no_fire_destroy_post", m.no_fire_destroy_post);
    node.entries.push_back({"repair_count", {std::to_string(m.repair_count)}});
    put("inconsistency_reduction_current", m.inconsistency_reduction_current);
    put("inconsistency_reduction_next", m.inconsistency_reduction_next);
    return write_textdoc({node});
}

inline std::string campaign_log(const CampaignConfig& cfg, const CampaignResult& result) {
    std::vector<TextNode> nodes;
    TextNode head{"campaign"};
    head.entries.push_back({"battles", {std::to_string(cfg.battles)}});
    head.entries.push_back({"agent", {to_string(cfg.agent_mode)}});
    head.entries.push_back({"master_seed", {std::to_string(cfg.master_seed)}});
    head.entries.push_back({"t_n", {std::to_string(result.resolved_tn)}});
    head.entries.push_back(
        {"novelty",
         {result.resolved_novelty ? to_string(result.resolved_novelty->cls) : "none"}});
    if (result.resolved_novelty)
        head.entries.push_back(
            {"strength", {textdoc_format_real(result.resolved_novelty->strength)}});
    head.entries.push_back(
        {"threshold", {textdoc_format_real(cfg.inconsistency.threshold)}});
    nodes.push_back(std::move(head));

    auto bool_str = [](bool b) { return std::string(b ? "true" : "false"); };
    for (const auto& r : result.records) {
        TextNode node{"battle", std::to_string(r.index)};
        node.entries.push_back({"post_novelty", {bool_str(r.post_novelty)}});
        node.entries.push_back({"win", {bool_str(r.win)}});
        node.entries.push_back({"losses", {std::to_string(r.losses)}});
        node.entries.push_back({"aborted", {bool_str(r.aborted)}});
        node.entries.push_back({"report_no_fire", {bool_str(r.report_no_fire)}});
        node.entries.push_back({"c_score", {textdoc_format_real(r.c_score)}});
        node.entries.push_back({"detected", {bool_str(r.detected)}});
        node.entries.push_back({"aware", {bool_str(r.aware)}});
        node.entries.push_back({"weak_fault", {bool_str(r.weak_fault)}});
        node.entries.push_back({"accepted_mmo", {r.repair}});
        node.entries.push_back({"c_before", {textdoc_format_real(r.c_before)}});
        node.entries.push_back({"c_after", {textdoc_format_real(r.c_after)}});
        node.entries.push_back(
            {"candidates_evaluated", {std::to_string(r.candidates_evaluated)}});
        nodes.push_back(std::move(node));
    }
    return write_textdoc(nodes);
}

} // namespace sortie
