// Command-line front end: run campaigns, calibrate thresholds, render grids
// and routes, replay logged battles, and sweep seeds per novelty class.
//
// Exit codes: 0 success, 1 usage/config error, 2 internal failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sortie/campaign.hpp"
#include "sortie/inconsistency.hpp"
#include "sortie/model.hpp"
#include "sortie/planner.hpp"
#include "sortie/repair.hpp"
#include "sortie/scenario.hpp"
#include "sortie/simulator.hpp"

namespace fs = std::filesystem;
using namespace sortie;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// write-then-rename so concurrent sweeps never observe half-written files
void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw UsageError("cannot write file: " + path.string());
        out << content;
    }
    fs::rename(tmp, path);
}

ScenarioConfig load_scenario(const std::string& path) {
    const std::string text = slurp(path);
    try {
        return parse_scenario(text);
    } catch (const TextParseError& e) {
        throw UsageError(path + ":" + e.what());
    } catch (const ScenarioError& e) {
        throw UsageError(path + ": " + e.what());
    }
}

std::uint64_t resolve_master_seed(std::uint64_t flag_value) {
    if (const char* env = std::getenv("SORTIE_MASTER_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError("SORTIE_MASTER_SEED is not an integer");
        }
    }
    return flag_value;
}

std::string battle_suffix(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", index);
    return buf;
}

std::string metrics_table(const MetricsReport& m) {
    std::string out;
    auto row = [&](const char* name, const std::string& value) {
        out += name;
        const std::size_t pad = 36 - std::min<std::size_t>(35, std::string(name).size());
        out.append(pad, ' ');
        out += value;
        out += '\n';
    };
    row("detection_pct", textdoc_format_real(m.detection_pct));
    row("false_pos_pct", textdoc_format_real(m.false_pos_pct));
    row("false_neg_pct", textdoc_format_real(m.false_neg_pct));
    row("target_destroy_pre", textdoc_format_real(m.target_destroy_pre));
    row("target_destroy_post", textdoc_format_real(m.target_destroy_post));
    row("aircraft_survive_pre", textdoc_format_real(m.aircraft_survive_pre));
    row("aircraft_survive_post", textdoc_format_real(m.aircraft_survive_post));
    row("no_fire_destroy_pre", textdoc_format_real(m.no_fire_destroy_pre));
    row("no_fire_destroy_post", textdoc_format_real(m.no_fire_destroy_post));
    row("repair_count", std::to_string(m.repair_count));
    row("inconsistency_reduction_current", textdoc_format_real(m.inconsistency_reduction_current));
    row("inconsistency_reduction_next", textdoc_format_real(m.inconsistency_reduction_next));
    return out;
}

struct RunOptions {
    std::string scenario_path;
    std::string novelty = "none"; // class name, none, or random
    double strength = 1.2;
    bool sample_strength = false;
    std::string tn = "5";
    std::string agent = "hydra";
    std::uint64_t seed = 1;
    int battles = 20;
    std::string out_dir;
    bool verbose = false;
    double threshold = 0.5;
    double weak_fault = 3.0;
};

CampaignConfig build_campaign_config(const RunOptions& opt, const ScenarioConfig& scenario) {
    CampaignConfig cfg;
    cfg.scenario = scenario;
    cfg.battles = opt.battles;
    cfg.master_seed = resolve_master_seed(opt.seed);
    cfg.inconsistency.threshold = opt.threshold;
    cfg.inconsistency.weak_fault_distance = opt.weak_fault;

    if (opt.agent == "baseline")
        cfg.agent_mode = AgentMode::Baseline;
    else if (opt.agent == "hydra")
        cfg.agent_mode = AgentMode::Hydra;
    else
        throw UsageError("--agent must be baseline or hydra");

    if (opt.novelty == "none") {
        cfg.novelty.reset();
        cfg.t_n = opt.battles + 1;
        return cfg;
    }
    if (opt.novelty == "random") {
        cfg.sample_novelty_spec = true;
    } else {
        auto cls = novelty_class_from_string(opt.novelty);
        if (!cls) throw UsageError("unknown novelty class: " + opt.novelty);
        NoveltySpec spec;
        spec.cls = *cls;
        spec.strength = opt.strength;
        cfg.novelty = spec;
    }
    if (opt.sample_strength && cfg.novelty) {
        Rng rng(derive_seed(cfg.master_seed, 0x57a9));
        std::normal_distribution<double> gauss(1.5, 0.5);
        cfg.novelty->strength = gauss(rng);
    }
    if (opt.tn == "random") {
        cfg.random_tn = true;
    } else {
        try {
            cfg.t_n = std::stoi(opt.tn);
        } catch (const std::exception&) {
            throw UsageError("--tn must be an integer or 'random'");
        }
        if (cfg.t_n < 1 || cfg.t_n > opt.battles)
            throw UsageError("--tn must lie in [1, battles]");
    }
    return cfg;
}

void write_campaign_outputs(const fs::path& dir, const CampaignConfig& cfg,
                            const CampaignResult& result, const MetricsReport& metrics,
                            bool verbose) {
    fs::create_directories(dir);
    write_file_atomic(dir / "campaign.log", campaign_log(cfg, result));
    write_file_atomic(dir / "metrics.csv", metrics_to_csv(metrics));
    write_file_atomic(dir / "metrics.txt", metrics_to_textdoc(metrics));
    write_file_atomic(dir / "summary.txt", metrics_table(metrics));
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const std::string suffix = battle_suffix(static_cast<int>(i) + 1);
        write_file_atomic(dir / ("plan_" + suffix + ".txt"), result.plans[i]);
        write_file_atomic(dir / ("model_" + suffix + ".txt"), result.models[i]);
        if (verbose) {
            std::string events;
            for (const auto& line : result.events[i]) {
                events += line;
                events += '\n';
            }
            write_file_atomic(dir / ("battle_" + suffix + ".log"), events);
        }
    }
}

int cmd_run(const RunOptions& opt) {
    const ScenarioConfig scenario = load_scenario(opt.scenario_path);
    const CampaignConfig cfg = build_campaign_config(opt, scenario);
    const CampaignResult result = run_campaign(cfg);
    const MetricsReport metrics = compute_metrics(result.records, result.resolved_tn);
    if (!opt.out_dir.empty())
        write_campaign_outputs(opt.out_dir, cfg, result, metrics, opt.verbose);
    std::cout << metrics_table(metrics);
    return 0;
}

int cmd_calibrate(const std::string& scenario_path, int battles, std::uint64_t seed,
                  const std::string& out_file) {
    const ScenarioConfig scenario = load_scenario(scenario_path);
    InconsistencyConfig cal;
    try {
        cal = calibrate_thresholds(scenario, battles, resolve_master_seed(seed));
    } catch (const CampaignError& e) {
        throw UsageError(e.what());
    }
    TextNode node{"calibration"};
    node.entries.push_back({"clean_battles", {std::to_string(battles)}});
    node.entries.push_back({"threshold", {textdoc_format_real(cal.threshold)}});
    node.entries.push_back(
        {"weak_fault_distance", {textdoc_format_real(cal.weak_fault_distance)}});
    const std::string text = write_textdoc({node});
    if (!out_file.empty()) write_file_atomic(out_file, text);
    std::cout << text;
    return 0;
}

// Outbound route cells recovered from a serialized plan: the move actions of
// the alphabetically first agent, in step order.
std::vector<Cell> route_from_plan_text(const std::string& text) {
    std::vector<Cell> route;
    std::string first_agent;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        int step = 0;
        std::string agent, action;
        if (!(ls >> step >> agent >> action)) {
            if (line.empty()) continue;
            throw InternalError("corrupt plan line: " + line);
        }
        if (action != "move") continue;
        if (first_agent.empty()) first_agent = agent;
        if (agent != first_agent) continue;
        int r = 0, c = 0;
        if (!(ls >> r >> c)) throw InternalError("corrupt move line: " + line);
        route.push_back(Cell{r, c});
    }
    return route;
}

int cmd_render(const std::string& scenario_path, const std::string& route_dir,
               const std::vector<int>& battles) {
    const ScenarioConfig scenario = load_scenario(scenario_path);
    GridOverlay overlay;
    if (!route_dir.empty()) {
        if (battles.empty()) throw UsageError("--route-from needs at least one --battle");
        if (battles.size() > 2) throw UsageError("at most two --battle overlays");
        for (std::size_t i = 0; i < battles.size(); ++i) {
            const fs::path plan_path =
                fs::path(route_dir) / ("plan_" + battle_suffix(battles[i]) + ".txt");
            if (!fs::exists(plan_path))
                throw UsageError("no plan for battle " + std::to_string(battles[i]) + " in " +
                                 route_dir);
            const auto route = route_from_plan_text(slurp(plan_path));
            if (i == 0)
                overlay.route = route;
            else
                overlay.secondary_route = route;
        }
    } else if (!battles.empty()) {
        throw UsageError("--battle needs --route-from");
    }
    try {
        std::cout << render_grid(scenario, overlay);
    } catch (const ScenarioError& e) {
        throw UsageError(e.what());
    }
    return 0;
}

// Rebuilds the observed terminal state from a battle event log. Everything
// the inconsistency checker consumes is reconstructed without re-simulation.
Trajectory observed_from_events(const std::string& text, const ScenarioConfig& cfg) {
    struct AgentState {
        bool alive = true;
        bool displaced = false;
        bool fired = false;
        Cell pos;
        bool seen = false;
    };
    std::map<std::string, AgentState> agents;
    for (const auto& id : cfg.aircraft_ids()) {
        agents[id] = AgentState{};
        agents[id].pos = cfg.home_base().position;
    }
    std::map<std::string, int> fires;
    std::map<std::string, bool> entity_alive;
    for (const auto& e : cfg.entities) {
        if (e.kind == EntityKind::FriendlyAircraft || e.kind == EntityKind::HomeBase ||
            e.kind == EntityKind::SurveillanceDrone)
            continue;
        entity_alive[e.id] = true;
    }
    bool report = false;

    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int tick = 0;
        std::string agent, what;
        if (!(ls >> tick >> agent >> what)) throw InternalError("corrupt event line: " + line);
        if (what == "pos") {
            int r = 0, c = 0;
            if (!(ls >> r >> c)) throw InternalError("corrupt pos event: " + line);
            auto it = agents.find(agent);
            if (it == agents.end()) throw InternalError("unknown agent in log: " + agent);
            it->second.pos = Cell{r, c};
            it->second.seen = true;
            traj.steps.push_back(
                TrajStep{tick, agent, ActionKind::Wait, Cell{r, c}, it->second.alive});
        } else if (what == "hit_by" || what == "intercepted") {
            agents.at(agent).alive = false;
        } else if (what == "dodged") {
            // no state change
        } else if (what == "displaced") {
            agents.at(agent).displaced = true;
        } else if (what == "fire") {
            std::string target;
            ls >> target;
            ++fires[target];
            agents.at(agent).fired = true;
        } else if (what == "target_destroyed") {
            std::string id;
            ls >> id;
            // protected sites stay sensed-alive; their loss arrives by report
            if (entity_alive.count(id)) {
                const EntitySpec* spec = cfg.find(id);
                if (spec && !is_neutral_side(spec->kind)) entity_alive[id] = false;
            }
        } else if (what == "report") {
            report = true;
        } else if (what == "end" || what == "start") {
            // markers
        } else {
            throw InternalError("unknown event '" + what + "' in: " + line);
        }
    }
    if (traj.steps.empty()) throw InternalError("battle log contains no observations");

    for (const auto& [id, st] : agents) {
        AgentTerminal t;
        t.alive = st.alive;
        t.displaced = st.displaced;
        t.position_known = true;
        t.position = st.pos;
        t.fired = st.fired;
        traj.terminal.agents[id] = t;
    }
    traj.terminal.entity_alive = entity_alive;
    traj.terminal.fires_delivered = fires;
    traj.terminal.report_no_fire_destroyed = report;
    for (const auto& [id, st] : agents)
        if (st.displaced) traj.terminal.mission_aborted = true;
    return traj;
}

int cmd_replay(const std::string& scenario_path, const std::string& log_dir, int battle,
               double threshold, double weak_fault) {
    const ScenarioConfig scenario = load_scenario(scenario_path);
    const std::string suffix = battle_suffix(battle);
    const fs::path dir(log_dir);
    const fs::path event_path = dir / ("battle_" + suffix + ".log");
    const fs::path model_path = dir / ("model_" + suffix + ".txt");
    const fs::path plan_path = dir / ("plan_" + suffix + ".txt");
    if (!fs::exists(event_path) || !fs::exists(model_path) || !fs::exists(plan_path))
        throw UsageError("battle " + std::to_string(battle) + " not found in " + log_dir +
                         " (run with --verbose to keep battle logs)");

    PlanningModel model;
    try {
        model = parse_model(slurp(model_path));
    } catch (const std::exception& e) {
        throw InternalError(std::string("corrupt model snapshot: ") + e.what());
    }
    // the stored plan is re-derived from the stored model; cross-check route
    const Plan p = plan(model, scenario);
    const std::string stored_plan = slurp(plan_path);
    if (serialize_plan(p) != stored_plan)
        throw InternalError("stored plan does not match the stored model");

    const Trajectory t_o = observed_from_events(slurp(event_path), scenario);
    const Trajectory t_e = expected_trajectory(model, p, scenario);
    InconsistencyConfig icfg;
    icfg.threshold = threshold;
    icfg.weak_fault_distance = weak_fault;
    const InconsistencyReport report = check_inconsistency(t_e, t_o, icfg);

    TextNode node{"replay"};
    node.entries.push_back({"battle", {std::to_string(battle)}});
    node.entries.push_back({"c_score", {textdoc_format_real(report.score)}});
    node.entries.push_back({"novelty_detected", {report.novelty_detected ? "true" : "false"}});
    node.entries.push_back({"weak_fault", {report.weak_fault_moved ? "true" : "false"}});
    TextNode features{"per_feature"};
    for (const auto& [name, value] : report.per_feature)
        features.entries.push_back({name, {textdoc_format_real(value)}});
    node.children.push_back(std::move(features));
    std::cout << write_textdoc({node});
    return 0;
}

int cmd_sweep(const std::string& scenario_path, int seeds, const std::string& novelty,
              const std::string& agent, int battles, int tn, double strength,
              const std::string& out_dir) {
    if (seeds < 1) throw UsageError("--seeds must be >= 1");
    const ScenarioConfig scenario = load_scenario(scenario_path);

    std::vector<NoveltyClass> classes;
    if (novelty == "all") {
        classes = {NoveltyClass::Object,      NoveltyClass::Agent, NoveltyClass::Relation,
                   NoveltyClass::Environment, NoveltyClass::Goal,  NoveltyClass::Event};
    } else {
        auto cls = novelty_class_from_string(novelty);
        if (!cls) throw UsageError("unknown novelty class: " + novelty);
        classes = {*cls};
    }

    std::string csv = "novelty_class," + metrics_csv_header() + "\n";
    for (NoveltyClass cls : classes) {
        MetricsReport mean;
        for (int s = 1; s <= seeds; ++s) {
            RunOptions opt;
            opt.scenario_path = scenario_path;
            opt.novelty = to_string(cls);
            opt.strength = strength;
            opt.tn = std::to_string(tn);
            opt.agent = agent;
            opt.seed = static_cast<std::uint64_t>(s);
            opt.battles = battles;
            const CampaignConfig cfg = build_campaign_config(opt, scenario);
            const CampaignResult result = run_campaign(cfg);
            const MetricsReport m = compute_metrics(result.records, result.resolved_tn);
            mean.detection_pct += m.detection_pct;
            mean.false_pos_pct += m.false_pos_pct;
            mean.false_neg_pct += m.false_neg_pct;
            mean.target_destroy_pre += m.target_destroy_pre;
            mean.target_destroy_post += m.target_destroy_post;
            mean.aircraft_survive_pre += m.aircraft_survive_pre;
            mean.aircraft_survive_post += m.aircraft_survive_post;
            mean.no_fire_destroy_pre += m.no_fire_destroy_pre;
            mean.no_fire_destroy_post += m.no_fire_destroy_post;
            mean.repair_count += m.repair_count;
            mean.inconsistency_reduction_current += m.inconsistency_reduction_current;
            mean.inconsistency_reduction_next += m.inconsistency_reduction_next;
        }
        const double n = seeds;
        mean.detection_pct /= n;
        mean.false_pos_pct /= n;
        mean.false_neg_pct /= n;
        mean.target_destroy_pre /= n;
        mean.target_destroy_post /= n;
        mean.aircraft_survive_pre /= n;
        mean.aircraft_survive_post /= n;
        mean.no_fire_destroy_pre /= n;
        mean.no_fire_destroy_post /= n;
        mean.inconsistency_reduction_current /= n;
        mean.inconsistency_reduction_next /= n;
        // repair_count reported as a rounded mean
        mean.repair_count = static_cast<int>(std::lround(static_cast<double>(mean.repair_count) / n));
        csv += std::string(to_string(cls)) + "," + metrics_csv_row(mean) + "\n";
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file_atomic(fs::path(out_dir) / "summary.csv", csv);
    }
    std::cout << csv;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sortie: novelty-accommodating mission simulator"};
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "run one campaign and emit logs and metrics");
    run->add_option("scenario", run_opt.scenario_path, "scenario file")->required();
    run->add_option("--novelty", run_opt.novelty,
                    "novelty class (object|agent|relation|environment|goal|event), none, or random");
    run->add_option("--strength", run_opt.strength, "novelty strength (class units)");
    run->add_flag("--sample-strength", run_opt.sample_strength,
                  "sample strength from Gaussian(1.5, 0.5)");
    run->add_option("--tn", run_opt.tn, "battle of novelty injection, or 'random'");
    run->add_option("--agent", run_opt.agent, "agent mode: baseline or hydra");
    run->add_option("--seed", run_opt.seed, "campaign master seed");
    run->add_option("--battles", run_opt.battles, "number of battles")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", run_opt.out_dir, "output directory");
    run->add_flag("--verbose", run_opt.verbose, "also write per-battle event logs");
    run->add_option("--threshold", run_opt.threshold, "inconsistency detection threshold");
    run->add_option("--weak-fault", run_opt.weak_fault, "weak-fault displacement threshold");

    std::string cal_scenario, cal_out;
    int cal_battles = 20;
    std::uint64_t cal_seed = 1;
    CLI::App* cal = app.add_subcommand("calibrate",
                                       "set detection thresholds from clean battles");
    cal->add_option("scenario", cal_scenario, "scenario file")->required();
    cal->add_option("--battles", cal_battles, "number of clean battles (>= 10)");
    cal->add_option("--seed", cal_seed, "master seed");
    cal->add_option("--out", cal_out, "write calibration to this file");

    std::string render_scenario, render_dir;
    std::vector<int> render_battles;
    CLI::App* render = app.add_subcommand("render", "print the scenario grid, with overlays");
    render->add_option("scenario", render_scenario, "scenario file")->required();
    render->add_option("--route-from", render_dir, "campaign output directory with plan files");
    render->add_option("--battle", render_battles,
                       "battle whose route to overlay (repeat once for a comparison)");

    std::string replay_scenario, replay_dir;
    int replay_battle = 1;
    double replay_threshold = 0.5, replay_weak = 3.0;
    CLI::App* replay = app.add_subcommand("replay",
                                          "recompute inconsistency from a logged battle");
    replay->add_option("scenario", replay_scenario, "scenario file")->required();
    replay->add_option("--log", replay_dir, "campaign output directory")->required();
    replay->add_option("--battle", replay_battle, "battle index")->required();
    replay->add_option("--threshold", replay_threshold, "inconsistency detection threshold");
    replay->add_option("--weak-fault", replay_weak, "weak-fault displacement threshold");

    std::string sweep_scenario, sweep_novelty = "all", sweep_agent = "hydra", sweep_out;
    int sweep_seeds = 20, sweep_battles = 20, sweep_tn = 5;
    double sweep_strength = 1.2;
    CLI::App* sweep = app.add_subcommand("sweep", "mean metrics per novelty class over seeds");
    sweep->add_option("scenario", sweep_scenario, "scenario file")->required();
    sweep->add_option("--seeds", sweep_seeds, "campaigns per class");
    sweep->add_option("--novelty", sweep_novelty, "novelty class or 'all'");
    sweep->add_option("--agent", sweep_agent, "agent mode: baseline or hydra");
    sweep->add_option("--battles", sweep_battles, "battles per campaign");
    sweep->add_option("--tn", sweep_tn, "battle of novelty injection");
    sweep->add_option("--strength", sweep_strength, "novelty strength");
    sweep->add_option("--out", sweep_out, "output directory for summary.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (cal->parsed()) return cmd_calibrate(cal_scenario, cal_battles, cal_seed, cal_out);
        if (render->parsed()) return cmd_render(render_scenario, render_dir, render_battles);
        if (replay->parsed())
            return cmd_replay(replay_scenario, replay_dir, replay_battle, replay_threshold,
                              replay_weak);
        if (sweep->parsed())
            return cmd_sweep(sweep_scenario, sweep_seeds, sweep_novelty, sweep_agent,
                             sweep_battles, sweep_tn, sweep_strength, sweep_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const TextParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const CampaignError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
