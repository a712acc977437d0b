#pragma once

// Meta model repair: greedy search over MMO candidates minimizing estimated
// inconsistency, with repair memory, relative rebasing and a two-part
// heuristic (better explanations first, then smaller single-aspect edits).

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sortie/inconsistency.hpp"
#include "sortie/model.hpp"
#include "sortie/planner.hpp"
#include "sortie/scenario.hpp"
#include "sortie/trajectory.hpp"

namespace sortie {

struct RepairExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Repair {
    std::vector<Mmo> mmos;
    std::optional<Offset> zone_offset; // set for zone hypotheses (offset from home base)

    std::string to_log_string() const {
        if (mmos.empty()) return "none";
        std::string out;
        for (std::size_t i = 0; i < mmos.size(); ++i) {
            if (i) out += ",";
            out += to_string(mmos[i]);
        }
        return out;
    }
};

// Previously accepted zone repairs, stored relative to the latest accepted
// one. On each acceptance every entry is rebased by subtracting the new
// repair's offset, so membership tests compare absolute cells; no hypothesis
// is ever proposed twice.
class RepairMemory {
public:
    bool contains(Cell candidate) const {
        if (!anchor_) return false;
        const Offset rel = candidate - *anchor_;
        for (const Offset& e : entries_)
            if (e == rel) return true;
        return false;
    }

    void accept(Cell repair_cell) {
        if (anchor_) {
            const Offset shift = repair_cell - *anchor_;
            for (Offset& e : entries_) e = e - shift;
        }
        entries_.push_back(Offset{0, 0}); // the repair just accepted, in its own frame
        anchor_ = repair_cell;
    }

    // Absolute cells reconstructed from the rebased offsets (newest anchor).
    std::vector<Cell> absolute_cells() const {
        std::vector<Cell> out;
        if (!anchor_) return out;
        for (const Offset& e : entries_) out.push_back(*anchor_ + e);
        return out;
    }

    const std::vector<Offset>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

private:
    std::vector<Offset> entries_;
    std::optional<Cell> anchor_;
};

struct RepairResult {
    std::optional<Repair> accepted;
    double c_before = 0.0;
    double c_after = 0.0;
    int candidates_evaluated = 0;
    PlanningModel repaired_model;
};

struct RepairContext {
    const ScenarioConfig& scenario;
    InconsistencyConfig inconsistency;
};

// Re-derives the expected trajectory of the executed plan under model m and
// scores it against the observation. The plan stays fixed: candidates compete
// on explaining what was observed, not on hypothetical future plans.
inline double estimate_inconsistency(const PlanningModel& m, const Plan& executed,
                                     const Trajectory& t_o, const RepairContext& ctx) {
    const Trajectory t_e = expected_trajectory(m, executed, ctx.scenario);
    return inconsistency_terminal(t_e, t_o, ctx.inconsistency).score;
}

namespace detail {

// Model aspects touched by an MMO; the heuristic prefers repairs that focus
// on a single aspect.
inline int mmo_aspect(const Mmo& op) { return static_cast<int>(op.kind); }

struct Candidate {
    Mmo op;
    double c_new = 0.0;
    int order = 0; // catalog enumeration index
};

inline bool candidate_preferred(const Candidate& a, const Candidate& b,
                                const std::vector<int>& touched_aspects) {
    if (a.c_new != b.c_new) return a.c_new < b.c_new;
    const bool a_known = std::count(touched_aspects.begin(), touched_aspects.end(),
                                    mmo_aspect(a.op)) > 0;
    const bool b_known = std::count(touched_aspects.begin(), touched_aspects.end(),
                                    mmo_aspect(b.op)) > 0;
    if (a_known != b_known) return a_known; // stay on the fewest distinct aspects
    if (std::abs(a.op.delta) != std::abs(b.op.delta))
        return std::abs(a.op.delta) < std::abs(b.op.delta);
    return a.order < b.order;
}

} // namespace detail

// Greedy repair over the MMO catalog. Evaluates every applicable candidate
// against the observation, accepts the best strictly-improving one, and
// re-enters the loop until the score falls to the threshold or nothing
// improves. Multi-MMO repairs emerge from successive iterations, never from
// combinatorial candidate generation.
inline RepairResult repair_model(const PlanningModel& m, const Plan& executed,
                                 const Trajectory& t_o, const MmoCatalog& catalog,
                                 const RepairMemory& memory, const RepairContext& ctx) {
    if (catalog.entries.empty()) throw RepairExhausted("MMO catalog is empty");

    const Cell base = ctx.scenario.home_base().position;
    RepairResult result;
    result.c_before = estimate_inconsistency(m, executed, t_o, ctx);
    result.c_after = result.c_before;
    result.repaired_model = m;
    if (result.c_before <= ctx.inconsistency.threshold) return result; // already consistent

    PlanningModel current = m;
    double c_best = result.c_before;
    Repair accepted;
    std::vector<int> touched_aspects;

    for (;;) {
        const auto candidates = enumerate_mmos(catalog, current, ctx.scenario, base);
        std::optional<detail::Candidate> best;
        int order = 0;
        for (const Mmo& op : candidates) {
            ++order;
            if (op.kind == MmoKind::EnvZone || op.kind == MmoKind::NoFlyZone) {
                const Cell cell = base + op.offset;
                if (memory.contains(cell)) continue; // never re-hypothesize a zone
            }
            PlanningModel candidate_model = apply_mmo(current, op, ctx.scenario, base);
            const double c_new = estimate_inconsistency(candidate_model, executed, t_o, ctx);
            ++result.candidates_evaluated;
            detail::Candidate c{op, c_new, order};
            if (c_new < c_best &&
                (!best || detail::candidate_preferred(c, *best, touched_aspects)))
                best = c;
        }
        if (!best) break;
        current = apply_mmo(current, best->op, ctx.scenario, base);
        accepted.mmos.push_back(best->op);
        touched_aspects.push_back(detail::mmo_aspect(best->op));
        c_best = best->c_new;
        if (c_best <= ctx.inconsistency.threshold) break;
    }

    // oscillation guard: a repair that fails to at least halve the score is
    // not a believable explanation; keep the original model instead
    if (!accepted.mmos.empty() && c_best > 0.5 * result.c_before) {
        result.c_after = result.c_before;
        return result;
    }

    if (!accepted.mmos.empty()) {
        result.accepted = accepted;
        result.c_after = c_best;
        result.repaired_model = current;
    }
    return result;
}

// Environment-zone repair with memory. Invoked when the weak-fault location
// predicate fired: some aircraft ended up far from where the model expected
// it. Candidates are the cells of the executed outbound route, ordered from
// the end the aircraft verifiably departed (the base end); every battle the
// memory forces a fresh hypothesis.
inline RepairResult repair_environment_zone(const PlanningModel& m, const Plan& executed,
                                            const Trajectory& t_o, RepairMemory& memory,
                                            const RepairContext& ctx) {
    const Cell base = ctx.scenario.home_base().position;

    RepairResult result;
    result.c_before = estimate_inconsistency(m, executed, t_o, ctx);
    result.c_after = result.c_before;
    result.repaired_model = m;
    if (result.c_before <= ctx.inconsistency.threshold) return result;

    for (const Cell cell : executed.outbound_route) {
        if (cell == base) continue;
        if (memory.contains(cell)) continue;
        if (m.env_zones.count(cell)) continue;
        Mmo op{MmoKind::EnvZone, "", cell - base, true, 1};
        PlanningModel candidate_model = apply_mmo(m, op, ctx.scenario, base);
        const double c_new = estimate_inconsistency(candidate_model, executed, t_o, ctx);
        ++result.candidates_evaluated;
        if (c_new >= result.c_before) continue; // not route-consistent with the anomaly
        Repair repair;
        repair.mmos.push_back(op);
        repair.zone_offset = cell - base;
        memory.accept(cell);
        result.accepted = repair;
        result.c_after = c_new;
        result.repaired_model = candidate_model;
        return result;
    }
    throw RepairExhausted("no zone hypothesis left on the executed route");
}

} // namespace sortie
