#pragma once

// Trajectories: sequences of state-agent-action tuples plus a terminal state
// augmented with post-battle reports. Produced in two forms: expected (from
// the planning model) and observed (from the simulator).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sortie/geometry.hpp"

namespace sortie {

enum class ActionKind { Move, Fire, ReturnToBase, Abort, Wait };

inline const char* to_string(ActionKind k) {
    switch (k) {
        case ActionKind::Move: return "move";
        case ActionKind::Fire: return "fire";
        case ActionKind::ReturnToBase: return "return_to_base";
        case ActionKind::Abort: return "abort";
        case ActionKind::Wait: return "wait";
    }
    return "?";
}

struct Action {
    std::string agent;
    ActionKind kind = ActionKind::Wait;
    Cell move_to;           // Move
    std::string fire_target; // Fire
    int start_step = 0;
    int duration = 1;

    auto operator<=>(const Action&) const = default;
};

// Terminal status of one friendly aircraft.
struct AgentTerminal {
    bool alive = true;
    // True when the aircraft was thrown off its plan by an environment zone:
    // mission aborted, position no longer predictable. An expected-side
    // trajectory with displaced=true carries no meaningful position.
    bool displaced = false;
    bool position_known = true;
    Cell position;
    bool fired = false;

    auto operator<=>(const AgentTerminal&) const = default;
};

struct TerminalState {
    std::map<std::string, AgentTerminal> agents;   // friendly aircraft only
    std::map<std::string, bool> entity_alive;      // enemy + neutral entities (as sensed)
    std::map<std::string, int> fires_delivered;    // missiles delivered per entity
    bool report_no_fire_destroyed = false;         // post-battle report flag
    bool mission_aborted = false;

    auto operator<=>(const TerminalState&) const = default;
};

// One state-agent-action tuple.
struct TrajStep {
    int time = 0;          // plan step (expected) or simulator tick (observed)
    std::string agent;
    ActionKind action = ActionKind::Wait;
    Cell position;
    bool alive = true;

    auto operator<=>(const TrajStep&) const = default;
};

struct Trajectory {
    std::vector<TrajStep> steps;
    TerminalState terminal;

    auto operator<=>(const Trajectory&) const = default;
};

} // namespace sortie
