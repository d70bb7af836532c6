#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "mdcw/bits.hpp"
#include "mdcw/env.hpp"

namespace mdcw {

struct StateBudgetExceeded : std::runtime_error {
    explicit StateBudgetExceeded(std::size_t budget)
        : std::runtime_error("reachable-state budget of " + std::to_string(budget) + " states exceeded") {}
};

struct OraclePath {
    int length = 0;
    std::vector<ActionInstance> actions;
};

namespace detail {

struct BitsHash {
    std::size_t operator()(const Bits& b) const { return static_cast<std::size_t>(hash_bits(0x9e3779b97f4a7c15ull, b)); }
};

// Breadth-first closure over attacker states (modulo step count). States that
// end the episode are recorded but not expanded. Discovery order is fixed by
// the canonical action enumeration, so results are deterministic.
struct Search {
    const Environment& env;
    std::size_t max_states;
    std::vector<Bits> states;            // discovery order; states[0] = reset
    std::vector<int> parent;             // index into states, -1 for root
    std::vector<int> via_action;         // global action index taken from parent
    std::unordered_map<Bits, int, BitsHash> seen;
    std::optional<int> goal;             // first state with the info item

    Search(const Environment& e, std::size_t budget) : env(e), max_states(budget) {}

    void run(bool stop_at_goal) {
        AttackerState root = env.reset();
        push(env.encode_bits(root), -1, -1, root.info.any());
        if (goal && stop_at_goal) return;
        for (std::size_t at = 0; at < states.size(); ++at) {
            AttackerState st = env.decode_bits(states[at]);
            if (st.info.any()) continue; // terminal: episode is over
            for (const auto& act : env.actions()) {
                if (!env.feasible(st, act)) continue;
                StepOutcome out = env.apply_action(st, act);
                push(env.encode_bits(out.next), static_cast<int>(at), act.global_index, out.next.info.any());
                if (goal && stop_at_goal) return;
            }
        }
    }

    void push(const Bits& key, int from, int action, bool is_goal) {
        auto [it, fresh] = seen.try_emplace(key, static_cast<int>(states.size()));
        if (!fresh) return;
        if (states.size() >= max_states) {
            seen.erase(it);
            throw StateBudgetExceeded(max_states);
        }
        states.push_back(key);
        parent.push_back(from);
        via_action.push_back(action);
        if (is_goal && !goal) goal = static_cast<int>(states.size()) - 1;
    }
};

} // namespace detail

// Minimum-length action sequence from reset() to the security information,
// or nullopt when no sequence exists.
inline std::optional<OraclePath> shortest_attack_path(const Environment& env,
                                                      std::size_t max_states = 1000000) {
    detail::Search search(env, max_states);
    search.run(/*stop_at_goal=*/true);
    if (!search.goal) return std::nullopt;
    OraclePath path;
    for (int at = *search.goal; search.parent[at] >= 0; at = search.parent[at])
        path.actions.push_back(env.actions()[search.via_action[at]]);
    std::reverse(path.actions.begin(), path.actions.end());
    path.length = static_cast<int>(path.actions.size());
    return path;
}

// Every state reachable from reset(), deduplicated, in discovery order.
inline std::vector<Bits> enumerate_reachable_states(const Environment& env,
                                                    std::size_t max_states = 1000000) {
    detail::Search search(env, max_states);
    search.run(/*stop_at_goal=*/false);
    return std::move(search.states);
}

} // namespace mdcw
