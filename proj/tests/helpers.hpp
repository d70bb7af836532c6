#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <mdcw/mdcw.hpp>

namespace testutil {

// Resolves a human-readable action description to its canonical instance.
inline const mdcw::ActionInstance& find_action(const mdcw::Environment& env,
                                               const std::string& description) {
    for (const auto& act : env.actions())
        if (env.describe(act) == description) return act;
    throw std::runtime_error("no such action: " + description);
}

inline std::vector<int> action_indices(const mdcw::Environment& env,
                                       const std::vector<std::string>& descriptions) {
    std::vector<int> out;
    for (const auto& d : descriptions) out.push_back(find_action(env, d).global_index);
    return out;
}

// The guided six-stage walkthrough on the baseline scenario: perimeter
// break-in, pivot through both firewalls, rule injection and exfiltration.
inline std::vector<std::string> six_stage_script() {
    return {
        "Move(P2)",
        "Harvest(FW1_password)",
        "Move(P1)",
        "UseDevice(T1)",
        "Connect(FW1_manager via T1)",
        "Dominate(FW1_manager)",
        "AddAcl(FW1->T2_manager)",
        "Connect(T2_manager via T1)",
        "Dominate(T2_manager)",
        "Harvest(FW2_password)",
        "Harvest(S1_web_password)",
        "Connect(FW2_manager via T2)",
        "Dominate(FW2_manager)",
        "AddAcl(FW2->S1_web)",
        "AddAcl(FW2->S2_web)",
        "Connect(S1_web via T2)",
        "Dominate(S1_web)",
        "Harvest(S2_web_password)",
        "Connect(S2_web via FW2)",
        "Dominate(S2_web)",
        "ReadInfo(SECRET)",
    };
}

// A shortest path when all three key policies are pre-added (length 11).
inline std::vector<std::string> optimal_script_all_policies() {
    return {
        "Move(P1)",
        "UseDevice(T1)",
        "Connect(T2_manager via T1)",
        "Dominate(T2_manager)",
        "Harvest(S1_web_password)",
        "Connect(S1_web via T2)",
        "Dominate(S1_web)",
        "Harvest(S2_web_password)",
        "Connect(S2_web via S1)",
        "Dominate(S2_web)",
        "ReadInfo(SECRET)",
    };
}

struct ReplayResult {
    double total_reward = 0.0;
    int steps = 0;
    bool all_feasible = true;
    bool done = false;
    mdcw::AttackerState final_state;
};

// Replays a scripted action sequence from reset, accumulating rewards.
inline ReplayResult replay(const mdcw::Environment& env, const std::vector<std::string>& script) {
    ReplayResult res;
    mdcw::AttackerState st = env.reset();
    for (const auto& name : script) {
        const auto& act = find_action(env, name);
        mdcw::StepOutcome out = env.apply_action(st, act);
        res.all_feasible = res.all_feasible && out.feasible;
        res.total_reward += out.reward;
        res.steps += 1;
        res.done = out.done;
        st = out.next;
    }
    res.final_state = st;
    return res;
}

// The built-in scenario with an explicit subset of the key policies
// pre-added (bit i of `mask` selects key policy i).
inline mdcw::CyberScenario builtin_with_policy_subset(unsigned mask) {
    mdcw::CyberScenario s = mdcw::builtin_scenario(0);
    for (std::size_t i = 0; i < s.key_policies.size(); ++i)
        if (mask & (1u << i)) s.acl_rules.push_back(s.key_policies[i]);
    return s;
}

} // namespace testutil
