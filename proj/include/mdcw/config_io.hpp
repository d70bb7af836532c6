#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mdcw/agent.hpp"
#include "mdcw/scenario_io.hpp"

namespace mdcw {

// Strict JSON form of AgentConfig: every key optional, unknown keys rejected.
inline AgentConfig agent_config_from_json(const std::string& text) {
    using json = nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), static_cast<long>(e.byte));
    }
    if (!j.is_object()) throw ParseError("config: expected an object");

    AgentConfig cfg;
    auto num = [&](const char* key, auto& field) {
        auto it = j.find(key);
        if (it == j.end()) return;
        if (!it->is_number()) throw ParseError(std::string("config.") + key + ": expected a number");
        field = it->get<std::decay_t<decltype(field)>>();
        j.erase(it);
    };
    num("gamma", cfg.gamma);
    num("tau", cfg.tau);
    num("lr_actor", cfg.lr_actor);
    num("lr_critic", cfg.lr_critic);
    num("batch_m", cfg.batch_m);
    num("replay_capacity", cfg.replay_capacity);
    num("noise_sigma_start", cfg.noise_sigma_start);
    num("noise_sigma_end", cfg.noise_sigma_end);
    num("epsilon_random", cfg.epsilon_random);
    num("epsilon_random_end", cfg.epsilon_random_end);
    num("r_infeasible", cfg.r_infeasible);
    num("episodes", cfg.episodes);
    num("max_steps", cfg.max_steps);
    num("train_every", cfg.train_every);
    num("warmup_batches", cfg.warmup_batches);
    num("reward_scale", cfg.reward_scale);
    num("penalty_td", cfg.penalty_td);
    num("actor_reg", cfg.actor_reg);
    num("actor_softmax_t", cfg.actor_softmax_t);
    if (!j.empty()) throw ParseError("config: unknown key '" + j.begin().key() + "'");
    if (cfg.batch_m < 1 || cfg.episodes < 0 || cfg.max_steps < 1 || cfg.train_every < 1 ||
        cfg.gamma <= 0.0 || cfg.gamma > 1.0 || cfg.tau < 0.0 || cfg.tau > 1.0)
        throw ParseError("config: values out of range");
    return cfg;
}

inline AgentConfig load_agent_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return agent_config_from_json(ss.str());
}

inline nlohmann::ordered_json agent_config_to_json(const AgentConfig& cfg) {
    nlohmann::ordered_json j;
    j["gamma"] = cfg.gamma;
    j["tau"] = cfg.tau;
    j["lr_actor"] = cfg.lr_actor;
    j["lr_critic"] = cfg.lr_critic;
    j["batch_m"] = cfg.batch_m;
    j["replay_capacity"] = cfg.replay_capacity;
    j["noise_sigma_start"] = cfg.noise_sigma_start;
    j["noise_sigma_end"] = cfg.noise_sigma_end;
    j["epsilon_random"] = cfg.epsilon_random;
    j["epsilon_random_end"] = cfg.epsilon_random_end;
    j["r_infeasible"] = cfg.r_infeasible;
    j["episodes"] = cfg.episodes;
    j["max_steps"] = cfg.max_steps;
    j["train_every"] = cfg.train_every;
    j["warmup_batches"] = cfg.warmup_batches;
    j["reward_scale"] = cfg.reward_scale;
    j["penalty_td"] = cfg.penalty_td;
    j["actor_reg"] = cfg.actor_reg;
    j["actor_softmax_t"] = cfg.actor_softmax_t;
    return j;
}

inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace mdcw
