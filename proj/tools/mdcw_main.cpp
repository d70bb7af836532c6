#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdcw/mdcw.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_usage = 2;
constexpr int exit_no_path = 3;
constexpr int exit_budget = 4;

std::string default_out_dir() {
    const char* env = std::getenv("MDCW_OUT_DIR");
    return env && *env ? env : ".";
}

struct ScenarioArgs {
    std::string path;
    int builtin = -1;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd, bool with_seed = true) {
        auto* p = cmd->add_option("scenario", path, "scenario JSON file");
        auto* b = cmd->add_option("--builtin", builtin, "built-in scenario with this many pre-added key policies")
                      ->check(CLI::Range(0, 3));
        p->excludes(b);
        b->excludes(p);
        if (with_seed)
            cmd->add_option("--scenario-seed", seed, "seed selecting which key policies are pre-added");
    }

    mdcw::CyberScenario load() const {
        if (builtin >= 0) return mdcw::builtin_scenario(builtin, seed);
        if (path.empty()) throw CLI::ValidationError("scenario", "provide a scenario file or --builtin");
        return mdcw::load_scenario(path);
    }
};

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string stats_csv(const mdcw::TrainStats& stats) {
    std::string out = "episode,total_reward,length,success\n";
    char line[96];
    for (std::size_t i = 0; i < stats.length.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.0f,%d,%s\n", i + 1, stats.total_reward[i],
                      stats.length[i], stats.success[i] ? "true" : "false");
        out += line;
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

int run_validate(const std::string& path) {
    try {
        mdcw::load_scenario(path);
    } catch (const mdcw::ValidationError& e) {
        std::cout << e.what() << "\n";
        return exit_validation;
    } catch (const mdcw::ParseError& e) {
        std::cout << "parse error: " << e.what() << "\n";
        return exit_usage;
    }
    std::cout << "ok\n";
    return exit_ok;
}

int run_oracle(const ScenarioArgs& sa, std::size_t max_states) {
    mdcw::Environment env(sa.load());
    std::optional<mdcw::OraclePath> path;
    try {
        path = mdcw::shortest_attack_path(env, max_states);
    } catch (const mdcw::StateBudgetExceeded& e) {
        std::cout << e.what() << "\n";
        return exit_budget;
    }
    if (!path) {
        std::cout << "no attack path found\n";
        return exit_no_path;
    }
    std::cout << "length: " << path->length << "\n";
    for (std::size_t i = 0; i < path->actions.size(); ++i)
        std::cout << "  " << i + 1 << ". " << env.describe(path->actions[i]) << "\n";
    return exit_ok;
}

int run_train(const ScenarioArgs& sa, const mdcw::AgentConfig& cfg, std::uint64_t seed,
              const std::string& out_dir) {
    mdcw::CyberScenario scenario = sa.load();
    mdcw::Environment env(scenario);
    std::filesystem::create_directories(out_dir);

    std::mt19937_64 scratch(0);
    mdcw::AgentNets nets(env.state_dim(), env.action_count(), scratch);
    mdcw::TrainStats stats = mdcw::train_agent(env, cfg, seed, &nets);

    const std::filesystem::path dir(out_dir);
    write_file(dir / "stats.csv", stats_csv(stats));
    mdcw::save_checkpoint((dir / "checkpoint.bin").string(),
                          {{"actor", &nets.actor.params},
                           {"actor_target", &nets.actor_target.params},
                           {"critic", &nets.critic.params},
                           {"critic_target", &nets.critic_target.params}});

    int successes = 0;
    for (bool s : stats.success) successes += s ? 1 : 0;
    nlohmann::ordered_json manifest;
    manifest["seed"] = seed;
    manifest["scenario_hash"] = mdcw::fnv1a(mdcw::scenario_to_json(scenario));
    manifest["config"] = mdcw::agent_config_to_json(cfg);
    manifest["episodes"] = static_cast<int>(stats.length.size());
    manifest["successes"] = successes;
    manifest["first_success_episode"] = stats.first_success_episode;
    manifest["best_length"] = stats.best_length;
    manifest["wall_seconds"] = stats.wall_seconds;
    manifest["timestamp"] = timestamp_utc();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "episodes: " << stats.length.size() << "  successes: " << successes
              << "  first_success: " << stats.first_success_episode
              << "  best_length: " << stats.best_length << "\n"
              << "wrote " << (dir / "stats.csv").string() << "\n";
    return exit_ok;
}

int run_sweep(const std::vector<int>& policies, int runs, std::uint64_t seed, const std::string& mode,
              const mdcw::AgentConfig& cfg, std::size_t max_states, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::string csv = "p,run,length,sec\n";
    for (int p : policies) {
        double total = 0.0;
        for (int run = 0; run < runs; ++run) {
            const std::uint64_t run_seed = mdcw::hash_mix(mdcw::hash_mix(seed, p), run);
            mdcw::CyberScenario scenario = mdcw::builtin_scenario(p, run_seed);
            int length = mdcw::failure_length;
            if (mode == "oracle") {
                mdcw::Environment env(scenario);
                auto path = mdcw::shortest_attack_path(env, max_states);
                if (path) length = path->length;
            } else {
                mdcw::Environment env(scenario);
                mdcw::TrainStats stats = mdcw::train_agent(env, cfg, run_seed);
                if (stats.best_length > 0) length = stats.best_length;
            }
            total += length;
            csv += std::to_string(p) + "," + std::to_string(run) + "," + std::to_string(length) + ",\n";
        }
        const double mean = total / runs;
        char line[64];
        std::snprintf(line, sizeof line, "%d,mean,,%g\n", p, mean);
        csv += line;
        std::cout << "p=" << p << " mean length " << mean << "\n";
    }
    write_file(std::filesystem::path(out_dir) / "sweep.csv", csv);
    std::cout << "wrote " << (std::filesystem::path(out_dir) / "sweep.csv").string() << "\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-domain cyberspace attack-path simulator and weakness analyzer"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "check a scenario file");
    std::string validate_path;
    validate->add_option("scenario", validate_path, "scenario JSON file")->required();

    auto* oracle = app.add_subcommand("oracle", "exact shortest attack path");
    ScenarioArgs oracle_sa;
    oracle_sa.attach(oracle);
    std::size_t max_states = 1000000;
    oracle->add_option("--max-states", max_states, "reachable-state budget");

    auto* train = app.add_subcommand("train", "train the agent, write stats/checkpoint/manifest");
    ScenarioArgs train_sa;
    train_sa.attach(train);
    std::uint64_t train_seed = 0;
    int train_episodes = -1;
    std::string train_config, train_out = default_out_dir();
    train->add_option("--seed", train_seed, "training seed");
    train->add_option("--episodes", train_episodes, "override config episode count");
    train->add_option("--config", train_config, "agent config JSON file");
    train->add_option("--out", train_out, "output directory");

    auto* sweep = app.add_subcommand("sweep", "policy sweep over the built-in scenario");
    std::vector<int> sweep_policies{0, 1, 2, 3};
    int sweep_runs = 1;
    std::uint64_t sweep_seed = 0;
    std::string sweep_mode = "oracle", sweep_config, sweep_out = default_out_dir();
    std::size_t sweep_max_states = 1000000;
    sweep->add_option("--policies", sweep_policies, "pre-added key-policy counts")
        ->delimiter(',')
        ->check(CLI::Range(0, 3));
    sweep->add_option("--runs", sweep_runs, "evaluations per policy count")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", sweep_seed, "sweep seed");
    sweep->add_option("--mode", sweep_mode, "oracle or rl")->check(CLI::IsMember({"oracle", "rl"}));
    sweep->add_option("--config", sweep_config, "agent config JSON file (rl mode)");
    sweep->add_option("--max-states", sweep_max_states, "reachable-state budget");
    sweep->add_option("--out", sweep_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*validate) return run_validate(validate_path);
        if (*oracle) return run_oracle(oracle_sa, max_states);
        if (*train) {
            mdcw::AgentConfig cfg;
            if (!train_config.empty()) cfg = mdcw::load_agent_config(train_config);
            if (train_episodes >= 0) cfg.episodes = train_episodes;
            return run_train(train_sa, cfg, train_seed, train_out);
        }
        if (*sweep) {
            mdcw::AgentConfig cfg;
            if (!sweep_config.empty()) cfg = mdcw::load_agent_config(sweep_config);
            return run_sweep(sweep_policies, sweep_runs, sweep_seed, sweep_mode, cfg, sweep_max_states,
                             sweep_out);
        }
    } catch (const mdcw::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return exit_validation;
    } catch (const mdcw::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return exit_usage;
    } catch (const mdcw::StateBudgetExceeded& e) {
        std::cerr << e.what() << "\n";
        return exit_budget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
