#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"

using namespace mdcw;

namespace {

ReplayRecord tag_record(int tag) {
    ReplayRecord r;
    r.s = Bits(4);
    r.s_next = Bits(4);
    r.h = nn::Vec::Zero(2);
    r.h_next = nn::Vec::Zero(2);
    r.a_index = tag;
    return r;
}

AgentConfig tiny_config() {
    AgentConfig cfg;
    cfg.episodes = 3;
    cfg.max_steps = 15;
    cfg.batch_m = 8;
    cfg.warmup_batches = 2;
    cfg.replay_capacity = 1000;
    return cfg;
}

} // namespace

TEST_CASE("replay buffer overwrites the oldest record when full") {
    ReplayBuffer buf(3);
    CHECK(buf.capacity() == 3);
    for (int i = 0; i < 5; ++i) buf.append(tag_record(i));
    REQUIRE(buf.size() == 3);
    std::vector<int> tags;
    for (std::size_t i = 0; i < buf.size(); ++i) tags.push_back(buf[i].a_index);
    std::sort(tags.begin(), tags.end());
    CHECK(tags == std::vector<int>{2, 3, 4}); // 0 and 1 were evicted first
}

TEST_CASE("action selection takes the best feasible score") {
    Environment env(builtin_scenario(0));
    AttackerState st = env.reset();
    auto feasible = env.feasible_actions(st); // Move(P1..P4), indices 1..4
    nn::Vec proto = nn::Vec::Zero(env.action_count());
    proto(0) = 0.9; // infeasible Move(P0) scores highest
    proto(2) = 0.4;
    proto(3) = 0.7;
    Selection sel = select_action(proto, feasible);
    CHECK(sel.raw_index == 0);
    CHECK(sel.chosen.global_index == 3);

    SECTION("ties resolve to the lowest global index") {
        nn::Vec flat = nn::Vec::Constant(env.action_count(), 0.25);
        Selection tied = select_action(flat, feasible);
        CHECK(tied.raw_index == 0);
        CHECK(tied.chosen.global_index == feasible.front().global_index);
    }
    SECTION("an empty feasible set is an error") {
        CHECK_THROWS_AS(select_action(proto, {}), EmptyFeasibleSet);
    }
}

TEST_CASE("record_step stores a penalty record for infeasible raw choices") {
    Environment env(builtin_scenario(0));
    AgentConfig cfg;
    AttackerState st = env.reset();
    Bits s = env.encode_bits(st);
    StepOutcome out = env.apply_action(st, env.actions()[1]); // Move(P1)
    Bits s2 = env.encode_bits(out.next);
    nn::Vec h = nn::Vec::Zero(3), h2 = nn::Vec::Ones(3);

    SECTION("feasible raw choice stores one record") {
        ReplayBuffer buf(10);
        record_step(buf, s, h, 1, true, 1, out.reward, s2, h2, out.done, cfg);
        CHECK(buf.size() == 1);
        CHECK(buf[0].feasible);
        CHECK(buf[0].a_index == 1);
    }
    SECTION("infeasible raw choice appends the penalty record") {
        ReplayBuffer buf(10);
        record_step(buf, s, h, 0, false, 1, out.reward, s2, h2, out.done, cfg);
        REQUIRE(buf.size() == 2);
        const ReplayRecord& real = buf[0];
        CHECK(real.a_index == 1);
        CHECK(real.s_next == s2);
        CHECK(real.feasible);

        const ReplayRecord& pen = buf[1];
        CHECK(pen.a_index == 0);            // the raw argmax
        CHECK(pen.reward == -10000.0);      // fixed infeasibility penalty
        CHECK(pen.s_next == pen.s);         // the state does not advance
        CHECK(pen.s == s);
        CHECK_FALSE(pen.done);
        CHECK_FALSE(pen.feasible);
        CHECK((pen.h_next - pen.h).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("train_step needs at least one batch of replay") {
    Environment env(builtin_scenario(3));
    AgentConfig cfg = tiny_config();
    std::mt19937_64 rng(1);
    AgentNets nets(env.state_dim(), env.action_count(), rng);
    nn::AdamState oa(nets.actor.params), oc(nets.critic.params);
    ReplayBuffer buf(100);
    CHECK_THROWS_AS(train_step(nets, env, buf, cfg, rng, oa, oc), InsufficientReplay);
}

TEST_CASE("train_step is deterministic and moves the online networks") {
    Environment env(builtin_scenario(3));
    AgentConfig cfg = tiny_config();

    auto run = [&](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        AgentNets nets(env.state_dim(), env.action_count(), rng);
        nn::AdamState oa(nets.actor.params), oc(nets.critic.params);
        ReplayBuffer buf(100);
        Exploration expl{0.3, 0.5};
        run_episode(env, nets, buf, cfg, rng, true, expl); // fill replay, no training
        double loss = train_step(nets, env, buf, cfg, rng, oa, oc);
        return std::make_pair(loss, nets.critic.params);
    };

    auto [loss_a, params_a] = run(9);
    auto [loss_b, params_b] = run(9);
    CHECK(loss_a == loss_b);
    for (std::size_t i = 0; i < params_a.entries().size(); ++i)
        CHECK(params_a.entries()[i].second == params_b.entries()[i].second);

    auto [loss_c, params_c] = run(10);
    CHECK(std::isfinite(loss_c));
    (void)params_c;

    // The online critic moved away from its target copy.
    std::mt19937_64 rng(9);
    AgentNets fresh(env.state_dim(), env.action_count(), rng);
    bool changed = false;
    for (std::size_t i = 0; i < params_a.entries().size(); ++i)
        changed = changed ||
                  params_a.entries()[i].second != fresh.critic.params.entries()[i].second;
    CHECK(changed);
}

TEST_CASE("target networks start as copies and trail the online ones") {
    Environment env(builtin_scenario(3));
    std::mt19937_64 rng(2);
    AgentNets nets(env.state_dim(), env.action_count(), rng);
    for (std::size_t i = 0; i < nets.actor.params.entries().size(); ++i)
        CHECK(nets.actor.params.entries()[i].second ==
              nets.actor_target.params.entries()[i].second);
    for (std::size_t i = 0; i < nets.critic.params.entries().size(); ++i)
        CHECK(nets.critic.params.entries()[i].second ==
              nets.critic_target.params.entries()[i].second);

    AgentConfig cfg = tiny_config();
    cfg.tau = 0.01;
    nn::AdamState oa(nets.actor.params), oc(nets.critic.params);
    ReplayBuffer buf(1000);
    Exploration expl{0.3, 0.5};
    run_episode(env, nets, buf, cfg, rng, true, expl);
    train_step(nets, env, buf, cfg, rng, oa, oc);
    bool target_moved = false, target_equal_online = true;
    for (std::size_t i = 0; i < nets.critic.params.entries().size(); ++i) {
        const nn::Mat& online = nets.critic.params.entries()[i].second;
        const nn::Mat& target = nets.critic_target.params.entries()[i].second;
        target_moved = target_moved || target != online;
        target_equal_online = target_equal_online && target == online;
    }
    CHECK(target_moved);          // tau < 1 keeps the target distinct
    CHECK_FALSE(target_equal_online);
}

TEST_CASE("a scripted optimal episode succeeds at the oracle length") {
    Environment env(builtin_scenario(3));
    std::mt19937_64 rng(4);
    AgentNets nets(env.state_dim(), env.action_count(), rng);
    ReplayBuffer buf(1000);
    AgentConfig cfg;
    cfg.max_steps = 50;
    std::vector<int> script =
        testutil::action_indices(env, testutil::optimal_script_all_policies());
    EpisodeSummary sum = run_episode(env, nets, buf, cfg, rng, false, Exploration{}, nullptr,
                                     nullptr, &script);
    CHECK(sum.success);
    CHECK(sum.length == 11);
    CHECK(sum.success_step == 11);
    CHECK(sum.total_reward == 10700.0); // route skips both firewall-manager milestones
    CHECK(buf.size() >= script.size()); // transitions recorded for later training
}

TEST_CASE("evaluation episodes leave the networks untouched") {
    Environment env(builtin_scenario(3));
    std::mt19937_64 rng(6);
    AgentNets nets(env.state_dim(), env.action_count(), rng);
    nn::ParamSet actor_before = nets.actor.params;
    nn::ParamSet critic_before = nets.critic.params;
    ReplayBuffer buf(1000);
    AgentConfig cfg;
    cfg.max_steps = 40;
    run_episode(env, nets, buf, cfg, rng, false, Exploration{});
    for (std::size_t i = 0; i < actor_before.entries().size(); ++i)
        CHECK(nets.actor.params.entries()[i].second == actor_before.entries()[i].second);
    for (std::size_t i = 0; i < critic_before.entries().size(); ++i)
        CHECK(nets.critic.params.entries()[i].second == critic_before.entries()[i].second);
}

TEST_CASE("untrained policies almost never stumble into the goal") {
    Environment env(builtin_scenario(0));
    AgentConfig cfg;
    cfg.max_steps = 50;
    int failures = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        std::mt19937_64 rng(seed);
        AgentNets nets(env.state_dim(), env.action_count(), rng);
        ReplayBuffer buf(10000);
        Exploration expl{0.2, 1.0}; // uniform over feasible actions
        EpisodeSummary sum = run_episode(env, nets, buf, cfg, rng, true, expl);
        failures += sum.success ? 0 : 1;
    }
    CHECK(failures >= 54); // at most a handful of lucky walks
}

TEST_CASE("train_agent is reproducible and respects episode count") {
    Environment env(builtin_scenario(3));
    AgentConfig cfg = tiny_config();

    TrainStats a = train_agent(env, cfg, 77);
    TrainStats b = train_agent(env, cfg, 77);
    REQUIRE(a.length.size() == 3);
    CHECK(a.total_reward == b.total_reward);
    CHECK(a.length == b.length);
    CHECK(a.success == b.success);
    CHECK(a.first_success_episode == b.first_success_episode);
    CHECK(a.best_length == b.best_length);

    TrainStats c = train_agent(env, cfg, 78);
    CHECK(c.length.size() == 3);

    cfg.episodes = 0;
    TrainStats empty = train_agent(env, cfg, 77);
    CHECK(empty.length.empty());
    CHECK(empty.first_success_episode == -1);
    CHECK(empty.best_length == -1);
}

TEST_CASE("agent config defaults satisfy the documented ranges") {
    AgentConfig cfg;
    CHECK(cfg.gamma > 0.0);
    CHECK(cfg.gamma <= 1.0);
    CHECK(cfg.tau > 0.0);
    CHECK(cfg.tau <= 1.0);
    CHECK(cfg.batch_m >= 1);
    CHECK(cfg.r_infeasible == -10000.0);
    CHECK(cfg.max_steps <= Environment::episode_cap);
}
