// Acceptance harness: exercises every published guarantee end to end and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <mdcw/mdcw.hpp>

#include "helpers.hpp"

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("criterion %2d: %s — %s\n", criterion, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// The tuned desk-scale training configuration used for the learning runs.
mdcw::AgentConfig learning_config() {
    mdcw::AgentConfig cfg;
    cfg.episodes = 1000;
    cfg.max_steps = 120;
    cfg.batch_m = 32;
    cfg.warmup_batches = 10;
    cfg.gamma = 0.95;
    cfg.reward_scale = 0.001;
    cfg.penalty_td = -1.0;
    cfg.lr_actor = 3e-4;
    cfg.actor_reg = 0.01;
    cfg.actor_softmax_t = 0.1;
    cfg.epsilon_random = 0.3;
    cfg.epsilon_random_end = 0.01;
    cfg.noise_sigma_start = 0.3;
    cfg.noise_sigma_end = 0.01;
    return cfg;
}

// Wide-exploration configuration for the full-length baseline-scenario runs.
mdcw::AgentConfig baseline_config() {
    mdcw::AgentConfig cfg = learning_config();
    cfg.episodes = 5;
    cfg.max_steps = 10000;
    cfg.train_every = 8;
    cfg.epsilon_random = 0.3;
    cfg.epsilon_random_end = -1.0; // flat schedule
    cfg.noise_sigma_start = 0.3;
    cfg.noise_sigma_end = 0.3;
    return cfg;
}

double window_mean(const std::vector<double>& xs, std::size_t begin, std::size_t count) {
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += xs[begin + i];
    return sum / static_cast<double>(count);
}

int ulp_distance(double a, double b) {
    if (a == b) return 0;
    int steps = 0;
    double x = a;
    while (x != b && steps <= 4) {
        x = std::nextafter(x, b);
        ++steps;
    }
    return steps;
}

} // namespace

int main() {
    // ---- 1. six-stage scripted attack run ---------------------------------
    {
        auto t0 = Clock::now();
        mdcw::Environment env(mdcw::builtin_scenario(0));
        testutil::ReplayResult res = testutil::replay(env, testutil::six_stage_script());
        const double secs = seconds_since(t0);
        std::ostringstream d;
        d << "reward " << res.total_reward << " in " << res.steps << " steps, " << secs << " s";
        report(1, res.all_feasible && res.done && res.total_reward == 11000.0 && secs < 1.0,
               d.str());
    }

    // ---- 2. oracle shortest-path lengths over all key-policy subsets ------
    int oracle_best = 0; // shortest length with every key policy pre-added
    {
        auto t0 = Clock::now();
        const int expected[8] = {14, 11, 14, 11, 14, 11, 14, 11};
        int lengths[8] = {0};
        bool pinned = true;
        for (unsigned mask = 0; mask < 8; ++mask) {
            mdcw::Environment env(testutil::builtin_with_policy_subset(mask));
            auto path = mdcw::shortest_attack_path(env);
            lengths[mask] = path ? path->length : -1;
            pinned = pinned && lengths[mask] == expected[mask];
        }
        bool monotone = true;
        for (unsigned a = 0; a < 8; ++a)
            for (unsigned b = 0; b < 8; ++b)
                if ((a & b) == a && lengths[a] < lengths[b]) monotone = false;
        const double secs = seconds_since(t0);
        oracle_best = lengths[7];
        std::ostringstream d;
        d << "lengths";
        for (int l : lengths) d << " " << l;
        d << ", " << secs << " s";
        report(2, pinned && monotone && lengths[0] > lengths[7] && secs < 10.0, d.str());
    }

    // ---- 3 & 4. learning on the hardened scenario, soundness vs oracle ----
    {
        auto t0 = Clock::now();
        const mdcw::AgentConfig cfg = learning_config();
        mdcw::Environment env(mdcw::builtin_scenario(3));

        int seeds_learning = 0, seeds_with_success = 0, seeds_near_optimal = 0;
        bool sound = true;
        std::ostringstream per_seed;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            mdcw::TrainStats stats = mdcw::train_agent(env, cfg, seed);
            const std::size_t n = stats.total_reward.size();
            const double first = window_mean(stats.total_reward, 0, 50);
            const double last = window_mean(stats.total_reward, n - 50, 50);
            const bool any_success = stats.first_success_episode >= 0;
            if (any_success) ++seeds_with_success;
            if (last > first && any_success) ++seeds_learning;
            if (any_success && stats.best_length <= 1.5 * oracle_best) ++seeds_near_optimal;
            for (std::size_t i = 0; i < n; ++i)
                if (stats.success[i] && stats.length[i] < oracle_best) sound = false;
            per_seed << (seed > 1 ? " " : "") << "s" << seed << ":best="
                     << stats.best_length << (last > first ? "+" : "-");
        }
        const double secs = seconds_since(t0);

        // full-length episodes on the baseline scenario: one of three seeds
        int baseline_successes = 0;
        const mdcw::AgentConfig bcfg = baseline_config();
        mdcw::Environment base_env(mdcw::builtin_scenario(0));
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            mdcw::TrainStats stats = mdcw::train_agent(base_env, bcfg, seed);
            if (stats.first_success_episode >= 0) ++baseline_successes;
        }

        std::ostringstream d3;
        d3 << seeds_learning << "/10 seeds improve and succeed [" << per_seed.str() << "], "
           << baseline_successes << "/3 full-length baseline seeds succeed, " << secs
           << " s for the ten runs";
        report(3, seeds_learning >= 8 && baseline_successes >= 1 && secs < 1800.0, d3.str());

        std::ostringstream d4;
        d4 << "successful lengths all >= " << oracle_best << ": " << (sound ? "yes" : "no") << ", "
           << seeds_near_optimal << "/10 seeds reach <= " << 1.5 * oracle_best;
        report(4, sound && seeds_near_optimal >= 5, d4.str());
    }

    // ---- 5. soft target updates match the convex blend exactly ------------
    {
        std::mt19937_64 rng(99);
        bool ok = true;
        int worst = 0;
        for (double tau : {0.0, 0.01, 0.1, 1.0}) {
            mdcw::nn::PolicyNet online(7, 5), target(7, 5);
            online.init(rng);
            target.init(rng);
            mdcw::nn::ParamSet before = target.params;
            mdcw::nn::soft_update(target.params, online.params, tau);
            for (std::size_t t = 0; t < target.params.entries().size(); ++t) {
                const auto& updated = target.params.entries()[t].second;
                const auto& o = online.params.entries()[t].second;
                const auto& b = before.entries()[t].second;
                for (Eigen::Index i = 0; i < updated.size(); ++i) {
                    const double want = tau * o(i) + (1.0 - tau) * b(i);
                    const int dist = ulp_distance(updated(i), want);
                    worst = std::max(worst, dist);
                    if (dist > 1) ok = false;
                }
            }
        }
        std::ostringstream d;
        d << "max deviation " << worst << " ulp over tau in {0, 0.01, 0.1, 1}";
        report(5, ok, d.str());
    }

    // ---- 6. analytic gradients vs central finite differences --------------
    {
        std::mt19937_64 rng(7);
        mdcw::nn::PolicyNet pol(6, 4, /*hidden=*/8, /*fc=*/10); // 604 parameters
        pol.init(rng);
        mdcw::nn::QNet q(6 + 4, /*fc=*/12); // 301 parameters
        q.init(rng);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        mdcw::nn::Mat s(6, 3), h(pol.hidden_dim(), 3);
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = u(rng) > 0 ? 1.0 : 0.0;
        for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = u(rng);

        // policy gradients through the GRU step, via a fixed linear readout
        mdcw::nn::Mat w(4, 3);
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = u(rng);
        auto policy_loss = [&](const mdcw::nn::ParamSet&) {
            mdcw::nn::PolicyNet::Cache c;
            return pol.forward(s, h, c).cwiseProduct(w).sum();
        };
        mdcw::nn::ParamSet pol_grads = pol.params.shaped_zeros();
        {
            mdcw::nn::PolicyNet::Cache c;
            mdcw::nn::Mat proto = pol.forward(s, h, c);
            (void)proto;
            pol.backward(c, w, pol_grads);
        }
        auto rep_pol = mdcw::nn::grad_check(pol.params, pol_grads, policy_loss);

        // critic gradients through the TD regression loss
        mdcw::nn::Mat qin(6 + 4, 3);
        for (Eigen::Index i = 0; i < qin.size(); ++i) qin(i) = u(rng) > 0 ? 1.0 : 0.0;
        mdcw::nn::RowVec y(3);
        y << 0.3, -1.2, 0.8;
        mdcw::nn::ParamSet q_grads = q.params.shaped_zeros();
        mdcw::nn::critic_loss(q, qin, y, q_grads);
        auto rep_q = mdcw::nn::grad_check(q.params, q_grads, [&](const mdcw::nn::ParamSet&) {
            mdcw::nn::ParamSet scratch = q.params.shaped_zeros();
            return mdcw::nn::critic_loss(q, qin, y, scratch);
        });

        // deterministic policy gradient objective, with the deployed
        // normalization and regularization switched on
        mdcw::nn::ParamSet a_grads = pol.params.shaped_zeros();
        mdcw::nn::actor_gradient(pol, q, s, h, a_grads, 0.01, 0.1);
        auto rep_a = mdcw::nn::grad_check(pol.params, a_grads, [&](const mdcw::nn::ParamSet&) {
            mdcw::nn::ParamSet scratch = pol.params.shaped_zeros();
            return mdcw::nn::actor_gradient(pol, q, s, h, scratch, 0.01, 0.1);
        });

        std::ostringstream d;
        d << "max relative errors: policy " << rep_pol.max_rel_err << ", critic "
          << rep_q.max_rel_err << ", actor objective " << rep_a.max_rel_err;
        report(6, rep_pol.ok && rep_q.ok && rep_a.ok, d.str());
    }

    // ---- 7. weakness metric arithmetic -------------------------------------
    {
        using mdcw::AttackSource;
        std::vector<mdcw::AttackRecord> simple = {{"u0", AttackSource::Oracle, 6, true},
                                                  {"u1", AttackSource::Oracle, 10, true}};
        std::vector<mdcw::AttackRecord> with_fail = {
            {"u0", AttackSource::Rl, 6, true},
            {"u1", AttackSource::Rl, 10, true},
            {"u2", AttackSource::Rl, mdcw::failure_length, false}};
        const double a = mdcw::sec_metric(simple);
        const double b = mdcw::sec_metric(with_fail);
        std::ostringstream d;
        d << "sec([6,10]) = " << a << ", sec([6,10,fail]) = " << b;
        report(7, a == 8.0 && b == (6.0 + 10.0 + 10000.0) / 3.0, d.str());
    }

    // ---- 8. replay penalty augmentation ------------------------------------
    {
        mdcw::Environment env(mdcw::builtin_scenario(0));
        mdcw::AgentConfig cfg;
        cfg.max_steps = 4;
        std::mt19937_64 rng(3);
        mdcw::AgentNets nets(env.state_dim(), env.action_count(), rng);
        mdcw::ReplayBuffer buf(64);

        // raw argmax forced onto an action that is infeasible from the start
        const int blocked =
            testutil::find_action(env, "Dominate(FW1_manager)").global_index;
        const std::vector<int> script = {blocked};
        mdcw::run_episode(env, nets, buf, cfg, rng, false, {}, nullptr, nullptr, &script);

        int penalties = 0;
        const mdcw::ReplayRecord* pen = nullptr;
        for (std::size_t i = 0; i < buf.size(); ++i)
            if (!buf[i].feasible) {
                ++penalties;
                pen = &buf[i];
            }
        const bool ok = buf.size() == 2 && penalties == 1 && pen && pen->a_index == blocked &&
                        pen->reward == -10000.0 && pen->s_next == pen->s && !pen->done;
        std::ostringstream d;
        d << buf.size() << " records, " << penalties
          << " penalty record(s) with reward " << (pen ? pen->reward : 0.0)
          << " and unchanged state";
        report(8, ok, d.str());
    }

    // ---- 9. feasibility/masking equivalence over the reachable space ------
    {
        mdcw::Environment env(mdcw::builtin_scenario(0));
        auto states = mdcw::enumerate_reachable_states(env);
        bool equivalent = true;
        bool injective = true;
        bool sized = true;
        std::set<std::vector<double>> seen;
        for (const auto& bits : states) {
            mdcw::AttackerState st = env.decode_bits(bits);
            std::set<int> feas;
            for (const auto& a : env.feasible_actions(st)) feas.insert(a.global_index);
            for (const auto& act : env.actions()) {
                const bool listed = feas.count(act.global_index) > 0;
                const bool applies = env.apply_action(st, act).feasible;
                if (listed != applies) equivalent = false;
            }
            std::vector<double> v = env.encode_state(st);
            if (v.size() != 106) sized = false;
            if (!seen.insert(std::move(v)).second) injective = false;
        }
        std::ostringstream d;
        d << states.size() << " reachable states, equivalence " << (equivalent ? "holds" : "broken")
          << ", encoding " << (injective ? "injective" : "collides") << ", dim "
          << (sized ? "106" : "wrong");
        report(9, states.size() == 3010 && equivalent && injective && sized, d.str());
    }

    // ---- 10. byte-identical stats for identical seeds ----------------------
    {
        mdcw::Environment env(mdcw::builtin_scenario(3));
        mdcw::AgentConfig cfg = learning_config();
        cfg.episodes = 12;
        auto csv = [&](const mdcw::TrainStats& stats) {
            std::string out = "episode,total_reward,length,success\n";
            char line[96];
            for (std::size_t i = 0; i < stats.length.size(); ++i) {
                std::snprintf(line, sizeof line, "%zu,%.0f,%d,%s\n", i + 1, stats.total_reward[i],
                              stats.length[i], stats.success[i] ? "true" : "false");
                out += line;
            }
            return out;
        };
        const std::string a = csv(mdcw::train_agent(env, cfg, 21));
        const std::string b = csv(mdcw::train_agent(env, cfg, 21));
        std::ostringstream d;
        d << "two seed-21 runs, " << a.size() << " bytes each, "
          << (a == b ? "identical" : "different");
        report(10, !a.empty() && a == b, d.str());
    }

    if (failures == 0) std::printf("all criteria passed\n");
    return failures;
}
