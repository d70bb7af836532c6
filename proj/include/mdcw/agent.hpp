#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "mdcw/bits.hpp"
#include "mdcw/env.hpp"
#include "mdcw/nn.hpp"

namespace mdcw {

struct EmptyFeasibleSet : std::runtime_error {
    EmptyFeasibleSet() : std::runtime_error("no feasible action to select from") {}
};
struct InsufficientReplay : std::runtime_error {
    InsufficientReplay() : std::runtime_error("replay buffer smaller than one batch") {}
};

// One stored transition. States are kept in packed bit form and expanded to
// dense vectors only when a batch is assembled.
struct ReplayRecord {
    Bits s, s_next;
    nn::Vec h, h_next;
    int a_index = -1;
    double reward = 0.0;
    bool done = false;
    bool feasible = true;
};

class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void append(ReplayRecord rec) {
        if (capacity_ == 0) return;
        if (store_.size() < capacity_) {
            store_.push_back(std::move(rec));
        } else {
            store_[next_] = std::move(rec); // overwrite oldest
            next_ = (next_ + 1) % capacity_;
        }
    }

    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }
    const ReplayRecord& operator[](std::size_t i) const { return store_[i]; }

  private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<ReplayRecord> store_;
};

struct AgentConfig {
    double gamma = 0.99;
    double tau = 0.01;
    double lr_actor = 1e-4;
    double lr_critic = 1e-3;
    int batch_m = 64;
    std::size_t replay_capacity = 100000;
    double noise_sigma_start = 0.2;
    double noise_sigma_end = 0.01;
    double epsilon_random = 0.05;
    double epsilon_random_end = -1.0; // <0: keep epsilon_random flat all run
    double r_infeasible = -10000.0;
    int episodes = 500;
    int max_steps = 10000;
    int train_every = 1;     // environment steps per gradient step
    int warmup_batches = 10; // start training once buffer >= warmup_batches * batch_m
    double reward_scale = 1.0; // applied to rewards inside TD targets only
    double penalty_td = 0.0;   // <0: TD-target reward used for penalty records
                               // instead of r_infeasible * reward_scale
    double actor_reg = 0.0;    // proto-action off-center regularization weight
    double actor_softmax_t = 0.0; // >0: softmax temperature in the actor objective
};

// The four networks of the scheme: online and target actor/critic. Targets
// start as copies of the online networks.
struct AgentNets {
    nn::PolicyNet actor;
    nn::PolicyNet actor_target;
    nn::QNet critic;
    nn::QNet critic_target;

    AgentNets(int state_dim, int action_dim, std::mt19937_64& rng)
        : actor(state_dim, action_dim),
          actor_target(state_dim, action_dim),
          critic(state_dim + action_dim),
          critic_target(state_dim + action_dim) {
        actor.init(rng);
        critic.init(rng);
        actor_target.params = actor.params;
        critic_target.params = critic.params;
    }
};

struct Selection {
    ActionInstance chosen;
    int raw_index = -1;
};

// Multi-domain action selection: the proto-action scores every canonical
// action; the executed action is the feasible one with the highest score
// (masked argmax). Ties resolve to the lowest global index.
inline Selection select_action(const nn::Vec& proto, const std::vector<ActionInstance>& feasible) {
    if (feasible.empty()) throw EmptyFeasibleSet();
    Selection sel;
    Eigen::Index raw = 0;
    proto.maxCoeff(&raw); // lowest index on ties
    sel.raw_index = static_cast<int>(raw);
    sel.chosen = feasible.front();
    double best = proto(sel.chosen.global_index);
    for (const auto& act : feasible)
        if (proto(act.global_index) > best) {
            best = proto(act.global_index);
            sel.chosen = act;
        }
    return sel;
}

// Stores the executed transition and, when the raw argmax was infeasible, an
// additional penalty record teaching the critic to avoid that choice.
inline void record_step(ReplayBuffer& buf, const Bits& s, const nn::Vec& h, int raw_index,
                        bool raw_feasible, int chosen_index, double reward, const Bits& s_next,
                        const nn::Vec& h_next, bool done, const AgentConfig& cfg) {
    buf.append({s, s_next, h, h_next, chosen_index, reward, done, true});
    if (!raw_feasible)
        buf.append({s, s, h, h, raw_index, cfg.r_infeasible, false, false});
}

namespace detail {

inline nn::Vec state_vec(const Environment& env, const Bits& bits) {
    nn::Vec x = nn::Vec::Zero(env.state_dim());
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits.test(i)) x(static_cast<Eigen::Index>(i)) = 1.0;
    return x;
}

} // namespace detail

// One uniform minibatch update of critic (TD regression toward the target
// networks) and actor (deterministic policy gradient), then soft target
// refresh. Returns the critic loss.
inline double train_step(AgentNets& nets, const Environment& env, const ReplayBuffer& buf,
                         const AgentConfig& cfg, std::mt19937_64& rng, nn::AdamState& opt_actor,
                         nn::AdamState& opt_critic) {
    const int m = cfg.batch_m;
    if (buf.size() < static_cast<std::size_t>(m)) throw InsufficientReplay();
    const int sd = nets.actor.state_dim();
    const int k = nets.actor.action_dim();
    const int hd = nets.actor.hidden_dim();

    nn::Mat S(sd, m), Snext(sd, m), H(hd, m), Hnext(hd, m);
    nn::Mat A = nn::Mat::Zero(k, m);
    nn::RowVec r(m), not_done(m);
    std::vector<const ReplayRecord*> recs(static_cast<std::size_t>(m));
    std::uniform_int_distribution<std::size_t> pick(0, buf.size() - 1);
    for (int j = 0; j < m; ++j) {
        const ReplayRecord& rec = buf[pick(rng)];
        recs[static_cast<std::size_t>(j)] = &rec;
        S.col(j) = detail::state_vec(env, rec.s);
        Snext.col(j) = detail::state_vec(env, rec.s_next);
        H.col(j) = rec.h;
        Hnext.col(j) = rec.h_next;
        A(rec.a_index, j) = 1.0;
        r(j) = (!rec.feasible && cfg.penalty_td < 0.0) ? cfg.penalty_td
                                                       : rec.reward * cfg.reward_scale;
        // Terminal transitions do not bootstrap; neither do penalty records,
        // whose argmax action would otherwise feed its own penalty back into
        // the target and contract every value toward penalty/(1-gamma).
        not_done(j) = (rec.done || !rec.feasible) ? 0.0 : 1.0;
    }

    // y_j = r_j + gamma * (1 - done_j) * Q'(s'_j, mu'(s'_j, h'_j)), where mu'
    // is the deployed policy: the feasible action with the highest target
    // proto-action score. Querying the target critic on that one-hot keeps it
    // on the action encoding it is trained on and evaluates the action that
    // would actually be executed from s'.
    nn::PolicyNet::Cache pc;
    nn::Mat proto_next = nets.actor_target.forward(Snext, Hnext, pc);
    nn::Mat a_next = nn::Mat::Zero(k, m);
    for (int j = 0; j < m; ++j) {
        if (not_done(j) == 0.0) continue; // column is masked out of the target
        const ReplayRecord& rec = *recs[static_cast<std::size_t>(j)];
        auto feas = env.feasible_actions(env.decode_bits(rec.s_next));
        Eigen::Index best = 0;
        if (feas.empty()) {
            proto_next.col(j).maxCoeff(&best);
        } else {
            best = feas.front().global_index;
            for (const auto& act : feas)
                if (proto_next(act.global_index, j) > proto_next(best, j))
                    best = act.global_index;
        }
        a_next(best, j) = 1.0;
    }
    nn::Mat target_in(sd + k, m);
    target_in.topRows(sd) = Snext;
    target_in.bottomRows(k) = a_next;
    nn::QNet::Cache qc;
    nn::RowVec q_next = nets.critic_target.forward(target_in, qc);
    nn::RowVec y = r + cfg.gamma * not_done.cwiseProduct(q_next);

    nn::Mat critic_in(sd + k, m);
    critic_in.topRows(sd) = S;
    critic_in.bottomRows(k) = A;
    nn::ParamSet critic_grads = nets.critic.params.shaped_zeros();
    double loss = nn::critic_loss(nets.critic, critic_in, y, critic_grads);
    nn::adam_step(nets.critic.params, critic_grads, opt_critic, cfg.lr_critic);

    nn::ParamSet actor_grads = nets.actor.params.shaped_zeros();
    nn::actor_gradient(nets.actor, nets.critic, S, H, actor_grads, cfg.actor_reg,
                       cfg.actor_softmax_t);
    nn::adam_step(nets.actor.params, actor_grads, opt_actor, cfg.lr_actor);

    nn::soft_update(nets.critic_target.params, nets.critic.params, cfg.tau);
    nn::soft_update(nets.actor_target.params, nets.actor.params, cfg.tau);
    return loss;
}

struct EpisodeSummary {
    double total_reward = 0.0;
    int length = 0;
    bool success = false;
    int success_step = -1;
};

// Per-episode exploration intensity (both schedules decay over training).
struct Exploration {
    double sigma = 0.0;   // Gaussian noise on the proto-action
    double epsilon = 0.0; // chance of substituting a uniform feasible action
};

// Runs one episode. With `train` set, exploration noise and gradient steps
// are active; otherwise the greedy policy is followed and nothing mutates.
// `script`, when given, supplies the raw proto-argmax per step (the executed
// action is still the masked-feasible selection).
inline EpisodeSummary run_episode(const Environment& env, AgentNets& nets, ReplayBuffer& buf,
                                  const AgentConfig& cfg, std::mt19937_64& rng, bool train,
                                  Exploration expl, nn::AdamState* opt_actor = nullptr,
                                  nn::AdamState* opt_critic = nullptr,
                                  const std::vector<int>* script = nullptr) {
    EpisodeSummary sum;
    AttackerState st = env.reset();
    Bits s_bits = env.encode_bits(st);
    nn::Vec h = nn::Vec::Zero(nets.actor.hidden_dim());
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int step = 0; step < cfg.max_steps; ++step) {
        if (script && step >= static_cast<int>(script->size())) break;
        nn::Vec x = detail::state_vec(env, s_bits);
        auto [proto, h_next] = nets.actor.forward_step(x, h);

        nn::Vec scores;
        if (script) {
            scores = nn::Vec::Zero(proto.size());
            scores((*script)[step]) = 1.0;
        } else if (train && expl.sigma > 0.0) {
            scores = proto;
            for (Eigen::Index i = 0; i < scores.size(); ++i) scores(i) += expl.sigma * gauss(rng);
        } else {
            scores = proto;
        }

        std::vector<ActionInstance> feasible = env.feasible_actions(st);
        Selection sel = select_action(scores, feasible);
        if (!script && train && unit(rng) < expl.epsilon) {
            std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
            sel.chosen = feasible[pick(rng)];
        }
        const bool raw_feasible = env.feasible(st, env.actions()[sel.raw_index]);

        StepOutcome out = env.apply_action(st, sel.chosen);
        Bits next_bits = env.encode_bits(out.next);
        record_step(buf, s_bits, h, sel.raw_index, raw_feasible, sel.chosen.global_index, out.reward,
                    next_bits, h_next, out.done, cfg);

        sum.total_reward += out.reward;
        sum.length = step + 1;
        st = out.next;
        s_bits = std::move(next_bits);
        h = h_next;

        if (train && opt_actor && opt_critic &&
            buf.size() >= static_cast<std::size_t>(cfg.warmup_batches) * cfg.batch_m &&
            (step % cfg.train_every) == 0)
            train_step(nets, env, buf, cfg, rng, *opt_actor, *opt_critic);

        if (out.done) {
            if (st.info.any()) {
                sum.success = true;
                sum.success_step = sum.length;
            }
            break;
        }
    }
    return sum;
}

struct TrainStats {
    std::vector<double> total_reward;
    std::vector<int> length;
    std::vector<bool> success;
    std::vector<int> success_step;
    int first_success_episode = -1; // 0-based, -1 when never successful
    int best_length = -1;           // shortest successful episode, -1 when none
    double wall_seconds = 0.0;
};

// Full training run: fresh networks, replay and optimizers, cfg.episodes
// episodes with linearly decaying exploration noise. Reproducible from seed.
inline TrainStats train_agent(const Environment& env, const AgentConfig& cfg, std::uint64_t seed,
                              AgentNets* out_nets = nullptr) {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed);
    AgentNets nets(env.state_dim(), env.action_count(), rng);
    nn::AdamState opt_actor(nets.actor.params), opt_critic(nets.critic.params);
    ReplayBuffer buf(cfg.replay_capacity);
    TrainStats stats;

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const double frac = cfg.episodes > 1 ? static_cast<double>(ep) / (cfg.episodes - 1) : 1.0;
        Exploration expl;
        expl.sigma = cfg.noise_sigma_start + frac * (cfg.noise_sigma_end - cfg.noise_sigma_start);
        const double eps_end = cfg.epsilon_random_end < 0.0 ? cfg.epsilon_random : cfg.epsilon_random_end;
        expl.epsilon = cfg.epsilon_random + frac * (eps_end - cfg.epsilon_random);
        EpisodeSummary sum = run_episode(env, nets, buf, cfg, rng, true, expl, &opt_actor, &opt_critic);
        stats.total_reward.push_back(sum.total_reward);
        stats.length.push_back(sum.length);
        stats.success.push_back(sum.success);
        stats.success_step.push_back(sum.success_step);
        if (sum.success) {
            if (stats.first_success_episode < 0) stats.first_success_episode = ep;
            if (stats.best_length < 0 || sum.length < stats.best_length) stats.best_length = sum.length;
        }
    }
    stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out_nets) *out_nets = nets;
    return stats;
}

} // namespace mdcw
