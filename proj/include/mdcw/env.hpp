#pragma once

#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdcw/bits.hpp"
#include "mdcw/scenario.hpp"

namespace mdcw {

struct UnknownDevice : std::runtime_error {
    explicit UnknownDevice(const std::string& id) : std::runtime_error("unknown device: " + id) {}
};
struct UnknownService : std::runtime_error {
    explicit UnknownService(const std::string& id) : std::runtime_error("unknown service: " + id) {}
};
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class ActionKind { Move, UseDevice, Connect, Dominate, Harvest, AddAcl, ReadInfo };

inline const char* to_string(ActionKind k) {
    switch (k) {
        case ActionKind::Move: return "Move";
        case ActionKind::UseDevice: return "UseDevice";
        case ActionKind::Connect: return "Connect";
        case ActionKind::Dominate: return "Dominate";
        case ActionKind::Harvest: return "Harvest";
        case ActionKind::AddAcl: return "AddAcl";
        case ActionKind::ReadInfo: return "ReadInfo";
    }
    return "?";
}

// One instantiable attack action. `a` indexes the primary entity (space,
// device, service, credential, addable rule, or info item); `b` is the
// vantage device for Connect and unused otherwise.
struct ActionInstance {
    ActionKind kind = ActionKind::Move;
    int a = -1;
    int b = -1;
    int global_index = -1;
    bool operator==(const ActionInstance&) const = default;
};

struct AttackerState {
    int current_space = 0;
    Bits devices_in_use;
    Bits connected;
    Bits dominated;
    Bits credentials;
    Bits info;
    Bits active_rules; // addable rules switched on this episode (or pre-added)
    Bits milestones;   // awarded milestone flags, bookkeeping only
    int steps_taken = 0;
    bool operator==(const AttackerState&) const = default;
};

struct StepOutcome {
    AttackerState next;
    double reward = 0.0;
    bool done = false;
    bool feasible = false;
};

// Episodic MDP over one scenario. Immutable after construction apart from a
// lazily grown reachability cache; safe to share across threads.
class Environment {
  public:
    static constexpr int episode_cap = 10000;

    explicit Environment(CyberScenario sc) : s_(std::move(sc)), ix_(ScenarioIndex::build(s_)) {
        if (s_.state_dim < layout_min_size(s_))
            throw DimensionError("state_dim " + std::to_string(s_.state_dim) +
                                 " cannot hold the encoded layout (" +
                                 std::to_string(layout_min_size(s_)) + ")");
        build_graph();
        build_actions();
        build_milestones();
    }

    const CyberScenario& scenario() const { return s_; }
    const ScenarioIndex& index() const { return ix_; }
    const std::vector<ActionInstance>& actions() const { return actions_; }
    int action_count() const { return static_cast<int>(actions_.size()); }
    int state_dim() const { return s_.state_dim; }
    int used_dim() const { return layout_min_size(s_); }

    std::string describe(const ActionInstance& act) const {
        switch (act.kind) {
            case ActionKind::Move: return "Move(" + s_.spaces[act.a].id + ")";
            case ActionKind::UseDevice: return "UseDevice(" + s_.devices[act.a].id + ")";
            case ActionKind::Connect:
                return "Connect(" + s_.services[act.a].id + " via " + s_.devices[act.b].id + ")";
            case ActionKind::Dominate: return "Dominate(" + s_.services[act.a].id + ")";
            case ActionKind::Harvest: return "Harvest(" + s_.credentials[act.a].id + ")";
            case ActionKind::AddAcl:
                return "AddAcl(" + s_.addable_rules[act.a].firewall + "->" + s_.addable_rules[act.a].dest + ")";
            case ActionKind::ReadInfo: return "ReadInfo(" + s_.info_items[act.a].id + ")";
        }
        return "?";
    }

    AttackerState reset() const {
        AttackerState st;
        st.current_space = ix_.space.at(s_.attacker.start_space);
        st.devices_in_use = Bits(s_.devices.size());
        st.connected = Bits(s_.services.size());
        st.dominated = Bits(s_.services.size());
        st.credentials = Bits(s_.credentials.size());
        st.info = Bits(s_.info_items.size());
        st.active_rules = Bits(s_.addable_rules.size());
        for (const auto& c : s_.attacker.initial_credentials) st.credentials.set(ix_.credential.at(c));
        for (std::size_t i = 0; i < s_.addable_rules.size(); ++i)
            if (std::find(s_.acl_rules.begin(), s_.acl_rules.end(), s_.addable_rules[i]) != s_.acl_rules.end())
                st.active_rules.set(i); // pre-added policies start switched on
        st.milestones = Bits(milestones_.size());
        for (std::size_t m = 0; m < milestones_.size(); ++m)
            if (milestone_holds(milestones_[m], st)) st.milestones.set(m); // already satisfied: never re-award
        return st;
    }

    bool service_reachable(const AttackerState& st, int via, int target) const {
        return reach_table(st.active_rules).test(static_cast<std::size_t>(via) * s_.services.size() + target);
    }
    bool service_reachable(const AttackerState& st, const std::string& via, const std::string& target) const {
        auto d = ix_.device.find(via);
        if (d == ix_.device.end()) throw UnknownDevice(via);
        auto v = ix_.service.find(target);
        if (v == ix_.service.end()) throw UnknownService(target);
        return service_reachable(st, d->second, v->second);
    }

    bool feasible(const AttackerState& st, const ActionInstance& act) const {
        switch (act.kind) {
            case ActionKind::Move:
                return act.a != st.current_space;
            case ActionKind::UseDevice:
                return initial_device_.test(act.a) && device_space_[act.a] == st.current_space &&
                       !st.devices_in_use.test(act.a);
            case ActionKind::Connect:
                return st.devices_in_use.test(act.b) && !st.connected.test(act.a) &&
                       service_reachable(st, act.b, act.a);
            case ActionKind::Dominate:
                return st.connected.test(act.a) && !st.dominated.test(act.a) &&
                       (service_password_[act.a] < 0 || st.credentials.test(service_password_[act.a]));
            case ActionKind::Harvest: {
                if (st.credentials.test(act.a)) return false;
                const auto& loc = s_.credentials[act.a].location;
                if (loc.kind == CredentialLocation::Kind::InSpace)
                    return ix_.space.at(loc.target) == st.current_space;
                return st.dominated.test(ix_.service.at(loc.target));
            }
            case ActionKind::AddAcl: {
                if (st.active_rules.test(act.a)) return false;
                for (int svc : rule_controllers_[act.a])
                    if (st.dominated.test(svc)) return true;
                return false;
            }
            case ActionKind::ReadInfo:
                return !st.info.test(act.a) && st.dominated.test(info_service_[act.a]);
        }
        return false;
    }

    std::vector<ActionInstance> feasible_actions(const AttackerState& st) const {
        std::vector<ActionInstance> out;
        for (const auto& act : actions_)
            if (feasible(st, act)) out.push_back(act);
        return out;
    }

    StepOutcome apply_action(const AttackerState& st, const ActionInstance& act) const {
        StepOutcome out;
        out.next = st;
        out.next.steps_taken = st.steps_taken + 1;
        if (!feasible(st, act)) {
            out.feasible = false;
            out.done = out.next.steps_taken >= episode_cap;
            return out;
        }
        out.feasible = true;
        AttackerState& n = out.next;
        switch (act.kind) {
            case ActionKind::Move: n.current_space = act.a; break;
            case ActionKind::UseDevice: n.devices_in_use.set(act.a); break;
            case ActionKind::Connect: n.connected.set(act.a); break;
            case ActionKind::Dominate:
                n.dominated.set(act.a);
                n.devices_in_use.set(service_device_[act.a]); // new vantage point
                break;
            case ActionKind::Harvest: n.credentials.set(act.a); break;
            case ActionKind::AddAcl: n.active_rules.set(act.a); break;
            case ActionKind::ReadInfo: n.info.set(act.a); break;
        }
        out.reward = award_milestones(n);
        out.done = n.info.any() || n.steps_taken >= episode_cap;
        return out;
    }

    // Reward newly satisfied milestones exactly once per episode.
    double milestone_reward(const AttackerState& prev, const ActionInstance& act,
                            const AttackerState& next) const {
        (void)act;
        double r = 0.0;
        for (std::size_t m = 0; m < milestones_.size(); ++m)
            if (!prev.milestones.test(m) && milestone_holds(milestones_[m], next)) r += milestones_[m].reward;
        return r;
    }

    std::vector<double> encode_state(const AttackerState& st) const {
        std::vector<double> v(static_cast<std::size_t>(s_.state_dim), 0.0);
        encode_into(st, [&v](std::size_t i) { v[i] = 1.0; });
        return v;
    }

    // Same layout as encode_state, without the zero padding. Used as the
    // deduplication key in search and as the compact replay representation.
    Bits encode_bits(const AttackerState& st) const {
        Bits b(static_cast<std::size_t>(used_dim()));
        encode_into(st, [&b](std::size_t i) { b.set(i); });
        return b;
    }

    AttackerState decode_bits(const Bits& b) const {
        AttackerState st;
        st.devices_in_use = Bits(s_.devices.size());
        st.connected = Bits(s_.services.size());
        st.dominated = Bits(s_.services.size());
        st.credentials = Bits(s_.credentials.size());
        st.info = Bits(s_.info_items.size());
        st.active_rules = Bits(s_.addable_rules.size());
        std::size_t at = 0;
        for (std::size_t i = 0; i < s_.spaces.size(); ++i, ++at)
            if (b.test(at)) st.current_space = static_cast<int>(i);
        auto take = [&](Bits& dst) {
            for (std::size_t i = 0; i < dst.size(); ++i, ++at)
                if (b.test(at)) dst.set(i);
        };
        take(st.devices_in_use);
        take(st.connected);
        take(st.dominated);
        take(st.credentials);
        take(st.info);
        take(st.active_rules);
        st.milestones = Bits(milestones_.size());
        for (std::size_t m = 0; m < milestones_.size(); ++m)
            if (milestone_holds(milestones_[m], st)) st.milestones.set(m);
        return st;
    }

  private:
    struct Milestone {
        enum class Trigger { Dominate, Harvest, Info };
        Trigger trigger;
        int target;
        double reward;
    };

    template <typename SetBit>
    void encode_into(const AttackerState& st, SetBit set_bit) const {
        std::size_t at = 0;
        set_bit(at + st.current_space);
        at += s_.spaces.size();
        auto put = [&](const Bits& src) {
            for (std::size_t i = 0; i < src.size(); ++i)
                if (src.test(i)) set_bit(at + i);
            at += src.size();
        };
        put(st.devices_in_use);
        put(st.connected);
        put(st.dominated);
        put(st.credentials);
        put(st.info);
        put(st.active_rules);
    }

    bool milestone_holds(const Milestone& m, const AttackerState& st) const {
        switch (m.trigger) {
            case Milestone::Trigger::Dominate: return st.dominated.test(m.target);
            case Milestone::Trigger::Harvest: return st.credentials.test(m.target);
            case Milestone::Trigger::Info: return st.info.test(m.target);
        }
        return false;
    }

    double award_milestones(AttackerState& st) const {
        double r = 0.0;
        for (std::size_t m = 0; m < milestones_.size(); ++m)
            if (!st.milestones.test(m) && milestone_holds(milestones_[m], st)) {
                st.milestones.set(m);
                r += milestones_[m].reward;
            }
        return r;
    }

    void build_graph() {
        const std::size_t P = s_.ports.size();
        port_adj_.assign(P, {});
        auto add_edge = [this](int a, int b) {
            port_adj_[a].push_back(b);
            port_adj_[b].push_back(a);
        };
        for (const auto& l : s_.links) add_edge(ix_.port.at(l.a), ix_.port.at(l.b));
        port_device_.resize(P);
        for (std::size_t i = 0; i < P; ++i) port_device_[i] = ix_.device.at(s_.ports[i].device);
        for (const auto& d : s_.devices) {
            // all ports of one device form a clique (internal backplane)
            for (std::size_t i = 0; i + 1 < d.ports.size(); ++i)
                for (std::size_t j = i + 1; j < d.ports.size(); ++j)
                    add_edge(ix_.port.at(d.ports[i]), ix_.port.at(d.ports[j]));
        }

        device_space_.resize(s_.devices.size());
        device_ports_.resize(s_.devices.size());
        is_firewall_.resize(s_.devices.size());
        for (std::size_t i = 0; i < s_.devices.size(); ++i) {
            device_space_[i] = ix_.space.at(s_.devices[i].space);
            is_firewall_[i] = s_.devices[i].kind == DeviceKind::Firewall;
            for (const auto& p : s_.devices[i].ports) device_ports_[i].push_back(ix_.port.at(p));
        }
        initial_device_ = Bits(s_.devices.size());
        for (const auto& d : s_.attacker.initial_devices) initial_device_.set(ix_.device.at(d));

        service_device_.resize(s_.services.size());
        service_port_.resize(s_.services.size());
        service_password_.resize(s_.services.size());
        for (std::size_t i = 0; i < s_.services.size(); ++i) {
            service_device_[i] = ix_.device.at(s_.services[i].device);
            service_port_[i] = ix_.port.at(s_.services[i].bound_port);
            service_password_[i] =
                s_.services[i].password ? ix_.credential.at(*s_.services[i].password) : -1;
        }

        info_service_.resize(s_.info_items.size());
        for (std::size_t i = 0; i < s_.info_items.size(); ++i)
            info_service_[i] = ix_.service.at(s_.info_items[i].hosted_on);

        rule_controllers_.resize(s_.addable_rules.size());
        for (std::size_t r = 0; r < s_.addable_rules.size(); ++r) {
            int fw = ix_.device.at(s_.addable_rules[r].firewall);
            for (std::size_t v = 0; v < s_.services.size(); ++v)
                if (service_device_[v] == fw && !s_.services[v].decoy)
                    rule_controllers_[r].push_back(static_cast<int>(v));
        }
    }

    void build_actions() {
        int g = 0;
        auto push = [this, &g](ActionKind k, int a, int b = -1) {
            actions_.push_back({k, a, b, g++});
        };
        for (std::size_t i = 0; i < s_.spaces.size(); ++i) push(ActionKind::Move, static_cast<int>(i));
        for (std::size_t i = 0; i < s_.devices.size(); ++i) push(ActionKind::UseDevice, static_cast<int>(i));
        for (std::size_t v = 0; v < s_.services.size(); ++v)
            for (std::size_t d = 0; d < s_.devices.size(); ++d)
                push(ActionKind::Connect, static_cast<int>(v), static_cast<int>(d));
        for (std::size_t v = 0; v < s_.services.size(); ++v) push(ActionKind::Dominate, static_cast<int>(v));
        for (std::size_t c = 0; c < s_.credentials.size(); ++c) push(ActionKind::Harvest, static_cast<int>(c));
        for (std::size_t r = 0; r < s_.addable_rules.size(); ++r) push(ActionKind::AddAcl, static_cast<int>(r));
        for (std::size_t i = 0; i < s_.info_items.size(); ++i) push(ActionKind::ReadInfo, static_cast<int>(i));
    }

    void build_milestones() {
        auto service_milestone = [this](const char* id, double reward) {
            auto it = ix_.service.find(id);
            if (it != ix_.service.end())
                milestones_.push_back({Milestone::Trigger::Dominate, it->second, reward});
        };
        auto credential_milestone = [this](const char* id, double reward) {
            auto it = ix_.credential.find(id);
            if (it != ix_.credential.end())
                milestones_.push_back({Milestone::Trigger::Harvest, it->second, reward});
        };
        service_milestone("FW1_manager", 100.0);
        service_milestone("FW2_manager", 200.0);
        credential_milestone("S1_web_password", 300.0);
        credential_milestone("S2_web_password", 400.0);
        for (std::size_t i = 0; i < s_.info_items.size(); ++i)
            milestones_.push_back({Milestone::Trigger::Info, static_cast<int>(i), 10000.0});
    }

    // Reachability matrix (via device x target service) for one set of active
    // addable rules, memoized per rule mask.
    const Bits& reach_table(const Bits& active_rules) const {
        std::uint64_t key = active_rules.low_word();
        std::scoped_lock lock(cache_mutex_);
        auto it = reach_cache_.find(key);
        if (it != reach_cache_.end()) return it->second;
        return reach_cache_.emplace(key, compute_reach(active_rules)).first->second;
    }

    Bits compute_reach(const Bits& active_rules) const {
        const std::size_t D = s_.devices.size(), V = s_.services.size();
        // allow[firewall][service] = set of via-devices some active rule admits
        std::unordered_map<std::uint64_t, Bits> allow;
        auto admit = [&](const AclRule& r) {
            int fw = ix_.device.at(r.firewall);
            int dest = ix_.service.at(r.dest);
            auto [it, fresh] = allow.try_emplace(hash_key(fw, dest), Bits(D));
            for (const auto& src : r.sources) it->second.set(ix_.device.at(src));
        };
        for (const auto& r : s_.acl_rules) admit(r);
        for (std::size_t i = 0; i < s_.addable_rules.size(); ++i)
            if (active_rules.test(i)) admit(s_.addable_rules[i]);

        Bits table(D * V);
        std::vector<int> queue;
        std::vector<char> seen(s_.ports.size());
        for (std::size_t via = 0; via < D; ++via) {
            for (std::size_t tgt = 0; tgt < V; ++tgt) {
                int goal = service_port_[tgt];
                int host = service_device_[tgt];
                // A firewall admits a port entry when it is the traversal
                // origin (and not the target's own host) or an active rule
                // allows this via->service flow.
                auto port_open = [&](int port) {
                    int owner = port_device_[port];
                    if (!is_firewall_[owner]) return true;
                    if (owner == static_cast<int>(via) && owner != host) return true;
                    auto it = allow.find(hash_key(owner, static_cast<int>(tgt)));
                    return it != allow.end() && it->second.test(via);
                };
                queue.clear();
                std::fill(seen.begin(), seen.end(), 0);
                for (int p : device_ports_[via])
                    if (port_open(p)) {
                        seen[p] = 1;
                        queue.push_back(p);
                    }
                for (std::size_t qi = 0; qi < queue.size() && !seen[goal]; ++qi)
                    for (int nb : port_adj_[queue[qi]])
                        if (!seen[nb] && port_open(nb)) {
                            seen[nb] = 1;
                            queue.push_back(nb);
                        }
                if (seen[goal]) table.set(via * V + tgt);
            }
        }
        return table;
    }

    static std::uint64_t hash_key(int a, int b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    }

    CyberScenario s_;
    ScenarioIndex ix_;
    std::vector<std::vector<int>> port_adj_;
    std::vector<int> port_device_;
    std::vector<int> device_space_;
    std::vector<std::vector<int>> device_ports_;
    std::vector<char> is_firewall_;
    Bits initial_device_{0};
    std::vector<int> service_device_;
    std::vector<int> service_port_;
    std::vector<int> service_password_;
    std::vector<int> info_service_;
    std::vector<std::vector<int>> rule_controllers_;
    std::vector<ActionInstance> actions_;
    std::vector<Milestone> milestones_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::uint64_t, Bits> reach_cache_;
};

} // namespace mdcw
