#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdcw/agent.hpp"
#include "mdcw/env.hpp"
#include "mdcw/oracle.hpp"

namespace mdcw {

struct EmptyRecords : std::runtime_error {
    EmptyRecords() : std::runtime_error("no attack records to aggregate") {}
};

enum class AttackSource { Oracle, Rl };

inline const char* to_string(AttackSource s) { return s == AttackSource::Oracle ? "oracle" : "rl"; }

// Per-attacker shortest-path observation; failed attackers carry the forced
// quit length.
struct AttackRecord {
    std::string attacker_id;
    AttackSource source = AttackSource::Oracle;
    int length = 0;
    bool succeeded = false;
};

constexpr int failure_length = 10000;

// Mean attack-path length over the sample: the finite-n approximation of
// sec(s) = lim (1/n) sum len(A(u_i)). Lower means weaker configuration.
inline double sec_metric(const std::vector<AttackRecord>& records) {
    if (records.empty()) throw EmptyRecords();
    double total = 0.0;
    for (const auto& r : records) total += r.length;
    return total / static_cast<double>(records.size());
}

struct WeaknessReport {
    int preadded_policies = 0;
    int n = 0;
    std::vector<AttackRecord> records;
    double sec_value = 0.0;
};

inline int count_preadded(const CyberScenario& s) {
    int c = 0;
    for (const auto& kp : s.key_policies)
        if (std::find(s.acl_rules.begin(), s.acl_rules.end(), kp) != s.acl_rules.end()) ++c;
    return c;
}

// Scores one configuration with n attackers. Oracle mode replays the exact
// shortest path per attacker (all sharing the scenario's attacker spec);
// rl mode runs n independently seeded training runs and takes each run's
// best successful episode length.
inline WeaknessReport evaluate_configuration(const CyberScenario& scenario, int n, AttackSource mode,
                                             const AgentConfig& cfg, std::uint64_t seed,
                                             std::size_t max_states = 1000000) {
    if (n < 1) throw EmptyRecords();
    WeaknessReport rep;
    rep.preadded_policies = count_preadded(scenario);
    rep.n = n;
    Environment env(scenario);
    if (mode == AttackSource::Oracle) {
        auto path = shortest_attack_path(env, max_states);
        const int length = path ? path->length : failure_length;
        for (int i = 0; i < n; ++i)
            rep.records.push_back({"u" + std::to_string(i), mode, length, path.has_value()});
    } else {
        for (int i = 0; i < n; ++i) {
            TrainStats stats = train_agent(env, cfg, hash_mix(seed, static_cast<std::uint64_t>(i)));
            const bool ok = stats.best_length > 0;
            rep.records.push_back({"u" + std::to_string(i), mode, ok ? stats.best_length : failure_length, ok});
        }
    }
    rep.sec_value = sec_metric(rep.records);
    return rep;
}

// CSV form: one row per attacker plus a final summary row whose attacker_id
// is `sec` and whose length column carries the metric value.
inline std::string weakness_csv(const WeaknessReport& rep) {
    std::ostringstream out;
    out << "preadded_policies,attacker_id,source,length,succeeded\n";
    for (const auto& r : rep.records)
        out << rep.preadded_policies << ',' << r.attacker_id << ',' << to_string(r.source) << ','
            << r.length << ',' << (r.succeeded ? "true" : "false") << '\n';
    const char* src = rep.records.empty() ? "oracle" : to_string(rep.records.front().source);
    out << rep.preadded_policies << ",sec," << src << ',' << rep.sec_value << ",\n";
    return out.str();
}

} // namespace mdcw
