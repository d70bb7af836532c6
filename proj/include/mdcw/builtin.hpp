#pragma once

#include <algorithm>
#include <cassert>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "mdcw/scenario.hpp"

namespace mdcw {

struct MissingKeyPolicies : std::runtime_error {
    MissingKeyPolicies() : std::runtime_error("scenario declares no key policies") {}
};

inline const std::vector<AclRule>& key_policies(const CyberScenario& s) {
    if (s.key_policies.empty()) throw MissingKeyPolicies();
    return s.key_policies;
}

// The IIoT reference scenario: an outer region with four inner spaces, two
// firewalled segments, and the SECRET info item on server S2. `preadded`
// key security policies (chosen uniformly at random with `seed`) are merged
// into the baseline ACLs before the episode starts.
inline CyberScenario builtin_scenario(int preadded, std::uint64_t seed = 0) {
    if (preadded < 0 || preadded > 3) throw std::invalid_argument("preadded must be in 0..=3");

    CyberScenario s;

    s.spaces = {{"P0", std::nullopt}, {"P1", "P0"}, {"P2", "P0"}, {"P3", "P0"}, {"P4", "P0"}};

    auto dev = [&s](std::string id, std::string space, std::vector<std::string> ports, DeviceKind k) {
        s.devices.push_back({std::move(id), std::move(space), {}, k});
        for (auto& p : ports) {
            s.ports.push_back({p, s.devices.back().id});
            s.devices.back().ports.push_back(std::move(p));
        }
    };
    dev("T1", "P1", {"T1_E0"}, DeviceKind::Terminal);
    dev("D1", "P2", {"D1_E0"}, DeviceKind::Sensor);
    dev("T2", "P3", {"T2_E0", "T2_S1"}, DeviceKind::Terminal);
    dev("FW1", "P3", {"FW1_E0", "FW1_E1", "FW1_E2", "FW1_E3", "FW1_D0", "FW1_D1", "FW1_D2", "FW1_D3", "FW1_D4"},
        DeviceKind::Firewall);
    dev("FW2", "P4", {"FW2_E0", "FW2_E2", "FW2_D0", "FW2_D1", "FW2_D2", "FW2_D3", "FW2_D4"}, DeviceKind::Firewall);
    dev("R", "P4", {"R_E0", "R_E1", "R_E2"}, DeviceKind::Router);
    dev("SW", "P4", {"SW_E0", "SW_E1", "SW_E2"}, DeviceKind::Switch);
    dev("S1", "P4", {"S1_E0"}, DeviceKind::Server);
    dev("S2", "P4", {"S2_E0"}, DeviceKind::Server);

    s.links = {{"T1_E0", "FW1_E0"}, {"D1_E0", "FW1_E1"}, {"T2_E0", "FW1_E3"},
               {"FW1_E2", "R_E0"}, {"T2_S1", "R_E1"},    {"R_E2", "FW2_E2"},
               {"FW2_E0", "SW_E0"}, {"SW_E1", "S1_E0"},  {"SW_E2", "S2_E0"}};

    s.services = {{"T2_manager", "T2", "T2_E0", std::nullopt, false},
                  {"FW1_manager", "FW1", "FW1_E2", "FW1_password", false},
                  {"FW2_manager", "FW2", "FW2_E2", "FW2_password", false},
                  {"S1_web", "S1", "S1_E0", "S1_web_password", false},
                  {"S2_web", "S2", "S2_E0", "S2_web_password", false}};
    // Inert decoy services on firewall maintenance ports: connectable by no
    // device (the terminal firewall gate never opens for them), present only
    // to widen the action/state space.
    for (int i = 0; i < 10; ++i) {
        std::string fw = i < 5 ? "FW1" : "FW2";
        std::string port = fw + "_D" + std::to_string(i % 5);
        s.services.push_back({"decoy_" + std::to_string(i), fw, port, std::nullopt, true});
    }

    s.credentials = {{"FW1_password", "FW1_manager", {CredentialLocation::Kind::InSpace, "P2"}},
                     {"FW2_password", "FW2_manager", {CredentialLocation::Kind::OnService, "T2_manager"}},
                     {"S1_web_password", "S1_web", {CredentialLocation::Kind::OnService, "T2_manager"}},
                     {"S2_web_password", "S2_web", {CredentialLocation::Kind::OnService, "S1_web"}}};

    s.acl_rules = {{"FW1", {"D1", "T1"}, "FW1_manager"},
                   {"FW2", {"T2"}, "FW2_manager"},
                   {"FW2", {"T2"}, "S1_web"}};
    s.key_policies = {{"FW1", {"D1", "T1"}, "T2_manager"},
                      {"FW2", {"D1", "T1"}, "S1_web"},
                      {"FW2", {"D1", "T1"}, "S2_web"}};
    s.addable_rules = s.key_policies;

    s.info_items = {{"SECRET", "S2_web"}};

    s.attacker.start_space = "P0";
    s.attacker.initial_devices = {"D1", "T1"};

    s.state_dim = 106;

    if (preadded > 0) {
        std::vector<int> pick(s.key_policies.size());
        std::iota(pick.begin(), pick.end(), 0);
        std::mt19937_64 rng(seed);
        std::shuffle(pick.begin(), pick.end(), rng);
        pick.resize(preadded);
        std::sort(pick.begin(), pick.end());
        for (int i : pick) s.acl_rules.push_back(s.key_policies[i]);
    }

    assert(validate(s).empty());
    return s;
}

} // namespace mdcw
