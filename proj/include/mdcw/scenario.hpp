#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace mdcw {

enum class DeviceKind { Terminal, Firewall, Sensor, Router, Switch, Server };

inline const char* to_string(DeviceKind k) {
    switch (k) {
        case DeviceKind::Terminal: return "terminal";
        case DeviceKind::Firewall: return "firewall";
        case DeviceKind::Sensor: return "sensor";
        case DeviceKind::Router: return "router";
        case DeviceKind::Switch: return "switch";
        case DeviceKind::Server: return "server";
    }
    return "?";
}

inline std::optional<DeviceKind> device_kind_from(const std::string& s) {
    if (s == "terminal") return DeviceKind::Terminal;
    if (s == "firewall") return DeviceKind::Firewall;
    if (s == "sensor") return DeviceKind::Sensor;
    if (s == "router") return DeviceKind::Router;
    if (s == "switch") return DeviceKind::Switch;
    if (s == "server") return DeviceKind::Server;
    return std::nullopt;
}

struct Space {
    std::string id;
    std::optional<std::string> parent; // absent for the outermost space
    bool operator==(const Space&) const = default;
};

struct Device {
    std::string id;
    std::string space;
    std::vector<std::string> ports;
    DeviceKind kind = DeviceKind::Terminal;
    bool operator==(const Device&) const = default;
};

struct Port {
    std::string id;
    std::string device;
    bool operator==(const Port&) const = default;
};

struct Link {
    std::string a;
    std::string b;
    bool operator==(const Link&) const = default;
};

struct Service {
    std::string id;
    std::string device;
    std::string bound_port;
    std::optional<std::string> password; // credential id
    bool decoy = false;
    bool operator==(const Service&) const = default;
};

struct CredentialLocation {
    enum class Kind { InSpace, OnService };
    Kind kind = Kind::InSpace;
    std::string target;
    bool operator==(const CredentialLocation&) const = default;
};

struct Credential {
    std::string id;
    std::string unlocks; // service id
    CredentialLocation location;
    bool operator==(const Credential&) const = default;
};

struct AclRule {
    std::string firewall;             // device of firewall kind
    std::vector<std::string> sources; // device ids, kept sorted
    std::string dest;                 // service id

    void normalize() {
        std::sort(sources.begin(), sources.end());
        sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    }
    bool operator==(const AclRule&) const = default;
};

struct InfoItem {
    std::string id;
    std::string hosted_on; // service id
    bool operator==(const InfoItem&) const = default;
};

struct AttackerSpec {
    std::string start_space;
    std::vector<std::string> initial_credentials; // sorted
    std::vector<std::string> initial_devices;     // sorted
    bool operator==(const AttackerSpec&) const = default;
};

// Immutable multi-domain world. Construct via load_scenario(), builtin
// scenario factory, or by hand followed by validate().
struct CyberScenario {
    std::vector<Space> spaces;
    std::vector<Device> devices;
    std::vector<Port> ports;
    std::vector<Link> links;
    std::vector<Service> services;
    std::vector<Credential> credentials;
    std::vector<AclRule> acl_rules;      // baseline, always in force
    std::vector<AclRule> addable_rules;  // may be activated during an episode
    std::vector<AclRule> key_policies;   // declared key security policies
    std::vector<InfoItem> info_items;
    AttackerSpec attacker;
    int state_dim = 0;

    bool operator==(const CyberScenario&) const = default;
};

// Width of the used (non-padding) part of the state vector:
// spaces | devices | connected | dominated | credentials | info | addable.
inline int layout_min_size(const CyberScenario& s) {
    return static_cast<int>(s.spaces.size() + s.devices.size() + 2 * s.services.size() +
                            s.credentials.size() + s.info_items.size() + s.addable_rules.size());
}

// Id -> position lookups over a scenario already known to be valid.
struct ScenarioIndex {
    std::unordered_map<std::string, int> space;
    std::unordered_map<std::string, int> device;
    std::unordered_map<std::string, int> port;
    std::unordered_map<std::string, int> service;
    std::unordered_map<std::string, int> credential;
    std::unordered_map<std::string, int> info;

    static ScenarioIndex build(const CyberScenario& s) {
        ScenarioIndex ix;
        for (int i = 0; i < static_cast<int>(s.spaces.size()); ++i) ix.space.emplace(s.spaces[i].id, i);
        for (int i = 0; i < static_cast<int>(s.devices.size()); ++i) ix.device.emplace(s.devices[i].id, i);
        for (int i = 0; i < static_cast<int>(s.ports.size()); ++i) ix.port.emplace(s.ports[i].id, i);
        for (int i = 0; i < static_cast<int>(s.services.size()); ++i) ix.service.emplace(s.services[i].id, i);
        for (int i = 0; i < static_cast<int>(s.credentials.size()); ++i) ix.credential.emplace(s.credentials[i].id, i);
        for (int i = 0; i < static_cast<int>(s.info_items.size()); ++i) ix.info.emplace(s.info_items[i].id, i);
        return ix;
    }
};

namespace detail {

inline void check_rule(const CyberScenario& s, const ScenarioIndex& ix, const AclRule& r,
                       const std::string& where, std::vector<std::string>& out) {
    auto dit = ix.device.find(r.firewall);
    if (dit == ix.device.end())
        out.push_back(where + ": unknown firewall device '" + r.firewall + "'");
    else if (s.devices[dit->second].kind != DeviceKind::Firewall)
        out.push_back(where + ": device '" + r.firewall + "' is not of firewall kind");
    if (r.sources.empty()) out.push_back(where + ": empty source set");
    for (const auto& src : r.sources)
        if (!ix.device.count(src)) out.push_back(where + ": unknown source device '" + src + "'");
    if (!ix.service.count(r.dest)) out.push_back(where + ": unknown dest service '" + r.dest + "'");
}

} // namespace detail

// Checks every structural invariant. Returns one message per violation;
// empty means the scenario is well formed.
inline std::vector<std::string> validate(const CyberScenario& s) {
    std::vector<std::string> v;
    ScenarioIndex ix = ScenarioIndex::build(s);

    auto dup_check = [&v](const auto& items, const char* what) {
        std::unordered_set<std::string> seen;
        for (const auto& it : items)
            if (!seen.insert(it.id).second) v.push_back(std::string("duplicate id: ") + what + " '" + it.id + "'");
    };
    dup_check(s.spaces, "space");
    dup_check(s.devices, "device");
    dup_check(s.ports, "port");
    dup_check(s.services, "service");
    dup_check(s.credentials, "credential");
    dup_check(s.info_items, "info item");

    // containment graph must be a tree with exactly one outermost space
    int roots = 0;
    for (const auto& sp : s.spaces) {
        if (!sp.parent) {
            ++roots;
            continue;
        }
        if (!ix.space.count(*sp.parent))
            v.push_back("space '" + sp.id + "' has unknown parent '" + *sp.parent + "'");
    }
    if (!s.spaces.empty() && roots != 1)
        v.push_back("containment graph must have exactly one outermost space, found " + std::to_string(roots));
    // cycle check by walking to the root from each space
    for (const auto& sp : s.spaces) {
        std::unordered_set<std::string> trail;
        const Space* cur = &sp;
        while (cur->parent) {
            if (!trail.insert(cur->id).second) {
                v.push_back("containment cycle through space '" + sp.id + "'");
                break;
            }
            auto it = ix.space.find(*cur->parent);
            if (it == ix.space.end()) break;
            cur = &s.spaces[it->second];
        }
    }

    std::unordered_map<std::string, std::string> port_owner; // port -> device claiming it
    for (const auto& d : s.devices) {
        if (!ix.space.count(d.space)) v.push_back("device '" + d.id + "' placed in unknown space '" + d.space + "'");
        for (const auto& p : d.ports) {
            if (!ix.port.count(p)) v.push_back("device '" + d.id + "' lists unknown port '" + p + "'");
            auto [it, fresh] = port_owner.emplace(p, d.id);
            if (!fresh) v.push_back("port '" + p + "' claimed by both '" + it->second + "' and '" + d.id + "'");
        }
    }
    for (const auto& p : s.ports) {
        if (!ix.device.count(p.device)) {
            v.push_back("port '" + p.id + "' on unknown device '" + p.device + "'");
            continue;
        }
        auto it = port_owner.find(p.id);
        if (it == port_owner.end())
            v.push_back("port '" + p.id + "' not listed by its device '" + p.device + "'");
        else if (it->second != p.device)
            v.push_back("port '" + p.id + "' declares device '" + p.device + "' but is listed by '" + it->second + "'");
    }

    std::unordered_set<std::string> link_seen;
    for (const auto& l : s.links) {
        if (!ix.port.count(l.a)) v.push_back("link endpoint '" + l.a + "' is not a known port");
        if (!ix.port.count(l.b)) v.push_back("link endpoint '" + l.b + "' is not a known port");
        if (l.a == l.b) v.push_back("self-link on port '" + l.a + "'");
        std::string key = l.a < l.b ? l.a + "|" + l.b : l.b + "|" + l.a;
        if (!link_seen.insert(key).second) v.push_back("duplicate link between '" + l.a + "' and '" + l.b + "'");
    }

    for (const auto& svc : s.services) {
        auto dit = ix.device.find(svc.device);
        if (dit == ix.device.end())
            v.push_back("service '" + svc.id + "' on unknown device '" + svc.device + "'");
        if (!ix.port.count(svc.bound_port))
            v.push_back("service '" + svc.id + "' bound to unknown port '" + svc.bound_port + "'");
        else if (dit != ix.device.end()) {
            const auto& ports = s.devices[dit->second].ports;
            if (std::find(ports.begin(), ports.end(), svc.bound_port) == ports.end())
                v.push_back("service '" + svc.id + "' bound to port '" + svc.bound_port +
                            "' which does not belong to device '" + svc.device + "'");
        }
        if (svc.password && !ix.credential.count(*svc.password))
            v.push_back("service '" + svc.id + "' protected by unknown credential '" + *svc.password + "'");
    }

    for (const auto& c : s.credentials) {
        if (!ix.service.count(c.unlocks))
            v.push_back("credential '" + c.id + "' unlocks unknown service '" + c.unlocks + "'");
        if (c.location.kind == CredentialLocation::Kind::InSpace) {
            if (!ix.space.count(c.location.target))
                v.push_back("credential '" + c.id + "' located in unknown space '" + c.location.target + "'");
        } else if (!ix.service.count(c.location.target)) {
            v.push_back("credential '" + c.id + "' located on unknown service '" + c.location.target + "'");
        }
    }

    for (std::size_t i = 0; i < s.acl_rules.size(); ++i)
        detail::check_rule(s, ix, s.acl_rules[i], "acl_rules[" + std::to_string(i) + "]", v);
    for (std::size_t i = 0; i < s.addable_rules.size(); ++i)
        detail::check_rule(s, ix, s.addable_rules[i], "addable_rules[" + std::to_string(i) + "]", v);
    for (std::size_t i = 0; i < s.key_policies.size(); ++i) {
        const auto& kp = s.key_policies[i];
        detail::check_rule(s, ix, kp, "key_policies[" + std::to_string(i) + "]", v);
        if (std::find(s.addable_rules.begin(), s.addable_rules.end(), kp) == s.addable_rules.end())
            v.push_back("key_policies[" + std::to_string(i) + "] is not among addable_rules");
    }
    if (s.addable_rules.size() > 64)
        v.push_back("addable_rules exceeds the supported maximum of 64 rules");

    for (const auto& inf : s.info_items)
        if (!ix.service.count(inf.hosted_on))
            v.push_back("info item '" + inf.id + "' hosted on unknown service '" + inf.hosted_on + "'");

    if (!ix.space.count(s.attacker.start_space))
        v.push_back("attacker start space '" + s.attacker.start_space + "' does not exist");
    for (const auto& c : s.attacker.initial_credentials)
        if (!ix.credential.count(c)) v.push_back("attacker initial credential '" + c + "' does not exist");
    for (const auto& d : s.attacker.initial_devices)
        if (!ix.device.count(d)) v.push_back("attacker initial device '" + d + "' does not exist");

    if (s.state_dim < layout_min_size(s))
        v.push_back("state_dim " + std::to_string(s.state_dim) + " is below the minimal layout size " +
                    std::to_string(layout_min_size(s)));

    return v;
}

} // namespace mdcw
