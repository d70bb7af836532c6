#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdcw/scenario.hpp"

namespace mdcw {

// Malformed JSON or a value of the wrong shape. byte_pos is the offset the
// underlying parser reported, or -1 when the failure is structural.
struct ParseError : std::runtime_error {
    long byte_pos;
    explicit ParseError(const std::string& msg, long pos = -1)
        : std::runtime_error(msg), byte_pos(pos) {}
};

// Well-formed JSON describing an inconsistent scenario.
struct ValidationError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ValidationError(std::vector<std::string> vs)
        : std::runtime_error(join(vs)), violations(std::move(vs)) {}

  private:
    static std::string join(const std::vector<std::string>& vs) {
        std::string out = "scenario validation failed:";
        for (const auto& s : vs) out += "\n  - " + s;
        return out;
    }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ValidationError({where + ": unknown key '" + it.key() + "'"});
    }
}

inline const json& require(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(where + ": missing key '" + key + "'");
    return *it;
}

inline std::string as_str(const json& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where + ": expected a string");
    return j.get<std::string>();
}

inline std::vector<std::string> as_str_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_str(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline AclRule rule_from(const json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    reject_unknown(j, {"firewall", "sources", "dest"}, where);
    AclRule r;
    r.firewall = as_str(require(j, "firewall", where), where + ".firewall");
    r.sources = as_str_list(require(j, "sources", where), where + ".sources");
    r.dest = as_str(require(j, "dest", where), where + ".dest");
    r.normalize();
    return r;
}

inline json rule_to(const AclRule& r) {
    return json{{"firewall", r.firewall}, {"sources", r.sources}, {"dest", r.dest}};
}

} // namespace detail

inline CyberScenario scenario_from_json(const std::string& text) {
    using detail::as_str;
    using detail::as_str_list;
    using detail::reject_unknown;
    using detail::require;
    using json = nlohmann::json;

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), static_cast<long>(e.byte));
    }
    if (!j.is_object()) throw ParseError("top level: expected an object");
    reject_unknown(j,
                   {"spaces", "devices", "ports", "links", "services", "credentials", "acl_rules",
                    "addable_rules", "key_policies", "info_items", "attacker", "state_dim"},
                   "top level");

    CyberScenario s;

    const json& spaces = require(j, "spaces", "top level");
    if (!spaces.is_array()) throw ParseError("spaces: expected an array");
    for (std::size_t i = 0; i < spaces.size(); ++i) {
        std::string where = "spaces[" + std::to_string(i) + "]";
        const json& e = spaces[i];
        if (!e.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(e, {"id", "parent"}, where);
        Space sp;
        sp.id = as_str(require(e, "id", where), where + ".id");
        if (auto it = e.find("parent"); it != e.end() && !it->is_null())
            sp.parent = as_str(*it, where + ".parent");
        s.spaces.push_back(std::move(sp));
    }

    const json& devices = require(j, "devices", "top level");
    if (!devices.is_array()) throw ParseError("devices: expected an array");
    for (std::size_t i = 0; i < devices.size(); ++i) {
        std::string where = "devices[" + std::to_string(i) + "]";
        const json& e = devices[i];
        if (!e.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(e, {"id", "space", "ports", "kind"}, where);
        Device d;
        d.id = as_str(require(e, "id", where), where + ".id");
        d.space = as_str(require(e, "space", where), where + ".space");
        d.ports = as_str_list(require(e, "ports", where), where + ".ports");
        std::string kind = as_str(require(e, "kind", where), where + ".kind");
        auto k = device_kind_from(kind);
        if (!k) throw ParseError(where + ".kind: unknown device kind '" + kind + "'");
        d.kind = *k;
        s.devices.push_back(std::move(d));
    }

    const json& ports = require(j, "ports", "top level");
    if (!ports.is_array()) throw ParseError("ports: expected an array");
    for (std::size_t i = 0; i < ports.size(); ++i) {
        std::string where = "ports[" + std::to_string(i) + "]";
        const json& e = ports[i];
        if (!e.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(e, {"id", "device"}, where);
        Port p;
        p.id = as_str(require(e, "id", where), where + ".id");
        p.device = as_str(require(e, "device", where), where + ".device");
        s.ports.push_back(std::move(p));
    }

    const json& links = require(j, "links", "top level");
    if (!links.is_array()) throw ParseError("links: expected an array");
    for (std::size_t i = 0; i < links.size(); ++i) {
        std::string where = "links[" + std::to_string(i) + "]";
        const json& e = links[i];
        if (!e.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(e, {"a", "b"}, where);
        Link l;
        l.a = as_str(require(e, "a", where), where + ".a");
        l.b = as_str(require(e, "b", where), where + ".b");
        s.links.push_back(std::move(l));
    }

    const json& services = require(j, "services", "top level");
    if (!services.is_array()) throw ParseError("services: expected an array");
    for (std::size_t i = 0; i < services.size(); ++i) {
        std::string where = "services[" + std::to_string(i) + "]";
        const json& e = services[i];
        if (!e.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(e, {"id", "device", "bound_port", "password", "decoy"}, where);
        Service svc;
        svc.id = as_str(require(e, "id", where), where + ".id");
        svc.device = as_str(require(e, "device", where), where + ".device");
        svc.bound_port = as_str(require(e, "bound_port", where), where + ".bound_port");
        if (auto it = e.find("password"); it != e.end() && !it->is_null())
            svc.password = as_str(*it, where + ".password");
        if (auto it = e.find("decoy"); it != e.end()) {
            if (!it->is_boolean()) throw ParseError(where + ".decoy: expected a boolean");
            svc.decoy = it->get<bool>();
        }
        s.services.push_back(std::move(svc));
    }

    const json& creds = require(j, "credentials", "top level");
    if (!creds.is_array()) throw ParseError("credentials: expected an array");
    for (std::size_t i = 0; i < creds.size(); ++i) {
        std::string where = "credentials[" + std::to_string(i) + "]";
        const json& e = creds[i];
        if (!e.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(e, {"id", "unlocks", "location"}, where);
        Credential c;
        c.id = as_str(require(e, "id", where), where + ".id");
        c.unlocks = as_str(require(e, "unlocks", where), where + ".unlocks");
        const json& loc = require(e, "location", where);
        if (!loc.is_object()) throw ParseError(where + ".location: expected an object");
        reject_unknown(loc, {"kind", "target"}, where + ".location");
        std::string kind = as_str(require(loc, "kind", where + ".location"), where + ".location.kind");
        if (kind == "in_space")
            c.location.kind = CredentialLocation::Kind::InSpace;
        else if (kind == "on_service")
            c.location.kind = CredentialLocation::Kind::OnService;
        else
            throw ParseError(where + ".location.kind: expected 'in_space' or 'on_service'");
        c.location.target = as_str(require(loc, "target", where + ".location"), where + ".location.target");
        s.credentials.push_back(std::move(c));
    }

    auto rules_from = [&](const char* key) {
        const json& arr = require(j, key, "top level");
        if (!arr.is_array()) throw ParseError(std::string(key) + ": expected an array");
        std::vector<AclRule> out;
        for (std::size_t i = 0; i < arr.size(); ++i)
            out.push_back(detail::rule_from(arr[i], std::string(key) + "[" + std::to_string(i) + "]"));
        return out;
    };
    s.acl_rules = rules_from("acl_rules");
    s.addable_rules = rules_from("addable_rules");
    s.key_policies = rules_from("key_policies");

    const json& infos = require(j, "info_items", "top level");
    if (!infos.is_array()) throw ParseError("info_items: expected an array");
    for (std::size_t i = 0; i < infos.size(); ++i) {
        std::string where = "info_items[" + std::to_string(i) + "]";
        const json& e = infos[i];
        if (!e.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(e, {"id", "hosted_on"}, where);
        InfoItem inf;
        inf.id = as_str(require(e, "id", where), where + ".id");
        inf.hosted_on = as_str(require(e, "hosted_on", where), where + ".hosted_on");
        s.info_items.push_back(std::move(inf));
    }

    const json& atk = require(j, "attacker", "top level");
    if (!atk.is_object()) throw ParseError("attacker: expected an object");
    reject_unknown(atk, {"start_space", "initial_credentials", "initial_devices"}, "attacker");
    s.attacker.start_space = as_str(require(atk, "start_space", "attacker"), "attacker.start_space");
    s.attacker.initial_credentials =
        as_str_list(require(atk, "initial_credentials", "attacker"), "attacker.initial_credentials");
    s.attacker.initial_devices =
        as_str_list(require(atk, "initial_devices", "attacker"), "attacker.initial_devices");
    std::sort(s.attacker.initial_credentials.begin(), s.attacker.initial_credentials.end());
    std::sort(s.attacker.initial_devices.begin(), s.attacker.initial_devices.end());

    const json& dim = require(j, "state_dim", "top level");
    if (!dim.is_number_integer()) throw ParseError("state_dim: expected an integer");
    s.state_dim = dim.get<int>();

    auto violations = validate(s);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return s;
}

inline std::string scenario_to_json(const CyberScenario& s) {
    using json = nlohmann::ordered_json;

    json j;
    j["spaces"] = json::array();
    for (const auto& sp : s.spaces) {
        json e{{"id", sp.id}};
        if (sp.parent) e["parent"] = *sp.parent;
        j["spaces"].push_back(std::move(e));
    }
    j["devices"] = json::array();
    for (const auto& d : s.devices)
        j["devices"].push_back(
            json{{"id", d.id}, {"space", d.space}, {"ports", d.ports}, {"kind", to_string(d.kind)}});
    j["ports"] = json::array();
    for (const auto& p : s.ports) j["ports"].push_back(json{{"id", p.id}, {"device", p.device}});
    j["links"] = json::array();
    for (const auto& l : s.links) j["links"].push_back(json{{"a", l.a}, {"b", l.b}});
    j["services"] = json::array();
    for (const auto& svc : s.services) {
        json e{{"id", svc.id}, {"device", svc.device}, {"bound_port", svc.bound_port}};
        if (svc.password) e["password"] = *svc.password;
        if (svc.decoy) e["decoy"] = true;
        j["services"].push_back(std::move(e));
    }
    j["credentials"] = json::array();
    for (const auto& c : s.credentials) {
        json loc{{"kind", c.location.kind == CredentialLocation::Kind::InSpace ? "in_space" : "on_service"},
                 {"target", c.location.target}};
        j["credentials"].push_back(json{{"id", c.id}, {"unlocks", c.unlocks}, {"location", std::move(loc)}});
    }
    auto rules_to = [](const std::vector<AclRule>& rules) {
        json arr = json::array();
        for (const auto& r : rules)
            arr.push_back(json{{"firewall", r.firewall}, {"sources", r.sources}, {"dest", r.dest}});
        return arr;
    };
    j["acl_rules"] = rules_to(s.acl_rules);
    j["addable_rules"] = rules_to(s.addable_rules);
    j["key_policies"] = rules_to(s.key_policies);
    j["info_items"] = json::array();
    for (const auto& inf : s.info_items)
        j["info_items"].push_back(json{{"id", inf.id}, {"hosted_on", inf.hosted_on}});
    j["attacker"] = json{{"start_space", s.attacker.start_space},
                         {"initial_credentials", s.attacker.initial_credentials},
                         {"initial_devices", s.attacker.initial_devices}};
    j["state_dim"] = s.state_dim;
    return j.dump(2) + "\n";
}

inline CyberScenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

inline void save_scenario(const CyberScenario& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write scenario file: " + path);
    out << scenario_to_json(s);
}

} // namespace mdcw
