#include "hermes/model.hpp"

#include <algorithm>
#include <cstdio>

namespace hermes {

using nlohmann::json;

const char* failure_class_name(FailureClass c) {
    switch (c) {
        case FailureClass::connect_failure: return "connect_failure";
        case FailureClass::refused_stream: return "refused_stream";
        case FailureClass::gateway_error: return "gateway_error";
        case FailureClass::reset: return "reset";
        case FailureClass::status_5xx: return "status_5xx";
    }
    return "reset";
}

std::optional<FailureClass> failure_class_from_name(const std::string& name) {
    if (name == "connect_failure") return FailureClass::connect_failure;
    if (name == "refused_stream") return FailureClass::refused_stream;
    if (name == "gateway_error") return FailureClass::gateway_error;
    if (name == "reset") return FailureClass::reset;
    if (name == "status_5xx") return FailureClass::status_5xx;
    return std::nullopt;
}

const ClusterSpec* NodeConfig::find_cluster(const std::string& name) const {
    for (const auto& c : clusters)
        if (c.name == name) return &c;
    return nullptr;
}

const PolicyRule* NodeConfig::find_policy(const std::string& id) const {
    for (const auto& p : policies)
        if (p.id == id) return &p;
    return nullptr;
}

void ValidationReport::add_error(std::string msg) {
    ok = false;
    findings.push_back({Severity::error, std::move(msg)});
}

void ValidationReport::add_warning(std::string msg) {
    findings.push_back({Severity::warning, std::move(msg)});
}

bool header_name_valid(const std::string& name) {
    if (name.empty()) return false;
    for (const char ch : name) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '-' ||
                        ch == '_' || ch == '.';
        if (!ok) return false;
    }
    return true;
}

std::optional<std::uint32_t> parse_ipv4_literal(const std::string& dotted) {
    std::uint32_t out = 0;
    int octets = 0;
    size_t i = 0;
    while (i < dotted.size()) {
        if (octets == 4) return std::nullopt;
        size_t start = i;
        std::uint32_t v = 0;
        while (i < dotted.size() && dotted[i] >= '0' && dotted[i] <= '9') {
            v = v * 10 + static_cast<std::uint32_t>(dotted[i] - '0');
            if (v > 255) return std::nullopt;
            ++i;
        }
        if (i == start) return std::nullopt;
        out = (out << 8) | v;
        ++octets;
        if (i < dotted.size()) {
            if (dotted[i] != '.') return std::nullopt;
            ++i;
            if (i == dotted.size()) return std::nullopt;
        }
    }
    if (octets != 4) return std::nullopt;
    return out;
}

std::string ipv4_to_string(std::uint32_t a) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (a >> 24) & 0xFF, (a >> 16) & 0xFF,
                  (a >> 8) & 0xFF, a & 0xFF);
    return buf;
}

namespace {

void check_header_map(const HeaderMap& m, const std::string& where, ValidationReport& rep) {
    for (const auto& [name, value] : m) {
        (void)value;
        if (!header_name_valid(name))
            rep.add_error(where + ": header name '" + name + "' is not lowercase ASCII");
    }
}

}  // namespace

ValidationReport validate_config(const NodeConfig& cfg) {
    ValidationReport rep;

    if (cfg.node_id.empty()) rep.add_error("node_id is empty");
    if (cfg.version < 1) rep.add_error("version must be >= 1");

    for (size_t i = 0; i < cfg.listeners.size(); ++i) {
        const auto& l = cfg.listeners[i];
        const std::string where = "listener[" + std::to_string(i) + "]";
        if (l.bind.host.empty()) rep.add_error(where + ": bind host is empty");
        if (l.bind.port == 0) rep.add_error(where + ": bind port out of range");
        if (l.mode == ListenerMode::udp_ingest && l.port_tag.empty())
            rep.add_error(where + ": udp_ingest listener requires a non-empty port_tag");
        if (l.mode == ListenerMode::udp_ingest && l.bind.transport != Transport::udp)
            rep.add_error(where + ": udp_ingest listener must bind a udp endpoint");
        if (l.mode != ListenerMode::udp_ingest && l.bind.transport != Transport::tcp)
            rep.add_error(where + ": " +
                          (l.mode == ListenerMode::http ? std::string("http") : std::string("tcp_forward")) +
                          " listener must bind a tcp endpoint");
        check_header_map(l.implicit_headers, where + ".implicit_headers", rep);
    }

    for (size_t i = 0; i < cfg.routes.size(); ++i) {
        const auto& r = cfg.routes[i];
        const std::string where = "route[" + std::to_string(i) + "]";
        if (r.action.empty())
            rep.add_error(where + ": action is empty");
        else if (cfg.find_cluster(r.action) == nullptr)
            rep.add_error(where + ": unknown cluster " + r.action);
        check_header_map(r.match, where + ".match", rep);
        check_header_map(r.append, where + ".append", rep);
        for (const auto& d : r.defer) {
            if (!header_name_valid(d))
                rep.add_error(where + ".defer: header name '" + d + "' is not lowercase ASCII");
            if (r.match.count(d))
                rep.add_error(where + ": header '" + d + "' both matched and deferred");
            if (r.append.count(d))
                rep.add_error(where + ": header '" + d + "' both appended and deferred");
        }
        if (r.policy_gate && cfg.find_policy(*r.policy_gate) == nullptr)
            rep.add_warning(where + ": policy_gate '" + *r.policy_gate +
                            "' has no policy rule; requests will be denied");
    }

    for (size_t i = 0; i < cfg.clusters.size(); ++i) {
        const auto& c = cfg.clusters[i];
        const std::string where = "cluster[" + std::to_string(i) + "] '" + c.name + "'";
        if (c.name.empty()) rep.add_error(where + ": name is empty");
        if (c.endpoints.empty()) rep.add_error(where + ": cluster has no endpoints");
        for (const auto& e : c.endpoints) {
            if (e.host.empty()) rep.add_error(where + ": endpoint host is empty");
            if (e.port == 0) rep.add_error(where + ": endpoint port out of range");
        }
        for (size_t k = i + 1; k < cfg.clusters.size(); ++k)
            if (cfg.clusters[k].name == c.name)
                rep.add_error("duplicate cluster name " + c.name);
        if (c.retry.max_connect_attempts < 1)
            rep.add_error(where + ": max_connect_attempts must be positive");
    }

    for (const auto& [name, cluster] : cfg.address_spaces) {
        if (cfg.find_cluster(cluster) == nullptr)
            rep.add_error("address_spaces['" + name + "']: unknown cluster " + cluster);
    }

    for (size_t i = 0; i < cfg.policies.size(); ++i) {
        const auto& p = cfg.policies[i];
        const std::string where = "policy[" + std::to_string(i) + "]";
        if (p.id.empty()) rep.add_error(where + ": id is empty");
        for (const auto& [token, entry] : p.tokens) {
            (void)token;
            check_header_map(entry.append, where + ".append", rep);
        }
    }

    for (size_t i = 0; i < cfg.split_tunnel.size(); ++i) {
        const auto& s = cfg.split_tunnel[i];
        const std::string where = "split_tunnel[" + std::to_string(i) + "]";
        if (s.len > 32) rep.add_error(where + ": prefix length > 32");
        const std::uint32_t mask = s.len == 0 ? 0 : ~std::uint32_t(0) << (32 - s.len);
        if ((s.prefix & ~mask) != 0) rep.add_error(where + ": prefix has host bits set");
        if (s.port == 0) rep.add_error(where + ": port out of range");
    }

    return rep;
}

// --- JSON codec ---

namespace {

struct FieldError {
    std::string reason;
};

void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                 const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end())
            throw FieldError{where + ": unknown key '" + key + "'"};
    }
}

std::string get_string(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw FieldError{where + ": missing '" + key + "'"};
    if (!j[key].is_string()) throw FieldError{where + ": '" + key + "' must be a string"};
    return j[key].get<std::string>();
}

std::int64_t get_int(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw FieldError{where + ": missing '" + key + "'"};
    if (!j[key].is_number_integer()) throw FieldError{where + ": '" + key + "' must be an integer"};
    return j[key].get<std::int64_t>();
}

HeaderMap get_header_map(const json& j, const std::string& where) {
    if (!j.is_object()) throw FieldError{where + ": must be an object"};
    HeaderMap out;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) throw FieldError{where + "['" + k + "']: must be a string"};
        out[k] = v.get<std::string>();
    }
    return out;
}

Endpoint endpoint_from_json(const json& j, const std::string& where) {
    expect_keys(j, {"host", "port", "transport"}, where);
    Endpoint e;
    e.host = get_string(j, "host", where);
    const auto port = get_int(j, "port", where);
    if (port < 1 || port > 65535) throw FieldError{where + ": port out of range"};
    e.port = static_cast<std::uint16_t>(port);
    const auto t = get_string(j, "transport", where);
    if (t == "tcp")
        e.transport = Transport::tcp;
    else if (t == "udp")
        e.transport = Transport::udp;
    else
        throw FieldError{where + ": transport must be tcp or udp"};
    return e;
}

json endpoint_to_json(const Endpoint& e) {
    return json{{"host", e.host},
                {"port", e.port},
                {"transport", e.transport == Transport::tcp ? "tcp" : "udp"}};
}

RetryPolicy retry_from_json(const json& j, const std::string& where) {
    expect_keys(j,
                {"num_retries", "per_try_timeout_ms", "retry_on", "max_connect_attempts",
                 "backoff_ms"},
                where);
    RetryPolicy r;
    if (j.contains("num_retries")) {
        const auto v = get_int(j, "num_retries", where);
        if (v < 0) throw FieldError{where + ": num_retries must be non-negative"};
        r.num_retries = static_cast<std::uint32_t>(v);
    }
    if (j.contains("per_try_timeout_ms"))
        r.per_try_timeout = Millis(get_int(j, "per_try_timeout_ms", where));
    if (j.contains("retry_on")) {
        if (!j["retry_on"].is_array()) throw FieldError{where + ": retry_on must be an array"};
        for (const auto& item : j["retry_on"]) {
            if (!item.is_string()) throw FieldError{where + ": retry_on entries must be strings"};
            const auto c = failure_class_from_name(item.get<std::string>());
            if (!c)
                throw FieldError{where + ": unknown retry_on class '" + item.get<std::string>() +
                                 "'"};
            r.retry_on.insert(*c);
        }
    }
    if (j.contains("max_connect_attempts")) {
        const auto v = get_int(j, "max_connect_attempts", where);
        if (v < 1) throw FieldError{where + ": max_connect_attempts must be positive"};
        r.max_connect_attempts = static_cast<std::uint32_t>(v);
    }
    if (j.contains("backoff_ms")) r.backoff = Millis(get_int(j, "backoff_ms", where));
    return r;
}

json retry_to_json(const RetryPolicy& r) {
    json on = json::array();
    for (const auto c : r.retry_on) on.push_back(failure_class_name(c));
    return json{{"num_retries", r.num_retries},
                {"per_try_timeout_ms", r.per_try_timeout.count()},
                {"retry_on", on},
                {"max_connect_attempts", r.max_connect_attempts},
                {"backoff_ms", r.backoff.count()}};
}

NodeConfig config_from_json_or_throw(const json& j) {
    if (!j.is_object()) throw FieldError{"config: top level must be an object"};
    expect_keys(j,
                {"node_id", "version", "listeners", "routes", "clusters", "address_spaces",
                 "drain_time_ms", "policies", "split_tunnel"},
                "config");
    NodeConfig cfg;
    cfg.node_id = get_string(j, "node_id", "config");
    const auto version = get_int(j, "version", "config");
    if (version < 0) throw FieldError{"config: version must be non-negative"};
    cfg.version = static_cast<std::uint64_t>(version);
    if (j.contains("drain_time_ms")) cfg.drain_time = Millis(get_int(j, "drain_time_ms", "config"));

    if (j.contains("listeners")) {
        if (!j["listeners"].is_array()) throw FieldError{"config: listeners must be an array"};
        size_t i = 0;
        for (const auto& lj : j["listeners"]) {
            const std::string where = "listener[" + std::to_string(i++) + "]";
            expect_keys(lj, {"bind", "mode", "port_tag", "implicit_headers"}, where);
            ListenerSpec l;
            if (!lj.contains("bind")) throw FieldError{where + ": missing 'bind'"};
            l.bind = endpoint_from_json(lj["bind"], where + ".bind");
            const auto mode = get_string(lj, "mode", where);
            if (mode == "http")
                l.mode = ListenerMode::http;
            else if (mode == "tcp_forward")
                l.mode = ListenerMode::tcp_forward;
            else if (mode == "udp_ingest")
                l.mode = ListenerMode::udp_ingest;
            else
                throw FieldError{where + ": mode must be http, tcp_forward, or udp_ingest"};
            if (lj.contains("port_tag")) l.port_tag = get_string(lj, "port_tag", where);
            if (lj.contains("implicit_headers"))
                l.implicit_headers =
                    get_header_map(lj["implicit_headers"], where + ".implicit_headers");
            cfg.listeners.push_back(std::move(l));
        }
    }

    if (j.contains("routes")) {
        if (!j["routes"].is_array()) throw FieldError{"config: routes must be an array"};
        size_t i = 0;
        for (const auto& rj : j["routes"]) {
            const std::string where = "route[" + std::to_string(i++) + "]";
            expect_keys(rj, {"match", "port_tag", "action", "append", "defer", "policy_gate"},
                        where);
            RouteRule r;
            if (rj.contains("match")) r.match = get_header_map(rj["match"], where + ".match");
            if (rj.contains("port_tag")) r.port_tag = get_string(rj, "port_tag", where);
            r.action = get_string(rj, "action", where);
            if (rj.contains("append")) r.append = get_header_map(rj["append"], where + ".append");
            if (rj.contains("defer")) {
                if (!rj["defer"].is_array())
                    throw FieldError{where + ": defer must be an array"};
                for (const auto& d : rj["defer"]) {
                    if (!d.is_string())
                        throw FieldError{where + ": defer entries must be strings"};
                    r.defer.insert(d.get<std::string>());
                }
            }
            if (rj.contains("policy_gate")) r.policy_gate = get_string(rj, "policy_gate", where);
            cfg.routes.push_back(std::move(r));
        }
    }

    if (j.contains("clusters")) {
        if (!j["clusters"].is_array()) throw FieldError{"config: clusters must be an array"};
        size_t i = 0;
        for (const auto& cj : j["clusters"]) {
            const std::string where = "cluster[" + std::to_string(i++) + "]";
            expect_keys(cj, {"name", "endpoints", "lb", "retry", "tunnel_kind"}, where);
            ClusterSpec c;
            c.name = get_string(cj, "name", where);
            if (!cj.contains("endpoints") || !cj["endpoints"].is_array())
                throw FieldError{where + ": endpoints must be an array"};
            for (const auto& ej : cj["endpoints"])
                c.endpoints.push_back(endpoint_from_json(ej, where + ".endpoints"));
            if (cj.contains("lb")) {
                const auto lb = get_string(cj, "lb", where);
                if (lb == "round_robin")
                    c.lb = LbPolicy::round_robin;
                else if (lb == "first_healthy")
                    c.lb = LbPolicy::first_healthy;
                else
                    throw FieldError{where + ": lb must be round_robin or first_healthy"};
            }
            if (cj.contains("retry")) c.retry = retry_from_json(cj["retry"], where + ".retry");
            const auto kind = get_string(cj, "tunnel_kind", where);
            if (kind == "udp_over_http")
                c.tunnel_kind = TunnelKind::udp_over_http;
            else if (kind == "tcp_connect")
                c.tunnel_kind = TunnelKind::tcp_connect;
            else if (kind == "plain_tcp")
                c.tunnel_kind = TunnelKind::plain_tcp;
            else if (kind == "plain_udp")
                c.tunnel_kind = TunnelKind::plain_udp;
            else
                throw FieldError{where + ": unknown tunnel_kind '" + kind + "'"};
            cfg.clusters.push_back(std::move(c));
        }
    }

    if (j.contains("address_spaces")) {
        if (!j["address_spaces"].is_object())
            throw FieldError{"config: address_spaces must be an object"};
        for (const auto& [k, v] : j["address_spaces"].items()) {
            if (!v.is_string())
                throw FieldError{"config: address_spaces['" + k + "'] must be a string"};
            cfg.address_spaces[k] = v.get<std::string>();
        }
    }

    if (j.contains("policies")) {
        if (!j["policies"].is_array()) throw FieldError{"config: policies must be an array"};
        size_t i = 0;
        for (const auto& pj : j["policies"]) {
            const std::string where = "policy[" + std::to_string(i++) + "]";
            expect_keys(pj, {"id", "tokens"}, where);
            PolicyRule p;
            p.id = get_string(pj, "id", where);
            if (pj.contains("tokens")) {
                if (!pj["tokens"].is_object())
                    throw FieldError{where + ": tokens must be an object"};
                for (const auto& [token, tj] : pj["tokens"].items()) {
                    expect_keys(tj, {"decision", "append"}, where + ".tokens");
                    PolicyRule::TokenEntry entry;
                    const auto d = get_string(tj, "decision", where + ".tokens");
                    if (d == "allow")
                        entry.decision = PolicyDecision::allow;
                    else if (d == "deny")
                        entry.decision = PolicyDecision::deny;
                    else
                        throw FieldError{where + ": decision must be allow or deny"};
                    if (tj.contains("append"))
                        entry.append = get_header_map(tj["append"], where + ".tokens.append");
                    p.tokens[token] = std::move(entry);
                }
            }
            cfg.policies.push_back(std::move(p));
        }
    }

    if (j.contains("split_tunnel")) {
        if (!j["split_tunnel"].is_array())
            throw FieldError{"config: split_tunnel must be an array"};
        size_t i = 0;
        for (const auto& sj : j["split_tunnel"]) {
            const std::string where = "split_tunnel[" + std::to_string(i++) + "]";
            expect_keys(sj, {"prefix", "port"}, where);
            SplitEntry s;
            const auto text = get_string(sj, "prefix", where);
            const auto slash = text.find('/');
            if (slash == std::string::npos)
                throw FieldError{where + ": prefix must look like a.b.c.d/len"};
            const auto addr = parse_ipv4_literal(text.substr(0, slash));
            if (!addr) throw FieldError{where + ": bad network address"};
            s.prefix = *addr;
            int len = -1;
            try {
                len = std::stoi(text.substr(slash + 1));
            } catch (...) {
            }
            if (len < 0 || len > 32) throw FieldError{where + ": bad prefix length"};
            s.len = static_cast<std::uint8_t>(len);
            const auto port = get_int(sj, "port", where);
            if (port < 1 || port > 65535) throw FieldError{where + ": port out of range"};
            s.port = static_cast<std::uint16_t>(port);
            cfg.split_tunnel.push_back(s);
        }
    }

    return cfg;
}

}  // namespace

std::variant<NodeConfig, Malformed> node_config_from_json(const json& j) {
    try {
        return config_from_json_or_throw(j);
    } catch (const FieldError& e) {
        return Malformed{e.reason};
    }
}

std::variant<NodeConfig, Malformed> parse_node_config(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) return Malformed{"config: invalid JSON"};
    return node_config_from_json(j);
}

nlohmann::json node_config_to_json(const NodeConfig& cfg) {
    json listeners = json::array();
    for (const auto& l : cfg.listeners) {
        json lj{{"bind", endpoint_to_json(l.bind)},
                {"mode", l.mode == ListenerMode::http         ? "http"
                         : l.mode == ListenerMode::tcp_forward ? "tcp_forward"
                                                               : "udp_ingest"}};
        if (!l.port_tag.empty()) lj["port_tag"] = l.port_tag;
        if (!l.implicit_headers.empty()) lj["implicit_headers"] = l.implicit_headers;
        listeners.push_back(std::move(lj));
    }
    json routes = json::array();
    for (const auto& r : cfg.routes) {
        json rj{{"action", r.action}};
        if (!r.match.empty()) rj["match"] = r.match;
        if (r.port_tag) rj["port_tag"] = *r.port_tag;
        if (!r.append.empty()) rj["append"] = r.append;
        if (!r.defer.empty()) rj["defer"] = r.defer;
        if (r.policy_gate) rj["policy_gate"] = *r.policy_gate;
        routes.push_back(std::move(rj));
    }
    json clusters = json::array();
    for (const auto& c : cfg.clusters) {
        json endpoints = json::array();
        for (const auto& e : c.endpoints) endpoints.push_back(endpoint_to_json(e));
        clusters.push_back(
            json{{"name", c.name},
                 {"endpoints", std::move(endpoints)},
                 {"lb", c.lb == LbPolicy::round_robin ? "round_robin" : "first_healthy"},
                 {"retry", retry_to_json(c.retry)},
                 {"tunnel_kind", c.tunnel_kind == TunnelKind::udp_over_http ? "udp_over_http"
                                 : c.tunnel_kind == TunnelKind::tcp_connect ? "tcp_connect"
                                 : c.tunnel_kind == TunnelKind::plain_tcp   ? "plain_tcp"
                                                                            : "plain_udp"}});
    }
    json policies = json::array();
    for (const auto& p : cfg.policies) {
        json tokens = json::object();
        for (const auto& [token, entry] : p.tokens) {
            json tj{{"decision", entry.decision == PolicyDecision::allow ? "allow" : "deny"}};
            if (!entry.append.empty()) tj["append"] = entry.append;
            tokens[token] = std::move(tj);
        }
        policies.push_back(json{{"id", p.id}, {"tokens", std::move(tokens)}});
    }
    json split = json::array();
    for (const auto& s : cfg.split_tunnel)
        split.push_back(json{
            {"prefix", ipv4_to_string(s.prefix) + "/" + std::to_string(s.len)}, {"port", s.port}});

    json out{{"node_id", cfg.node_id},
             {"version", cfg.version},
             {"listeners", std::move(listeners)},
             {"routes", std::move(routes)},
             {"clusters", std::move(clusters)},
             {"drain_time_ms", cfg.drain_time.count()}};
    if (!cfg.address_spaces.empty()) out["address_spaces"] = cfg.address_spaces;
    if (!cfg.policies.empty()) out["policies"] = std::move(policies);
    if (!cfg.split_tunnel.empty()) out["split_tunnel"] = std::move(split);
    return out;
}

}  // namespace hermes
