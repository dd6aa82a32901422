#pragma once

// Domain types shared by every module plus the node configuration schema.
// Values are immutable after construction and safe to share across threads.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace hermes {

using HeaderMap = std::map<std::string, std::string>;
using Millis = std::chrono::milliseconds;

enum class Transport { tcp, udp };

struct Endpoint {
    std::string host;
    std::uint16_t port{0};
    Transport transport{Transport::tcp};

    std::string authority() const { return host + ":" + std::to_string(port); }
    bool operator==(const Endpoint&) const = default;
};

enum class ListenerMode { http, tcp_forward, udp_ingest };

struct ListenerSpec {
    Endpoint bind;
    ListenerMode mode{ListenerMode::http};
    std::string port_tag;
    HeaderMap implicit_headers;
};

struct RouteRule {
    HeaderMap match;                       // header name -> required exact value
    std::optional<std::string> port_tag;   // additionally require the ingress tag
    std::string action;                    // cluster name
    HeaderMap append;
    std::set<std::string> defer;           // headers this node must not interpret
    std::optional<std::string> policy_gate;
};

enum class LbPolicy { round_robin, first_healthy };
enum class TunnelKind { udp_over_http, tcp_connect, plain_tcp, plain_udp };

enum class FailureClass { connect_failure, refused_stream, gateway_error, reset, status_5xx };

const char* failure_class_name(FailureClass c);
std::optional<FailureClass> failure_class_from_name(const std::string& name);

struct RetryPolicy {
    std::uint32_t num_retries{0};
    Millis per_try_timeout{Millis(5000)};
    std::set<FailureClass> retry_on;
    std::uint32_t max_connect_attempts{1};  // plain-TCP forwarders only
    Millis backoff{Millis(0)};
};

struct ClusterSpec {
    std::string name;
    std::vector<Endpoint> endpoints;
    LbPolicy lb{LbPolicy::round_robin};
    RetryPolicy retry;
    TunnelKind tunnel_kind{TunnelKind::plain_tcp};
};

enum class PolicyDecision { allow, deny };

struct PolicyRule {
    std::string id;
    struct TokenEntry {
        PolicyDecision decision{PolicyDecision::deny};
        HeaderMap append;
    };
    std::map<std::string, TokenEntry> tokens;
};

struct SplitEntry {
    std::uint32_t prefix{0};  // network address, host byte order, host bits zero
    std::uint8_t len{32};
    std::uint16_t port{0};    // local proxy UDP port
};

struct NodeConfig {
    std::string node_id;
    std::uint64_t version{1};
    std::vector<ListenerSpec> listeners;
    std::vector<RouteRule> routes;
    std::vector<ClusterSpec> clusters;
    std::map<std::string, std::string> address_spaces;  // symbolic name -> cluster
    Millis drain_time{Millis(0)};
    std::vector<PolicyRule> policies;
    std::vector<SplitEntry> split_tunnel;

    const ClusterSpec* find_cluster(const std::string& name) const;
    const PolicyRule* find_policy(const std::string& id) const;
};

enum class Severity { error, warning };

struct ValidationReport {
    struct Finding {
        Severity severity;
        std::string message;
    };
    bool ok{true};
    std::vector<Finding> findings;

    void add_error(std::string msg);
    void add_warning(std::string msg);
};

// Enumerates every violation; never fails fast. ok <=> no error finding.
ValidationReport validate_config(const NodeConfig& cfg);

struct Malformed {
    std::string reason;
};

// External config format: UTF-8 JSON, one file per node. Unknown keys rejected.
std::variant<NodeConfig, Malformed> parse_node_config(const std::string& json_text);
std::variant<NodeConfig, Malformed> node_config_from_json(const nlohmann::json& j);
nlohmann::json node_config_to_json(const NodeConfig& cfg);

bool header_name_valid(const std::string& name);  // lowercase ASCII token

// "a.b.c.d" -> host-order address
std::optional<std::uint32_t> parse_ipv4_literal(const std::string& dotted);
std::string ipv4_to_string(std::uint32_t addr_host_order);

}  // namespace hermes
