#pragma once

// Wire codecs: HTTP/1.1-subset message heads, length-prefixed datagram
// capsules, and the newline-delimited control protocol. All pure functions
// on byte strings; callers own buffering.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hermes/model.hpp"

namespace hermes::wire {

inline constexpr size_t kMaxHeadBytes = 64 * 1024;
inline constexpr size_t kMaxCapsulePayload = 65535;

struct MessageHead {
    enum class Kind { request, response };
    Kind kind{Kind::request};
    std::string method;  // requests
    std::string target;  // origin-form path or host:port authority
    int status{0};       // responses
    std::vector<std::pair<std::string, std::string>> headers;  // names lowercase

    const std::string* find_header(std::string_view name) const;
    void set_header(std::string_view name, std::string_view value);  // replace or append
};

struct Incomplete {};

using ParseHeadResult = std::variant<std::pair<MessageHead, size_t>, Incomplete, Malformed>;

// Incremental-safe: Incomplete until the blank line arrives; consumed is the
// offset just past it. Heads larger than kMaxHeadBytes are Malformed.
ParseHeadResult parse_message_head(std::string_view buf);

// Empty result means the head violates its invariants (e.g. CR/LF in a value).
std::optional<std::string> serialize_message_head(const MessageHead& head);

MessageHead make_request(std::string method, std::string target,
                         std::vector<std::pair<std::string, std::string>> headers = {});
MessageHead make_response(int status,
                          std::vector<std::pair<std::string, std::string>> headers = {});

// --- capsules: 2-byte big-endian length prefix + payload ---

std::optional<std::string> encode_capsule(std::string_view payload);

struct DecodedCapsules {
    std::vector<std::string> payloads;
    size_t consumed{0};  // bytes eaten from the front of buf
};

// Greedy; the unconsumable tail stays with the caller.
DecodedCapsules decode_capsules(std::string_view buf);

// --- control protocol: one JSON object per '\n'-terminated line ---

struct ControlMsg {
    enum class Kind { hello, config_push, ack, request_update, reject };
    Kind kind{Kind::hello};
    std::string node_id;
    std::string passphrase;             // hello only
    std::uint64_t version{0};           // push/ack
    std::optional<NodeConfig> body;     // push only
    std::string reason;                 // reject only
};

const char* control_kind_name(ControlMsg::Kind k);

std::string encode_control(const ControlMsg& msg);  // includes trailing '\n'
std::variant<ControlMsg, Malformed> decode_control(std::string_view line);

}  // namespace hermes::wire
