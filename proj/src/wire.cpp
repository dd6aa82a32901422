#include "hermes/wire.hpp"

#include <algorithm>
#include <cctype>

namespace hermes::wire {

using nlohmann::json;

const std::string* MessageHead::find_header(std::string_view name) const {
    for (const auto& [n, v] : headers)
        if (n == name) return &v;
    return nullptr;
}

void MessageHead::set_header(std::string_view name, std::string_view value) {
    for (auto& [n, v] : headers) {
        if (n == name) {
            v = std::string(value);
            return;
        }
    }
    headers.emplace_back(std::string(name), std::string(value));
}

namespace {

bool token_valid(std::string_view s) {
    if (s.empty()) return false;
    for (const unsigned char ch : s) {
        if (ch <= ' ' || ch >= 0x7F) return false;
    }
    return true;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim_ows(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

const char* reason_phrase(int status) {
    switch (status) {
        case 200: return "OK";
        case 206: return "Partial Content";
        case 400: return "Bad Request";
        case 403: return "Forbidden";
        case 404: return "Not Found";
        case 416: return "Range Not Satisfiable";
        case 500: return "Internal Server Error";
        case 502: return "Bad Gateway";
        case 503: return "Service Unavailable";
        case 504: return "Gateway Timeout";
        default: return "Status";
    }
}

}  // namespace

ParseHeadResult parse_message_head(std::string_view buf) {
    const auto end = buf.find("\r\n\r\n");
    if (end == std::string_view::npos) {
        if (buf.size() >= kMaxHeadBytes) return Malformed{"head exceeds 64 KiB"};
        return Incomplete{};
    }
    if (end + 4 > kMaxHeadBytes) return Malformed{"head exceeds 64 KiB"};
    const std::string_view head = buf.substr(0, end);
    const size_t consumed = end + 4;

    const auto line_end = head.find("\r\n");
    const std::string_view start_line = head.substr(0, line_end);
    if (start_line.find('\n') != std::string_view::npos) return Malformed{"bare LF in start line"};

    MessageHead out;
    if (start_line.rfind("HTTP/1.1 ", 0) == 0) {
        out.kind = MessageHead::Kind::response;
        std::string_view rest = start_line.substr(9);
        const auto sp = rest.find(' ');
        const std::string_view code = sp == std::string_view::npos ? rest : rest.substr(0, sp);
        if (code.size() != 3 || !std::isdigit(static_cast<unsigned char>(code[0])) ||
            !std::isdigit(static_cast<unsigned char>(code[1])) ||
            !std::isdigit(static_cast<unsigned char>(code[2])))
            return Malformed{"bad status code"};
        out.status = (code[0] - '0') * 100 + (code[1] - '0') * 10 + (code[2] - '0');
        if (out.status < 100 || out.status > 599) return Malformed{"status out of range"};
    } else {
        out.kind = MessageHead::Kind::request;
        const auto sp1 = start_line.find(' ');
        if (sp1 == std::string_view::npos) return Malformed{"bad request line"};
        const auto sp2 = start_line.find(' ', sp1 + 1);
        if (sp2 == std::string_view::npos) return Malformed{"bad request line"};
        const std::string_view method = start_line.substr(0, sp1);
        const std::string_view target = start_line.substr(sp1 + 1, sp2 - sp1 - 1);
        const std::string_view proto = start_line.substr(sp2 + 1);
        if (!token_valid(method) || !token_valid(target)) return Malformed{"bad request line"};
        if (proto != "HTTP/1.1") return Malformed{"unsupported protocol version"};
        out.method = std::string(method);
        out.target = std::string(target);
    }

    size_t pos = line_end == std::string_view::npos ? head.size() : line_end + 2;
    while (pos < head.size()) {
        auto next = head.find("\r\n", pos);
        if (next == std::string_view::npos) next = head.size();
        const std::string_view line = head.substr(pos, next - pos);
        pos = next + 2;
        if (line.empty()) return Malformed{"empty header line"};
        if (line.find('\n') != std::string_view::npos) return Malformed{"bare LF in header"};
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) return Malformed{"header line missing ':'"};
        const std::string_view raw_name = line.substr(0, colon);
        if (raw_name.empty()) return Malformed{"empty header name"};
        for (const unsigned char ch : raw_name) {
            if (ch <= ' ' || ch >= 0x7F) return Malformed{"non-ASCII header name"};
        }
        const std::string_view value = trim_ows(line.substr(colon + 1));
        out.headers.emplace_back(to_lower(raw_name), std::string(value));
    }

    return std::make_pair(std::move(out), consumed);
}

std::optional<std::string> serialize_message_head(const MessageHead& head) {
    std::string out;
    if (head.kind == MessageHead::Kind::request) {
        if (!token_valid(head.method) || !token_valid(head.target)) return std::nullopt;
        if (head.status != 0) return std::nullopt;
        out = head.method + " " + head.target + " HTTP/1.1\r\n";
    } else {
        if (head.status < 100 || head.status > 599) return std::nullopt;
        if (!head.method.empty()) return std::nullopt;
        out = "HTTP/1.1 " + std::to_string(head.status) + " " + reason_phrase(head.status) +
              "\r\n";
    }
    for (const auto& [name, value] : head.headers) {
        if (!token_valid(name)) return std::nullopt;
        if (value.find('\r') != std::string::npos || value.find('\n') != std::string::npos)
            return std::nullopt;
        out += name;
        out += ": ";
        out += value;
        out += "\r\n";
    }
    out += "\r\n";
    if (out.size() > kMaxHeadBytes) return std::nullopt;
    return out;
}

MessageHead make_request(std::string method, std::string target,
                         std::vector<std::pair<std::string, std::string>> headers) {
    MessageHead h;
    h.kind = MessageHead::Kind::request;
    h.method = std::move(method);
    h.target = std::move(target);
    h.headers = std::move(headers);
    return h;
}

MessageHead make_response(int status, std::vector<std::pair<std::string, std::string>> headers) {
    MessageHead h;
    h.kind = MessageHead::Kind::response;
    h.status = status;
    h.headers = std::move(headers);
    return h;
}

std::optional<std::string> encode_capsule(std::string_view payload) {
    if (payload.size() > kMaxCapsulePayload) return std::nullopt;
    std::string out;
    out.reserve(payload.size() + 2);
    out.push_back(static_cast<char>((payload.size() >> 8) & 0xFF));
    out.push_back(static_cast<char>(payload.size() & 0xFF));
    out.append(payload);
    return out;
}

DecodedCapsules decode_capsules(std::string_view buf) {
    DecodedCapsules out;
    size_t pos = 0;
    while (buf.size() - pos >= 2) {
        const size_t len = (static_cast<size_t>(static_cast<unsigned char>(buf[pos])) << 8) |
                           static_cast<size_t>(static_cast<unsigned char>(buf[pos + 1]));
        if (buf.size() - pos - 2 < len) break;
        out.payloads.emplace_back(buf.substr(pos + 2, len));
        pos += 2 + len;
    }
    out.consumed = pos;
    return out;
}

const char* control_kind_name(ControlMsg::Kind k) {
    switch (k) {
        case ControlMsg::Kind::hello: return "hello";
        case ControlMsg::Kind::config_push: return "config_push";
        case ControlMsg::Kind::ack: return "ack";
        case ControlMsg::Kind::request_update: return "request_update";
        case ControlMsg::Kind::reject: return "reject";
    }
    return "hello";
}

std::string encode_control(const ControlMsg& msg) {
    json j{{"kind", control_kind_name(msg.kind)}};
    if (!msg.node_id.empty()) j["node_id"] = msg.node_id;
    switch (msg.kind) {
        case ControlMsg::Kind::hello:
            j["passphrase"] = msg.passphrase;
            break;
        case ControlMsg::Kind::config_push:
            j["version"] = msg.version;
            if (msg.body) j["body"] = node_config_to_json(*msg.body);
            break;
        case ControlMsg::Kind::ack:
            j["version"] = msg.version;
            break;
        case ControlMsg::Kind::reject:
            j["reason"] = msg.reason;
            break;
        case ControlMsg::Kind::request_update:
            break;
    }
    return j.dump() + "\n";
}

std::variant<ControlMsg, Malformed> decode_control(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) return Malformed{"invalid JSON"};
    if (!j.is_object()) return Malformed{"not an object"};
    if (!j.contains("kind")) return Malformed{"missing kind"};
    if (!j["kind"].is_string()) return Malformed{"kind must be a string"};
    const std::string kind = j["kind"].get<std::string>();

    ControlMsg msg;
    if (kind == "hello")
        msg.kind = ControlMsg::Kind::hello;
    else if (kind == "config_push")
        msg.kind = ControlMsg::Kind::config_push;
    else if (kind == "ack")
        msg.kind = ControlMsg::Kind::ack;
    else if (kind == "request_update")
        msg.kind = ControlMsg::Kind::request_update;
    else if (kind == "reject")
        msg.kind = ControlMsg::Kind::reject;
    else
        return Malformed{"unknown kind '" + kind + "'"};

    if (j.contains("node_id")) {
        if (!j["node_id"].is_string()) return Malformed{"node_id must be a string"};
        msg.node_id = j["node_id"].get<std::string>();
    }
    if (j.contains("passphrase")) {
        if (!j["passphrase"].is_string()) return Malformed{"passphrase must be a string"};
        msg.passphrase = j["passphrase"].get<std::string>();
    }
    if (j.contains("version")) {
        if (!j["version"].is_number_unsigned() && !j["version"].is_number_integer())
            return Malformed{"version must be an integer"};
        msg.version = j["version"].get<std::uint64_t>();
    }
    if (j.contains("reason")) {
        if (!j["reason"].is_string()) return Malformed{"reason must be a string"};
        msg.reason = j["reason"].get<std::string>();
    }
    if (j.contains("body")) {
        auto parsed = node_config_from_json(j["body"]);
        if (auto* err = std::get_if<Malformed>(&parsed))
            return Malformed{"body: " + err->reason};
        msg.body = std::get<NodeConfig>(std::move(parsed));
    }

    if (msg.kind == ControlMsg::Kind::hello && msg.node_id.empty())
        return Malformed{"hello requires node_id"};
    if (msg.kind == ControlMsg::Kind::config_push && !msg.body)
        return Malformed{"config_push requires body"};
    return msg;
}

}  // namespace hermes::wire
