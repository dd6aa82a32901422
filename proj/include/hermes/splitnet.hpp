#pragma once

// IP assisting component: IPv4 parsing, split-tunnel classification,
// IP-in-UDP encapsulation, ICMP echo turnaround, and the per-user tunnel
// pump that feeds packets into the local proxy's UDP ports.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "hermes/model.hpp"
#include "hermes/net.hpp"

namespace hermes::splitnet {

struct Ipv4Head {
    std::uint8_t ihl{5};            // 32-bit words
    std::uint16_t total_length{0};  // bytes, including header
    std::uint8_t protocol{0};       // 1=ICMP, 6=TCP, 17=UDP
    std::uint32_t src{0};           // host byte order
    std::uint32_t dst{0};
    std::uint16_t header_checksum{0};
};

// Ones-complement of the ones-complement sum of big-endian 16-bit words;
// odd-length input is zero-padded for summation.
std::uint16_t internet_checksum(std::string_view bytes);

std::variant<Ipv4Head, Malformed> parse_ipv4(std::string_view packet);

using SplitTable = std::vector<SplitEntry>;

// Longest-prefix match; nullopt means bypass.
std::optional<std::uint16_t> classify(std::uint32_t dst, const SplitTable& table);

// Identity framing: the UDP payload is exactly the IP packet.
std::string encapsulate(std::string_view packet);
std::variant<std::string, Malformed> decapsulate(std::string_view udp_payload);

// ICMP echo request (type 8) in, echo reply out with both checksums
// recomputed; anything else is ignored.
std::optional<std::string> icmp_echo_turnaround(std::string_view packet);

std::string make_icmp_echo_request(std::uint32_t src, std::uint32_t dst, std::uint16_t ident,
                                   std::uint16_t seq, std::string_view payload);

struct EchoInfo {
    std::uint8_t icmp_type{0};
    std::uint16_t ident{0};
    std::uint16_t seq{0};
    std::string payload;
};

std::optional<EchoInfo> parse_icmp_echo(std::string_view packet);

// Injection interface standing in for an OS tun device: one queue per
// direction, shared between the packet source and the pump.
class PacketPipe {
  public:
    void inject(std::string packet);  // source -> tunnel
    std::optional<std::string> next_injected(net::Millis timeout);

    void deliver(std::string packet);  // tunnel -> source
    std::optional<std::string> next_delivered(net::Millis timeout);

    void close();

  private:
    struct Queue {
        std::mutex mu;
        std::condition_variable cv;
        std::deque<std::string> items;
    };
    std::optional<std::string> pop(Queue& q, net::Millis timeout);
    void push(Queue& q, std::string item);
    Queue out_;  // injected
    Queue in_;   // delivered
    std::atomic<bool> closed_{false};
};

struct PumpCounters {
    std::atomic<std::uint64_t> matched{0};
    std::atomic<std::uint64_t> bypassed{0};
    std::atomic<std::uint64_t> delivered{0};
    std::atomic<std::uint64_t> malformed_dropped{0};
};

// Classifies injected packets, encapsulates matches toward the mapped local
// proxy UDP port, and delivers decapsulated replies back to the pipe.
class TunnelClientPump {
  public:
    TunnelClientPump(PacketPipe& pipe, SplitTable table, std::string proxy_host);
    ~TunnelClientPump();
    void stop();
    const PumpCounters& counters() const { return counters_; }

  private:
    void inject_loop();
    void reply_loop(size_t idx);

    PacketPipe& pipe_;
    SplitTable table_;
    std::string proxy_host_;
    std::vector<net::UdpSocket> sockets_;  // one per distinct table port
    std::vector<std::uint16_t> socket_port_;
    std::atomic<bool> stop_{false};
    PumpCounters counters_;
    std::vector<std::thread> threads_;
};

}  // namespace hermes::splitnet
