#pragma once

// Small POSIX socket layer used by every networked component. IPv4 only.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace hermes::net {

using Millis = std::chrono::milliseconds;
using SteadyTime = std::chrono::steady_clock::time_point;

inline SteadyTime now() { return std::chrono::steady_clock::now(); }

struct ScopedFd {
    int fd{-1};
    ScopedFd() = default;
    explicit ScopedFd(int f) : fd(f) {}
    ~ScopedFd();
    ScopedFd(const ScopedFd&) = delete;
    ScopedFd& operator=(const ScopedFd&) = delete;
    ScopedFd(ScopedFd&& o) noexcept : fd(o.fd) { o.fd = -1; }
    ScopedFd& operator=(ScopedFd&& o) noexcept;
    bool valid() const { return fd >= 0; }
    int release();
    void reset(int f = -1);
};

enum class DialError { refused, timeout, unreachable, other };

const char* dial_error_name(DialError e);

// Resolves an IPv4 literal or hostname. Returns false on failure.
bool resolve_ipv4(const std::string& host, std::uint32_t& addr_be);

// --- TCP ---

// Bound + listening socket, SO_REUSEADDR set. port 0 picks an ephemeral port.
ScopedFd tcp_listen(const std::string& host, std::uint16_t port, int backlog = 128);

std::uint16_t local_port(int fd);

// Blocks up to timeout. Invalid fd result on timeout or listener close.
ScopedFd tcp_accept(int listen_fd, Millis timeout);

// Connect with deadline; TCP_NODELAY on success.
ScopedFd tcp_dial(const std::string& host, std::uint16_t port, Millis timeout, DialError& err);

// Write the whole buffer; false on error/peer close.
bool send_all(int fd, std::string_view data);

enum class RecvStatus { data, eof, timed_out, error };

// One recv, bounded by deadline.
RecvStatus recv_some(int fd, std::string& out, size_t max, SteadyTime deadline);
RecvStatus recv_some(int fd, std::string& out, size_t max, Millis timeout);

void shutdown_both(int fd);
void shutdown_write(int fd);

// --- UDP ---

class UdpSocket {
  public:
    UdpSocket() = default;
    bool bind(const std::string& host, std::uint16_t port);
    bool connect(const std::string& host, std::uint16_t port);
    bool send(std::string_view payload) const;
    bool send_to(std::string_view payload, std::uint32_t addr_be, std::uint16_t port) const;
    // Receives one datagram; returns false on timeout/close. Source address out-params optional.
    bool recv_from(std::string& payload, Millis timeout, std::uint32_t* addr_be = nullptr,
                   std::uint16_t* port = nullptr) const;
    std::uint16_t port() const { return valid() ? local_port(fd_.fd) : 0; }
    bool valid() const { return fd_.valid(); }
    int fd() const { return fd_.fd; }
    void close();

  private:
    ScopedFd fd_;
};

// Reserves a free loopback port by binding and releasing it.
std::uint16_t pick_free_port(bool udp = false);

}  // namespace hermes::net
