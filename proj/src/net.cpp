#include "hermes/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace hermes::net {

ScopedFd::~ScopedFd() {
    if (fd >= 0) ::close(fd);
}

ScopedFd& ScopedFd::operator=(ScopedFd&& o) noexcept {
    if (this != &o) {
        if (fd >= 0) ::close(fd);
        fd = o.fd;
        o.fd = -1;
    }
    return *this;
}

int ScopedFd::release() {
    const int out = fd;
    fd = -1;
    return out;
}

void ScopedFd::reset(int f) {
    if (fd >= 0) ::close(fd);
    fd = f;
}

const char* dial_error_name(DialError e) {
    switch (e) {
        case DialError::refused: return "refused";
        case DialError::timeout: return "timeout";
        case DialError::unreachable: return "unreachable";
        case DialError::other: return "other";
    }
    return "other";
}

bool resolve_ipv4(const std::string& host, std::uint32_t& addr_be) {
    in_addr literal{};
    if (::inet_pton(AF_INET, host.c_str(), &literal) == 1) {
        addr_be = literal.s_addr;
        return true;
    }
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) return false;
    addr_be = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr.s_addr;
    ::freeaddrinfo(res);
    return true;
}

namespace {

sockaddr_in make_addr(std::uint32_t addr_be, std::uint16_t port) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = addr_be;
    sa.sin_port = htons(port);
    return sa;
}

bool wait_fd(int fd, short events, SteadyTime deadline) {
    for (;;) {
        auto remain = std::chrono::duration_cast<Millis>(deadline - now());
        if (remain.count() < 0) remain = Millis(0);
        pollfd pfd{fd, events, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(remain.count()));
        if (rc > 0) return true;
        if (rc == 0) return false;
        if (errno != EINTR) return false;
    }
}

void set_nonblocking(int fd, bool on) {
    int flags = ::fcntl(fd, F_GETFL, 0);
    if (flags < 0) return;
    if (on)
        flags |= O_NONBLOCK;
    else
        flags &= ~O_NONBLOCK;
    ::fcntl(fd, F_SETFL, flags);
}

}  // namespace

ScopedFd tcp_listen(const std::string& host, std::uint16_t port, int backlog) {
    std::uint32_t addr_be = 0;
    if (!resolve_ipv4(host, addr_be)) return ScopedFd{};
    ScopedFd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) return ScopedFd{};
    int one = 1;
    ::setsockopt(fd.fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in sa = make_addr(addr_be, port);
    if (::bind(fd.fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) return ScopedFd{};
    if (::listen(fd.fd, backlog) != 0) return ScopedFd{};
    return fd;
}

std::uint16_t local_port(int fd) {
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len) != 0) return 0;
    return ntohs(sa.sin_port);
}

ScopedFd tcp_accept(int listen_fd, Millis timeout) {
    if (!wait_fd(listen_fd, POLLIN, now() + timeout)) return ScopedFd{};
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd < 0) return ScopedFd{};
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return ScopedFd(fd);
}

ScopedFd tcp_dial(const std::string& host, std::uint16_t port, Millis timeout, DialError& err) {
    err = DialError::other;
    std::uint32_t addr_be = 0;
    if (!resolve_ipv4(host, addr_be)) {
        err = DialError::unreachable;
        return ScopedFd{};
    }
    ScopedFd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) return ScopedFd{};
    set_nonblocking(fd.fd, true);
    sockaddr_in sa = make_addr(addr_be, port);
    int rc = ::connect(fd.fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa));
    if (rc != 0) {
        if (errno == ECONNREFUSED) {
            err = DialError::refused;
            return ScopedFd{};
        }
        if (errno != EINPROGRESS) {
            err = errno == ENETUNREACH || errno == EHOSTUNREACH ? DialError::unreachable
                                                                : DialError::other;
            return ScopedFd{};
        }
        if (!wait_fd(fd.fd, POLLOUT, now() + timeout)) {
            err = DialError::timeout;
            return ScopedFd{};
        }
        int soerr = 0;
        socklen_t slen = sizeof(soerr);
        ::getsockopt(fd.fd, SOL_SOCKET, SO_ERROR, &soerr, &slen);
        if (soerr != 0) {
            err = soerr == ECONNREFUSED ? DialError::refused
                : soerr == ETIMEDOUT    ? DialError::timeout
                : soerr == ENETUNREACH || soerr == EHOSTUNREACH ? DialError::unreachable
                                                                : DialError::other;
            return ScopedFd{};
        }
    }
    set_nonblocking(fd.fd, false);
    int one = 1;
    ::setsockopt(fd.fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return fd;
}

bool send_all(int fd, std::string_view data) {
    size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        if (n == 0) return false;
        off += static_cast<size_t>(n);
    }
    return true;
}

RecvStatus recv_some(int fd, std::string& out, size_t max, SteadyTime deadline) {
    if (!wait_fd(fd, POLLIN, deadline)) return RecvStatus::timed_out;
    out.resize(max);
    for (;;) {
        const ssize_t n = ::recv(fd, out.data(), max, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            out.clear();
            return RecvStatus::error;
        }
        if (n == 0) {
            out.clear();
            return RecvStatus::eof;
        }
        out.resize(static_cast<size_t>(n));
        return RecvStatus::data;
    }
}

RecvStatus recv_some(int fd, std::string& out, size_t max, Millis timeout) {
    return recv_some(fd, out, max, now() + timeout);
}

void shutdown_both(int fd) { ::shutdown(fd, SHUT_RDWR); }
void shutdown_write(int fd) { ::shutdown(fd, SHUT_WR); }

bool UdpSocket::bind(const std::string& host, std::uint16_t port) {
    std::uint32_t addr_be = 0;
    if (!resolve_ipv4(host, addr_be)) return false;
    fd_.reset(::socket(AF_INET, SOCK_DGRAM, 0));
    if (!fd_.valid()) return false;
    int buf = 4 << 20;
    ::setsockopt(fd_.fd, SOL_SOCKET, SO_RCVBUF, &buf, sizeof(buf));
    ::setsockopt(fd_.fd, SOL_SOCKET, SO_SNDBUF, &buf, sizeof(buf));
    sockaddr_in sa = make_addr(addr_be, port);
    return ::bind(fd_.fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0;
}

bool UdpSocket::connect(const std::string& host, std::uint16_t port) {
    if (!fd_.valid() && !bind("0.0.0.0", 0)) return false;
    std::uint32_t addr_be = 0;
    if (!resolve_ipv4(host, addr_be)) return false;
    sockaddr_in sa = make_addr(addr_be, port);
    return ::connect(fd_.fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0;
}

bool UdpSocket::send(std::string_view payload) const {
    return ::send(fd_.fd, payload.data(), payload.size(), MSG_NOSIGNAL) ==
           static_cast<ssize_t>(payload.size());
}

bool UdpSocket::send_to(std::string_view payload, std::uint32_t addr_be,
                        std::uint16_t port) const {
    sockaddr_in sa = make_addr(addr_be, port);
    return ::sendto(fd_.fd, payload.data(), payload.size(), MSG_NOSIGNAL,
                    reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) ==
           static_cast<ssize_t>(payload.size());
}

bool UdpSocket::recv_from(std::string& payload, Millis timeout, std::uint32_t* addr_be,
                          std::uint16_t* port) const {
    if (!wait_fd(fd_.fd, POLLIN, now() + timeout)) return false;
    payload.resize(65536);
    sockaddr_in sa{};
    socklen_t slen = sizeof(sa);
    const ssize_t n = ::recvfrom(fd_.fd, payload.data(), payload.size(), 0,
                                 reinterpret_cast<sockaddr*>(&sa), &slen);
    if (n < 0) {
        payload.clear();
        return false;
    }
    payload.resize(static_cast<size_t>(n));
    if (addr_be) *addr_be = sa.sin_addr.s_addr;
    if (port) *port = ntohs(sa.sin_port);
    return true;
}

void UdpSocket::close() { fd_.reset(); }

std::uint16_t pick_free_port(bool udp) {
    if (udp) {
        UdpSocket s;
        if (!s.bind("127.0.0.1", 0)) return 0;
        return s.port();
    }
    ScopedFd fd = tcp_listen("127.0.0.1", 0, 1);
    return fd.valid() ? local_port(fd.fd) : 0;
}

}  // namespace hermes::net
