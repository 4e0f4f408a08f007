#include "gbpl/udp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>
#include <utility>

#include "agent_threads.hpp"
#include "gbpl/error.hpp"

namespace gbpl {
namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in to_sockaddr(const SocketAddress& a) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(a.port);
  if (inet_pton(AF_INET, a.host.c_str(), &sa.sin_addr) != 1) {
    throw Error(ErrorCode::SocketError, "invalid IPv4 address '" + a.host + "'");
  }
  return sa;
}

class UdpEndpoint final : public Endpoint {
 public:
  UdpEndpoint(NodeId id, UdpSocket socket, std::map<NodeId, SocketAddress> peers,
              UdpOptions options)
      : id_(id), socket_(std::move(socket)), options_(std::move(options)) {
    for (const auto& [node, addr] : peers) peers_.emplace(node, to_sockaddr(addr));
  }

  std::vector<Frame> exchange(std::uint32_t iteration, const Frame& own) override {
    Outgoing& out = outgoing_[iteration];
    out.frame = own;
    for (const auto& [node, addr] : peers_) {
      out.unacked.insert(node);
      send_to(node, own);
    }

    int ticks = 0;
    auto next_tick = Clock::now() + options_.retry_interval;
    while (true) {
      const NodeId* missing = first_missing(iteration);
      if (!missing) break;
      check_abort();
      const auto now = Clock::now();
      if (now >= next_tick) {
        if (++ticks > options_.max_retries) {
          throw Error(ErrorCode::RoundTimeout,
                      "edge " + std::to_string(*missing) + "->" + std::to_string(id_) +
                          ": no frame for iteration " + std::to_string(iteration) + " after " +
                          std::to_string(options_.max_retries) + " retries");
        }
        resend_unacked();
        next_tick = now + options_.retry_interval;
        continue;
      }
      poll_once(std::chrono::duration_cast<std::chrono::milliseconds>(next_tick - now));
    }

    std::vector<Frame> frames;
    frames.reserve(peers_.size());
    for (const auto& [node, addr] : peers_) {
      auto it = inbox_.find({node, iteration});
      frames.push_back(it->second);
      inbox_.erase(it);
    }
    return frames;
  }

  void finish() override {
    // keep answering until our frames are acknowledged or the budget runs out
    for (int ticks = 0; ticks <= options_.max_retries && has_unacked(); ++ticks) {
      if (options_.abort && options_.abort->load()) return;
      const auto deadline = Clock::now() + options_.retry_interval;
      while (has_unacked() && Clock::now() < deadline) {
        poll_once(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()));
      }
      resend_unacked();
    }
  }

 private:
  struct Outgoing {
    Frame frame{};
    std::set<NodeId> unacked;
  };

  void check_abort() const {
    if (options_.abort && options_.abort->load()) {
      throw Error(ErrorCode::RoundTimeout, "agent " + std::to_string(id_) + " aborted");
    }
  }

  const NodeId* first_missing(std::uint32_t iteration) const {
    for (const auto& [node, addr] : peers_) {
      if (!inbox_.contains({node, iteration})) return &node;
    }
    return nullptr;
  }

  bool has_unacked() const {
    for (const auto& [iter, out] : outgoing_) {
      if (!out.unacked.empty()) return true;
    }
    return false;
  }

  void send_to(NodeId node, const Frame& frame) {
    const sockaddr_in& sa = peers_.at(node);
    // loss is tolerated: the retry loop covers a failed send
    (void)::sendto(socket_.fd(), frame.data(), frame.size(), 0,
                   reinterpret_cast<const sockaddr*>(&sa), sizeof(sa));
  }

  void resend_unacked() {
    for (auto it = outgoing_.begin(); it != outgoing_.end();) {
      if (it->second.unacked.empty()) {
        it = outgoing_.erase(it);
        continue;
      }
      for (NodeId node : it->second.unacked) send_to(node, it->second.frame);
      ++it;
    }
  }

  void poll_once(std::chrono::milliseconds timeout) {
    pollfd pfd{socket_.fd(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::max<long>(0, timeout.count())));
    if (ready < 0) {
      if (errno == EINTR) return;
      throw Error(ErrorCode::SocketError, errno_text("poll"));
    }
    if (ready == 0) return;
    // drain everything that is queued
    while (true) {
      std::array<std::uint8_t, 256> buf{};
      const ssize_t n = ::recv(socket_.fd(), buf.data(), buf.size(), MSG_DONTWAIT);
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) return;
        // e.g. ECONNREFUSED from a peer that already left
        return;
      }
      handle(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)));
    }
  }

  void handle(std::span<const std::uint8_t> bytes) {
    FrameHeader h;
    try {
      h = decode_header(bytes);
    } catch (const Error&) {
      return;  // not ours
    }
    if (!peers_.contains(h.sender) || options_.drop.contains({h.sender, id_})) return;
    if (h.kind == FrameKind::Ack) {
      auto it = outgoing_.find(h.iteration);
      if (it != outgoing_.end()) it->second.unacked.erase(h.sender);
      return;
    }
    Frame f;
    std::copy(bytes.begin(), bytes.end(), f.begin());
    inbox_.try_emplace({h.sender, h.iteration}, f);
    send_to(h.sender, encode_ack_frame(id_, h.iteration));
  }

  NodeId id_;
  UdpSocket socket_;
  UdpOptions options_;
  std::map<NodeId, sockaddr_in> peers_;
  std::map<std::uint32_t, Outgoing> outgoing_;
  std::map<std::pair<NodeId, std::uint32_t>, Frame> inbox_;
};

}  // namespace

SocketAddress SocketAddress::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::SocketError, "expected host:port, got '" + text + "'");
  }
  SocketAddress a;
  a.host = text.substr(0, colon);
  try {
    const int port = std::stoi(text.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    a.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::SocketError, "bad port in '" + text + "'");
  }
  return a;
}

std::string SocketAddress::to_string() const { return host + ":" + std::to_string(port); }

UdpSocket UdpSocket::bind(const SocketAddress& address) {
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd < 0) throw Error(ErrorCode::SocketError, errno_text("socket"));
  UdpSocket sock(fd);
  const sockaddr_in sa = to_sockaddr(address);
  if (::bind(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
    throw Error(ErrorCode::SocketError, errno_text(("bind " + address.to_string()).c_str()));
  }
  return sock;
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

SocketAddress UdpSocket::local_address() const {
  sockaddr_in sa{};
  socklen_t len = sizeof(sa);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0) {
    throw Error(ErrorCode::SocketError, errno_text("getsockname"));
  }
  char host[INET_ADDRSTRLEN] = {};
  ::inet_ntop(AF_INET, &sa.sin_addr, host, sizeof(host));
  return {host, ntohs(sa.sin_port)};
}

std::unique_ptr<Endpoint> make_udp_endpoint(NodeId id, UdpSocket socket,
                                             std::map<NodeId, SocketAddress> peers,
                                             UdpOptions options) {
  return std::make_unique<UdpEndpoint>(id, std::move(socket), std::move(peers),
                                       std::move(options));
}

BeliefHistory run_agents_udp(const LocalizationProblem& problem, const BpConfig& config,
                             int rounds, const UdpOptions& options) {
  if (rounds < 1) throw Error(ErrorCode::InvalidConfig, "rounds must be >= 1");
  const double alpha = resolve_alpha(problem.edges, config);
  const auto setups = make_agent_setups(problem, config.sigma2, alpha);

  std::vector<UdpSocket> sockets;
  std::vector<SocketAddress> addresses;
  for (std::size_t k = 0; k < setups.size(); ++k) {
    sockets.push_back(UdpSocket::bind({"127.0.0.1", 0}));
    addresses.push_back(sockets.back().local_address());
  }

  std::atomic<bool> abort{false};
  UdpOptions local = options;
  local.abort = &abort;
  std::vector<std::unique_ptr<Endpoint>> endpoints;
  for (std::size_t k = 0; k < setups.size(); ++k) {
    std::map<NodeId, SocketAddress> peers;
    for (NodeId n : setups[k].neighbors) peers.emplace(n, addresses[n]);
    endpoints.push_back(make_udp_endpoint(setups[k].id, std::move(sockets[k]), peers, local));
  }
  return detail::run_agent_threads(setups, endpoints, rounds, [&] { abort.store(true); });
}

}  // namespace gbpl
