#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gbpl/agents.hpp"

namespace gbpl {

struct SocketAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// Parses "host:port".
  static SocketAddress parse(const std::string& text);
  std::string to_string() const;
};

/// Owning IPv4 UDP socket.
class UdpSocket {
 public:
  static UdpSocket bind(const SocketAddress& address);

  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;
  ~UdpSocket();

  int fd() const { return fd_; }
  SocketAddress local_address() const;

 private:
  explicit UdpSocket(int fd) : fd_(fd) {}
  int fd_ = -1;
};

struct UdpOptions {
  std::chrono::milliseconds retry_interval{200};
  int max_retries = 10;
  /// Receiver-side fault injection: frames travelling from -> to are discarded.
  std::set<DirectedEdge> drop;
  /// Set by a sibling thread to make every endpoint give up promptly.
  const std::atomic<bool>* abort = nullptr;
};

/// Endpoint over a bound UDP socket. Each round's frame is rebroadcast every
/// `retry_interval` to neighbors that have not acknowledged it; a neighbor
/// frame still missing after `max_retries` intervals raises RoundTimeout.
std::unique_ptr<Endpoint> make_udp_endpoint(NodeId id, UdpSocket socket,
                                             std::map<NodeId, SocketAddress> peers,
                                             UdpOptions options = {});

/// Every agent on its own loopback socket and thread.
BeliefHistory run_agents_udp(const LocalizationProblem& problem, const BpConfig& config,
                             int rounds, const UdpOptions& options = {});

}  // namespace gbpl
