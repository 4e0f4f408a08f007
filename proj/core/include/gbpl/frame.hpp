#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "gbpl/bp.hpp"
#include "gbpl/network.hpp"

namespace gbpl {

// Fixed 52-byte little-endian frame:
//   [0,4)   magic "GBPL"
//   [4]     version (1)
//   [5]     kind (0 = belief, 1 = ack)
//   [6,8)   sender id, u16
//   [8,12)  iteration, u32
//   [12,52) mu_x, mu_y, P_xx, P_xy, P_yy as IEEE-754 binary64
inline constexpr std::size_t kFrameSize = 52;
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'G', 'B', 'P', 'L'};

enum class FrameKind : std::uint8_t { Belief = 0, Ack = 1 };

using Frame = std::array<std::uint8_t, kFrameSize>;

struct FrameHeader {
  FrameKind kind = FrameKind::Belief;
  NodeId sender = 0;
  std::uint32_t iteration = 0;
};

struct DecodedBelief {
  NodeId sender = 0;
  std::uint32_t iteration = 0;
  GaussianBelief belief;
};

/// Anchor beliefs are sent with an all-zero covariance.
Frame encode_belief_frame(NodeId sender, std::uint32_t iteration, const GaussianBelief& belief);
Frame encode_ack_frame(NodeId sender, std::uint32_t iteration);

/// Validates length, magic, version and kind.
FrameHeader decode_header(std::span<const std::uint8_t> bytes);

/// Full belief decode; a zero covariance marks the sender as the anchor.
DecodedBelief decode_belief_frame(std::span<const std::uint8_t> bytes);

}  // namespace gbpl
