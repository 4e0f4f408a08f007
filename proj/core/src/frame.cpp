#include "gbpl/frame.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "gbpl/error.hpp"

namespace gbpl {
namespace {

template <typename T>
void put_le(Frame& f, std::size_t at, T value) {
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    f[at + k] = static_cast<std::uint8_t>(value >> (8 * k));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> b, std::size_t at) {
  T value = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) value |= static_cast<T>(b[at + k]) << (8 * k);
  return value;
}

void put_f64(Frame& f, std::size_t at, double v) { put_le(f, at, std::bit_cast<std::uint64_t>(v)); }

double get_f64(std::span<const std::uint8_t> b, std::size_t at) {
  return std::bit_cast<double>(get_le<std::uint64_t>(b, at));
}

Frame header_frame(FrameKind kind, NodeId sender, std::uint32_t iteration) {
  if (sender > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::SenderIdOverflow,
                "sender id " + std::to_string(sender) + " does not fit 16 bits");
  }
  Frame f{};
  std::copy(kFrameMagic.begin(), kFrameMagic.end(), f.begin());
  f[4] = kFrameVersion;
  f[5] = static_cast<std::uint8_t>(kind);
  put_le(f, 6, static_cast<std::uint16_t>(sender));
  put_le(f, 8, iteration);
  return f;
}

}  // namespace

Frame encode_belief_frame(NodeId sender, std::uint32_t iteration, const GaussianBelief& belief) {
  Frame f = header_frame(FrameKind::Belief, sender, iteration);
  put_f64(f, 12, belief.mean.x());
  put_f64(f, 20, belief.mean.y());
  const Mat2 p = belief.is_anchor ? Mat2::Zero() : belief.covariance;
  put_f64(f, 28, p(0, 0));
  put_f64(f, 36, p(0, 1));
  put_f64(f, 44, p(1, 1));
  return f;
}

Frame encode_ack_frame(NodeId sender, std::uint32_t iteration) {
  return header_frame(FrameKind::Ack, sender, iteration);
}

FrameHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kFrameSize) {
    throw Error(ErrorCode::TruncatedFrame,
                "frame length " + std::to_string(bytes.size()) + ", expected 52");
  }
  if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::BadMagic, "frame does not start with GBPL");
  }
  if (bytes[4] != kFrameVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "frame version " + std::to_string(bytes[4]));
  }
  if (bytes[5] > static_cast<std::uint8_t>(FrameKind::Ack)) {
    throw Error(ErrorCode::UnknownKind, "frame kind " + std::to_string(bytes[5]));
  }
  return {static_cast<FrameKind>(bytes[5]), get_le<std::uint16_t>(bytes, 6),
          get_le<std::uint32_t>(bytes, 8)};
}

DecodedBelief decode_belief_frame(std::span<const std::uint8_t> bytes) {
  const FrameHeader h = decode_header(bytes);
  if (h.kind != FrameKind::Belief) {
    throw Error(ErrorCode::UnknownKind, "expected a belief frame");
  }
  std::array<double, 5> v{};
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = get_f64(bytes, 12 + 8 * k);
    if (!std::isfinite(v[k])) {
      throw Error(ErrorCode::NonFiniteField, "payload field " + std::to_string(k) + " is not finite");
    }
  }
  DecodedBelief out;
  out.sender = h.sender;
  out.iteration = h.iteration;
  out.belief.mean = Vec2(v[0], v[1]);
  out.belief.covariance << v[2], v[3], v[3], v[4];
  out.belief.is_anchor = v[2] == 0.0 && v[3] == 0.0 && v[4] == 0.0;
  return out;
}

}  // namespace gbpl
