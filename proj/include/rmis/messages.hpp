#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "rmis/graph.hpp"

namespace rmis {

enum class OutputValue : std::uint8_t { Zero, One, Bot };

std::string_view to_string(OutputValue v);

enum class Move : std::uint8_t { Rock, Paper, Scissors };

// L-bit string (1 <= L <= 64) held in the low bits of a word. Bit L-1 is the
// most significant, so comparing `value` orders strings big-endian.
struct RankBits {
  std::uint64_t value = 0;
  std::uint32_t length = 0;

  static RankBits all_ones(std::uint32_t length) {
    return {length >= 64 ? ~0ULL : ((1ULL << length) - 1), length};
  }
  friend RankBits operator^(RankBits a, RankBits b) { return {a.value ^ b.value, a.length}; }
  friend bool operator==(const RankBits&, const RankBits&) = default;
};

struct Signature {
  std::array<std::uint8_t, 64> bytes{};
  std::uint8_t size = 0;

  friend bool operator==(const Signature&, const Signature&) = default;
};

struct RpsMovePayload {
  Move move;
  friend bool operator==(const RpsMovePayload&, const RpsMovePayload&) = default;
};

struct OpponentChoice {
  NodeId opponent;
  friend bool operator==(const OpponentChoice&, const OpponentChoice&) = default;
};

struct SelfRand {
  RankBits bits;
  friend bool operator==(const SelfRand&, const SelfRand&) = default;
};

// r_{from -> to}, signed by `from` over (iteration, from, to, bits).
struct PairRand {
  std::uint64_t iteration;
  NodeId from;
  NodeId to;
  RankBits bits;
  Signature sig;
  friend bool operator==(const PairRand&, const PairRand&) = default;
};

// The opponent's signed PairRand, re-broadcast by its recipient (the sender).
struct ForwardedPairRand {
  std::uint64_t iteration;
  NodeId opponent;
  RankBits bits;
  Signature sig;
  friend bool operator==(const ForwardedPairRand&, const ForwardedPairRand&) = default;
};

struct Garbage {
  std::vector<std::uint8_t> bytes;
  friend bool operator==(const Garbage&, const Garbage&) = default;
};

using Payload =
    std::variant<RpsMovePayload, OpponentChoice, SelfRand, PairRand, ForwardedPairRand, Garbage>;

struct Message {
  NodeId sender = 0;
  std::optional<NodeId> to;  // nullopt: broadcast to all neighbors
  std::uint64_t round_sent = 0;
  Payload payload;

  bool broadcast() const { return !to.has_value(); }
  friend bool operator==(const Message&, const Message&) = default;
};

struct Action {
  std::vector<Message> outbound;
  std::optional<OutputValue> output;

  bool empty() const { return outbound.empty() && !output.has_value(); }
  void clear() {
    outbound.clear();
    output.reset();
  }
  friend bool operator==(const Action&, const Action&) = default;
};

}  // namespace rmis
