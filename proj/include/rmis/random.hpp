#pragma once

#include <cstdint>

namespace rmis {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Draw purposes. Each (seed, node, round, purpose, extra) tuple names an
// independent 64-bit word, so a node's draws never depend on the order in
// which other nodes act.
enum class Purpose : std::uint32_t {
  RpsMove = 1,
  Opponent = 2,
  SelfBits = 3,
  PairBits = 4,
  Garbage = 5,
  KeySeed = 6,
  BitBias = 7,
};

// prf is evaluated as a chain; the prefix over (seed, node) and then
// (round, purpose) can be reused across draws that differ only in `extra`.
constexpr std::uint64_t prf_node_key(std::uint64_t seed, std::uint64_t node) {
  const std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
  return mix64(h ^ (node * 0x9e3779b97f4a7c15ULL));
}

constexpr std::uint64_t prf_round_key(std::uint64_t node_key, std::uint64_t round, Purpose purpose) {
  const std::uint64_t h = mix64(node_key ^ (round * 0xc2b2ae3d27d4eb4fULL));
  return mix64(h ^ (static_cast<std::uint64_t>(purpose) * 0x165667b19e3779f9ULL));
}

constexpr std::uint64_t prf_finish(std::uint64_t round_key, std::uint64_t extra) {
  return mix64(round_key ^ (extra * 0xd6e8feb86659fd93ULL));
}

constexpr std::uint64_t prf(std::uint64_t seed, std::uint64_t node, std::uint64_t round,
                            Purpose purpose, std::uint64_t extra = 0) {
  return prf_finish(prf_round_key(prf_node_key(seed, node), round, purpose), extra);
}

// Maps a uniform word onto [0, bound) by multiply-high (bias below 2^-64 * bound).
constexpr std::uint64_t bounded(std::uint64_t word, std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(word) * bound) >> 64);
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_double(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Sequential stream for setup work (graph generation). Deterministic across
// platforms, unlike the std distributions.
class SplitMixStream {
 public:
  explicit SplitMixStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t bound) { return bounded(next(), bound); }
  double uniform() { return unit_double(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace rmis
