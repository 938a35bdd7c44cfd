#include "rmis/signing.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <string>
#include <unordered_set>

#include "rmis/errors.hpp"
#include "rmis/random.hpp"

namespace rmis {

SignatureBackend parse_signature_backend(std::string_view name) {
  if (name == "ideal") return SignatureBackend::Ideal;
  if (name == "ed25519") return SignatureBackend::Ed25519;
  throw ConfigError("unknown signature backend '" + std::string(name) + "'");
}

std::string_view to_string(SignatureBackend backend) {
  return backend == SignatureBackend::Ideal ? "ideal" : "ed25519";
}

SigningInput encode_pair_rand(std::uint64_t iteration, NodeId issuer, NodeId recipient,
                              RankBits bits) {
  SigningInput in;
  std::size_t k = 0;
  for (int shift = 56; shift >= 0; shift -= 8) in.bytes[k++] = static_cast<std::uint8_t>(iteration >> shift);
  for (int shift = 24; shift >= 0; shift -= 8) in.bytes[k++] = static_cast<std::uint8_t>(issuer >> shift);
  for (int shift = 24; shift >= 0; shift -= 8) in.bytes[k++] = static_cast<std::uint8_t>(recipient >> shift);
  const std::size_t rank_bytes = (bits.length + 7) / 8;
  for (std::size_t b = rank_bytes; b-- > 0;) in.bytes[k++] = static_cast<std::uint8_t>(bits.value >> (8 * b));
  in.size = k;
  return in;
}

KeyPair KeyRegistry::keygen(NodeId node) {
  if (registered(node)) throw ConfigError("duplicate key registration for node " + std::to_string(node));
  if (node >= registered_.size()) registered_.resize(node + 1, 0);
  generate(node);
  registered_[node] = 1;
  return {PublicKey{node}, SigningKey(this, node)};
}

bool KeyRegistry::registered(NodeId node) const {
  return node < registered_.size() && registered_[node] != 0;
}

PublicKey KeyRegistry::public_key(NodeId node) const {
  if (!registered(node)) throw ContractViolation("no key for node " + std::to_string(node));
  return PublicKey{node};
}

Signature KeyRegistry::sign(const SigningKey& key, std::span<const std::uint8_t> message) {
  if (key.owner_ != this || !registered(key.node_)) {
    throw ContractViolation("signing key not issued by this registry");
  }
  return sign_as(key.node_, message);
}

namespace {

// Ideal functionality: tags are keyed by per-node secrets the simulation never
// exposes, and verification also requires the exact (signer, message, tag)
// triple to have been issued by sign().
class IdealRegistry final : public KeyRegistry {
 public:
  explicit IdealRegistry(std::uint64_t seed) : seed_(seed) {}

  bool verify(PublicKey key, std::span<const std::uint8_t> message,
              const Signature& sig) const override {
    if (!registered(key.node) || sig.size != kTagSize || message.size() > kMaxMessage) return false;
    Signature expected = tag(key.node, message);
    if (expected != sig) return false;
    return issued_.contains(Record::of(key.node, message, sig));
  }

  SignatureBackend backend() const override { return SignatureBackend::Ideal; }

 protected:
  void generate(NodeId node) override {
    if (node >= secrets_.size()) secrets_.resize(node + 1, 0);
    secrets_[node] = prf(seed_, node, 0, Purpose::KeySeed);
  }

  Signature sign_as(NodeId node, std::span<const std::uint8_t> message) override {
    if (message.size() > kMaxMessage) throw ContractViolation("message too long to sign");
    Signature sig = tag(node, message);
    issued_.insert(Record::of(node, message, sig));
    return sig;
  }

 private:
  static constexpr std::uint8_t kTagSize = 16;
  static constexpr std::size_t kMaxMessage = 24;

  struct Record {
    NodeId signer;
    std::array<std::uint8_t, kMaxMessage> message{};
    std::uint8_t length;
    std::array<std::uint8_t, kTagSize> tag{};

    static Record of(NodeId signer, std::span<const std::uint8_t> m, const Signature& s) {
      Record r{signer, {}, static_cast<std::uint8_t>(m.size()), {}};
      std::memcpy(r.message.data(), m.data(), m.size());
      std::memcpy(r.tag.data(), s.bytes.data(), kTagSize);
      return r;
    }
    friend bool operator==(const Record&, const Record&) = default;
  };
  struct RecordHash {
    // Tags are already keyed pseudorandom words.
    std::size_t operator()(const Record& r) const {
      std::uint64_t t;
      std::memcpy(&t, r.tag.data(), sizeof t);
      return static_cast<std::size_t>(t ^ r.signer);
    }
  };

  Signature tag(NodeId node, std::span<const std::uint8_t> message) const {
    std::uint64_t a = secrets_[node] ^ 0xa5a5a5a5ULL;
    std::uint64_t b = secrets_[node] ^ 0x5a5a5a5aULL;
    for (std::size_t off = 0; off < message.size(); off += 8) {
      std::uint64_t w = 0;
      std::memcpy(&w, message.data() + off, std::min<std::size_t>(8, message.size() - off));
      a = mix64(a ^ w);
      b = mix64(b + w);
    }
    a = mix64(a ^ message.size());
    b = mix64(b ^ (message.size() << 8));
    Signature sig;
    sig.size = kTagSize;
    std::memcpy(sig.bytes.data(), &a, 8);
    std::memcpy(sig.bytes.data() + 8, &b, 8);
    return sig;
  }

  std::uint64_t seed_;
  std::vector<std::uint64_t> secrets_;
  std::unordered_set<Record, RecordHash> issued_;
};

class Ed25519Registry final : public KeyRegistry {
 public:
  explicit Ed25519Registry(std::uint64_t seed) : seed_(seed) {
    if (sodium_init() < 0) throw ConfigError("libsodium initialisation failed");
  }

  bool verify(PublicKey key, std::span<const std::uint8_t> message,
              const Signature& sig) const override {
    if (!registered(key.node) || sig.size != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                       keys_[key.node].pk.data()) == 0;
  }

  SignatureBackend backend() const override { return SignatureBackend::Ed25519; }

 protected:
  void generate(NodeId node) override {
    if (node >= keys_.size()) keys_.resize(node + 1);
    std::array<std::uint8_t, crypto_sign_SEEDBYTES> key_seed{};
    for (std::size_t w = 0; w < key_seed.size() / 8; ++w) {
      std::uint64_t word = prf(seed_, node, w, Purpose::KeySeed, 1);
      std::memcpy(key_seed.data() + 8 * w, &word, 8);
    }
    crypto_sign_seed_keypair(keys_[node].pk.data(), keys_[node].sk.data(), key_seed.data());
  }

  Signature sign_as(NodeId node, std::span<const std::uint8_t> message) override {
    Signature sig;
    crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                         keys_[node].sk.data());
    sig.size = crypto_sign_BYTES;
    return sig;
  }

 private:
  struct Keys {
    std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk{};
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
  };
  std::uint64_t seed_;
  std::vector<Keys> keys_;
};

}  // namespace

std::unique_ptr<KeyRegistry> make_registry(SignatureBackend backend, std::uint64_t seed) {
  if (backend == SignatureBackend::Ed25519) return std::make_unique<Ed25519Registry>(seed);
  return std::make_unique<IdealRegistry>(seed);
}

}  // namespace rmis
