#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "rmis/graph.hpp"
#include "rmis/messages.hpp"

namespace rmis {

enum class SignatureBackend { Ideal, Ed25519 };

SignatureBackend parse_signature_backend(std::string_view name);
std::string_view to_string(SignatureBackend backend);

struct PublicKey {
  NodeId node = 0;
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

class KeyRegistry;

// Private-key handle. Only a registry can mint one, and a node's strategy only
// ever receives its own, so no code path can sign on another node's behalf.
class SigningKey {
 public:
  NodeId node() const { return node_; }

 private:
  friend class KeyRegistry;
  SigningKey(const KeyRegistry* owner, NodeId node) : owner_(owner), node_(node) {}

  const KeyRegistry* owner_;
  NodeId node_;
};

struct KeyPair {
  PublicKey public_key;
  SigningKey signing_key;
};

// Canonical signing input for a PairRand: 64-bit iteration, 32-bit issuer,
// 32-bit recipient, then ceil(L/8) bytes of the rank bits, all big-endian.
struct SigningInput {
  std::array<std::uint8_t, 24> bytes{};
  std::size_t size = 0;

  std::span<const std::uint8_t> view() const { return {bytes.data(), size}; }
};

SigningInput encode_pair_rand(std::uint64_t iteration, NodeId issuer, NodeId recipient,
                              RankBits bits);

class KeyRegistry {
 public:
  virtual ~KeyRegistry() = default;

  // Throws ConfigError if `node` already has a key pair.
  KeyPair keygen(NodeId node);
  bool registered(NodeId node) const;
  PublicKey public_key(NodeId node) const;

  // Throws ContractViolation for a key that this registry did not issue.
  Signature sign(const SigningKey& key, std::span<const std::uint8_t> message);
  // False on unregistered signer or malformed signature; never throws.
  virtual bool verify(PublicKey key, std::span<const std::uint8_t> message,
                      const Signature& sig) const = 0;

  virtual SignatureBackend backend() const = 0;

 protected:
  virtual void generate(NodeId node) = 0;
  virtual Signature sign_as(NodeId node, std::span<const std::uint8_t> message) = 0;

  std::vector<char> registered_;
};

std::unique_ptr<KeyRegistry> make_registry(SignatureBackend backend, std::uint64_t seed);

}  // namespace rmis
