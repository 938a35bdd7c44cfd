#include <gtest/gtest.h>

#include <vector>

#include "rmis/errors.hpp"
#include "rmis/random.hpp"
#include "rmis/signing.hpp"

using namespace rmis;

class SigningTest : public ::testing::TestWithParam<SignatureBackend> {};

TEST_P(SigningTest, Completeness) {
  auto reg = make_registry(GetParam(), 11);
  EXPECT_EQ(reg->backend(), GetParam());
  auto a = reg->keygen(0);
  auto b = reg->keygen(1);
  EXPECT_TRUE(reg->registered(0));
  EXPECT_FALSE(reg->registered(2));
  EXPECT_EQ(reg->public_key(1), b.public_key);
  for (std::uint64_t iter = 1; iter < 20; ++iter) {
    auto msg = encode_pair_rand(iter, 0, 1, RankBits{iter * 77, 21});
    Signature s = reg->sign(a.signing_key, msg.view());
    EXPECT_TRUE(reg->verify(a.public_key, msg.view(), s));
    EXPECT_FALSE(reg->verify(b.public_key, msg.view(), s));
  }
}

TEST_P(SigningTest, KeygenOncePerNode) {
  auto reg = make_registry(GetParam(), 3);
  reg->keygen(4);
  EXPECT_THROW(reg->keygen(4), ConfigError);
}

TEST_P(SigningTest, ForeignKeyRejected) {
  auto reg = make_registry(GetParam(), 3);
  auto other = make_registry(GetParam(), 3);
  auto k = other->keygen(0);
  reg->keygen(0);
  auto msg = encode_pair_rand(1, 0, 1, RankBits{5, 3});
  EXPECT_THROW(reg->sign(k.signing_key, msg.view()), ContractViolation);
}

TEST_P(SigningTest, VerifyUnregisteredIsFalse) {
  auto reg = make_registry(GetParam(), 3);
  auto a = reg->keygen(0);
  auto msg = encode_pair_rand(1, 0, 1, RankBits{5, 3});
  Signature s = reg->sign(a.signing_key, msg.view());
  EXPECT_FALSE(reg->verify(PublicKey{7}, msg.view(), s));
}

// Property: nothing a node can compute without the issuer's signing key
// verifies. Tried: reusing a genuine signature on other messages, bit flips,
// truncation, random bytes, and its own signature presented as the issuer's.
TEST_P(SigningTest, NoForgeryWithoutSigningKey) {
  auto reg = make_registry(GetParam(), 21);
  auto victim = reg->keygen(0);
  auto forger = reg->keygen(1);
  SplitMixStream rng(1234);
  for (int t = 0; t < 200; ++t) {
    const std::uint64_t iter = 1 + rng.below(50);
    RankBits bits{rng.next() & 0xffffff, 24};
    auto genuine_msg = encode_pair_rand(iter, 0, 1, bits);
    Signature genuine = reg->sign(victim.signing_key, genuine_msg.view());

    auto stale = encode_pair_rand(iter + 1, 0, 1, bits);
    EXPECT_FALSE(reg->verify(victim.public_key, stale.view(), genuine));
    auto flipped_bits = encode_pair_rand(iter, 0, 1, bits ^ RankBits{1, 24});
    EXPECT_FALSE(reg->verify(victim.public_key, flipped_bits.view(), genuine));
    auto redirected = encode_pair_rand(iter, 0, 2, bits);
    EXPECT_FALSE(reg->verify(victim.public_key, redirected.view(), genuine));

    Signature mutated = genuine;
    mutated.bytes[rng.below(mutated.size)] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    EXPECT_FALSE(reg->verify(victim.public_key, genuine_msg.view(), mutated));

    Signature truncated = genuine;
    truncated.size = static_cast<std::uint8_t>(genuine.size - 1);
    EXPECT_FALSE(reg->verify(victim.public_key, genuine_msg.view(), truncated));

    Signature random_sig;
    random_sig.size = genuine.size;
    for (std::size_t k = 0; k < random_sig.size; ++k) random_sig.bytes[k] = static_cast<std::uint8_t>(rng.next());
    EXPECT_FALSE(reg->verify(victim.public_key, genuine_msg.view(), random_sig));

    auto own = reg->sign(forger.signing_key, genuine_msg.view());
    EXPECT_FALSE(reg->verify(victim.public_key, genuine_msg.view(), own));
  }
}

INSTANTIATE_TEST_SUITE_P(Backends, SigningTest,
                         ::testing::Values(SignatureBackend::Ideal, SignatureBackend::Ed25519),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Signing, EncodingLayout) {
  auto m = encode_pair_rand(0x0102030405060708ULL, 0x0a0b0c0d, 0x11121314, RankBits{0xbcdef, 20});
  ASSERT_EQ(m.size, 8u + 4u + 4u + 3u);
  const std::uint8_t expect[] = {1, 2, 3, 4, 5, 6, 7, 8, 0x0a, 0x0b, 0x0c, 0x0d,
                                 0x11, 0x12, 0x13, 0x14, 0x0b, 0xcd, 0xef};
  for (std::size_t k = 0; k < m.size; ++k) EXPECT_EQ(m.bytes[k], expect[k]) << k;
  EXPECT_EQ(encode_pair_rand(1, 0, 0, RankBits{~0ULL, 64}).size, 24u);
}

TEST(Signing, BackendNames) {
  EXPECT_EQ(parse_signature_backend("ideal"), SignatureBackend::Ideal);
  EXPECT_EQ(parse_signature_backend("ed25519"), SignatureBackend::Ed25519);
  EXPECT_THROW(parse_signature_backend("rsa"), ConfigError);
}
