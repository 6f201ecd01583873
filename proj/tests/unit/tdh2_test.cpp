#include "f3b/tdh2.hpp"

#include <gtest/gtest.h>

#include "f3b/errors.hpp"
#include "test_keys.hpp"

namespace f3b::tdh2 {
namespace {

using f3b::testing::for_each_subset;
using f3b::testing::make_committee;

const Label kLabel("chain-A");

TEST(Tdh2, SerializedSizes) {
  Rng rng(10);
  for (std::uint32_t n : {8u, 128u}) {
    auto com = make_committee(n, n / 2 + 1, rng);
    auto ct = encrypt(com.pk, GroupElement::random(rng), kLabel, rng);
    auto bytes = ct.serialize();
    EXPECT_EQ(bytes.size(), kCiphertextBytes);
    EXPECT_EQ(Ciphertext::deserialize(bytes), ct);
    auto share = create_share(com.shares[0], 1, ct, kLabel, rng);
    EXPECT_EQ(share.serialize().size(), kShareBytes);
    EXPECT_EQ(Share::deserialize(share.serialize()), share);
  }
  EXPECT_THROW(Ciphertext::deserialize(Bytes(159)), DecodeError);
  EXPECT_THROW(Share::deserialize(Bytes(101)), DecodeError);
}

TEST(Tdh2, KnownRandomnessIdentity) {
  Rng rng(11);
  auto com = make_committee(3, 2, rng);
  auto k = GroupElement::random(rng);
  auto r = Scalar::random(rng);
  auto ct = encrypt_with(com.pk.pk, k, kLabel, r, Scalar::random(rng));
  EXPECT_EQ(ct.c / (com.pk.pk ^ r), k);
  EXPECT_EQ(ct.u, base_pow(r));
  EXPECT_TRUE(verify_ciphertext(ct, kLabel));
}

TEST(Tdh2, Randomized) {
  Rng rng(12);
  auto com = make_committee(3, 2, rng);
  auto k = GroupElement::random(rng);
  auto a = encrypt(com.pk, k, kLabel, rng);
  auto b = encrypt(com.pk, k, kLabel, rng);
  EXPECT_NE(a.c, b.c);
  EXPECT_NE(a.u, b.u);
}

TEST(Tdh2, ExhaustiveSubsetsN4T2) {
  Rng rng(13);
  auto com = make_committee(4, 2, rng);
  auto k = GroupElement::random(rng);
  auto ct = encrypt(com.pk, k, kLabel, rng);
  std::vector<Share> shares;
  for (std::uint32_t i = 1; i <= 4; ++i) {
    shares.push_back(create_share(com.shares[i - 1], i, ct, kLabel, rng));
    ASSERT_TRUE(verify_share(ct, shares.back(), com.pk.verification_key(i)));
  }
  int count = 0;
  for_each_subset(4, 2, [&](const std::vector<std::uint32_t>& idx) {
    std::vector<Share> sub;
    for (auto i : idx) sub.push_back(shares[i - 1]);
    EXPECT_EQ(combine(ct, sub, 2), k);
    ++count;
  });
  EXPECT_EQ(count, 6);
}

TEST(Tdh2, CompletenessUpTo16) {
  Rng rng(14);
  for (std::uint32_t n = 1; n <= 16; ++n) {
    std::size_t t = n / 2 + 1;
    auto com = make_committee(n, t, rng);
    auto k = GroupElement::random(rng);
    auto ct = encrypt(com.pk, k, kLabel, rng);
    std::vector<Share> shares;
    for (std::uint32_t i = n; i >= 1; --i) {
      shares.push_back(create_share(com.shares[i - 1], i, ct, kLabel, rng));
      ASSERT_TRUE(verify_share(ct, shares.back(), com.pk.verification_key(i)));
    }
    EXPECT_EQ(combine(ct, shares, t), k) << n;
  }
}

TEST(Tdh2, ThresholdAndDuplicates) {
  Rng rng(15);
  auto com = make_committee(4, 3, rng);
  auto ct = encrypt(com.pk, GroupElement::random(rng), kLabel, rng);
  std::vector<Share> two{create_share(com.shares[0], 1, ct, kLabel, rng),
                         create_share(com.shares[1], 2, ct, kLabel, rng)};
  EXPECT_THROW(combine(ct, two, 3), ThresholdError);
  two.push_back(two[0]);
  EXPECT_THROW(combine(ct, two, 3), DomainError);
}

TEST(Tdh2, BelowThresholdWrongKey) {
  Rng rng(16);
  auto com = make_committee(5, 3, rng);
  auto k = GroupElement::random(rng);
  auto ct = encrypt(com.pk, k, kLabel, rng);
  std::vector<Share> two{create_share(com.shares[0], 1, ct, kLabel, rng),
                         create_share(com.shares[1], 2, ct, kLabel, rng)};
  EXPECT_NE(combine(ct, two, 2), k);
}

TEST(Tdh2, LabelBinding) {
  Rng rng(17);
  auto com = make_committee(3, 2, rng);
  auto ct = encrypt(com.pk, GroupElement::random(rng), kLabel, rng);
  EXPECT_TRUE(verify_ciphertext(ct, kLabel));
  for (int i = 0; i < 100; ++i) {
    Label other("chain-" + std::to_string(i));
    EXPECT_FALSE(verify_ciphertext(ct, other));
    EXPECT_THROW(create_share(com.shares[0], 1, ct, other, rng), RefusalError);
  }
}

TEST(Tdh2, ForgedUBarRejected) {
  Rng rng(18);
  auto com = make_committee(3, 2, rng);
  auto ct = encrypt(com.pk, GroupElement::random(rng), kLabel, rng);
  ct.u_bar = table_g_bar().pow(Scalar::random(rng));
  EXPECT_FALSE(verify_ciphertext(ct, kLabel));
}

TEST(Tdh2, TamperedCiphertextRefused) {
  Rng rng(19);
  auto com = make_committee(3, 2, rng);
  auto ct = encrypt(com.pk, GroupElement::random(rng), kLabel, rng);
  auto bytes = ct.serialize();
  int refused = 0;
  for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
    Bytes bad = bytes;
    bad[pos] ^= 0x01;
    Ciphertext parsed;
    try {
      parsed = Ciphertext::deserialize(bad);
    } catch (const DecodeError&) {
      ++refused;
      continue;
    }
    EXPECT_FALSE(verify_ciphertext(parsed, kLabel)) << pos;
    EXPECT_THROW(create_share(com.shares[0], 1, parsed, kLabel, rng), RefusalError);
    ++refused;
  }
  EXPECT_EQ(refused, static_cast<int>(bytes.size()));
}

TEST(Tdh2, ShareBoundToIndex) {
  Rng rng(20);
  auto com = make_committee(3, 2, rng);
  auto ct = encrypt(com.pk, GroupElement::random(rng), kLabel, rng);
  for (std::uint32_t i = 1; i <= 3; ++i) {
    auto share = create_share(com.shares[i - 1], i, ct, kLabel, rng);
    for (std::uint32_t j = 1; j <= 3; ++j)
      EXPECT_EQ(verify_share(ct, share, com.pk.verification_key(j)), i == j);
  }
}

TEST(Tdh2, ShareTamper) {
  Rng rng(21);
  auto com = make_committee(3, 2, rng);
  auto ct = encrypt(com.pk, GroupElement::random(rng), kLabel, rng);
  auto share = create_share(com.shares[0], 1, ct, kLabel, rng);
  const auto& h1 = com.pk.verification_key(1);
  auto bad = share;
  bad.u_i = bad.u_i * GroupElement::generator();
  EXPECT_FALSE(verify_share(ct, bad, h1));
  bad = share;
  bad.f_i = bad.f_i + Scalar::one();
  EXPECT_FALSE(verify_share(ct, bad, h1));
  bad = share;
  bad.e_i = bad.e_i + Scalar::one();
  EXPECT_FALSE(verify_share(ct, bad, h1));
  // A share for another ciphertext does not verify here.
  auto ct2 = encrypt(com.pk, GroupElement::random(rng), kLabel, rng);
  EXPECT_FALSE(verify_share(ct2, share, h1));
}

TEST(Tdh2, UnverifiedBadShareGivesWrongKey) {
  Rng rng(22);
  auto com = make_committee(4, 2, rng);
  auto k = GroupElement::random(rng);
  auto ct = encrypt(com.pk, k, kLabel, rng);
  std::vector<Share> s{create_share(com.shares[0], 1, ct, kLabel, rng),
                       create_share(com.shares[1], 2, ct, kLabel, rng)};
  s[1].u_i = s[1].u_i * GroupElement::generator();
  EXPECT_NE(combine(ct, s, 2), k);
}

}  // namespace
}  // namespace f3b::tdh2
