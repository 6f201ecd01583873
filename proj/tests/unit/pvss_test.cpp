#include "f3b/pvss.hpp"

#include <gtest/gtest.h>

#include "f3b/aead.hpp"
#include "f3b/errors.hpp"
#include "test_keys.hpp"

namespace f3b::pvss {
namespace {

using f3b::testing::for_each_subset;

const Label kLabel("chain-A");

struct Roster {
  std::vector<Scalar> sks;
  std::vector<GroupElement> pks;
};

Roster make_roster(std::uint32_t n, Rng& rng) {
  Roster r;
  for (std::uint32_t i = 0; i < n; ++i) {
    r.sks.push_back(Scalar::random(rng));
    r.pks.push_back(base_pow(r.sks.back()));
  }
  return r;
}

TEST(Pvss, DealVerifies) {
  Rng rng(30);
  auto roster = make_roster(4, rng);
  auto res = deal(roster.pks, 2, kLabel, rng);
  ASSERT_EQ(res.deal.encrypted_shares.size(), 4u);
  ASSERT_EQ(res.deal.threshold(), 2u);
  for (std::uint32_t i = 1; i <= 4; ++i) EXPECT_TRUE(verify_deal_share(res.deal, i, roster.pks[i - 1], kLabel));
  EXPECT_THROW(deal(roster.pks, 5, kLabel, rng), DomainError);
  EXPECT_THROW(deal(roster.pks, 0, kLabel, rng), DomainError);
}

TEST(Pvss, ConstantPolynomialCommitment) {
  Rng rng(31);
  auto roster = make_roster(3, rng);
  auto res = deal(roster.pks, 1, kLabel, rng);
  for (std::uint32_t i = 1; i <= 3; ++i) EXPECT_EQ(commitment_at(res.deal.commitments, i), res.deal.commitments[0]);
}

TEST(Pvss, CommitmentHornerMatchesNaive) {
  Rng rng(32);
  std::vector<GroupElement> b;
  for (int j = 0; j < 5; ++j) b.push_back(GroupElement::random(rng));
  for (std::uint32_t i : {1u, 2u, 7u, 128u}) {
    GroupElement acc = GroupElement::identity();
    Scalar power = Scalar::one();
    for (const auto& bj : b) {
      acc = acc * (bj ^ power);
      power = power * Scalar::from_u64(i);
    }
    EXPECT_EQ(commitment_at(b, i), acc);
  }
}

TEST(Pvss, ExhaustivePipelineN5T3) {
  Rng rng(33);
  auto roster = make_roster(5, rng);
  auto res = deal(roster.pks, 3, kLabel, rng);
  std::vector<DecShare> decs;
  for (std::uint32_t i = 1; i <= 5; ++i) {
    const auto& e = res.deal.share_for(i);
    ASSERT_TRUE(verify_deal_share(res.deal, i, roster.pks[i - 1], kLabel));
    decs.push_back(decrypt_share(roster.sks[i - 1], i, e.s_hat, rng));
    ASSERT_TRUE(verify_dec_share(roster.pks[i - 1], e.s_hat, decs.back()));
    // Re-encrypting s_i gives back s_hat.
    EXPECT_EQ(decs.back().s_i ^ roster.sks[i - 1], e.s_hat);
  }
  int count = 0;
  for_each_subset(5, 3, [&](const std::vector<std::uint32_t>& idx) {
    std::vector<DecShare> sub;
    for (auto i : idx) sub.push_back(decs[i - 1]);
    EXPECT_EQ(reconstruct(sub, 3), res.secret);
    EXPECT_EQ(aead::derive_key(reconstruct(sub, 3)), aead::derive_key(res.secret));
    ++count;
  });
  EXPECT_EQ(count, 10);
  std::vector<DecShare> two(decs.begin(), decs.begin() + 2);
  EXPECT_THROW(reconstruct(two, 3), ThresholdError);
  EXPECT_NE(reconstruct(two, 2), res.secret);
}

TEST(Pvss, SingleTrustee) {
  Rng rng(34);
  auto roster = make_roster(1, rng);
  auto res = deal(roster.pks, 1, kLabel, rng);
  auto dec = decrypt_share(roster.sks[0], 1, res.deal.share_for(1).s_hat, rng);
  std::vector<DecShare> one{dec};
  EXPECT_EQ(reconstruct(one, 1), dec.s_i);
  EXPECT_EQ(dec.s_i, res.secret);
}

TEST(Pvss, DealTamper) {
  Rng rng(35);
  auto roster = make_roster(4, rng);
  auto res = deal(roster.pks, 2, kLabel, rng);
  auto bad = res.deal;
  bad.encrypted_shares[1].s_hat = bad.encrypted_shares[1].s_hat * roster.pks[1];  // pk^{s(i)+1}
  EXPECT_FALSE(verify_deal_share(bad, 2, roster.pks[1], kLabel));
  EXPECT_TRUE(verify_deal_share(bad, 1, roster.pks[0], kLabel));
  auto other = deal(roster.pks, 2, kLabel, rng);
  bad = res.deal;
  bad.commitments = other.deal.commitments;
  for (std::uint32_t i = 1; i <= 4; ++i) EXPECT_FALSE(verify_deal_share(bad, i, roster.pks[i - 1], kLabel));
  // Wrong trustee key.
  EXPECT_FALSE(verify_deal_share(res.deal, 1, roster.pks[1], kLabel));
}

TEST(Pvss, LabelBinding) {
  Rng rng(36);
  auto roster = make_roster(3, rng);
  auto res = deal(roster.pks, 2, kLabel, rng);
  for (int i = 0; i < 100; ++i) {
    Label other("chain-" + std::to_string(i));
    for (std::uint32_t j = 1; j <= 3; ++j) EXPECT_FALSE(verify_deal_share(res.deal, j, roster.pks[j - 1], other));
  }
}

TEST(Pvss, DecShareTamper) {
  Rng rng(37);
  auto roster = make_roster(3, rng);
  auto res = deal(roster.pks, 2, kLabel, rng);
  const auto& s1 = res.deal.share_for(1).s_hat;
  auto dec = decrypt_share(roster.sks[0], 1, s1, rng);
  auto bad = dec;
  bad.s_i = bad.s_i * GroupElement::generator();
  EXPECT_FALSE(verify_dec_share(roster.pks[0], s1, bad));
  // Proof from another trustee transplanted.
  auto dec2 = decrypt_share(roster.sks[1], 2, res.deal.share_for(2).s_hat, rng);
  bad = dec;
  bad.proof = dec2.proof;
  EXPECT_FALSE(verify_dec_share(roster.pks[0], s1, bad));
  // Wrong secret key.
  auto forged = decrypt_share(roster.sks[0] + Scalar::one(), 1, s1, rng);
  EXPECT_FALSE(verify_dec_share(roster.pks[0], s1, forged));
  EXPECT_THROW(decrypt_share(Scalar::zero(), 1, s1, rng), DomainError);
}

TEST(Pvss, SerializationAndSize) {
  Rng rng(38);
  std::vector<std::size_t> sizes;
  for (std::uint32_t n : {8u, 16u, 32u}) {
    auto roster = make_roster(n, rng);
    std::size_t t = n / 2 + 1;
    auto res = deal(roster.pks, t, kLabel, rng);
    auto bytes = res.deal.serialize();
    EXPECT_EQ(bytes.size(), 8 + 100 * n + 32 * t);
    EXPECT_EQ(bytes.size(), Deal::serialized_size(n, t));
    EXPECT_EQ(Deal::deserialize(bytes), res.deal);
    Bytes trunc(bytes.begin(), bytes.end() - 1);
    EXPECT_THROW(Deal::deserialize(trunc), DecodeError);
  }
  auto roster = make_roster(2, rng);
  auto res = deal(roster.pks, 1, kLabel, rng);
  auto dec = decrypt_share(roster.sks[0], 1, res.deal.share_for(1).s_hat, rng);
  EXPECT_EQ(dec.serialize().size(), kDecShareBytes);
  EXPECT_EQ(DecShare::deserialize(dec.serialize()), dec);
}

TEST(Pvss, SettingMatchesPlainPath) {
  Rng rng(39);
  auto roster = make_roster(6, rng);
  Setting setting(kLabel, roster.pks);
  EXPECT_EQ(setting.h(), derive_generator(kLabel));
  auto res = deal(setting, 4, rng);
  for (std::uint32_t i = 1; i <= 6; ++i) {
    EXPECT_TRUE(verify_deal_share(res.deal, i, setting));
    EXPECT_TRUE(verify_deal_share(res.deal, i, roster.pks[i - 1], kLabel));
    auto dec = decrypt_share(roster.sks[i - 1], i, res.deal.share_for(i).s_hat, rng);
    EXPECT_TRUE(verify_dec_share(setting.pk_table(i), res.deal.share_for(i).s_hat, dec));
  }
}

}  // namespace
}  // namespace f3b::pvss
