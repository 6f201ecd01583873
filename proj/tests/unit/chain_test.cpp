#include "f3b/chain.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "f3b/client.hpp"
#include "f3b/errors.hpp"
#include "test_keys.hpp"

namespace f3b::chain {
namespace {

using f3b::testing::make_committee;

ChainConfig small_config() {
  ChainConfig cfg;
  cfg.confirmations = 3;
  cfg.block_time_ms = 1000;
  return cfg;
}

struct Fixture {
  explicit Fixture(ChainConfig cfg = small_config(), std::uint64_t seed = 1)
      : rng(seed), chain(cfg), com(make_committee(4, 3, rng)) {
    alice = Identity::generate(rng);
    bob = Identity::generate(rng);
    mallory = Identity::generate(rng);
    EpochKeys keys;
    keys.epoch = 1;
    keys.threshold = 3;
    keys.tdh2_key = com.pk;
    chain.publish_epoch(keys);
    for (const auto* who : {&alice, &bob, &mallory}) chain.mint(who->address(), 100000);
  }

  // The committee's key for a TDH2 tx, as the SMC would reconstruct it.
  aead::SymmetricKey key_for(const TxId& id) {
    const auto ct = tdh2::Ciphertext::deserialize(chain.tx(id).tx.c_k);
    std::vector<tdh2::Share> shares;
    for (std::uint32_t i = 1; i <= 3; ++i) shares.push_back(tdh2::create_share(com.shares[i - 1], i, ct, chain.config().label, rng));
    return aead::derive_key(tdh2::combine(ct, shares, 3));
  }

  WriteTx transfer(const Identity& payer, const Identity& signer, std::uint64_t amount, std::uint64_t nonce,
                   bool with_hk = false) {
    auto inner = InnerTx::make(signer, bob.address(), amount, nonce).serialize();
    return client::build_tdh2_tx(payer, inner, chain, with_hk, rng);
  }

  void advance(std::size_t blocks) {
    for (std::size_t i = 0; i < blocks; ++i) chain.advance_block();
  }

  Rng rng;
  Chain chain;
  f3b::testing::Committee com;
  Identity alice, bob, mallory;
};

WriteTx raw_tx(const Identity& payer, std::size_t c_tx_bytes, std::size_t c_k_bytes, std::uint64_t per_byte = 1) {
  WriteTx tx;
  tx.epoch = 1;
  tx.c_tx = Bytes(c_tx_bytes, 0xAB);
  tx.c_k = Bytes(c_k_bytes, 0xCD);
  tx.deposit_paid = per_byte * tx.storage_bytes();
  tx.sign(payer);
  return tx;
}

TEST(Rational, Parse) {
  auto r = Rational::parse("0.9");
  EXPECT_EQ(r.num, 9u);
  EXPECT_EQ(r.den, 10u);
  EXPECT_EQ(Rational::parse("1").value(), 1.0);
  EXPECT_EQ(Rational::parse("3/4").apply(100), 75u);
  EXPECT_EQ(Rational::parse("0.9").apply(101), 90u);
  EXPECT_THROW(Rational::parse("abc"), DomainError);
  EXPECT_THROW(Rational::parse("1/0"), DomainError);
}

TEST(ChainConfig, Validation) {
  ChainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.confirmations = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.block_time_ms = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.refund_fraction = {11, 10};
  EXPECT_THROW(cfg.validate(), DomainError);
  EXPECT_THROW(Chain{cfg}, DomainError);
}

TEST(CollateralCheck, Boundaries) {
  const auto a = Rational::parse("0.1");
  EXPECT_TRUE(collateral_check(10, a, 5, 54));
  EXPECT_FALSE(collateral_check(10, a, 5, 55));
  EXPECT_FALSE(collateral_check(10, a, 0, 1));
  EXPECT_TRUE(collateral_check(10, a, 0, 0) == false);
  // Exact arithmetic where doubles would round.
  const Rational third{1, 3};
  EXPECT_FALSE(collateral_check(3, third, 1, 4));
  EXPECT_TRUE(collateral_check(3, third, 1, 3));
  EXPECT_TRUE(collateral_check(UINT64_MAX, Rational{1, 1}, 2, UINT64_MAX));
}

TEST(WriteTx, RoundTripAndSignature) {
  Rng rng(2);
  auto payer = Identity::generate(rng);
  auto tx = raw_tx(payer, 10, 20);
  tx.h_k = Bytes32{};
  tx.deposit_paid = tx.storage_bytes();
  tx.sign(payer);
  const auto bytes = tx.serialize();
  auto back = WriteTx::deserialize(bytes);
  EXPECT_EQ(back.serialize(), bytes);
  EXPECT_TRUE(back.signature_valid());
  EXPECT_EQ(back.id(), tx.id());
  back.deposit_paid += 1;
  EXPECT_FALSE(back.signature_valid());
  Bytes truncated(bytes.begin(), bytes.end() - 1);
  EXPECT_THROW(WriteTx::deserialize(truncated), DecodeError);
}

TEST(InnerTx, RoundTrip) {
  Rng rng(3);
  auto a = Identity::generate(rng);
  auto inner = InnerTx::make(a, Address{}, 5, 7, to_bytes("call"));
  auto back = InnerTx::deserialize(inner.serialize());
  EXPECT_TRUE(back.signature_valid());
  EXPECT_EQ(back.call, to_bytes("call"));
  back.amount = 6;
  EXPECT_FALSE(back.signature_valid());
}

TEST(Chain, SubmitDeductsDeposit) {
  Rng rng(4);
  Chain chain(small_config());
  chain.publish_epoch(EpochKeys{1, 1, {}, {}, {}, 0});
  auto payer = Identity::generate(rng);
  chain.mint(payer.address(), 1000);
  auto tx = raw_tx(payer, 60, 40);
  auto res = chain.submit_tx(tx);
  ASSERT_TRUE(res.accepted) << res.reason;
  EXPECT_EQ(chain.balance(payer.address()), 900u);
  EXPECT_EQ(chain.tx(res.id).state, TxState::kPending);
  EXPECT_EQ(chain.escrowed(), 100u);
  EXPECT_TRUE(chain.conserved());
}

TEST(Chain, Rejections) {
  Rng rng(5);
  Chain chain(small_config());
  chain.publish_epoch(EpochKeys{1, 1, {}, {}, {}, 0});
  auto payer = Identity::generate(rng);
  chain.mint(payer.address(), 50);

  auto poor = chain.submit_tx(raw_tx(payer, 60, 40));
  EXPECT_FALSE(poor.accepted);
  EXPECT_EQ(chain.balance(payer.address()), 50u);
  EXPECT_FALSE(chain.has_tx(poor.id));

  auto bad_sig = raw_tx(payer, 10, 10);
  bad_sig.signature[0] ^= 1;
  EXPECT_FALSE(chain.submit_tx(bad_sig).accepted);

  auto wrong_deposit = raw_tx(payer, 10, 10);
  wrong_deposit.deposit_paid = 5;
  wrong_deposit.sign(payer);
  EXPECT_FALSE(chain.submit_tx(wrong_deposit).accepted);

  auto malformed = chain.submit_bytes(Bytes{1, 2, 3});
  EXPECT_FALSE(malformed.accepted);
  EXPECT_EQ(chain.balance(payer.address()), 50u);

  auto stale = raw_tx(payer, 10, 10);
  stale.epoch = 7;
  stale.sign(payer);
  auto r = chain.submit_tx(stale);
  EXPECT_FALSE(r.accepted);
  EXPECT_TRUE(r.retriable);

  auto ok = raw_tx(payer, 10, 10);
  EXPECT_TRUE(chain.submit_tx(ok).accepted);
  EXPECT_FALSE(chain.submit_tx(ok).accepted);  // duplicate
  EXPECT_EQ(chain.balance(payer.address()), 30u);
  EXPECT_TRUE(chain.conserved());
}

TEST(Chain, FinalityAtMConfirmations) {
  ChainConfig cfg;  // m = 64, 12 s blocks
  Rng rng(6);
  Chain chain(cfg);
  chain.publish_epoch(EpochKeys{1, 1, {}, {}, {}, 0});
  auto payer = Identity::generate(rng);
  chain.mint(payer.address(), 1000);
  for (int i = 0; i < 5; ++i) chain.advance_block();
  auto id = chain.submit_tx(raw_tx(payer, 10, 10)).id;
  auto b = chain.advance_block();
  const std::uint64_t n = b.height;
  ASSERT_EQ(b.included, std::vector<TxId>{id});
  for (std::uint64_t h = n + 1; h < n + 64; ++h) {
    auto blk = chain.advance_block();
    EXPECT_TRUE(blk.finalized.empty());
    EXPECT_EQ(chain.tx(id).state, TxState::kIncluded);
  }
  auto fin = chain.advance_block();
  EXPECT_EQ(fin.height, n + 64);
  EXPECT_EQ(fin.finalized, std::vector<TxId>{id});
  EXPECT_EQ(fin.time_ms, (n + 64) * 12000);
  EXPECT_EQ(fin.time_ms - b.time_ms, 768000u);
  EXPECT_EQ(chain.tx(id).history.back().sim_time_ms, (n + 64) * 12000);
}

TEST(Chain, EmptyBlocks) {
  Chain chain(small_config());
  auto b1 = chain.advance_block();
  auto b2 = chain.advance_block();
  EXPECT_EQ(b1.height, 1u);
  EXPECT_EQ(b2.height, 2u);
  EXPECT_TRUE(b2.included.empty());
  EXPECT_EQ(b2.time_ms, 2000u);
}

TEST(Chain, BlockCapacityIsFifo) {
  auto cfg = small_config();
  cfg.block_capacity = 2;
  Rng rng(7);
  Chain chain(cfg);
  chain.publish_epoch(EpochKeys{1, 1, {}, {}, {}, 0});
  auto payer = Identity::generate(rng);
  chain.mint(payer.address(), 1000);
  std::vector<TxId> ids;
  for (int i = 0; i < 5; ++i) ids.push_back(chain.submit_tx(raw_tx(payer, 10 + i, 10)).id);
  auto b1 = chain.advance_block();
  auto b2 = chain.advance_block();
  auto b3 = chain.advance_block();
  EXPECT_EQ(b1.included, (std::vector<TxId>{ids[0], ids[1]}));
  EXPECT_EQ(b2.included, (std::vector<TxId>{ids[2], ids[3]}));
  EXPECT_EQ(b3.included, (std::vector<TxId>{ids[4]}));
}

TEST(Chain, ObserverSeesNoPlaintext) {
  Fixture f;
  const Bytes marker = to_bytes("SECRET-SWAP-ORDER-0xdeadbeef-buy-1000-ETH");
  auto inner = InnerTx::make(f.alice, f.bob.address(), 5, 1, marker).serialize();
  auto tx = client::build_tdh2_tx(f.alice, inner, f.chain, true, f.rng);
  ASSERT_TRUE(f.chain.submit_tx(tx).accepted);
  auto view = f.chain.mempool_view();
  ASSERT_EQ(view.size(), 1u);
  EXPECT_EQ(view[0], tx.serialize());
  auto contains = [](const Bytes& hay, ByteView needle) {
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
  };
  EXPECT_FALSE(contains(view[0], marker));
  EXPECT_FALSE(contains(view[0], ByteView(inner).subspan(0, 40)));
  EXPECT_FALSE(contains(view[0], f.bob.address()));
}

TEST(Chain, HonestLifecycleAndRefund) {
  Fixture f;
  auto tx = f.transfer(f.alice, f.alice, 250, 1, true);
  const std::uint64_t before = f.chain.balance(f.alice.address());
  auto id = f.chain.submit_tx(tx).id;
  const std::uint64_t deposit = tx.storage_bytes();
  EXPECT_EQ(f.chain.balance(f.alice.address()), before - deposit);
  f.advance(1);
  const std::uint64_t n = f.chain.tx(id).included_height;
  const auto key = f.key_for(id);
  EXPECT_THROW(f.chain.reveal_and_execute(id, key), OrderingError);
  f.advance(3);
  ASSERT_EQ(f.chain.tx(id).state, TxState::kFinalized);
  auto res = f.chain.reveal_and_execute(id, key);
  EXPECT_EQ(res.status, ExecStatus::kSuccess);
  EXPECT_EQ(res.refund, deposit * 9 / 10);
  EXPECT_EQ(f.chain.tx(id).state, TxState::kExecuted);
  EXPECT_EQ(f.chain.balance(f.alice.address()), before - deposit + deposit * 9 / 10 - 250);
  EXPECT_EQ(f.chain.balance(f.bob.address()), 100000u + 250);
  EXPECT_THROW(f.chain.reveal_and_execute(id, key), OrderingError);
  EXPECT_FALSE(f.chain.stored_key(id));
  f.advance(1);
  auto stored = f.chain.stored_key(id);
  ASSERT_TRUE(stored);
  EXPECT_EQ(stored->first, key);
  EXPECT_GE(stored->second, n + 3 + 1);
  EXPECT_LE(stored->second, n + 3 + f.chain.config().key_write_deadline_blocks);
  EXPECT_TRUE(f.chain.conserved());
}

TEST(Chain, WrongKeyFailsAndForfeitsDeposit) {
  Fixture f;
  auto tx = f.transfer(f.alice, f.alice, 10, 1);
  auto id = f.chain.submit_tx(tx).id;
  f.advance(4);
  const auto burned = f.chain.burned();
  const auto bal = f.chain.balance(f.alice.address());
  Bytes32 random_key;
  f.rng.fill(random_key);
  auto res = f.chain.reveal_and_execute(id, aead::SymmetricKey(random_key));
  EXPECT_EQ(res.status, ExecStatus::kFailed);
  EXPECT_EQ(f.chain.tx(id).state, TxState::kFailed);
  EXPECT_EQ(f.chain.burned(), burned + tx.storage_bytes());
  EXPECT_EQ(f.chain.balance(f.alice.address()), bal);
  EXPECT_TRUE(f.chain.conserved());
}

TEST(Chain, HashCommitmentMismatchIsRejected) {
  Fixture f;
  auto id = f.chain.submit_tx(f.transfer(f.alice, f.alice, 10, 1, true)).id;
  f.advance(4);
  Bytes32 other;
  f.rng.fill(other);
  EXPECT_THROW(f.chain.reveal_and_execute(id, aead::SymmetricKey(other)), KeyRejectedError);
  EXPECT_EQ(f.chain.tx(id).state, TxState::kFinalized);
  f.chain.fail_tx(id, "h_k mismatch");
  EXPECT_EQ(f.chain.tx(id).state, TxState::kFailed);
  EXPECT_TRUE(f.chain.conserved());
}

TEST(Chain, CopiedEnvelopeReplaysVictimTransaction) {
  Fixture f;
  auto victim = f.transfer(f.alice, f.alice, 500, 42);
  // Mallory copies c_tx and c_k into her own envelope and gets it in first.
  auto copy = client::seal_envelope(f.mallory, victim.protocol, victim.epoch, victim.c_tx, victim.c_k, victim.h_k,
                                    f.chain.config().deposit_per_byte);
  const auto mallory_before = f.chain.balance(f.mallory.address());
  const auto bob_before = f.chain.balance(f.bob.address());
  auto copy_id = f.chain.submit_tx(copy).id;
  auto victim_id = f.chain.submit_tx(victim).id;
  f.advance(4);
  const auto key = f.key_for(victim_id);
  auto r1 = f.chain.reveal_and_execute(copy_id, key);
  auto r2 = f.chain.reveal_and_execute(victim_id, key);
  EXPECT_EQ(r1.status, ExecStatus::kSuccess);
  ASSERT_TRUE(r1.inner);
  EXPECT_EQ(r1.inner->signer, f.alice.public_key());
  EXPECT_EQ(r2.status, ExecStatus::kReverted);
  EXPECT_EQ(f.chain.balance(f.bob.address()), bob_before + 500);
  EXPECT_LT(f.chain.balance(f.mallory.address()), mallory_before);
  // The trace shows the attacker's envelope executing Alice's transfer.
  const std::string signer = to_hex(ByteView(f.alice.public_key().data(), 8));
  bool seen = false;
  for (const auto& e : f.chain.trace().events()) {
    if (e.tx == short_id(copy_id) && e.event == "Executed") {
      seen = e.detail.find("signer=" + signer) != std::string::npos &&
             e.detail.find("status=success") != std::string::npos;
    }
  }
  EXPECT_TRUE(seen);
  EXPECT_TRUE(f.chain.conserved());
}

TEST(Chain, DecoyPayer) {
  Fixture f;
  auto tx = f.transfer(f.mallory, f.alice, 7, 3);  // mallory pays, alice signs the transfer
  auto id = f.chain.submit_tx(tx).id;
  f.advance(4);
  auto res = f.chain.reveal_and_execute(id, f.key_for(id));
  EXPECT_EQ(res.status, ExecStatus::kSuccess);
  EXPECT_EQ(f.chain.balance(f.alice.address()), 100000u - 7);
}

TEST(Chain, Disputes) {
  Fixture f;
  const auto stake = 10u;
  f.chain.post_collateral(2, f.bob.address(), 100);
  auto id = f.chain.submit_tx(f.transfer(f.alice, f.alice, 1, 1)).id;
  f.advance(1);
  const auto ct = tdh2::Ciphertext::deserialize(f.chain.tx(id).tx.c_k);
  const auto share = tdh2::create_share(f.com.shares[1], 2, ct, f.chain.config().label, f.rng);

  auto unknown = f.chain.file_dispute(TxId{}, share, f.mallory.address(), stake);
  EXPECT_EQ(unknown.verdict, Verdict::kRejected);
  EXPECT_EQ(f.chain.balance(f.mallory.address()), 100000u);

  auto forged = share;
  forged.f_i = forged.f_i + Scalar::from_u64(1);
  auto no = f.chain.file_dispute(id, forged, f.mallory.address(), stake);
  EXPECT_EQ(no.verdict, Verdict::kNoSlash);
  EXPECT_EQ(f.chain.balance(f.mallory.address()), 100000u - stake);

  auto slash = f.chain.file_dispute(id, share, f.mallory.address(), stake);
  EXPECT_EQ(slash.verdict, Verdict::kSlash);
  EXPECT_EQ(slash.defendant, 2u);
  EXPECT_EQ(slash.transferred, 100u);
  EXPECT_EQ(f.chain.balance(f.mallory.address()), 100000u - stake + 100);
  EXPECT_EQ(f.chain.collateral(1, 2), 0u);

  f.advance(3);
  f.chain.reveal_and_execute(id, f.key_for(id));
  const auto share3 = tdh2::create_share(f.com.shares[2], 3, ct, f.chain.config().label, f.rng);
  auto late = f.chain.file_dispute(id, share3, f.mallory.address(), stake);
  EXPECT_EQ(late.verdict, Verdict::kNoSlash);
  EXPECT_TRUE(f.chain.conserved());
}

TEST(Chain, EpochGraceWindow) {
  auto cfg = small_config();
  cfg.epoch_grace_blocks = 5;
  Fixture f(cfg);
  EpochKeys next;
  next.epoch = 2;
  next.threshold = 3;
  next.tdh2_key = f.com.pk;
  f.chain.publish_epoch(next);
  EXPECT_TRUE(f.chain.epoch_accepted(1));
  EXPECT_NO_THROW(client::build_tdh2_tx(f.alice, Bytes{1}, f.chain, false, f.rng, 1));
  auto in_window = f.transfer(f.alice, f.alice, 1, 1);
  in_window.epoch = 1;
  in_window.sign(f.alice);
  EXPECT_TRUE(f.chain.submit_tx(in_window).accepted);
  f.advance(6);
  EXPECT_FALSE(f.chain.epoch_accepted(1));
  EXPECT_TRUE(f.chain.epoch_accepted(2));
  auto late = f.transfer(f.alice, f.alice, 1, 2);
  late.epoch = 1;
  late.sign(f.alice);
  auto r = f.chain.submit_tx(late);
  EXPECT_FALSE(r.accepted);
  EXPECT_TRUE(r.retriable);
  EXPECT_THROW(client::build_tdh2_tx(f.alice, Bytes{1}, f.chain, false, f.rng, 1), RetriableError);
}

TEST(Chain, MissedKeyDeadlineIsTraced) {
  Fixture f;
  auto id = f.chain.submit_tx(f.transfer(f.alice, f.alice, 1, 1)).id;
  f.advance(4 + f.chain.config().key_write_deadline_blocks);
  f.chain.reveal_and_execute(id, f.key_for(id));
  f.advance(2);
  EXPECT_FALSE(f.chain.stored_key(id));
  bool missed = false;
  for (const auto& e : f.chain.trace().events()) missed |= e.event == "KeyDeadlineMissed";
  EXPECT_TRUE(missed);
}

// Random interleavings of submissions, blocks, reveals and failures keep
// fee units conserved and every lifecycle monotone.
TEST(ChainProperty, ConservationAndMonotoneLifecycle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto cfg = small_config();
    cfg.execution_fee = seed % 3;
    cfg.block_capacity = seed % 4;
    Fixture f(cfg, 100 + seed);
    std::vector<TxId> ids;
    for (int step = 0; step < 60; ++step) {
      switch (f.rng.uniform(4)) {
        case 0: {
          const auto& payer = f.rng.uniform(2) ? f.alice : f.mallory;
          auto r = f.chain.submit_tx(f.transfer(payer, f.alice, f.rng.uniform(3000), f.rng.uniform(5),
                                                f.rng.uniform(2) == 1));
          if (r.accepted) ids.push_back(r.id);
          break;
        }
        case 1:
          f.chain.advance_block();
          break;
        default: {
          if (ids.empty()) break;
          const auto& id = ids[f.rng.uniform(ids.size())];
          if (f.chain.tx(id).state != TxState::kFinalized) {
            EXPECT_THROW(f.chain.reveal_and_execute(id, f.key_for(id)), OrderingError);
          } else if (f.rng.uniform(5) == 0) {
            f.chain.fail_tx(id, "test");
          } else {
            f.chain.reveal_and_execute(id, f.key_for(id));
          }
        }
      }
      ASSERT_TRUE(f.chain.conserved()) << "seed " << seed << " step " << step;
    }
    for (const auto& id : ids) {
      const auto& hist = f.chain.tx(id).history;
      for (std::size_t i = 1; i < hist.size(); ++i) {
        EXPECT_LT(static_cast<int>(hist[i - 1].state), static_cast<int>(hist[i].state));
        EXPECT_LE(hist[i - 1].sim_time_ms, hist[i].sim_time_ms);
      }
      const auto& rec = f.chain.tx(id);
      if (rec.state == TxState::kExecuted) {
        ASSERT_GE(hist.size(), 4u);
        EXPECT_EQ(hist[hist.size() - 2].state, TxState::kRevealed);
        if (rec.key_height) {
          EXPECT_GE(*rec.key_height, rec.included_height + cfg.confirmations + 1);
          EXPECT_LE(*rec.key_height, rec.included_height + cfg.confirmations + cfg.key_write_deadline_blocks);
        }
      }
    }
  }
}

}  // namespace
}  // namespace f3b::chain
