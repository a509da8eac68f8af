#include <gtest/gtest.h>

#include <functional>

#include "fixture_path.hpp"
#include "ksync/msc.hpp"
#include "ksync/testkit/fixtures.hpp"
#include "ksync/testkit/generators.hpp"

using namespace ksync;

namespace {

// Independent reference: plain recursion over ready events, no memoization.
void naive_linearizations(const Msc& msc, const std::function<void(const std::vector<int>&)>& f) {
  int n = static_cast<int>(msc.events.size());
  std::vector<int> prev(n, -1);
  std::vector<int> last(msc.num_procs(), -1);
  for (int i = 0; i < n; ++i) {
    ProcId p = msc.events[i].action.actor();
    prev[i] = last[p];
    last[p] = i;
  }
  std::vector<bool> done(n, false);
  std::vector<int> order;
  std::function<void()> rec = [&] {
    if (static_cast<int>(order.size()) == n) {
      f(order);
      return;
    }
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      if (prev[i] >= 0 && !done[prev[i]]) continue;
      const auto& ev = msc.events[i];
      if (!ev.action.is_send() && !done[ev.match]) continue;
      done[i] = true;
      order.push_back(i);
      rec();
      order.pop_back();
      done[i] = false;
    }
  };
  rec();
}

bool same_channel(const Action& a, const Action& b, Comm comm) {
  if (a.receiver != b.receiver) return false;
  return comm == Comm::Mailbox || a.sender == b.sender;
}

// FIFO order on one linearization: a later matched send to the same buffer implies
// the earlier one is matched and received first.
bool fifo_respected(const Msc& msc, const std::vector<int>& order, Comm comm) {
  std::vector<int> pos(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& a = msc.events[order[i]];
    if (!a.action.is_send()) continue;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto& b = msc.events[order[j]];
      if (!b.action.is_send() || b.match < 0) continue;
      if (!same_channel(a.action, b.action, comm)) continue;
      if (a.match < 0 || pos[a.match] > pos[b.match]) return false;
    }
  }
  return true;
}

bool naive_causal(const Msc& msc, Comm comm) {
  bool found = false;
  naive_linearizations(msc, [&](const std::vector<int>& order) {
    found = found || fifo_respected(msc, order, comm);
  });
  return found;
}

// Whether the linearization cuts into blocks of <= k sends followed by <= k receives,
// each matched pair inside one block.
bool splits_into_blocks(const Msc& msc, const std::vector<int>& order, int k) {
  int n = static_cast<int>(order.size());
  std::vector<bool> ok(n + 1, false);
  ok[0] = true;
  for (int start = 0; start < n; ++start) {
    if (!ok[start]) continue;
    int sends = 0, recvs = 0;
    std::vector<bool> inside(msc.events.size(), false);
    for (int end = start; end < n; ++end) {
      const auto& ev = msc.events[order[end]];
      inside[order[end]] = true;
      if (ev.action.is_send()) {
        if (recvs > 0) break;
        ++sends;
      } else {
        ++recvs;
      }
      if (sends > k || recvs > k) break;
      bool closed = true;
      for (int t = start; t <= end && closed; ++t) {
        const auto& e = msc.events[order[t]];
        if (e.match >= 0 && !inside[e.match]) closed = false;
      }
      if (closed) ok[end + 1] = true;
    }
  }
  return ok[n];
}

bool naive_k_synchronous(const Msc& msc, int k) {
  if (!naive_causal(msc, Comm::Mailbox)) return false;
  bool found = false;
  naive_linearizations(msc, [&](const std::vector<int>& order) {
    found = found || splits_into_blocks(msc, order, k);
  });
  return found;
}

Msc load(const std::string& name) { return testkit::load_msc(fixture("msc/" + name + ".json")); }

}  // namespace

TEST(Msc, LinearizationCountMatchesNaiveEnumeration) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Msc msc = testkit::gen_msc(seed, 4, 3);
    std::size_t naive = 0;
    naive_linearizations(msc, [&](const std::vector<int>&) { ++naive; });
    ASSERT_EQ(count_linearizations(msc), naive) << "seed " << seed;
  }
}

TEST(Msc, LinearizationsRespectTheCausalOrder) {
  Msc msc = load("fig2c");
  std::size_t seen = 0;
  for_each_linearization(msc, [&](const Execution& e) {
    EXPECT_EQ(e.match, compute_matching(e.actions));
    ++seen;
    return seen < 50;
  });
  EXPECT_EQ(seen, 50u);
}

TEST(Msc, CausalOracleMatchesNaiveCheck) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    Msc msc = testkit::gen_msc(seed, 4, 3);
    for (Comm comm : {Comm::Mailbox, Comm::P2p}) {
      ASSERT_EQ(causal_delivery_oracle(msc, comm), naive_causal(msc, comm))
          << "seed " << seed << " comm " << int(comm);
    }
  }
}

TEST(Msc, KSynchronousOracleMatchesNaiveCheck) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    Msc msc = testkit::gen_msc(seed, 4, 3);
    for (int k = 1; k <= 3; ++k) {
      ASSERT_EQ(k_synchronous_oracle(msc, k), naive_k_synchronous(msc, k))
          << "seed " << seed << " k " << k;
    }
  }
}

TEST(Msc, KSynchronyIsMonotoneInK) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    Msc msc = testkit::gen_msc(seed, 6, 4);
    for (int k = 1; k < 4; ++k) {
      if (k_synchronous_oracle(msc, k)) {
        ASSERT_TRUE(k_synchronous_oracle(msc, k + 1)) << "seed " << seed << " k " << k;
      }
    }
  }
}

TEST(Msc, CausalDeliveryFixtures) {
  EXPECT_FALSE(causal_delivery_oracle(load("fig1a"), Comm::Mailbox));
  EXPECT_FALSE(causal_delivery_oracle(load("fig1a"), Comm::P2p));
  EXPECT_FALSE(causal_delivery_oracle(load("fig1b"), Comm::Mailbox));
  EXPECT_TRUE(causal_delivery_oracle(load("fig1b"), Comm::P2p));
  EXPECT_TRUE(causal_delivery_oracle(load("fig1c"), Comm::Mailbox));
  EXPECT_FALSE(causal_delivery_oracle(load("fig6"), Comm::Mailbox));
  EXPECT_TRUE(causal_delivery_oracle(load("empty"), Comm::Mailbox));
}

TEST(Msc, CyclicMscIsNotCausal) {
  Msc a = load("causal_counter_a");
  EXPECT_FALSE(is_acyclic(a));
  EXPECT_FALSE(causal_delivery_oracle(a, Comm::Mailbox));
  EXPECT_THROW(count_linearizations(a), Error);
  Msc b = load("causal_counter_b");
  EXPECT_TRUE(is_acyclic(b));
  EXPECT_FALSE(causal_delivery_oracle(b, Comm::Mailbox));
}

TEST(Msc, SynchronyFixtures) {
  Msc crossing = load("fig2a");
  for (int k = 1; k <= 5; ++k) EXPECT_FALSE(k_synchronous_oracle(crossing, k)) << k;

  Msc one = load("fig2b");
  EXPECT_TRUE(k_synchronous_oracle(one, 1));

  Msc five = load("fig2c");
  EXPECT_FALSE(k_synchronous_oracle(five, 4));
  EXPECT_TRUE(k_synchronous_oracle(five, 5));

  EXPECT_TRUE(k_synchronous_oracle(load("empty"), 1));
  EXPECT_THROW(k_synchronous_oracle(one, 0), Error);
}

TEST(Msc, ValidateRejectsInconsistentMatching) {
  Msc msc = load("fig2b");
  Msc bad = msc;
  bad.events[0].match = 1;
  EXPECT_THROW(validate(bad), Error);
  bad = msc;
  bad.events[2].action.msg = "other";
  EXPECT_THROW(validate(bad), Error);
  bad = msc;
  bad.events[2].match = -1;
  EXPECT_THROW(validate(bad), Error);
  EXPECT_NO_THROW(validate(msc));
}

TEST(Msc, CanonicalFormIgnoresListingOrder) {
  Msc msc = load("fig2b");
  bool checked = false;
  for_each_linearization(msc, [&](const Execution& e) {
    Msc other = msc_of(msc.procs, e);
    EXPECT_TRUE(isomorphic(msc, other));
    EXPECT_EQ(canonical_form(msc), canonical_form(other));
    checked = true;
    return true;
  });
  EXPECT_TRUE(checked);
  EXPECT_FALSE(isomorphic(msc, load("fig1c")));
}

TEST(Msc, GeneratedMscsAreWellFormed) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Msc msc = testkit::gen_msc(seed, 6, 4);
    EXPECT_NO_THROW(validate(msc));
    EXPECT_TRUE(is_acyclic(msc));
  }
}
