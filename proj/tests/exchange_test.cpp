#include <gtest/gtest.h>

#include <deque>
#include <functional>
#include <set>

#include "fixture_path.hpp"
#include "ksync/exchange.hpp"
#include "ksync/testkit/fixtures.hpp"
#include "ksync/testkit/generators.hpp"
#include "ksync/testkit/oracle_suite.hpp"

using namespace ksync;

namespace {

using KeyedTarget = std::pair<std::string, std::vector<int>>;

// Sends first, then receives, walking the automata directly with real buffers.
std::set<KeyedTarget> naive_exchanges(const System& sys, const std::vector<int>& from, int k) {
  std::set<KeyedTarget> out;
  std::vector<int> global = from;
  std::vector<std::deque<Message>> buffers(sys.num_buffers());
  std::vector<Action> acts;
  std::function<void(bool)> dfs = [&](bool receiving) {
    int sends = 0;
    for (const auto& a : acts) sends += a.is_send();
    if (sends > 0) {
      KExchange e{acts, compute_matching(acts)};
      out.insert({exchange_key(e, sys.num_procs()), global});
    }
    for (ProcId p = 0; p < sys.num_procs(); ++p) {
      for (const auto& t : sys.automata[p].transitions) {
        if (t.from != global[p]) continue;
        const Action& a = t.action;
        auto& buf = buffers[sys.buffer_index(a.sender, a.receiver)];
        if (a.is_send()) {
          if (receiving || sends == k) continue;
          buf.push_back({a.sender, a.msg});
        } else {
          if (buf.empty() || buf.front() != Message{a.sender, a.msg}) continue;
          buf.pop_front();
        }
        int old = global[p];
        global[p] = t.to;
        acts.push_back(a);
        dfs(receiving || !a.is_send());
        acts.pop_back();
        global[p] = old;
        if (a.is_send()) {
          buf.pop_back();
        } else {
          buf.push_front({a.sender, a.msg});
        }
      }
    }
  };
  dfs(false);
  return out;
}

std::set<KeyedTarget> library_exchanges(const System& sys, const std::vector<int>& from, int k) {
  std::set<KeyedTarget> out;
  for (const auto& st : distinct_k_exchanges(sys, from, k)) {
    out.insert({exchange_key(st.exchange, sys.num_procs()), st.target});
  }
  return out;
}

std::vector<int> goal_of(const System& sys, const json& goal) {
  std::vector<int> g(sys.num_procs(), -1);
  for (const auto& [proc, state] : goal.items()) {
    ProcId p = sys.proc_index(proc);
    g[p] = sys.automata[p].state_index(state.get<std::string>());
  }
  return g;
}

}  // namespace

TEST(Exchange, BookkeepingAcrossTwoExchanges) {
  std::string path = fixture("runs/example4.json");
  testkit::RandomRun run = testkit::load_run(path);
  json expect = testkit::load_expect(path);
  System bare = testkit::bare_system(run.procs, Comm::Mailbox);
  auto set_of = [&](const json& names) {
    ProcSet s = 0;
    for (const auto& n : names) s |= bit(bare.proc_index(n.get<std::string>()));
    return s;
  };
  ProcId r = bare.proc_index("r");
  ASSERT_EQ(run.exchanges.size(), 2u);

  StepOutcome first = try_step_k(run.exchanges[0], Bookkeeping::empty(bare.num_procs()));
  ASSERT_TRUE(first.book.has_value());
  EXPECT_EQ(first.book->cs[r], set_of(expect["afterFirst"]["r"]["cs"]));
  EXPECT_EQ(first.book->cr[r], set_of(expect["afterFirst"]["r"]["cr"]));

  StepOutcome second = try_step_k(run.exchanges[1], *first.book);
  EXPECT_FALSE(second.book.has_value());
  EXPECT_EQ(second.violation, bare.proc_index(expect["violation"].get<std::string>()));
  EXPECT_EQ(second.computed.cs[r], set_of(expect["afterSecond"]["r"]["cs"]));
  EXPECT_EQ(second.computed.cr[r], set_of(expect["afterSecond"]["r"]["cr"]));

  AbstractConfig cfg{std::vector<int>(bare.num_procs(), 0), *first.book};
  try {
    step_k(cfg, ExchangeStep{run.exchanges[1], cfg.global});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::CausalDeliveryViolation);
  }
}

TEST(Exchange, LocalGraphHasSummaryNodes) {
  testkit::RandomRun run = testkit::load_run(fixture("runs/example4.json"));
  Bookkeeping book = *try_step_k(run.exchanges[0], Bookkeeping::empty(4)).book;
  LocalGraph lg = local_graph(run.exchanges[1], book);
  EXPECT_EQ(lg.base_size, 2);
  EXPECT_EQ(lg.num_procs, 4);
  EXPECT_EQ(lg.graph.size(), 2 + 4);
  EXPECT_EQ(lg.graph.vertices[lg.lambda(3)].kind, VertexKind::Summary);
  PiSummary pi;
  LocalGraph with_pi = local_graph(run.exchanges[1], book, &pi);
  EXPECT_EQ(with_pi.graph.size(), 2 + 4 + 1);
  EXPECT_EQ(with_pi.graph.vertices[with_pi.pi_hat()].kind, VertexKind::PiSummary);
}

TEST(Exchange, EnumerationMatchesNaiveSearch) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    for (Comm comm : {Comm::Mailbox, Comm::P2p}) {
      System sys = testkit::gen_system(seed, 3, 4, comm);
      for (int k = 1; k <= 2; ++k) {
        Lts lts = explore(sys, k);
        for (const auto& st : lts.states) {
          ASSERT_EQ(library_exchanges(sys, st.global, k), naive_exchanges(sys, st.global, k))
              << "seed " << seed << " k " << k;
        }
      }
    }
  }
}

TEST(Exchange, EnumeratedExchangesAreWellFormed) {
  System sys = testkit::load_system(fixture("systems/fig2a.json"));
  for (const auto& st : enumerate_k_exchanges(sys, sys.initial_global(), 3)) {
    const auto& acts = st.exchange.actions;
    int sends = st.exchange.num_sends();
    EXPECT_GE(sends, 1);
    EXPECT_LE(sends, 3);
    for (int i = 0; i < static_cast<int>(acts.size()); ++i) {
      EXPECT_EQ(acts[i].is_send(), i < sends);
      if (!acts[i].is_send()) {
        EXPECT_LT(st.exchange.match[i], sends);
      }
    }
  }
}

TEST(Exchange, ExchangeLimitIsEnforced) {
  System sys = testkit::load_system(fixture("systems/fig2a.json"));
  try {
    enumerate_k_exchanges(sys, sys.initial_global(), 3, 1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::ExplosionLimit);
  }
}

TEST(Exchange, ExploreRecordsViolations) {
  std::string path = fixture("systems/example4.json");
  System sys = testkit::load_system(path);
  json expect = testkit::load_expect(path);
  Lts lts = explore(sys, expect["k"].get<int>());
  ProcId r = sys.proc_index(expect["violation"].get<std::string>());
  bool at_r = false;
  for (const auto& v : lts.violations) at_r = at_r || v.process == r;
  EXPECT_TRUE(at_r);
  EXPECT_EQ(lts.states.front().global, sys.initial_global());
  for (const auto& t : lts.transitions) {
    EXPECT_LT(t.from, static_cast<int>(lts.states.size()));
    EXPECT_LT(t.to, static_cast<int>(lts.states.size()));
  }
  EXPECT_EQ(explore(sys, 2), lts);
}

TEST(Exchange, ExploreStateLimit) {
  System sys = testkit::load_system(fixture("systems/example4.json"));
  ExploreOptions opts;
  opts.state_limit = 2;
  EXPECT_THROW(explore(sys, 2, opts), Error);
}

TEST(Exchange, ReachabilityFixture) {
  std::string path = fixture("systems/fig2b.json");
  System sys = testkit::load_system(path);
  json reach = testkit::load_expect(path)["reach"];
  std::vector<int> goal = goal_of(sys, reach["goal"]);
  ReachResult res = decide_reachability(sys, reach["k"].get<int>(), goal);
  EXPECT_EQ(res.reachable, reach["reachable"].get<bool>());
  // The witness moves the automata to the goal; unmatched messages stay out of the replay.
  std::vector<int> global = sys.initial_global();
  for (const auto& e : res.witness) {
    for (const auto& a : e.actions) {
      ProcId p = a.actor();
      int next = -1;
      for (const auto& t : sys.automata[p].transitions) {
        if (t.from == global[p] && t.action == a) next = t.to;
      }
      ASSERT_GE(next, 0);
      global[p] = next;
    }
  }
  EXPECT_EQ(global, goal);
}

TEST(Exchange, ReachabilityDependsOnCommunication) {
  std::string path = fixture("systems/divergence.json");
  System sys = testkit::load_system(path);
  json reach = testkit::load_expect(path)["reach"];
  int k = reach["k"].get<int>();
  std::vector<int> goal = goal_of(sys, reach["goal"]);
  ASSERT_EQ(sys.comm, Comm::P2p);
  EXPECT_EQ(decide_reachability(sys, k, goal).reachable, reach["reachableP2p"].get<bool>());
  EXPECT_EQ(testkit::brute_force_sync_states(sys, k, 8, 2 * k + 2).count(goal), 1u);

  System mailbox = sys;
  mailbox.comm = Comm::Mailbox;
  EXPECT_EQ(decide_reachability(mailbox, k, goal).reachable, reach["reachableMailbox"].get<bool>());
  EXPECT_EQ(testkit::brute_force_sync_states(mailbox, k, 8, 2 * k + 2).count(goal), 0u);
}

TEST(Exchange, ReachabilityRejectsBadGoal) {
  System sys = testkit::load_system(fixture("systems/fig2b.json"));
  EXPECT_THROW(decide_reachability(sys, 1, {0}), Error);
  EXPECT_THROW(decide_reachability(sys, 0, sys.initial_global()), Error);
}
