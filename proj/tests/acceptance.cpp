// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixture_path.hpp"
#include "ksync/conflict_graph.hpp"
#include "ksync/membership.hpp"
#include "ksync/testkit/fixtures.hpp"
#include "ksync/testkit/oracle_suite.hpp"

using namespace ksync;
using namespace ksync::testkit;

namespace {

class Criterion {
 public:
  explicit Criterion(std::ostringstream& log) : log_(log) {}
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      passed_ = false;
      log_ << "    failed: " << what << "\n";
    }
  }
  void property(const PropertyResult& r) {
    std::ostringstream what;
    what << r.name << " (" << r.cases << " cases, " << r.failures << " failures) " << r.detail;
    if (!r.reproducer.empty()) what << "\n      reproducer: " << r.reproducer;
    expect(r.passed(), what.str());
    log_ << "    " << r.name << ": " << r.cases << " cases\n";
  }
  bool passed() const { return passed_; }

 private:
  std::ostringstream& log_;
  bool passed_ = true;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

OracleConfig scale_none() { return OracleConfig::none(); }

Msc msc(const std::string& name) { return load_msc(fixture("msc/" + name + ".json")); }

std::vector<std::string> sorted_names(const ConflictGraph& cg, const std::vector<int>& vs) {
  std::vector<std::string> out;
  for (int v : vs) out.push_back(cg.vertices[v].msg);
  std::sort(out.begin(), out.end());
  return out;
}

void sync_by_graph(Criterion& c) {
  auto t0 = std::chrono::steady_clock::now();
  OracleConfig cfg = scale_none();
  cfg.graph_mscs = 1000;
  cfg.max_msgs = 6;
  cfg.max_procs = 4;
  c.property(check_sync_by_graph(cfg));
  double s = seconds_since(t0);
  c.expect(s < 60.0, "took " + std::to_string(s) + " s");
}

void causal_by_graph(Criterion& c) {
  OracleConfig cfg = scale_none();
  cfg.graph_mscs = 1000;
  c.property(check_causal_by_graph(cfg));
}

void classifications(Criterion& c) {
  Msc crossing = msc("fig2a");
  c.expect(k_synchronous_by_graph(crossing, 1).scc.rs_on_cycle, "crossing: RS on a cycle");
  for (int k = 1; k <= 5; ++k) {
    c.expect(!k_synchronous_by_graph(crossing, k).synchronous && !k_synchronous_oracle(crossing, k),
             "crossing: not " + std::to_string(k) + "-synchronous");
  }
  Msc five = msc("fig2c");
  c.expect(scc_report(build(five)).max_size == 5, "five-cycle: max SCC 5");
  c.expect(k_synchronous_by_graph(five, 5).synchronous && k_synchronous_oracle(five, 5),
           "five-cycle: 5-synchronous");
  c.expect(!k_synchronous_by_graph(five, 4).synchronous && !k_synchronous_oracle(five, 4),
           "five-cycle: not 4-synchronous");
  for (const char* name : {"fig1a", "fig1b"}) {
    Msc m = msc(name);
    c.expect(!causal_delivery_by_graph(m) && !causal_delivery_oracle(m, Comm::Mailbox),
             std::string(name) + ": causal delivery violated");
  }
  Msc one = msc("fig2b");
  c.expect(causal_delivery_by_graph(one) && causal_delivery_oracle(one, Comm::Mailbox),
           "fig2b: causal delivery holds");
  c.expect(k_synchronous_by_graph(one, 1).synchronous && k_synchronous_oracle(one, 1),
           "fig2b: 1-synchronous");
}

void bookkeeping(Criterion& c) {
  std::string path = fixture("runs/example4.json");
  RandomRun run = load_run(path);
  json expect = load_expect(path);
  System bare = bare_system(run.procs, Comm::Mailbox);
  auto set_of = [&](const json& names) {
    ProcSet s = 0;
    for (const auto& n : names) s |= bit(bare.proc_index(n.get<std::string>()));
    return s;
  };
  ProcId r = bare.proc_index("r");
  StepOutcome first = try_step_k(run.exchanges.at(0), Bookkeeping::empty(bare.num_procs()));
  c.expect(first.book.has_value(), "first exchange accepted");
  if (!first.book) return;
  c.expect(first.book->cs[r] == set_of(expect["afterFirst"]["r"]["cs"]), "C_S,r after e1");
  c.expect(first.book->cr[r] == set_of(expect["afterFirst"]["r"]["cr"]), "C_R,r after e1");
  StepOutcome second = try_step_k(run.exchanges.at(1), *first.book);
  c.expect(second.computed.cs[r] == set_of(expect["afterSecond"]["r"]["cs"]), "C'_S,r after e2");
  c.expect(second.computed.cr[r] == set_of(expect["afterSecond"]["r"]["cr"]), "C'_R,r after e2");
  bool violation_at_r = false;
  try {
    step_k(AbstractConfig{std::vector<int>(bare.num_procs(), 0), *first.book},
           ExchangeStep{run.exchanges.at(1), std::vector<int>(bare.num_procs(), 0)});
  } catch (const Error& err) {
    violation_at_r = err.code() == ErrorCode::CausalDeliveryViolation && second.violation == r;
  }
  c.expect(violation_at_r, "CausalDeliveryViolation(r)");
}

void step_k_reach(Criterion& c) {
  OracleConfig cfg = scale_none();
  cfg.reach_systems = 30;
  cfg.reach_max_len = 8;
  c.property(check_step_k_reach(cfg));
}

void feasibility(Criterion& c) {
  OracleConfig cfg = scale_none();
  cfg.deviated_runs = 500;
  cfg.deviated_max_exchanges = 4;
  c.property(check_feasibility(cfg));
}

void badness(Criterion& c) {
  OracleConfig cfg = scale_none();
  cfg.deviated_runs = 500;
  cfg.deviated_max_exchanges = 4;
  c.property(check_badness(cfg));
  struct Case {
    const char* name;
    bool bad;
  };
  for (Case f : {Case{"appendix_b", false}, Case{"appendix_c", true}}) {
    std::string path = fixture(std::string("runs/") + f.name + ".json");
    RandomRun run = load_run(path);
    int k = read_json_file(path).at("k").get<int>();
    ConflictGraph cg = extend(build(run.flat()));
    bool by_graph = badness_by_graph(cg, find_deviation_vertices(cg, run.pi), k).bad;
    bool incremental = is_bad(incremental_bad_state(run, k), k);
    c.expect(by_graph == f.bad && incremental == f.bad,
             std::string(f.name) + (f.bad ? " should be bad" : " should not be bad"));
  }
}

void membership(Criterion& c) {
  System crossing = load_system(fixture("systems/fig2a.json"));
  for (int k = 1; k <= 3; ++k) {
    auto t0 = std::chrono::steady_clock::now();
    MembershipResult res = decide_k_synchronizability(crossing, k);
    std::string tag = "crossing system, k=" + std::to_string(k);
    c.expect(!res.synchronizable && res.counterexample.has_value(), tag + ": not synchronizable");
    if (res.counterexample) {
      c.expect(!k_synchronous_oracle(*res.counterexample, k), tag + ": counterexample confirmed");
    }
    c.expect(brute_force_violation_exists(crossing, k, 12, 2 * k + 2), tag + ": bounded search agrees");
    double s = seconds_since(t0);
    c.expect(s < 300.0, tag + ": took " + std::to_string(s) + " s");
  }
  auto t0 = std::chrono::steady_clock::now();
  System chain = load_system(fixture("systems/fig2b.json"));
  c.expect(decide_k_synchronizability(chain, 1).synchronizable, "fig2b: 1-synchronizable");
  c.expect(!brute_force_violation_exists(chain, 1, 12, 4), "fig2b: bounded search agrees");
  double s = seconds_since(t0);
  c.expect(s < 300.0, "fig2b: took " + std::to_string(s) + " s");
}

void p2p(Criterion& c) {
  OracleConfig cfg = scale_none();
  cfg.p2p_runs = 500;
  c.property(check_p2p_step(cfg));
  OracleConfig cross = scale_none();
  cross.cross_mode_systems = 30;
  c.property(check_cross_mode(cross));
  System sys = load_system(fixture("systems/fig2a_p2p.json"));
  c.expect(sys.comm == Comm::P2p, "fixture is p2p");
  for (int k = 1; k <= 3; ++k) {
    c.expect(!p2p_decide_k_synchronizability(sys, k).synchronizable,
             "crossing system under p2p, k=" + std::to_string(k));
  }
}

void successor_sets(Criterion& c) {
  std::string path = fixture("runs/example7.json");
  RandomRun run = load_run(path);
  json expect = load_expect(path);
  int k = read_json_file(path).at("k").get<int>();
  ConflictGraph cg = extend(build(run.flat()));
  BadnessReport rep = badness_by_graph(cg, find_deviation_vertices(cg, run.pi), k);
  auto want = [&](const char* key) {
    auto v = expect[key].get<std::vector<std::string>>();
    std::sort(v.begin(), v.end());
    return v;
  };
  c.expect(sorted_names(cg, rep.succ) == want("succ"), "succ({pi})");
  c.expect(sorted_names(cg, rep.pred) == want("pred"), "pred({pi})");
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    std::function<void(Criterion&)> check;
  };
  std::vector<Entry> entries = {
      {1, "graph and oracle agree on k-synchrony", sync_by_graph},
      {2, "graph and oracle agree on causal delivery", causal_by_graph},
      {3, "fixture MSC classifications", classifications},
      {4, "bookkeeping sets and violation across two exchanges", bookkeeping},
      {5, "step_k reachability equals bounded k-synchronous executions", step_k_reach},
      {6, "incremental feasibility agrees with the graph", feasibility},
      {7, "incremental badness agrees with the graph", badness},
      {8, "membership verdicts and counterexamples", membership},
      {9, "p2p step, cross-mode agreement and p2p verdict", p2p},
      {10, "successor and predecessor sets of the deviated message", successor_sets},
  };
  int failed = 0;
  for (const auto& e : entries) {
    std::ostringstream log;
    Criterion c(log);
    auto t0 = std::chrono::steady_clock::now();
    try {
      e.check(c);
    } catch (const std::exception& ex) {
      c.expect(false, std::string("exception: ") + ex.what());
    }
    double s = seconds_since(t0);
    std::printf("criterion %2d: %s  %s (%.2f s)\n", e.id, c.passed() ? "PASS" : "FAIL", e.title, s);
    std::fputs(log.str().c_str(), stdout);
    std::fflush(stdout);
    if (!c.passed()) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(entries.size()) - failed, entries.size());
  return failed == 0 ? 0 : 1;
}
