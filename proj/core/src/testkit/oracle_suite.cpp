#include "ksync/testkit/oracle_suite.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "ksync/json_io.hpp"

namespace ksync::testkit {

System bare_system(const std::vector<std::string>& procs, Comm comm) {
  System s;
  s.comm = comm;
  s.procs = procs;
  std::sort(s.procs.begin(), s.procs.end());
  s.automata.assign(s.procs.size(), Automaton{{"l0"}, 0, {}});
  return s;
}

bool incremental_feasible(const RandomRun& run) {
  System sys = bare_system(run.procs, Comm::Mailbox);
  Bookkeeping book = Bookkeeping::empty(sys.num_procs());
  FeasState fs;
  for (std::size_t i = 0; i + 1 < run.exchanges.size(); ++i) {
    const KExchange& e = run.exchanges[i];
    PiSummary pis{fs.cpi_s, fs.cpi_r};
    LocalGraph lg = local_graph(e, book, &pis);
    StepOutcome r = update_bookkeeping(lg, book);
    if (!r.book) return false;
    FeasOutcome f = feas_step(sys, lg, book, fs, e);
    if (f.status != FeasStatus::Ok) return false;
    book = *r.book;
    fs = f.next;
  }
  return feas_accept(book, fs, run.pi);
}

BadState incremental_bad_state(const RandomRun& run, int k) {
  std::vector<ConflictGraph> bases;
  for (const auto& x : run.exchanges) bases.push_back(build(x.as_execution()));
  std::size_t n = bases.size();
  std::vector<ProcSet> q_next(n, bit(run.pi));
  for (std::size_t i = n; i-- > 1;) q_next[i - 1] = induced_q(bases[i], q_next[i]);
  BadState bs = initial_bad_state(run.pi, n == 0 ? bit(run.pi) : induced_q(bases[0], q_next[0]));
  for (std::size_t i = 0; i < n; ++i) {
    auto next = try_bad_step(bs, bases[i], q_next[i], k, run.pi);
    if (!next) throw Error(ErrorCode::InconsistentGuess, "backward Q chain is inconsistent");
    bs = *next;
  }
  return bs;
}

bool incremental_p2p_feasible(const RandomRun& run) {
  System sys = bare_system(run.procs, Comm::P2p);
  P2pBookkeeping book = P2pBookkeeping::empty(sys.num_procs());
  P2pFeasState fs;
  for (std::size_t i = 0; i + 1 < run.exchanges.size(); ++i) {
    const KExchange& e = run.exchanges[i];
    P2pOutcome r = try_p2p_step(e, book);
    if (!r.book) return false;
    P2pFeasOutcome f = p2p_feas_step(sys, book, fs, e);
    if (f.status != FeasStatus::Ok) return false;
    book = *r.book;
    fs = f.next;
  }
  return fs.dest >= 0;
}

bool steps_accept(const RandomRun& run, Comm comm) {
  int n = static_cast<int>(run.procs.size());
  Bookkeeping book = Bookkeeping::empty(n);
  P2pBookkeeping pbook = P2pBookkeeping::empty(n);
  for (const auto& e : run.exchanges) {
    if (comm == Comm::Mailbox) {
      StepOutcome r = try_step_k(e, book);
      if (!r.book) return false;
      book = *r.book;
    } else {
      P2pOutcome r = try_p2p_step(e, pbook);
      if (!r.book) return false;
      pbook = *r.book;
    }
  }
  return true;
}

namespace {

struct Concrete {
  std::vector<int> global;
  std::vector<std::deque<Message>> buffers;
};

std::string state_key(const Concrete& c) {
  std::ostringstream out;
  for (int l : c.global) out << l << ',';
  for (const auto& b : c.buffers) {
    out << '|';
    for (const auto& m : b) out << m.sender << ':' << m.msg << ',';
  }
  return out.str();
}

// Depth-first search over executions; `visit` sees each new (state, MSC) pair and
// returns false to prune below it, or sets `stop`.
class ExecutionSearch {
 public:
  using Visit = std::function<bool(const Concrete&, const Msc&)>;

  ExecutionSearch(const System& system, int max_len, int cap, Visit visit)
      : sys_(system), max_len_(max_len), cap_(cap), visit_(std::move(visit)) {}

  void run() {
    Concrete c{sys_.initial_global(), std::vector<std::deque<Message>>(sys_.num_buffers())};
    std::vector<Action> actions;
    dfs(c, actions);
  }

  bool stop = false;

 private:
  void dfs(Concrete& c, std::vector<Action>& actions) {
    Msc msc = msc_of(sys_.procs, Execution{actions, compute_matching(actions)});
    if (!seen_.insert(state_key(c) + "#" + canonical_form(msc)).second) return;
    if (!visit_(c, msc) || stop) return;
    if (static_cast<int>(actions.size()) >= max_len_) return;
    for (ProcId p = 0; p < sys_.num_procs() && !stop; ++p) {
      for (const auto& t : sys_.automata[p].transitions) {
        if (t.from != c.global[p]) continue;
        const Action& a = t.action;
        auto& buf = c.buffers[sys_.buffer_index(a.sender, a.receiver)];
        if (a.is_send()) {
          if (static_cast<int>(buf.size()) >= cap_) continue;
          buf.push_back({a.sender, a.msg});
        } else {
          if (buf.empty() || buf.front() != Message{a.sender, a.msg}) continue;
          buf.pop_front();
        }
        int from = c.global[p];
        c.global[p] = t.to;
        actions.push_back(a);
        dfs(c, actions);
        actions.pop_back();
        c.global[p] = from;
        if (a.is_send()) {
          buf.pop_back();
        } else {
          buf.push_front({a.sender, a.msg});
        }
        if (stop) return;
      }
    }
  }

  const System& sys_;
  int max_len_;
  int cap_;
  Visit visit_;
  std::set<std::string> seen_;
};

}  // namespace

std::set<std::vector<int>> brute_force_sync_states(const System& system, int k, int max_len,
                                                   int buffer_cap) {
  std::set<std::vector<int>> out;
  // Prefixes of executions with a k-synchronous MSC have one too, so pruning is safe.
  ExecutionSearch search(system, max_len, buffer_cap, [&](const Concrete& c, const Msc& msc) {
    if (!k_synchronous_oracle(msc, k, system.comm)) return false;
    out.insert(c.global);
    return true;
  });
  search.run();
  return out;
}

bool brute_force_violation_exists(const System& system, int k, int max_len, int buffer_cap) {
  bool found = false;
  ExecutionSearch* self = nullptr;
  ExecutionSearch search(system, max_len, buffer_cap, [&](const Concrete&, const Msc& msc) {
    if (k_synchronous_oracle(msc, k, system.comm)) return true;
    found = true;
    self->stop = true;
    return false;
  });
  self = &search;
  search.run();
  return found;
}

std::set<std::vector<int>> step_k_states(const System& system, int k, int max_len,
                                         int buffer_cap) {
  struct Node {
    AbstractConfig cfg;
    int len;
    std::vector<int> occupancy;
    auto operator<=>(const Node&) const = default;
  };
  std::set<std::vector<int>> out;
  std::set<Node> seen;
  std::map<std::vector<int>, std::vector<ExchangeStep>> cache;
  std::vector<Node> stack;
  Node init{{system.initial_global(), Bookkeeping::empty(system.num_procs())},
            0,
            std::vector<int>(system.num_buffers(), 0)};
  stack.push_back(init);
  seen.insert(init);
  while (!stack.empty()) {
    Node node = stack.back();
    stack.pop_back();
    out.insert(node.cfg.global);
    auto it = cache.find(node.cfg.global);
    if (it == cache.end()) {
      it = cache.emplace(node.cfg.global, distinct_k_exchanges(system, node.cfg.global, k)).first;
    }
    for (const auto& step : it->second) {
      const KExchange& e = step.exchange;
      int len = node.len + static_cast<int>(e.actions.size());
      if (len > max_len) continue;
      std::vector<int> occ = node.occupancy;
      bool fits = true;
      for (const auto& a : e.actions) {
        int b = system.buffer_index(a.sender, a.receiver);
        if (a.is_send()) {
          if (++occ[b] > buffer_cap) fits = false;
        } else {
          --occ[b];
        }
      }
      if (!fits) continue;
      Node next{{step.target, node.cfg.book}, len, occ};
      if (system.comm == Comm::Mailbox) {
        StepOutcome r = try_step_k(e, node.cfg.book);
        if (!r.book) continue;
        next.cfg.book = *r.book;
      } else {
        P2pOutcome r = try_p2p_step(e, P2pBookkeeping{node.cfg.book.cs});
        if (!r.book) continue;
        next.cfg.book.cs = r.book->forbidden;
      }
      if (seen.insert(next).second) stack.push_back(next);
    }
  }
  return out;
}

OracleConfig OracleConfig::none() {
  OracleConfig c;
  c.graph_mscs = 0;
  c.reach_systems = 0;
  c.deviated_runs = 0;
  c.p2p_runs = 0;
  c.cross_mode_systems = 0;
  c.direct_systems = 0;
  return c;
}

bool OracleReport::passed() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return p.passed(); });
}

namespace {

// Removes the events in `drop` and renumbers the matching.
Msc without_events(const Msc& msc, const std::vector<bool>& drop) {
  std::vector<int> index(msc.events.size(), -1);
  Msc out;
  out.procs = msc.procs;
  for (std::size_t i = 0; i < msc.events.size(); ++i) {
    if (drop[i]) continue;
    index[i] = static_cast<int>(out.events.size());
    out.events.push_back(msc.events[i]);
  }
  for (auto& e : out.events) e.match = e.match < 0 ? -1 : index[e.match];
  return out;
}

KExchange without_send(const KExchange& x, int s) {
  KExchange out;
  std::vector<int> index(x.actions.size(), -1);
  for (std::size_t i = 0; i < x.actions.size(); ++i) {
    if (static_cast<int>(i) == s || x.match[i] == s) continue;
    index[i] = static_cast<int>(out.actions.size());
    out.actions.push_back(x.actions[i]);
    out.match.push_back(x.match[i]);
  }
  for (auto& m : out.match) m = m < 0 ? -1 : index[m];
  return out;
}

std::string msc_reproducer(const Msc& msc) { return to_json(msc).dump(); }

void record(PropertyResult& r, const std::string& detail, const std::string& reproducer) {
  if (r.failures++ == 0) {
    r.detail = detail;
    r.reproducer = reproducer;
  }
}

PropertyResult named(const char* name) {
  PropertyResult r;
  r.name = name;
  return r;
}

std::vector<std::string> without_pi(const std::vector<std::string>& procs) {
  std::vector<std::string> out;
  for (const auto& p : procs) {
    if (p != kPiName) out.push_back(p);
  }
  return out;
}

}  // namespace

Msc shrink_msc(Msc msc, const std::function<bool(const Msc&)>& fails) {
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < msc.events.size() && !progress; ++i) {
      if (!msc.events[i].action.is_send()) continue;
      std::vector<bool> drop(msc.events.size(), false);
      drop[i] = true;
      if (msc.events[i].match >= 0) drop[msc.events[i].match] = true;
      Msc smaller = without_events(msc, drop);
      if (fails(smaller)) {
        msc = std::move(smaller);
        progress = true;
        break;
      }
      if (msc.events[i].match >= 0) {
        std::vector<bool> only_recv(msc.events.size(), false);
        only_recv[msc.events[i].match] = true;
        Msc unmatched = without_events(msc, only_recv);
        if (fails(unmatched)) {
          msc = std::move(unmatched);
          progress = true;
        }
      }
    }
  }
  return msc;
}

RandomRun shrink_run(RandomRun run, const std::function<bool(const RandomRun&)>& fails) {
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t x = 0; x < run.exchanges.size() && !progress; ++x) {
      const KExchange& ex = run.exchanges[x];
      for (std::size_t i = 0; i < ex.actions.size() && !progress; ++i) {
        const Action& a = ex.actions[i];
        if (!a.is_send() || a.receiver == run.pi || a.sender == run.pi) continue;
        RandomRun smaller = run;
        smaller.exchanges[x] = without_send(ex, static_cast<int>(i));
        if (smaller.exchanges[x].actions.empty()) {
          smaller.exchanges.erase(smaller.exchanges.begin() + static_cast<long>(x));
        }
        if (fails(smaller)) {
          run = std::move(smaller);
          progress = true;
        }
      }
    }
  }
  return run;
}

std::string run_to_json(const RandomRun& run, int k) {
  json exchanges = json::array();
  for (const auto& x : run.exchanges) exchanges.push_back(to_json(run.procs, x));
  return json{{"procs", run.procs}, {"k", k}, {"exchanges", exchanges}}.dump();
}

PropertyResult check_sync_by_graph(const OracleConfig& cfg) {
  PropertyResult r = named("sync_by_graph");
  auto disagree = [](const Msc& m, int k) {
    if (!causal_delivery_oracle(m, Comm::Mailbox)) return false;
    try {
      return k_synchronous_by_graph(m, k).synchronous != k_synchronous_oracle(m, k);
    } catch (const Error&) {
      return true;
    }
  };
  std::uint64_t seed = cfg.seed;
  while (static_cast<int>(r.cases) < cfg.graph_mscs) {
    Msc m = gen_msc(seed++, cfg.max_msgs, cfg.max_procs);
    if (!causal_delivery_oracle(m, Comm::Mailbox)) continue;
    ++r.cases;
    for (int k = 1; k <= 3; ++k) {
      if (!disagree(m, k)) continue;
      Msc small = shrink_msc(m, [&](const Msc& x) { return disagree(x, k); });
      record(r, "graph and oracle disagree at k=" + std::to_string(k), msc_reproducer(small));
      break;
    }
  }
  return r;
}

PropertyResult check_causal_by_graph(const OracleConfig& cfg) {
  PropertyResult r = named("causal_by_graph");
  auto disagree = [&](const Msc& m) {
    return causal_delivery_by_graph(m, cfg.rules) != causal_delivery_oracle(m, Comm::Mailbox);
  };
  for (int i = 0; i < cfg.graph_mscs; ++i) {
    Msc m = gen_msc(cfg.seed + 7919 * std::uint64_t(i + 1), cfg.max_msgs, cfg.max_procs);
    ++r.cases;
    if (disagree(m)) {
      record(r, "causal delivery: graph and oracle disagree", msc_reproducer(shrink_msc(m, disagree)));
    }
  }
  return r;
}

PropertyResult check_step_k_reach(const OracleConfig& cfg) {
  PropertyResult r = named("step_k_reach");
  for (int i = 0; i < cfg.reach_systems; ++i) {
    System sys = gen_system(cfg.seed + 104729 * std::uint64_t(i + 1), 3, 4);
    int k = 1 + i % 2;
    int cap = 2 * k + 2;
    ++r.cases;
    auto brute = brute_force_sync_states(sys, k, cfg.reach_max_len, cap);
    auto abstract = step_k_states(sys, k, cfg.reach_max_len, cap);
    if (brute != abstract) {
      record(r,
             "reachable states differ at k=" + std::to_string(k) + ": brute " +
                 std::to_string(brute.size()) + ", step_k " + std::to_string(abstract.size()),
             to_json(sys).dump());
    }
  }
  return r;
}

namespace {

template <typename Check>
void deviated_cases(const OracleConfig& cfg, Comm comm, std::uint64_t salt, int wanted,
                    PropertyResult& r, Check check) {
  std::uint64_t seed = cfg.seed * 1000003 + salt;
  int attempts = 0;
  while (static_cast<int>(r.cases) < wanted && attempts++ < 50 * wanted) {
    Rng rng(seed);
    int procs = rng.between(2, 3);
    int k = rng.between(1, 2);
    RandomRun run = gen_deviated_run(seed++, procs, k, cfg.deviated_max_exchanges, comm);
    check(run, k);
  }
}

}  // namespace

PropertyResult check_feasibility(const OracleConfig& cfg) {
  PropertyResult r = named("feasibility");
  auto verdicts = [](const RandomRun& run, bool* graph) {
    ConflictGraph cg = extend(build(run.flat()));
    if (!causal_delivery_by_graph(cg)) return false;
    *graph = feasibility_by_graph(cg, find_deviation_vertices(cg, run.pi));
    return true;
  };
  deviated_cases(cfg, Comm::Mailbox, 1, cfg.deviated_runs, r, [&](const RandomRun& run, int k) {
    bool graph = false;
    if (!verdicts(run, &graph)) return;
    ++r.cases;
    if (incremental_feasible(run) == graph) return;
    auto fails = [&](const RandomRun& x) {
      bool g = false;
      return verdicts(x, &g) && incremental_feasible(x) != g;
    };
    record(r, std::string("incremental feasibility says ") + (graph ? "no" : "yes"),
           run_to_json(shrink_run(run, fails), k));
  });
  return r;
}

PropertyResult check_badness(const OracleConfig& cfg) {
  PropertyResult r = named("badness");
  auto disagree = [](const RandomRun& run, int k, bool* evaluated) {
    ConflictGraph cg = extend(build(run.flat()));
    *evaluated = causal_delivery_by_graph(cg);
    if (!*evaluated) return false;
    bool graph = badness_by_graph(cg, find_deviation_vertices(cg, run.pi), k).bad;
    return is_bad(incremental_bad_state(run, k), k) != graph;
  };
  deviated_cases(cfg, Comm::Mailbox, 2, cfg.deviated_runs, r, [&](const RandomRun& run, int k) {
    bool evaluated = false;
    bool bad = disagree(run, k, &evaluated);
    if (!evaluated) return;
    ++r.cases;
    if (!bad) return;
    auto fails = [&](const RandomRun& x) {
      bool ev = false;
      return disagree(x, k, &ev);
    };
    record(r, "incremental bad relation disagrees with the graph",
           run_to_json(shrink_run(run, fails), k));
  });
  return r;
}

PropertyResult check_p2p_step(const OracleConfig& cfg) {
  PropertyResult r = named("p2p_step");
  auto disagree = [](const RandomRun& run) {
    Msc m = msc_of(run.procs, run.flat());
    return steps_accept(run, Comm::P2p) != causal_delivery_oracle(m, Comm::P2p);
  };
  for (int i = 0; i < cfg.p2p_runs; ++i) {
    std::uint64_t seed = cfg.seed * 31 + 17 * std::uint64_t(i + 1);
    Rng rng(seed);
    int procs = rng.between(2, 4);
    int k = rng.between(1, 3);
    RandomRun run = gen_run(seed, procs, k, 4, Comm::P2p);
    ++r.cases;
    if (disagree(run)) {
      record(r, "p2p_step and the p2p causal delivery oracle disagree",
             run_to_json(shrink_run(run, disagree), k));
    }
  }
  return r;
}

PropertyResult check_p2p_feasibility(const OracleConfig& cfg) {
  PropertyResult r = named("p2p_feasibility");
  auto direct = [](const RandomRun& run) {
    Execution e = run.flat();
    if (!causal_delivery_oracle(msc_of(run.procs, e), Comm::P2p)) return false;
    auto original = without_pi(run.procs);
    Execution er = undeviate(run.procs, e, original);
    return causal_delivery_oracle(msc_of(original, er), Comm::P2p);
  };
  auto disagree = [&](const RandomRun& run) {
    return incremental_p2p_feasible(run) != direct(run);
  };
  deviated_cases(cfg, Comm::P2p, 3, cfg.p2p_runs, r, [&](const RandomRun& run, int k) {
    ++r.cases;
    if (disagree(run)) {
      record(r, "p2p feasibility disagrees with the un-deviated check",
             run_to_json(shrink_run(run, disagree), k));
    }
  });
  return r;
}

namespace {

std::set<std::vector<int>> explored_globals(const System& sys, int k) {
  std::set<std::vector<int>> out;
  for (const auto& s : explore(sys, k).states) out.insert(s.global);
  return out;
}

}  // namespace

PropertyResult check_cross_mode(const OracleConfig& cfg) {
  PropertyResult r = named("cross_mode");
  for (int i = 0; i < cfg.cross_mode_systems; ++i) {
    System mailbox = gen_single_sender_system(cfg.seed + 15485863 * std::uint64_t(i + 1), 3, 3);
    System p2p = mailbox;
    p2p.comm = Comm::P2p;
    int k = 1 + i % 2;
    ++r.cases;
    bool a = decide_k_synchronizability(mailbox, k).synchronizable;
    bool b = decide_k_synchronizability(p2p, k).synchronizable;
    if (a != b) {
      record(r, "mailbox and p2p verdicts differ at k=" + std::to_string(k), to_json(mailbox).dump());
    } else if (explored_globals(mailbox, k) != explored_globals(p2p, k)) {
      record(r, "mailbox and p2p reachable states differ at k=" + std::to_string(k),
             to_json(mailbox).dump());
    }
  }
  return r;
}

namespace {

// Some linearization of `msc` runs in `system` with exactly the MSC's matching.
bool realizable(const System& system, const Msc& msc) {
  bool found = false;
  for_each_linearization(msc, [&](const Execution& lin) {
    try {
      run(system, lin.actions);
      found = compute_matching(lin.actions) == lin.match;
    } catch (const Error&) {
      found = false;
    }
    return !found;
  });
  return found;
}

}  // namespace

PropertyResult check_membership_direct(const OracleConfig& cfg) {
  PropertyResult r = named("membership_direct");
  for (int i = 0; i < cfg.direct_systems; ++i) {
    Comm comm = i % 3 == 2 ? Comm::P2p : Comm::Mailbox;
    System sys = gen_system(cfg.seed + 32452843 * std::uint64_t(i + 1), 3, 3, comm);
    int k = 1 + i % 2;
    ++r.cases;
    MembershipResult res = decide_k_synchronizability(sys, k);
    std::string at = " at k=" + std::to_string(k);
    if (res.synchronizable) {
      if (brute_force_violation_exists(sys, k, cfg.direct_max_len, 2 * k + 2)) {
        record(r, "bounded search finds a violation the decision missed" + at, to_json(sys).dump());
      }
      continue;
    }
    const Msc& cex = *res.counterexample;
    std::vector<bool> drop(cex.events.size(), false);
    if (!drop.empty()) drop.back() = true;
    Msc prefix = without_events(cex, drop);
    if (!realizable(sys, cex)) {
      record(r, "counterexample is not an execution" + at, to_json(sys).dump());
    } else if (k_synchronous_oracle(cex, k, comm)) {
      record(r, "counterexample is k-synchronous" + at, to_json(sys).dump());
    } else if (!k_synchronous_oracle(prefix, k, comm)) {
      record(r, "counterexample prefix is not k-synchronous" + at, to_json(sys).dump());
    }
  }
  return r;
}

OracleReport run_oracle_suite(const OracleConfig& cfg) {
  OracleReport report;
  for (auto check : {check_sync_by_graph, check_causal_by_graph, check_step_k_reach, check_feasibility,
                     check_badness, check_p2p_step, check_p2p_feasibility, check_cross_mode,
                     check_membership_direct}) {
    report.properties.push_back(check(cfg));
    if (!report.properties.back().passed()) break;
  }
  return report;
}

}  // namespace ksync::testkit
