#include "ksync/membership.hpp"

#include <algorithm>
#include <map>

namespace ksync {

namespace {

FeasStatus deviation_shape(const KExchange& e, ProcId pi, bool already_deviated, int* where) {
  *where = -1;
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    const Action& a = e.actions[i];
    if (!a.is_send()) continue;
    if (a.sender == pi) return FeasStatus::PiSendsEarly;
    if (a.receiver == pi) {
      if (*where >= 0 || already_deviated) return FeasStatus::SecondDeviation;
      *where = static_cast<int>(i);
    }
  }
  return FeasStatus::Ok;
}

ProcSet procs_of(const Vertex& v) {
  ProcSet s = bit(v.sender);
  if (v.matched) s |= bit(v.receiver);
  return s;
}

}  // namespace

FeasOutcome feas_step(const System& instrumented, const LocalGraph& lg, const Bookkeeping& book,
                      const FeasState& fs, const KExchange& e) {
  ProcId pi = instrumented.proc_index(kPiName);
  FeasOutcome out;
  out.next = fs;
  int where = -1;
  out.status = deviation_shape(e, pi, fs.dest >= 0, &where);
  if (out.status != FeasStatus::Ok) return out;
  if (where >= 0) {
    std::string dest;
    std::string msg;
    if (!parse_pi_payload(e.actions[where].msg, &dest, &msg)) {
      throw Error(ErrorCode::InvalidInput, "malformed pi payload");
    }
    out.next.dest = instrumented.proc_index(dest);
    out.next.exp = e.actions[where].sender;
  }
  const ConflictGraph& g = lg.graph;
  std::vector<int> sources{lg.pi_hat()};
  for (int v = 0; v < lg.base_size; ++v) {
    if (g.vertices[v].receiver == pi) {
      sources.push_back(v);
      out.next.cpi_s |= bit(g.vertices[v].sender);
    }
  }
  for (int src : sources) {
    for (int w = 0; w < lg.base_size; ++w) {
      if (!g.ext[SS].get(src, w)) continue;
      out.next.cpi_s |= bit(g.vertices[w].sender);
      if (g.vertices[w].matched) out.next.cpi_r |= bit(g.vertices[w].receiver);
    }
    for (ProcId q = 0; q < lg.num_procs; ++q) {
      if (g.ext[SS].get(src, lg.lambda(q))) {
        out.next.cpi_s |= book.cs[q];
        out.next.cpi_r |= book.cr[q];
      }
    }
  }
  if (out.next.dest >= 0 && contains(out.next.cpi_r, out.next.dest)) {
    out.status = FeasStatus::Violation;
  }
  return out;
}

FeasOutcome feas_step(const System& instrumented, const Bookkeeping& book, const FeasState& fs,
                      const KExchange& e) {
  PiSummary pi{fs.cpi_s, fs.cpi_r};
  return feas_step(instrumented, local_graph(e, book, &pi), book, fs, e);
}

bool feas_accept(const Bookkeeping& book, const FeasState& fs, ProcId pi) {
  return fs.dest >= 0 && !contains(book.cr[fs.dest], pi);
}

BadState initial_bad_state(ProcId pi, ProcSet q_guess) {
  BadState bs;
  bs.p = bit(pi);
  bs.q = q_guess;
  return bs;
}

LocalSets succ_pred_local(const ConflictGraph& base, ProcSet p, ProcSet q_next) {
  int n = base.size();
  auto adjacent = [&](int u, int v) {
    for (const auto& m : base.base) {
      if (m.get(u, v)) return true;
    }
    return false;
  };
  auto closure = [&](ProcSet seeds, bool forward) {
    std::vector<bool> in(n, false);
    std::vector<int> stack;
    for (int v = 0; v < n; ++v) {
      if (procs_of(base.vertices[v]) & seeds) {
        in[v] = true;
        stack.push_back(v);
      }
    }
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (!in[v] && (forward ? adjacent(u, v) : adjacent(v, u))) {
          in[v] = true;
          stack.push_back(v);
        }
      }
    }
    return in;
  };
  auto post = closure(p, true);
  auto pre = closure(q_next, false);
  LocalSets s;
  for (int v = 0; v < n; ++v) {
    if (post[v]) s.post.push_back(v);
    if (pre[v]) s.pre.push_back(v);
    if (post[v] && pre[v]) s.scc.push_back(v);
  }
  return s;
}

LocalSets succ_pred_local(const KExchange& e, ProcSet p, ProcSet q_next) {
  return succ_pred_local(build(e.as_execution()), p, q_next);
}

ProcSet induced_q(const ConflictGraph& base, ProcSet q_next) {
  ProcSet q = q_next;
  for (int v : succ_pred_local(base, 0, q_next).pre) q |= procs_of(base.vertices[v]);
  return q;
}

std::optional<BadState> try_bad_step(const BadState& bs, const ConflictGraph& base,
                                     ProcSet q_next, int k, ProcId pi) {
  LocalSets sets = succ_pred_local(base, bs.p, q_next);
  ProcSet q = q_next;
  for (int v : sets.pre) q |= procs_of(base.vertices[v]);
  if (q != bs.q) return std::nullopt;
  BadState next = bs;
  for (int v : sets.post) next.p |= procs_of(base.vertices[v]);
  next.q = q_next;
  next.count = std::min(k + 2, bs.count + static_cast<int>(sets.scc.size()));
  ProcSet both = bs.p & bs.q;
  ProcSet set_rec = 0;
  for (int v : sets.scc) {
    const Vertex& x = base.vertices[v];
    if (x.sender != pi && contains(bs.last_is_rec, x.sender) && contains(both, x.sender)) {
      next.saw_rs = true;
    }
    if (x.matched) set_rec |= bit(x.receiver);
  }
  ProcSet senders = 0;
  for (const auto& x : base.vertices) senders |= bit(x.sender);
  next.last_is_rec = set_rec | (bs.last_is_rec & ~senders);
  return next;
}

BadState bad_step(const BadState& bs, const KExchange& e, ProcSet q_next, int k, ProcId pi) {
  auto r = try_bad_step(bs, build(e.as_execution()), q_next, k, pi);
  if (!r) throw Error(ErrorCode::InconsistentGuess, "guessed set is inconsistent with Q");
  return *r;
}

namespace {

struct Node {
  AbstractConfig base;
  FeasState fs;
  P2pFeasState pfs;
  BadState bs;
  auto operator<=>(const Node&) const = default;
};

class MembershipSearch {
 public:
  MembershipSearch(const System& system, int k, const MembershipOptions& opts)
      : original_(system),
        sys_(instrument(system)),
        k_(k),
        opts_(opts),
        pi_(sys_.proc_index(kPiName)),
        p2p_(system.comm == Comm::P2p) {}

  MembershipResult run() {
    int n = sys_.num_procs();
    ProcSet others = (n == 64 ? ~ProcSet{0} : (ProcSet{1} << n) - 1) & ~bit(pi_);
    // Every subset of the other processes, together with pi, is a possible Q.
    for (ProcSet sub = others;; sub = (sub - 1) & others) {
      Node init;
      init.base = {sys_.initial_global(), Bookkeeping::empty(n)};
      init.bs = initial_bad_state(pi_, sub | bit(pi_));
      add(init, -1, {});
      if (sub == 0) break;
    }
    MembershipResult res;
    for (std::size_t cur = 0; cur < nodes_.size(); ++cur) {
      Node node = nodes_[cur];
      if (auto f = accepting_forward(node)) {
        res.synchronizable = false;
        res.witness = path_to(static_cast<int>(cur));
        res.witness.push_back(*f);
        res.counterexample = counterexample(res.witness);
        break;
      }
      expand(static_cast<int>(cur), node);
    }
    res.states_explored = nodes_.size();
    return res;
  }

 private:
  void add(const Node& node, int parent, const KExchange& via) {
    if (ids_.count(node)) return;
    if (nodes_.size() >= opts_.state_limit) {
      throw Error(ErrorCode::ExplosionLimit,
                  "more than " + std::to_string(opts_.state_limit) + " product states");
    }
    ids_.emplace(node, static_cast<int>(nodes_.size()));
    nodes_.push_back(node);
    parents_.push_back({parent, via});
  }

  ProcId dest_of(const Node& node) const { return p2p_ ? node.pfs.dest : node.fs.dest; }
  ProcId exp_of(const Node& node) const { return p2p_ ? node.pfs.exp : node.fs.exp; }

  std::optional<KExchange> accepting_forward(const Node& node) {
    ProcId q = dest_of(node);
    if (q < 0) return std::nullopt;
    if (!p2p_ && !feas_accept(node.base.book, node.fs, pi_)) return std::nullopt;
    const auto& g = node.base.global;
    for (const auto& t : sys_.automata[pi_].transitions) {
      if (t.from != g[pi_] || !t.action.is_send() || t.action.receiver != q) continue;
      // pi's forward is received through a sibling of some receive of m; only a
      // receive from the original sender survives un-deviation.
      Action original = recv(exp_of(node), q, t.action.msg);
      bool receivable = false;
      for (const auto& u : sys_.automata[q].transitions) {
        if (u.from == g[q] && u.action == original) receivable = true;
      }
      Action r = recv(pi_, q, t.action.msg);
      if (!receivable) continue;
      KExchange f{{t.action, r}, {1, 0}};
      auto bs = try_bad_step(node.bs, build(f.as_execution()), bit(pi_), k_, pi_);
      if (bs && is_bad(*bs, k_)) return f;
    }
    return std::nullopt;
  }

  void expand(int cur, const Node& node) {
    auto it = cache_.find(node.base.global);
    if (it == cache_.end()) {
      it = cache_
               .emplace(node.base.global,
                        distinct_k_exchanges(sys_, node.base.global, k_, opts_.exchange_limit))
               .first;
    }
    for (const auto& step : it->second) {
      const KExchange& e = step.exchange;
      if (!admissible(e, dest_of(node) >= 0)) continue;
      Node next;
      next.base.global = step.target;
      if (p2p_) {
        P2pBookkeeping book{node.base.book.cs};
        P2pOutcome r = try_p2p_step(e, book);
        if (!r.book) continue;
        P2pFeasOutcome f = p2p_feas_step(sys_, book, node.pfs, e);
        if (f.status != FeasStatus::Ok) continue;
        next.base.book = Bookkeeping{r.book->forbidden, node.base.book.cr};
        next.pfs = f.next;
      } else {
        PiSummary pis{node.fs.cpi_s, node.fs.cpi_r};
        LocalGraph lg = local_graph(e, node.base.book, &pis);
        StepOutcome r = update_bookkeeping(lg, node.base.book);
        if (!r.book) continue;
        FeasOutcome f = feas_step(sys_, lg, node.base.book, node.fs, e);
        if (f.status != FeasStatus::Ok) continue;
        next.base.book = *r.book;
        next.fs = f.next;
      }
      ConflictGraph base = build(e.as_execution());
      ProcSet q = node.bs.q;
      for (ProcSet sub = q;; sub = (sub - 1) & q) {
        if (contains(sub, pi_)) {
          if (auto bs = try_bad_step(node.bs, base, sub, k_, pi_)) {
            next.bs = *bs;
            add(next, cur, e);
          }
        }
        if (sub == 0) break;
      }
    }
  }

  // No send by pi; at most one send to pi overall, and it must be received at once
  // since pi could never forward it otherwise.
  bool admissible(const KExchange& e, bool deviated) const {
    int to_pi = 0;
    for (std::size_t i = 0; i < e.actions.size(); ++i) {
      const Action& a = e.actions[i];
      if (!a.is_send()) continue;
      if (a.sender == pi_) return false;
      if (a.receiver == pi_) {
        if (deviated || e.match[i] < 0) return false;
        ++to_pi;
      }
    }
    return to_pi <= 1;
  }

  std::vector<KExchange> path_to(int node) const {
    std::vector<KExchange> path;
    for (int s = node; parents_[s].first >= 0; s = parents_[s].first) {
      path.push_back(parents_[s].second);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  Msc counterexample(const std::vector<KExchange>& witness) const {
    Execution e;
    for (const auto& x : witness) {
      int offset = static_cast<int>(e.actions.size());
      for (std::size_t i = 0; i < x.actions.size(); ++i) {
        e.actions.push_back(x.actions[i]);
        e.match.push_back(x.match[i] < 0 ? -1 : x.match[i] + offset);
      }
    }
    return msc_of(original_.procs, undeviate(sys_.procs, e, original_.procs));
  }

  const System& original_;
  System sys_;
  int k_;
  MembershipOptions opts_;
  ProcId pi_;
  bool p2p_;
  std::vector<Node> nodes_;
  std::vector<std::pair<int, KExchange>> parents_;
  std::map<Node, int> ids_;
  std::map<std::vector<int>, std::vector<ExchangeStep>> cache_;
};

}  // namespace

MembershipResult decide_k_synchronizability(const System& system, int k,
                                            const MembershipOptions& opts) {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "k must be positive");
  return MembershipSearch(system, k, opts).run();
}

MembershipResult p2p_decide_k_synchronizability(const System& system, int k,
                                                const MembershipOptions& opts) {
  if (system.comm != Comm::P2p) throw Error(ErrorCode::InvalidInput, "system is not p2p");
  return decide_k_synchronizability(system, k, opts);
}

}  // namespace ksync
