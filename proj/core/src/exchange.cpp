#include "ksync/exchange.hpp"

#include <deque>
#include <map>
#include <set>

#include "ksync/msc.hpp"
#include "ksync/p2p.hpp"

namespace ksync {

int KExchange::num_sends() const {
  int n = 0;
  for (const auto& a : actions) n += a.is_send() ? 1 : 0;
  return n;
}

Execution KExchange::as_execution() const { return Execution{actions, match}; }

namespace {

struct Pending {
  std::string msg;
  int send_pos;
};

class ExchangeEnumerator {
 public:
  ExchangeEnumerator(const System& system, int k, std::size_t limit)
      : sys_(system), k_(k), limit_(limit) {}

  std::vector<ExchangeStep> run(const std::vector<int>& from) {
    global_ = from;
    buffers_.assign(sys_.num_buffers(), {});
    send_phase();
    return std::move(out_);
  }

 private:
  void emit() {
    ExchangeStep step;
    step.exchange.actions = actions_;
    step.exchange.match = match_;
    step.target = global_;
    std::string key;
    for (const auto& a : actions_) {
      key += a.is_send() ? 's' : 'r';
      key += std::to_string(a.sender) + "," + std::to_string(a.receiver) + "," + a.msg + ";";
    }
    for (int s : global_) key += std::to_string(s) + ",";
    if (!seen_.insert(key).second) return;
    if (out_.size() >= limit_) {
      throw Error(ErrorCode::ExplosionLimit,
                  "more than " + std::to_string(limit_) + " exchanges from one state");
    }
    out_.push_back(std::move(step));
  }

  void send_phase() {
    if (!actions_.empty()) recv_phase();
    if (static_cast<int>(actions_.size()) == k_) return;
    for (ProcId p = 0; p < sys_.num_procs(); ++p) {
      for (const auto& t : sys_.automata[p].transitions) {
        if (t.from != global_[p] || !t.action.is_send()) continue;
        int saved = global_[p];
        int pos = static_cast<int>(actions_.size());
        auto& buf = buffers_[sys_.buffer_index(t.action.sender, t.action.receiver)];
        buf.push_back({t.action.msg, pos});
        actions_.push_back(t.action);
        match_.push_back(-1);
        global_[p] = t.to;
        send_phase();
        global_[p] = saved;
        match_.pop_back();
        actions_.pop_back();
        buf.pop_back();
      }
    }
  }

  void recv_phase() {
    emit();
    for (ProcId q = 0; q < sys_.num_procs(); ++q) {
      for (const auto& t : sys_.automata[q].transitions) {
        if (t.from != global_[q] || t.action.is_send()) continue;
        auto& buf = buffers_[sys_.buffer_index(t.action.sender, t.action.receiver)];
        if (buf.empty() || buf.front().msg != t.action.msg) continue;
        // In mailbox mode the head may come from a different sender.
        if (actions_[buf.front().send_pos].sender != t.action.sender) continue;
        Pending head = buf.front();
        buf.pop_front();
        int saved = global_[q];
        int pos = static_cast<int>(actions_.size());
        actions_.push_back(t.action);
        match_.push_back(head.send_pos);
        match_[head.send_pos] = pos;
        global_[q] = t.to;
        recv_phase();
        global_[q] = saved;
        match_[head.send_pos] = -1;
        match_.pop_back();
        actions_.pop_back();
        buf.push_front(head);
      }
    }
  }

  const System& sys_;
  int k_;
  std::size_t limit_;
  std::vector<int> global_;
  std::vector<std::deque<Pending>> buffers_;
  std::vector<Action> actions_;
  std::vector<int> match_;
  std::set<std::string> seen_;
  std::vector<ExchangeStep> out_;
};

}  // namespace

std::vector<ExchangeStep> enumerate_k_exchanges(const System& system, const std::vector<int>& from,
                                                int k, std::size_t limit) {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "k must be positive");
  return ExchangeEnumerator(system, k, limit).run(from);
}

std::string exchange_key(const KExchange& e, int num_procs) {
  Msc msc;
  for (int p = 0; p < num_procs; ++p) msc.procs.push_back(std::to_string(p));
  msc = msc_of(msc.procs, e.as_execution());
  return canonical_form(msc);
}

std::vector<ExchangeStep> distinct_k_exchanges(const System& system, const std::vector<int>& from,
                                               int k, std::size_t limit) {
  std::vector<ExchangeStep> all = enumerate_k_exchanges(system, from, k, limit);
  std::set<std::string> seen;
  std::vector<ExchangeStep> out;
  for (auto& step : all) {
    std::string key = exchange_key(step.exchange, system.num_procs());
    for (int s : step.target) key += std::to_string(s) + ",";
    if (seen.insert(key).second) out.push_back(std::move(step));
  }
  return out;
}

Bookkeeping Bookkeeping::empty(int num_procs) {
  return Bookkeeping{std::vector<ProcSet>(num_procs, 0), std::vector<ProcSet>(num_procs, 0)};
}

namespace {

// Extra edges of a summary node holding sets (cs, cr), shared by lambda_p and pi_hat.
void add_summary_edges(ConflictGraph& g, int node, int base_size, ProcSet cs, ProcSet cr) {
  for (int v = 0; v < base_size; ++v) {
    const Vertex& x = g.vertices[v];
    for (Side s : {Side::S, Side::R}) {
      if (x.has(s) && contains(cs, x.actor(s))) g.add_base(node, label(Side::S, s), v);
    }
    if (x.matched && (contains(cr, x.sender) || contains(cr, x.receiver))) {
      g.add_base(node, SS, v);
    }
    if (!x.matched && contains(cr, x.receiver)) g.add_base(node, SS, v);
  }
}

}  // namespace

LocalGraph local_graph(const KExchange& e, const Bookkeeping& book, const PiSummary* pi) {
  LocalGraph lg;
  lg.num_procs = static_cast<int>(book.cs.size());
  Execution ex = e.as_execution();
  int extra = lg.num_procs + (pi ? 1 : 0);
  ConflictGraph g = build_with_capacity(ex, extra);
  lg.base_size = g.size();
  for (ProcId p = 0; p < lg.num_procs; ++p) {
    Vertex s;
    s.kind = VertexKind::Summary;
    s.sender = p;
    g.vertices.push_back(s);
  }
  if (pi) {
    Vertex s;
    s.kind = VertexKind::PiSummary;
    g.vertices.push_back(s);
  }
  for (ProcId p = 0; p < lg.num_procs; ++p) {
    add_summary_edges(g, lg.lambda(p), lg.base_size, book.cs[p], book.cr[p]);
    for (ProcId q = 0; q < lg.num_procs; ++q) {
      if (contains(book.cr[q], p)) g.add_base(lg.lambda(q), SS, lg.lambda(p));
    }
  }
  for (int v = 0; v < lg.base_size; ++v) {
    const Vertex& x = g.vertices[v];
    if (x.matched) g.add_base(v, SS, lg.lambda(x.receiver));
  }
  if (pi) {
    add_summary_edges(g, lg.pi_hat(), lg.base_size, pi->cs, pi->cr);
    for (ProcId p = 0; p < lg.num_procs; ++p) {
      if (contains(pi->cr, p)) g.add_base(lg.pi_hat(), SS, lg.lambda(p));
    }
  }
  lg.graph = extend(g);
  return lg;
}

StepOutcome update_bookkeeping(const LocalGraph& lg, const Bookkeeping& book) {
  const ConflictGraph& g = lg.graph;
  int n = lg.num_procs;
  Bookkeeping next = book;
  for (ProcId p = 0; p < n; ++p) {
    std::vector<int> unm{lg.lambda(p)};
    for (int v = 0; v < lg.base_size; ++v) {
      if (!g.vertices[v].matched && g.vertices[v].receiver == p) unm.push_back(v);
    }
    ProcSet cs = book.cs[p];
    ProcSet cr = book.cr[p];
    for (int v : unm) {
      if (v < lg.base_size) cs |= bit(g.vertices[v].sender);
      for (int w = 0; w < lg.base_size; ++w) {
        if (!g.ext[SS].get(v, w)) continue;
        cs |= bit(g.vertices[w].sender);
        if (g.vertices[w].matched) cr |= bit(g.vertices[w].receiver);
      }
      for (ProcId q = 0; q < n; ++q) {
        if (g.ext[SS].get(v, lg.lambda(q))) {
          cs |= book.cs[q];
          cr |= book.cr[q];
        }
      }
    }
    next.cs[p] = cs;
    next.cr[p] = cr;
  }
  StepOutcome out;
  out.computed = next;
  for (ProcId p = 0; p < n; ++p) {
    if (contains(next.cr[p], p)) {
      out.violation = p;
      return out;
    }
  }
  out.book = std::move(next);
  return out;
}

StepOutcome try_step_k(const KExchange& e, const Bookkeeping& book) {
  return update_bookkeeping(local_graph(e, book), book);
}

AbstractConfig step_k(const AbstractConfig& cfg, const ExchangeStep& step) {
  StepOutcome r = try_step_k(step.exchange, cfg.book);
  if (!r.book) {
    throw Error(ErrorCode::CausalDeliveryViolation,
                "causal delivery violated at process " + std::to_string(r.violation));
  }
  return AbstractConfig{step.target, *r.book};
}

namespace {

// One abstract step for either communication mode.
StepOutcome abstract_step(Comm comm, const KExchange& e, const Bookkeeping& book) {
  if (comm == Comm::Mailbox) return try_step_k(e, book);
  P2pOutcome r = try_p2p_step(e, P2pBookkeeping{book.cs});
  StepOutcome out;
  if (!r.book) {
    out.violation = r.receiver;
    return out;
  }
  out.book = Bookkeeping{r.book->forbidden, book.cr};
  return out;
}

class ExchangeCache {
 public:
  ExchangeCache(const System& sys, int k, std::size_t limit) : sys_(sys), k_(k), limit_(limit) {}

  const std::vector<ExchangeStep>& from(const std::vector<int>& global) {
    auto it = cache_.find(global);
    if (it == cache_.end()) {
      it = cache_.emplace(global, distinct_k_exchanges(sys_, global, k_, limit_)).first;
    }
    return it->second;
  }

 private:
  const System& sys_;
  int k_;
  std::size_t limit_;
  std::map<std::vector<int>, std::vector<ExchangeStep>> cache_;
};

}  // namespace

Lts explore(const System& system, int k, const ExploreOptions& opts) {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "k must be positive");
  ExchangeCache cache(system, k, opts.exchange_limit);
  Lts lts;
  std::map<AbstractConfig, int> ids;
  AbstractConfig init{system.initial_global(), Bookkeeping::empty(system.num_procs())};
  ids.emplace(init, 0);
  lts.states.push_back(init);
  for (std::size_t cur = 0; cur < lts.states.size(); ++cur) {
    AbstractConfig cfg = lts.states[cur];
    for (const auto& step : cache.from(cfg.global)) {
      StepOutcome r = abstract_step(system.comm, step.exchange, cfg.book);
      if (!r.book) {
        lts.violations.push_back({static_cast<int>(cur), step.exchange, r.violation});
        continue;
      }
      AbstractConfig next{step.target, *r.book};
      auto [it, fresh] = ids.emplace(next, static_cast<int>(lts.states.size()));
      if (fresh) {
        if (lts.states.size() >= opts.state_limit) {
          throw Error(ErrorCode::ExplosionLimit,
                      "more than " + std::to_string(opts.state_limit) + " abstract states");
        }
        lts.states.push_back(next);
      }
      lts.transitions.push_back({static_cast<int>(cur), it->second, step.exchange});
    }
  }
  return lts;
}

ReachResult decide_reachability(const System& system, int k, const std::vector<int>& goal,
                                const ExploreOptions& opts) {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "k must be positive");
  if (goal.size() != system.automata.size()) {
    throw Error(ErrorCode::InvalidInput, "goal has the wrong number of processes");
  }
  ExchangeCache cache(system, k, opts.exchange_limit);
  std::vector<AbstractConfig> states;
  std::vector<std::pair<int, KExchange>> parent;
  std::map<AbstractConfig, int> ids;
  AbstractConfig init{system.initial_global(), Bookkeeping::empty(system.num_procs())};
  ids.emplace(init, 0);
  states.push_back(init);
  parent.push_back({-1, {}});
  ReachResult res;
  int found = -1;
  for (std::size_t cur = 0; cur < states.size() && found < 0; ++cur) {
    if (states[cur].global == goal) {
      found = static_cast<int>(cur);
      break;
    }
    AbstractConfig cfg = states[cur];
    for (const auto& step : cache.from(cfg.global)) {
      StepOutcome r = abstract_step(system.comm, step.exchange, cfg.book);
      if (!r.book) continue;
      AbstractConfig next{step.target, *r.book};
      auto [it, fresh] = ids.emplace(next, static_cast<int>(states.size()));
      if (!fresh) continue;
      if (states.size() >= opts.state_limit) {
        throw Error(ErrorCode::ExplosionLimit,
                    "more than " + std::to_string(opts.state_limit) + " abstract states");
      }
      states.push_back(next);
      parent.push_back({static_cast<int>(cur), step.exchange});
    }
  }
  res.states_explored = states.size();
  if (found < 0) return res;
  res.reachable = true;
  for (int s = found; parent[s].first >= 0; s = parent[s].first) {
    res.witness.insert(res.witness.begin(), parent[s].second);
  }
  return res;
}

}  // namespace ksync
