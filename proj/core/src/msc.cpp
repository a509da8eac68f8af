#include "ksync/msc.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_set>

namespace ksync {

void validate(const Msc& msc) {
  int n = msc.num_procs();
  int size = static_cast<int>(msc.events.size());
  for (int i = 0; i < size; ++i) {
    const auto& ev = msc.events[i];
    const auto& a = ev.action;
    std::string where = "event " + std::to_string(i);
    if (a.sender < 0 || a.sender >= n || a.receiver < 0 || a.receiver >= n) {
      throw Error(ErrorCode::InvalidInput, where + ": unknown process");
    }
    if (ev.match < -1 || ev.match >= size) {
      throw Error(ErrorCode::InvalidInput, where + ": match out of range");
    }
    if (!a.is_send() && ev.match < 0) {
      throw Error(ErrorCode::InvalidInput, where + ": receive without a matching send");
    }
    if (ev.match < 0) continue;
    const auto& other = msc.events[ev.match];
    if (other.match != i || other.action.kind == a.kind) {
      throw Error(ErrorCode::InvalidInput, where + ": inconsistent matching");
    }
    if (other.action.sender != a.sender || other.action.receiver != a.receiver ||
        other.action.msg != a.msg) {
      throw Error(ErrorCode::InvalidInput, where + ": matched events disagree on their label");
    }
  }
}

namespace {

// Immediate predecessors: previous event on the same process, and the send of a receive.
std::vector<std::vector<int>> predecessors(const Msc& msc) {
  std::vector<std::vector<int>> preds(msc.events.size());
  std::vector<int> last(msc.procs.size(), -1);
  for (std::size_t i = 0; i < msc.events.size(); ++i) {
    const auto& ev = msc.events[i];
    ProcId p = ev.action.actor();
    if (last[p] >= 0) preds[i].push_back(last[p]);
    last[p] = static_cast<int>(i);
    if (!ev.action.is_send()) preds[i].push_back(ev.match);
  }
  return preds;
}

}  // namespace

bool is_acyclic(const Msc& msc) {
  auto preds = predecessors(msc);
  std::size_t n = msc.events.size();
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> succ(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int p : preds[i]) {
      succ[p].push_back(static_cast<int>(i));
      ++indeg[i];
    }
  }
  std::vector<int> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    ++seen;
    for (int w : succ[v]) {
      if (--indeg[w] == 0) ready.push_back(w);
    }
  }
  return seen == n;
}

Msc msc_of(const std::vector<std::string>& procs, const Execution& e) {
  Msc msc;
  msc.procs = procs;
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    msc.events.push_back({e.actions[i], e.match[i]});
  }
  return msc;
}

Execution as_execution(const Msc& msc) {
  Execution e;
  for (const auto& ev : msc.events) {
    e.actions.push_back(ev.action);
    e.match.push_back(ev.match);
  }
  return e;
}

std::string canonical_form(const Msc& msc) {
  int n = msc.num_procs();
  std::vector<std::vector<int>> lanes(n);
  std::vector<std::pair<int, int>> pos(msc.events.size());
  for (std::size_t i = 0; i < msc.events.size(); ++i) {
    ProcId p = msc.events[i].action.actor();
    pos[i] = {p, static_cast<int>(lanes[p].size())};
    lanes[p].push_back(static_cast<int>(i));
  }
  std::string out;
  for (int p = 0; p < n; ++p) {
    out += msc.procs[p];
    out += ':';
    for (int i : lanes[p]) {
      const auto& ev = msc.events[i];
      out += ev.action.is_send() ? " s(" : " r(";
      out += msc.procs[ev.action.peer()] + "," + ev.action.msg;
      if (ev.match >= 0) {
        out += "," + std::to_string(pos[ev.match].first) + "." +
               std::to_string(pos[ev.match].second);
      }
      out += ')';
    }
    out += '\n';
  }
  return out;
}

bool isomorphic(const Msc& a, const Msc& b) { return canonical_form(a) == canonical_form(b); }

namespace {

struct LinearizationWalker {
  const Msc& msc;
  const std::function<bool(const Execution&)>& visit;
  std::vector<std::vector<int>> lanes;
  std::vector<std::size_t> next;
  std::vector<int> placed_at;
  std::vector<int> order;

  bool enabled(int ev) const {
    const auto& e = msc.events[ev];
    return e.action.is_send() || placed_at[e.match] >= 0;
  }

  bool emit() {
    Execution e;
    for (int ev : order) {
      e.actions.push_back(msc.events[ev].action);
      int m = msc.events[ev].match;
      e.match.push_back(m < 0 ? -1 : placed_at[m]);
    }
    return visit(e);
  }

  bool walk() {
    if (order.size() == msc.events.size()) return emit();
    for (std::size_t p = 0; p < lanes.size(); ++p) {
      if (next[p] == lanes[p].size()) continue;
      int ev = lanes[p][next[p]];
      if (!enabled(ev)) continue;
      placed_at[ev] = static_cast<int>(order.size());
      order.push_back(ev);
      ++next[p];
      bool go_on = walk();
      --next[p];
      order.pop_back();
      placed_at[ev] = -1;
      if (!go_on) return false;
    }
    return true;
  }
};

}  // namespace

void for_each_linearization(const Msc& msc,
                            const std::function<bool(const Execution&)>& visit) {
  if (!is_acyclic(msc)) throw Error(ErrorCode::CyclicOrder, "causal order is cyclic");
  LinearizationWalker w{msc, visit, {}, {}, {}, {}};
  w.lanes.resize(msc.procs.size());
  for (std::size_t i = 0; i < msc.events.size(); ++i) {
    w.lanes[msc.events[i].action.actor()].push_back(static_cast<int>(i));
  }
  w.next.assign(msc.procs.size(), 0);
  w.placed_at.assign(msc.events.size(), -1);
  w.walk();
}

std::size_t count_linearizations(const Msc& msc) {
  std::size_t count = 0;
  for_each_linearization(msc, [&](const Execution&) {
    ++count;
    return true;
  });
  return count;
}

namespace {

// Searches prefixes of linearizations that keep every buffer FIFO-consistent with
// the given matching. Sends enter each channel in the order of their receives, so
// the buffer contents, and hence the outcome, depend only on the placed event set.
class CausalSearch {
 public:
  CausalSearch(const Msc& msc, Comm comm) : msc_(msc), comm_(comm), preds_(predecessors(msc)) {}

  bool run() {
    if (msc_.events.size() > 63) {
      throw Error(ErrorCode::InvalidInput, "oracle limited to 63 events");
    }
    placed_.assign(msc_.events.size(), -1);
    return extend(0, 0);
  }

 private:
  bool same_channel(const Action& a, const Action& b) const {
    if (a.receiver != b.receiver) return false;
    return comm_ == Comm::Mailbox || a.sender == b.sender;
  }

  bool can_place(int ev) const {
    for (int p : preds_[ev]) {
      if (placed_[p] < 0) return false;
    }
    const auto& e = msc_.events[ev];
    if (e.action.is_send()) {
      if (e.match < 0) return true;
      // An earlier send on the channel must be matched and received first. Both
      // receives sit on the same process, so their order is fixed by the listing.
      for (std::size_t j = 0; j < msc_.events.size(); ++j) {
        const auto& o = msc_.events[j];
        if (placed_[j] >= 0 && o.action.is_send() && same_channel(o.action, e.action) &&
            (o.match < 0 || o.match > e.match)) {
          return false;
        }
      }
      return true;
    }
    // Every send placed before ours on the channel must already be received.
    int mine = placed_[e.match];
    for (std::size_t j = 0; j < msc_.events.size(); ++j) {
      const auto& o = msc_.events[j];
      if (placed_[j] >= 0 && placed_[j] < mine && o.action.is_send() &&
          same_channel(o.action, e.action)) {
        if (o.match < 0 || placed_[o.match] < 0) return false;
      }
    }
    return true;
  }

  bool extend(std::uint64_t mask, int depth) {
    if (depth == static_cast<int>(msc_.events.size())) return true;
    if (dead_.count(mask)) return false;
    for (std::size_t ev = 0; ev < msc_.events.size(); ++ev) {
      if (placed_[ev] >= 0 || !can_place(static_cast<int>(ev))) continue;
      placed_[ev] = depth;
      bool ok = extend(mask | (std::uint64_t{1} << ev), depth + 1);
      placed_[ev] = -1;
      if (ok) return true;
    }
    dead_.insert(mask);
    return false;
  }

  const Msc& msc_;
  Comm comm_;
  std::vector<std::vector<int>> preds_;
  std::vector<int> placed_;
  std::unordered_set<std::uint64_t> dead_;
};

// Searches decompositions into blocks of at most k sends followed by the receives
// of the block's matched sends. The order inside a phase is free, so a block is
// valid when the immediate predecessors of its events are placed earlier or
// belong to an earlier phase of the same block.
class BlockSearch {
 public:
  BlockSearch(const Msc& msc, int k) : msc_(msc), k_(k), preds_(predecessors(msc)) {}

  bool run() {
    if (msc_.events.size() > 63) {
      throw Error(ErrorCode::InvalidInput, "oracle limited to 63 events");
    }
    for (std::size_t i = 0; i < msc_.events.size(); ++i) {
      if (msc_.events[i].action.is_send()) sends_.push_back(static_cast<int>(i));
    }
    full_ = msc_.events.size() == 64 ? ~std::uint64_t{0}
                                     : (std::uint64_t{1} << msc_.events.size()) - 1;
    return solve(0);
  }

 private:
  bool preds_within(int ev, std::uint64_t allowed) const {
    for (int p : preds_[ev]) {
      if (!((allowed >> p) & 1U)) return false;
    }
    return true;
  }

  bool solve(std::uint64_t placed) {
    if (placed == full_) return true;
    if (dead_.count(placed)) return false;
    std::vector<int> avail;
    for (int s : sends_) {
      if (!((placed >> s) & 1U)) avail.push_back(s);
    }
    // Enumerate non-empty subsets of the remaining sends of size at most k.
    std::vector<int> chosen;
    bool found = choose(placed, avail, 0, chosen);
    if (!found) dead_.insert(placed);
    return found;
  }

  bool choose(std::uint64_t placed, const std::vector<int>& avail, std::size_t from,
              std::vector<int>& chosen) {
    if (!chosen.empty() && try_block(placed, chosen)) return true;
    if (static_cast<int>(chosen.size()) == k_) return false;
    for (std::size_t i = from; i < avail.size(); ++i) {
      chosen.push_back(avail[i]);
      bool ok = choose(placed, avail, i + 1, chosen);
      chosen.pop_back();
      if (ok) return true;
    }
    return false;
  }

  bool try_block(std::uint64_t placed, const std::vector<int>& chosen) {
    std::uint64_t after_sends = placed;
    for (int s : chosen) after_sends |= std::uint64_t{1} << s;
    for (int s : chosen) {
      if (!preds_within(s, after_sends)) return false;
    }
    std::uint64_t after_recvs = after_sends;
    for (int s : chosen) {
      int r = msc_.events[s].match;
      if (r >= 0) after_recvs |= std::uint64_t{1} << r;
    }
    for (int s : chosen) {
      int r = msc_.events[s].match;
      if (r >= 0 && !preds_within(r, after_recvs)) return false;
    }
    return solve(after_recvs);
  }

  const Msc& msc_;
  int k_;
  std::vector<std::vector<int>> preds_;
  std::vector<int> sends_;
  std::uint64_t full_ = 0;
  std::unordered_set<std::uint64_t> dead_;
};

}  // namespace

bool causal_delivery_oracle(const Msc& msc, Comm comm) {
  if (!is_acyclic(msc)) return false;
  return CausalSearch(msc, comm).run();
}

bool k_synchronous_oracle(const Msc& msc, int k, Comm comm) {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "k must be positive");
  if (!causal_delivery_oracle(msc, comm)) return false;
  return BlockSearch(msc, k).run();
}

}  // namespace ksync
