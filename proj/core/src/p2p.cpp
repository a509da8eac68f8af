#include "ksync/p2p.hpp"

namespace ksync {

P2pOutcome try_p2p_step(const KExchange& e, const P2pBookkeeping& book) {
  P2pOutcome out;
  P2pBookkeeping next = book;
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    const Action& a = e.actions[i];
    if (!a.is_send()) continue;
    if (e.match[i] < 0) {
      next.forbidden[a.receiver] |= bit(a.sender);
    } else if (contains(next.forbidden[a.receiver], a.sender)) {
      out.sender = a.sender;
      out.receiver = a.receiver;
      return out;
    }
  }
  out.book = std::move(next);
  return out;
}

P2pBookkeeping p2p_step(const KExchange& e, const P2pBookkeeping& book) {
  P2pOutcome r = try_p2p_step(e, book);
  if (!r.book) {
    throw Error(ErrorCode::P2pCausalDeliveryViolation,
                "p2p causal delivery violated on channel " + std::to_string(r.sender) + "->" +
                    std::to_string(r.receiver));
  }
  return *r.book;
}

ReachResult p2p_decide_reachability(const System& system, int k, const std::vector<int>& goal,
                                    const ExploreOptions& opts) {
  if (system.comm != Comm::P2p) throw Error(ErrorCode::InvalidInput, "system is not p2p");
  return decide_reachability(system, k, goal, opts);
}

P2pFeasOutcome p2p_feas_step(const System& instrumented, const P2pBookkeeping& book,
                             const P2pFeasState& fs, const KExchange& e) {
  ProcId pi = instrumented.proc_index(kPiName);
  P2pFeasOutcome out;
  out.next = fs;
  int deviation = -1;
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    const Action& a = e.actions[i];
    if (!a.is_send()) continue;
    if (a.sender == pi) {
      out.status = FeasStatus::PiSendsEarly;
      return out;
    }
    if (a.receiver == pi) {
      if (deviation >= 0 || fs.dest >= 0) {
        out.status = FeasStatus::SecondDeviation;
        return out;
      }
      deviation = static_cast<int>(i);
    }
  }
  ProcSet seen_unmatched_to_dest = 0;
  if (deviation >= 0) {
    std::string dest;
    std::string msg;
    if (!parse_pi_payload(e.actions[deviation].msg, &dest, &msg)) {
      throw Error(ErrorCode::InvalidInput, "malformed pi payload");
    }
    out.next.exp = e.actions[deviation].sender;
    out.next.dest = instrumented.proc_index(dest);
    seen_unmatched_to_dest = book.forbidden[out.next.dest];
    for (int i = 0; i < deviation; ++i) {
      const Action& a = e.actions[i];
      if (a.is_send() && e.match[i] < 0 && a.receiver == out.next.dest) {
        seen_unmatched_to_dest |= bit(a.sender);
      }
    }
    if (contains(seen_unmatched_to_dest, out.next.exp)) {
      out.status = FeasStatus::Violation;
      return out;
    }
  }
  if (out.next.dest < 0) return out;
  // Only positions after the deviation count in the deviation exchange.
  for (std::size_t i = deviation >= 0 ? deviation + 1 : 0; i < e.actions.size(); ++i) {
    const Action& a = e.actions[i];
    if (a.is_send() && e.match[i] >= 0 && a.sender == out.next.exp &&
        a.receiver == out.next.dest) {
      out.status = FeasStatus::Violation;
      return out;
    }
  }
  return out;
}

}  // namespace ksync
