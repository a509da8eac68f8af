#pragma once

#include <compare>
#include <optional>
#include <vector>

#include "ksync/exchange.hpp"

namespace ksync {

struct P2pBookkeeping {
  std::vector<ProcSet> forbidden;  // per receiver: senders of some unmatched message to it

  static P2pBookkeeping empty(int num_procs) {
    return P2pBookkeeping{std::vector<ProcSet>(num_procs, 0)};
  }
  auto operator<=>(const P2pBookkeeping&) const = default;
};

struct P2pOutcome {
  std::optional<P2pBookkeeping> book;
  ProcId sender = -1;  // offending channel when the step fails
  ProcId receiver = -1;
};

P2pOutcome try_p2p_step(const KExchange& e, const P2pBookkeeping& book);

// Throws Error(P2pCausalDeliveryViolation).
P2pBookkeeping p2p_step(const KExchange& e, const P2pBookkeeping& book);

// Requires system.comm == P2p.
ReachResult p2p_decide_reachability(const System& system, int k, const std::vector<int>& goal,
                                    const ExploreOptions& opts = {});

struct P2pFeasState {
  ProcId exp = -1;   // sender of the deviated message
  ProcId dest = -1;  // its original receiver
  auto operator<=>(const P2pFeasState&) const = default;
};

enum class FeasStatus { Ok, PiSendsEarly, SecondDeviation, Violation };

struct P2pFeasOutcome {
  FeasStatus status = FeasStatus::Ok;
  P2pFeasState next;
};

// `book` is the p2p bookkeeping before the exchange. Besides the matched-send
// checks after the deviation, a deviation whose sender already left an unmatched
// message for the same receiver is rejected: the un-deviated receive would overtake it.
P2pFeasOutcome p2p_feas_step(const System& instrumented, const P2pBookkeeping& book,
                             const P2pFeasState& fs, const KExchange& e);

}  // namespace ksync
