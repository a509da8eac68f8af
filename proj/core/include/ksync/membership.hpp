#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <vector>

#include "ksync/exchange.hpp"
#include "ksync/msc.hpp"
#include "ksync/p2p.hpp"

namespace ksync {

struct FeasState {
  ProcSet cpi_s = 0;
  ProcSet cpi_r = 0;
  ProcId dest = -1;
  ProcId exp = -1;  // sender of the deviated message
  auto operator<=>(const FeasState&) const = default;
};

struct FeasOutcome {
  FeasStatus status = FeasStatus::Ok;
  FeasState next;
};

// `lg` is local_graph(e, book, &pi) with pi built from fs; `book` is the bookkeeping
// before the exchange.
FeasOutcome feas_step(const System& instrumented, const LocalGraph& lg, const Bookkeeping& book,
                      const FeasState& fs, const KExchange& e);
FeasOutcome feas_step(const System& instrumented, const Bookkeeping& book, const FeasState& fs,
                      const KExchange& e);

// The final forward exchange is allowed when pi did not receive anything causally
// after an unmatched message to dest.
bool feas_accept(const Bookkeeping& book, const FeasState& fs, ProcId pi);

struct BadState {
  ProcSet p = 0;
  ProcSet q = 0;
  int count = 0;
  bool saw_rs = false;
  ProcSet last_is_rec = 0;
  auto operator<=>(const BadState&) const = default;
};

BadState initial_bad_state(ProcId pi, ProcSet q_guess);

struct LocalSets {
  std::vector<int> post;  // vertex indices of the exchange's conflict graph
  std::vector<int> pre;
  std::vector<int> scc;
};

LocalSets succ_pred_local(const KExchange& e, ProcSet p, ProcSet q_next);
LocalSets succ_pred_local(const ConflictGraph& base, ProcSet p, ProcSet q_next);

// The set Q that the backward relation derives from the guess q_next.
ProcSet induced_q(const ConflictGraph& base, ProcSet q_next);

// nullopt when bs.q differs from the set induced by q_next.
std::optional<BadState> try_bad_step(const BadState& bs, const ConflictGraph& base,
                                     ProcSet q_next, int k, ProcId pi);
// Throws Error(InconsistentGuess).
BadState bad_step(const BadState& bs, const KExchange& e, ProcSet q_next, int k, ProcId pi);

inline bool is_bad(const BadState& bs, int k) { return bs.saw_rs || bs.count >= k + 2; }

struct MembershipOptions {
  std::size_t state_limit = kDefaultStateLimit;
  std::size_t exchange_limit = kDefaultExchangeLimit;
};

struct MembershipResult {
  bool synchronizable = true;
  std::optional<Msc> counterexample;  // the non-synchronizable execution of the input system
  std::vector<KExchange> witness;     // deviated run in the instrumented system, last = forward
  std::size_t states_explored = 0;
};

// Mailbox or p2p according to system.comm. Throws Error(ExplosionLimit).
MembershipResult decide_k_synchronizability(const System& system, int k,
                                            const MembershipOptions& opts = {});
MembershipResult p2p_decide_k_synchronizability(const System& system, int k,
                                                const MembershipOptions& opts = {});

}  // namespace ksync
