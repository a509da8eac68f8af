#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ksync/conflict_graph.hpp"
#include "ksync/model.hpp"

namespace ksync {

inline constexpr std::size_t kDefaultExchangeLimit = 200000;
inline constexpr std::size_t kDefaultStateLimit = 1000000;

// Sends first, then receives of sends from the same block.
struct KExchange {
  std::vector<Action> actions;
  std::vector<int> match;

  int num_sends() const;
  Execution as_execution() const;
  bool operator==(const KExchange&) const = default;
};

struct ExchangeStep {
  KExchange exchange;
  std::vector<int> target;
  bool operator==(const ExchangeStep&) const = default;
};

// All non-empty exchanges runnable from `from` with empty buffers, in canonical order.
// Throws Error(ExplosionLimit) when more than `limit` are found.
std::vector<ExchangeStep> enumerate_k_exchanges(const System& system, const std::vector<int>& from,
                                                int k, std::size_t limit = kDefaultExchangeLimit);

// Same set with exchanges that have the same MSC and target collapsed.
std::vector<ExchangeStep> distinct_k_exchanges(const System& system, const std::vector<int>& from,
                                               int k, std::size_t limit = kDefaultExchangeLimit);

// Identifies an exchange up to reordering of independent actions.
std::string exchange_key(const KExchange& e, int num_procs);

struct Bookkeeping {
  std::vector<ProcSet> cs;  // C_S,p
  std::vector<ProcSet> cr;  // C_R,p

  static Bookkeeping empty(int num_procs);
  auto operator<=>(const Bookkeeping&) const = default;
};

struct AbstractConfig {
  std::vector<int> global;
  Bookkeeping book;
  auto operator<=>(const AbstractConfig&) const = default;
};

// Optional deviated-message summary added to the local graph.
struct PiSummary {
  ProcSet cs = 0;
  ProcSet cr = 0;
};

// The exchange's conflict graph plus lambda_p at index base_size + p and, when
// requested, the pi summary at the last index. Extended edges are computed.
struct LocalGraph {
  ConflictGraph graph;
  int base_size = 0;
  int num_procs = 0;

  int lambda(ProcId p) const { return base_size + p; }
  int pi_hat() const { return base_size + num_procs; }
};

LocalGraph local_graph(const KExchange& e, const Bookkeeping& book,
                       const PiSummary* pi = nullptr);

struct StepOutcome {
  std::optional<Bookkeeping> book;
  ProcId violation = -1;  // some p with p in C'_R,p when the step fails
  Bookkeeping computed;   // the updated sets, kept also when the step fails
};

// The bookkeeping update of one abstract step. `lg` must come from local_graph(e, book).
StepOutcome update_bookkeeping(const LocalGraph& lg, const Bookkeeping& book);

StepOutcome try_step_k(const KExchange& e, const Bookkeeping& book);

// Throws Error(CausalDeliveryViolation) naming the violating process.
AbstractConfig step_k(const AbstractConfig& cfg, const ExchangeStep& step);

struct LtsTransition {
  int from = 0;
  int to = 0;
  KExchange exchange;
  bool operator==(const LtsTransition&) const = default;
};

struct LtsViolation {
  int from = 0;
  KExchange exchange;
  ProcId process = -1;
  bool operator==(const LtsViolation&) const = default;
};

struct Lts {
  std::vector<AbstractConfig> states;
  std::vector<LtsTransition> transitions;
  std::vector<LtsViolation> violations;
  bool operator==(const Lts&) const = default;
};

struct ExploreOptions {
  std::size_t state_limit = kDefaultStateLimit;
  std::size_t exchange_limit = kDefaultExchangeLimit;
};

// Breadth-first closure under step_k (mailbox) or p2p_step (p2p), by system.comm.
// The p2p bookkeeping is stored in book.cs as forbidden senders per receiver.
Lts explore(const System& system, int k, const ExploreOptions& opts = {});

struct ReachResult {
  bool reachable = false;
  std::vector<KExchange> witness;
  std::size_t states_explored = 0;
};

ReachResult decide_reachability(const System& system, int k, const std::vector<int>& goal,
                                const ExploreOptions& opts = {});

}  // namespace ksync
