#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ksync/membership.hpp"
#include "ksync/testkit/generators.hpp"

namespace ksync::testkit {

// A system with the given process names and no transitions, for step functions
// that only need name lookups.
System bare_system(const std::vector<std::string>& procs, Comm comm);

// Threads a deviated run (last exchange = forward) through step_k and feas_step,
// then feas_accept. False as soon as one of them rejects.
bool incremental_feasible(const RandomRun& run);

// Bad-relation state after the whole run, forward exchange included, with the Q
// chain computed backwards from {pi}.
BadState incremental_bad_state(const RandomRun& run, int k);

// p2p_step and p2p_feas_step over the run, forward exchange excluded.
bool incremental_p2p_feasible(const RandomRun& run);

// True when every exchange passes step_k (mailbox) or p2p_step (p2p).
bool steps_accept(const RandomRun& run, Comm comm);

// Global states reached by executions of length <= max_len (buffers capped) whose
// MSC the brute-force oracle deems k-synchronous.
std::set<std::vector<int>> brute_force_sync_states(const System& system, int k, int max_len,
                                                   int buffer_cap);

// Global states reached by step_k paths whose concatenated length is <= max_len and
// whose buffers, kept between exchanges for unmatched messages, stay within the cap.
std::set<std::vector<int>> step_k_states(const System& system, int k, int max_len, int buffer_cap);

// Whether some execution of length <= max_len (buffers capped) has a MSC that is not
// k-synchronous.
bool brute_force_violation_exists(const System& system, int k, int max_len, int buffer_cap);

struct OracleConfig {
  std::uint64_t seed = 1;
  // Graph versus oracle: k-synchrony and causal delivery.
  int graph_mscs = 1000;
  int max_msgs = 6;
  int max_procs = 4;
  // step_k reachability versus bounded executions.
  int reach_systems = 30;
  int reach_max_len = 8;
  // Deviated-run equivalences (feasibility, badness).
  int deviated_runs = 500;
  int deviated_max_exchanges = 4;
  // p2p step and p2p feasibility.
  int p2p_runs = 500;
  // Mailbox versus p2p on single-sender systems.
  int cross_mode_systems = 30;
  // Membership against bounded exhaustive search.
  int direct_systems = 20;
  int direct_max_len = 12;
  // Mutation injection for the closure.
  RuleSet rules;

  static OracleConfig none();
};

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string detail;      // first failure
  std::string reproducer;  // fixture JSON of the shrunk failing case

  bool passed() const { return failures == 0; }
};

PropertyResult check_sync_by_graph(const OracleConfig& cfg);
PropertyResult check_causal_by_graph(const OracleConfig& cfg);
PropertyResult check_step_k_reach(const OracleConfig& cfg);
PropertyResult check_feasibility(const OracleConfig& cfg);
PropertyResult check_badness(const OracleConfig& cfg);
PropertyResult check_p2p_step(const OracleConfig& cfg);
PropertyResult check_p2p_feasibility(const OracleConfig& cfg);
PropertyResult check_cross_mode(const OracleConfig& cfg);
PropertyResult check_membership_direct(const OracleConfig& cfg);

struct OracleReport {
  std::vector<PropertyResult> properties;
  bool passed() const;
};

// Runs the properties in order and stops after the first failing one.
OracleReport run_oracle_suite(const OracleConfig& cfg);

// Greedily removes messages while `fails` still holds.
Msc shrink_msc(Msc msc, const std::function<bool(const Msc&)>& fails);
RandomRun shrink_run(RandomRun run, const std::function<bool(const RandomRun&)>& fails);

std::string run_to_json(const RandomRun& run, int k);

}  // namespace ksync::testkit
