#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ksync/exchange.hpp"
#include "ksync/msc.hpp"

namespace ksync::testkit {

// Deterministic across platforms: only raw engine output is used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  int below(int n) { return n <= 1 ? 0 : static_cast<int>(engine_() % std::uint64_t(n)); }
  int between(int lo, int hi) { return lo + below(hi - lo + 1); }
  bool chance(int percent) { return below(100) < percent; }

 private:
  std::mt19937_64 engine_;
};

// Processes "p0".."p{n-1}", one message name per send; the listing is a random
// interleaving, so the causal order is acyclic. Causal delivery may or may not hold.
Msc gen_msc(std::uint64_t seed, int max_msgs, int max_procs);

// Random automata over processes "p","q","r",... and messages "a" (and "b").
System gen_system(std::uint64_t seed, int max_procs, int max_states, Comm comm = Comm::Mailbox);

// Like gen_system, but each receiver has exactly one possible sender.
System gen_single_sender_system(std::uint64_t seed, int max_procs, int max_states,
                                Comm comm = Comm::Mailbox);

// A random execution of `system` of length at most max_len (buffers capped), or the
// longest one found along a random walk.
Execution gen_execution(std::uint64_t seed, const System& system, int max_len, int buffer_cap);

struct RandomRun {
  std::vector<std::string> procs;  // includes "pi" when deviated
  std::vector<KExchange> exchanges;
  ProcId pi = -1;
  Execution flat() const;
};

// Exchanges of at most k sends over free processes, FIFO-executable per exchange
// under `comm`, with unique message names.
RandomRun gen_run(std::uint64_t seed, int num_procs, int k, int max_exchanges, Comm comm);

// A run of the instrumented shape: exactly one matched send to pi inside some
// exchange and a final forward exchange s(pi,q,m) r(pi,q,m). At most
// max_exchanges exchanges before the forward one.
RandomRun gen_deviated_run(std::uint64_t seed, int num_procs, int k, int max_exchanges,
                           Comm comm);

}  // namespace ksync::testkit
