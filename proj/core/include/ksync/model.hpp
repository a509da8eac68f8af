#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ksync/error.hpp"

namespace ksync {

using ProcId = int;
// Process sets are bitmasks over ProcId, so systems are limited to 64 processes.
using ProcSet = std::uint64_t;

inline constexpr int kMaxProcs = 64;
inline constexpr std::string_view kPiName = "pi";

inline ProcSet bit(ProcId p) { return ProcSet{1} << p; }
inline bool contains(ProcSet s, ProcId p) { return (s >> p) & 1U; }

enum class Comm { Mailbox, P2p };
enum class Kind : std::uint8_t { Send, Recv };

struct Action {
  Kind kind = Kind::Send;
  ProcId sender = 0;
  ProcId receiver = 0;
  std::string msg;

  bool is_send() const { return kind == Kind::Send; }
  ProcId actor() const { return is_send() ? sender : receiver; }
  ProcId peer() const { return is_send() ? receiver : sender; }

  auto operator<=>(const Action&) const = default;
};

Action send(ProcId p, ProcId q, std::string m);
Action recv(ProcId p, ProcId q, std::string m);

// Messages routed through pi carry the original destination: "(q,m)".
std::string pi_payload(std::string_view dest, std::string_view msg);
bool parse_pi_payload(std::string_view payload, std::string* dest, std::string* msg);

struct Transition {
  int from = 0;
  Action action;
  int to = 0;

  auto operator<=>(const Transition&) const = default;
};

struct Automaton {
  std::vector<std::string> states;
  int initial = 0;
  std::vector<Transition> transitions;

  int state_index(std::string_view name) const;
  bool operator==(const Automaton&) const = default;
};

// Name-level description used by parsers and fixture builders.
struct TransitionSpec {
  std::string from;
  std::string to;
  Kind kind = Kind::Send;
  std::string peer;
  std::string msg;
  bool operator==(const TransitionSpec&) const = default;
};

struct ProcessSpec {
  std::string initial;
  std::vector<TransitionSpec> transitions;
  bool operator==(const ProcessSpec&) const = default;
};

struct SystemSpec {
  Comm comm = Comm::Mailbox;
  std::map<std::string, ProcessSpec> processes;
  bool operator==(const SystemSpec&) const = default;
};

class System {
 public:
  Comm comm = Comm::Mailbox;
  std::vector<std::string> procs;  // lexicographic
  std::vector<Automaton> automata;

  int num_procs() const { return static_cast<int>(procs.size()); }
  ProcId proc_index(std::string_view name) const;  // -1 when absent
  std::vector<int> initial_global() const;
  int num_buffers() const;
  int buffer_index(ProcId sender, ProcId receiver) const;

  bool operator==(const System&) const = default;
};

// Throws Error(InvalidInput) on undeclared peers, empty names, or too many processes.
System make_system(const SystemSpec& spec);
SystemSpec to_spec(const System& system);

std::string to_string(const std::vector<std::string>& names, const Action& a);

// A buffered message remembers its sender: a receive names the sender it expects.
struct Message {
  ProcId sender = 0;
  std::string msg;
  auto operator<=>(const Message&) const = default;
};

struct Configuration {
  std::vector<int> global;
  // Mailbox: one buffer per receiver. P2p: one per (sender, receiver), row-major.
  std::vector<std::deque<Message>> buffers;

  bool operator==(const Configuration&) const = default;
};

Configuration initial_configuration(const System& system);

// Picks the transition with the smallest target when several carry the same action.
Configuration step(const System& system, const Configuration& config, const Action& a);

struct Execution {
  std::vector<Action> actions;
  std::vector<int> match;  // partner position for each action, -1 when unmatched

  std::size_t size() const { return actions.size(); }
  bool operator==(const Execution&) const = default;
};

// The l-th send(p,q,m) matches the l-th rec(p,q,m).
std::vector<int> compute_matching(const std::vector<Action>& actions);

struct RunResult {
  Configuration final;
  Execution execution;
};

// Tracks every local state a process can be in, so nondeterministic automata are
// handled exactly. Errors carry the index of the first action that cannot run.
RunResult run(const System& system, const std::vector<Action>& actions);

// Adds process "pi" per the instrumented-system construction.
System instrument(const System& system);

// e1 s e2 r  ->  e1 s(p,pi,(q,m)) r(p,pi,(q,m)) e2 s(pi,q,m) r(pi,q,m).
// `names` are the process names of the instrumented system; `original` maps
// ProcIds of the input execution to names.
Execution deviate(const std::vector<std::string>& original, const Execution& e,
                  const std::vector<std::string>& names);

// Inverse of deviate; expects exactly one send to pi and one send by pi.
Execution undeviate(const std::vector<std::string>& names, const Execution& e,
                    const std::vector<std::string>& original);

}  // namespace ksync
