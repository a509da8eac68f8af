#include "ksync/model.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace ksync {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotEnabled: return "NotEnabled";
    case ErrorCode::BufferHeadMismatch: return "BufferHeadMismatch";
    case ErrorCode::ReservedName: return "ReservedName";
    case ErrorCode::LastActionNotReceive: return "LastActionNotReceive";
    case ErrorCode::UnmatchedFinalReceive: return "UnmatchedFinalReceive";
    case ErrorCode::CyclicOrder: return "CyclicOrder";
    case ErrorCode::NotCausalDelivery: return "NotCausalDelivery";
    case ErrorCode::MissingDeviationVertices: return "MissingDeviationVertices";
    case ErrorCode::CausalDeliveryViolation: return "CausalDeliveryViolation";
    case ErrorCode::SecondDeviation: return "SecondDeviation";
    case ErrorCode::PiSendsEarly: return "PiSendsEarly";
    case ErrorCode::FeasibilityViolation: return "FeasibilityViolation";
    case ErrorCode::InconsistentGuess: return "InconsistentGuess";
    case ErrorCode::ExplosionLimit: return "ExplosionLimit";
    case ErrorCode::P2pCausalDeliveryViolation: return "P2pCausalDeliveryViolation";
    case ErrorCode::P2pFeasibilityViolation: return "P2pFeasibilityViolation";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

Action send(ProcId p, ProcId q, std::string m) { return Action{Kind::Send, p, q, std::move(m)}; }
Action recv(ProcId p, ProcId q, std::string m) { return Action{Kind::Recv, p, q, std::move(m)}; }

std::string pi_payload(std::string_view dest, std::string_view msg) {
  std::string out = "(";
  out += dest;
  out += ',';
  out += msg;
  out += ')';
  return out;
}

bool parse_pi_payload(std::string_view payload, std::string* dest, std::string* msg) {
  if (payload.size() < 4 || payload.front() != '(' || payload.back() != ')') return false;
  auto comma = payload.find(',');
  if (comma == std::string_view::npos || comma == 1) return false;
  *dest = std::string(payload.substr(1, comma - 1));
  *msg = std::string(payload.substr(comma + 1, payload.size() - comma - 2));
  return true;
}

int Automaton::state_index(std::string_view name) const {
  auto it = std::find(states.begin(), states.end(), name);
  return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

ProcId System::proc_index(std::string_view name) const {
  auto it = std::lower_bound(procs.begin(), procs.end(), name);
  if (it == procs.end() || *it != name) return -1;
  return static_cast<ProcId>(it - procs.begin());
}

std::vector<int> System::initial_global() const {
  std::vector<int> g;
  g.reserve(automata.size());
  for (const auto& a : automata) g.push_back(a.initial);
  return g;
}

int System::num_buffers() const {
  int n = num_procs();
  return comm == Comm::Mailbox ? n : n * n;
}

int System::buffer_index(ProcId sender, ProcId receiver) const {
  return comm == Comm::Mailbox ? receiver : sender * num_procs() + receiver;
}

System make_system(const SystemSpec& spec) {
  System sys;
  sys.comm = spec.comm;
  for (const auto& [name, _] : spec.processes) {
    if (name.empty()) throw Error(ErrorCode::InvalidInput, "empty process name");
    sys.procs.push_back(name);
  }
  if (sys.num_procs() > kMaxProcs) {
    throw Error(ErrorCode::InvalidInput, "at most 64 processes are supported");
  }
  for (const auto& [name, ps] : spec.processes) {
    ProcId self = sys.proc_index(name);
    Automaton a;
    if (ps.initial.empty()) {
      throw Error(ErrorCode::InvalidInput, "process '" + name + "': missing initial state");
    }
    auto state = [&](const std::string& s) {
      int i = a.state_index(s);
      if (i >= 0) return i;
      a.states.push_back(s);
      return static_cast<int>(a.states.size()) - 1;
    };
    a.initial = state(ps.initial);
    for (std::size_t i = 0; i < ps.transitions.size(); ++i) {
      const auto& t = ps.transitions[i];
      std::string where = "process '" + name + "' transition " + std::to_string(i);
      if (t.from.empty() || t.to.empty()) {
        throw Error(ErrorCode::InvalidInput, where + ": empty state name");
      }
      if (t.msg.empty()) throw Error(ErrorCode::InvalidInput, where + ": empty message");
      ProcId peer = sys.proc_index(t.peer);
      if (peer < 0) {
        throw Error(ErrorCode::InvalidInput, where + ": unknown peer '" + t.peer + "'");
      }
      Transition tr;
      tr.from = state(t.from);
      tr.to = state(t.to);
      tr.action = t.kind == Kind::Send ? send(self, peer, t.msg) : recv(peer, self, t.msg);
      a.transitions.push_back(tr);
    }
    sys.automata.push_back(std::move(a));
  }
  return sys;
}

SystemSpec to_spec(const System& system) {
  SystemSpec spec;
  spec.comm = system.comm;
  for (ProcId p = 0; p < system.num_procs(); ++p) {
    const auto& a = system.automata[p];
    ProcessSpec ps;
    ps.initial = a.states[a.initial];
    for (const auto& t : a.transitions) {
      ps.transitions.push_back({a.states[t.from], a.states[t.to], t.action.kind,
                                system.procs[t.action.peer()], t.action.msg});
    }
    spec.processes[system.procs[p]] = std::move(ps);
  }
  return spec;
}

std::string to_string(const std::vector<std::string>& names, const Action& a) {
  return std::string(a.is_send() ? "s(" : "r(") + names[a.sender] + "," + names[a.receiver] +
         "," + a.msg + ")";
}

Configuration initial_configuration(const System& system) {
  Configuration c;
  c.global = system.initial_global();
  c.buffers.resize(system.num_buffers());
  return c;
}

namespace {

void check_action(const System& system, const Action& a) {
  int n = system.num_procs();
  if (a.sender < 0 || a.sender >= n || a.receiver < 0 || a.receiver >= n) {
    throw Error(ErrorCode::InvalidInput, "action refers to an unknown process");
  }
}

}  // namespace

Configuration step(const System& system, const Configuration& config, const Action& a) {
  check_action(system, a);
  ProcId p = a.actor();
  const auto& aut = system.automata[p];
  int target = -1;
  for (const auto& t : aut.transitions) {
    if (t.from == config.global[p] && t.action == a && (target < 0 || t.to < target)) {
      target = t.to;
    }
  }
  if (target < 0) {
    throw Error(ErrorCode::NotEnabled, "no transition for " + to_string(system.procs, a));
  }
  Configuration next = config;
  auto& buf = next.buffers[system.buffer_index(a.sender, a.receiver)];
  if (a.is_send()) {
    buf.push_back({a.sender, a.msg});
  } else {
    if (buf.empty() || buf.front() != Message{a.sender, a.msg}) {
      throw Error(ErrorCode::BufferHeadMismatch,
                  "buffer head does not match " + to_string(system.procs, a));
    }
    buf.pop_front();
  }
  next.global[p] = target;
  return next;
}

std::vector<int> compute_matching(const std::vector<Action>& actions) {
  using Key = std::tuple<ProcId, ProcId, std::string>;
  std::map<Key, std::deque<int>> pending;
  std::vector<int> match(actions.size(), -1);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto& a = actions[i];
    auto& q = pending[Key{a.sender, a.receiver, a.msg}];
    if (a.is_send()) {
      q.push_back(static_cast<int>(i));
    } else if (!q.empty()) {
      match[i] = q.front();
      match[q.front()] = static_cast<int>(i);
      q.pop_front();
    }
  }
  return match;
}

RunResult run(const System& system, const std::vector<Action>& actions) {
  int n = system.num_procs();
  RunResult res;
  res.final = initial_configuration(system);
  std::vector<std::vector<int>> current(n);
  for (ProcId p = 0; p < n; ++p) current[p] = {system.automata[p].initial};

  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto& a = actions[i];
    int idx = static_cast<int>(i);
    try {
      check_action(system, a);
    } catch (const Error& err) {
      throw Error(err.code(), err.what(), idx);
    }
    ProcId p = a.actor();
    std::set<int> next;
    for (int s : current[p]) {
      for (const auto& t : system.automata[p].transitions) {
        if (t.from == s && t.action == a) next.insert(t.to);
      }
    }
    if (next.empty()) {
      throw Error(ErrorCode::NotEnabled,
                  "action " + std::to_string(i) + " " + to_string(system.procs, a) +
                      " is not enabled",
                  idx);
    }
    auto& buf = res.final.buffers[system.buffer_index(a.sender, a.receiver)];
    if (a.is_send()) {
      buf.push_back({a.sender, a.msg});
    } else {
      if (buf.empty() || buf.front() != Message{a.sender, a.msg}) {
        throw Error(ErrorCode::BufferHeadMismatch,
                    "action " + std::to_string(i) + " " + to_string(system.procs, a) +
                        " does not match the buffer head",
                    idx);
      }
      buf.pop_front();
    }
    current[p].assign(next.begin(), next.end());
  }

  // With several possible local states the smallest one is reported.
  for (ProcId p = 0; p < n; ++p) res.final.global[p] = current[p].front();
  res.execution.actions = actions;
  res.execution.match = compute_matching(actions);
  return res;
}

System instrument(const System& system) {
  if (system.proc_index(kPiName) >= 0) {
    throw Error(ErrorCode::ReservedName, "process name 'pi' is reserved");
  }
  SystemSpec spec = to_spec(system);
  // (dest, msg) pairs that some process can send, and those some process can receive.
  std::set<std::pair<std::string, std::string>> sendable;
  std::set<std::pair<std::string, std::string>> receivable;
  for (auto& [name, ps] : spec.processes) {
    std::vector<TransitionSpec> extra;
    for (const auto& t : ps.transitions) {
      if (t.kind == Kind::Send) {
        extra.push_back({t.from, t.to, Kind::Send, std::string(kPiName), pi_payload(t.peer, t.msg)});
        sendable.insert({t.peer, t.msg});
      } else {
        extra.push_back({t.from, t.to, Kind::Recv, std::string(kPiName), t.msg});
        receivable.insert({name, t.msg});
      }
    }
    ps.transitions.insert(ps.transitions.end(), extra.begin(), extra.end());
  }
  ProcessSpec pi;
  pi.initial = "init";
  for (const auto& [dest, msg] : sendable) {
    // Senders of (dest,msg) may be several processes; one receive per sender.
    std::string mid = "fwd" + pi_payload(dest, msg);
    std::set<std::string> senders;
    for (const auto& [name, ps] : spec.processes) {
      for (const auto& t : ps.transitions) {
        if (t.kind == Kind::Send && t.peer == dest && t.msg == msg) senders.insert(name);
      }
    }
    for (const auto& s : senders) {
      pi.transitions.push_back({"init", mid, Kind::Recv, s, pi_payload(dest, msg)});
    }
    if (receivable.count({dest, msg})) {
      pi.transitions.push_back({mid, "done", Kind::Send, dest, msg});
    }
  }
  spec.processes[std::string(kPiName)] = std::move(pi);
  return make_system(spec);
}

namespace {

ProcId lookup(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw Error(ErrorCode::InvalidInput, "unknown process '" + std::string(name) + "'");
  }
  return static_cast<ProcId>(it - names.begin());
}

Action rename(const Action& a, const std::vector<std::string>& from,
              const std::vector<std::string>& to) {
  return Action{a.kind, lookup(to, from[a.sender]), lookup(to, from[a.receiver]), a.msg};
}

}  // namespace

Execution deviate(const std::vector<std::string>& original, const Execution& e,
                  const std::vector<std::string>& names) {
  if (e.actions.empty() || e.actions.back().is_send()) {
    throw Error(ErrorCode::LastActionNotReceive, "execution does not end with a receive");
  }
  int last = static_cast<int>(e.actions.size()) - 1;
  int s = e.match[last];
  if (s < 0) throw Error(ErrorCode::UnmatchedFinalReceive, "final receive is unmatched");
  ProcId pi = lookup(names, kPiName);
  const Action& sa = e.actions[s];
  std::vector<Action> out;
  for (int i = 0; i < last; ++i) {
    if (i == s) {
      ProcId p = lookup(names, original[sa.sender]);
      std::string payload = pi_payload(original[sa.receiver], sa.msg);
      out.push_back(send(p, pi, payload));
      out.push_back(recv(p, pi, payload));
    } else {
      out.push_back(rename(e.actions[i], original, names));
    }
  }
  ProcId q = lookup(names, original[sa.receiver]);
  out.push_back(send(pi, q, sa.msg));
  out.push_back(recv(pi, q, sa.msg));
  Execution res;
  res.match = compute_matching(out);
  res.actions = std::move(out);
  return res;
}

Execution undeviate(const std::vector<std::string>& names, const Execution& e,
                    const std::vector<std::string>& original) {
  ProcId pi = lookup(names, kPiName);
  int to_pi = -1;
  int from_pi = -1;
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    const auto& a = e.actions[i];
    if (!a.is_send()) continue;
    if (a.receiver == pi) {
      if (to_pi >= 0) throw Error(ErrorCode::SecondDeviation, "two sends to pi");
      to_pi = static_cast<int>(i);
    }
    if (a.sender == pi) {
      if (from_pi >= 0) throw Error(ErrorCode::InvalidInput, "two sends by pi");
      from_pi = static_cast<int>(i);
    }
  }
  if (to_pi < 0 || from_pi < 0) {
    throw Error(ErrorCode::MissingDeviationVertices, "no deviated message in execution");
  }
  std::string dest;
  std::string msg;
  if (!parse_pi_payload(e.actions[to_pi].msg, &dest, &msg)) {
    throw Error(ErrorCode::InvalidInput, "malformed pi payload");
  }
  std::vector<Action> out;
  ProcId p = lookup(original, names[e.actions[to_pi].sender]);
  ProcId q = lookup(original, dest);
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    const auto& a = e.actions[i];
    if (static_cast<int>(i) == to_pi) {
      out.push_back(send(p, q, msg));
    } else if (a.sender != pi && a.receiver != pi) {
      out.push_back(rename(a, names, original));
    }
  }
  if (e.match[from_pi] >= 0) out.push_back(recv(p, q, msg));
  Execution res;
  res.match = compute_matching(out);
  res.actions = std::move(out);
  return res;
}

}  // namespace ksync
