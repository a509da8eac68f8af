#include "ksync/testkit/generators.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace ksync::testkit {

Msc gen_msc(std::uint64_t seed, int max_msgs, int max_procs) {
  Rng rng(seed);
  int n = rng.between(std::min(2, max_procs), std::max(1, max_procs));
  int m = rng.between(1, std::max(1, max_msgs));
  Msc msc;
  for (int p = 0; p < n; ++p) msc.procs.push_back("p" + std::to_string(p));
  struct Message {
    ProcId from;
    ProcId to;
    bool matched;
  };
  std::vector<Message> msgs;
  for (int i = 0; i < m; ++i) msgs.push_back({rng.below(n), rng.below(n), rng.chance(65)});
  std::vector<int> in_flight;  // matched messages sent but not yet received
  std::vector<int> send_event(m, -1);
  int next = 0;
  while (next < m || !in_flight.empty()) {
    bool do_send = next < m && (in_flight.empty() || rng.chance(55));
    if (do_send) {
      const Message& x = msgs[next];
      send_event[next] = static_cast<int>(msc.events.size());
      msc.events.push_back({send(x.from, x.to, "m" + std::to_string(next)), -1});
      if (x.matched) in_flight.push_back(next);
      ++next;
    } else {
      int pick = rng.below(static_cast<int>(in_flight.size()));
      int id = in_flight[pick];
      in_flight.erase(in_flight.begin() + pick);
      const Message& x = msgs[id];
      int r = static_cast<int>(msc.events.size());
      msc.events.push_back({recv(x.from, x.to, "m" + std::to_string(id)), send_event[id]});
      msc.events[send_event[id]].match = r;
    }
  }
  return msc;
}

namespace {

std::vector<std::string> process_names(int n) {
  static const char* kNames[] = {"p", "q", "r", "s", "t", "u", "v", "w"};
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(i < 8 ? kNames[i] : "x" + std::to_string(i));
  return out;
}

System random_automata(Rng& rng, int n, int max_states, Comm comm,
                       const std::vector<std::vector<int>>& targets,
                       const std::vector<std::vector<int>>& sources) {
  auto names = process_names(n);
  SystemSpec spec;
  spec.comm = comm;
  static const char* kMsgs[] = {"a", "b"};
  int alphabet = rng.between(1, 2);
  for (int p = 0; p < n; ++p) {
    ProcessSpec ps;
    ps.initial = "l0";
    int states = rng.between(std::min(2, max_states), std::max(1, max_states));
    for (int s = 0; s < states; ++s) {
      int out = rng.between(1, 2);
      for (int t = 0; t < out; ++t) {
        TransitionSpec tr;
        tr.from = "l" + std::to_string(s);
        tr.to = "l" + std::to_string(rng.below(states));
        bool can_send = !targets[p].empty();
        bool can_recv = !sources[p].empty();
        if (!can_send && !can_recv) continue;
        tr.kind = (can_send && (!can_recv || rng.chance(50))) ? Kind::Send : Kind::Recv;
        const auto& peers = tr.kind == Kind::Send ? targets[p] : sources[p];
        tr.peer = names[peers[rng.below(static_cast<int>(peers.size()))]];
        tr.msg = kMsgs[rng.below(alphabet)];
        ps.transitions.push_back(tr);
      }
    }
    spec.processes[names[p]] = std::move(ps);
  }
  return make_system(spec);
}

}  // namespace

System gen_system(std::uint64_t seed, int max_procs, int max_states, Comm comm) {
  Rng rng(seed);
  int n = rng.between(std::min(2, max_procs), std::max(1, max_procs));
  std::vector<std::vector<int>> all(n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) all[p].push_back(q);
  }
  return random_automata(rng, n, max_states, comm, all, all);
}

System gen_single_sender_system(std::uint64_t seed, int max_procs, int max_states, Comm comm) {
  Rng rng(seed);
  int n = rng.between(std::min(2, max_procs), std::max(1, max_procs));
  std::vector<std::vector<int>> targets(n);
  std::vector<std::vector<int>> sources(n);
  for (int q = 0; q < n; ++q) {
    int from = rng.below(n);
    targets[from].push_back(q);
    sources[q].push_back(from);
  }
  return random_automata(rng, n, max_states, comm, targets, sources);
}

Execution gen_execution(std::uint64_t seed, const System& system, int max_len, int buffer_cap) {
  Rng rng(seed);
  Configuration c = initial_configuration(system);
  std::vector<Action> actions;
  for (int len = 0; len < max_len; ++len) {
    std::vector<std::pair<Action, int>> moves;
    for (ProcId p = 0; p < system.num_procs(); ++p) {
      for (const auto& t : system.automata[p].transitions) {
        if (t.from != c.global[p]) continue;
        const auto& buf = c.buffers[system.buffer_index(t.action.sender, t.action.receiver)];
        if (t.action.is_send()) {
          if (static_cast<int>(buf.size()) >= buffer_cap) continue;
        } else if (buf.empty() || buf.front() != Message{t.action.sender, t.action.msg}) {
          continue;
        }
        moves.push_back({t.action, t.to});
      }
    }
    if (moves.empty()) break;
    const auto& [a, to] = moves[rng.below(static_cast<int>(moves.size()))];
    auto& buf = c.buffers[system.buffer_index(a.sender, a.receiver)];
    if (a.is_send()) {
      buf.push_back({a.sender, a.msg});
    } else {
      buf.pop_front();
    }
    c.global[a.actor()] = to;
    actions.push_back(a);
  }
  return Execution{actions, compute_matching(actions)};
}

Execution RandomRun::flat() const {
  Execution e;
  for (const auto& x : exchanges) {
    int offset = static_cast<int>(e.actions.size());
    for (std::size_t i = 0; i < x.actions.size(); ++i) {
      e.actions.push_back(x.actions[i]);
      e.match.push_back(x.match[i] < 0 ? -1 : x.match[i] + offset);
    }
  }
  return e;
}

namespace {

struct Planned {
  ProcId from;
  ProcId to;
  std::string msg;
  bool matched;
};

// Orders the sends, then interleaves the receives while keeping each FIFO buffer in order.
KExchange assemble(Rng& rng, std::vector<Planned> sends, Comm comm, int num_procs) {
  auto channel = [&](const Planned& s) {
    return comm == Comm::Mailbox ? s.to : s.from * num_procs + s.to;
  };
  std::map<int, bool> blocked;
  for (auto& s : sends) {
    if (blocked[channel(s)]) s.matched = false;
    if (!s.matched) blocked[channel(s)] = true;
  }
  KExchange e;
  std::map<int, std::deque<int>> queues;
  for (std::size_t i = 0; i < sends.size(); ++i) {
    e.actions.push_back(send(sends[i].from, sends[i].to, sends[i].msg));
    e.match.push_back(-1);
    if (sends[i].matched) queues[channel(sends[i])].push_back(static_cast<int>(i));
  }
  while (!queues.empty()) {
    auto it = queues.begin();
    std::advance(it, rng.below(static_cast<int>(queues.size())));
    int s = it->second.front();
    it->second.pop_front();
    if (it->second.empty()) queues.erase(it);
    int pos = static_cast<int>(e.actions.size());
    e.actions.push_back(recv(sends[s].from, sends[s].to, sends[s].msg));
    e.match.push_back(s);
    e.match[s] = pos;
  }
  return e;
}

}  // namespace

RandomRun gen_run(std::uint64_t seed, int num_procs, int k, int max_exchanges, Comm comm) {
  Rng rng(seed);
  RandomRun run;
  for (int p = 0; p < num_procs; ++p) run.procs.push_back("p" + std::to_string(p));
  int count = rng.between(1, max_exchanges);
  int next_msg = 0;
  for (int x = 0; x < count; ++x) {
    std::vector<Planned> sends;
    int m = rng.between(1, k);
    for (int i = 0; i < m; ++i) {
      sends.push_back({rng.below(num_procs), rng.below(num_procs),
                       "m" + std::to_string(next_msg++), rng.chance(65)});
    }
    run.exchanges.push_back(assemble(rng, sends, comm, num_procs));
  }
  return run;
}

RandomRun gen_deviated_run(std::uint64_t seed, int num_procs, int k, int max_exchanges,
                           Comm comm) {
  Rng rng(seed);
  RandomRun run;
  for (int p = 0; p < num_procs; ++p) run.procs.push_back("p" + std::to_string(p));
  run.procs.push_back(std::string(kPiName));
  std::sort(run.procs.begin(), run.procs.end());
  run.pi = static_cast<ProcId>(std::find(run.procs.begin(), run.procs.end(), kPiName) -
                               run.procs.begin());
  std::vector<ProcId> real;
  for (ProcId p = 0; p < static_cast<ProcId>(run.procs.size()); ++p) {
    if (p != run.pi) real.push_back(p);
  }
  auto pick = [&] { return real[rng.below(static_cast<int>(real.size()))]; };
  int n = static_cast<int>(run.procs.size());
  int count = rng.between(1, max_exchanges);
  int deviation = rng.below(count);
  int next_msg = 0;
  ProcId dest = -1;
  std::string dest_msg;
  for (int x = 0; x < count; ++x) {
    std::vector<Planned> sends;
    int m = rng.between(1, k);
    int slot = x == deviation ? rng.below(m) : -1;
    for (int i = 0; i < m; ++i) {
      std::string msg = "m" + std::to_string(next_msg++);
      if (i == slot) {
        dest = pick();
        dest_msg = msg;
        sends.push_back({pick(), run.pi, pi_payload(run.procs[dest], msg), true});
      } else {
        sends.push_back({pick(), pick(), msg, rng.chance(65)});
      }
    }
    run.exchanges.push_back(assemble(rng, sends, comm, n));
  }
  KExchange forward;
  forward.actions = {send(run.pi, dest, dest_msg), recv(run.pi, dest, dest_msg)};
  forward.match = {1, 0};
  run.exchanges.push_back(forward);
  return run;
}

}  // namespace ksync::testkit
