#include "ksync/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace ksync {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidInput, (path.empty() ? "<root>" : path) + ": " + what);
}

const json& field(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

std::string str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  std::string s = j.get<std::string>();
  if (s.empty()) fail(path, "empty string");
  return s;
}

long long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long long>();
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }) ==
        keys.end()) {
      fail(path, "unknown field '" + it.key() + "'");
    }
  }
}

Comm comm_from(const json& j, const std::string& path) {
  std::string s = str(j, path);
  if (s == "mailbox") return Comm::Mailbox;
  if (s == "p2p") return Comm::P2p;
  fail(path, "expected \"mailbox\" or \"p2p\"");
}

Kind kind_from(const json& j, const std::string& path) {
  std::string s = str(j, path);
  if (s == "send") return Kind::Send;
  if (s == "recv") return Kind::Recv;
  fail(path, "expected \"send\" or \"recv\"");
}

const char* kind_name(Kind k) { return k == Kind::Send ? "send" : "recv"; }

ProcId proc_id(const std::vector<std::string>& procs, const std::string& name,
               const std::string& path) {
  auto it = std::lower_bound(procs.begin(), procs.end(), name);
  if (it == procs.end() || *it != name) fail(path, "unknown process '" + name + "'");
  return static_cast<ProcId>(it - procs.begin());
}

json procset_json(const std::vector<std::string>& procs, ProcSet s) {
  json arr = json::array();
  for (std::size_t p = 0; p < procs.size(); ++p) {
    if (contains(s, static_cast<ProcId>(p))) arr.push_back(procs[p]);
  }
  return arr;
}

ProcSet procset_from(const std::vector<std::string>& procs, const json& j,
                     const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  ProcSet s = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string sub = path + "[" + std::to_string(i) + "]";
    s |= bit(proc_id(procs, str(j[i], sub), sub));
  }
  return s;
}

}  // namespace

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line) + ", column " +
                                             std::to_string(col) + ": malformed JSON");
  }
}

System system_from_json(const json& j, Comm default_comm) {
  if (!j.is_object()) fail("", "expected an object");
  only_keys(j, "", {"comm", "processes", "name", "expect", "comment"});
  SystemSpec spec;
  spec.comm = j.contains("comm") ? comm_from(j["comm"], "comm") : default_comm;
  const json& procs = field(j, "", "processes");
  if (!procs.is_object()) fail("processes", "expected an object");
  for (auto it = procs.begin(); it != procs.end(); ++it) {
    std::string path = "processes." + it.key();
    if (it.key().empty()) fail(path, "empty process name");
    if (!it->is_object()) fail(path, "expected an object");
    only_keys(*it, path, {"initial", "transitions"});
    ProcessSpec ps;
    ps.initial = str(field(*it, path, "initial"), path + ".initial");
    const json& ts = field(*it, path, "transitions");
    if (!ts.is_array()) fail(path + ".transitions", "expected an array");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      std::string tp = path + ".transitions[" + std::to_string(i) + "]";
      only_keys(ts[i], tp, {"from", "to", "action"});
      TransitionSpec t;
      t.from = str(field(ts[i], tp, "from"), tp + ".from");
      t.to = str(field(ts[i], tp, "to"), tp + ".to");
      const json& a = field(ts[i], tp, "action");
      std::string ap = tp + ".action";
      only_keys(a, ap, {"kind", "peer", "msg"});
      t.kind = kind_from(field(a, ap, "kind"), ap + ".kind");
      t.peer = str(field(a, ap, "peer"), ap + ".peer");
      t.msg = str(field(a, ap, "msg"), ap + ".msg");
      if (!procs.contains(t.peer)) fail(ap + ".peer", "unknown process '" + t.peer + "'");
      ps.transitions.push_back(std::move(t));
    }
    spec.processes[it.key()] = std::move(ps);
  }
  return make_system(spec);
}

json to_json(const System& system) {
  json j;
  j["comm"] = system.comm == Comm::Mailbox ? "mailbox" : "p2p";
  json procs = json::object();
  for (ProcId p = 0; p < system.num_procs(); ++p) {
    const auto& a = system.automata[p];
    json ts = json::array();
    for (const auto& t : a.transitions) {
      ts.push_back({{"from", a.states[t.from]},
                    {"to", a.states[t.to]},
                    {"action",
                     {{"kind", kind_name(t.action.kind)},
                      {"peer", system.procs[t.action.peer()]},
                      {"msg", t.action.msg}}}});
    }
    procs[system.procs[p]] = {{"initial", a.states[a.initial]}, {"transitions", ts}};
  }
  j["processes"] = procs;
  return j;
}

System parse_system(std::string_view text, Comm default_comm) {
  return system_from_json(parse_json_text(text), default_comm);
}

Msc msc_from_json(const json& j) {
  if (!j.is_object()) fail("", "expected an object");
  only_keys(j, "", {"events", "name", "expect", "comment"});
  const json& evs = field(j, "", "events");
  if (!evs.is_array()) fail("events", "expected an array");
  std::set<std::string> names;
  std::map<long long, int> index_of;
  for (std::size_t i = 0; i < evs.size(); ++i) {
    std::string path = "events[" + std::to_string(i) + "]";
    only_keys(evs[i], path, {"id", "proc", "kind", "peer", "msg", "match"});
    long long id = integer(field(evs[i], path, "id"), path + ".id");
    if (!index_of.emplace(id, static_cast<int>(i)).second) fail(path + ".id", "duplicate id");
    names.insert(str(field(evs[i], path, "proc"), path + ".proc"));
    names.insert(str(field(evs[i], path, "peer"), path + ".peer"));
  }
  Msc msc;
  msc.procs.assign(names.begin(), names.end());
  if (msc.num_procs() > kMaxProcs) fail("events", "too many processes");
  for (std::size_t i = 0; i < evs.size(); ++i) {
    std::string path = "events[" + std::to_string(i) + "]";
    const json& ev = evs[i];
    ProcId self = proc_id(msc.procs, ev["proc"].get<std::string>(), path + ".proc");
    ProcId peer = proc_id(msc.procs, ev["peer"].get<std::string>(), path + ".peer");
    Kind kind = kind_from(field(ev, path, "kind"), path + ".kind");
    std::string msg = str(field(ev, path, "msg"), path + ".msg");
    Event e;
    e.action = kind == Kind::Send ? send(self, peer, msg) : recv(peer, self, msg);
    auto m = ev.find("match");
    if (m != ev.end() && !m->is_null()) {
      long long target = integer(*m, path + ".match");
      auto it = index_of.find(target);
      if (it == index_of.end()) fail(path + ".match", "unknown event id");
      e.match = it->second;
    }
    msc.events.push_back(std::move(e));
  }
  // A match written on only one side is completed on the other.
  for (std::size_t i = 0; i < msc.events.size(); ++i) {
    int m = msc.events[i].match;
    if (m < 0) continue;
    int& back = msc.events[m].match;
    if (back < 0) {
      back = static_cast<int>(i);
    } else if (back != static_cast<int>(i)) {
      fail("events[" + std::to_string(i) + "].match", "inconsistent matching");
    }
  }
  validate(msc);
  return msc;
}

json to_json(const Msc& msc) {
  json evs = json::array();
  for (std::size_t i = 0; i < msc.events.size(); ++i) {
    const Event& e = msc.events[i];
    json ev = {{"id", i},
               {"proc", msc.procs[e.action.actor()]},
               {"kind", kind_name(e.action.kind)},
               {"peer", msc.procs[e.action.peer()]},
               {"msg", e.action.msg}};
    ev["match"] = e.match < 0 ? json(nullptr) : json(e.match);
    evs.push_back(ev);
  }
  return json{{"events", evs}};
}

Msc parse_msc(std::string_view text) { return msc_from_json(parse_json_text(text)); }

json to_json(const std::vector<std::string>& procs, const KExchange& e) {
  json arr = json::array();
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    const Action& a = e.actions[i];
    json x = {{"kind", kind_name(a.kind)},
              {"from", procs[a.sender]},
              {"to", procs[a.receiver]},
              {"msg", a.msg}};
    x["match"] = e.match[i] < 0 ? json(nullptr) : json(e.match[i]);
    arr.push_back(x);
  }
  return arr;
}

KExchange exchange_from_json(const System& system, const json& j) {
  return exchange_from_json(system.procs, j);
}

KExchange exchange_from_json(const std::vector<std::string>& procs, const json& j) {
  if (!j.is_array()) fail("exchange", "expected an array");
  KExchange e;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string path = "exchange[" + std::to_string(i) + "]";
    Action a;
    a.kind = kind_from(field(j[i], path, "kind"), path + ".kind");
    a.sender = proc_id(procs, str(field(j[i], path, "from"), path + ".from"), path);
    a.receiver = proc_id(procs, str(field(j[i], path, "to"), path + ".to"), path);
    a.msg = str(field(j[i], path, "msg"), path + ".msg");
    const json& m = field(j[i], path, "match");
    e.actions.push_back(std::move(a));
    e.match.push_back(m.is_null() ? -1 : static_cast<int>(integer(m, path + ".match")));
  }
  return e;
}

json to_json(const System& system, const Lts& lts) {
  const auto& procs = system.procs;
  bool p2p = system.comm == Comm::P2p;
  json states = json::array();
  for (std::size_t i = 0; i < lts.states.size(); ++i) {
    const auto& s = lts.states[i];
    json global = json::object();
    json book = json::object();
    for (std::size_t p = 0; p < procs.size(); ++p) {
      global[procs[p]] = system.automata[p].states[s.global[p]];
      if (p2p) {
        book[procs[p]] = {{"forbidden", procset_json(procs, s.book.cs[p])}};
      } else {
        book[procs[p]] = {{"cs", procset_json(procs, s.book.cs[p])},
                          {"cr", procset_json(procs, s.book.cr[p])}};
      }
    }
    states.push_back({{"id", i}, {"global", global}, {"book", book}});
  }
  json transitions = json::array();
  for (const auto& t : lts.transitions) {
    transitions.push_back({{"from", t.from}, {"to", t.to}, {"exchange", to_json(procs, t.exchange)}});
  }
  json violations = json::array();
  for (const auto& v : lts.violations) {
    violations.push_back({{"from", v.from},
                          {"exchange", to_json(procs, v.exchange)},
                          {"process", procs[v.process]}});
  }
  return json{{"states", states}, {"transitions", transitions}, {"violations", violations}};
}

Lts lts_from_json(const System& system, const json& j) {
  const auto& procs = system.procs;
  bool p2p = system.comm == Comm::P2p;
  Lts lts;
  const json& states = field(j, "", "states");
  for (std::size_t i = 0; i < states.size(); ++i) {
    std::string path = "states[" + std::to_string(i) + "]";
    AbstractConfig c;
    c.book = Bookkeeping::empty(system.num_procs());
    const json& global = field(states[i], path, "global");
    const json& book = field(states[i], path, "book");
    for (ProcId p = 0; p < system.num_procs(); ++p) {
      std::string gp = path + ".global." + procs[p];
      std::string name = str(field(global, path + ".global", procs[p].c_str()), gp);
      int s = system.automata[p].state_index(name);
      if (s < 0) fail(gp, "unknown state '" + name + "'");
      c.global.push_back(s);
      std::string bp = path + ".book." + procs[p];
      const json& b = field(book, path + ".book", procs[p].c_str());
      if (p2p) {
        c.book.cs[p] = procset_from(procs, field(b, bp, "forbidden"), bp + ".forbidden");
      } else {
        c.book.cs[p] = procset_from(procs, field(b, bp, "cs"), bp + ".cs");
        c.book.cr[p] = procset_from(procs, field(b, bp, "cr"), bp + ".cr");
      }
    }
    lts.states.push_back(std::move(c));
  }
  for (const auto& t : field(j, "", "transitions")) {
    lts.transitions.push_back({static_cast<int>(integer(field(t, "transitions", "from"), "from")),
                               static_cast<int>(integer(field(t, "transitions", "to"), "to")),
                               exchange_from_json(system, field(t, "transitions", "exchange"))});
  }
  for (const auto& v : field(j, "", "violations")) {
    lts.violations.push_back(
        {static_cast<int>(integer(field(v, "violations", "from"), "from")),
         exchange_from_json(system, field(v, "violations", "exchange")),
         proc_id(procs, str(field(v, "violations", "process"), "process"), "violations")});
  }
  return lts;
}

json to_json(const Verdict& v) {
  json j;
  j["command"] = v.command;
  j["inputDigest"] = v.input_digest;
  j["k"] = v.k;
  j["synchronizable"] = v.synchronizable;
  j["counterexample"] = v.counterexample ? to_json(*v.counterexample) : json(nullptr);
  j["statesExplored"] = v.states_explored;
  return j;
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  if (j.contains("command")) v.command = j["command"].get<std::string>();
  if (j.contains("inputDigest")) v.input_digest = j["inputDigest"].get<std::string>();
  v.k = static_cast<int>(integer(field(j, "", "k"), "k"));
  const json& s = field(j, "", "synchronizable");
  if (!s.is_boolean()) fail("synchronizable", "expected a boolean");
  v.synchronizable = s.get<bool>();
  const json& c = field(j, "", "counterexample");
  if (!c.is_null()) v.counterexample = msc_from_json(c);
  v.states_explored = static_cast<std::size_t>(integer(field(j, "", "statesExplored"), "statesExplored"));
  return v;
}

std::string digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ksync
