#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ksync/json_io.hpp"
#include "ksync/testkit/oracle_suite.hpp"

namespace ksync::cli {

namespace {

struct Options {
  std::string file;
  int k = 1;
  std::string comm = "mailbox";
  std::string dot;
  std::string out;
  std::size_t limit_states = kDefaultStateLimit;
  bool json_output = false;
  std::vector<std::string> goal;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, path + ": cannot write");
  out << text;
}

Comm comm_flag(const std::string& s) { return s == "p2p" ? Comm::P2p : Comm::Mailbox; }

// Error messages from the parsers name the field; prefix the file.
template <typename F>
auto parse_input(const std::string& path, const std::string& text, F parse) {
  try {
    return parse(text);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

int analyze_msc(const Options& o, std::ostream& out) {
  std::string text = read_file(o.file);
  Msc msc = parse_input(o.file, text, [](const std::string& t) { return parse_msc(t); });
  Comm comm = comm_flag(o.comm);
  ConflictGraph cg = extend(build(msc));
  bool causal = causal_delivery_oracle(msc, comm);
  std::optional<bool> causal_graph;
  if (comm == Comm::Mailbox) causal_graph = causal_delivery_by_graph(cg);
  SccReport scc = scc_report(cg);
  std::optional<int> min_k;
  if (causal && !scc.rs_on_cycle && scc.max_size <= o.k) min_k = std::max(1, scc.max_size);
  if (!o.dot.empty()) write_file(o.dot, to_dot(cg, msc.procs));

  if (o.json_output) {
    json j;
    j["command"] = "analyze-msc";
    j["inputDigest"] = digest(text);
    j["k"] = o.k;
    j["causal"] = causal;
    j["causalGraph"] = causal_graph ? json(*causal_graph) : json(nullptr);
    j["minK"] = min_k ? json(*min_k) : json(nullptr);
    j["maxScc"] = scc.max_size;
    j["rsCycle"] = scc.rs_on_cycle;
    out << j.dump(2) << '\n';
  } else {
    out << "causal delivery: " << (causal ? "yes" : "no");
    if (causal_graph) out << " (graph: " << (*causal_graph ? "yes" : "no") << ")";
    out << "\nmax SCC size: " << scc.max_size << "\nRS edge on a cycle: "
        << (scc.rs_on_cycle ? "yes" : "no") << "\nminimal k <= " << o.k << ": ";
    if (min_k) {
      out << *min_k << '\n';
    } else {
      out << "none\n";
    }
  }
  if (causal_graph && *causal_graph != causal) {
    throw Error(ErrorCode::InvalidInput, "graph and oracle disagree on causal delivery");
  }
  return min_k ? kHolds : kFails;
}

System load_system(const Options& o, std::string* text) {
  *text = read_file(o.file);
  Comm comm = comm_flag(o.comm);
  return parse_input(o.file, *text, [&](const std::string& t) { return parse_system(t, comm); });
}

int decide(const Options& o, std::ostream& out) {
  std::string text;
  System sys = load_system(o, &text);
  MembershipOptions opts;
  opts.state_limit = o.limit_states;
  MembershipResult res = decide_k_synchronizability(sys, o.k, opts);
  Verdict v{"decide", digest(text), o.k, res.synchronizable, res.counterexample,
            res.states_explored};
  if (res.counterexample) {
    if (!o.out.empty()) write_file(o.out, to_json(*res.counterexample).dump(2) + "\n");
    if (!o.dot.empty()) {
      write_file(o.dot, to_dot(extend(build(*res.counterexample)), res.counterexample->procs));
    }
  }
  if (o.json_output) {
    out << to_json(v).dump(2) << '\n';
  } else {
    out << (res.synchronizable ? "" : "not ") << o.k << "-synchronizable (" << res.states_explored
        << " product states)\n";
    if (res.counterexample) {
      const Msc& m = *res.counterexample;
      out << "counterexample:\n";
      for (ProcId p = 0; p < m.num_procs(); ++p) {
        out << "  " << m.procs[p] << ':';
        for (const auto& ev : m.events) {
          if (ev.action.actor() != p) continue;
          out << ' ' << to_string(m.procs, ev.action) << (ev.match < 0 ? "*" : "");
        }
        out << '\n';
      }
      out << "  (* unmatched)\n";
    }
  }
  return res.synchronizable ? kHolds : kFails;
}

std::vector<int> parse_goal(const System& sys, const std::vector<std::string>& items) {
  std::vector<int> goal(sys.num_procs(), -1);
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidInput, "goal '" + item + "' is not of the form proc=state");
    }
    std::string proc = item.substr(0, eq);
    std::string state = item.substr(eq + 1);
    ProcId p = sys.proc_index(proc);
    if (p < 0) throw Error(ErrorCode::UnknownState, "unknown process '" + proc + "'");
    int s = sys.automata[p].state_index(state);
    if (s < 0) {
      throw Error(ErrorCode::UnknownState, "process " + proc + " has no state '" + state + "'");
    }
    goal[p] = s;
  }
  for (ProcId p = 0; p < sys.num_procs(); ++p) {
    if (goal[p] < 0) throw Error(ErrorCode::UnknownState, "goal misses process " + sys.procs[p]);
  }
  return goal;
}

int reach(const Options& o, std::ostream& out) {
  std::string text;
  System sys = load_system(o, &text);
  std::vector<int> goal = parse_goal(sys, o.goal);
  ExploreOptions opts;
  opts.state_limit = o.limit_states;
  ReachResult res = decide_reachability(sys, o.k, goal, opts);
  if (o.json_output) {
    json j;
    j["command"] = "reach";
    j["inputDigest"] = digest(text);
    j["k"] = o.k;
    j["reachable"] = res.reachable;
    json witness = json::array();
    for (const auto& x : res.witness) witness.push_back(to_json(sys.procs, x));
    j["witness"] = res.reachable ? witness : json(nullptr);
    j["statesExplored"] = res.states_explored;
    out << j.dump(2) << '\n';
  } else {
    out << (res.reachable ? "reachable" : "unreachable") << " (" << res.states_explored
        << " abstract states)\n";
    for (const auto& x : res.witness) {
      out << " ";
      for (const auto& a : x.actions) out << ' ' << to_string(sys.procs, a);
      out << '\n';
    }
  }
  return res.reachable ? kHolds : kFails;
}

int explore_cmd(const Options& o, std::ostream& out) {
  std::string text;
  System sys = load_system(o, &text);
  ExploreOptions opts;
  opts.state_limit = o.limit_states;
  Lts lts = explore(sys, o.k, opts);
  std::string dump = to_json(sys, lts).dump(2) + "\n";
  if (o.out.empty()) {
    out << dump;
    return kHolds;
  }
  write_file(o.out, dump);
  if (o.json_output) {
    json j{{"command", "explore"},
           {"inputDigest", digest(text)},
           {"k", o.k},
           {"states", lts.states.size()},
           {"transitions", lts.transitions.size()},
           {"violations", lts.violations.size()}};
    out << j.dump(2) << '\n';
  } else {
    out << lts.states.size() << " states, " << lts.transitions.size() << " transitions, "
        << lts.violations.size() << " violations\n";
  }
  return kHolds;
}

// Counts given on the command line override the defaults, or zero with --none.
struct SuiteOptions {
  std::uint64_t seed = 1;
  std::optional<int> graph_mscs, reach_systems, deviated_runs, p2p_runs, cross_mode_systems,
      direct_systems;
  bool none = false;
  int drop_rule = 0;
};

int oracle_suite(const SuiteOptions& s, const Options& o, std::ostream& out) {
  testkit::OracleConfig cfg = s.none ? testkit::OracleConfig::none() : testkit::OracleConfig{};
  cfg.seed = s.seed;
  auto apply = [](const std::optional<int>& v, int& field) {
    if (v) field = *v;
  };
  apply(s.graph_mscs, cfg.graph_mscs);
  apply(s.reach_systems, cfg.reach_systems);
  apply(s.deviated_runs, cfg.deviated_runs);
  apply(s.p2p_runs, cfg.p2p_runs);
  apply(s.cross_mode_systems, cfg.cross_mode_systems);
  apply(s.direct_systems, cfg.direct_systems);
  switch (s.drop_rule) {
    case 2: cfg.rules.rule2 = false; break;
    case 3: cfg.rules.rule3 = false; break;
    case 4: cfg.rules.rule4 = false; break;
    case 5: cfg.rules.rule5 = false; break;
    default: break;
  }
  testkit::OracleReport report = testkit::run_oracle_suite(cfg);
  json j = json::array();
  for (const auto& p : report.properties) {
    if (o.json_output) {
      j.push_back({{"property", p.name},
                   {"cases", p.cases},
                   {"failures", p.failures},
                   {"detail", p.detail},
                   {"reproducer", p.reproducer.empty() ? json(nullptr) : json::parse(p.reproducer)}});
    } else {
      out << p.name << ": " << (p.passed() ? "PASS" : "FAIL") << " (" << p.cases << " cases)";
      if (!p.passed()) out << " " << p.detail << "\n  reproducer: " << p.reproducer;
      out << '\n';
    }
    if (!p.passed() && !o.out.empty()) write_file(o.out, p.reproducer + "\n");
  }
  if (o.json_output) out << j.dump(2) << '\n';
  return report.passed() ? kHolds : kFails;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-synchronizability of communicating automata", "ksync"};
  app.require_subcommand(1);
  Options o;
  SuiteOptions suite;

  auto common = [&](CLI::App* sub, bool needs_k) {
    sub->add_option("file", o.file, "input JSON file")->required();
    auto* k = sub->add_option("--k", o.k, "exchange bound")->check(CLI::PositiveNumber);
    if (needs_k) k->required();
    sub->add_option("--comm", o.comm, "mailbox or p2p, unless the file says otherwise")
        ->check(CLI::IsMember({"mailbox", "p2p"}));
    sub->add_flag("--json", o.json_output, "machine-readable output");
  };

  auto* analyze = app.add_subcommand("analyze-msc", "causal delivery and k-synchronicity of an MSC");
  common(analyze, true);
  analyze->add_option("--dot", o.dot, "write the extended conflict graph");

  auto* dec = app.add_subcommand("decide", "is the system k-synchronizable");
  common(dec, true);
  dec->add_option("--out", o.out, "write the counterexample MSC");
  dec->add_option("--dot", o.dot, "write the counterexample's conflict graph");
  dec->add_option("--limit-states", o.limit_states, "product state cap");

  auto* rch = app.add_subcommand("reach", "is a global control state reachable");
  common(rch, true);
  rch->add_option("--goal", o.goal, "proc=state, one per process")->required();
  rch->add_option("--limit-states", o.limit_states, "abstract state cap");

  auto* exp = app.add_subcommand("explore", "dump the k-exchange transition system");
  common(exp, true);
  exp->add_option("--out", o.out, "output file (default: stdout)");
  exp->add_option("--limit-states", o.limit_states, "abstract state cap");

  auto* ors = app.add_subcommand("oracle-suite", "check the implementation against brute force");
  ors->add_option("--seed", suite.seed);
  ors->add_option("--graph-mscs", suite.graph_mscs);
  ors->add_option("--reach-systems", suite.reach_systems);
  ors->add_option("--deviated-runs", suite.deviated_runs);
  ors->add_option("--p2p-runs", suite.p2p_runs);
  ors->add_option("--cross-mode-systems", suite.cross_mode_systems);
  ors->add_option("--direct-systems", suite.direct_systems);
  ors->add_flag("--none", suite.none, "zero every case count not given explicitly");
  ors->add_option("--drop-rule", suite.drop_rule, "disable one closure rule (mutation check)")
      ->check(CLI::Range(2, 5));
  ors->add_option("--out", o.out, "write the first reproducer");
  ors->add_flag("--json", o.json_output, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kHolds;
  } catch (const CLI::ParseError& e) {
    err << "ksync: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (*analyze) return analyze_msc(o, out);
    if (*dec) return decide(o, out);
    if (*rch) return reach(o, out);
    if (*exp) return explore_cmd(o, out);
    return oracle_suite(suite, o, out);
  } catch (const Error& e) {
    err << "ksync: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::ExplosionLimit ? kResourceLimit : kInputError;
  } catch (const std::exception& e) {
    err << "ksync: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace ksync::cli
