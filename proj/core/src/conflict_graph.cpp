#include "ksync/conflict_graph.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace ksync {

bool BitMatrix::or_row(int i, const BitMatrix& src, int j) {
  std::uint64_t* dst = row(i);
  const std::uint64_t* from = src.row(j);
  bool changed = false;
  for (int w = 0; w < words_; ++w) {
    std::uint64_t merged = dst[w] | from[w];
    changed |= merged != dst[w];
    dst[w] = merged;
  }
  return changed;
}

bool BitMatrix::any_in_row(int i) const {
  const std::uint64_t* r = row(i);
  for (int w = 0; w < words_; ++w) {
    if (r[w]) return true;
  }
  return false;
}

const char* label_name(Label l) {
  switch (l) {
    case SS: return "SS";
    case SR: return "SR";
    case RS: return "RS";
    case RR: return "RR";
  }
  return "?";
}

ConflictGraph build_with_capacity(const Execution& e, int extra_vertices) {
  ConflictGraph cg;
  std::vector<int> vertex_of(e.actions.size(), -1);
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    const auto& a = e.actions[i];
    if (!a.is_send()) continue;
    Vertex v;
    v.sender = a.sender;
    v.receiver = a.receiver;
    v.msg = a.msg;
    v.send_event = static_cast<int>(i);
    v.matched = e.match[i] >= 0;
    v.recv_event = e.match[i];
    vertex_of[i] = cg.size();
    cg.vertices.push_back(v);
  }
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    if (!e.actions[i].is_send()) vertex_of[i] = vertex_of[e.match[i]];
  }
  int n = cg.size() + extra_vertices;
  for (auto& m : cg.base) m = BitMatrix(n);
  for (auto& m : cg.ext) m = BitMatrix(n);

  // Group events per process; every ordered pair on one process is an edge.
  ProcId max_proc = -1;
  for (const auto& a : e.actions) max_proc = std::max(max_proc, a.actor());
  std::vector<std::vector<int>> lanes(max_proc + 1);
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    lanes[e.actions[i].actor()].push_back(static_cast<int>(i));
  }
  for (const auto& lane : lanes) {
    for (std::size_t a = 0; a < lane.size(); ++a) {
      Side x = e.actions[lane[a]].is_send() ? Side::S : Side::R;
      for (std::size_t b = a + 1; b < lane.size(); ++b) {
        Side y = e.actions[lane[b]].is_send() ? Side::S : Side::R;
        cg.add_base(vertex_of[lane[a]], label(x, y), vertex_of[lane[b]]);
      }
    }
  }
  return cg;
}

ConflictGraph build(const Execution& e) { return build_with_capacity(e, 0); }

ConflictGraph build(const Msc& msc) { return build(as_execution(msc)); }

ConflictGraph extend(const ConflictGraph& cg, RuleSet rules) {
  int n = cg.size();
  // Node 2v+X stands for the X-action of vertex v; ext XY(u,v) is reachability.
  BitMatrix reach(2 * n);
  auto add = [&](int u, Label l, int v) { reach.set(2 * u + l / 2, 2 * v + l % 2); };
  for (int l = 0; l < 4; ++l) {
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (cg.base[l].get(u, v)) add(u, Label(l), v);
      }
    }
  }
  for (int u = 0; u < n; ++u) {
    const Vertex& vu = cg.vertices[u];
    if (vu.kind != VertexKind::Exchange) continue;
    if (rules.rule2 && vu.matched) add(u, SR, u);
    for (int v = 0; v < n; ++v) {
      const Vertex& vv = cg.vertices[v];
      if (vv.kind != VertexKind::Exchange) continue;
      if (rules.rule3 && cg.base[RR].get(u, v)) add(u, SS, v);
      if (rules.rule4 && vu.matched && !vv.matched && vu.receiver == vv.receiver) add(u, SS, v);
    }
  }
  if (rules.rule5) {
    for (int k = 0; k < 2 * n; ++k) {
      for (int i = 0; i < 2 * n; ++i) {
        if (reach.get(i, k)) reach.or_row(i, reach, k);
      }
    }
  }
  ConflictGraph out = cg;
  for (auto& m : out.ext) m = BitMatrix(n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      for (int l = 0; l < 4; ++l) {
        if (reach.get(2 * u + l / 2, 2 * v + l % 2)) out.ext[l].set(u, v);
      }
    }
  }
  out.extended = true;
  return out;
}

namespace {

std::vector<std::vector<int>> union_adjacency(const ConflictGraph& cg, bool reverse) {
  int n = cg.size();
  std::vector<std::vector<int>> adj(n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      bool edge = false;
      for (const auto& m : cg.base) edge = edge || m.get(u, v);
      if (!edge) continue;
      if (reverse) {
        adj[v].push_back(u);
      } else {
        adj[u].push_back(v);
      }
    }
  }
  return adj;
}

std::vector<bool> reachable_from(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<int> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

SccReport scc_report(const ConflictGraph& cg) {
  int n = cg.size();
  auto adj = union_adjacency(cg, false);
  std::vector<int> index(n, -1);
  std::vector<int> low(n, 0);
  std::vector<int> comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int counter = 0;
  SccReport report;

  std::function<void(int)> connect = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : adj[v]) {
      if (index[w] < 0) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> c;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = static_cast<int>(report.components.size());
        c.push_back(w);
      } while (w != v);
      std::sort(c.begin(), c.end());
      report.components.push_back(std::move(c));
    }
  };
  for (int v = 0; v < n; ++v) {
    if (index[v] < 0) connect(v);
  }
  std::sort(report.components.begin(), report.components.end());
  for (const auto& c : report.components) {
    report.max_size = std::max(report.max_size, static_cast<int>(c.size()));
  }
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (cg.base[RS].get(u, v) && comp[u] == comp[v]) report.rs_on_cycle = true;
    }
  }
  return report;
}

bool causal_delivery_by_graph(const ConflictGraph& cg) {
  for (int v = 0; v < cg.size(); ++v) {
    if (cg.ext[SS].get(v, v)) return false;
  }
  return true;
}

bool causal_delivery_by_graph(const Msc& msc, RuleSet rules) {
  return causal_delivery_by_graph(extend(build(msc), rules));
}

SyncReport k_synchronous_by_graph(const Msc& msc, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "k must be positive");
  ConflictGraph cg = extend(build(msc));
  if (!causal_delivery_by_graph(cg)) {
    throw Error(ErrorCode::NotCausalDelivery, "MSC violates causal delivery");
  }
  SyncReport r;
  r.scc = scc_report(cg);
  r.synchronous = r.scc.max_size <= k && !r.scc.rs_on_cycle;
  return r;
}

DeviationVertices find_deviation_vertices(const ConflictGraph& cg, ProcId pi) {
  DeviationVertices d;
  for (int v = 0; v < cg.size(); ++v) {
    const Vertex& x = cg.vertices[v];
    if (x.kind != VertexKind::Exchange) continue;
    if (x.receiver == pi) {
      if (d.vstart >= 0) throw Error(ErrorCode::MissingDeviationVertices, "two sends to pi");
      d.vstart = v;
    }
    if (x.sender == pi) {
      if (d.vstop >= 0) throw Error(ErrorCode::MissingDeviationVertices, "two sends by pi");
      d.vstop = v;
    }
  }
  if (d.vstart < 0 || d.vstop < 0) {
    throw Error(ErrorCode::MissingDeviationVertices, "no deviated message");
  }
  return d;
}

bool feasibility_by_graph(const ConflictGraph& cg, DeviationVertices d) {
  if (!cg.extended) throw Error(ErrorCode::InvalidInput, "graph is not extended");
  for (int v = 0; v < cg.size(); ++v) {
    if (cg.ext[SS].get(d.vstart, v) && cg.base[RR].get(v, d.vstop)) return false;
  }
  return true;
}

BadnessReport badness_by_graph(const ConflictGraph& cg, DeviationVertices d, int k) {
  auto fwd = reachable_from(union_adjacency(cg, false), d.vstart);
  auto bwd = reachable_from(union_adjacency(cg, true), d.vstop);
  BadnessReport r;
  for (int v = 0; v < cg.size(); ++v) {
    if (fwd[v]) r.succ.push_back(v);
    if (bwd[v]) r.pred.push_back(v);
    if (fwd[v] && bwd[v]) ++r.between;
  }
  for (int u = 0; u < cg.size() && !r.rs_path; ++u) {
    for (int v = 0; v < cg.size(); ++v) {
      if (u == d.vstart && v == d.vstop) continue;  // the edge through pi itself
      if (fwd[u] && bwd[v] && cg.base[RS].get(u, v)) {
        r.rs_path = true;
        break;
      }
    }
  }
  r.bad = r.rs_path || r.between >= k + 2;
  return r;
}

std::string to_dot(const ConflictGraph& cg, const std::vector<std::string>& procs) {
  auto name = [&](ProcId p) { return p >= 0 && p < int(procs.size()) ? procs[p] : "?"; };
  std::ostringstream out;
  out << "digraph conflict {\n";
  for (int v = 0; v < cg.size(); ++v) {
    const Vertex& x = cg.vertices[v];
    out << "  v" << v << " [label=\"";
    if (x.kind == VertexKind::Summary) {
      out << "lambda_" << name(x.sender);
    } else if (x.kind == VertexKind::PiSummary) {
      out << "pi_hat";
    } else {
      out << x.msg << ": " << name(x.sender) << "->" << name(x.receiver)
          << (x.matched ? "" : " (unmatched)");
    }
    out << "\"];\n";
  }
  for (int l = 0; l < 4; ++l) {
    for (int u = 0; u < cg.size(); ++u) {
      for (int v = 0; v < cg.size(); ++v) {
        bool base = cg.base[l].get(u, v);
        bool ext = cg.extended && cg.ext[l].get(u, v);
        if (!base && !ext) continue;
        out << "  v" << u << " -> v" << v << " [label=\"" << label_name(Label(l)) << "\"";
        if (!base) out << ", style=dashed";
        out << "];\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace ksync
