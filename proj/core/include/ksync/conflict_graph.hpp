#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ksync/msc.hpp"

namespace ksync {

class BitMatrix {
 public:
  BitMatrix() = default;
  explicit BitMatrix(int n) : n_(n), words_((n + 63) / 64), data_(std::size_t(n) * words_, 0) {}

  int size() const { return n_; }
  bool get(int i, int j) const { return (row(i)[j >> 6] >> (j & 63)) & 1U; }
  void set(int i, int j) { row(i)[j >> 6] |= std::uint64_t{1} << (j & 63); }
  // Returns true when row i gained a bit.
  bool or_row(int i, const BitMatrix& src, int j);
  bool any_in_row(int i) const;

  bool operator==(const BitMatrix&) const = default;

 private:
  std::uint64_t* row(int i) { return data_.data() + std::size_t(i) * words_; }
  const std::uint64_t* row(int i) const { return data_.data() + std::size_t(i) * words_; }

  int n_ = 0;
  int words_ = 0;
  std::vector<std::uint64_t> data_;
};

enum class Side : std::uint8_t { S = 0, R = 1 };

// Edge labels XY, indexed as 2*X + Y.
enum Label : int { SS = 0, SR = 1, RS = 2, RR = 3 };
inline constexpr Label label(Side x, Side y) { return Label(2 * int(x) + int(y)); }
const char* label_name(Label l);

enum class VertexKind : std::uint8_t { Exchange, Summary, PiSummary };

struct Vertex {
  VertexKind kind = VertexKind::Exchange;
  ProcId sender = -1;    // for Summary: the process p of lambda_p
  ProcId receiver = -1;
  bool matched = false;
  std::string msg;
  int send_event = -1;
  int recv_event = -1;

  bool has(Side s) const { return kind == VertexKind::Exchange && (s == Side::S || matched); }
  ProcId actor(Side s) const { return s == Side::S ? sender : receiver; }
  bool operator==(const Vertex&) const = default;
};

// Which deduction rules the closure applies. Dropping one exists for mutation tests.
struct RuleSet {
  bool rule2 = true;
  bool rule3 = true;
  bool rule4 = true;
  bool rule5 = true;
};

struct ConflictGraph {
  std::vector<Vertex> vertices;
  std::array<BitMatrix, 4> base;
  std::array<BitMatrix, 4> ext;
  bool extended = false;

  int size() const { return static_cast<int>(vertices.size()); }
  bool has_base(int u, Label l, int v) const { return base[l].get(u, v); }
  bool has_ext(int u, Label l, int v) const { return ext[l].get(u, v); }
  void add_base(int u, Label l, int v) { base[l].set(u, v); }

  bool operator==(const ConflictGraph&) const = default;
};

// Vertices are the message exchanges in order of their send events.
ConflictGraph build(const Execution& e);
ConflictGraph build(const Msc& msc);
// Same vertices plus extra empty slots, for summary nodes.
ConflictGraph build_with_capacity(const Execution& e, int extra_vertices);

ConflictGraph extend(const ConflictGraph& cg, RuleSet rules = {});

struct SccReport {
  std::vector<std::vector<int>> components;
  int max_size = 0;
  bool rs_on_cycle = false;
};

SccReport scc_report(const ConflictGraph& cg);

bool causal_delivery_by_graph(const ConflictGraph& cg);
bool causal_delivery_by_graph(const Msc& msc, RuleSet rules = {});

struct SyncReport {
  bool synchronous = false;
  SccReport scc;
};

// Throws Error(NotCausalDelivery) when the extended graph has an SS self-loop.
SyncReport k_synchronous_by_graph(const Msc& msc, int k);

struct DeviationVertices {
  int vstart = -1;  // the exchange received by pi
  int vstop = -1;   // the exchange sent by pi
};

// Throws Error(MissingDeviationVertices).
DeviationVertices find_deviation_vertices(const ConflictGraph& cg, ProcId pi);

bool feasibility_by_graph(const ConflictGraph& cg, DeviationVertices d);

struct BadnessReport {
  bool bad = false;
  bool rs_path = false;
  std::vector<int> succ;  // succ*(vstart), including vstart
  std::vector<int> pred;  // pred*(vstop), including vstop
  int between = 0;        // |succ* intersected with pred*|
};

BadnessReport badness_by_graph(const ConflictGraph& cg, DeviationVertices d, int k);

// Base edges solid, extended-only edges dashed.
std::string to_dot(const ConflictGraph& cg, const std::vector<std::string>& procs);

}  // namespace ksync
