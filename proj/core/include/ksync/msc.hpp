#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ksync/model.hpp"

namespace ksync {

struct Event {
  Action action;
  int match = -1;  // index of the partner event, -1 for an unmatched send
  bool operator==(const Event&) const = default;
};

// Events are listed so that each process's events appear in process order.
// The listing itself need not be a linearization.
struct Msc {
  std::vector<std::string> procs;  // lexicographic
  std::vector<Event> events;

  int num_procs() const { return static_cast<int>(procs.size()); }
  bool operator==(const Msc&) const = default;
};

// Checks labels, process ranges and the pairing of sends with receives.
// Throws Error(InvalidInput). Acyclicity is checked separately.
void validate(const Msc& msc);
bool is_acyclic(const Msc& msc);

Msc msc_of(const std::vector<std::string>& procs, const Execution& e);
Execution as_execution(const Msc& msc);  // the listing order, with its matching

// Stable form for isomorphism checks: events renumbered in per-process order.
std::string canonical_form(const Msc& msc);
bool isomorphic(const Msc& a, const Msc& b);

// Visits the topological sorts of the causal order in a deterministic order;
// the visitor returns false to stop. Throws Error(CyclicOrder).
void for_each_linearization(const Msc& msc, const std::function<bool(const Execution&)>& visit);
std::size_t count_linearizations(const Msc& msc);

bool causal_delivery_oracle(const Msc& msc, Comm comm);
bool k_synchronous_oracle(const Msc& msc, int k, Comm comm = Comm::Mailbox);

}  // namespace ksync
