#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ksync/exchange.hpp"
#include "ksync/membership.hpp"
#include "ksync/msc.hpp"

namespace ksync {

using json = nlohmann::ordered_json;

// Parsers throw Error(InvalidInput) with the line (syntax) or field path (schema).
json parse_json_text(std::string_view text);

// A missing "comm" field means default_comm.
System system_from_json(const json& j, Comm default_comm = Comm::Mailbox);
json to_json(const System& system);
System parse_system(std::string_view text, Comm default_comm = Comm::Mailbox);

Msc msc_from_json(const json& j);
json to_json(const Msc& msc);
Msc parse_msc(std::string_view text);

json to_json(const std::vector<std::string>& procs, const KExchange& e);
KExchange exchange_from_json(const System& system, const json& j);
KExchange exchange_from_json(const std::vector<std::string>& procs, const json& j);

json to_json(const System& system, const Lts& lts);
Lts lts_from_json(const System& system, const json& j);

struct Verdict {
  std::string command;
  std::string input_digest;
  int k = 1;
  bool synchronizable = true;
  std::optional<Msc> counterexample;
  std::size_t states_explored = 0;

  bool operator==(const Verdict&) const = default;
};

json to_json(const Verdict& v);
Verdict verdict_from_json(const json& j);

// FNV-1a, hex encoded.
std::string digest(std::string_view bytes);

}  // namespace ksync
