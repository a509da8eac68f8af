#include "ksync/testkit/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ksync::testkit {

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_json_text(buf.str());
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
  }
}

Msc load_msc(const std::string& path) { return msc_from_json(read_json_file(path)); }

System load_system(const std::string& path) { return system_from_json(read_json_file(path)); }

RandomRun load_run(const std::string& path) {
  json j = read_json_file(path);
  RandomRun run;
  for (const auto& p : j.at("procs")) run.procs.push_back(p.get<std::string>());
  std::sort(run.procs.begin(), run.procs.end());
  for (const auto& x : j.at("exchanges")) run.exchanges.push_back(exchange_from_json(run.procs, x));
  auto it = std::find(run.procs.begin(), run.procs.end(), kPiName);
  if (it != run.procs.end()) run.pi = static_cast<ProcId>(it - run.procs.begin());
  return run;
}

json load_expect(const std::string& path) {
  json j = read_json_file(path);
  auto it = j.find("expect");
  return it == j.end() ? json(nullptr) : *it;
}

int vertex_by_msg(const ConflictGraph& cg, const std::string& msg) {
  for (std::size_t v = 0; v < cg.vertices.size(); ++v) {
    if (cg.vertices[v].kind == VertexKind::Exchange && cg.vertices[v].msg == msg) {
      return static_cast<int>(v);
    }
  }
  return -1;
}

}  // namespace ksync::testkit
