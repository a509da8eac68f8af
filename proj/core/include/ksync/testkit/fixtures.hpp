#pragma once

#include <string>

#include "ksync/json_io.hpp"
#include "ksync/testkit/generators.hpp"

namespace ksync::testkit {

// Reads and parses a JSON file; throws Error(InvalidInput) naming the path.
json read_json_file(const std::string& path);

Msc load_msc(const std::string& path);
System load_system(const std::string& path);

// {"procs":[...], "k":int, "exchanges":[[action...]...]}; pi is set when "pi" is a process.
RandomRun load_run(const std::string& path);

// The "expect" object of a fixture, or null.
json load_expect(const std::string& path);

// Vertex of the run's conflict graph whose send carries `msg`, or -1.
int vertex_by_msg(const ConflictGraph& cg, const std::string& msg);

}  // namespace ksync::testkit
