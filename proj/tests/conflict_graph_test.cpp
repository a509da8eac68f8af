#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <tuple>

#include "fixture_path.hpp"
#include "ksync/conflict_graph.hpp"
#include "ksync/testkit/fixtures.hpp"
#include "ksync/testkit/generators.hpp"

using namespace ksync;

namespace {

using NamedEdge = std::tuple<std::string, std::string, std::string>;

std::set<NamedEdge> base_edges(const ConflictGraph& cg) {
  std::set<NamedEdge> out;
  for (int u = 0; u < cg.size(); ++u) {
    for (int v = 0; v < cg.size(); ++v) {
      for (int l = 0; l < 4; ++l) {
        if (cg.has_base(u, Label(l), v)) {
          out.insert({cg.vertices[u].msg, label_name(Label(l)), cg.vertices[v].msg});
        }
      }
    }
  }
  return out;
}

std::set<NamedEdge> expected_edges(const json& expect) {
  std::set<NamedEdge> out;
  for (const auto& e : expect.at("edges")) {
    out.insert({e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<std::string>()});
  }
  return out;
}

std::vector<std::string> names(const ConflictGraph& cg, const std::vector<int>& vs) {
  std::vector<std::string> out;
  for (int v : vs) out.push_back(cg.vertices[v].msg);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

struct RunGraph {
  testkit::RandomRun run;
  json expect;
  ConflictGraph cg;
  DeviationVertices d;
};

RunGraph load_run_graph(const std::string& name) {
  std::string path = fixture("runs/" + name + ".json");
  RunGraph g{testkit::load_run(path), testkit::load_expect(path), {}, {}};
  g.cg = extend(build(g.run.flat()));
  g.d = find_deviation_vertices(g.cg, g.run.pi);
  return g;
}

int fixture_k(const std::string& name) {
  return testkit::read_json_file(fixture("runs/" + name + ".json")).at("k").get<int>();
}

}  // namespace

TEST(ConflictGraph, ThreeMessageEdges) {
  std::string path = fixture("msc/fig1c.json");
  ConflictGraph cg = build(testkit::load_msc(path));
  EXPECT_EQ(base_edges(cg), expected_edges(testkit::load_expect(path)));
}

TEST(ConflictGraph, FiveCycleEdgesAndScc) {
  std::string path = fixture("msc/fig2c.json");
  Msc msc = testkit::load_msc(path);
  ConflictGraph cg = build(msc);
  EXPECT_EQ(base_edges(cg), expected_edges(testkit::load_expect(path)));
  SccReport scc = scc_report(cg);
  EXPECT_EQ(scc.max_size, 5);
  EXPECT_FALSE(scc.rs_on_cycle);
  EXPECT_TRUE(k_synchronous_by_graph(msc, 5).synchronous);
  EXPECT_FALSE(k_synchronous_by_graph(msc, 4).synchronous);
}

TEST(ConflictGraph, CrossingMessagesPutRsOnCycle) {
  Msc msc = testkit::load_msc(fixture("msc/fig2a.json"));
  for (int k = 1; k <= 5; ++k) {
    SyncReport rep = k_synchronous_by_graph(msc, k);
    EXPECT_FALSE(rep.synchronous);
    EXPECT_TRUE(rep.scc.rs_on_cycle);
  }
}

TEST(ConflictGraph, SingletonComponentsAreOneSynchronous) {
  Msc msc = testkit::load_msc(fixture("msc/fig2b.json"));
  SyncReport rep = k_synchronous_by_graph(msc, 1);
  EXPECT_TRUE(rep.synchronous);
  EXPECT_EQ(rep.scc.max_size, 1);
}

TEST(ConflictGraph, ConcatenatedExchangesHaveSsSelfLoops) {
  std::string path = fixture("msc/fig6.json");
  Msc msc = testkit::load_msc(path);
  ConflictGraph cg = extend(build(msc));
  EXPECT_FALSE(causal_delivery_by_graph(cg));
  for (const auto& m : testkit::load_expect(path).at("ssCycle")) {
    int v = testkit::vertex_by_msg(cg, m.get<std::string>());
    ASSERT_GE(v, 0);
    EXPECT_TRUE(cg.has_ext(v, SS, v)) << m;
  }
  try {
    k_synchronous_by_graph(msc, 2);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::NotCausalDelivery);
  }
}

TEST(ConflictGraph, CausalDeliveryFixtures) {
  for (const char* name : {"fig1a", "fig1b", "fig6", "causal_counter_b"}) {
    EXPECT_FALSE(causal_delivery_by_graph(testkit::load_msc(fixture(std::string("msc/") + name + ".json"))))
        << name;
  }
  for (const char* name : {"fig1c", "fig2a", "fig2b", "fig2c", "empty"}) {
    EXPECT_TRUE(causal_delivery_by_graph(testkit::load_msc(fixture(std::string("msc/") + name + ".json"))))
        << name;
  }
}

TEST(ConflictGraph, ExtensionIsIdempotentAndContainsBase) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    ConflictGraph once = extend(build(testkit::gen_msc(seed, 6, 4)));
    ConflictGraph twice = extend(once);
    ASSERT_EQ(once.ext, twice.ext) << "seed " << seed;
    for (int l = 0; l < 4; ++l) {
      for (int u = 0; u < once.size(); ++u) {
        for (int v = 0; v < once.size(); ++v) {
          if (once.has_base(u, Label(l), v)) {
            ASSERT_TRUE(once.has_ext(u, Label(l), v));
          }
        }
      }
    }
  }
}

TEST(ConflictGraph, DroppingRuleFourMissesCausalViolation) {
  Msc msc = testkit::load_msc(fixture("msc/fig1a.json"));
  RuleSet no4;
  no4.rule4 = false;
  EXPECT_FALSE(causal_delivery_by_graph(msc));
  EXPECT_TRUE(causal_delivery_by_graph(msc, no4));
}

TEST(ConflictGraph, DotMarksExtendedEdges) {
  Msc msc = testkit::load_msc(fixture("msc/fig1c.json"));
  std::string dot = to_dot(extend(build(msc)), msc.procs);
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("SS"), std::string::npos);
  EXPECT_NE(dot.find("dashed"), std::string::npos);
}

TEST(DeviatedRun, InfeasibleFixtures) {
  for (const char* name : {"example6", "appendix_a"}) {
    RunGraph g = load_run_graph(name);
    EXPECT_FALSE(feasibility_by_graph(g.cg, g.d)) << name;
  }
}

TEST(DeviatedRun, FeasibleAndBadSingleExchangeRun) {
  RunGraph g = load_run_graph("example5");
  EXPECT_TRUE(feasibility_by_graph(g.cg, g.d));
  EXPECT_TRUE(badness_by_graph(g.cg, g.d, fixture_k("example5")).bad);
}

TEST(DeviatedRun, SuccessorAndPredecessorSets) {
  RunGraph g = load_run_graph("example7");
  EXPECT_TRUE(feasibility_by_graph(g.cg, g.d));
  BadnessReport rep = badness_by_graph(g.cg, g.d, fixture_k("example7"));
  EXPECT_TRUE(rep.bad);
  EXPECT_EQ(names(g.cg, rep.succ), sorted(g.expect.at("succ").get<std::vector<std::string>>()));
  EXPECT_EQ(names(g.cg, rep.pred), sorted(g.expect.at("pred").get<std::vector<std::string>>()));
}

TEST(DeviatedRun, LongPathWithoutRsIsNotBad) {
  RunGraph g = load_run_graph("appendix_b");
  int k = fixture_k("appendix_b");
  EXPECT_TRUE(feasibility_by_graph(g.cg, g.d));
  BadnessReport rep = badness_by_graph(g.cg, g.d, k);
  EXPECT_FALSE(rep.bad);
  EXPECT_FALSE(rep.rs_path);
  EXPECT_EQ(rep.between, g.expect.at("between").get<int>());
}

TEST(DeviatedRun, RsPathIsBad) {
  RunGraph g = load_run_graph("appendix_c");
  BadnessReport rep = badness_by_graph(g.cg, g.d, fixture_k("appendix_c"));
  EXPECT_TRUE(feasibility_by_graph(g.cg, g.d));
  EXPECT_TRUE(rep.bad);
  EXPECT_TRUE(rep.rs_path);
}

TEST(DeviatedRun, MissingPiVertices) {
  testkit::RandomRun run = testkit::gen_run(3, 3, 2, 3, Comm::Mailbox);
  ConflictGraph cg = build(run.flat());
  try {
    find_deviation_vertices(cg, 7);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::MissingDeviationVertices);
  }
}
