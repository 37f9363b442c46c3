/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include <gtest/gtest.h>

#include "ananke/provenance.hpp"
#include "oracles.hpp"

namespace ananke {
namespace {

using testing::make_event;
using testing::other;

std::string key(const std::string& name) { return "other:" + name; }

// A->B, A->C, B->C, B->D, D->E
LogSet small_log() {
  return testing::log_of({make_event(other("A"), "write", other("B"), 1),
                          make_event(other("A"), "write", other("C"), 2),
                          make_event(other("B"), "read", other("C"), 3),
                          make_event(other("B"), "read", other("D"), 4),
                          make_event(other("D"), "connect", other("E"), 5)});
}

TEST(ProvenanceTest, NodesAndEdges) {
  const ProvenanceGraph g = build_graph(small_log());
  EXPECT_EQ(g.nodes().size(), 5u);
  EXPECT_EQ(g.edges().size(), 5u);
  EXPECT_EQ(g.adjacency(key("B")).size(), 3u);
  EXPECT_EQ(g.to_json()["edges"].size(), 5u);
}

TEST(ProvenanceTest, NeighborsIgnoreDirection) {
  const ProvenanceGraph g = build_graph(small_log());
  EXPECT_EQ(neighbors(g, key("A")), (std::set<std::string>{key("A"), key("B"), key("C")}));
  EXPECT_EQ(neighbors(g, key("B")), (std::set<std::string>{key("A"), key("B"), key("C"), key("D")}));
  EXPECT_EQ(neighbors(g, key("E")), (std::set<std::string>{key("D"), key("E")}));
}

TEST(ProvenanceTest, UnknownNodeThrows) {
  const ProvenanceGraph g = build_graph(small_log());
  try {
    neighbors(g, key("X"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownNode);
  }
}

TEST(ProvenanceTest, SelfLoopNeighborhoodIsItself) {
  const ProvenanceGraph g = build_graph(testing::log_of({make_event(other("X"), "touch", other("X"), 1)}));
  EXPECT_EQ(neighbors(g, key("X")), std::set<std::string>{key("X")});
  EXPECT_EQ(adjacency_subgraph(g, key("X")).edge_indices, std::vector<std::size_t>{0});
}

TEST(ProvenanceTest, InducedEdgesIncludeEdgesBetweenNeighbors) {
  const ProvenanceGraph g = build_graph(small_log());
  const AdjacencySubgraph full = adjacency_subgraph(g, key("A"), InducedEdges::kFull);
  EXPECT_EQ(full.edge_indices, (std::vector<std::size_t>{0, 1, 2}));
  const AdjacencySubgraph star = adjacency_subgraph(g, key("A"), InducedEdges::kStar);
  EXPECT_EQ(star.edge_indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(star.member_keys, full.member_keys);
}

TEST(ProvenanceTest, HostQualifiedKeysKeepHostsApart) {
  LogSet set = testing::log_of({make_event(other("A"), "w", other("B"), 1, 1, "h1"),
                                make_event(other("A"), "w", other("B"), 2, 2, "h2")});
  EXPECT_EQ(build_graph(set).nodes().size(), 2u);
  const ProvenanceGraph g = build_graph(set, {.qualify_by_host = true});
  EXPECT_EQ(g.nodes().size(), 4u);
  EXPECT_TRUE(g.contains("h2@other:A"));
  EXPECT_EQ(g.subject_key(1), "h2@other:A");
}

LogSet chain_of(std::size_t n) {
  std::vector<Event> events;
  for (std::size_t i = 0; i < n; ++i) {
    events.push_back(make_event(other("hub"), "write", other("leaf" + std::to_string(i)),
                                static_cast<std::int64_t>(1000 - i)));
  }
  return testing::log_of(std::move(events));
}

TEST(PartitionTest, GreedyChunkSizes) {
  const auto sizes = [](std::size_t n, std::size_t n_max) {
    const ProvenanceGraph g = build_graph(chain_of(n));
    std::vector<std::size_t> out;
    for (const auto& c : order_and_partition(adjacency_subgraph(g, key("hub")), g, n_max)) {
      out.push_back(c.events.size());
    }
    return out;
  };
  EXPECT_EQ(sizes(45, 20), (std::vector<std::size_t>{20, 20, 5}));
  EXPECT_EQ(sizes(20, 20), (std::vector<std::size_t>{20}));
  EXPECT_EQ(sizes(7, 1), std::vector<std::size_t>(7, 1));
}

TEST(PartitionTest, EmptySubgraphGivesNoChunks) {
  const ProvenanceGraph g = build_graph(chain_of(3));
  AdjacencySubgraph sub;
  sub.center = key("hub");
  EXPECT_TRUE(order_and_partition(sub, g, 20).empty());
}

TEST(PartitionTest, ZeroChunkSizeRejected) {
  const ProvenanceGraph g = build_graph(chain_of(3));
  try {
    order_and_partition(adjacency_subgraph(g, key("hub")), g, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid);
  }
}

TEST(PartitionTest, ChunksCarryOriginAndIndex) {
  const ProvenanceGraph g = build_graph(chain_of(45));
  const auto chunks = order_and_partition(adjacency_subgraph(g, key("hub")), g, 20);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EXPECT_EQ(chunks[i].chunk_index, i);
    EXPECT_EQ(chunks[i].origin_node, key("hub"));
  }
  EXPECT_EQ(chunks[0].events.front().timestamp, 956);
}

// Randomized comparison against the scan oracles.
TEST(ProvenancePropertyTest, MatchesScanOracles) {
  testing::Gen g(21);
  for (int round = 0; round < 30; ++round) {
    const LogSet set = testing::random_log_set(g, 50 + g.below(300), 5 + g.below(40));
    const ProvenanceGraph graph = build_graph(set);
    for (const auto& k : testing::distinct_keys(set)) {
      EXPECT_EQ(neighbors(graph, k), testing::scan_neighbors(set.events, k));
      EXPECT_EQ(adjacency_subgraph(graph, k).edge_indices, testing::scan_induced(set.events, k));
    }
  }
}

TEST(ProvenancePropertyTest, NeighborhoodIsSymmetric) {
  testing::Gen g(22);
  for (int round = 0; round < 20; ++round) {
    const LogSet set = testing::random_log_set(g, 100, 30);
    const ProvenanceGraph graph = build_graph(set);
    const auto keys = testing::distinct_keys(set);
    for (const auto& u : keys) {
      for (const auto& v : neighbors(graph, u)) EXPECT_TRUE(neighbors(graph, v).count(u)) << u << " " << v;
    }
  }
}

// Chunks concatenate back to the time-ordered subgraph edges, all but the
// last are full, and the graph is untouched by the queries.
TEST(ProvenancePropertyTest, PartitionReassemblesInTimeOrder) {
  testing::Gen g(23);
  for (int round = 0; round < 30; ++round) {
    const LogSet set = testing::random_log_set(g, 20 + g.below(400), 4 + g.below(20));
    const ProvenanceGraph graph = build_graph(set);
    const nlohmann::json before = graph.to_json();
    const std::size_t n_max = 1 + g.below(30);
    for (const auto& k : testing::distinct_keys(set)) {
      const auto induced = testing::scan_induced(set.events, k);
      const auto chunks = order_and_partition(adjacency_subgraph(graph, k), graph, n_max);
      std::vector<Event> joined;
      for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (i + 1 < chunks.size()) EXPECT_EQ(chunks[i].events.size(), n_max);
        EXPECT_LE(chunks[i].events.size(), n_max);
        EXPECT_FALSE(chunks[i].events.empty());
        for (const auto& e : chunks[i].events) joined.push_back(e);
      }
      ASSERT_EQ(joined.size(), induced.size());
      for (std::size_t i = 0; i < induced.size(); ++i) EXPECT_EQ(joined[i], set.events[induced[i]]);
    }
    EXPECT_EQ(graph.to_json(), before);
  }
}

}  // namespace
}  // namespace ananke
