/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ananke/ingest.hpp"
#include "ananke/model.hpp"

namespace ananke {

enum class InducedEdges {
  kFull,  // every edge with both endpoints in the neighborhood
  kStar,  // only edges incident to the center
};

std::string_view to_string(InducedEdges mode);
InducedEdges parse_induced_edges(std::string_view text);

struct GraphOptions {
  // Prefix node keys with "<host_id>@" so identical names on different hosts stay apart.
  bool qualify_by_host = false;
};

/// Entity nodes plus one edge per event. Edge index order is the
/// (timestamp, seq_no) order of the source LogSet, so adjacency lists built in
/// edge order are already time-sorted. Read-only once built.
class ProvenanceGraph {
 public:
  ProvenanceGraph() = default;

  const std::map<std::string, Entity>& nodes() const { return nodes_; }
  const std::vector<Event>& edges() const { return edges_; }
  bool contains(const std::string& key) const { return nodes_.count(key) > 0; }

  // Node key of an edge's endpoints (host-qualified when the graph is).
  const std::string& subject_key(std::size_t edge) const { return edge_subject_[edge]; }
  const std::string& object_key(std::size_t edge) const { return edge_object_[edge]; }

  // Throws kUnknownNode.
  const std::vector<std::size_t>& adjacency(const std::string& key) const;

  nlohmann::json to_json() const;

  friend ProvenanceGraph build_graph(const LogSet& log_set, const GraphOptions& options);

 private:
  std::map<std::string, Entity> nodes_;
  std::vector<Event> edges_;
  std::vector<std::string> edge_subject_;
  std::vector<std::string> edge_object_;
  std::map<std::string, std::vector<std::size_t>> adjacency_;
};

ProvenanceGraph build_graph(const LogSet& log_set, const GraphOptions& options = {});

struct AdjacencySubgraph {
  std::string center;
  std::set<std::string> member_keys;
  std::vector<std::size_t> edge_indices;  // ascending == time order
};

struct ContextSequence {
  std::vector<Event> events;
  std::string origin_node;
  std::size_t chunk_index = 0;
};

// One-hop neighborhood including the node itself, direction-agnostic.
std::set<std::string> neighbors(const ProvenanceGraph& graph, const std::string& key);

AdjacencySubgraph adjacency_subgraph(const ProvenanceGraph& graph, const std::string& key,
                                     InducedEdges mode = InducedEdges::kFull);

// Greedy consecutive chunks of at most n_max events. n_max == 0 throws kConfigInvalid.
std::vector<ContextSequence> order_and_partition(const AdjacencySubgraph& sub,
                                                 const ProvenanceGraph& graph,
                                                 std::size_t n_max = 20);

}  // namespace ananke
