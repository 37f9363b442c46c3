/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/provenance.hpp"

#include <algorithm>

namespace ananke {

std::string_view to_string(InducedEdges mode) {
  return mode == InducedEdges::kFull ? "full" : "star";
}

InducedEdges parse_induced_edges(std::string_view text) {
  const std::string lower = to_lower(trim(text));
  if (lower == "full") return InducedEdges::kFull;
  if (lower == "star") return InducedEdges::kStar;
  throw Error(ErrorCode::kConfigInvalid, "induced_edges must be full|star, got '" + lower + "'");
}

const std::vector<std::size_t>& ProvenanceGraph::adjacency(const std::string& key) const {
  auto it = adjacency_.find(key);
  if (it == adjacency_.end()) throw Error(ErrorCode::kUnknownNode, key);
  return it->second;
}

nlohmann::json ProvenanceGraph::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [key, entity] : nodes_) {
    nlohmann::json n = {{"key", key},
                        {"kind", std::string(to_string(entity.kind))},
                        {"name", entity.raw_name}};
    if (entity.pid) n["pid"] = *entity.pid;
    nodes.push_back(std::move(n));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    edges.push_back({{"s", edge_subject_[i]},
                     {"a", edges_[i].action},
                     {"o", edge_object_[i]},
                     {"ts", edges_[i].timestamp},
                     {"seq", edges_[i].seq_no}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

ProvenanceGraph build_graph(const LogSet& log_set, const GraphOptions& options) {
  ProvenanceGraph g;
  g.edges_ = log_set.events;
  // Sorting is a precondition; enforce it so adjacency order holds regardless.
  if (!std::is_sorted(g.edges_.begin(), g.edges_.end(), event_time_less)) sort_events(g.edges_);

  g.edge_subject_.reserve(g.edges_.size());
  g.edge_object_.reserve(g.edges_.size());
  auto node_key = [&](const Event& e, const Entity& entity) {
    return options.qualify_by_host ? host_qualified_key(e.host_id, entity.canonical_key)
                                   : entity.canonical_key;
  };
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    const Event& e = g.edges_[i];
    std::string s = node_key(e, e.subject);
    std::string o = node_key(e, e.object);
    g.nodes_.try_emplace(s, e.subject);
    g.nodes_.try_emplace(o, e.object);
    g.adjacency_[s].push_back(i);
    if (o != s) g.adjacency_[o].push_back(i);  // self-loops listed once
    g.edge_subject_.push_back(std::move(s));
    g.edge_object_.push_back(std::move(o));
  }
  return g;
}

std::set<std::string> neighbors(const ProvenanceGraph& graph, const std::string& key) {
  const auto& adj = graph.adjacency(key);
  std::set<std::string> out{key};
  for (std::size_t edge : adj) {
    out.insert(graph.subject_key(edge));
    out.insert(graph.object_key(edge));
  }
  return out;
}

AdjacencySubgraph adjacency_subgraph(const ProvenanceGraph& graph, const std::string& key,
                                     InducedEdges mode) {
  AdjacencySubgraph sub;
  sub.center = key;
  sub.member_keys = neighbors(graph, key);
  if (mode == InducedEdges::kStar) {
    sub.edge_indices = graph.adjacency(key);
    return sub;
  }
  for (const auto& member : sub.member_keys) {
    for (std::size_t edge : graph.adjacency(member)) {
      if (sub.member_keys.count(graph.subject_key(edge)) &&
          sub.member_keys.count(graph.object_key(edge))) {
        sub.edge_indices.push_back(edge);
      }
    }
  }
  std::sort(sub.edge_indices.begin(), sub.edge_indices.end());
  sub.edge_indices.erase(std::unique(sub.edge_indices.begin(), sub.edge_indices.end()),
                         sub.edge_indices.end());
  return sub;
}

std::vector<ContextSequence> order_and_partition(const AdjacencySubgraph& sub,
                                                 const ProvenanceGraph& graph, std::size_t n_max) {
  if (n_max == 0) throw Error(ErrorCode::kConfigInvalid, "n_max must be >= 1");
  std::vector<std::size_t> ordered = sub.edge_indices;
  std::sort(ordered.begin(), ordered.end(), [&](std::size_t a, std::size_t b) {
    return event_time_less(graph.edges()[a], graph.edges()[b]);
  });

  std::vector<ContextSequence> chunks;
  for (std::size_t start = 0; start < ordered.size(); start += n_max) {
    ContextSequence seq;
    seq.origin_node = sub.center;
    seq.chunk_index = chunks.size();
    const std::size_t end = std::min(ordered.size(), start + n_max);
    for (std::size_t i = start; i < end; ++i) seq.events.push_back(graph.edges()[ordered[i]]);
    chunks.push_back(std::move(seq));
  }
  return chunks;
}

}  // namespace ananke
