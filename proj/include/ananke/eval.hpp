/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ananke/investigator.hpp"
#include "ananke/llm.hpp"
#include "ananke/model.hpp"

namespace ananke {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Ratios are empty when their denominator is zero.
struct MetricsResult {
  Confusion confusion;
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> balanced_accuracy;
  TokenUsage token_usage;

  friend bool operator==(const MetricsResult&, const MetricsResult&) = default;
};

MetricsResult metrics_from_confusion(const Confusion& c);

/// Entity-level scoring. Throws kOutOfUniverse when a ground-truth or
/// detected key is not in the universe.
MetricsResult score(const std::set<std::string>& detected, const MaliciousEntitySet& ground_truth,
                    const std::set<std::string>& universe);

/// Event-level scoring over edges given as (subject, object) keys: an edge
/// is detected if either endpoint is detected and malicious if either
/// endpoint is in the ground truth.
MetricsResult score_event_level(const std::set<std::string>& detected,
                                const MaliciousEntitySet& ground_truth,
                                const std::vector<std::pair<std::string, std::string>>& edges);

// Scores an investigation file against ground truth; token usage passes through.
MetricsResult score_investigation(const InvestigationResult& result, const MaliciousEntitySet& ground_truth,
                                  bool event_level = false);

/// Mean of each ratio over the results where it is defined; tokens summed.
MetricsResult aggregate(const std::vector<MetricsResult>& results);

nlohmann::json to_json(const MetricsResult& m);
std::string render_table(const std::vector<std::pair<std::string, MetricsResult>>& rows);

}  // namespace ananke
