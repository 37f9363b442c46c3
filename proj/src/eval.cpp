/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include "ananke/eval.hpp"

#include <cstdio>
#include <sstream>

namespace ananke {

using nlohmann::json;

MetricsResult metrics_from_confusion(const Confusion& c) {
  MetricsResult m;
  m.confusion = c;
  if (c.tp + c.fn > 0) m.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (c.fp + c.tn > 0) m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  if (m.tpr && m.fpr) m.balanced_accuracy = (*m.tpr + (1.0 - *m.fpr)) / 2.0;
  return m;
}

MetricsResult score(const std::set<std::string>& detected, const MaliciousEntitySet& ground_truth,
                    const std::set<std::string>& universe) {
  std::string missing;
  for (const auto* keys : {&ground_truth.keys, &detected}) {
    for (const auto& k : *keys) {
      if (!universe.count(k)) missing += (missing.empty() ? "" : ", ") + k;
    }
  }
  if (!missing.empty()) throw Error(ErrorCode::kOutOfUniverse, missing);

  Confusion c;
  for (const auto& k : universe) {
    const bool mal = ground_truth.contains(k);
    const bool hit = detected.count(k) > 0;
    if (mal && hit) ++c.tp;
    else if (mal) ++c.fn;
    else if (hit) ++c.fp;
    else ++c.tn;
  }
  return metrics_from_confusion(c);
}

MetricsResult score_event_level(const std::set<std::string>& detected,
                                const MaliciousEntitySet& ground_truth,
                                const std::vector<std::pair<std::string, std::string>>& edges) {
  Confusion c;
  for (const auto& [s, o] : edges) {
    const bool mal = ground_truth.contains(s) || ground_truth.contains(o);
    const bool hit = detected.count(s) > 0 || detected.count(o) > 0;
    if (mal && hit) ++c.tp;
    else if (mal) ++c.fn;
    else if (hit) ++c.fp;
    else ++c.tn;
  }
  return metrics_from_confusion(c);
}

MetricsResult score_investigation(const InvestigationResult& result, const MaliciousEntitySet& ground_truth,
                                  bool event_level) {
  MetricsResult m;
  if (event_level) {
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [s, o] : result.universe_edges) {
      edges.emplace_back(result.universe_nodes.at(s), result.universe_nodes.at(o));
    }
    m = score_event_level(result.detected, ground_truth, edges);
  } else {
    m = score(result.detected, ground_truth, {result.universe_nodes.begin(), result.universe_nodes.end()});
  }
  m.token_usage = result.usage;
  return m;
}

MetricsResult aggregate(const std::vector<MetricsResult>& results) {
  MetricsResult out;
  double sums[3] = {0, 0, 0};
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& r : results) {
    out.confusion.tp += r.confusion.tp;
    out.confusion.fp += r.confusion.fp;
    out.confusion.tn += r.confusion.tn;
    out.confusion.fn += r.confusion.fn;
    out.token_usage += r.token_usage;
    const std::optional<double>* ratios[3] = {&r.tpr, &r.fpr, &r.balanced_accuracy};
    for (int i = 0; i < 3; ++i) {
      if (*ratios[i]) {
        sums[i] += **ratios[i];
        ++counts[i];
      }
    }
  }
  std::optional<double>* targets[3] = {&out.tpr, &out.fpr, &out.balanced_accuracy};
  for (int i = 0; i < 3; ++i) {
    if (counts[i] > 0) *targets[i] = sums[i] / static_cast<double>(counts[i]);
  }
  return out;
}

json to_json(const MetricsResult& m) {
  auto ratio = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}},
          {"tpr", ratio(m.tpr)},
          {"fpr", ratio(m.fpr)},
          {"balanced_accuracy", ratio(m.balanced_accuracy)},
          {"undefined", {{"tpr", !m.tpr}, {"fpr", !m.fpr}, {"balanced_accuracy", !m.balanced_accuracy}}},
          {"token_usage", to_json(m.token_usage)}};
}

std::string render_table(const std::vector<std::pair<std::string, MetricsResult>>& rows) {
  auto pct = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", *v * 100.0);
    return std::string(buf);
  };
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %8s %8s %8s %8s %12s\n", "Scenario", "TP", "FP", "TN",
                "FN", "TPR", "FPR", "BA", "Tokens");
  out << line;
  for (const auto& [name, m] : rows) {
    std::snprintf(line, sizeof line, "%-24s %8zu %8zu %8zu %8zu %8s %8s %8s %12lld\n", name.c_str(), m.confusion.tp,
                  m.confusion.fp, m.confusion.tn, m.confusion.fn, pct(m.tpr).c_str(), pct(m.fpr).c_str(),
                  pct(m.balanced_accuracy).c_str(),
                  static_cast<long long>(m.token_usage.total()));
    out << line;
  }
  return out.str();
}

}  // namespace ananke
