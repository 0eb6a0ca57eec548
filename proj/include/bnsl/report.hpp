#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bnsl/scoring.hpp"
#include "bnsl/search.hpp"
#include "bnsl/variable_set.hpp"

namespace bnsl {

/// Everything a learn run reports. Serialized with a fixed key order.
struct RunReport {
  std::size_t num_variables = 0;
  std::optional<std::size_t> num_records;
  std::optional<int> parent_limit;

  std::string algorithm;
  std::string heuristic;
  std::optional<int> k;
  std::optional<std::string> groups;
  std::uint64_t seed = 0;
  int restarts = 0;

  std::vector<std::string> names;
  LearnedNetwork network;
  std::optional<double> initial_upper_bound;
  SearchStats stats;
  std::size_t pdb_size = 0;

  /// Wall-clock fields vary run to run; off by default so reports are byte-stable.
  bool include_timings = false;
};

inline nlohmann::ordered_json to_json(const RunReport& r) {
  using json = nlohmann::ordered_json;
  json out;
  out["dataset"] = {{"variables", r.num_variables},
                    {"records", r.num_records ? json(*r.num_records) : json(nullptr)}};
  out["parent_limit"] = r.parent_limit ? json(*r.parent_limit) : json(nullptr);

  json config;
  config["algorithm"] = r.algorithm;
  config["heuristic"] = r.heuristic;
  config["k"] = r.k ? json(*r.k) : json(nullptr);
  config["groups"] = r.groups ? json(*r.groups) : json(nullptr);
  config["seed"] = r.seed;
  config["restarts"] = r.restarts;
  out["config"] = std::move(config);

  out["total_score"] = r.network.total_score;
  out["total_score_text"] = format_score(r.network.total_score);
  out["initial_upper_bound"] = r.initial_upper_bound ? json(*r.initial_upper_bound) : json(nullptr);

  json network = json::array();
  for (std::size_t x = 0; x < r.network.parents.size(); ++x) {
    json parents = json::array();
    for (std::size_t p : r.network.parents[x]) parents.push_back(r.names[p]);
    network.push_back({{"variable", r.names[x]}, {"parents", std::move(parents)}});
  }
  out["network"] = std::move(network);

  json stats;
  stats["nodes_expanded"] = r.stats.nodes_expanded;
  stats["nodes_generated"] = r.stats.nodes_generated;
  stats["distinct_nodes"] = r.stats.distinct_nodes;
  stats["reopened"] = r.stats.reopened;
  stats["peak_open"] = r.stats.peak_open;
  if (r.include_timings) {
    stats["pdb_build_seconds"] = r.stats.pdb_build_time.count();
    stats["search_seconds"] = r.stats.search_time.count();
  }
  out["stats"] = std::move(stats);
  out["pdb_size"] = r.pdb_size;
  return out;
}

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

/// Graphviz digraph with one node per variable and one edge per parent relation,
/// nodes and edges in ascending index order.
inline std::string emit_dot(const LearnedNetwork& net, const std::vector<std::string>& names) {
  std::ostringstream out;
  out << "digraph network {\n";
  for (std::size_t x = 0; x < net.parents.size(); ++x) out << "  " << detail::dot_quote(names[x]) << ";\n";
  for (std::size_t x = 0; x < net.parents.size(); ++x) {
    for (std::size_t p : net.parents[x]) {
      out << "  " << detail::dot_quote(names[p]) << " -> " << detail::dot_quote(names[x]) << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace bnsl
