#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bnsl/errors.hpp"
#include "bnsl/parent_store.hpp"
#include "bnsl/scoring.hpp"
#include "bnsl/variable_set.hpp"

namespace bnsl {

// ---------------------------------------------------------------------------
// Simple heuristic: every unplaced variable takes its unconstrained best parents.

struct SimpleTable {
  std::vector<double> best;  // BestScore(X, V \ {X}) per variable

  double sum_over(VariableSet s) const {
    double total = 0.0;
    for (std::size_t v : s) total += best[v];
    return total;
  }
};

inline SimpleTable make_simple_table(const ScoreTables& tables) {
  SimpleTable t;
  for (const auto& table : tables.tables) t.best.push_back(table[0].score);
  return t;
}

/// Sum of the best unconstrained scores of the variables not in `placed`.
inline double simple_h(VariableSet placed, const SimpleTable& t) {
  return t.sum_over(VariableSet::full(t.best.size()) - placed);
}

/// Cost of `pattern`: the shortest distance from V \ pattern to the goal, by exhaustive
/// DP over the subsets of the pattern with linear-scan BestScore lookups.
inline double pattern_cost_exact(VariableSet pattern, const ScoreTables& tables) {
  if (pattern.empty()) throw PreconditionError("pattern must be nonempty");
  const VariableSet rest = tables.all() - pattern;
  const std::vector<std::size_t> members(pattern.begin(), pattern.end());
  const std::size_t m = members.size();
  if (m > 24) throw ConfigError("pattern too large for exhaustive evaluation");
  // remaining[S]: best cost to add the members not in local subset S, given rest ∪ S placed.
  std::vector<double> remaining(std::size_t{1} << m, std::numeric_limits<double>::infinity());
  const std::size_t full = remaining.size() - 1;
  remaining[full] = 0.0;
  for (std::size_t s = full; s-- > 0;) {
    VariableSet placed = rest;
    for (std::size_t i = 0; i < m; ++i) {
      if ((s >> i) & 1U) placed = placed.with(members[i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      if ((s >> i) & 1U) continue;
      const double arc = best_score_naive(tables[members[i]], placed).score;
      remaining[s] = std::min(remaining[s], arc + remaining[s | (std::size_t{1} << i)]);
    }
  }
  return remaining[0];
}

/// Result of a heuristic evaluation; `patterns` lists the multi-variable patterns used.
struct HeuristicValue {
  double value = 0.0;
  std::vector<VariableSet> patterns;
};

// ---------------------------------------------------------------------------
// Dynamic pattern database (k-cycle conflict heuristic)

struct PatternEntry {
  double cost = 0.0;
  double differential = 0.0;
};

/// Differentials closer than this (scaled by max(1, |cost|)) are treated as equal.
inline constexpr double kDifferentialTolerance = 1e-9;

class DynamicPDB {
 public:
  DynamicPDB() = default;
  DynamicPDB(std::size_t num_variables, int k, std::unordered_map<VariableSet, PatternEntry> patterns)
      : num_variables_(num_variables), k_(k), patterns_(std::move(patterns)) {
    order_.reserve(patterns_.size());
    for (const auto& [p, e] : patterns_) order_.push_back(p);
    std::sort(order_.begin(), order_.end(), [this](VariableSet a, VariableSet b) {
      const double da = patterns_.at(a).differential;
      const double db = patterns_.at(b).differential;
      if (da != db) return da > db;
      if (a.size() != b.size()) return a.size() < b.size();
      return a.bits() < b.bits();
    });
    differentials_.reserve(order_.size());
    for (VariableSet p : order_) differentials_.push_back(patterns_.at(p).differential);
  }

  int k() const { return k_; }
  std::size_t num_variables() const { return num_variables_; }
  std::size_t size() const { return patterns_.size(); }
  const std::unordered_map<VariableSet, PatternEntry>& patterns() const { return patterns_; }

  const PatternEntry* find(VariableSet pattern) const {
    const auto it = patterns_.find(pattern);
    return it == patterns_.end() ? nullptr : &it->second;
  }

  /// Stored patterns by descending differential, then smaller size, then smaller bitmask.
  const std::vector<VariableSet>& order() const { return order_; }
  const std::vector<double>& ordered_differentials() const { return differentials_; }

 private:
  std::size_t num_variables_ = 0;
  int k_ = 0;
  std::unordered_map<VariableSet, PatternEntry> patterns_;
  std::vector<VariableSet> order_;
  std::vector<double> differentials_;
};

/// Exact reverse distances to the goal for every node in the last `layers` layers of the
/// order graph, keyed by the complement pattern V \ U. Computed layer by layer backward
/// from the goal; a reverse arc U ∪ {X} -> U costs BestScore(X, U).
inline std::unordered_map<VariableSet, double> backward_pattern_costs(const ParentStore& store, int layers) {
  const VariableSet all = VariableSet::full(store.num_variables());
  std::unordered_map<VariableSet, double> cost;  // pattern -> distance from V \ pattern
  std::unordered_map<VariableSet, double> frontier{{VariableSet{}, 0.0}};
  for (int depth = 1; depth <= layers; ++depth) {
    std::unordered_map<VariableSet, double> next;
    for (const auto& [pattern, dist] : frontier) {
      const VariableSet node_after = all - pattern;
      for (std::size_t x : node_after) {
        const VariableSet bigger = pattern.with(x);
        const double d = store.best_score(x, node_after.without(x)) + dist;
        auto [it, inserted] = next.try_emplace(bigger, d);
        if (!inserted && d < it->second) it->second = d;
      }
    }
    for (const auto& [p, d] : next) cost.emplace(p, d);
    frontier = std::move(next);
  }
  return cost;
}

/// Builds the dynamic pattern database for patterns of 2..k variables.
///
/// A pattern is stored when its differential is positive and differs from the differential of
/// every pattern obtained by dropping one of its variables (singletons have differential 0).
/// With `prune` false every pattern of size 2..k is stored; used to check pruning safety.
inline DynamicPDB build_dynamic_pdb(const ScoreTables& tables, int k, bool prune = true) {
  const std::size_t n = tables.size();
  if (k < 2 || static_cast<std::size_t>(k) > n) throw ConfigError("k must be in [2, n]");
  const ParentStore store(tables);
  const SimpleTable simple = make_simple_table(tables);
  const auto cost = backward_pattern_costs(store, k);

  // Differentials equal (within tolerance) to an immediate subset's take that subset's exact
  // value, so the greedy order always meets the smaller pattern first.
  std::vector<std::pair<VariableSet, double>> by_size(cost.begin(), cost.end());
  std::sort(by_size.begin(), by_size.end(), [](const auto& a, const auto& b) {
    return a.first.size() != b.first.size() ? a.first.size() < b.first.size() : a.first < b.first;
  });
  std::unordered_map<VariableSet, PatternEntry> all;
  std::unordered_map<VariableSet, PatternEntry> stored;
  for (const auto& [p, c] : by_size) {
    PatternEntry e{c, p.size() < 2 ? 0.0 : c - simple.sum_over(p)};
    const double tol = kDifferentialTolerance * std::max(1.0, std::abs(c));
    bool redundant = false;
    if (e.differential <= tol) {
      e.differential = 0.0;
      redundant = true;
    }
    for (std::size_t x : p) {
      if (redundant || p.size() < 2) break;
      const VariableSet sub = p.without(x);
      const double sub_diff = sub.size() < 2 ? 0.0 : all.at(sub).differential;
      if (std::abs(e.differential - sub_diff) <= tol) {
        e.differential = sub_diff;
        redundant = true;
      }
    }
    all.emplace(p, e);
    if (p.size() >= 2 && (!prune || !redundant)) stored.emplace(p, e);
  }
  return DynamicPDB(n, k, std::move(stored));
}

/// Greedy additive cover of the unplaced variables: repeatedly take the stored pattern with the
/// largest differential that fits in what remains; leftover variables count as singletons.
inline HeuristicValue greedy_partition(VariableSet remaining, const DynamicPDB& pdb, const SimpleTable& simple) {
  HeuristicValue out;
  out.value = simple.sum_over(remaining);
  const auto& order = pdb.order();
  const auto& diffs = pdb.ordered_differentials();
  VariableSet left = remaining;
  for (std::size_t i = 0; i < order.size() && left.size() >= 2; ++i) {
    if (order[i].subset_of(left)) {
      out.value += diffs[i];
      out.patterns.push_back(order[i]);
      left = left - order[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Static pattern databases

using Grouping = std::vector<VariableSet>;

/// First ceil(n/2) variables, then the rest.
inline Grouping default_grouping(std::size_t n) {
  if (n < 2) throw PreconditionError("default grouping needs at least two variables");
  const std::size_t first = (n + 1) / 2;
  return {VariableSet::full(first), VariableSet::full(n) - VariableSet::full(first)};
}

/// Parses "1-4,5-8" style groupings (1-based, inclusive ranges; each comma-separated item is
/// one group) or "auto". Throws ConfigError unless the groups partition {1..n}.
inline Grouping parse_grouping(std::string_view spec, std::size_t n) {
  if (spec == "auto") return default_grouping(n);
  const auto bad = [&](const std::string& why) { throw ConfigError("invalid --groups '" + std::string(spec) + "': " + why); };
  const auto parse_index = [&](std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) bad("'" + std::string(s) + "' is not an index");
    if (v < 1 || v > n) bad("index " + std::to_string(v) + " outside 1.." + std::to_string(n));
    return v - 1;
  };
  Grouping groups;
  VariableSet covered;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string_view item = spec.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const std::size_t dash = item.find('-');
    const std::size_t lo = parse_index(item.substr(0, dash));
    const std::size_t hi = dash == std::string_view::npos ? lo : parse_index(item.substr(dash + 1));
    if (hi < lo) bad("descending range");
    VariableSet group;
    for (std::size_t v = lo; v <= hi; ++v) group = group.with(v);
    if (group.intersects(covered)) bad("groups overlap");
    covered = covered | group;
    groups.push_back(group);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (covered != VariableSet::full(n)) bad("groups do not cover every variable");
  return groups;
}

inline std::string format_grouping(const Grouping& grouping) {
  std::string out;
  for (const VariableSet g : grouping) {
    if (!out.empty()) out += ',';
    // contiguous ranges print as lo-hi, others as a '+'-joined list
    std::size_t lo = g.front();
    std::size_t hi = lo;
    for (std::size_t v : g) hi = v;
    if (g.size() == hi - lo + 1) {
      out += std::to_string(lo + 1);
      if (hi != lo) out += "-" + std::to_string(hi + 1);
    } else {
      bool first = true;
      for (std::size_t v : g) {
        if (!first) out += '+';
        out += std::to_string(v + 1);
        first = false;
      }
    }
  }
  return out;
}

/// Default cap on the static group size; a group of m variables needs 2^m costs.
inline constexpr std::size_t kDefaultGroupSizeCap = 25;

class StaticPDB {
 public:
  struct Group {
    VariableSet members;
    std::vector<std::size_t> variables;  // ascending; local bit i <-> variables[i]
    std::vector<double> cost;            // indexed by local subset of the unplaced members

    std::size_t local(VariableSet s) const {
      std::size_t bits = 0;
      for (std::size_t i = 0; i < variables.size(); ++i) {
        if (s.contains(variables[i])) bits |= std::size_t{1} << i;
      }
      return bits;
    }
  };

  StaticPDB() = default;
  StaticPDB(std::size_t num_variables, std::vector<Group> groups) : num_variables_(num_variables), groups_(std::move(groups)) {
    group_of_.assign(num_variables, 0);
    local_bit_.assign(num_variables, 0);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      for (std::size_t i = 0; i < groups_[g].variables.size(); ++i) {
        group_of_[groups_[g].variables[i]] = g;
        local_bit_[groups_[g].variables[i]] = std::size_t{1} << i;
      }
    }
  }

  std::size_t num_variables() const { return num_variables_; }
  const std::vector<Group>& groups() const { return groups_; }

  Grouping grouping() const {
    Grouping out;
    for (const auto& g : groups_) out.push_back(g.members);
    return out;
  }

  /// Cost of the unplaced members `pattern` of group g (pattern must lie inside the group).
  double cost(std::size_t g, VariableSet pattern) const { return groups_[g].cost[groups_[g].local(pattern)]; }

  /// Total number of stored pattern costs.
  std::size_t size() const {
    std::size_t total = 0;
    for (const auto& g : groups_) total += g.cost.size();
    return total;
  }

  double value(VariableSet placed) const {
    double total = 0.0;
    for (const auto& g : groups_) total += g.cost[g.local(g.members - placed)];
    return total;
  }

  /// h(U ∪ {x}) from h(U): only the group holding x changes.
  double child_value(VariableSet placed, double parent_value, std::size_t x) const {
    const Group& g = groups_[group_of_[x]];
    const std::size_t before = g.local(g.members - placed);
    return parent_value - g.cost[before] + g.cost[before & ~local_bit_[x]];
  }

 private:
  std::size_t num_variables_ = 0;
  std::vector<Group> groups_;
  std::vector<std::size_t> group_of_;
  std::vector<std::size_t> local_bit_;
};

/// One full pattern table per group. Within group G, a reverse arc U ∪ {X} -> U costs
/// BestScore(X, (V \ G) ∪ U); entries are filled layer by layer from the group's goal.
inline StaticPDB build_static_pdb(const ScoreTables& tables, const Grouping& grouping,
                                  std::size_t group_size_cap = kDefaultGroupSizeCap) {
  const std::size_t n = tables.size();
  VariableSet covered;
  for (const VariableSet g : grouping) {
    if (g.empty()) throw ConfigError("empty group");
    if (g.intersects(covered)) throw ConfigError("groups overlap");
    if (g.size() > group_size_cap) {
      throw ConfigError("group of " + std::to_string(g.size()) + " variables exceeds the size cap of " +
                        std::to_string(group_size_cap));
    }
    covered = covered | g;
  }
  if (covered != VariableSet::full(n)) throw ConfigError("grouping does not partition the variables");

  const ParentStore store(tables);
  std::vector<StaticPDB::Group> groups;
  for (const VariableSet members : grouping) {
    StaticPDB::Group g;
    g.members = members;
    g.variables.assign(members.begin(), members.end());
    const std::size_t m = g.variables.size();
    const VariableSet outside = VariableSet::full(n) - members;
    g.cost.assign(std::size_t{1} << m, std::numeric_limits<double>::infinity());
    g.cost[0] = 0.0;
    // Local subsets in ascending order: every s ^ bit precedes s, which is exactly the
    // layer-by-layer order away from the group goal.
    for (std::size_t s = 1; s < g.cost.size(); ++s) {
      VariableSet placed = outside;
      for (std::size_t i = 0; i < m; ++i) {
        if (!((s >> i) & 1U)) placed = placed.with(g.variables[i]);
      }
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (!((s >> i) & 1U)) continue;
        const double d = store.best_score(g.variables[i], placed) + g.cost[s ^ (std::size_t{1} << i)];
        best = std::min(best, d);
      }
      g.cost[s] = best;
    }
    groups.push_back(std::move(g));
  }
  return StaticPDB(n, std::move(groups));
}

inline double static_h(VariableSet placed, const StaticPDB& pdb) { return pdb.value(placed); }

// ---------------------------------------------------------------------------
// Heuristic providers used by the searches.
//
// A provider exposes value(U), child_value(U, h(U), X) for h(U ∪ {X}), consistent(),
// pattern_count() and name().

template <typename H>
concept OrderGraphHeuristic = requires(const H& h, VariableSet u, double v, std::size_t x) {
  { h.value(u) } -> std::convertible_to<double>;
  { h.child_value(u, v, x) } -> std::convertible_to<double>;
  { h.consistent() } -> std::convertible_to<bool>;
  { h.pattern_count() } -> std::convertible_to<std::size_t>;
};

class SimpleHeuristic {
 public:
  explicit SimpleHeuristic(const ScoreTables& tables) : table_(make_simple_table(tables)) {}

  double value(VariableSet placed) const { return simple_h(placed, table_); }
  double child_value(VariableSet placed, double, std::size_t x) const { return value(placed.with(x)); }
  bool consistent() const { return true; }
  std::size_t pattern_count() const { return table_.best.size(); }
  std::string name() const { return "simple"; }
  const SimpleTable& table() const { return table_; }

 private:
  SimpleTable table_;
};

class DynamicHeuristic {
 public:
  DynamicHeuristic(const ScoreTables& tables, int k, bool prune = true)
      : simple_(make_simple_table(tables)), pdb_(build_dynamic_pdb(tables, k, prune)) {}

  double value(VariableSet placed) const { return evaluate(placed).value; }
  HeuristicValue evaluate(VariableSet placed) const {
    return greedy_partition(VariableSet::full(simple_.best.size()) - placed, pdb_, simple_);
  }
  double child_value(VariableSet placed, double, std::size_t x) const { return value(placed.with(x)); }
  bool consistent() const { return false; }
  /// Singletons plus stored multi-variable patterns.
  std::size_t pattern_count() const { return simple_.best.size() + pdb_.size(); }
  std::string name() const { return "dynamic"; }
  const DynamicPDB& pdb() const { return pdb_; }

 private:
  SimpleTable simple_;
  DynamicPDB pdb_;
};

class StaticHeuristic {
 public:
  StaticHeuristic(const ScoreTables& tables, const Grouping& grouping, std::size_t group_size_cap = kDefaultGroupSizeCap)
      : pdb_(build_static_pdb(tables, grouping, group_size_cap)) {}

  double value(VariableSet placed) const { return pdb_.value(placed); }
  double child_value(VariableSet placed, double parent_value, std::size_t x) const {
    return pdb_.child_value(placed, parent_value, x);
  }
  bool consistent() const { return true; }
  std::size_t pattern_count() const { return pdb_.size(); }
  std::string name() const { return "static"; }
  const StaticPDB& pdb() const { return pdb_; }

 private:
  StaticPDB pdb_;
};

}  // namespace bnsl
