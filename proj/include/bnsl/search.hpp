#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnsl/errors.hpp"
#include "bnsl/heuristics.hpp"
#include "bnsl/parent_store.hpp"
#include "bnsl/scoring.hpp"
#include "bnsl/variable_set.hpp"

namespace bnsl {

/// A node of the order graph as seen by the search.
struct SearchNode {
  VariableSet vars;
  double g = 0.0;
  double h = 0.0;
  std::optional<std::size_t> pred;  // variable added last; empty for the start node

  double f() const { return g + h; }
};

struct LearnedNetwork {
  std::vector<VariableSet> parents;
  double total_score = 0.0;
};

struct SearchStats {
  std::size_t nodes_expanded = 0;
  std::size_t nodes_generated = 0;  // node records created or improved, start included
  std::size_t distinct_nodes = 0;   // distinct order-graph nodes stored
  std::size_t reopened = 0;         // closed nodes put back on the open list
  std::size_t peak_open = 0;        // open list (A*) or widest layer (BFBnB)
  std::chrono::duration<double> pdb_build_time{0};
  std::chrono::duration<double> search_time{0};
};

struct SearchResult {
  LearnedNetwork network;
  SearchStats stats;
};

/// Thrown when a search's estimated memory use passes its budget.
class MemoryBudgetExceeded : public std::runtime_error {
 public:
  MemoryBudgetExceeded(const std::string& what, SearchStats stats) : std::runtime_error(what), stats(stats) {}
  SearchStats stats;
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{4} << 30;

struct SearchOptions {
  std::size_t memory_budget_bytes = kDefaultMemoryBudget;
  /// Put closed nodes back on the open list when a strictly cheaper path reaches them.
  bool allow_reopening = true;
};

namespace detail {

// Rough per-node footprint used for the budget: hash-map node plus open-list slot.
inline constexpr std::size_t kNodeBytes = 64;
inline constexpr std::size_t kOpenEntryBytes = 24;

inline bool strictly_less(double a, double b) { return a < b - 1e-12 * std::max(1.0, std::abs(b)); }

inline void check_score_agreement(double recomputed, double path_g) {
  if (std::abs(recomputed - path_g) > 1e-9 * std::max(1.0, std::abs(path_g))) {
    throw InternalError("reconstructed score " + format_score(recomputed) + " differs from path cost " + format_score(path_g));
  }
}

}  // namespace detail

/// The network in which each variable takes its best parents among its predecessors in `order`.
inline LearnedNetwork network_from_order(const std::vector<std::size_t>& order, const ParentStore& store) {
  LearnedNetwork net;
  net.parents.assign(store.num_variables(), VariableSet{});
  VariableSet placed;
  for (std::size_t x : order) {
    const ScoredParentSet& best = store.best(x, placed);
    net.parents[x] = best.parents;
    net.total_score += best.score;
    placed = placed.with(x);
  }
  return net;
}

/// Rebuilds the network along the path ending at `goal`. `pred_of(U)` returns the variable
/// added last on the best path to U. Throws InternalError on a broken chain or on a
/// reconstructed score that disagrees with `goal.g`.
template <typename PredLookup>
LearnedNetwork reconstruct(const SearchNode& goal, PredLookup&& pred_of, const ParentStore& store) {
  std::deque<std::size_t> order;
  VariableSet node = goal.vars;
  std::optional<std::size_t> pred = goal.pred;
  while (!node.empty()) {
    if (!pred || !node.contains(*pred)) throw InternalError("broken predecessor chain at " + to_string(node));
    order.push_front(*pred);
    node = node.without(*pred);
    if (!node.empty()) pred = pred_of(node);
  }
  LearnedNetwork net = network_from_order({order.begin(), order.end()}, store);
  detail::check_score_agreement(net.total_score, goal.g);
  return net;
}

/// Best-first search of the order graph, ordered by f = g + h; equal f prefers larger g,
/// then the smaller bitmask.
template <OrderGraphHeuristic H>
SearchResult astar(const ScoreTables& tables, const H& heuristic, const SearchOptions& options = {}) {
  const std::size_t n = tables.size();
  if (n == 0 || n > kMaxVariables) throw PreconditionError("astar needs 1..64 variables");
  const auto started = std::chrono::steady_clock::now();
  const ParentStore store(tables);
  const VariableSet goal = VariableSet::full(n);

  struct Record {
    double g;
    double h;
    std::int8_t pred;
    bool closed;
  };
  struct OpenEntry {
    double f;
    double g;
    VariableSet node;
  };
  struct Worse {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
      if (a.f != b.f) return a.f > b.f;
      if (a.g != b.g) return a.g < b.g;
      return a.node.bits() > b.node.bits();
    }
  };

  SearchStats stats;
  std::unordered_map<VariableSet, Record> nodes;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, Worse> open;

  const double start_h = heuristic.value(VariableSet{});
  nodes.emplace(VariableSet{}, Record{0.0, start_h, -1, false});
  open.push({start_h, 0.0, VariableSet{}});
  stats.nodes_generated = 1;

  const auto budget_check = [&] {
    const std::size_t used = nodes.size() * detail::kNodeBytes + open.size() * detail::kOpenEntryBytes;
    if (used > options.memory_budget_bytes) {
      stats.distinct_nodes = nodes.size();
      stats.search_time = std::chrono::steady_clock::now() - started;
      throw MemoryBudgetExceeded("A* exceeded the memory budget of " + std::to_string(options.memory_budget_bytes) + " bytes",
                                 stats);
    }
  };

  while (!open.empty()) {
    stats.peak_open = std::max(stats.peak_open, open.size());
    const OpenEntry top = open.top();
    open.pop();
    Record& rec = nodes.at(top.node);
    if (rec.closed || top.g != rec.g) continue;  // stale entry

    if (top.node == goal) {
      stats.distinct_nodes = nodes.size();
      const SearchNode goal_node{goal, rec.g, 0.0, static_cast<std::size_t>(rec.pred)};
      LearnedNetwork net = reconstruct(
          goal_node, [&](VariableSet u) -> std::optional<std::size_t> {
            const auto it = nodes.find(u);
            if (it == nodes.end() || it->second.pred < 0) return std::nullopt;
            return static_cast<std::size_t>(it->second.pred);
          },
          store);
      stats.search_time = std::chrono::steady_clock::now() - started;
      return {std::move(net), stats};
    }

    rec.closed = true;
    ++stats.nodes_expanded;
    const VariableSet u = top.node;
    const double g = rec.g;
    const double h = rec.h;
    for (std::size_t x : goal - u) {
      const VariableSet child = u.with(x);
      const double child_g = g + store.best_score(x, u);
      const auto it = nodes.find(child);
      if (it == nodes.end()) {
        const double child_h = heuristic.child_value(u, h, x);
        nodes.emplace(child, Record{child_g, child_h, static_cast<std::int8_t>(x), false});
        open.push({child_g + child_h, child_g, child});
        ++stats.nodes_generated;
        continue;
      }
      Record& existing = it->second;
      if (existing.closed) {
        if (!options.allow_reopening || !detail::strictly_less(child_g, existing.g)) continue;
        existing.closed = false;
        ++stats.reopened;
      } else if (!(child_g < existing.g)) {
        continue;
      }
      existing.g = child_g;
      existing.pred = static_cast<std::int8_t>(x);
      open.push({child_g + existing.h, child_g, child});
      ++stats.nodes_generated;
    }
    budget_check();
  }
  throw InternalError("A* exhausted the open list without reaching the goal");
}

/// Layered breadth-first branch and bound. A generated node is discarded when g + h reaches the
/// incumbent's score; the incumbent is replaced only by a strictly better goal path. With no
/// incumbent the bound is disabled and the whole order graph is generated.
template <OrderGraphHeuristic H>
SearchResult bfbnb(const ScoreTables& tables, const H& heuristic, const std::optional<LearnedNetwork>& incumbent,
                   const SearchOptions& options = {}) {
  const std::size_t n = tables.size();
  if (n == 0 || n > kMaxVariables) throw PreconditionError("bfbnb needs 1..64 variables");
  const auto started = std::chrono::steady_clock::now();
  const ParentStore store(tables);
  const VariableSet goal = VariableSet::full(n);
  const double bound = incumbent ? incumbent->total_score : std::numeric_limits<double>::infinity();

  struct Record {
    double g;
    double h;
    std::int8_t pred;
  };
  std::vector<std::unordered_map<VariableSet, Record>> layers(n + 1);
  SearchStats stats;
  std::size_t stored = 1;

  const double start_h = heuristic.value(VariableSet{});
  if (!(start_h >= bound)) layers[0].emplace(VariableSet{}, Record{0.0, start_h, -1});
  stats.nodes_generated = layers[0].size();

  for (std::size_t depth = 0; depth < n; ++depth) {
    std::vector<VariableSet> frontier;
    frontier.reserve(layers[depth].size());
    for (const auto& [u, rec] : layers[depth]) frontier.push_back(u);
    std::sort(frontier.begin(), frontier.end());
    stats.peak_open = std::max(stats.peak_open, frontier.size());

    auto& next = layers[depth + 1];
    for (const VariableSet u : frontier) {
      const Record rec = layers[depth].at(u);
      ++stats.nodes_expanded;
      for (std::size_t x : goal - u) {
        const VariableSet child = u.with(x);
        const double child_g = rec.g + store.best_score(x, u);
        const auto it = next.find(child);
        if (it != next.end()) {
          if (child_g < it->second.g) {
            it->second.g = child_g;
            it->second.pred = static_cast<std::int8_t>(x);
            ++stats.nodes_generated;
          }
          continue;
        }
        const double child_h = heuristic.child_value(u, rec.h, x);
        if (child_g + child_h >= bound) continue;
        next.emplace(child, Record{child_g, child_h, static_cast<std::int8_t>(x)});
        ++stats.nodes_generated;
        ++stored;
      }
      if (stored * detail::kNodeBytes > options.memory_budget_bytes) {
        stats.distinct_nodes = stored;
        stats.search_time = std::chrono::steady_clock::now() - started;
        throw MemoryBudgetExceeded(
            "BFBnB exceeded the memory budget of " + std::to_string(options.memory_budget_bytes) + " bytes", stats);
      }
    }
  }
  stats.distinct_nodes = stored;
  if (layers[0].empty()) stats.distinct_nodes = 0;

  const auto goal_it = layers[n].find(goal);
  if (goal_it != layers[n].end() && goal_it->second.g < bound) {
    const SearchNode goal_node{goal, goal_it->second.g, 0.0, static_cast<std::size_t>(goal_it->second.pred)};
    LearnedNetwork net = reconstruct(
        goal_node, [&](VariableSet u) -> std::optional<std::size_t> {
          const auto& layer = layers[u.size()];
          const auto it = layer.find(u);
          if (it == layer.end() || it->second.pred < 0) return std::nullopt;
          return static_cast<std::size_t>(it->second.pred);
        },
        store);
    stats.search_time = std::chrono::steady_clock::now() - started;
    return {std::move(net), stats};
  }
  if (!incumbent) throw InternalError("BFBnB without a bound failed to reach the goal");
  stats.search_time = std::chrono::steady_clock::now() - started;
  return {*incumbent, stats};
}

namespace detail {

/// Uniform integer in [0, bound) from raw 64-bit draws; stable across standard libraries.
inline std::size_t bounded(std::mt19937_64& rng, std::size_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return static_cast<std::size_t>(r % bound);
}

}  // namespace detail

/// Ordering-based hill climbing for an initial upper bound. Each restart shuffles the variables,
/// then takes the first improving adjacent transposition until none improves. Deterministic in
/// `seed`.
inline LearnedNetwork initial_upper_bound(const ScoreTables& tables, std::uint64_t seed, int restarts) {
  if (restarts < 1) throw PreconditionError("restarts must be at least 1");
  const std::size_t n = tables.size();
  const ParentStore store(tables);
  std::mt19937_64 rng(seed);

  std::optional<LearnedNetwork> best;
  std::vector<std::size_t> order(n);
  std::vector<double> local(n);
  std::vector<VariableSet> prefix(n + 1);  // prefix[i] = first i variables of the order

  for (int r = 0; r < restarts; ++r) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[detail::bounded(rng, i)]);
    for (std::size_t i = 0; i < n; ++i) {
      prefix[i + 1] = prefix[i].with(order[i]);
      local[i] = store.best_score(order[i], prefix[i]);
    }

    std::size_t i = 0;
    while (i + 1 < n) {
      const std::size_t a = order[i];
      const std::size_t b = order[i + 1];
      const double b_first = store.best_score(b, prefix[i]);
      const double a_second = store.best_score(a, prefix[i].with(b));
      if (detail::strictly_less(b_first + a_second, local[i] + local[i + 1])) {
        std::swap(order[i], order[i + 1]);
        local[i] = b_first;
        local[i + 1] = a_second;
        prefix[i + 1] = prefix[i].with(b);
        i = i > 0 ? i - 1 : 0;
      } else {
        ++i;
      }
    }

    LearnedNetwork net = network_from_order(order, store);
    if (!best || net.total_score < best->total_score) best = std::move(net);
  }
  return *best;
}

inline constexpr std::size_t kMaxExhaustiveVariables = 20;

/// Exact optimum by forward dynamic programming over all 2^n order-graph nodes, using
/// linear-scan BestScore lookups. Test oracle; n <= 20.
inline std::pair<LearnedNetwork, double> dp_oracle(const ScoreTables& tables) {
  const std::size_t n = tables.size();
  if (n == 0 || n > kMaxExhaustiveVariables) throw ConfigError("dp_oracle supports 1..20 variables");
  const std::size_t nodes = std::size_t{1} << n;
  std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
  std::vector<std::int8_t> pred(nodes, -1);
  dist[0] = 0.0;
  for (std::size_t u = 0; u < nodes; ++u) {
    const VariableSet placed{u};
    for (std::size_t x = 0; x < n; ++x) {
      if (placed.contains(x)) continue;
      const std::size_t child = u | (std::size_t{1} << x);
      const double d = dist[u] + best_score_naive(tables[x], placed).score;
      if (d < dist[child]) {
        dist[child] = d;
        pred[child] = static_cast<std::int8_t>(x);
      }
    }
  }
  // Walk back along the predecessor chain.
  std::vector<std::size_t> order;
  for (std::size_t u = nodes - 1; u != 0; u &= ~(std::size_t{1} << pred[u])) order.push_back(static_cast<std::size_t>(pred[u]));
  std::reverse(order.begin(), order.end());
  LearnedNetwork net;
  net.parents.assign(n, VariableSet{});
  VariableSet placed;
  for (std::size_t x : order) {
    const ScoredParentSet& e = best_score_naive(tables[x], placed);
    net.parents[x] = e.parents;
    net.total_score += e.score;
    placed = placed.with(x);
  }
  return {std::move(net), dist[nodes - 1]};
}

/// Exact distance from every order-graph node to the goal, indexed by node bitmask.
struct ExactDistances {
  std::vector<double> to_goal;
  double operator()(VariableSet u) const { return to_goal[u.bits()]; }
};

/// Backward DP: d(V) = 0, d(U) = min over X not in U of BestScore(X, U) + d(U ∪ {X}). Test oracle; n <= 20.
inline ExactDistances exact_distances_to_goal(const ScoreTables& tables) {
  const std::size_t n = tables.size();
  if (n == 0 || n > kMaxExhaustiveVariables) throw ConfigError("exact_distances_to_goal supports 1..20 variables");
  const std::size_t nodes = std::size_t{1} << n;
  ExactDistances out;
  out.to_goal.assign(nodes, std::numeric_limits<double>::infinity());
  out.to_goal[nodes - 1] = 0.0;
  for (std::size_t u = nodes - 1; u-- > 0;) {
    const VariableSet placed{u};
    for (std::size_t x = 0; x < n; ++x) {
      if (placed.contains(x)) continue;
      const double d = best_score_naive(tables[x], placed).score + out.to_goal[u | (std::size_t{1} << x)];
      out.to_goal[u] = std::min(out.to_goal[u], d);
    }
  }
  return out;
}

/// True when {Y -> X : Y in parents[X]} has no directed cycle.
inline bool is_acyclic(const LearnedNetwork& net) {
  const std::size_t n = net.parents.size();
  VariableSet placed;
  for (std::size_t round = 0; round < n; ++round) {
    bool progressed = false;
    for (std::size_t x = 0; x < n; ++x) {
      if (!placed.contains(x) && net.parents[x].subset_of(placed)) {
        placed = placed.with(x);
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  return placed == VariableSet::full(n);
}

/// Sum of the table scores of each variable's chosen parent set.
/// Throws InputError if a chosen set has no entry in its table.
inline double network_score(const LearnedNetwork& net, const ScoreTables& tables) {
  double total = 0.0;
  for (std::size_t x = 0; x < net.parents.size(); ++x) {
    const auto& entries = tables[x].entries();
    const auto it = std::find_if(entries.begin(), entries.end(), [&](const ScoredParentSet& e) { return e.parents == net.parents[x]; });
    if (it == entries.end()) throw InputError("parent set " + to_string(net.parents[x]) + " is not in the table of variable " + std::to_string(x));
    total += it->score;
  }
  return total;
}

}  // namespace bnsl
