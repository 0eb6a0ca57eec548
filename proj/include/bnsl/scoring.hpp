#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnsl/bit_row.hpp"
#include "bnsl/dataset.hpp"
#include "bnsl/errors.hpp"
#include "bnsl/variable_set.hpp"

namespace bnsl {

/// MDL local score of `variable` given `parents`, in bits (lower is better):
///   N * H(X | PA) + log2(N) / 2 * (r_X - 1) * prod r_P
inline double mdl_local_score(const Dataset& data, std::size_t variable, VariableSet parents,
                              std::size_t cell_limit = kDefaultCellLimit) {
  const Contingency table = counts(data, variable, parents, cell_limit);
  const int r = table.child_arity;
  double entropy_bits = 0.0;
  for (std::size_t config = 0; config < table.parent_configs; ++config) {
    std::uint64_t total = 0;
    for (int x = 0; x < r; ++x) total += table.at(config, x);
    if (total == 0) continue;
    const double log_total = std::log2(static_cast<double>(total));
    for (int x = 0; x < r; ++x) {
      const std::uint32_t c = table.at(config, x);
      if (c == 0) continue;
      entropy_bits -= static_cast<double>(c) * (std::log2(static_cast<double>(c)) - log_total);
    }
  }
  const double records = static_cast<double>(data.num_records());
  const double free_parameters = static_cast<double>(r - 1) * static_cast<double>(table.parent_configs);
  return entropy_bits + std::log2(records) / 2.0 * free_parameters;
}

/// Largest parent-set size an MDL-optimal network can use: floor(log2(2N / log2 N)).
inline int parent_limit(std::size_t num_records) {
  if (num_records < 2) throw PreconditionError("parent_limit requires at least two records");
  const double n = static_cast<double>(num_records);
  return static_cast<int>(std::floor(std::log2(2.0 * n / std::log2(n))));
}

struct ScoredParentSet {
  VariableSet parents;
  double score = 0.0;

  friend bool operator==(const ScoredParentSet&, const ScoredParentSet&) = default;
};

/// Ascending score; ties broken by smaller set, then smaller bitmask.
inline bool score_order(const ScoredParentSet& a, const ScoredParentSet& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.parents.size() != b.parents.size()) return a.parents.size() < b.parents.size();
  return a.parents.bits() < b.parents.bits();
}

/// Sparse parent scores for one variable: the retained (score, parent set) pairs
/// in ascending score order, plus, per other variable Y, a bit row marking the
/// entries whose parent set contains Y.
class ScoreTable {
 public:
  ScoreTable() = default;

  /// Takes entries in the order given; callers are responsible for sortedness.
  /// Throws InputError if the empty parent set is missing or a parent set is out of range.
  ScoreTable(std::size_t variable, std::size_t num_variables, std::vector<ScoredParentSet> entries)
      : variable_(variable), num_variables_(num_variables), entries_(std::move(entries)) {
    if (variable >= num_variables) throw PreconditionError("variable index out of range");
    const VariableSet allowed = VariableSet::full(num_variables).without(variable);
    bool has_empty = false;
    for (const auto& e : entries_) {
      if (!e.parents.subset_of(allowed)) throw InputError("parent set out of range for variable " + std::to_string(variable));
      if (!std::isfinite(e.score)) throw InputError("non-finite score for variable " + std::to_string(variable));
      has_empty = has_empty || e.parents.empty();
    }
    if (!has_empty) throw InputError("score list of variable " + std::to_string(variable) + " lacks the empty parent set");

    exclusion_rows_.assign(num_variables, BitRow(entries_.size()));
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      for (std::size_t y : entries_[i].parents) exclusion_rows_[y].set(i);
    }
    for (std::size_t y = 0; y < num_variables; ++y) {
      if (!exclusion_rows_[y].none()) used_parents_ = used_parents_.with(y);
    }
  }

  std::size_t variable() const { return variable_; }
  std::size_t num_variables() const { return num_variables_; }
  const std::vector<ScoredParentSet>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const ScoredParentSet& operator[](std::size_t i) const { return entries_[i]; }

  /// Bit i set iff entries()[i].parents contains `other`.
  const BitRow& exclusion_row(std::size_t other) const { return exclusion_rows_[other]; }

  /// Variables appearing in at least one retained parent set.
  VariableSet used_parents() const { return used_parents_; }

  /// Number of candidate parent sets scored to build this table (0 when read from a file).
  std::size_t scored_candidates = 0;

 private:
  std::size_t variable_ = 0;
  std::size_t num_variables_ = 0;
  std::vector<ScoredParentSet> entries_;
  std::vector<BitRow> exclusion_rows_;
  VariableSet used_parents_;
};

/// Score tables for every variable of a problem.
struct ScoreTables {
  std::vector<std::string> names;
  std::vector<ScoreTable> tables;
  std::optional<std::size_t> num_records;  // known when built from data
  std::optional<int> limit;                // parent-set size bound used while scoring

  std::size_t size() const { return tables.size(); }
  const ScoreTable& operator[](std::size_t v) const { return tables[v]; }
  VariableSet all() const { return VariableSet::full(tables.size()); }
};

namespace detail {

/// Calls fn(subset) for every subset of `set` with exactly k members.
template <typename Fn>
void for_each_subset_of_size(VariableSet set, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> members(set.begin(), set.end());
  const std::size_t m = members.size();
  if (k > m) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::uint64_t bits = 0;
    for (std::size_t i : idx) bits |= std::uint64_t{1} << members[i];
    fn(VariableSet{bits});
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Drops every parent set that has a proper subset with an equal or better score, then sorts.
///
/// `raw` must be downward closed: every subset of a listed parent set is listed too.
/// Sweeps the subset lattice by cardinality carrying the best score seen below each set.
inline std::vector<ScoredParentSet> prune_dominated(const std::vector<ScoredParentSet>& raw) {
  std::size_t max_size = 0;
  for (const auto& e : raw) max_size = std::max(max_size, e.parents.size());
  std::vector<std::vector<const ScoredParentSet*>> layers(max_size + 1);
  for (const auto& e : raw) layers[e.parents.size()].push_back(&e);

  std::vector<ScoredParentSet> kept;
  std::unordered_map<VariableSet, double> best_below_prev;
  for (std::size_t k = 0; k <= max_size; ++k) {
    std::unordered_map<VariableSet, double> best_here;
    best_here.reserve(layers[k].size());
    for (const ScoredParentSet* e : layers[k]) {
      double inherited = std::numeric_limits<double>::infinity();
      for (std::size_t y : e->parents) {
        const auto it = best_below_prev.find(e->parents.without(y));
        if (it == best_below_prev.end()) throw PreconditionError("prune_dominated input is not downward closed");
        inherited = std::min(inherited, it->second);
      }
      if (e->score < inherited) kept.push_back(*e);
      best_here.emplace(e->parents, std::min(e->score, inherited));
    }
    best_below_prev = std::move(best_here);
  }
  std::sort(kept.begin(), kept.end(), score_order);
  return kept;
}

/// Scores every parent set of at most `limit` members and keeps the non-dominated ones.
inline ScoreTable build_score_table(const Dataset& data, std::size_t variable, int limit,
                                    std::size_t cell_limit = kDefaultCellLimit) {
  if (limit < 0) throw PreconditionError("parent limit must be non-negative");
  const std::size_t n = data.num_variables();
  if (variable >= n) throw PreconditionError("variable index out of range");
  const VariableSet candidates = VariableSet::full(n).without(variable);

  std::vector<ScoredParentSet> raw;
  for (std::size_t k = 0; k <= std::min<std::size_t>(static_cast<std::size_t>(limit), candidates.size()); ++k) {
    detail::for_each_subset_of_size(candidates, k, [&](VariableSet parents) {
      raw.push_back({parents, mdl_local_score(data, variable, parents, cell_limit)});
    });
  }
  ScoreTable table(variable, n, prune_dominated(raw));
  table.scored_candidates = raw.size();
  return table;
}

inline ScoreTables build_score_tables(const Dataset& data, int limit, std::size_t cell_limit = kDefaultCellLimit) {
  ScoreTables out;
  out.names = data.names;
  out.num_records = data.num_records();
  out.limit = limit;
  for (std::size_t v = 0; v < data.num_variables(); ++v) {
    out.tables.push_back(build_score_table(data, v, limit, cell_limit));
  }
  return out;
}

/// BestScore by linear scan: the first entry whose parents fit inside `candidates`.
inline const ScoredParentSet& best_score_naive(const ScoreTable& table, VariableSet candidates) {
  if (candidates.contains(table.variable())) throw PreconditionError("variable cannot be its own candidate parent");
  for (const auto& e : table.entries()) {
    if (e.parents.subset_of(candidates)) return e;
  }
  throw InternalError("score table has no admissible entry");
}

// ---------------------------------------------------------------------------
// Score file
//
//   n <n>
//   var <name> <m>
//   <score> <k> <parent name> * k      (m lines, in list order)
//   ...

inline std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_score_file(std::ostream& out, const ScoreTables& tables) {
  for (const auto& name : tables.names) {
    if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
      throw InputError("variable name '" + name + "' cannot be written to a score file (empty or contains whitespace)");
    }
  }
  out << "n " << tables.size() << '\n';
  for (std::size_t v = 0; v < tables.size(); ++v) {
    const ScoreTable& t = tables[v];
    out << "var " << tables.names[v] << ' ' << t.size() << '\n';
    for (const auto& e : t.entries()) {
      out << format_score(e.score) << ' ' << e.parents.size();
      for (std::size_t p : e.parents) out << ' ' << tables.names[p];
      out << '\n';
    }
  }
}

/// Reads a score file. Entry order is preserved exactly as written.
inline ScoreTables read_score_file(std::istream& in) {
  const auto fail = [](const std::string& what) { throw InputError("score file: " + what); };
  std::string word;
  std::size_t n = 0;
  if (!(in >> word) || word != "n" || !(in >> n)) fail("expected 'n <count>' header");
  if (n == 0 || n > kMaxVariables) fail("variable count must be in 1..64");

  struct Block {
    std::string name;
    std::vector<std::pair<double, std::vector<std::string>>> rows;
  };
  std::vector<Block> blocks(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t m = 0;
    if (!(in >> word) || word != "var" || !(in >> blocks[v].name >> m)) {
      fail("expected 'var <name> <count>' for variable " + std::to_string(v));
    }
    for (std::size_t i = 0; i < m; ++i) {
      std::string token;
      std::size_t k = 0;
      if (!(in >> token >> k)) fail("truncated entry list for " + blocks[v].name);
      double score = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), score);
      if (ec != std::errc{} || ptr != token.data() + token.size()) fail("bad score '" + token + "'");
      std::vector<std::string> parents(k);
      for (auto& p : parents) {
        if (!(in >> p)) fail("truncated parent list for " + blocks[v].name);
      }
      blocks[v].rows.emplace_back(score, std::move(parents));
    }
  }
  if (in >> word) fail("unexpected trailing content '" + word + "'");

  ScoreTables out;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t v = 0; v < n; ++v) {
    if (!index.emplace(blocks[v].name, v).second) fail("duplicate variable '" + blocks[v].name + "'");
    out.names.push_back(blocks[v].name);
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<ScoredParentSet> entries;
    for (const auto& [score, names] : blocks[v].rows) {
      VariableSet parents;
      for (const auto& p : names) {
        const auto it = index.find(p);
        if (it == index.end()) fail("unknown parent '" + p + "' for " + blocks[v].name);
        if (it->second == v) fail(blocks[v].name + " lists itself as a parent");
        parents = parents.with(it->second);
      }
      if (parents.size() != names.size()) fail("repeated parent for " + blocks[v].name);
      entries.push_back({parents, score});
    }
    out.tables.emplace_back(v, n, std::move(entries));
  }
  return out;
}

inline void save_score_file(const std::string& path, const ScoreTables& tables) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_score_file(out, tables);
  if (!out) throw InputError("write failed for " + path);
}

inline ScoreTables load_score_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return read_score_file(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace bnsl
