#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bnsl/dataset.hpp"
#include "bnsl/heuristics.hpp"
#include "bnsl/parent_store.hpp"
#include "bnsl/scoring.hpp"
#include "bnsl/search.hpp"

namespace bnsl {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string counterexample;  // first violation found, empty on success
  std::size_t cases = 0;
};

struct VerifyOptions {
  std::size_t max_variables = 10;
  std::vector<int> pattern_sizes = {2, 3};
  double tolerance = 1e-9;
};

namespace detail {

inline bool within(double lhs, double rhs, double tol) { return lhs <= rhs + tol * std::max(1.0, std::abs(rhs)); }
inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

class Checker {
 public:
  explicit Checker(std::string name) { result_.name = std::move(name); }

  void expect(bool ok, const std::function<std::string()>& describe) {
    ++result_.cases;
    if (!ok && result_.passed) {
      result_.passed = false;
      result_.counterexample = describe();
    }
  }
  CheckResult done() { return std::move(result_); }

 private:
  CheckResult result_;
};

inline std::string num(double v) { return format_score(v); }

}  // namespace detail

/// Runs every exhaustive property over the full order graph. `data`, when given, adds a
/// brute-force comparison of each BestScore against direct MDL scoring of all in-limit subsets.
/// Throws ConfigError when the problem is larger than options.max_variables.
inline std::vector<CheckResult> run_exhaustive_checks(const ScoreTables& tables, const Dataset* data = nullptr,
                                                      const VerifyOptions& options = {}) {
  using detail::Checker;
  using detail::num;
  const std::size_t n = tables.size();
  if (n > options.max_variables || n > kMaxExhaustiveVariables) {
    throw ConfigError("exhaustive verification is limited to " + std::to_string(std::min(options.max_variables, kMaxExhaustiveVariables)) +
                      " variables, problem has " + std::to_string(n));
  }
  const double tol = options.tolerance;
  const VariableSet all = tables.all();
  const std::size_t nodes = std::size_t{1} << n;
  std::vector<CheckResult> results;

  {
    Checker c("sorted-score-lists");
    for (std::size_t x = 0; x < n; ++x) {
      const auto& e = tables[x].entries();
      for (std::size_t i = 1; i < e.size(); ++i) {
        c.expect(e[i - 1].score <= e[i].score, [&] {
          return "variable " + tables.names[x] + ": entry " + std::to_string(i - 1) + " scores " + num(e[i - 1].score) +
                 " > entry " + std::to_string(i) + " " + num(e[i].score);
        });
      }
    }
    results.push_back(c.done());
  }

  {
    // Cursor (both exclusion orders) == linear scan == true minimum over the list
    // (== direct MDL minimum when data is available).
    Checker c("cursor-equivalence");
    for (std::size_t x = 0; x < n; ++x) {
      const ScoreTable& table = tables[x];
      const VariableSet others = all.without(x);
      for_each_subset(others, [&](VariableSet u) {
        const VariableSet drop = others - u;
        ExclusionCursor forward = cursor_new(table);
        for (std::size_t y : drop) forward = cursor_exclude(forward, y);
        std::vector<std::size_t> reversed(drop.begin(), drop.end());
        std::reverse(reversed.begin(), reversed.end());
        ExclusionCursor backward = cursor_new(table);
        for (std::size_t y : reversed) backward = cursor_exclude(backward, y);

        const ScoredParentSet& naive = best_score_naive(table, u);
        double true_min = std::numeric_limits<double>::infinity();
        for (const auto& e : table.entries()) {
          if (e.parents.subset_of(u)) true_min = std::min(true_min, e.score);
        }
        const auto where = [&] { return "variable " + tables.names[x] + ", candidates " + to_string(u); };
        c.expect(cursor_best(forward) == naive && cursor_best(backward) == naive, [&] {
          return where() + ": cursor " + num(cursor_best(forward).score) + " vs linear scan " + num(naive.score);
        });
        c.expect(naive.score == true_min, [&] {
          return where() + ": first admissible entry " + num(naive.score) + " but list minimum is " + num(true_min);
        });
        if (data != nullptr && tables.limit) {
          double brute = std::numeric_limits<double>::infinity();
          for_each_subset(u, [&](VariableSet s) {
            if (static_cast<int>(s.size()) <= *tables.limit) brute = std::min(brute, mdl_local_score(*data, x, s));
          });
          c.expect(detail::close(naive.score, brute, tol), [&] {
            return where() + ": store " + num(naive.score) + " vs brute-force MDL " + num(brute);
          });
        }
      });
    }
    results.push_back(c.done());
  }

  {
    Checker c("best-score-monotone");
    for (std::size_t x = 0; x < n; ++x) {
      const VariableSet others = all.without(x);
      for_each_subset(others, [&](VariableSet u) {
        for (std::size_t y : others - u) {
          const double small = best_score_naive(tables[x], u).score;
          const double large = best_score_naive(tables[x], u.with(y)).score;
          c.expect(large <= small, [&] {
            return "variable " + tables.names[x] + ": BestScore over " + to_string(u.with(y)) + " = " + num(large) +
                   " exceeds BestScore over " + to_string(u) + " = " + num(small);
          });
        }
      });
    }
    results.push_back(c.done());
  }

  const ExactDistances exact = exact_distances_to_goal(tables);
  const SimpleHeuristic simple(tables);
  const ParentStore store(tables);

  struct Named {
    std::string name;
    std::function<double(VariableSet)> h;
  };
  std::vector<Named> heuristics{{"simple", [&](VariableSet u) { return simple.value(u); }}};
  std::vector<DynamicHeuristic> dynamics;
  std::vector<DynamicHeuristic> unpruned;
  std::optional<StaticHeuristic> static_h;
  if (n >= 2) {
    for (int k : options.pattern_sizes) {
      if (k < 2 || static_cast<std::size_t>(k) > n) continue;
      dynamics.emplace_back(tables, k);
      unpruned.emplace_back(tables, k, false);
    }
    static_h.emplace(tables, default_grouping(n));
  }
  for (const auto& d : dynamics) {
    heuristics.push_back({"dynamic k=" + std::to_string(d.pdb().k()), [&d](VariableSet u) { return d.value(u); }});
  }
  if (static_h) heuristics.push_back({"static " + format_grouping(static_h->pdb().grouping()), [&](VariableSet u) { return static_h->value(u); }});

  {
    Checker c("admissibility");
    for (const auto& [name, h] : heuristics) {
      for (std::size_t bits = 0; bits < nodes; ++bits) {
        const VariableSet u{bits};
        const double hv = h(u);
        c.expect(detail::within(hv, exact(u), tol), [&] {
          return name + " at node " + to_string(u) + ": h = " + num(hv) + " > exact " + num(exact(u));
        });
      }
    }
    results.push_back(c.done());
  }

  {
    Checker c("dominance-over-simple");
    for (std::size_t i = 1; i < heuristics.size(); ++i) {
      for (std::size_t bits = 0; bits < nodes; ++bits) {
        const VariableSet u{bits};
        const double hv = heuristics[i].h(u);
        const double sv = simple.value(u);
        c.expect(detail::within(sv, hv, tol), [&] {
          return heuristics[i].name + " at node " + to_string(u) + ": " + num(hv) + " < simple " + num(sv);
        });
      }
    }
    results.push_back(c.done());
  }

  {
    Checker c("consistency-simple-static");
    std::vector<const Named*> consistent{&heuristics.front()};
    if (static_h) consistent.push_back(&heuristics.back());
    for (const Named* named : consistent) {
      for (std::size_t bits = 0; bits < nodes; ++bits) {
        const VariableSet u{bits};
        const double hu = named->h(u);
        for (std::size_t x : all - u) {
          const double arc = store.best_score(x, u);
          const double hc = named->h(u.with(x));
          c.expect(detail::within(hu, arc + hc, tol), [&] {
            return named->name + " arc " + to_string(u) + " -> +" + std::to_string(x) + ": h(U) = " + num(hu) +
                   " > " + num(arc) + " + " + num(hc);
          });
        }
      }
    }
    if (static_h) {
      for (std::size_t bits = 0; bits < nodes; ++bits) {
        const VariableSet u{bits};
        const double hu = static_h->value(u);
        for (std::size_t x : all - u) {
          const double inc = static_h->child_value(u, hu, x);
          const double direct = static_h->value(u.with(x));
          c.expect(detail::close(inc, direct, tol), [&] {
            return "static incremental update at " + to_string(u) + " +" + std::to_string(x) + ": " + num(inc) + " vs " + num(direct);
          });
        }
      }
    }
    results.push_back(c.done());
  }

  {
    Checker c("pattern-cost-equals-distance");
    const int max_k = std::min<int>(3, static_cast<int>(n));
    for (int size = 1; size <= max_k; ++size) {
      detail::for_each_subset_of_size(all, static_cast<std::size_t>(size), [&](VariableSet p) {
        const double d = exact(all - p);
        const double direct = pattern_cost_exact(p, tables);
        c.expect(detail::close(direct, d, tol), [&] {
          return "pattern " + to_string(p) + ": exhaustive cost " + num(direct) + " vs distance " + num(d);
        });
      });
    }
    for (const auto& d : unpruned) {
      for (const auto& [p, e] : d.pdb().patterns()) {
        c.expect(detail::close(e.cost, exact(all - p), tol), [&] {
          return "k=" + std::to_string(d.pdb().k()) + " pattern " + to_string(p) + ": stored cost " + num(e.cost) +
                 " vs distance " + num(exact(all - p));
        });
      }
    }
    results.push_back(c.done());
  }

  {
    Checker c("pattern-pruning-safety");
    for (std::size_t i = 0; i < dynamics.size(); ++i) {
      for (std::size_t bits = 0; bits < nodes; ++bits) {
        const VariableSet u{bits};
        const double pruned = dynamics[i].value(u);
        const double full = unpruned[i].value(u);
        c.expect(detail::close(pruned, full, tol), [&] {
          return "k=" + std::to_string(dynamics[i].pdb().k()) + " node " + to_string(u) + ": pruned database gives " +
                 num(pruned) + ", unpruned " + num(full);
        });
      }
    }
    results.push_back(c.done());
  }

  return results;
}

}  // namespace bnsl
