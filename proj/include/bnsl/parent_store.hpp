#pragma once

#include <cstddef>
#include <vector>

#include "bnsl/bit_row.hpp"
#include "bnsl/errors.hpp"
#include "bnsl/scoring.hpp"
#include "bnsl/variable_set.hpp"

namespace bnsl {

/// Tracks which entries of a ScoreTable remain admissible as candidate parents are removed.
///
/// A cursor is a value: exclude() returns a new cursor and leaves this one intact, so
/// search branches can share a common prefix. The table must outlive every cursor over it.
class ExclusionCursor {
 public:
  explicit ExclusionCursor(const ScoreTable& table) : table_(&table), valid_(table.size(), true) {}

  const ScoreTable& table() const { return *table_; }
  const BitRow& valid() const { return valid_; }
  VariableSet excluded() const { return excluded_; }

  /// valid & ~row(other)
  [[nodiscard]] ExclusionCursor exclude(std::size_t other) const {
    ExclusionCursor next = *this;
    next.exclude_in_place(other);
    return next;
  }

  /// In-place variant for callers that own a scratch cursor.
  void exclude_in_place(std::size_t other) {
    if (other == table_->variable()) throw PreconditionError("cannot exclude the cursor's own variable");
    if (other >= table_->num_variables()) throw PreconditionError("variable index out of range");
    if (excluded_.contains(other)) throw PreconditionError("variable already excluded");
    valid_.and_not(table_->exclusion_row(other));
    excluded_ = excluded_.with(other);
  }

  /// The entry at the lowest admissible index.
  const ScoredParentSet& best() const {
    const std::size_t i = valid_.find_first();
    if (i == BitRow::npos) throw InternalError("exclusion cursor has no admissible entry");
    return (*table_)[i];
  }

 private:
  const ScoreTable* table_;
  BitRow valid_;
  VariableSet excluded_;
};

inline ExclusionCursor cursor_new(const ScoreTable& table) { return ExclusionCursor(table); }
inline ExclusionCursor cursor_exclude(const ExclusionCursor& c, std::size_t other) { return c.exclude(other); }
inline const ScoredParentSet& cursor_best(const ExclusionCursor& c) { return c.best(); }

/// BestScore(X, U) for order-graph arcs, answered through exclusion cursors.
///
/// Each query starts from a fresh cursor and excludes only the variables that both lie
/// outside U and occur in some retained parent set of X; the others have all-zero rows.
class ParentStore {
 public:
  explicit ParentStore(const ScoreTables& tables) : tables_(&tables) {}

  const ScoreTables& tables() const { return *tables_; }
  std::size_t num_variables() const { return tables_->size(); }

  const ScoredParentSet& best(std::size_t variable, VariableSet candidates) const {
    const ScoreTable& table = (*tables_)[variable];
    const VariableSet to_exclude = table.used_parents() - candidates;
    if (to_exclude.empty()) return table[0];
    ExclusionCursor cursor(table);
    for (std::size_t y : to_exclude) cursor.exclude_in_place(y);
    return cursor.best();
  }

  double best_score(std::size_t variable, VariableSet candidates) const { return best(variable, candidates).score; }

 private:
  const ScoreTables* tables_;
};

}  // namespace bnsl
