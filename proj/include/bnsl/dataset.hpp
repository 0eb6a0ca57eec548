#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bnsl/errors.hpp"
#include "bnsl/variable_set.hpp"

namespace bnsl {

/// Delimited text as read from disk, before cleaning. Absent cells are missing values.
struct RawTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<std::optional<std::string>>> rows;

  std::size_t num_columns() const { return column_names.size(); }
};

/// Discretized, complete records. Each value is an index below the variable's arity.
struct Dataset {
  std::vector<std::string> names;
  std::vector<int> arity;
  std::vector<std::uint8_t> values;  // row-major, num_records() x num_variables()

  std::size_t num_variables() const { return names.size(); }
  std::size_t num_records() const { return names.empty() ? 0 : values.size() / names.size(); }
  int at(std::size_t row, std::size_t var) const { return values[row * names.size() + var]; }
};

struct LoadOptions {
  char delimiter = ',';
  std::set<std::string> missing_tokens = {"?", ""};
  bool header = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  std::size_t b = 0;
  while (b < s.size() && !not_space(s[b])) ++b;
  std::size_t e = s.size();
  while (e > b && !not_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split(std::string_view line, char delimiter) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    cells.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

inline std::optional<double> parse_number(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
  return value;
}

}  // namespace detail

/// Parses delimited text. Tokens listed in options.missing_tokens become absent cells.
/// Blank lines are skipped. Throws InputError on a ragged row, naming the 1-based data row.
inline RawTable parse_delimited(std::istream& in, const LoadOptions& options = {}) {
  RawTable table;
  std::string line;
  std::size_t data_row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto tokens = detail::split(line, options.delimiter);
    if (!have_header) {
      have_header = true;
      if (options.header) {
        table.column_names = std::move(tokens);
        continue;
      }
      for (std::size_t i = 0; i < tokens.size(); ++i) table.column_names.push_back("X" + std::to_string(i + 1));
    }
    ++data_row;
    if (tokens.size() != table.column_names.size()) {
      throw InputError("row " + std::to_string(data_row) + " has " + std::to_string(tokens.size()) +
                       " cells, expected " + std::to_string(table.column_names.size()));
    }
    std::vector<std::optional<std::string>> row;
    row.reserve(tokens.size());
    for (auto& t : tokens) {
      if (options.missing_tokens.contains(t)) {
        row.emplace_back(std::nullopt);
      } else {
        row.emplace_back(std::move(t));
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw InputError("no header or data rows found");
  return table;
}

inline RawTable load_delimited(const std::string& path, const LoadOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return parse_delimited(in, options);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

/// Keeps only rows without absent cells, in their original order.
inline RawTable drop_incomplete(const RawTable& raw) {
  RawTable out;
  out.column_names = raw.column_names;
  for (const auto& row : raw.rows) {
    bool complete = true;
    for (const auto& cell : row) complete = complete && cell.has_value();
    if (complete) out.rows.push_back(row);
  }
  if (out.rows.empty()) throw InputError("dataset is empty after removing incomplete records");
  return out;
}

/// Numeric columns become binary around their mean (values equal to the mean map to 1).
/// Other columns are coded by first appearance of each distinct token.
inline Dataset binarize_mean(const RawTable& raw) {
  const std::size_t n = raw.num_columns();
  const std::size_t rows = raw.rows.size();
  if (n == 0) throw InputError("table has no columns");
  if (n > kMaxVariables) throw InputError("at most 64 variables are supported, got " + std::to_string(n));
  if (rows == 0) throw InputError("table has no rows");

  Dataset data;
  data.names = raw.column_names;
  data.arity.assign(n, 0);
  data.values.assign(rows * n, 0);

  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> numbers;
    numbers.reserve(rows);
    bool numeric = true;
    for (const auto& row : raw.rows) {
      if (!row[c]) throw PreconditionError("binarize_mean requires complete rows");
      const auto v = detail::parse_number(*row[c]);
      if (!v) {
        numeric = false;
        break;
      }
      numbers.push_back(*v);
    }

    if (numeric) {
      double sum = 0.0;
      for (double v : numbers) sum += v;
      const double mean = sum / static_cast<double>(rows);
      bool seen[2] = {false, false};
      for (std::size_t r = 0; r < rows; ++r) {
        const int code = numbers[r] < mean ? 0 : 1;
        seen[code] = true;
        data.values[r * n + c] = static_cast<std::uint8_t>(code);
      }
      data.arity[c] = static_cast<int>(seen[0]) + static_cast<int>(seen[1]);
    } else {
      std::unordered_map<std::string, int> codes;
      for (std::size_t r = 0; r < rows; ++r) {
        const auto [it, inserted] = codes.try_emplace(*raw.rows[r][c], static_cast<int>(codes.size()));
        if (codes.size() > 255) throw InputError("column '" + data.names[c] + "' has more than 255 categories");
        data.values[r * n + c] = static_cast<std::uint8_t>(it->second);
      }
      data.arity[c] = static_cast<int>(codes.size());
    }
    if (data.arity[c] < 2) throw InputError("column '" + data.names[c] + "' is constant");
  }
  return data;
}

/// Convenience: load, drop incomplete records, binarize.
inline Dataset load_dataset(const std::string& path, const LoadOptions& options = {}) {
  return binarize_mean(drop_incomplete(load_delimited(path, options)));
}

/// Joint counts N(x, pa). Cells are indexed as `config * arity[variable] + x`, where `config`
/// is the mixed-radix index of the parent values with the lowest parent index varying fastest.
struct Contingency {
  std::size_t variable = 0;
  VariableSet parents;
  int child_arity = 0;
  std::size_t parent_configs = 0;
  std::vector<std::uint32_t> cells;

  std::uint32_t at(std::size_t config, int x) const { return cells[config * child_arity + x]; }
};

/// Default guard on the contingency-table size.
inline constexpr std::size_t kDefaultCellLimit = std::size_t{1} << 26;

inline Contingency counts(const Dataset& data, std::size_t variable, VariableSet parents,
                          std::size_t cell_limit = kDefaultCellLimit) {
  const std::size_t n = data.num_variables();
  if (variable >= n) throw PreconditionError("variable index out of range");
  if (!parents.subset_of(VariableSet::full(n))) throw PreconditionError("parent index out of range");
  if (parents.contains(variable)) throw PreconditionError("variable cannot be its own parent");

  Contingency table;
  table.variable = variable;
  table.parents = parents;
  table.child_arity = data.arity[variable];

  std::vector<std::size_t> stride;
  std::size_t configs = 1;
  for (std::size_t p : parents) {
    stride.push_back(configs);
    const auto r = static_cast<std::size_t>(data.arity[p]);
    if (configs > cell_limit / r) throw InputError("contingency table exceeds the cell limit");
    configs *= r;
  }
  if (configs > cell_limit / static_cast<std::size_t>(table.child_arity)) {
    throw InputError("contingency table exceeds the cell limit");
  }
  table.parent_configs = configs;
  table.cells.assign(configs * static_cast<std::size_t>(table.child_arity), 0);

  const std::size_t rows = data.num_records();
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t config = 0;
    std::size_t i = 0;
    for (std::size_t p : parents) config += stride[i++] * static_cast<std::size_t>(data.at(r, p));
    ++table.cells[config * table.child_arity + data.at(r, variable)];
  }
  return table;
}

}  // namespace bnsl
