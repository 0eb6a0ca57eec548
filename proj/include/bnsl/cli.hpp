#pragma once

// Command-line front end: `score`, `learn` and `verify`. Kept in a header so the
// test suites can drive the same code path in-process.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "bnsl/dataset.hpp"
#include "bnsl/errors.hpp"
#include "bnsl/heuristics.hpp"
#include "bnsl/report.hpp"
#include "bnsl/scoring.hpp"
#include "bnsl/search.hpp"
#include "bnsl/verify.hpp"

namespace bnsl::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kInputError = 2,
  kFlagError = 3,
  kMemoryBudget = 4,
  kVerificationFailed = 5,
};

/// Environment variable holding the default memory budget in MiB.
inline constexpr const char* kMemBudgetEnv = "BNSL_MEM_BUDGET_MB";

struct DataFlags {
  std::string delimiter = ",";
  std::string missing = "?,";
  bool no_header = false;
  std::optional<int> max_parents;

  LoadOptions load_options() const {
    if (delimiter.size() != 1) throw ConfigError("--delimiter must be a single character");
    LoadOptions o;
    o.delimiter = delimiter[0];
    o.header = !no_header;
    o.missing_tokens.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = missing.find(',', start);
      o.missing_tokens.insert(missing.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return o;
  }
};

/// Scores loaded from a score file, or computed from a data file.
struct Problem {
  ScoreTables tables;
  std::optional<Dataset> data;
};

/// True when the first non-blank line looks like a score-file header ("n <count>").
inline bool looks_like_score_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string word;
    std::size_t count = 0;
    std::string rest;
    return (ls >> word) && word == "n" && (ls >> count) && !(ls >> rest);
  }
  return false;
}

inline int resolve_limit(std::size_t records, const std::optional<int>& max_parents) {
  const int limit = parent_limit(records);
  if (!max_parents) return limit;
  if (*max_parents < 0) throw ConfigError("--max-parents must be non-negative");
  if (*max_parents > limit) {
    throw ConfigError("--max-parents " + std::to_string(*max_parents) + " exceeds the limit of " + std::to_string(limit) +
                      " for " + std::to_string(records) + " records; it can only be lowered");
  }
  return *max_parents;
}

inline Problem load_problem(const std::string& path, const DataFlags& flags) {
  Problem p;
  if (looks_like_score_file(path)) {
    if (flags.max_parents) throw ConfigError("--max-parents applies to data files, not score files");
    p.tables = load_score_file(path);
    return p;
  }
  p.data = load_dataset(path, flags.load_options());
  const int limit = resolve_limit(p.data->num_records(), flags.max_parents);
  p.tables = build_score_tables(*p.data, limit);
  return p;
}

inline std::size_t default_memory_budget() {
  if (const char* env = std::getenv(kMemBudgetEnv)) {
    try {
      return static_cast<std::size_t>(std::stoull(env)) << 20;
    } catch (const std::exception&) {
      throw ConfigError(std::string(kMemBudgetEnv) + " must be a whole number of MiB");
    }
  }
  return kDefaultMemoryBudget;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

struct LearnFlags {
  std::string input;
  DataFlags data;
  std::string algorithm = "astar";
  std::string heuristic = "static";
  int k = 3;
  std::string groups = "auto";
  std::uint64_t seed = 42;
  int restarts = 8;
  std::optional<std::size_t> mem_budget_mb;
  std::optional<std::size_t> group_cap;
  std::string out;
  std::string dot;
  bool timings = false;
  bool k_given = false;
  bool groups_given = false;
};

inline int cmd_learn(const LearnFlags& f, std::ostream& out, std::ostream& err) {
  if (f.k_given && f.heuristic != "dynamic") throw ConfigError("--k requires --heuristic dynamic");
  if (f.groups_given && f.heuristic != "static") throw ConfigError("--groups requires --heuristic static");
  if (f.algorithm == "dp" && (f.k_given || f.groups_given)) throw ConfigError("--algorithm dp takes no heuristic options");
  if (f.restarts < 1) throw ConfigError("--restarts must be at least 1");
  const std::size_t budget = f.mem_budget_mb ? (*f.mem_budget_mb << 20) : default_memory_budget();

  Problem problem = load_problem(f.input, f.data);
  const ScoreTables& tables = problem.tables;
  const std::size_t n = tables.size();

  RunReport report;
  report.num_variables = n;
  report.num_records = tables.num_records;
  report.parent_limit = tables.limit;
  report.algorithm = f.algorithm;
  report.heuristic = f.algorithm == "dp" ? "none" : f.heuristic;
  report.seed = f.seed;
  report.restarts = f.restarts;
  report.names = tables.names;
  report.include_timings = f.timings;
  if (tables.limit) err << "parent limit: " << *tables.limit << '\n';

  const SearchOptions options{budget, true};
  const auto run = [&](const auto& heuristic) {
    if (f.algorithm == "astar") return astar(tables, heuristic, options);
    const LearnedNetwork incumbent = initial_upper_bound(tables, f.seed, f.restarts);
    report.initial_upper_bound = incumbent.total_score;
    return bfbnb(tables, heuristic, incumbent, options);
  };

  try {
    if (f.algorithm == "dp") {
      const auto started = std::chrono::steady_clock::now();
      auto [net, score] = dp_oracle(tables);
      report.network = std::move(net);
      report.network.total_score = score;
      report.stats.distinct_nodes = std::size_t{1} << n;
      report.stats.search_time = std::chrono::steady_clock::now() - started;
    } else {
      const auto started = std::chrono::steady_clock::now();
      using AnyHeuristic = std::variant<SimpleHeuristic, DynamicHeuristic, StaticHeuristic>;
      std::optional<AnyHeuristic> heuristic;
      if (f.heuristic == "simple") {
        heuristic.emplace(std::in_place_type<SimpleHeuristic>, tables);
      } else if (f.heuristic == "dynamic") {
        heuristic.emplace(std::in_place_type<DynamicHeuristic>, tables, f.k);
        report.k = f.k;
      } else {
        const Grouping grouping = parse_grouping(f.groups, n);
        heuristic.emplace(std::in_place_type<StaticHeuristic>, tables, grouping, f.group_cap.value_or(kDefaultGroupSizeCap));
        report.groups = format_grouping(grouping);
      }
      const auto pdb_time = std::chrono::steady_clock::now() - started;
      SearchResult result = std::visit(run, *heuristic);
      report.pdb_size = std::visit([](const auto& h) { return h.pattern_count(); }, *heuristic);
      report.network = std::move(result.network);
      report.stats = result.stats;
      report.stats.pdb_build_time = pdb_time;
    }
  } catch (const MemoryBudgetExceeded& e) {
    report.stats = e.stats;
    nlohmann::ordered_json partial;
    partial["error"] = e.what();
    partial["stats"] = {{"nodes_expanded", e.stats.nodes_expanded},
                        {"nodes_generated", e.stats.nodes_generated},
                        {"distinct_nodes", e.stats.distinct_nodes},
                        {"peak_open", e.stats.peak_open}};
    err << partial.dump(2) << '\n';
    return kMemoryBudget;
  }

  const std::string json_text = to_json(report).dump(2) + "\n";
  if (f.out.empty() || f.out == "-") {
    out << json_text;
  } else {
    write_text(f.out, json_text);
  }
  if (!f.dot.empty()) write_text(f.dot, emit_dot(report.network, report.names));
  return kSuccess;
}

inline int cmd_score(const std::string& input, const std::string& output, const DataFlags& flags, std::ostream& out,
                     std::ostream& err) {
  const Dataset data = load_dataset(input, flags.load_options());
  const int limit = resolve_limit(data.num_records(), flags.max_parents);
  const ScoreTables tables = build_score_tables(data, limit);
  err << "parent limit: " << limit << '\n';
  if (output.empty() || output == "-") {
    write_score_file(out, tables);
  } else {
    save_score_file(output, tables);
  }
  return kSuccess;
}

inline int cmd_verify(const std::string& input, const DataFlags& flags, std::size_t max_n, std::ostream& out) {
  Problem problem = load_problem(input, flags);
  VerifyOptions options;
  options.max_variables = max_n;
  const auto results = run_exhaustive_checks(problem.tables, problem.data ? &*problem.data : nullptr, options);
  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.cases << " cases)";
    if (!r.passed) out << ": " << r.counterexample;
    out << '\n';
    ok = ok && r.passed;
  }
  return ok ? kSuccess : kVerificationFailed;
}

inline void add_data_flags(CLI::App& cmd, DataFlags& flags) {
  cmd.add_option("--delimiter", flags.delimiter, "Field delimiter for data files")->capture_default_str();
  cmd.add_option("--missing", flags.missing, "Comma-separated tokens treated as missing (empty item = blank cell)")
      ->capture_default_str();
  cmd.add_flag("--no-header", flags.no_header, "Data file has no header row; names become X1..Xn");
  cmd.add_option("--max-parents", flags.max_parents, "Lower the parent-set size limit");
}

/// Parses argv and runs one command. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Exact Bayesian network structure learning by order-graph search", "bnsl"};
  app.require_subcommand(1);

  std::string score_input, score_output;
  DataFlags score_flags;
  CLI::App* score = app.add_subcommand("score", "Compute pruned MDL score lists for a data file");
  score->add_option("input", score_input, "Data file")->required();
  score->add_option("-o,--output", score_output, "Score file to write (default: stdout)");
  add_data_flags(*score, score_flags);

  LearnFlags learn_flags;
  CLI::App* learn = app.add_subcommand("learn", "Learn an optimal network from a data or score file");
  learn->add_option("input", learn_flags.input, "Data file or score file")->required();
  add_data_flags(*learn, learn_flags.data);
  learn->add_option("--algorithm", learn_flags.algorithm, "astar | bfbnb | dp")
      ->check(CLI::IsMember({"astar", "bfbnb", "dp"}))
      ->capture_default_str();
  learn->add_option("--heuristic", learn_flags.heuristic, "simple | dynamic | static")
      ->check(CLI::IsMember({"simple", "dynamic", "static"}))
      ->capture_default_str();
  CLI::Option* k_opt = learn->add_option("--k", learn_flags.k, "Largest pattern size for the dynamic database")->capture_default_str();
  CLI::Option* groups_opt =
      learn->add_option("--groups", learn_flags.groups, "Static grouping, e.g. 1-4,5-8 (1-based) or auto")->capture_default_str();
  learn->add_option("--seed", learn_flags.seed, "Seed for the local-search upper bound")->capture_default_str();
  learn->add_option("--restarts", learn_flags.restarts, "Local-search restarts")->capture_default_str();
  learn->add_option("--mem-budget", learn_flags.mem_budget_mb, std::string("Memory budget in MiB (default: $") + kMemBudgetEnv + " or 4096)");
  learn->add_option("--group-cap", learn_flags.group_cap, "Largest static group size");
  learn->add_option("--out", learn_flags.out, "JSON report path (default: stdout)");
  learn->add_option("--dot", learn_flags.dot, "Write the network as Graphviz DOT");
  learn->add_flag("--timings", learn_flags.timings, "Include wall-clock times in the report");

  std::string verify_input;
  DataFlags verify_flags;
  std::size_t max_n = 10;
  CLI::App* verify = app.add_subcommand("verify", "Run the exhaustive property checks on a small problem");
  verify->add_option("input", verify_input, "Data file or score file")->required();
  verify->add_option("--max-n", max_n, "Refuse problems with more variables than this")->capture_default_str();
  add_data_flags(*verify, verify_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kFlagError;
  }

  try {
    if (*score) return cmd_score(score_input, score_output, score_flags, out, err);
    if (*learn) {
      learn_flags.k_given = k_opt->count() > 0;
      learn_flags.groups_given = groups_opt->count() > 0;
      return cmd_learn(learn_flags, out, err);
    }
    return cmd_verify(verify_input, verify_flags, max_n, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kFlagError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace bnsl::cli
