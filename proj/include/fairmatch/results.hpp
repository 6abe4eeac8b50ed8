#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fairmatch {

inline constexpr const char* kResultsHeader =
    "sweep_axis,sweep_value,policy,replication,max_mean_abs_wait,max_mean_rel_wait,max_workload,"
    "censored,opt_ps,opt_pt_local";

/// Replication labels besides the 1-based run numbers.
inline constexpr const char* kAggregateMean = "aggregate_mean";
inline constexpr const char* kAggregateCi95 = "aggregate_ci95";
inline constexpr const char* kInfeasible = "infeasible";

/// One CSV line. Empty cells are std::nullopt.
struct ResultRow {
  std::string sweep_axis;
  std::string sweep_value;
  std::string policy;
  std::string replication;
  std::optional<double> max_mean_abs_wait;
  std::optional<double> max_mean_rel_wait;
  std::optional<double> max_workload;
  std::optional<double> censored;
  std::optional<double> opt_ps;
  std::optional<double> opt_pt_local;

  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  bool operator==(const ResultTable&) const = default;
};

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

/// Header plus one line per row. Numbers are written in shortest round-trip
/// form, so read_results_csv(write) reproduces the table exactly.
void write_results_csv(std::ostream& os, const ResultTable& table);
std::string results_to_csv(const ResultTable& table);

/// Throws std::invalid_argument on a wrong header or malformed line.
ResultTable read_results_csv(std::istream& is);
ResultTable parse_results_csv(const std::string& text);

}  // namespace fairmatch
