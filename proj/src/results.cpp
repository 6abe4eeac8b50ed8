#include "fairmatch/results.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fairmatch {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c != '"') {
        fields.back() += c;
      } else if (k + 1 < line.size() && line[k + 1] == '"') {
        fields.back() += '"';
        ++k;
      } else {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw std::invalid_argument("line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

std::optional<double> parse_cell(const std::string& s, std::size_t line_no) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_results_csv(std::ostream& os, const ResultTable& table) {
  os << kResultsHeader << '\n';
  for (const ResultRow& r : table.rows) {
    os << quote(r.sweep_axis) << ',' << quote(r.sweep_value) << ',' << quote(r.policy) << ','
       << quote(r.replication) << ',' << cell(r.max_mean_abs_wait) << ',' << cell(r.max_mean_rel_wait) << ','
       << cell(r.max_workload) << ',' << cell(r.censored) << ',' << cell(r.opt_ps) << ','
       << cell(r.opt_pt_local) << '\n';
  }
}

std::string results_to_csv(const ResultTable& table) {
  std::ostringstream os;
  write_results_csv(os, table);
  return os.str();
}

ResultTable read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kResultsHeader) {
    throw std::invalid_argument("results CSV must start with the fixed header");
  }
  ResultTable table;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_line(line, line_no);
    if (f.size() != 10) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 10 fields");
    }
    table.rows.push_back({f[0], f[1], f[2], f[3], parse_cell(f[4], line_no), parse_cell(f[5], line_no),
                          parse_cell(f[6], line_no), parse_cell(f[7], line_no), parse_cell(f[8], line_no),
                          parse_cell(f[9], line_no)});
  }
  return table;
}

ResultTable parse_results_csv(const std::string& text) {
  std::istringstream is(text);
  return read_results_csv(is);
}

}  // namespace fairmatch
