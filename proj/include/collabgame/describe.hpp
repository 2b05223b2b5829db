#pragma once

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "collabgame/csv.hpp"
#include "collabgame/table.hpp"

namespace collabgame {

struct VariableStats {
  std::string name;
  std::size_t count = 0;
  std::optional<double> mean;
  std::optional<double> sd;  // sample SD (divisor n-1); absent when count < 2

  friend bool operator==(const VariableStats&, const VariableStats&) = default;
};

struct DescriptiveReport {
  std::size_t records = 0;
  std::size_t groups = 0;
  std::map<int, int> group_sizes;  // team size -> number of teams
  std::vector<VariableStats> continuous;
  std::map<std::string, std::map<std::string, int>> categorical;  // variable -> level -> count

  friend bool operator==(const DescriptiveReport&, const DescriptiveReport&) = default;
};

inline VariableStats summarize(const std::string& name, const DataTable::NumericColumn& col) {
  VariableStats s{name, 0, std::nullopt, std::nullopt};
  double sum = 0.0;
  for (const auto& v : col) {
    if (!v) continue;
    ++s.count;
    sum += *v;
  }
  if (s.count == 0) return s;
  const double mean = sum / static_cast<double>(s.count);
  s.mean = mean;
  if (s.count > 1) {
    double ss = 0.0;
    for (const auto& v : col) {
      if (v) ss += (*v - mean) * (*v - mean);
    }
    s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

/// Means/SDs of the continuous variables, level counts of the categorical ones and the
/// team-size histogram.
inline DescriptiveReport describe(const SessionDataset& data) {
  if (data.size() == 0) throw Error(ErrorKind::empty_input, "cannot describe an empty dataset");
  const DataTable t = to_table(data);
  DescriptiveReport rep;
  rep.records = data.size();
  const auto teams = data.teams();
  rep.groups = teams.size();
  for (const auto& [key, members] : teams) ++rep.group_sizes[static_cast<int>(members.size())];
  for (const auto& name : continuous_variables()) rep.continuous.push_back(summarize(name, t.numeric(name)));
  for (const char* name : {"personality_type", "learning_style"}) {
    auto& counts = rep.categorical[name];
    for (const auto& level : t.categorical(name)) ++counts[level];
  }
  return rep;
}

inline nlohmann::json to_json(const DescriptiveReport& r) {
  nlohmann::json sizes = nlohmann::json::object();
  for (auto [size, count] : r.group_sizes) sizes[std::to_string(size)] = count;
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : r.continuous) {
    vars.push_back({{"variable", v.name},
                    {"n", v.count},
                    {"mean", v.mean ? nlohmann::json(*v.mean) : nlohmann::json(nullptr)},
                    {"sd", v.sd ? nlohmann::json(*v.sd) : nlohmann::json(nullptr)}});
  }
  return {{"records", r.records},
          {"groups", r.groups},
          {"group_sizes", sizes},
          {"continuous", vars},
          {"categorical", r.categorical}};
}

inline DescriptiveReport descriptive_from_json(const nlohmann::json& j) {
  DescriptiveReport r;
  r.records = j.at("records").get<std::size_t>();
  r.groups = j.at("groups").get<std::size_t>();
  for (const auto& [k, v] : j.at("group_sizes").items()) r.group_sizes[std::stoi(k)] = v.get<int>();
  for (const auto& v : j.at("continuous")) {
    VariableStats s;
    s.name = v.at("variable").get<std::string>();
    s.count = v.at("n").get<std::size_t>();
    if (!v.at("mean").is_null()) s.mean = v["mean"].get<double>();
    if (!v.at("sd").is_null()) s.sd = v["sd"].get<double>();
    r.continuous.push_back(s);
  }
  r.categorical = j.at("categorical").get<std::map<std::string, std::map<std::string, int>>>();
  return r;
}

inline void print(std::ostream& os, const DescriptiveReport& r) {
  os << "records: " << r.records << "\ngroups: " << r.groups << "\ngroup sizes:";
  for (auto [size, count] : r.group_sizes) os << ' ' << size << ':' << count;
  auto cell = [](const std::optional<double>& v) {
    char buf[32];
    if (v) std::snprintf(buf, sizeof buf, "%.4f", *v);
    else std::snprintf(buf, sizeof buf, "-");
    return std::string(buf);
  };
  os << "\n\nvariable                   n      mean        sd\n";
  for (const auto& v : r.continuous) {
    char line[128];
    std::snprintf(line, sizeof line, "%-24s %3zu  %8s  %8s\n", v.name.c_str(), v.count, cell(v.mean).c_str(),
                  cell(v.sd).c_str());
    os << line;
  }
  for (const auto& [var, levels] : r.categorical) {
    os << '\n' << var << ":";
    for (const auto& [level, count] : levels) os << ' ' << level << '=' << count;
  }
  os << '\n';
}

// ---------------------------------------------------------------------------------------------

struct GroupSummaryRow {
  std::string group;  // grouping variable name
  std::string level;
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

/// Quantile by linear interpolation between order statistics at position (n - 1) p.
inline double interpolated_quantile(const std::vector<double>& sorted, double p) {
  const double pos = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Five-number summaries of a numeric column per level of personality_type, learning_style or team.
/// Levels are listed in lexicographic order; missing values are skipped.
inline std::vector<GroupSummaryRow> emit_group_summaries(const DataTable& table, const std::string& by,
                                                         const std::string& variable) {
  if (by != "personality_type" && by != "learning_style" && by != "team") {
    throw Error(ErrorKind::usage, "cannot group by '" + by + "' (expected personality_type, learning_style or team)");
  }
  if (!table.is_numeric(variable)) {
    throw Error(ErrorKind::usage, "'" + variable + "' is not a continuous column; valid columns: " + table.column_list());
  }
  const auto& keys = table.categorical(by);
  const auto& col = table.numeric(variable);
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (col[i]) groups[keys[i]].push_back(*col[i]);
  }
  std::vector<GroupSummaryRow> rows;
  for (auto& [level, values] : groups) {
    std::sort(values.begin(), values.end());
    rows.push_back({by, level, values.size(), values.front(), interpolated_quantile(values, 0.25),
                    interpolated_quantile(values, 0.5), interpolated_quantile(values, 0.75), values.back()});
  }
  return rows;
}

inline std::vector<GroupSummaryRow> emit_group_summaries(const SessionDataset& data, const std::string& by,
                                                         const std::string& variable) {
  return emit_group_summaries(to_table(data), by, variable);
}

inline void write_summaries_csv(std::ostream& os, const std::vector<GroupSummaryRow>& rows) {
  os << "group,level,count,min,q1,median,q3,max\n";
  for (const auto& r : rows) {
    os << csv::quote(r.group) << ',' << csv::quote(r.level) << ',' << r.count << ',' << csv::format_double(r.min)
       << ',' << csv::format_double(r.q1) << ',' << csv::format_double(r.median) << ','
       << csv::format_double(r.q3) << ',' << csv::format_double(r.max) << '\n';
  }
}

}  // namespace collabgame
