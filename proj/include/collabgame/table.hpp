#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "collabgame/dataset.hpp"

namespace collabgame {

/// Column-oriented view of a dataset used by the model and summary code.
/// Numeric columns may hold missing entries; categorical columns are strings.
class DataTable {
 public:
  using NumericColumn = std::vector<std::optional<double>>;
  using CategoricalColumn = std::vector<std::string>;

  explicit DataTable(std::size_t rows = 0) : rows_(rows) {}

  std::size_t rows() const { return rows_; }

  void add_numeric(const std::string& name, NumericColumn values) {
    check_new(name, values.size());
    numeric_.emplace(name, std::move(values));
    order_.push_back(name);
  }

  void add_categorical(const std::string& name, CategoricalColumn values) {
    check_new(name, values.size());
    categorical_.emplace(name, std::move(values));
    order_.push_back(name);
  }

  bool has(const std::string& name) const { return numeric_.count(name) || categorical_.count(name); }
  bool is_numeric(const std::string& name) const { return numeric_.count(name) > 0; }
  bool is_categorical(const std::string& name) const { return categorical_.count(name) > 0; }

  const NumericColumn& numeric(const std::string& name) const {
    auto it = numeric_.find(name);
    if (it == numeric_.end()) throw Error(ErrorKind::usage, unknown(name, "numeric"));
    return it->second;
  }

  const CategoricalColumn& categorical(const std::string& name) const {
    auto it = categorical_.find(name);
    if (it == categorical_.end()) throw Error(ErrorKind::usage, unknown(name, "categorical"));
    return it->second;
  }

  /// Column names in insertion order.
  const std::vector<std::string>& columns() const { return order_; }

  std::string column_list() const {
    std::string s;
    for (const auto& c : order_) s += (s.empty() ? "" : ", ") + c;
    return s;
  }

 private:
  void check_new(const std::string& name, std::size_t size) {
    if (has(name)) throw Error(ErrorKind::usage, "column '" + name + "' already exists");
    if (order_.empty() && rows_ == 0) rows_ = size;
    if (size != rows_) {
      throw Error(ErrorKind::dimension, "column '" + name + "' has " + std::to_string(size) + " rows, table has " +
                                            std::to_string(rows_));
    }
  }

  std::string unknown(const std::string& name, const char* kind) const {
    return "unknown " + std::string(kind) + " column '" + name + "'; valid columns: " + column_list();
  }

  std::size_t rows_;
  std::map<std::string, NumericColumn> numeric_;
  std::map<std::string, CategoricalColumn> categorical_;
  std::vector<std::string> order_;
};

inline const std::vector<std::string>& continuous_variables() {
  static const std::vector<std::string> v = {"observed_contribution", "peer_contribution_score", "content_engaging",
                                             "background", "fits_needs", "opinion_before", "post_quiz",
                                             "group_grade", "learning_outcome"};
  return v;
}

/// Numeric columns for every measured field plus categorical personality_type, learning_style,
/// session_id, team_id and `team` (session-qualified team key used as the grouping factor).
inline DataTable to_table(const SessionDataset& data) {
  const auto& recs = data.records();
  DataTable t(recs.size());
  auto num = [&](auto getter) {
    DataTable::NumericColumn col;
    col.reserve(recs.size());
    for (const auto& r : recs) {
      const auto v = getter(r);
      col.push_back(v ? std::optional<double>(static_cast<double>(*v)) : std::nullopt);
    }
    return col;
  };
  auto cat = [&](auto getter) {
    DataTable::CategoricalColumn col;
    col.reserve(recs.size());
    for (const auto& r : recs) col.push_back(getter(r));
    return col;
  };
  t.add_categorical("student_id", cat([](const StudentRecord& r) { return r.student_id; }));
  t.add_categorical("session_id", cat([](const StudentRecord& r) { return r.session_id; }));
  t.add_categorical("team_id", cat([](const StudentRecord& r) { return r.team_id; }));
  t.add_categorical("team", cat([](const StudentRecord& r) { return r.team_key(); }));
  t.add_categorical("personality_type", cat([](const StudentRecord& r) { return r.personality_type; }));
  t.add_categorical("learning_style", cat([](const StudentRecord& r) { return r.learning_style; }));
  t.add_numeric("observed_contribution", num([](const StudentRecord& r) { return r.observed_contribution; }));
  t.add_numeric("peer_contribution_score", num([](const StudentRecord& r) { return r.peer_contribution_score; }));
  t.add_numeric("content_engaging", num([](const StudentRecord& r) { return r.content_engaging; }));
  t.add_numeric("background", num([](const StudentRecord& r) { return r.background; }));
  t.add_numeric("fits_needs", num([](const StudentRecord& r) { return r.fits_needs; }));
  t.add_numeric("opinion_before", num([](const StudentRecord& r) { return r.opinion_before; }));
  t.add_numeric("post_quiz", num([](const StudentRecord& r) { return r.post_quiz; }));
  t.add_numeric("group_grade", num([](const StudentRecord& r) { return r.group_grade; }));
  t.add_numeric("learning_outcome", num([](const StudentRecord& r) { return r.learning_outcome; }));
  return t;
}

}  // namespace collabgame
