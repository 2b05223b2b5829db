#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "collabgame/csv.hpp"
#include "collabgame/error.hpp"

namespace collabgame {

inline constexpr std::array<std::string_view, 16> kPersonalityTypes = {
    "ENFJ", "ENFP", "ENTJ", "ENTP", "ESFJ", "ESFP", "ESTJ", "ESTP",
    "INFJ", "INFP", "INTJ", "INTP", "ISFJ", "ISFP", "ISTJ", "ISTP"};

inline constexpr std::array<std::string_view, 4> kLearningStyles = {"Activist", "Pragmatist", "Reflector", "Theorist"};

inline constexpr int kMinTeamSize = 2;
inline constexpr int kMaxTeamSize = 4;

/// One student in one session. Measured fields are optional so that incomplete rows can be
/// represented; operations that need a field reject records where it is absent.
struct StudentRecord {
  std::string student_id;
  std::string team_id;
  std::string session_id;
  std::string personality_type;
  std::string learning_style;
  std::optional<int> content_engaging;  // ordinal 1..5
  std::optional<int> background;        // ordinal 1..5
  std::optional<int> fits_needs;        // ordinal 1..5
  std::optional<double> observed_contribution;
  std::optional<double> peer_contribution_score;
  std::optional<int> opinion_before;  // ordinal 1..5
  std::optional<double> post_quiz;
  std::optional<double> group_grade;
  std::optional<double> learning_outcome;  // post_quiz - background, see derive_outcomes

  /// Teams are identified within a session.
  std::string team_key() const { return session_id + "/" + team_id; }

  friend bool operator==(const StudentRecord&, const StudentRecord&) = default;
};

struct RatingKey {
  std::string session_id;
  std::string rater_id;
  std::string ratee_id;

  friend auto operator<=>(const RatingKey&, const RatingKey&) = default;
  friend bool operator==(const RatingKey&, const RatingKey&) = default;
};

using RatingMatrix = std::map<RatingKey, double>;

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "student_id",      "team_id",           "session_id",           "personality_type", "learning_style",
      "content_engaging", "background",       "fits_needs",           "observed_contribution",
      "peer_contribution_score", "opinion_before", "post_quiz",       "group_grade"};
  return cols;
}

inline const std::vector<std::string>& rating_columns() {
  static const std::vector<std::string> cols = {"session_id", "rater_id", "ratee_id", "score"};
  return cols;
}

/// Validated collection of records and peer ratings.
class SessionDataset {
 public:
  SessionDataset() = default;

  /// Validates every invariant and throws a ValidationError listing each violation.
  SessionDataset(std::vector<StudentRecord> records, RatingMatrix ratings)
      : records_(std::move(records)), ratings_(std::move(ratings)) {
    auto issues = check();
    if (!issues.empty()) throw ValidationError(issues.front().first, strings(issues));
  }

  const std::vector<StudentRecord>& records() const { return records_; }
  const RatingMatrix& ratings() const { return ratings_; }
  std::size_t size() const { return records_.size(); }

  std::optional<double> rating(const std::string& session, const std::string& rater, const std::string& ratee) const {
    auto it = ratings_.find({session, rater, ratee});
    if (it == ratings_.end()) return std::nullopt;
    return it->second;
  }

  /// Record indices per team key, in first-appearance order within each team; keys sorted.
  std::map<std::string, std::vector<std::size_t>> teams() const {
    std::map<std::string, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < records_.size(); ++i) out[records_[i].team_key()].push_back(i);
    return out;
  }

  /// Copy with a replaced record list; revalidated.
  SessionDataset with_records(std::vector<StudentRecord> records) const {
    return SessionDataset(std::move(records), ratings_);
  }

  friend bool operator==(const SessionDataset&, const SessionDataset&) = default;

 private:
  using Issue = std::pair<ErrorKind, std::string>;

  static std::vector<std::string> strings(const std::vector<Issue>& issues) {
    std::vector<std::string> out;
    for (const auto& [k, s] : issues) out.push_back(s);
    return out;
  }

  std::vector<Issue> check() const {
    std::vector<Issue> issues;
    auto where = [](std::size_t i) { return "record " + std::to_string(i + 1); };
    auto ordinal = [&](std::size_t i, const char* name, const std::optional<int>& v) {
      if (v && (*v < 1 || *v > 5)) {
        issues.emplace_back(ErrorKind::range, where(i) + ": " + name + " = " + std::to_string(*v) + " outside 1..5");
      }
    };
    auto real = [&](std::size_t i, const char* name, const std::optional<double>& v, double lo, double hi) {
      if (v && !(std::isfinite(*v) && *v >= lo && *v <= hi)) {
        issues.emplace_back(ErrorKind::range, where(i) + ": " + name + " = " + csv::format_double(*v) + " outside " +
                                                  csv::format_double(lo) + ".." + csv::format_double(hi));
      }
    };

    std::set<std::pair<std::string, std::string>> keys;
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (r.student_id.empty() || r.team_id.empty() || r.session_id.empty()) {
        issues.emplace_back(ErrorKind::parse, where(i) + ": student_id, team_id and session_id are required");
      }
      if (!keys.insert({r.student_id, r.session_id}).second) {
        issues.emplace_back(ErrorKind::duplicate_key,
                            where(i) + ": duplicate student " + r.student_id + " in session " + r.session_id);
      }
      if (std::find(kPersonalityTypes.begin(), kPersonalityTypes.end(), r.personality_type) == kPersonalityTypes.end()) {
        issues.emplace_back(ErrorKind::range, where(i) + ": unknown personality_type '" + r.personality_type + "'");
      }
      if (std::find(kLearningStyles.begin(), kLearningStyles.end(), r.learning_style) == kLearningStyles.end()) {
        issues.emplace_back(ErrorKind::range, where(i) + ": unknown learning_style '" + r.learning_style + "'");
      }
      ordinal(i, "content_engaging", r.content_engaging);
      ordinal(i, "background", r.background);
      ordinal(i, "fits_needs", r.fits_needs);
      ordinal(i, "opinion_before", r.opinion_before);
      real(i, "observed_contribution", r.observed_contribution, 0.0, 5.0);
      real(i, "peer_contribution_score", r.peer_contribution_score, 0.0, 5.0);
      real(i, "post_quiz", r.post_quiz, 0.0, 5.0);
      real(i, "group_grade", r.group_grade, 0.0, 5.0);
      real(i, "learning_outcome", r.learning_outcome, -5.0, 5.0);
    }

    const auto team_map = teams();
    std::map<std::pair<std::string, std::string>, std::string> team_of;  // (session, student) -> team key
    for (const auto& [key, members] : team_map) {
      const int size = static_cast<int>(members.size());
      if (size < kMinTeamSize || size > kMaxTeamSize) {
        issues.emplace_back(ErrorKind::team_size, "team " + key + " (first at " + where(members.front()) + ") has " +
                                                      std::to_string(size) + " members, expected 2..4");
      }
      for (auto m : members) team_of[{records_[m].session_id, records_[m].student_id}] = key;
    }

    for (const auto& [k, score] : ratings_) {
      const std::string tag = "rating " + k.session_id + " " + k.rater_id + "->" + k.ratee_id;
      if (!(std::isfinite(score) && score >= 0.0 && score <= 5.0)) {
        issues.emplace_back(ErrorKind::range, tag + ": score " + csv::format_double(score) + " outside 0..5");
      }
      auto a = team_of.find({k.session_id, k.rater_id});
      auto b = team_of.find({k.session_id, k.ratee_id});
      if (a == team_of.end() || b == team_of.end()) {
        issues.emplace_back(ErrorKind::missing_rating, tag + ": unknown student");
      } else if (k.rater_id == k.ratee_id) {
        issues.emplace_back(ErrorKind::range, tag + ": self rating");
      } else if (a->second != b->second) {
        issues.emplace_back(ErrorKind::grouping, tag + ": rater and ratee are in different teams");
      }
    }
    for (const auto& [key, members] : team_map) {
      for (auto r : members) {
        for (auto m : members) {
          if (r == m) continue;
          const auto& rr = records_[r];
          const auto& mm = records_[m];
          if (!ratings_.count({rr.session_id, rr.student_id, mm.student_id})) {
            issues.emplace_back(ErrorKind::missing_rating, "team " + key + ": missing rating " + rr.student_id +
                                                               "->" + mm.student_id + " (" + where(r) + ")");
          }
        }
      }
    }
    return issues;
  }

  std::vector<StudentRecord> records_;
  RatingMatrix ratings_;
};

// ---------------------------------------------------------------------------------------------
// CSV input/output

namespace detail {

struct CsvIssues {
  std::vector<std::string> messages;
  ErrorKind first = ErrorKind::parse;
  void add(ErrorKind kind, std::string msg) {
    if (messages.empty()) first = kind;
    messages.push_back(std::move(msg));
  }
};

inline void check_header(const std::string& path, const std::vector<std::string>& lines,
                         const std::vector<std::string>& expected) {
  if (lines.empty()) throw Error(ErrorKind::parse, path + ":1: empty file, expected header");
  auto header = csv::split(lines.front());
  if (header != expected) {
    std::string want;
    for (const auto& c : expected) want += (want.empty() ? "" : ",") + c;
    throw Error(ErrorKind::parse, path + ":1: header mismatch, expected " + want);
  }
}

}  // namespace detail

/// Reads records.csv and ratings.csv. Field-level problems are reported as "path:line:column: ...".
inline SessionDataset load(const std::string& records_path, const std::string& ratings_path) {
  const auto rec_lines = csv::read_lines(records_path);
  const auto rat_lines = csv::read_lines(ratings_path);
  detail::check_header(records_path, rec_lines, record_columns());
  detail::check_header(ratings_path, rat_lines, rating_columns());

  detail::CsvIssues issues;
  std::vector<StudentRecord> records;
  for (std::size_t ln = 1; ln < rec_lines.size(); ++ln) {
    if (rec_lines[ln].empty()) continue;
    const auto f = csv::split(rec_lines[ln]);
    const std::string at = records_path + ":" + std::to_string(ln + 1);
    if (f.size() != record_columns().size()) {
      issues.add(ErrorKind::parse, at + ": expected " + std::to_string(record_columns().size()) + " fields, got " +
                                       std::to_string(f.size()));
      continue;
    }
    auto ordinal = [&](std::size_t col) -> std::optional<int> {
      if (f[col].empty()) return std::nullopt;
      auto v = csv::parse_int(f[col]);
      if (!v) {
        issues.add(ErrorKind::parse, at + ":" + std::to_string(col + 1) + ": " + record_columns()[col] +
                                         ": expected integer, got '" + f[col] + "'");
        return std::nullopt;
      }
      if (*v < 1 || *v > 5) {
        issues.add(ErrorKind::range, at + ":" + std::to_string(col + 1) + ": " + record_columns()[col] + " = " +
                                         f[col] + " outside 1..5");
        return std::nullopt;
      }
      return static_cast<int>(*v);
    };
    auto real = [&](std::size_t col) -> std::optional<double> {
      if (f[col].empty()) return std::nullopt;
      auto v = csv::parse_double(f[col]);
      if (!v) {
        issues.add(ErrorKind::parse, at + ":" + std::to_string(col + 1) + ": " + record_columns()[col] +
                                         ": expected number, got '" + f[col] + "'");
        return std::nullopt;
      }
      if (*v < 0.0 || *v > 5.0) {
        issues.add(ErrorKind::range, at + ":" + std::to_string(col + 1) + ": " + record_columns()[col] + " = " +
                                         f[col] + " outside 0..5");
        return std::nullopt;
      }
      return v;
    };
    StudentRecord r;
    r.student_id = f[0];
    r.team_id = f[1];
    r.session_id = f[2];
    r.personality_type = f[3];
    r.learning_style = f[4];
    r.content_engaging = ordinal(5);
    r.background = ordinal(6);
    r.fits_needs = ordinal(7);
    r.observed_contribution = real(8);
    r.peer_contribution_score = real(9);
    r.opinion_before = ordinal(10);
    r.post_quiz = real(11);
    r.group_grade = real(12);
    records.push_back(std::move(r));
  }

  RatingMatrix ratings;
  for (std::size_t ln = 1; ln < rat_lines.size(); ++ln) {
    if (rat_lines[ln].empty()) continue;
    const auto f = csv::split(rat_lines[ln]);
    const std::string at = ratings_path + ":" + std::to_string(ln + 1);
    if (f.size() != 4) {
      issues.add(ErrorKind::parse, at + ": expected 4 fields, got " + std::to_string(f.size()));
      continue;
    }
    auto score = csv::parse_double(f[3]);
    if (!score) {
      issues.add(ErrorKind::parse, at + ":4: score: expected number, got '" + f[3] + "'");
      continue;
    }
    if (!ratings.emplace(RatingKey{f[0], f[1], f[2]}, *score).second) {
      issues.add(ErrorKind::duplicate_key, at + ": duplicate rating " + f[1] + "->" + f[2] + " in session " + f[0]);
    }
  }
  if (!issues.messages.empty()) throw ValidationError(issues.first, issues.messages);

  try {
    return SessionDataset(std::move(records), std::move(ratings));
  } catch (const ValidationError& e) {
    // "record N" counts data rows; translate to file lines for the caller.
    std::vector<std::string> located;
    for (const auto& msg : e.issues()) located.push_back(records_path + ": " + msg);
    throw ValidationError(e.kind(), located);
  }
}

/// Writes the two CSV files; load(save(d)) reproduces d apart from learning_outcome,
/// which is not part of the file format and is recomputed by derive_outcomes.
inline void save(const SessionDataset& data, const std::string& records_path, const std::string& ratings_path) {
  std::ofstream rec(records_path);
  std::ofstream rat(ratings_path);
  if (!rec) throw Error(ErrorKind::io, records_path + ": cannot open for writing");
  if (!rat) throw Error(ErrorKind::io, ratings_path + ": cannot open for writing");

  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  auto oi = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  auto od = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };

  rec << join(record_columns()) << '\n';
  for (const auto& r : data.records()) {
    rec << join({csv::quote(r.student_id), csv::quote(r.team_id), csv::quote(r.session_id),
                 csv::quote(r.personality_type), csv::quote(r.learning_style), oi(r.content_engaging),
                 oi(r.background), oi(r.fits_needs), od(r.observed_contribution), od(r.peer_contribution_score),
                 oi(r.opinion_before), od(r.post_quiz), od(r.group_grade)})
        << '\n';
  }
  rat << join(rating_columns()) << '\n';
  for (const auto& [k, score] : data.ratings()) {
    rat << join({csv::quote(k.session_id), csv::quote(k.rater_id), csv::quote(k.ratee_id), csv::format_double(score)})
        << '\n';
  }
  if (!rec || !rat) throw Error(ErrorKind::io, "write failed for " + records_path + " or " + ratings_path);
}

struct DerivedDataset {
  SessionDataset dataset;
  std::vector<std::string> warnings;  // records whose existing learning_outcome was overwritten
};

/// learning_outcome = post_quiz - background for every record. With `require_all` false, records
/// lacking either input keep no learning_outcome instead of failing.
inline DerivedDataset derive_outcomes(const SessionDataset& data, bool require_all = true) {
  std::vector<StudentRecord> out = data.records();
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& r = out[i];
    if (!r.post_quiz || !r.background) {
      if (!require_all) {
        r.learning_outcome.reset();
        continue;
      }
      throw Error(ErrorKind::incomplete_data,
                  "record " + std::to_string(i + 1) + " (" + r.student_id + "): post_quiz and background required");
    }
    const double lo = *r.post_quiz - static_cast<double>(*r.background);
    if (r.learning_outcome && *r.learning_outcome != lo) {
      warnings.push_back("record " + std::to_string(i + 1) + " (" + r.student_id + "): learning_outcome " +
                         csv::format_double(*r.learning_outcome) + " replaced by " + csv::format_double(lo));
    }
    r.learning_outcome = lo;
  }
  return {data.with_records(std::move(out)), std::move(warnings)};
}

}  // namespace collabgame
