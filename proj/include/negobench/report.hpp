#pragma once

// Tables over transcripts: one metrics row per episode, one summary row per
// experiment, emitted as CSV and markdown.
//
// CSV cells are typed. Strings are always quoted, empty means null, and any
// other field is a JSON scalar, so a written table parses back to the same
// values.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "negobench/analysis.hpp"
#include "negobench/dond.hpp"
#include "negobench/error.hpp"
#include "negobench/record.hpp"

namespace negobench::report {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;  // scalar cells only
  friend bool operator==(const Table&, const Table&) = default;
};

// --- CSV -----------------------------------------------------------------------

namespace detail {

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string cell_text(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return quote(v.get<std::string>());
  if (v.is_structured()) throw InvalidInput("table cells must be scalar");
  return v.dump();
}

// Splits CSV text into records of (field, was_quoted).
inline std::vector<std::vector<std::pair<std::string, bool>>> split_csv(const std::string& text) {
  std::vector<std::vector<std::pair<std::string, bool>>> out;
  std::vector<std::pair<std::string, bool>> rec;
  std::string field;
  bool quoted = false, in_quotes = false, any = false;
  auto end_field = [&] {
    rec.emplace_back(std::move(field), quoted);
    field.clear();
    quoted = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (in_quotes) {
      if (c != '"') field += c;
      else if (i + 1 < text.size() && text[i + 1] == '"') field += '"', ++i;
      else in_quotes = false;
    } else if (c == '"') {
      if (!field.empty()) throw InvalidInput("csv: stray quote");
      in_quotes = quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_field();
      out.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (in_quotes) throw InvalidInput("csv: unterminated quote");
  if (any) {
    end_field();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + detail::quote(t.columns[i]);
  out += '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw InvalidInput("csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + detail::cell_text(row[i]);
    out += '\n';
  }
  return out;
}

inline Table parse_csv(const std::string& text) {
  const auto recs = detail::split_csv(text);
  if (recs.empty()) throw InvalidInput("csv: missing header");
  Table t;
  for (const auto& [name, q] : recs.front()) t.columns.push_back(name);
  for (std::size_t r = 1; r < recs.size(); ++r) {
    if (recs[r].size() != t.columns.size())
      throw InvalidInput("csv: line " + std::to_string(r + 1) + " has " + std::to_string(recs[r].size()) + " fields");
    std::vector<json> row;
    for (const auto& [field, q] : recs[r]) {
      if (q) row.emplace_back(field);
      else if (field.empty()) row.emplace_back(nullptr);
      else {
        try {
          auto v = json::parse(field);
          if (v.is_structured()) throw InvalidInput("csv: structured value in a cell");
          if (v.is_number_unsigned() && v.get<std::uint64_t>() <= INT64_MAX) v = v.get<std::int64_t>();
          row.push_back(std::move(v));
        } catch (const json::exception&) {
          throw InvalidInput("csv: unquoted field '" + field + "' is not a number or boolean");
        }
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Table read_csv(const std::string& path) { return parse_csv(read_text(path)); }

// --- markdown --------------------------------------------------------------------

inline std::string to_markdown(const Table& t, int digits = 2) {
  auto show = [&](const json& v) -> std::string {
    if (v.is_null()) return "-";
    if (v.is_string()) {
      std::string s;
      for (char c : v.get<std::string>()) s += c == '|' ? std::string("\\|") : std::string(1, c);
      return s;
    }
    if (v.is_number_float()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*f", digits, v.get<double>());
      return buf;
    }
    return v.dump();
  };
  std::string out = "|";
  for (const auto& c : t.columns) out += " " + c + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += "---|";
  out += '\n';
  for (const auto& row : t.rows) {
    out += "|";
    for (const auto& v : row) out += " " + show(v) + " |";
    out += '\n';
  }
  return out;
}

// --- tables from records ------------------------------------------------------------

namespace detail {

inline json flatten(const json& v) {
  if (!v.is_array()) return v;
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + (v[i].is_null() ? std::string("NA") : v[i].dump());
  return s;
}

// Mean of the non-null numeric values in a column; null when there are none.
inline json mean_of(const std::vector<json>& rows, const std::string& key) {
  double sum = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (!r.contains(key) || !r.at(key).is_number()) continue;
    sum += r.at(key).get<double>();
    ++n;
  }
  return n ? json(sum / n) : json(nullptr);
}

inline json mean_series(const std::vector<json>& rows, const std::string& key) {
  double sum = 0;
  int n = 0;
  for (const auto& r : rows)
    if (r.contains(key))
      for (const auto& v : r.at(key))
        if (v.is_number()) sum += v.get<double>(), ++n;
  return n ? json(sum / n) : json(nullptr);
}

inline json sum_of(const std::vector<json>& rows, const std::string& key) {
  double sum = 0;
  for (const auto& r : rows)
    if (r.contains(key) && r.at(key).is_number()) sum += r.at(key).get<double>();
  return sum;
}

}  // namespace detail

// One row per episode, columns in sorted key order.
inline Table episode_table(const std::vector<EpisodeRecord>& records,
                           const analysis::LanguageId& id = analysis::LanguageId()) {
  Table t;
  for (const auto& r : records) {
    const auto row = analysis::episode_metrics(r, id);
    if (t.columns.empty())
      for (const auto& [k, v] : row.items()) t.columns.push_back(k);
    std::vector<json> cells;
    for (const auto& c : t.columns) cells.push_back(row.contains(c) ? detail::flatten(row.at(c)) : json(nullptr));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

namespace detail {

inline std::vector<json> summary_cells(const std::string& name, const std::vector<EpisodeRecord>& group,
                                       const analysis::LanguageId& id) {
  const auto s = aggregate(group);
  std::vector<json> rows;
  for (const auto& r : group) rows.push_back(analysis::episode_metrics(r, id));
  std::vector<json> cells = {name, s.episodes, s.played, s.percent_played,
                             s.mean_quality ? json(*s.mean_quality) : json(nullptr), s.clemscore};
  switch (group.front().game) {
    case Game::dond: {
      const auto d = dond::stats(group);
      cells.insert(cells.end(), {d.percent_agreement, d.percent_optimal, d.avg_messages});
      break;
    }
    case Game::cleanup: {
      const auto b = analysis::penalty_breakdown(group);
      cells.insert(cells.end(), {mean_of(rows, "ds"), mean_of(rows, "ps"), mean_of(rows, "penalties"),
                                 analysis::opt(b.format_ratio), analysis::opt(b.move_ratio)});
      break;
    }
    case Game::balloon:
      cells.insert(cells.end(), {mean_of(rows, "f_a"), mean_of(rows, "f_b"), mean_of(rows, "stubbornness_a"),
                                 mean_of(rows, "stubbornness_b"), mean_of(rows, "alternation"),
                                 mean_of(rows, "pareto_adherence"), mean_series(rows, "substitutions")});
      break;
  }
  cells.insert(cells.end(), {mean_of(rows, "lang_completion"), mean_of(rows, "lang_reasoning"),
                             sum_of(rows, "tokens"), sum_of(rows, "cost")});
  return cells;
}

}  // namespace detail

inline std::vector<std::string> summary_columns(Game g) {
  std::vector<std::string> c = {"experiment", "episodes", "played", "percent_played", "quality", "clemscore"};
  switch (g) {
    case Game::dond: c.insert(c.end(), {"percent_agreement", "percent_optimal", "avg_messages"}); break;
    case Game::cleanup: c.insert(c.end(), {"ds", "ps", "penalties", "format_ratio", "move_ratio"}); break;
    case Game::balloon:
      c.insert(c.end(), {"f_a", "f_b", "stubbornness_a", "stubbornness_b", "alternation", "pareto_adherence",
                         "substitution"});
      break;
  }
  c.insert(c.end(), {"lang_completion", "lang_reasoning", "tokens", "cost"});
  return c;
}

// One row per experiment (sorted) and a final "all" row. Records share a game.
inline Table summary_table(const std::vector<EpisodeRecord>& records,
                           const analysis::LanguageId& id = analysis::LanguageId()) {
  if (records.empty()) throw InvalidInput("summary: no records");
  Table t;
  t.columns = summary_columns(records.front().game);
  std::map<std::string, std::vector<EpisodeRecord>> by_exp;
  for (const auto& r : records) by_exp[r.experiment].push_back(r);
  for (const auto& [name, group] : by_exp) t.rows.push_back(detail::summary_cells(name, group, id));
  t.rows.push_back(detail::summary_cells("all", records, id));
  return t;
}

struct Report {
  Game game = Game::dond;
  Table episodes, summary;
  json score;
};

// One report per game present, in enum order.
inline std::vector<Report> build_reports(const std::vector<EpisodeRecord>& records,
                                         const analysis::LanguageId& id = analysis::LanguageId()) {
  std::map<Game, std::vector<EpisodeRecord>> by_game;
  for (const auto& r : records) by_game[r.game].push_back(r);
  std::vector<Report> out;
  for (const auto& [g, group] : by_game)
    out.push_back({g, episode_table(group, id), summary_table(group, id), to_json_value(aggregate(group))});
  return out;
}

struct Loaded {
  std::vector<EpisodeRecord> records;
  std::vector<std::string> warnings;
};

// Every *.jsonl under dir, in path order. A file that fails to parse is
// skipped with a warning; no readable records at all is an error.
inline Loaded load_transcript_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InvalidInput(dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  Loaded out;
  for (const auto& f : files) {
    try {
      auto recs = read_transcripts(f.string());
      out.records.insert(out.records.end(), recs.begin(), recs.end());
    } catch (const std::exception& e) {
      out.warnings.push_back(f.string() + ": skipped (" + e.what() + ")");
    }
  }
  if (out.records.empty()) throw InvalidInput("no readable transcripts in " + dir);
  return out;
}

// <dir>/<game>_episodes.csv, _summary.csv, _summary.md, _score.json.
inline std::vector<std::string> write_reports(const std::string& dir, const std::vector<Report>& reports) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& r : reports) {
    const std::string base = dir + "/" + json(r.game).get<std::string>();
    write_text(base + "_episodes.csv", to_csv(r.episodes));
    write_text(base + "_summary.csv", to_csv(r.summary));
    write_text(base + "_summary.md", to_markdown(r.summary));
    write_text(base + "_score.json", r.score.dump(2) + "\n");
    for (const char* s : {"_episodes.csv", "_summary.csv", "_summary.md", "_score.json"}) written.push_back(base + s);
  }
  return written;
}

}  // namespace negobench::report
