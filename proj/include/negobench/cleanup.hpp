#pragma once

// Clean Up: two players with private copies of a grid negotiate a common
// object layout. Every invalid attempt costs one shared penalty; the episode
// aborts once penalties exceed the maximum.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "negobench/engine.hpp"
#include "negobench/error.hpp"
#include "negobench/optimize.hpp"
#include "negobench/record.hpp"
#include "negobench/rng.hpp"
#include "negobench/templates.hpp"

namespace negobench::cleanup {

inline const std::string kEmptyGlyph = "·";
inline const std::vector<std::string> kObstacleGlyphs = {"─", "│", "┼", "┌", "┐", "└", "┘", "├", "┤", "┬", "┴"};

struct Pos {
  int x = 0, y = 0;  // 1-based; x is the column, y the row (downward)
  friend auto operator<=>(const Pos&, const Pos&) = default;
};
inline void to_json(json& j, const Pos& p) { j = json::array({p.x, p.y}); }
inline void from_json(const json& j, Pos& p) {
  p.x = j.at(0).get<int>();
  p.y = j.at(1).get<int>();
}

inline double distance(const Pos& a, const Pos& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Grid {
  int width = 7, height = 7;
  std::map<Pos, std::string> obstacles;
  std::map<std::string, Pos> objects;
  std::string empty_glyph = kEmptyGlyph;

  bool in_bounds(const Pos& p) const { return p.x >= 1 && p.x <= width && p.y >= 1 && p.y <= height; }

  // Glyph shown at p: an object letter, an obstacle glyph, or the empty glyph.
  std::string at(const Pos& p) const {
    for (const auto& [id, q] : objects)
      if (q == p) return id;
    if (auto it = obstacles.find(p); it != obstacles.end()) return it->second;
    return empty_glyph;
  }

  bool is_empty(const Pos& p) const { return in_bounds(p) && at(p) == empty_glyph; }

  std::vector<Pos> empty_cells() const {
    std::vector<Pos> out;
    for (int y = 1; y <= height; ++y)
      for (int x = 1; x <= width; ++x)
        if (is_empty({x, y})) out.push_back({x, y});
    return out;
  }

  void validate() const {
    if (width < 1 || height < 1) throw InvalidInput("cleanup: grid dimensions must be >= 1");
    std::map<Pos, int> seen;
    for (const auto& [p, glyph] : obstacles) {
      if (!in_bounds(p)) throw InvalidInput("cleanup: obstacle out of bounds");
      if (glyph == empty_glyph || glyph.empty()) throw InvalidInput("cleanup: obstacle uses the empty glyph");
      ++seen[p];
    }
    for (const auto& [id, p] : objects) {
      if (id.size() != 1 || !std::isupper(static_cast<unsigned char>(id[0])))
        throw InvalidInput("cleanup: object ids are single capital letters");
      if (!in_bounds(p)) throw InvalidInput("cleanup: object out of bounds");
      if (++seen[p] > 1) throw InvalidInput("cleanup: object overlaps another object or obstacle");
    }
  }

  // Header row of x labels, then one row per y with its label at the right edge.
  std::string render() const {
    std::string out;
    for (int x = 1; x <= width; ++x) out += (x > 1 ? " " : "") + std::to_string(x);
    for (int y = 1; y <= height; ++y) {
      out += "\n";
      for (int x = 1; x <= width; ++x) out += at({x, y}) + " ";
      out += std::to_string(y);
    }
    return out;
  }

  static Grid parse(const std::string& text, const std::string& empty = kEmptyGlyph) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
      std::vector<std::string> tokens;
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (!tokens.empty()) rows.push_back(tokens);
    }
    if (rows.size() < 2) throw InvalidInput("cleanup: grid text too short");
    Grid g;
    g.empty_glyph = empty;
    g.width = static_cast<int>(rows[0].size());
    g.height = static_cast<int>(rows.size()) - 1;
    for (int x = 1; x <= g.width; ++x)
      if (rows[0][x - 1] != std::to_string(x)) throw InvalidInput("cleanup: bad x-axis header");
    for (int y = 1; y <= g.height; ++y) {
      const auto& r = rows[y];
      if (static_cast<int>(r.size()) != g.width + 1 || r.back() != std::to_string(y))
        throw InvalidInput("cleanup: bad grid row " + std::to_string(y));
      for (int x = 1; x <= g.width; ++x) {
        const auto& cell = r[x - 1];
        if (cell == empty) continue;
        if (cell.size() == 1 && std::isupper(static_cast<unsigned char>(cell[0])))
          g.objects[cell] = {x, y};
        else
          g.obstacles[{x, y}] = cell;
      }
    }
    return g;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline void to_json(json& j, const Grid& g) {
  json obstacles = json::array();
  for (const auto& [p, glyph] : g.obstacles) obstacles.push_back({p.x, p.y, glyph});
  j = json{{"width", g.width}, {"height", g.height}, {"empty_glyph", g.empty_glyph},
           {"obstacles", obstacles}, {"objects", g.objects}};
}

inline void from_json(const json& j, Grid& g) {
  j.at("width").get_to(g.width);
  j.at("height").get_to(g.height);
  j.at("empty_glyph").get_to(g.empty_glyph);
  g.obstacles.clear();
  for (const auto& o : j.at("obstacles")) g.obstacles[{o.at(0).get<int>(), o.at(1).get<int>()}] = o.at(2);
  j.at("objects").get_to(g.objects);
  g.validate();
}

enum class Level { easy, medium, hard };
NLOHMANN_JSON_SERIALIZE_ENUM(Level, {{Level::easy, "easy"}, {Level::medium, "medium"}, {Level::hard, "hard"}})

// Empty cells on a 7x7 board before objects are placed.
inline int empty_cells_for(Level level) {
  switch (level) {
    case Level::easy: return 34;
    case Level::medium: return 29;
    case Level::hard: return 24;
  }
  return 34;
}

struct Instance {
  Level level = Level::easy;
  int n_obj = 5;
  Grid grid_a, grid_b;
  int max_rounds = 20;
  int max_penalties = 12;
  Locale locale = Locale::en;

  const Grid& grid(Seat s) const { return s == Seat::A ? grid_a : grid_b; }

  void validate() const {
    grid_a.validate();
    grid_b.validate();
    if (static_cast<int>(grid_a.objects.size()) != n_obj) throw InvalidInput("cleanup: object count mismatch");
    for (const auto& [id, p] : grid_a.objects)
      if (!grid_b.objects.count(id)) throw InvalidInput("cleanup: grids carry different object letters");
    if (grid_b.objects.size() != grid_a.objects.size())
      throw InvalidInput("cleanup: grids carry different object letters");
    if (max_rounds < 1 || max_penalties < 0) throw InvalidInput("cleanup: bad limits");
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Instance, level, n_obj, grid_a, grid_b, max_rounds, max_penalties, locale)

// The first n letters of "WITCHES", then the rest of the alphabet in order.
inline std::vector<std::string> object_letters(int n) {
  std::string order = "WITCHES";
  for (char c = 'A'; c <= 'Z'; ++c)
    if (order.find(c) == std::string::npos) order += c;
  if (n < 1 || n > static_cast<int>(order.size())) throw InvalidInput("cleanup: unsupported object count");
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.emplace_back(1, order[static_cast<std::size_t>(i)]);
  return out;
}

// Box-drawing glyph from the obstacle neighbors (up, down, left, right).
inline std::string glyph_for(bool up, bool down, bool left, bool right) {
  const int mask = (up ? 8 : 0) | (down ? 4 : 0) | (left ? 2 : 0) | (right ? 1 : 0);
  switch (mask) {
    case 0b1111: return "┼";
    case 0b0101: return "┌";
    case 0b0110: return "┐";
    case 0b1001: return "└";
    case 0b1010: return "┘";
    case 0b1101: return "├";
    case 0b1110: return "┤";
    case 0b0111: return "┬";
    case 0b1011: return "┴";
    case 0b1000:
    case 0b0100:
    case 0b1100: return "│";
    default: return "─";
  }
}

// Obstacles built from random straight segments until exactly `count`
// cells are covered; glyphs follow connectivity, so crossings, branches and
// corners appear where segments meet.
inline Grid generate_background(Rng& rng, Level level, int width = 7, int height = 7) {
  const int count = width * height - empty_cells_for(level) * width * height / 49;
  if (count < 0 || count >= width * height) throw InvalidInput("cleanup: impossible obstacle density");
  std::map<Pos, bool> cells;
  while (static_cast<int>(cells.size()) < count) {
    const bool horizontal = rng.uniform(0, 1) == 0;
    Pos p{static_cast<int>(rng.uniform(1, width)), static_cast<int>(rng.uniform(1, height))};
    const auto len = rng.uniform(2, 4);
    for (std::int64_t k = 0; k < len && static_cast<int>(cells.size()) < count; ++k) {
      if (p.x < 1 || p.x > width || p.y < 1 || p.y > height) break;
      cells[p] = true;
      (horizontal ? p.x : p.y) += 1;
    }
  }
  Grid g;
  g.width = width;
  g.height = height;
  for (const auto& [p, _] : cells) {
    g.obstacles[p] = glyph_for(cells.count({p.x, p.y - 1}) > 0, cells.count({p.x, p.y + 1}) > 0,
                               cells.count({p.x - 1, p.y}) > 0, cells.count({p.x + 1, p.y}) > 0);
  }
  return g;
}

inline Grid place_objects(Rng& rng, Grid background, const std::vector<std::string>& letters) {
  auto free = background.empty_cells();
  if (free.size() < letters.size()) throw InvalidInput("cleanup: not enough empty cells for objects");
  const auto picks = rng.sample(free, letters.size());
  for (std::size_t i = 0; i < letters.size(); ++i) background.objects[letters[i]] = picks[i];
  return background;
}

inline Instance instance_from_background(Rng& rng, const Grid& background, Level level, int n_obj) {
  if (n_obj != 3 && n_obj != 5 && n_obj != 7) throw InvalidInput("cleanup: n_obj must be 3, 5 or 7");
  Instance inst;
  inst.level = level;
  inst.n_obj = n_obj;
  const auto letters = object_letters(n_obj);
  inst.grid_a = place_objects(rng, background, letters);
  inst.grid_b = place_objects(rng, background, letters);
  inst.max_rounds = 4 * n_obj;
  return inst;
}

inline Instance generate_instance(Rng& rng, Level level, int n_obj) {
  const auto background = generate_background(rng, level);
  return instance_from_background(rng, background, level, n_obj);
}

// --- Commands ------------------------------------------------------------------------

struct Command {
  enum class Kind { say, move } kind = Kind::say;
  std::string message;
  std::string object;
  int x = 0, y = 0;
  friend bool operator==(const Command&, const Command&) = default;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline Violation format_violation(const std::string& code, Locale locale, const Templates& t) {
  return {code, t.get(locale, "cleanup.reason." + code), "format"};
}

// Format reasons map to template keys cleanup.reason.{before, after, both,
// multiple, format, must_begin}.
inline Validated<Command> parse_command(const std::string& text, bool opening_turn, Locale locale = Locale::en,
                                        const Templates& t = Templates::builtin()) {
  static const std::regex token_re(R"((SAY|MOVE):)");
  std::vector<std::size_t> starts;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), token_re); it != std::sregex_iterator(); ++it)
    starts.push_back(static_cast<std::size_t>(it->position()));
  if (starts.size() > 1) return format_violation("multiple", locale, t);
  if (starts.empty()) return format_violation("format", locale, t);

  const std::size_t at = starts[0];
  const bool has_prefix = !trim(text.substr(0, at)).empty();
  Command cmd;
  std::string rest;
  if (text.compare(at, 4, "SAY:") == 0) {
    cmd.kind = Command::Kind::say;
    const auto nl = text.find('\n', at);
    cmd.message = trim(text.substr(at + 4, nl == std::string::npos ? std::string::npos : nl - at - 4));
    rest = nl == std::string::npos ? "" : text.substr(nl);
    if (cmd.message.empty()) return format_violation("format", locale, t);
  } else {
    static const std::regex move_re(R"(^MOVE:\s*([A-Za-z])\s*,\s*\(\s*(-?\d{1,6})\s*,\s*(-?\d{1,6})\s*\))");
    std::smatch m;
    const std::string tail = text.substr(at);
    if (!std::regex_search(tail, m, move_re)) return format_violation("format", locale, t);
    cmd.kind = Command::Kind::move;
    cmd.object = m[1].str();
    cmd.x = std::stoi(m[2].str());
    cmd.y = std::stoi(m[3].str());
    rest = tail.substr(static_cast<std::size_t>(m.length(0)));
  }
  const bool has_suffix = !trim(rest).empty();
  if (has_prefix && has_suffix) return format_violation("both", locale, t);
  if (has_prefix) return format_violation("before", locale, t);
  if (has_suffix) return format_violation("after", locale, t);
  if (opening_turn && cmd.kind == Command::Kind::move) return format_violation("must_begin", locale, t);
  return cmd;
}

// Checks in order: object id, bounds, target emptiness.
inline std::optional<Violation> check_move(const Grid& grid, const Command& cmd, Locale locale = Locale::en,
                                           const Templates& t = Templates::builtin()) {
  const Substitutions xy = {{"<X>", std::to_string(cmd.x)}, {"<Y>", std::to_string(cmd.y)}};
  if (!grid.objects.count(cmd.object))
    return Violation{"unknown_object",
                     render(t.get(locale, "cleanup.move.unknown_object"), {{"<OBJECT>", cmd.object}}), "move"};
  const Pos target{cmd.x, cmd.y};
  if (!grid.in_bounds(target))
    return Violation{"out_of_bounds", render(t.get(locale, "cleanup.move.out_of_bounds"), xy), "move"};
  if (!grid.is_empty(target)) {
    auto subs = xy;
    subs.emplace_back("<OBJECT>", grid.at(target));
    return Violation{"not_empty", render(t.get(locale, "cleanup.move.not_empty"), subs), "move"};
  }
  return std::nullopt;
}

inline Grid apply_move(Grid grid, const Command& cmd) {
  if (auto v = check_move(grid, cmd)) throw InvalidInput("cleanup: invalid move: " + v->message);
  grid.objects[cmd.object] = {cmd.x, cmd.y};
  return grid;
}

// --- Scoring ---------------------------------------------------------------------------

inline double distance_sum(const Grid& a, const Grid& b) {
  if (a.objects.size() != b.objects.size()) throw Error("cleanup: grids carry different object letters");
  double total = 0.0;
  for (const auto& [id, p] : a.objects) {
    auto it = b.objects.find(id);
    if (it == b.objects.end()) throw Error("cleanup: grids carry different object letters");
    total += distance(p, it->second);
  }
  return total;
}

struct ScoreComponents {
  double initial_sum = 0, final_sum = 0, expected_sum = 0;
  double es = 0, rs = 0, ds = 0;
  int penalties = 0;
  double ps = 1.0;
  double quality = 0;
};

inline double penalty_score(int penalties, int max_penalties) {
  if (max_penalties == 0) return 1.0;
  return static_cast<double>(max_penalties) / static_cast<double>(penalties - 2 * max_penalties) + 1.5;
}

inline ScoreComponents score(double initial_sum, double final_sum, int n_obj, int width, int height, int penalties,
                             int max_penalties) {
  if (penalties < 0 || penalties > max_penalties) throw InvalidInput("cleanup: penalties outside [0, max]");
  ScoreComponents s;
  s.initial_sum = initial_sum;
  s.final_sum = final_sum;
  s.expected_sum = optimize::expected_distance(width, height) * n_obj;
  s.es = s.expected_sum > 0 ? std::max(0.0, 1.0 - final_sum / s.expected_sum) : (final_sum == 0 ? 1.0 : 0.0);
  // I = 0: the boards started aligned; only keeping them aligned counts as reduction.
  s.rs = initial_sum > 0 ? std::max(0.0, 1.0 - final_sum / initial_sum) : (final_sum == 0 ? 1.0 : 0.0);
  s.ds = s.es > 0 ? (s.es + s.rs) / 2.0 : 0.0;
  s.penalties = penalties;
  s.ps = penalty_score(penalties, max_penalties);
  s.quality = std::clamp(s.ds * s.ps * 100.0, 0.0, 100.0);
  return s;
}

// --- Episode loop ------------------------------------------------------------------------

inline std::string objects_text(const Grid& g, const std::vector<std::string>& order) {
  std::string out;
  for (const auto& id : order) {
    if (!g.objects.count(id)) continue;
    if (!out.empty()) out += ", ";
    out += "'" + id + "'";
  }
  return out;
}

inline std::string initial_prompt(const Instance& inst, Seat s, const Templates& t = Templates::builtin()) {
  const auto& g = inst.grid(s);
  return render(t.get(inst.locale, "cleanup.initial"), {{"$GRID$", g.render()},
                                                        {"$OBJECTS$", objects_text(g, object_letters(inst.n_obj))},
                                                        {"$MAX_PENALTIES$", std::to_string(inst.max_penalties)},
                                                        {"$EMPTY$", g.empty_glyph},
                                                        {"$MAX_ROUNDS$", std::to_string(inst.max_rounds)}});
}

inline bool says(const Command& c, const char* word) {
  if (c.kind != Command::Kind::say) return false;
  std::string m = trim(c.message);
  std::transform(m.begin(), m.end(), m.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return m == word;
}

inline void play(Episode& ep, const Instance& inst, const Templates& t = Templates::builtin()) {
  inst.validate();
  std::array<Grid, 2> grids{inst.grid_a, inst.grid_b};
  const double initial_sum = distance_sum(grids[0], grids[1]);
  PenaltyLedger ledger;
  ledger.max = inst.max_penalties;
  auto& details = ep.record().details;

  auto finish = [&](EndState end, int rounds) {
    const double final_sum = distance_sum(grids[0], grids[1]);
    const auto s = score(initial_sum, final_sum, inst.n_obj, grids[0].width, grids[0].height, ledger.count,
                         inst.max_penalties);
    details["initial_sum"] = s.initial_sum;
    details["final_sum"] = s.final_sum;
    details["expected_sum"] = s.expected_sum;
    details["es"] = s.es;
    details["rs"] = s.rs;
    details["ds"] = s.ds;
    details["ps"] = s.ps;
    details["rounds"] = rounds;
    ep.note_score("final distance " + std::to_string(final_sum));
    ep.finish_played(end, s.quality);
  };
  auto store_penalties = [&] {
    details["penalties"] = ledger.count;
    details["penalties_format"] = ledger.by_category.count("format") ? ledger.by_category.at("format") : 0;
    details["penalties_move"] = ledger.by_category.count("move") ? ledger.by_category.at("move") : 0;
  };
  const std::string of_m = std::to_string(inst.max_penalties);
  auto reprompt = [&](const Violation& v) {
    const std::string key = v.category == "format" ? "cleanup.format_penalty" : "cleanup.move_penalty";
    return render(t.get(inst.locale, key), {{"<REASON>", v.message},
                                            {"<N>", std::to_string(ledger.count)},
                                            {"<M>", of_m}});
  };

  ep.to_player(Seat::A, initial_prompt(inst, Seat::A, t));
  ep.to_player(Seat::A, t.get(inst.locale, "cleanup.start_a"));
  ep.to_player(Seat::B, initial_prompt(inst, Seat::B, t));

  int round = 1;
  bool opening = true;
  std::optional<Seat> asked_to_finish;
  std::array<std::string, 2> last_move;
  Seat current = Seat::A;
  while (true) {
    const bool first = opening;
    auto validate = [&](const std::string& text) -> Validated<Command> {
      auto parsed = parse_command(text, first && current == Seat::A, inst.locale, t);
      if (auto* c = std::get_if<Command>(&parsed); c && c->kind == Command::Kind::move) {
        if (auto v = check_move(grids[index(current)], *c, inst.locale, t)) return *v;
      }
      return parsed;
    };
    auto res = retry_loop<Command>(ep, current, validate, reprompt, RetryPolicy{0, &ledger}, EventKind::command);
    store_penalties();
    if (res.kind == Resolution::transport_failure) {
      ep.finish_aborted("transport_failure");
      return;
    }
    if (res.kind == Resolution::penalty_limit) {
      ep.finish_aborted("penalty_limit");
      return;
    }
    const Command cmd = *res.value;
    std::string action;
    if (cmd.kind == Command::Kind::say) {
      ep.relay(current, cmd.message, false);
      last_move[index(current)] = t.get(inst.locale, "cleanup.last.relayed");
      action = render(t.get(inst.locale, "cleanup.other.message"), {{"<MESSAGE>", cmd.message}});
      if (asked_to_finish == other(current) && says(cmd, "finished!")) {
        finish(EndState::goal, round);
        return;
      }
      asked_to_finish = says(cmd, "finished?") ? std::optional<Seat>(current) : std::nullopt;
    } else {
      auto& g = grids[index(current)];
      g = apply_move(g, cmd);
      ep.note_state(std::string("player ") + seat_name(current) + " moved " + cmd.object,
                    {{"seat", seat_name(current)}, {"object", cmd.object},
                     {"x", std::to_string(cmd.x)}, {"y", std::to_string(cmd.y)}});
      last_move[index(current)] = render(t.get(inst.locale, "cleanup.last.moved"),
                                         {{"<OBJECT>", cmd.object},
                                          {"<X>", std::to_string(cmd.x)},
                                          {"<Y>", std::to_string(cmd.y)},
                                          {"<GRID>", g.render()}});
      action = t.get(inst.locale, "cleanup.other.moved");
      asked_to_finish.reset();
    }

    if (current == Seat::B && ++round > inst.max_rounds) {
      finish(EndState::limit, inst.max_rounds);
      return;
    }

    const Seat next = other(current);
    if (opening) {
      ep.to_player(next, render(t.get(inst.locale, "cleanup.start_b"), {{"<START_MESSAGE>", cmd.message}}));
      opening = false;
    } else {
      ep.to_player(next, render(t.get(inst.locale, "cleanup.new_turn"),
                                {{"<LAST MOVE>", last_move[index(next)]},
                                 {"<R>", std::to_string(round)},
                                 {"<MR>", std::to_string(inst.max_rounds)},
                                 {"<N>", std::to_string(ledger.count)},
                                 {"<M>", of_m},
                                 {"<OTHER PLAYER ACTION>", action}}));
    }
    current = next;
  }
}

}  // namespace negobench::cleanup
