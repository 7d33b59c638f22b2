#pragma once

// Post-hoc metrics over transcripts: Balloon proposal dynamics, Clean Up
// penalty mix, reasoning-trace labeling with segments and cycle edges, loop
// detection and language consistency.

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "negobench/balloon.hpp"
#include "negobench/optimize.hpp"
#include "negobench/record.hpp"
#include "negobench/stopwords.hpp"

namespace negobench::analysis {

// --- proposal timelines -----------------------------------------------------

struct Proposal {
  int proposer = 1;  // 1 or 2
  balloon::ItemSet set;
};
using Timeline = std::vector<Proposal>;

inline Timeline timeline_of(const EpisodeRecord& r) {
  Timeline t;
  if (!r.details.contains("proposals")) return t;
  for (const auto& p : r.details.at("proposals")) {
    Proposal e;
    e.proposer = p.at("seat") == "A" ? 1 : 2;
    for (const auto& item : p.at("items")) e.set.insert(item.get<std::string>());
    t.push_back(std::move(e));
  }
  return t;
}

struct Stubbornness {
  double rate = 0;   // repeats / proposals
  int repeats = 0;   // proposals equal to an earlier own proposal
  int proposals = 0;
};

inline std::array<Stubbornness, 2> stubbornness(const Timeline& t) {
  std::array<Stubbornness, 2> out;
  std::array<std::set<balloon::ItemSet>, 2> seen;
  for (const auto& p : t) {
    const auto i = static_cast<std::size_t>(p.proposer - 1);
    ++out[i].proposals;
    if (!seen[i].insert(p.set).second) ++out[i].repeats;
  }
  for (auto& s : out) s.rate = s.proposals ? static_cast<double>(s.repeats) / s.proposals : 0.0;
  return out;
}

inline std::optional<double> alternation_rate(const std::vector<int>& proposers) {
  if (proposers.size() <= 1) return std::nullopt;
  int switches = 0;
  for (std::size_t i = 1; i < proposers.size(); ++i) switches += proposers[i] != proposers[i - 1];
  return static_cast<double>(switches) / static_cast<double>(proposers.size() - 1);
}

inline std::optional<double> alternation_rate(const Timeline& t) {
  std::vector<int> who;
  for (const auto& p : t) who.push_back(p.proposer);
  return alternation_rate(who);
}

// c_t for t = 2..n; undefined where the previous set is empty.
inline std::vector<std::optional<double>> substitution_series(const Timeline& t) {
  std::vector<std::optional<double>> out;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const auto& prev = t[i - 1].set;
    if (prev.empty()) {
      out.push_back(std::nullopt);
      continue;
    }
    std::vector<std::string> diff;
    std::set_symmetric_difference(prev.begin(), prev.end(), t[i].set.begin(), t[i].set.end(),
                                  std::back_inserter(diff));
    out.push_back(static_cast<double>(diff.size()) / static_cast<double>(prev.size()));
  }
  return out;
}

inline double pareto_adherence(const Timeline& t, const optimize::PayoffFront& front, const balloon::Instance& inst) {
  if (t.empty()) return 0.0;
  int on = 0;
  for (const auto& p : t) {
    if (inst.weight_of(p.set) > inst.limit) continue;
    if (front.is_efficient(inst.value_of(p.set, Seat::A), inst.value_of(p.set, Seat::B))) ++on;
  }
  return static_cast<double>(on) / static_cast<double>(t.size());
}

// --- Clean Up penalties -----------------------------------------------------

struct PenaltyBreakdown {
  std::int64_t format = 0, move = 0;
  std::optional<double> format_ratio, move_ratio;
  std::int64_t total() const { return format + move; }
};

inline PenaltyBreakdown penalty_breakdown(std::int64_t format, std::int64_t move) {
  PenaltyBreakdown b{format, move, std::nullopt, std::nullopt};
  if (b.total() > 0) {
    b.format_ratio = static_cast<double>(format) / static_cast<double>(b.total());
    b.move_ratio = static_cast<double>(move) / static_cast<double>(b.total());
  }
  return b;
}

inline PenaltyBreakdown penalty_breakdown(const std::vector<EpisodeRecord>& records) {
  std::int64_t f = 0, m = 0;
  for (const auto& r : records) {
    if (r.game != Game::cleanup) continue;
    f += r.details.value("penalties_format", std::int64_t{0});
    m += r.details.value("penalties_move", std::int64_t{0});
  }
  return penalty_breakdown(f, m);
}

// --- text helpers -----------------------------------------------------------

// Lowercased word tokens. Bytes >= 0x80 count as letters so UTF-8 words
// (umlauts, accents) stay whole.
inline std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.find_first_not_of(" \t\r") != std::string::npos) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (c == '.' || c == '?' || c == '!' || c == '\n') flush();
    else cur += c;
  }
  flush();
  return out;
}

// --- reasoning-trace labels -------------------------------------------------

enum class Label { ASSERT, PROPOSE, UNDERMINE, ALTERNATIVE, CONCLUDE, SKIPPED };
NLOHMANN_JSON_SERIALIZE_ENUM(Label, {{Label::ASSERT, "ASSERT"},
                                     {Label::PROPOSE, "PROPOSE"},
                                     {Label::UNDERMINE, "UNDERMINE"},
                                     {Label::ALTERNATIVE, "ALTERNATIVE"},
                                     {Label::CONCLUDE, "CONCLUDE"},
                                     {Label::SKIPPED, "SKIPPED"}})

inline const std::map<std::string, Label>& cue_words() {
  static const std::map<std::string, Label> cues = {
      {"need", Label::ASSERT},          {"should", Label::ASSERT},       {"must", Label::ASSERT},
      {"maybe", Label::PROPOSE},        {"perhaps", Label::PROPOSE},     {"can", Label::PROPOSE},
      {"could", Label::PROPOSE},        {"but", Label::UNDERMINE},       {"however", Label::UNDERMINE},
      {"wait", Label::UNDERMINE},       {"alternatively", Label::ALTERNATIVE}, {"another", Label::ALTERNATIVE},
      {"so", Label::CONCLUDE},          {"thus", Label::CONCLUDE},
  };
  return cues;
}

// Suffix table: "needs" / "needed" / "needing" -> "need". A token that is
// already a cue is never stripped.
inline std::string lemma(const std::string& token) {
  if (cue_words().count(token)) return token;
  for (const char* suffix : {"ing", "ed", "es", "s"}) {
    const std::string s = suffix;
    if (token.size() >= s.size() + 3 && token.compare(token.size() - s.size(), s.size(), s) == 0)
      return token.substr(0, token.size() - s.size());
  }
  return token;
}

// nullopt when the sentence carries no cue.
inline std::optional<Label> label_sentence(const std::string& sentence) {
  std::set<Label> found;
  for (const auto& tok : tokens(sentence)) {
    if (auto it = cue_words().find(lemma(tok)); it != cue_words().end()) found.insert(it->second);
  }
  if (found.empty()) return std::nullopt;
  if (found.size() > 1) found.erase(Label::CONCLUDE);
  if (found.size() == 1) return *found.begin();
  if (found.count(Label::PROPOSE)) return Label::PROPOSE;
  return Label::SKIPPED;
}

// Labels for pre-split sentences; sentences without cues are dropped and
// conflicts come back as SKIPPED.
inline std::vector<Label> label_trace(const std::vector<std::string>& sentences) {
  std::vector<Label> out;
  for (const auto& s : sentences)
    if (auto l = label_sentence(s)) out.push_back(*l);
  return out;
}

inline std::vector<Label> label_trace(const std::string& text) { return label_trace(split_sentences(text)); }

inline bool absorbing(Label l) { return l == Label::ASSERT || l == Label::CONCLUDE; }

// Each absorbing label closes its segment; a trailing run forms the last one.
inline std::vector<std::vector<Label>> segments(const std::vector<Label>& labels) {
  std::vector<std::vector<Label>> out;
  std::vector<Label> cur;
  for (Label l : labels) {
    if (l == Label::SKIPPED) continue;
    cur.push_back(l);
    if (absorbing(l)) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Transitions inside one segment whose edge lies on a simple cycle. An edge
// u->v is on one exactly when v reaches u; self-loops always are.
inline std::pair<int, int> cycle_transitions(const std::vector<Label>& seg) {
  constexpr int K = 6;
  std::array<std::array<bool, K>, K> reach{};
  for (std::size_t i = 1; i < seg.size(); ++i)
    reach[static_cast<int>(seg[i - 1])][static_cast<int>(seg[i])] = true;
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
  int on = 0, total = 0;
  for (std::size_t i = 1; i < seg.size(); ++i) {
    const int u = static_cast<int>(seg[i - 1]), v = static_cast<int>(seg[i]);
    ++total;
    if (u == v || reach[v][u]) ++on;
  }
  return {on, total};
}

inline double cycle_edge_ratio(const std::vector<Label>& labels) {
  int on = 0, total = 0;
  for (const auto& seg : segments(labels)) {
    const auto [o, t] = cycle_transitions(seg);
    on += o;
    total += t;
  }
  return total ? static_cast<double>(on) / total : 0.0;
}

// True when a normalized sentence, or an 8-token shingle, occurs k times.
inline bool detect_loops(const std::string& trace, int k = 3) {
  std::map<std::string, int> seen;
  for (const auto& s : split_sentences(trace)) {
    std::string norm;
    for (const auto& t : tokens(s)) norm += (norm.empty() ? "" : " ") + t;
    if (!norm.empty() && ++seen[norm] >= k) return true;
  }
  const auto toks = tokens(trace);
  std::map<std::string, int> shingles;
  for (std::size_t i = 0; i + 8 <= toks.size(); ++i) {
    std::string sh;
    for (std::size_t j = i; j < i + 8; ++j) sh += toks[j] + " ";
    if (++shingles[sh] >= k) return true;
  }
  return false;
}

struct TraceAnalysis {
  std::vector<Label> labels;
  std::vector<std::vector<Label>> segments;
  double cycle_edge_ratio = 0;
  bool has_loops = false;
};

inline TraceAnalysis analyze_trace(const std::string& trace) {
  TraceAnalysis a;
  a.labels = label_trace(trace);
  a.segments = segments(a.labels);
  a.cycle_edge_ratio = cycle_edge_ratio(a.labels);
  a.has_loops = detect_loops(trace);
  return a;
}

// --- language ---------------------------------------------------------------

enum class Lang { en, de, it, other };
NLOHMANN_JSON_SERIALIZE_ENUM(Lang, {{Lang::en, "en"}, {Lang::de, "de"}, {Lang::it, "it"}, {Lang::other, "other"}})

class LanguageId {
 public:
  LanguageId()
      : lists_{std::set<std::string>(stopwords::en().begin(), stopwords::en().end()),
               std::set<std::string>(stopwords::de().begin(), stopwords::de().end()),
               std::set<std::string>(stopwords::it().begin(), stopwords::it().end())} {}

  // Reads <dir>/{en,de,it}.txt, one word per line.
  static LanguageId from_dir(const std::string& dir) {
    LanguageId id;
    const char* names[] = {"en", "de", "it"};
    for (int i = 0; i < 3; ++i) {
      std::ifstream in(dir + "/" + names[i] + ".txt");
      if (!in) throw InvalidInput("missing stopword list " + dir + "/" + names[i] + ".txt");
      id.lists_[i].clear();
      for (std::string w; std::getline(in, w);)
        if (!w.empty()) id.lists_[i].insert(w);
    }
    return id;
  }

  const std::set<std::string>& list(Lang l) const { return lists_.at(static_cast<std::size_t>(l)); }

  // Highest stopword hit rate wins; below `floor` the text is "other".
  Lang classify(const std::string& text, double floor = 0.1) const {
    const auto toks = tokens(text);
    if (toks.empty()) return Lang::other;
    double best = 0;
    Lang out = Lang::other;
    for (int i = 0; i < 3; ++i) {
      const auto hits = std::count_if(toks.begin(), toks.end(), [&](const auto& t) { return lists_[i].count(t) > 0; });
      const double rate = static_cast<double>(hits) / static_cast<double>(toks.size());
      if (rate > best) best = rate, out = static_cast<Lang>(i);
    }
    return best >= floor ? out : Lang::other;
  }

 private:
  std::array<std::set<std::string>, 3> lists_;
};

inline Lang lang_of(Locale l) { return l == Locale::en ? Lang::en : l == Locale::de ? Lang::de : Lang::it; }

struct Consistency {
  std::optional<double> completion, reasoning;
  std::map<Lang, int> completion_histogram, reasoning_histogram;
};

inline std::optional<double> consistency(const std::vector<std::string>& texts, Lang target, const LanguageId& id,
                                         std::map<Lang, int>* histogram = nullptr) {
  int hits = 0, n = 0;
  for (const auto& t : texts) {
    if (tokens(t).empty()) continue;
    const auto lang = id.classify(t);
    if (histogram) ++(*histogram)[lang];
    ++n;
    hits += lang == target;
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(hits) / n;
}

inline Consistency language_consistency(const std::vector<std::string>& completions,
                                        const std::vector<std::string>& reasoning, Locale target,
                                        const LanguageId& id = LanguageId()) {
  Consistency c;
  c.completion = consistency(completions, lang_of(target), id, &c.completion_histogram);
  c.reasoning = consistency(reasoning, lang_of(target), id, &c.reasoning_histogram);
  return c;
}

// --- per-episode rows -------------------------------------------------------

inline json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// One flat metrics row per episode; game-specific columns are present only
// for their game.
inline json episode_metrics(const EpisodeRecord& r, const LanguageId& id = LanguageId()) {
  json row = {{"episode_id", r.episode_id},
              {"game", r.game},
              {"experiment", r.experiment},
              {"status", r.status},
              {"quality", r.quality ? json(*r.quality) : json(nullptr)},
              {"abort_reason", r.abort_reason ? json(*r.abort_reason) : json(nullptr)}};

  if (r.game == Game::balloon) {
    const auto t = timeline_of(r);
    const auto st = stubbornness(t);
    row["proposals"] = t.size();
    row["stubbornness_a"] = st[0].rate;
    row["stubbornness_b"] = st[1].rate;
    row["repeats_a"] = st[0].repeats;
    row["repeats_b"] = st[1].repeats;
    row["alternation"] = opt(alternation_rate(t));
    json subs = json::array();
    for (const auto& c : substitution_series(t)) subs.push_back(opt(c));
    row["substitutions"] = subs;
    const auto inst = r.instance.get<balloon::Instance>();
    row["pareto_adherence"] = pareto_adherence(t, optimize::payoff_front(inst.knapsack()), inst);
    for (const char* k : {"f_a", "f_b"}) row[k] = r.details.contains(k) ? r.details.at(k) : json(nullptr);
  } else if (r.game == Game::cleanup) {
    const auto b = penalty_breakdown(r.details.value("penalties_format", std::int64_t{0}),
                                     r.details.value("penalties_move", std::int64_t{0}));
    row["penalties"] = b.total();
    row["penalties_format"] = b.format;
    row["penalties_move"] = b.move;
    row["format_ratio"] = opt(b.format_ratio);
    row["move_ratio"] = opt(b.move_ratio);
    for (const char* k : {"ds", "ps", "final_sum"}) row[k] = r.details.contains(k) ? r.details.at(k) : json(nullptr);
  } else {
    for (const char* k : {"outcome", "messages", "compatible"})
      row[k] = r.details.contains(k) ? r.details.at(k) : json(nullptr);
  }

  // First-turn reasoning trace per seat, and language over both channels.
  std::vector<std::string> completions, traces;
  std::array<std::optional<std::string>, 2> first_trace;
  for (const auto& e : r.events) {
    if (e.channel != Channel::a_to_gm && e.channel != Channel::b_to_gm) continue;
    completions.push_back(e.content);
    if (auto it = e.meta.find("reasoning"); it != e.meta.end()) {
      traces.push_back(it->second);
      auto& slot = first_trace[e.channel == Channel::a_to_gm ? 0 : 1];
      if (!slot) slot = it->second;
    }
  }
  for (std::size_t s = 0; s < 2; ++s) {
    const std::string p = s == 0 ? "_a" : "_b";
    if (!first_trace[s]) {
      row["segments" + p] = nullptr;
      row["cycle_edge_ratio" + p] = nullptr;
      row["loops" + p] = nullptr;
      continue;
    }
    const auto a = analyze_trace(*first_trace[s]);
    row["segments" + p] = a.segments.size();
    row["cycle_edge_ratio" + p] = a.cycle_edge_ratio;
    row["loops" + p] = a.has_loops;
  }
  const auto lc = language_consistency(completions, traces, r.locale, id);
  row["lang_completion"] = opt(lc.completion);
  row["lang_reasoning"] = opt(lc.reasoning);
  const auto& u0 = r.players[0].usage;
  const auto& u1 = r.players[1].usage;
  row["tokens"] = u0.prompt_tokens + u0.completion_tokens + u0.reasoning_tokens + u1.prompt_tokens +
                  u1.completion_tokens + u1.reasoning_tokens;
  row["cost"] = u0.cost_estimate + u1.cost_estimate;
  return row;
}

}  // namespace negobench::analysis
