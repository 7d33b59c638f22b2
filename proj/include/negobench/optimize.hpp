#pragma once

// Exact combinatorial oracles shared by the games: 0/1 knapsack optimum,
// two-player payoff frontiers, the DoND allocation scan with its maximum
// Pareto improvement, max harmonic mean, and the Clean Up expected distance.
//
// Everything here is integer-exact except the two functions that return a
// real by definition (max_harmonic_mean, expected_distance).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "negobench/error.hpp"

namespace negobench::optimize {

enum class Side { A, B };

struct KnapsackItem {
  std::string id;
  std::int64_t weight = 0;
  std::int64_t value_a = 0;
  std::int64_t value_b = 0;

  std::int64_t value(Side s) const { return s == Side::A ? value_a : value_b; }
  friend bool operator==(const KnapsackItem&, const KnapsackItem&) = default;
};

struct KnapsackInstance {
  std::vector<KnapsackItem> items;
  std::int64_t capacity = 0;

  void validate() const {
    if (capacity < 0) throw InvalidInput("knapsack capacity must be nonnegative");
    std::set<std::string> seen;
    for (const auto& it : items) {
      if (it.weight < 0 || it.value_a < 0 || it.value_b < 0)
        throw InvalidInput("knapsack item '" + it.id + "' has a negative weight or value");
      if (!seen.insert(it.id).second) throw InvalidInput("duplicate knapsack item id '" + it.id + "'");
    }
  }

  std::int64_t total_weight() const {
    std::int64_t s = 0;
    for (const auto& it : items) s += it.weight;
    return s;
  }
};

struct KnapsackSolution {
  std::int64_t value = 0;
  std::vector<std::string> witness;  // item ids in instance order
};

// Dynamic program over weight. Ties resolve toward the set built from the
// earliest items, so the witness is deterministic for a given item order.
inline KnapsackSolution knapsack_opt(const KnapsackInstance& inst, Side side) {
  inst.validate();
  const std::int64_t cap = std::min(inst.capacity, inst.total_weight());
  const auto width = static_cast<std::size_t>(cap) + 1;
  const std::size_t n = inst.items.size();

  std::vector<std::int64_t> best(width, 0);
  std::vector<std::vector<bool>> keep(n, std::vector<bool>(width, false));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& it = inst.items[i];
    if (it.weight > cap) continue;
    const std::int64_t v = it.value(side);
    for (std::int64_t w = cap; w >= it.weight; --w) {
      const std::int64_t cand = best[static_cast<std::size_t>(w - it.weight)] + v;
      if (cand > best[static_cast<std::size_t>(w)]) {
        best[static_cast<std::size_t>(w)] = cand;
        keep[i][static_cast<std::size_t>(w)] = true;
      }
    }
  }

  KnapsackSolution sol;
  sol.value = best[static_cast<std::size_t>(cap)];
  std::int64_t w = cap;
  std::vector<std::string> picked;
  for (std::size_t i = n; i-- > 0;) {
    if (keep[i][static_cast<std::size_t>(w)]) {
      picked.push_back(inst.items[i].id);
      w -= inst.items[i].weight;
    }
  }
  std::reverse(picked.begin(), picked.end());
  sol.witness = std::move(picked);
  return sol;
}

struct PayoffPoint {
  std::int64_t weight = 0;
  std::int64_t value_a = 0;
  std::int64_t value_b = 0;
  std::vector<std::string> witness;
  friend bool operator==(const PayoffPoint&, const PayoffPoint&) = default;
};

// Non-dominated (value_a, value_b) pairs among feasible subsets, sorted by
// value_a ascending (so value_b strictly descending). For equal value pairs
// the lightest witness is kept.
struct PayoffFront {
  std::vector<PayoffPoint> points;

  bool contains(std::int64_t value_a, std::int64_t value_b) const {
    return std::any_of(points.begin(), points.end(), [&](const PayoffPoint& p) {
      return p.value_a == value_a && p.value_b == value_b;
    });
  }

  // True when no feasible subset strictly improves on (a, b) in the
  // value-dominance sense.
  bool is_efficient(std::int64_t value_a, std::int64_t value_b) const {
    for (const auto& p : points) {
      if (p.value_a >= value_a && p.value_b >= value_b && (p.value_a > value_a || p.value_b > value_b))
        return false;
    }
    return true;
  }
};

namespace detail {

struct Node {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::vector<std::size_t> items;
};

// Keeps nodes not weakly dominated by another node; equal pairs keep the
// earliest. Returns nodes sorted by a ascending, b strictly descending.
inline std::vector<Node> pareto2d(std::vector<Node> nodes) {
  std::stable_sort(nodes.begin(), nodes.end(), [](const Node& x, const Node& y) {
    if (x.a != y.a) return x.a > y.a;
    return x.b > y.b;
  });
  std::vector<Node> out;
  std::int64_t best_b = -1;
  for (auto& n : nodes) {
    if (n.b > best_b) {
      best_b = n.b;
      out.push_back(std::move(n));
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// `stair` sorted by a ascending with b descending.
inline bool weakly_dominated(const std::vector<Node>& stair, std::int64_t a, std::int64_t b) {
  auto it = std::lower_bound(stair.begin(), stair.end(), a,
                             [](const Node& n, std::int64_t key) { return n.a < key; });
  return it != stair.end() && it->b >= b;
}

}  // namespace detail

// Item-by-item extension of the non-dominated (weight, value_a, value_b)
// set. Per exact weight a 2-D staircase is kept; a point is dropped when a
// strictly lighter point weakly dominates it in value.
inline PayoffFront payoff_front(const KnapsackInstance& inst) {
  using detail::Node;
  inst.validate();
  const std::int64_t cap = std::min(inst.capacity, inst.total_weight());
  const auto width = static_cast<std::size_t>(cap) + 1;

  std::vector<std::vector<Node>> layers(width);
  layers[0].push_back(Node{});
  for (std::size_t i = 0; i < inst.items.size(); ++i) {
    const auto& it = inst.items[i];
    if (it.weight > cap) continue;
    std::vector<std::vector<Node>> next = layers;
    for (std::int64_t w = cap; w >= it.weight; --w) {
      const auto& src = layers[static_cast<std::size_t>(w - it.weight)];
      if (src.empty()) continue;
      auto& dst = next[static_cast<std::size_t>(w)];
      for (const auto& n : src) {
        Node ext{n.a + it.value_a, n.b + it.value_b, n.items};
        ext.items.push_back(i);
        dst.push_back(std::move(ext));
      }
      dst = detail::pareto2d(std::move(dst));
    }
    std::vector<Node> stair;
    for (std::size_t w = 0; w < width; ++w) {
      auto& layer = next[w];
      if (layer.empty()) continue;
      std::vector<Node> kept;
      for (auto& n : layer) {
        if (!detail::weakly_dominated(stair, n.a, n.b)) kept.push_back(std::move(n));
      }
      layer = std::move(kept);
      if (layer.empty()) continue;
      std::vector<Node> merged = stair;
      merged.insert(merged.end(), layer.begin(), layer.end());
      stair = detail::pareto2d(std::move(merged));
    }
    layers = std::move(next);
  }

  // Lighter layers first so the stable 2-D filter keeps the lightest witness.
  std::vector<Node> all;
  for (std::size_t w = 0; w < width; ++w) {
    for (const auto& n : layers[w]) all.push_back(n);
  }
  auto front = detail::pareto2d(std::move(all));

  PayoffFront out;
  for (const auto& n : front) {
    PayoffPoint p;
    p.value_a = n.a;
    p.value_b = n.b;
    for (std::size_t idx : n.items) {
      p.weight += inst.items[idx].weight;
      p.witness.push_back(inst.items[idx].id);
    }
    out.points.push_back(std::move(p));
  }
  return out;
}

// Harmonic mean of two normalized scores in [0, 100]; 0 when both are 0.
inline double harmonic_mean(double f_a, double f_b) {
  if (f_a + f_b <= 0.0) return 0.0;
  return 2.0 * f_a * f_b / (f_a + f_b);
}

// OPT*: the best harmonic mean of normalized scores over the frontier.
inline double max_harmonic_mean(const PayoffFront& front, std::int64_t opt_a, std::int64_t opt_b) {
  if (opt_a <= 0 || opt_b <= 0)
    throw DegenerateInstance("max_harmonic_mean: individual optimum is zero");
  double best = 0.0;
  for (const auto& p : front.points) {
    const double f_a = 100.0 * static_cast<double>(p.value_a) / static_cast<double>(opt_a);
    const double f_b = 100.0 * static_cast<double>(p.value_b) / static_cast<double>(opt_b);
    best = std::max(best, harmonic_mean(f_a, f_b));
  }
  return best;
}

// --- Deal or No Deal allocation scan ---------------------------------------

using ItemCounts = std::map<std::string, std::int64_t>;
using ValueMap = std::map<std::string, std::int64_t>;
using Payoffs = std::pair<std::int64_t, std::int64_t>;

inline constexpr std::int64_t kDefaultUnitCap = 20;

struct AllocationScan {
  std::int64_t max_total = 0;
  std::int64_t max_a = 0;
  std::int64_t max_b = 0;
  std::vector<Payoffs> pareto_pairs;  // sorted ascending
  std::vector<Payoffs> achievable;    // every distinct full-assignment payoff, sorted
  std::int64_t unit_count = 0;
  std::uint64_t universe_size = 0;    // 2^unit_count unit assignments

  bool is_pareto(const Payoffs& p) const {
    return std::binary_search(pareto_pairs.begin(), pareto_pairs.end(), p);
  }
};

// Every assignment of item units to A or B. Units of one type are
// interchangeable, so the scan walks per-type splits (k units to A, the
// rest to B); the achievable payoff set is the same as over all 2^units
// unit assignments.
inline AllocationScan dond_allocation_scan(const ItemCounts& pool, const ValueMap& values_a,
                                           const ValueMap& values_b,
                                           std::int64_t unit_cap = kDefaultUnitCap) {
  if (pool.empty()) throw InvalidInput("allocation scan: empty pool");
  struct Type {
    std::int64_t count, va, vb;
  };
  std::vector<Type> types;
  std::int64_t units = 0;
  for (const auto& [name, count] : pool) {
    auto ia = values_a.find(name);
    auto ib = values_b.find(name);
    if (ia == values_a.end() || ib == values_b.end())
      throw InvalidInput("allocation scan: item '" + name + "' lacks a value for both players");
    if (count < 0 || ia->second < 0 || ib->second < 0)
      throw InvalidInput("allocation scan: negative count or value for '" + name + "'");
    types.push_back({count, ia->second, ib->second});
    units += count;
  }
  if (units > unit_cap)
    throw InstanceTooLarge("allocation scan: " + std::to_string(units) + " units exceed the cap of " +
                           std::to_string(unit_cap));

  std::set<Payoffs> pairs;
  std::vector<std::int64_t> split(types.size(), 0);
  while (true) {
    std::int64_t a = 0, b = 0;
    for (std::size_t t = 0; t < types.size(); ++t) {
      a += split[t] * types[t].va;
      b += (types[t].count - split[t]) * types[t].vb;
    }
    pairs.emplace(a, b);
    std::size_t t = 0;
    while (t < types.size() && split[t] == types[t].count) split[t++] = 0;
    if (t == types.size()) break;
    ++split[t];
  }

  AllocationScan scan;
  scan.unit_count = units;
  scan.universe_size = units >= 64 ? 0 : (std::uint64_t{1} << units);
  scan.achievable.assign(pairs.begin(), pairs.end());
  for (const auto& [a, b] : scan.achievable) {
    scan.max_total = std::max(scan.max_total, a + b);
    scan.max_a = std::max(scan.max_a, a);
    scan.max_b = std::max(scan.max_b, b);
  }
  // Sorted by a ascending; a pair is efficient iff no later pair has b >= it
  // (later pairs with equal a have larger b, so they dominate).
  std::int64_t best_b = -1;
  for (auto it = scan.achievable.rbegin(); it != scan.achievable.rend(); ++it) {
    if (it->second > best_b) {
      scan.pareto_pairs.push_back(*it);
      best_b = it->second;
    }
  }
  std::sort(scan.pareto_pairs.begin(), scan.pareto_pairs.end());
  return scan;
}

// Largest gain one player can get over `achieved` without lowering the
// other's payoff, floored at 0.
inline std::int64_t max_pareto_improvement(const AllocationScan& scan, const Payoffs& achieved) {
  std::int64_t best = 0;
  for (const auto& [a, b] : scan.achievable) {
    if (b >= achieved.second) best = std::max(best, a - achieved.first);
    if (a >= achieved.first) best = std::max(best, b - achieved.second);
  }
  return best;
}

// --- Clean Up ----------------------------------------------------------------

// Expected Euclidean distance between two uniformly placed cells on a
// width x height grid, using the per-axis mean |i - j| = (n^2 - 1) / (3n).
inline double expected_distance(std::int64_t width, std::int64_t height) {
  if (width < 1 || height < 1) throw InvalidInput("expected_distance: dimensions must be >= 1");
  const auto axis = [](std::int64_t n) {
    const double d = static_cast<double>(n);
    return (d * d - 1.0) / (3.0 * d);
  };
  return std::hypot(axis(width), axis(height));
}

}  // namespace negobench::optimize
