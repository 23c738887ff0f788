#pragma once
// Successive shortest path min-cost max-flow with node potentials.
//
// Arcs are stored in pairs: index 2k is the original arc, 2k+1 its residual
// reverse (capacity 0, cost negated). Reduced costs follow
//   c^pi(i, j) = c(i, j) - pi(i) + pi(j)
// and after each search the potentials move by pi <- pi - min(d, d(t)), which
// keeps every residual arc non-negative under c^pi.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "kstream/error.hpp"

namespace kstream {

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

template <typename Cap>
concept FlowCapacity = std::same_as<Cap, double> || std::same_as<Cap, std::int64_t>;

template <FlowCapacity Cap>
class MinCostFlow {
 public:
  using capacity_type = Cap;

  struct Arc {
    int from;
    int to;
    Cap capacity;
    Cap flow;
    double cost;
  };

  struct Augmentation {
    std::vector<int> arcs;  // arc indices from source to sink
    Cap bottleneck;
    double cost;             // sum of original arc costs along the path
    double reduced_distance; // d(t) under the potentials of this search
  };

  struct Options {
    std::size_t max_paths = kUnlimited;
    std::size_t max_hops = kUnlimited;
    std::optional<std::chrono::milliseconds> time_budget;
    bool verify_invariants = false;
  };

  struct Result {
    Cap total_flow{};
    double total_cost = 0.0;
    std::size_t augmentations = 0;
    bool truncated = false;  // a path/hop/time limit stopped the search
    // Populated when Options::verify_invariants is set.
    double min_reduced_cost = 0.0;
    double max_conservation_error = 0.0;
    double max_capacity_violation = 0.0;
  };

  // Residual arcs with less than this capacity count as saturated.
  static constexpr double kEpsilon = 1e-12;
  // A reduced cost below -kReducedCostTolerance means the potentials are wrong.
  static constexpr double kReducedCostTolerance = 1e-9;

  explicit MinCostFlow(std::size_t nodes) : out_(nodes), potential_(nodes, 0.0) {}

  std::size_t num_nodes() const noexcept { return out_.size(); }
  std::size_t num_arcs() const noexcept { return arcs_.size() / 2; }

  // Returns the index of the original arc.
  int add_arc(int from, int to, Cap capacity, double cost) {
    check_node(from);
    check_node(to);
    if (capacity < Cap{}) throw bad_input("arc capacity must be non-negative");
    if (!(cost >= 0.0) || !std::isfinite(cost))
      throw bad_input("arc cost must be finite and non-negative");
    const int id = static_cast<int>(arcs_.size());
    arcs_.push_back({from, to, capacity, Cap{}, cost});
    arcs_.push_back({to, from, Cap{}, Cap{}, -cost});
    out_[static_cast<std::size_t>(from)].push_back(id);
    out_[static_cast<std::size_t>(to)].push_back(id + 1);
    return id;
  }

  const Arc& arc(int id) const { return arcs_.at(static_cast<std::size_t>(id)); }
  static bool is_original(int id) noexcept { return (id & 1) == 0; }
  static int original_of(int id) noexcept { return id & ~1; }

  Cap residual(int id) const {
    const auto& a = arcs_[static_cast<std::size_t>(id)];
    return a.capacity - a.flow;
  }

  // Flow on an original arc.
  Cap flow(int id) const { return arcs_.at(static_cast<std::size_t>(id)).flow; }

  double potential(int v) const { return potential_.at(static_cast<std::size_t>(v)); }

  double reduced_cost(int id) const {
    const auto& a = arcs_[static_cast<std::size_t>(id)];
    return a.cost - potential_[static_cast<std::size_t>(a.from)] +
           potential_[static_cast<std::size_t>(a.to)];
  }

  // Net flow leaving v over original arcs.
  double net_outflow(int v) const {
    check_node(v);
    double b = 0.0;
    // Reverse arcs carry the negated flow of the arc entering v.
    for (int id : out_[static_cast<std::size_t>(v)])
      b += static_cast<double>(arcs_[static_cast<std::size_t>(id)].flow);
    return b;
  }

  bool has_residual(int id) const {
    if constexpr (std::is_floating_point_v<Cap>)
      return residual(id) >= kEpsilon;
    else
      return residual(id) > 0;
  }

  struct ShortestPaths {
    std::vector<double> distance;  // +inf when unreachable
    std::vector<int> parent_arc;   // -1 at the source and unreachable nodes
  };

  // Label-setting search over residual arcs under reduced costs. When `target`
  // is given the search stops once it is settled; unsettled nodes keep their
  // tentative labels.
  ShortestPaths shortest_paths(int source, std::optional<int> target = {}) const {
    check_node(source);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = out_.size();
    ShortestPaths sp{std::vector<double>(n, inf), std::vector<int>(n, -1)};
    std::vector<std::uint8_t> settled(n, 0);
    using Label = std::pair<double, int>;  // (distance, node) lexicographic
    std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
    sp.distance[static_cast<std::size_t>(source)] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      const auto vi = static_cast<std::size_t>(v);
      if (settled[vi]) continue;
      settled[vi] = 1;
      if (target && v == *target) break;
      for (int id : out_[vi]) {
        if (!has_residual(id)) continue;
        double rc = reduced_cost(id);
        if (rc < -kReducedCostTolerance)
          throw internal_error("negative reduced cost " + std::to_string(rc) +
                               " on residual arc " + std::to_string(id));
        if (rc < 0.0) rc = 0.0;
        const auto w = static_cast<std::size_t>(arcs_[static_cast<std::size_t>(id)].to);
        if (settled[w]) continue;
        const double nd = d + rc;
        if (nd < sp.distance[w]) {
          sp.distance[w] = nd;
          sp.parent_arc[w] = id;
          heap.emplace(nd, static_cast<int>(w));
        }
      }
    }
    return sp;
  }

  // Runs SSP from source to sink. `on_augment` is called after each push with
  // the augmentation and the network state already updated.
  template <typename Visitor>
  Result solve(int source, int sink, const Options& opts, Visitor&& on_augment) {
    check_node(source);
    check_node(sink);
    if (source == sink) throw bad_input("source and sink must differ");
    const auto started = std::chrono::steady_clock::now();
    Result result;
    if (opts.verify_invariants) result.min_reduced_cost = min_residual_reduced_cost();

    for (;;) {
      if (result.augmentations >= opts.max_paths) {
        result.truncated = path_exists(source, sink);
        break;
      }
      if (opts.time_budget &&
          std::chrono::steady_clock::now() - started >= *opts.time_budget) {
        result.truncated = true;
        break;
      }

      const auto sp = shortest_paths(source, sink);
      const double dt = sp.distance[static_cast<std::size_t>(sink)];
      if (!std::isfinite(dt)) break;

      Augmentation aug;
      aug.reduced_distance = dt;
      for (int v = sink; v != source;) {
        const int id = sp.parent_arc[static_cast<std::size_t>(v)];
        aug.arcs.push_back(id);
        v = arcs_[static_cast<std::size_t>(id)].from;
      }
      std::reverse(aug.arcs.begin(), aug.arcs.end());
      if (aug.arcs.size() > opts.max_hops) {
        result.truncated = true;
        break;
      }

      // pi <- pi - min(d, d(t))
      for (std::size_t v = 0; v < potential_.size(); ++v)
        potential_[v] -= std::min(sp.distance[v], dt);

      aug.bottleneck = residual(aug.arcs.front());
      aug.cost = 0.0;
      for (int id : aug.arcs) {
        aug.bottleneck = std::min(aug.bottleneck, residual(id));
        aug.cost += arcs_[static_cast<std::size_t>(id)].cost;
      }
      for (int id : aug.arcs) {
        arcs_[static_cast<std::size_t>(id)].flow += aug.bottleneck;
        arcs_[static_cast<std::size_t>(id ^ 1)].flow -= aug.bottleneck;
      }
      result.total_flow += aug.bottleneck;
      result.total_cost += static_cast<double>(aug.bottleneck) * aug.cost;
      ++result.augmentations;

      if (opts.verify_invariants) record_invariants(source, sink, result);
      on_augment(static_cast<const Augmentation&>(aug));
    }
    return result;
  }

  Result solve(int source, int sink, const Options& opts = {}) {
    return solve(source, sink, opts, [](const Augmentation&) {});
  }

 private:
  void check_node(int v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= out_.size())
      throw bad_input("flow node out of range: " + std::to_string(v));
  }

  bool path_exists(int source, int sink) const {
    std::vector<std::uint8_t> seen(out_.size(), 0);
    std::vector<int> stack{source};
    seen[static_cast<std::size_t>(source)] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (v == sink) return true;
      for (int id : out_[static_cast<std::size_t>(v)]) {
        const int w = arcs_[static_cast<std::size_t>(id)].to;
        if (has_residual(id) && !seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    return false;
  }

  double min_residual_reduced_cost() const {
    double lo = 0.0;
    for (std::size_t id = 0; id < arcs_.size(); ++id)
      if (has_residual(static_cast<int>(id)))
        lo = std::min(lo, reduced_cost(static_cast<int>(id)));
    return lo;
  }

  void record_invariants(int source, int sink, Result& result) const {
    result.min_reduced_cost =
        std::min(result.min_reduced_cost, min_residual_reduced_cost());
    for (std::size_t id = 0; id < arcs_.size(); id += 2) {
      const auto& a = arcs_[id];
      const double f = static_cast<double>(a.flow);
      const double over = std::max(-f, f - static_cast<double>(a.capacity));
      result.max_capacity_violation = std::max(result.max_capacity_violation, over);
    }
    const double gamma = static_cast<double>(result.total_flow);
    for (int v = 0; v < static_cast<int>(out_.size()); ++v) {
      double expected = 0.0;
      if (v == source) expected = gamma;
      if (v == sink) expected = -gamma;
      result.max_conservation_error = std::max(
          result.max_conservation_error, std::abs(net_outflow(v) - expected));
    }
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> out_;
  std::vector<double> potential_;
};

// Maps real capacities to integers by round(capacity * scale).
inline std::vector<std::int64_t> integerize_capacities(std::span<const double> caps,
                                                       std::int64_t scale) {
  if (scale < 1) throw bad_input("integerization scale must be at least 1");
  constexpr double limit = static_cast<double>(std::int64_t{1} << 52);
  std::vector<std::int64_t> out;
  out.reserve(caps.size());
  for (double c : caps) {
    if (!(c >= 0.0)) throw bad_input("capacities must be non-negative");
    const double scaled = std::round(c * static_cast<double>(scale));
    if (!(scaled <= limit))
      throw bad_input("capacity overflows at integerization scale " +
                      std::to_string(scale));
    out.push_back(static_cast<std::int64_t>(scaled));
  }
  return out;
}

}  // namespace kstream
