#pragma once
// Single-path scorers.
//
// KL maximizes path specificity 1 / (1 + sum ln k(v_i)) over intermediate
// nodes. KL-REL maximizes
//   [ sum_i ln k(v_i) / u(r_{i-1}, p)  +  1 / u(r_{n-1}, p) ]^-1
// where r_{i-1} is the edge entering v_i and the last term charges only the
// relation of the edge entering the object. Both are shortest-path problems
// with non-negative, arc-local costs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "kstream/error.hpp"
#include "kstream/graph.hpp"
#include "kstream/relsim.hpp"
#include "kstream/stream.hpp"

namespace kstream {

enum class LinkerVariant { kl, kl_rel };

struct LinkerResult {
  double score = 0.0;
  EvidencePath path;  // only nodes, steps, specificity and cost are filled
  LinkerVariant variant = LinkerVariant::kl;
};

namespace detail {

// Arc cost callback: (incidence taken, entered node) -> cost, or +inf to prune.
template <typename ArcCost>
LinkerResult cheapest_path(const KnowledgeGraph& g, const ClaimTriple& c,
                           LinkerVariant variant, ArcCost&& arc_cost) {
  g.check_node(c.subject);
  g.check_node(c.object);
  g.check_relation(c.predicate);
  if (c.subject == c.object) throw bad_input("claim subject and object must differ");

  const auto mask = mask_claim_edges(g, c);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = g.num_nodes();

  // Labels order by (cost, hops, predecessor id).
  std::vector<double> cost(n, inf);
  std::vector<std::uint32_t> hops(n, 0);
  std::vector<NodeId> pred(n, 0);
  std::vector<Incidence> via(n);
  std::vector<std::uint8_t> done(n, 0);

  using Label = std::tuple<double, std::uint32_t, NodeId>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  cost[c.subject] = 0.0;
  heap.emplace(0.0, 0u, c.subject);

  while (!heap.empty()) {
    const auto [d, h, v] = heap.top();
    heap.pop();
    if (done[v]) continue;
    done[v] = 1;
    if (v == c.object) break;
    for (const auto& inc : g.incident(v)) {
      if (mask.contains(inc.edge)) continue;
      const NodeId w = inc.other;
      if (done[w]) continue;
      const double step = arc_cost(inc, w);
      if (!std::isfinite(step)) continue;
      const double nd = d + step;
      const auto nh = h + 1;
      if (std::tie(nd, nh, v) < std::tie(cost[w], hops[w], pred[w])) {
        cost[w] = nd;
        hops[w] = nh;
        pred[w] = v;
        via[w] = inc;
        heap.emplace(nd, nh, w);
      }
    }
  }

  LinkerResult result;
  result.variant = variant;
  if (!std::isfinite(cost[c.object])) return result;

  std::vector<NodeId> nodes;
  std::vector<PathStep> steps;
  for (NodeId v = c.object; v != c.subject; v = pred[v]) {
    nodes.push_back(v);
    steps.push_back({via[v].edge, via[v].relation, via[v].forward});
  }
  nodes.push_back(c.subject);
  std::reverse(nodes.begin(), nodes.end());
  std::reverse(steps.begin(), steps.end());

  result.path.nodes = std::move(nodes);
  result.path.steps = std::move(steps);
  result.path.cost = cost[c.object];
  return result;
}

}  // namespace detail

inline LinkerResult kl_score(const KnowledgeGraph& g, const ClaimTriple& c) {
  auto result = detail::cheapest_path(
      g, c, LinkerVariant::kl, [&](const Incidence&, NodeId entered) {
        return entered == c.object ? 0.0
                                   : std::log(static_cast<double>(g.degree(entered)));
      });
  if (!result.path.nodes.empty()) {
    result.score = 1.0 / (1.0 + result.path.cost);
    result.path.specificity = result.score;
  }
  return result;
}

inline LinkerResult kl_rel_score(const KnowledgeGraph& g, const SimilarityModel& m,
                                 const ClaimTriple& c) {
  if (m.size() != g.num_relations())
    throw bad_input("similarity model does not match the graph's relations");
  g.check_relation(c.predicate);
  const auto u = m.similarity_to(c.predicate);
  auto result = detail::cheapest_path(
      g, c, LinkerVariant::kl_rel, [&](const Incidence& inc, NodeId entered) {
        const double sim = u[inc.relation];
        if (sim <= 0.0) return std::numeric_limits<double>::infinity();
        if (entered == c.object) return 1.0 / sim;
        return std::log(static_cast<double>(g.degree(entered))) / sim;
      });
  if (!result.path.nodes.empty()) {
    result.score = 1.0 / result.path.cost;
    result.path.specificity = result.score;
  }
  return result;
}

}  // namespace kstream
