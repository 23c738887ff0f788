#pragma once
// Knowledge Stream: fact checking as min-cost max-flow.
//
// Each unmasked KG edge {a, b} becomes two opposing arcs. The arc entering w
// has capacity u(label, p) / (1 + ln k(w)) and cost ln k(w). Augmenting
// paths found by successive shortest paths form the stream; each path
// contributes bottleneck * specificity to the truth score.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "kstream/error.hpp"
#include "kstream/graph.hpp"
#include "kstream/min_cost_flow.hpp"
#include "kstream/relsim.hpp"

namespace kstream {

struct PathStep {
  EdgeId edge;
  RelationId relation;
  bool forward;  // traversed along the stored a -> b orientation

  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct EvidencePath {
  std::vector<NodeId> nodes;  // subject first, object last
  std::vector<PathStep> steps;
  double bottleneck = 0.0;
  double specificity = 0.0;
  double net_flow = 0.0;  // bottleneck * specificity
  double cost = 0.0;      // sum of ln k over entered nodes
  bool cancels_flow = false;  // uses a residual reverse arc
};

struct StreamDiagnostics {
  double min_reduced_cost = 0.0;
  double max_conservation_error = 0.0;
  double max_capacity_violation = 0.0;
  double total_cost = 0.0;
  std::size_t augmentations = 0;
  std::vector<double> reduced_distances;  // d(o) per search, discovery order
};

struct Stream {
  std::vector<EvidencePath> paths;  // discovery order
  double total_flow = 0.0;   // gamma
  double truth_score = 0.0;  // tau_KS
  bool truncated = false;
  StreamDiagnostics diagnostics;
};

enum class PathMode {
  iteration,      // one evidence path per SSP augmentation
  decomposition,  // decompose the terminal flow into source-sink paths
};

struct StreamConfig {
  std::size_t max_paths = kUnlimited;
  std::size_t max_hops = kUnlimited;
  std::optional<std::chrono::milliseconds> time_budget;
  PathMode mode = PathMode::iteration;
  // When set, capacities are rounded to integers at this scale and the
  // integral engine runs instead of the real-valued one.
  std::optional<std::int64_t> integral_scale;
  bool verify_invariants = false;
};

inline double edge_cost(const KnowledgeGraph& g, NodeId head) {
  const auto k = g.degree(head);
  if (k == 0) throw internal_error("traversed node has degree 0");
  return std::log(static_cast<double>(k));
}

inline double edge_capacity(const KnowledgeGraph& g, const SimilarityModel& m,
                            EdgeId e, NodeId head, RelationId p) {
  const auto& edge = g.edge(e);
  if (head != edge.a && head != edge.b)
    throw bad_input("capacity head must be an endpoint of the edge");
  return m.similarity(edge.relation, p) / (1.0 + edge_cost(g, head));
}

// 1 / (1 + sum of ln k over intermediate nodes).
inline double path_specificity(const KnowledgeGraph& g,
                               std::span<const NodeId> nodes) {
  if (nodes.size() < 2) throw bad_input("a path needs at least two nodes");
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i)
    sum += std::log(static_cast<double>(g.degree(nodes[i])));
  return 1.0 / (1.0 + sum);
}

// Sum of net flow over the first k paths in discovery order.
inline double truth_score_topk(const Stream& stream, std::size_t k) {
  if (k == 0) throw bad_input("k must be at least 1");
  double score = 0.0;
  for (std::size_t i = 0; i < stream.paths.size() && i < k; ++i)
    score += stream.paths[i].net_flow;
  return score;
}

namespace detail {

struct ArcOrigin {
  EdgeId edge;
  RelationId relation;
  bool forward;
};

template <FlowCapacity Cap>
struct StreamNetwork {
  MinCostFlow<Cap> flow;
  std::vector<ArcOrigin> origin;  // indexed by original arc id / 2
  Cap scale_to;                   // 1 for reals, the scale for integers
};

template <FlowCapacity Cap>
StreamNetwork<Cap> build_stream_network(const KnowledgeGraph& g,
                                        const SimilarityModel& m,
                                        const ClaimTriple& c,
                                        std::int64_t scale) {
  const auto mask = mask_claim_edges(g, c);
  const auto u = m.similarity_to(c.predicate);
  StreamNetwork<Cap> net{MinCostFlow<Cap>(g.num_nodes()), {}, Cap{1}};
  if constexpr (std::is_integral_v<Cap>) net.scale_to = scale;

  const auto add = [&](NodeId from, NodeId to, EdgeId e, RelationId r, bool fwd) {
    const double real_cap = u[r] / (1.0 + edge_cost(g, to));
    Cap cap{};
    if constexpr (std::is_integral_v<Cap>) {
      const double one[1] = {real_cap};
      cap = integerize_capacities(one, scale).front();
    } else {
      cap = real_cap;
    }
    if (cap <= Cap{}) return;  // u = 0 arcs can never carry flow
    const int id = net.flow.add_arc(static_cast<int>(from), static_cast<int>(to),
                                    cap, edge_cost(g, to));
    if (static_cast<std::size_t>(id / 2) != net.origin.size())
      throw internal_error("arc bookkeeping out of sync");
    net.origin.push_back({e, r, fwd});
  };

  const auto edges = g.edges();
  for (EdgeId e = 0; e < edges.size(); ++e) {
    if (mask.contains(e)) continue;
    const auto& edge = edges[e];
    if (u[edge.relation] <= 0.0) continue;
    add(edge.a, edge.b, e, edge.relation, true);
    add(edge.b, edge.a, e, edge.relation, false);
  }
  return net;
}

template <FlowCapacity Cap>
double to_real(Cap x, Cap scale) {
  return static_cast<double>(x) / static_cast<double>(scale);
}

inline void finish_path(const KnowledgeGraph& g, EvidencePath& path) {
  path.specificity = path_specificity(g, path.nodes);
  path.net_flow = path.bottleneck * path.specificity;
}

// Greedy decomposition of the terminal flow: repeatedly take the cheapest
// source-sink path over flow-carrying arcs and peel off its bottleneck.
template <FlowCapacity Cap>
std::vector<EvidencePath> decompose_flow(const KnowledgeGraph& g,
                                         const StreamNetwork<Cap>& net, NodeId s,
                                         NodeId o) {
  const auto& mcf = net.flow;
  const std::size_t arcs = mcf.num_arcs();
  std::vector<Cap> remaining(arcs);
  for (std::size_t k = 0; k < arcs; ++k)
    remaining[k] = mcf.flow(static_cast<int>(2 * k));

  // Opposing arcs of one KG edge carrying flow both ways cancel out.
  std::map<EdgeId, std::pair<std::size_t, std::size_t>> by_edge;
  for (std::size_t k = 0; k < arcs; ++k) {
    auto& slot = by_edge.try_emplace(net.origin[k].edge, kUnlimited, kUnlimited)
                     .first->second;
    (net.origin[k].forward ? slot.first : slot.second) = k;
  }
  for (const auto& [edge, pair] : by_edge) {
    if (pair.first == kUnlimited || pair.second == kUnlimited) continue;
    const Cap both = std::min(remaining[pair.first], remaining[pair.second]);
    remaining[pair.first] -= both;
    remaining[pair.second] -= both;
  }

  const auto carries = [&](std::size_t k) {
    if constexpr (std::is_floating_point_v<Cap>)
      return remaining[k] >= MinCostFlow<Cap>::kEpsilon;
    else
      return remaining[k] > 0;
  };

  std::vector<std::vector<std::size_t>> out(g.num_nodes());
  for (std::size_t k = 0; k < arcs; ++k)
    out[static_cast<std::size_t>(mcf.arc(static_cast<int>(2 * k)).from)].push_back(k);

  std::vector<EvidencePath> paths;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (;;) {
    std::vector<double> dist(g.num_nodes(), inf);
    std::vector<std::size_t> parent(g.num_nodes(), kUnlimited);
    std::vector<std::uint8_t> done(g.num_nodes(), 0);
    using Label = std::pair<double, NodeId>;
    std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
    dist[s] = 0.0;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (done[v]) continue;
      done[v] = 1;
      if (v == o) break;
      for (auto k : out[v]) {
        if (!carries(k)) continue;
        const auto& a = mcf.arc(static_cast<int>(2 * k));
        const auto w = static_cast<NodeId>(a.to);
        if (done[w]) continue;
        if (d + a.cost < dist[w]) {
          dist[w] = d + a.cost;
          parent[w] = k;
          heap.emplace(dist[w], w);
        }
      }
    }
    if (!std::isfinite(dist[o])) break;

    std::vector<std::size_t> chain;
    for (NodeId v = o; v != s;) {
      const auto k = parent[v];
      chain.push_back(k);
      v = static_cast<NodeId>(mcf.arc(static_cast<int>(2 * k)).from);
    }
    std::reverse(chain.begin(), chain.end());
    Cap beta = remaining[chain.front()];
    for (auto k : chain) beta = std::min(beta, remaining[k]);
    for (auto k : chain) remaining[k] -= beta;

    EvidencePath path;
    path.nodes.push_back(s);
    for (auto k : chain) {
      const auto& a = mcf.arc(static_cast<int>(2 * k));
      path.nodes.push_back(static_cast<NodeId>(a.to));
      path.steps.push_back({net.origin[k].edge, net.origin[k].relation,
                            net.origin[k].forward});
      path.cost += a.cost;
    }
    path.bottleneck = to_real(beta, net.scale_to);
    finish_path(g, path);
    paths.push_back(std::move(path));
  }
  return paths;
}

template <FlowCapacity Cap>
Stream run_stream(const KnowledgeGraph& g, const SimilarityModel& m,
                  const ClaimTriple& c, const StreamConfig& cfg) {
  auto net = build_stream_network<Cap>(g, m, c, cfg.integral_scale.value_or(1));
  Stream stream;

  typename MinCostFlow<Cap>::Options opts;
  opts.max_paths = cfg.max_paths;
  opts.max_hops = cfg.max_hops;
  opts.time_budget = cfg.time_budget;
  opts.verify_invariants = cfg.verify_invariants;

  const auto on_augment = [&](const typename MinCostFlow<Cap>::Augmentation& aug) {
    stream.diagnostics.reduced_distances.push_back(aug.reduced_distance);
    if (cfg.mode != PathMode::iteration) return;
    EvidencePath path;
    path.nodes.push_back(c.subject);
    for (int id : aug.arcs) {
      const auto& a = net.flow.arc(id);
      const auto& origin = net.origin[static_cast<std::size_t>(id / 2)];
      path.nodes.push_back(static_cast<NodeId>(a.to));
      // A reverse residual arc walks the KG edge against the flow it cancels.
      const bool original = MinCostFlow<Cap>::is_original(id);
      path.steps.push_back({origin.edge, origin.relation,
                            original ? origin.forward : !origin.forward});
      path.cost += a.cost;
      if (!original) path.cancels_flow = true;
    }
    path.bottleneck = to_real(aug.bottleneck, net.scale_to);
    finish_path(g, path);
    stream.paths.push_back(std::move(path));
  };

  const auto result = net.flow.solve(static_cast<int>(c.subject),
                                     static_cast<int>(c.object), opts, on_augment);

  if (cfg.mode == PathMode::decomposition)
    stream.paths = decompose_flow(g, net, c.subject, c.object);

  stream.truncated = result.truncated;
  stream.diagnostics.min_reduced_cost = result.min_reduced_cost;
  stream.diagnostics.max_conservation_error =
      result.max_conservation_error / static_cast<double>(net.scale_to);
  stream.diagnostics.max_capacity_violation =
      result.max_capacity_violation / static_cast<double>(net.scale_to);
  stream.diagnostics.total_cost =
      result.total_cost / static_cast<double>(net.scale_to);
  stream.diagnostics.augmentations = result.augmentations;

  stream.total_flow = to_real(result.total_flow, net.scale_to);
  for (const auto& path : stream.paths) stream.truth_score += path.net_flow;
  return stream;
}

}  // namespace detail

// Scores (s, p, o) by the min-cost max-flow from s to o. Edges labeled p
// between s and o are hidden for the duration of the computation.
inline Stream knowledge_stream(const KnowledgeGraph& g, const SimilarityModel& m,
                               const ClaimTriple& c, const StreamConfig& cfg = {}) {
  g.check_node(c.subject);
  g.check_node(c.object);
  g.check_relation(c.predicate);
  if (c.subject == c.object) throw bad_input("claim subject and object must differ");
  if (m.size() != g.num_relations())
    throw bad_input("similarity model does not match the graph's relations");
  if (cfg.integral_scale)
    return detail::run_stream<std::int64_t>(g, m, c, cfg);
  return detail::run_stream<double>(g, m, c, cfg);
}

}  // namespace kstream
