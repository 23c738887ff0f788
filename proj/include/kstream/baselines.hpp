#pragma once
// Predicate-blind link-prediction baselines over the masked undirected graph.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "kstream/error.hpp"
#include "kstream/graph.hpp"

namespace kstream {

struct KatzParams {
  double beta = 0.05;
  std::size_t max_length = 3;
};

// sum_{l=1..L} beta^l * (number of s-o walks of length l). Parallel edges
// count as distinct walks.
inline double katz(const KnowledgeGraph& g, const ClaimTriple& c,
                   const KatzParams& params = {}) {
  g.check_node(c.subject);
  g.check_node(c.object);
  if (!(params.beta > 0.0 && params.beta < 1.0))
    throw bad_input("katz beta must lie in (0, 1)");
  if (params.max_length < 1) throw bad_input("katz max length must be >= 1");

  const auto mask = mask_claim_edges(g, c);
  std::vector<double> walks(g.num_nodes(), 0.0), next(g.num_nodes(), 0.0);
  std::vector<NodeId> frontier{c.subject}, next_frontier;
  std::vector<std::uint8_t> in_next(g.num_nodes(), 0);
  walks[c.subject] = 1.0;

  double score = 0.0;
  double weight = 1.0;
  for (std::size_t len = 1; len <= params.max_length; ++len) {
    weight *= params.beta;
    next_frontier.clear();
    for (NodeId v : frontier) {
      for (const auto& inc : g.incident(v)) {
        if (mask.contains(inc.edge)) continue;
        next[inc.other] += walks[v];
        if (!in_next[inc.other]) {
          in_next[inc.other] = 1;
          next_frontier.push_back(inc.other);
        }
      }
    }
    for (NodeId v : frontier) walks[v] = 0.0;
    for (NodeId v : next_frontier) {
      walks[v] = next[v];
      next[v] = 0.0;
      in_next[v] = 0;
    }
    frontier.swap(next_frontier);
    score += weight * walks[c.object];
  }
  return score;
}

namespace detail {

// Distinct neighbors of v over unmasked edges, sorted.
inline std::vector<NodeId> neighbor_set(const KnowledgeGraph& g, NodeId v,
                                        const GraphMask& mask) {
  std::vector<NodeId> out;
  for (const auto& inc : g.incident(v))
    if (!mask.contains(inc.edge)) out.push_back(inc.other);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

inline double adamic_adar(const KnowledgeGraph& g, const ClaimTriple& c) {
  const auto mask = mask_claim_edges(g, c);
  const auto ns = detail::neighbor_set(g, c.subject, mask);
  const auto no = detail::neighbor_set(g, c.object, mask);
  std::vector<NodeId> common;
  std::set_intersection(ns.begin(), ns.end(), no.begin(), no.end(),
                        std::back_inserter(common));
  double score = 0.0;
  for (NodeId z : common) score += 1.0 / std::log(static_cast<double>(g.degree(z)));
  return score;
}

inline double jaccard(const KnowledgeGraph& g, const ClaimTriple& c) {
  const auto mask = mask_claim_edges(g, c);
  const auto ns = detail::neighbor_set(g, c.subject, mask);
  const auto no = detail::neighbor_set(g, c.object, mask);
  std::vector<NodeId> common, all;
  std::set_intersection(ns.begin(), ns.end(), no.begin(), no.end(),
                        std::back_inserter(common));
  std::set_union(ns.begin(), ns.end(), no.begin(), no.end(),
                 std::back_inserter(all));
  if (all.empty()) return 0.0;
  return static_cast<double>(common.size()) / static_cast<double>(all.size());
}

inline double degree_product(const KnowledgeGraph& g, const ClaimTriple& c) {
  return static_cast<double>(g.degree(c.subject)) *
         static_cast<double>(g.degree(c.object));
}

}  // namespace kstream
