#pragma once
// Evidence export: JSON documents, Graphviz DOT, and flat TSV.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "kstream/graph.hpp"
#include "kstream/linker.hpp"
#include "kstream/stream.hpp"

namespace kstream {

// A scored claim with its evidence, independent of the method producing it.
struct ClaimReport {
  ClaimTriple claim;
  std::string method;
  double score = 0.0;
  std::optional<double> total_flow;   // gamma, flow methods only
  std::optional<double> truth_score;  // tau_KS, flow methods only
  std::vector<EvidencePath> paths;
  bool flow_paths = false;  // bottleneck and net flow are meaningful
};

inline ClaimReport report_stream(const ClaimTriple& c, std::string method, double score,
                                 const Stream& s) {
  return {c, std::move(method), score, s.total_flow, s.truth_score, s.paths, true};
}

inline ClaimReport report_linker(const ClaimTriple& c, std::string method,
                                 const LinkerResult& r) {
  ClaimReport rep{c, std::move(method), r.score, std::nullopt, std::nullopt, {}, false};
  if (!r.path.nodes.empty()) rep.paths.push_back(r.path);
  return rep;
}

inline ClaimReport report_scalar(const ClaimTriple& c, std::string method, double score) {
  return {c, std::move(method), score, std::nullopt, std::nullopt, {}, false};
}

inline nlohmann::json to_json(const KnowledgeGraph& g, const ClaimReport& rep) {
  using nlohmann::json;
  const auto opt = [](const std::optional<double>& x) -> json {
    return x ? json(*x) : json(nullptr);
  };
  json paths = json::array();
  for (const auto& p : rep.paths) {
    json nodes = json::array(), relations = json::array(), directions = json::array();
    for (auto v : p.nodes) nodes.push_back(g.node_label(v));
    for (const auto& s : p.steps) {
      relations.push_back(g.relation_label(s.relation));
      directions.push_back(s.forward ? "forward" : "inverse");
    }
    paths.push_back({
        {"nodes", nodes},
        {"relations", relations},
        {"directions", directions},
        {"beta", rep.flow_paths ? json(p.bottleneck) : json(nullptr)},
        {"specificity", p.specificity},
        {"w", rep.flow_paths ? json(p.net_flow) : json(p.specificity)},
    });
  }
  return {
      {"claim",
       {{"subject", g.node_label(rep.claim.subject)},
        {"predicate", g.relation_label(rep.claim.predicate)},
        {"object", g.node_label(rep.claim.object)}}},
      {"method", rep.method},
      {"score", rep.score},
      {"gamma", opt(rep.total_flow)},
      {"tau", opt(rep.truth_score)},
      {"paths", paths},
  };
}

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string fixed(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace detail

// Edge pen width grows with the net flow routed through the edge.
inline std::string to_dot(const KnowledgeGraph& g, const ClaimReport& rep) {
  std::map<std::tuple<NodeId, NodeId, EdgeId>, double> weight;
  std::vector<NodeId> nodes{rep.claim.subject, rep.claim.object};
  for (const auto& p : rep.paths) {
    const double w = rep.flow_paths ? p.net_flow : p.specificity;
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
      weight[{p.nodes[i], p.nodes[i + 1], p.steps[i].edge}] += w;
      nodes.push_back(p.nodes[i + 1]);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  double max_w = 0.0;
  for (const auto& [key, w] : weight) max_w = std::max(max_w, w);

  std::ostringstream out;
  out << "digraph evidence {\n  rankdir=LR;\n";
  for (auto v : nodes) {
    out << "  " << detail::dot_quote(g.node_label(v));
    if (v == rep.claim.subject || v == rep.claim.object) out << " [shape=box]";
    out << ";\n";
  }
  for (const auto& [key, w] : weight) {
    const auto& [from, to, edge] = key;
    const double pen = max_w > 0.0 ? 1.0 + 7.0 * w / max_w : 1.0;
    out << "  " << detail::dot_quote(g.node_label(from)) << " -> "
        << detail::dot_quote(g.node_label(to))
        << " [label=" << detail::dot_quote(g.relation_label(g.edge(edge).relation))
        << ", penwidth=" << detail::fixed(pen, 3) << "];\n";
  }
  out << "}\n";
  return out.str();
}

// Header line, then one row per path.
inline std::string to_tsv(const KnowledgeGraph& g, const ClaimReport& rep) {
  std::ostringstream out;
  out << "# " << g.node_label(rep.claim.subject) << '\t'
      << g.relation_label(rep.claim.predicate) << '\t'
      << g.node_label(rep.claim.object) << '\t' << rep.method << '\t'
      << detail::fixed(rep.score, 12) << '\n';
  out << "rank\tbeta\tspecificity\tw\tpath\n";
  for (std::size_t i = 0; i < rep.paths.size(); ++i) {
    const auto& p = rep.paths[i];
    out << i + 1 << '\t' << (rep.flow_paths ? detail::fixed(p.bottleneck, 12) : "NA")
        << '\t' << detail::fixed(p.specificity, 12) << '\t'
        << detail::fixed(rep.flow_paths ? p.net_flow : p.specificity, 12) << '\t';
    out << g.node_label(p.nodes.front());
    for (std::size_t k = 0; k < p.steps.size(); ++k) {
      const auto& rel = g.relation_label(p.steps[k].relation);
      out << (p.steps[k].forward ? " -" + rel + "-> " : " <-" + rel + "- ")
          << g.node_label(p.nodes[k + 1]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace kstream
