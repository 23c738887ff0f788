#pragma once
// Knowledge graph store.
//
// Entities and relations are interned to dense ids at load time. Each stored
// triple (a, rel, b) becomes one edge record; traversal treats the graph as
// undirected, so the record is listed in the adjacency of both endpoints
// together with a flag telling whether walking it from that endpoint follows
// the stored orientation (a -> b) or its inverse.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kstream/error.hpp"

namespace kstream {

using NodeId = std::uint32_t;
using RelationId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
  NodeId a;  // stored subject
  NodeId b;  // stored object
  RelationId relation;
};

// One entry of a node's adjacency list.
struct Incidence {
  EdgeId edge;
  RelationId relation;
  NodeId other;
  bool forward;  // true when walking from this node to `other` follows a -> b
};

struct ClaimTriple {
  NodeId subject;
  RelationId predicate;
  NodeId object;

  friend bool operator==(const ClaimTriple&, const ClaimTriple&) = default;
};

// Edge ids hidden from traversal while one claim is scored.
class GraphMask {
 public:
  GraphMask() = default;
  explicit GraphMask(std::vector<EdgeId> edges) : edges_(std::move(edges)) {
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  }

  bool contains(EdgeId e) const {
    return std::binary_search(edges_.begin(), edges_.end(), e);
  }
  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }
  std::span<const EdgeId> edges() const noexcept { return edges_; }

 private:
  std::vector<EdgeId> edges_;
};

class KnowledgeGraph {
 public:
  NodeId add_node(std::string_view label) {
    auto it = node_index_.find(std::string(label));
    if (it != node_index_.end()) return it->second;
    const auto id = static_cast<NodeId>(node_labels_.size());
    node_labels_.emplace_back(label);
    node_index_.emplace(node_labels_.back(), id);
    adjacency_.emplace_back();
    return id;
  }

  RelationId add_relation(std::string_view label) {
    auto it = relation_index_.find(std::string(label));
    if (it != relation_index_.end()) return it->second;
    const auto id = static_cast<RelationId>(relation_labels_.size());
    relation_labels_.emplace_back(label);
    relation_index_.emplace(relation_labels_.back(), id);
    return id;
  }

  // Returns nullopt when the identical (a, rel, b) triple is already stored.
  std::optional<EdgeId> add_edge(NodeId a, RelationId rel, NodeId b) {
    check_node(a);
    check_node(b);
    check_relation(rel);
    if (a == b) throw bad_input("self-loop edges are not supported");
    if (!edge_keys_.insert({a, rel, b}).second) return std::nullopt;
    const auto id = static_cast<EdgeId>(edges_.size());
    edges_.push_back({a, b, rel});
    adjacency_[a].push_back({id, rel, b, true});
    adjacency_[b].push_back({id, rel, a, false});
    return id;
  }

  std::optional<EdgeId> add_triple(std::string_view s, std::string_view p,
                                   std::string_view o) {
    const NodeId a = add_node(s);
    const RelationId r = add_relation(p);
    const NodeId b = add_node(o);
    return add_edge(a, r, b);
  }

  std::size_t num_nodes() const noexcept { return node_labels_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t num_relations() const noexcept { return relation_labels_.size(); }

  std::optional<NodeId> find_node(std::string_view label) const {
    auto it = node_index_.find(std::string(label));
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<RelationId> find_relation(std::string_view label) const {
    auto it = relation_index_.find(std::string(label));
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
  }

  NodeId node_id(std::string_view label) const {
    if (auto id = find_node(label)) return *id;
    throw bad_input("unknown entity '" + std::string(label) + "'");
  }

  RelationId relation_id(std::string_view label) const {
    if (auto id = find_relation(label)) return *id;
    throw bad_input("unknown relation '" + std::string(label) + "'");
  }

  const std::string& node_label(NodeId v) const {
    check_node(v);
    return node_labels_[v];
  }

  const std::string& relation_label(RelationId r) const {
    check_relation(r);
    return relation_labels_[r];
  }

  const std::vector<std::string>& node_labels() const noexcept {
    return node_labels_;
  }
  const std::vector<std::string>& relation_labels() const noexcept {
    return relation_labels_;
  }

  const Edge& edge(EdgeId e) const {
    if (e >= edges_.size()) throw bad_input("unknown edge id");
    return edges_[e];
  }
  std::span<const Edge> edges() const noexcept { return edges_; }

  // Static degree of the background graph; masks never change it.
  std::size_t degree(NodeId v) const {
    check_node(v);
    return adjacency_[v].size();
  }

  // All incident edges in edge-id order, ignoring any mask.
  std::span<const Incidence> incident(NodeId v) const {
    check_node(v);
    return adjacency_[v];
  }

  std::vector<Incidence> neighbors(NodeId v, const GraphMask& mask = {}) const {
    check_node(v);
    std::vector<Incidence> out;
    out.reserve(adjacency_[v].size());
    for (const auto& inc : adjacency_[v])
      if (!mask.contains(inc.edge)) out.push_back(inc);
    return out;
  }

  bool has_node(NodeId v) const noexcept { return v < node_labels_.size(); }
  bool has_relation(RelationId r) const noexcept {
    return r < relation_labels_.size();
  }

  void check_node(NodeId v) const {
    if (!has_node(v))
      throw bad_input("unknown node id " + std::to_string(v));
  }
  void check_relation(RelationId r) const {
    if (!has_relation(r))
      throw bad_input("unknown relation id " + std::to_string(r));
  }

 private:
  struct EdgeKey {
    NodeId a;
    RelationId r;
    NodeId b;
    friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
  };
  struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& k) const noexcept {
      std::uint64_t h = (std::uint64_t{k.a} << 32) ^ k.b;
      h ^= std::uint64_t{k.r} * 0x9e3779b97f4a7c15ULL;
      return std::hash<std::uint64_t>{}(h);
    }
  };

  std::vector<std::string> node_labels_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::vector<std::string> relation_labels_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::unordered_set<EdgeKey, EdgeKeyHash> edge_keys_;
};

// ---------------------------------------------------------------------------
// Claims and masking

inline ClaimTriple make_claim(const KnowledgeGraph& g, NodeId s, RelationId p,
                              NodeId o) {
  g.check_node(s);
  g.check_node(o);
  g.check_relation(p);
  if (s == o) throw bad_input("claim subject and object must differ");
  return {s, p, o};
}

inline ClaimTriple make_claim(const KnowledgeGraph& g, std::string_view s,
                              std::string_view p, std::string_view o) {
  return make_claim(g, g.node_id(s), g.relation_id(p), g.node_id(o));
}

// Every stored edge between subject and object labeled with the predicate,
// in either orientation.
inline GraphMask mask_claim_edges(const KnowledgeGraph& g, const ClaimTriple& c) {
  std::vector<EdgeId> hidden;
  if (!g.has_node(c.subject) || !g.has_node(c.object)) return GraphMask{};
  for (const auto& inc : g.incident(c.subject))
    if (inc.other == c.object && inc.relation == c.predicate)
      hidden.push_back(inc.edge);
  return GraphMask(std::move(hidden));
}

// ---------------------------------------------------------------------------
// Loading

enum class GraphFormat { tsv, ntriples };

struct LoadStats {
  std::size_t records = 0;
  std::size_t literals_dropped = 0;
  std::size_t duplicates = 0;
  std::size_t self_loops = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Minimal N-Triples term reader: IRIs and literals only.
class NTriplesLine {
 public:
  NTriplesLine(std::string_view text, std::size_t line)
      : text_(text), line_(line) {}

  std::string_view iri() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '<')
      throw parse_error(line_, "expected '<' to open an IRI");
    const auto close = text_.find('>', pos_ + 1);
    if (close == std::string_view::npos)
      throw parse_error(line_, "unterminated IRI");
    auto value = text_.substr(pos_ + 1, close - pos_ - 1);
    pos_ = close + 1;
    return value;
  }

  bool at_literal() {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == '"';
  }

  void skip_literal() {
    ++pos_;  // opening quote
    bool closed = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (c == '\\') {
        ++pos_;
      } else if (c == '"') {
        closed = true;
        break;
      }
    }
    if (!closed) throw parse_error(line_, "unterminated literal");
    if (text_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      iri();
    } else if (pos_ < text_.size() && text_[pos_] == '@') {
      while (pos_ < text_.size() && text_[pos_] != ' ' && text_[pos_] != '\t' &&
             text_[pos_] != '.')
        ++pos_;
    }
  }

  void end() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '.')
      throw parse_error(line_, "expected '.' terminating the triple");
    ++pos_;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] != '#')
      throw parse_error(line_, "trailing content after '.'");
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t'))
      ++pos_;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline bool is_tsv_literal(std::string_view object) {
  return !object.empty() && object.front() == '"';
}

}  // namespace detail

inline KnowledgeGraph load_graph(std::istream& in, GraphFormat format,
                                 LoadStats* stats = nullptr) {
  KnowledgeGraph g;
  LoadStats local;
  std::string raw;
  std::size_t line_no = 0;

  const auto store = [&](std::string_view s, std::string_view p,
                         std::string_view o) {
    ++local.records;
    if (s == o) {
      ++local.self_loops;
      return;
    }
    if (!g.add_triple(s, p, o)) ++local.duplicates;
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;

    if (format == GraphFormat::tsv) {
      const auto fields = detail::split(line, '\t');
      if (fields.size() != 3)
        throw parse_error(line_no, "expected 3 tab-separated fields, found " +
                                       std::to_string(fields.size()));
      for (auto f : fields)
        if (detail::trim(f).empty()) throw parse_error(line_no, "empty field");
      if (detail::is_tsv_literal(fields[2])) {
        ++local.records;
        ++local.literals_dropped;
        continue;
      }
      store(fields[0], fields[1], fields[2]);
    } else {
      detail::NTriplesLine reader(body, line_no);
      const auto s = reader.iri();
      const auto p = reader.iri();
      if (reader.at_literal()) {
        reader.skip_literal();
        reader.end();
        ++local.records;
        ++local.literals_dropped;
        continue;
      }
      const auto o = reader.iri();
      reader.end();
      store(s, p, o);
    }
  }

  if (stats) *stats = local;
  if (g.num_edges() == 0) throw bad_input("graph is empty after loading");
  return g;
}

inline GraphFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".nt" || ext == ".ntriples") ? GraphFormat::ntriples
                                              : GraphFormat::tsv;
}

inline KnowledgeGraph load_graph_file(const std::filesystem::path& path,
                                      std::optional<GraphFormat> format = {},
                                      LoadStats* stats = nullptr) {
  std::ifstream in(path);
  if (!in) throw bad_input("cannot open graph file " + path.string());
  return load_graph(in, format.value_or(format_for_path(path)), stats);
}

// ---------------------------------------------------------------------------
// Serialization

// Triple TSV in edge-id order; re-loading it reproduces the graph.
inline void write_tsv(const KnowledgeGraph& g, std::ostream& out) {
  for (const auto& e : g.edges())
    out << g.node_label(e.a) << '\t' << g.relation_label(e.relation) << '\t'
        << g.node_label(e.b) << '\n';
}

inline std::string nodes_tsv(const KnowledgeGraph& g) {
  std::ostringstream out;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    out << v << '\t' << g.node_label(v) << '\n';
  return out.str();
}

inline std::string relations_tsv(const KnowledgeGraph& g) {
  std::ostringstream out;
  for (RelationId r = 0; r < g.num_relations(); ++r)
    out << r << '\t' << g.relation_label(r) << '\n';
  return out.str();
}

inline std::string edges_tsv(const KnowledgeGraph& g) {
  std::ostringstream out;
  const auto edges = g.edges();
  for (EdgeId e = 0; e < edges.size(); ++e)
    out << e << '\t' << edges[e].a << '\t' << edges[e].b << '\t'
        << edges[e].relation << '\n';
  return out.str();
}

inline void write_canonical_dump(const KnowledgeGraph& g,
                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto put = [&](const char* name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw bad_input("cannot write " + (dir / name).string());
    out << body;
  };
  put("nodes.tsv", nodes_tsv(g));
  put("relations.tsv", relations_tsv(g));
  put("edges.tsv", edges_tsv(g));
}

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Fingerprint of the relation table and edge list, used to invalidate caches.
inline std::uint64_t graph_checksum(const KnowledgeGraph& g) {
  return fnv1a64(edges_tsv(g), fnv1a64(relations_tsv(g)));
}

}  // namespace kstream
