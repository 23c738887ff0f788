#pragma once
// Relational pattern mining over evidence paths.
//
// A path's signature is its relation sequence with an inverse marker on steps
// walked against the stored edge orientation, e.g. (child, child^-1).
// Signatures are counted over true-claim evidence (multiset A) and kept only
// if they never occur in false-claim evidence (set B).

#include <algorithm>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kstream/eval.hpp"
#include "kstream/graph.hpp"
#include "kstream/stream.hpp"

namespace kstream {

struct SignatureStep {
  RelationId relation;
  bool inverse;

  friend auto operator<=>(const SignatureStep&, const SignatureStep&) = default;
};

using PathSignature = std::vector<SignatureStep>;

inline PathSignature signature_of(const EvidencePath& path) {
  PathSignature sig;
  sig.reserve(path.steps.size());
  for (const auto& step : path.steps) sig.push_back({step.relation, !step.forward});
  return sig;
}

inline std::string format_signature(const KnowledgeGraph& g, const PathSignature& sig) {
  std::string out = "(";
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) out += ", ";
    out += g.relation_label(sig[i].relation);
    if (sig[i].inverse) out += "^-1";
  }
  return out + ")";
}

// "a -child-> b <-child- c"
inline std::string format_path(const KnowledgeGraph& g, const EvidencePath& path) {
  std::string out = g.node_label(path.nodes.front());
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& rel = g.relation_label(path.steps[i].relation);
    out += path.steps[i].forward ? " -" + rel + "-> " : " <-" + rel + "- ";
    out += g.node_label(path.nodes[i + 1]);
  }
  return out;
}

struct ClaimEvidence {
  LabeledClaim claim;
  Stream stream;
};

struct PatternEntry {
  PathSignature signature;
  std::size_t frequency = 0;
  std::string example;
};

struct PatternReport {
  RelationId relation = 0;
  std::vector<PatternEntry> patterns;  // frequency descending, then signature
};

inline PatternReport mine_patterns(const KnowledgeGraph& g,
                                   std::span<const ClaimEvidence> evidence) {
  PatternReport report;
  std::map<PathSignature, PatternEntry> from_true;
  std::set<PathSignature> from_false;
  bool any_true = false;
  for (const auto& item : evidence) {
    if (item.claim.label && !any_true) {
      any_true = true;
      report.relation = item.claim.claim.predicate;
    }
    for (const auto& path : item.stream.paths) {
      auto sig = signature_of(path);
      if (sig.empty()) continue;
      if (!item.claim.label) {
        from_false.insert(std::move(sig));
        continue;
      }
      auto& entry = from_true[sig];
      entry.signature = sig;
      ++entry.frequency;
      // Keep the lexicographically smallest rendering.
      auto text = format_path(g, path);
      if (entry.example.empty() || text < entry.example) entry.example = std::move(text);
    }
  }
  if (!any_true) return report;

  for (auto& [sig, entry] : from_true)
    if (!from_false.contains(sig)) report.patterns.push_back(std::move(entry));
  std::stable_sort(report.patterns.begin(), report.patterns.end(),
                   [](const PatternEntry& a, const PatternEntry& b) {
                     return a.frequency > b.frequency;
                   });
  return report;
}

}  // namespace kstream
