#pragma once
// Labeled claim datasets, LCWA negative sampling, AUROC and top-k tuning.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kstream/error.hpp"
#include "kstream/graph.hpp"
#include "kstream/stream.hpp"

namespace kstream {

struct LabeledClaim {
  ClaimTriple claim;
  bool label = false;
  std::string source_tag;

  friend bool operator==(const LabeledClaim&, const LabeledClaim&) = default;
};

struct Dataset {
  std::vector<LabeledClaim> claims;
  std::size_t skipped = 0;  // rows naming entities or relations absent from the graph
};

namespace detail {

inline bool parse_label(std::string_view text, bool& out) {
  if (text == "1" || text == "true" || text == "True" || text == "TRUE") {
    out = true;
    return true;
  }
  if (text == "0" || text == "false" || text == "False" || text == "FALSE") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace detail

// Rows: subject TAB predicate TAB object TAB label [TAB source-tag].
inline Dataset load_dataset(std::istream& in, const KnowledgeGraph& g) {
  Dataset ds;
  std::string raw;
  std::size_t line_no = 0, rows = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    ++rows;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 4 && fields.size() != 5)
      throw parse_error(line_no, "expected 4 or 5 tab-separated fields");
    LabeledClaim lc;
    if (!detail::parse_label(detail::trim(fields[3]), lc.label))
      throw parse_error(line_no, "label must be one of 0, 1, true, false");
    if (fields.size() == 5) lc.source_tag = std::string(fields[4]);
    const auto s = g.find_node(fields[0]);
    const auto p = g.find_relation(fields[1]);
    const auto o = g.find_node(fields[2]);
    if (!s || !p || !o || *s == *o) {
      ++ds.skipped;
      continue;
    }
    lc.claim = {*s, *p, *o};
    ds.claims.push_back(std::move(lc));
  }
  if (rows == 0) throw bad_input("dataset is empty");
  return ds;
}

inline void write_dataset(const KnowledgeGraph& g,
                          std::span<const LabeledClaim> claims, std::ostream& out) {
  for (const auto& lc : claims) {
    out << g.node_label(lc.claim.subject) << '\t'
        << g.relation_label(lc.claim.predicate) << '\t'
        << g.node_label(lc.claim.object) << '\t' << (lc.label ? 1 : 0);
    if (!lc.source_tag.empty()) out << '\t' << lc.source_tag;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// LCWA negatives

enum class NegativePool {
  dataset,  // objects seen with the predicate among the given true claims
  graph,    // objects of stored edges labeled with the predicate
};

struct NegativeSample {
  std::vector<LabeledClaim> claims;
  std::size_t skipped = 0;  // true claims whose candidate pool was empty
};

// For every true (s, p, o), draws up to n objects o' uniformly without
// replacement from the pool of p minus every object known true for (s, p).
inline NegativeSample generate_lcwa_negatives(const KnowledgeGraph& g,
                                              std::span<const LabeledClaim> trues,
                                              std::size_t per_positive,
                                              std::uint64_t seed,
                                              NegativePool pool_mode = NegativePool::dataset) {
  std::map<RelationId, std::set<NodeId>> pool;
  std::map<std::pair<NodeId, RelationId>, std::set<NodeId>> known;
  for (const auto& lc : trues) {
    known[{lc.claim.subject, lc.claim.predicate}].insert(lc.claim.object);
    if (pool_mode == NegativePool::dataset)
      pool[lc.claim.predicate].insert(lc.claim.object);
  }
  if (pool_mode == NegativePool::graph) {
    for (const auto& e : g.edges()) pool[e.relation].insert(e.b);
    for (const auto& e : g.edges()) known[{e.a, e.relation}].insert(e.b);
  }

  NegativeSample out;
  if (per_positive == 0) return out;
  std::mt19937_64 rng(seed);
  for (const auto& lc : trues) {
    const auto& excluded = known[{lc.claim.subject, lc.claim.predicate}];
    std::vector<NodeId> candidates;
    for (NodeId o : pool[lc.claim.predicate])
      if (o != lc.claim.subject && !excluded.contains(o)) candidates.push_back(o);
    if (candidates.empty()) {
      ++out.skipped;
      continue;
    }
    const auto take = std::min(per_positive, candidates.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(rng)]);
      LabeledClaim neg;
      neg.claim = {lc.claim.subject, lc.claim.predicate, candidates[i]};
      neg.label = false;
      neg.source_tag = "lcwa";
      out.claims.push_back(std::move(neg));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// AUROC

// Mann-Whitney U / (n_pos * n_neg), ties counted one half.
inline double auroc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size())
    throw bad_input("scores and labels differ in length");
  std::size_t pos = 0;
  for (bool l : labels) pos += l ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw bad_input("AUROC needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;  // ranks are 1-based; ties share the midrank
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum += midrank;
    i = j;
  }
  const double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

// ---------------------------------------------------------------------------
// Top-k path tuning

// Stratified assignment of items to folds: positives and negatives are
// shuffled separately and dealt round-robin.
inline std::vector<std::size_t> stratified_folds(const std::vector<bool>& labels,
                                                 std::size_t folds,
                                                 std::uint64_t seed) {
  if (folds < 2) throw bad_input("need at least 2 folds");
  if (folds > labels.size()) throw bad_input("more folds than claims");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] ? pos : neg).push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<std::size_t> fold_of(labels.size());
  std::size_t next = 0;
  for (auto i : pos) fold_of[i] = next++ % folds;
  for (auto i : neg) fold_of[i] = next++ % folds;

  std::vector<std::size_t> npos(folds, 0), nneg(folds, 0);
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] ? npos : nneg)[fold_of[i]]++;
  for (std::size_t f = 0; f < folds; ++f)
    if (npos[f] == 0 || nneg[f] == 0)
      throw bad_input("fold " + std::to_string(f) + " lacks one of the classes");
  return fold_of;
}

struct CrossValidation {
  std::size_t chosen_k = 1;
  std::vector<double> fold_auroc;  // per fold, at the chosen k
  std::vector<double> mean_auroc;  // per candidate k, in grid order
};

namespace detail {

inline double fold_auroc(std::span<const Stream> streams, const std::vector<bool>& labels,
                         const std::vector<std::size_t>& fold_of, std::size_t fold,
                         std::size_t k) {
  std::vector<double> scores;
  std::vector<bool> fold_labels;
  for (std::size_t i = 0; i < streams.size(); ++i)
    if (fold_of[i] == fold) {
      scores.push_back(truth_score_topk(streams[i], k));
      fold_labels.push_back(labels[i]);
    }
  return auroc(scores, fold_labels);
}

inline void check_grid(std::span<const std::size_t> k_grid) {
  if (k_grid.empty()) throw bad_input("k grid is empty");
  for (auto k : k_grid)
    if (k == 0) throw bad_input("k grid entries must be at least 1");
}

}  // namespace detail

// Picks the number of paths k maximizing mean per-fold AUROC; ties prefer the
// smaller k.
inline CrossValidation cross_validate_k(std::span<const Stream> streams,
                                        const std::vector<bool>& labels,
                                        std::size_t folds,
                                        std::span<const std::size_t> k_grid,
                                        std::uint64_t seed) {
  if (streams.size() != labels.size())
    throw bad_input("streams and labels differ in length");
  detail::check_grid(k_grid);
  const auto fold_of = stratified_folds(labels, folds, seed);

  CrossValidation cv;
  double best = -1.0;
  std::vector<double> best_folds;
  for (auto k : k_grid) {
    std::vector<double> per_fold;
    for (std::size_t f = 0; f < folds; ++f)
      per_fold.push_back(detail::fold_auroc(streams, labels, fold_of, f, k));
    const double mean =
        std::accumulate(per_fold.begin(), per_fold.end(), 0.0) / static_cast<double>(folds);
    cv.mean_auroc.push_back(mean);
    if (mean > best || (mean == best && k < cv.chosen_k)) {
      best = mean;
      cv.chosen_k = k;
      best_folds = per_fold;
    }
  }
  cv.fold_auroc = std::move(best_folds);
  return cv;
}

// Out-of-fold estimate: each fold is scored with the k selected on the other
// folds. Returns the mean held-out AUROC.
inline double cross_validated_auroc(std::span<const Stream> streams,
                                    const std::vector<bool>& labels,
                                    std::size_t folds,
                                    std::span<const std::size_t> k_grid,
                                    std::uint64_t seed) {
  if (streams.size() != labels.size())
    throw bad_input("streams and labels differ in length");
  detail::check_grid(k_grid);
  const auto fold_of = stratified_folds(labels, folds, seed);
  double total = 0.0;
  for (std::size_t held = 0; held < folds; ++held) {
    std::size_t chosen = k_grid.front();
    double best = -1.0;
    for (auto k : k_grid) {
      double sum = 0.0;
      for (std::size_t f = 0; f < folds; ++f)
        if (f != held) sum += detail::fold_auroc(streams, labels, fold_of, f, k);
      if (sum > best || (sum == best && k < chosen)) {
        best = sum;
        chosen = k;
      }
    }
    total += detail::fold_auroc(streams, labels, fold_of, held, chosen);
  }
  return total / static_cast<double>(folds);
}

}  // namespace kstream
