#pragma once
// Method registry and the evaluation driver shared by the CLI and the tests.

#include <chrono>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kstream/baselines.hpp"
#include "kstream/eval.hpp"
#include "kstream/evidence.hpp"
#include "kstream/graph.hpp"
#include "kstream/linker.hpp"
#include "kstream/parallel.hpp"
#include "kstream/patterns.hpp"
#include "kstream/relsim.hpp"
#include "kstream/stream.hpp"

namespace kstream {

enum class Method { ks, ks_avg, ks_cv, kl, kl_rel, katz, adamic_adar, jaccard, degree_product };

inline constexpr Method kAllMethods[] = {
    Method::ks,   Method::ks_avg,      Method::ks_cv,   Method::kl,            Method::kl_rel,
    Method::katz, Method::adamic_adar, Method::jaccard, Method::degree_product,
};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::ks: return "ks";
    case Method::ks_avg: return "ks-avg";
    case Method::ks_cv: return "ks-cv";
    case Method::kl: return "kl";
    case Method::kl_rel: return "kl-rel";
    case Method::katz: return "katz";
    case Method::adamic_adar: return "aa";
    case Method::jaccard: return "jaccard";
    case Method::degree_product: return "dp";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view name) {
  for (auto m : kAllMethods)
    if (method_name(m) == name) return m;
  if (name == "adamic-adar") return Method::adamic_adar;
  if (name == "degree-product") return Method::degree_product;
  return std::nullopt;
}

// Comma-separated names, or "all".
inline std::vector<Method> parse_method_list(std::string_view list) {
  if (list == "all") return {std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<Method> out;
  for (auto part : detail::split(list, ',')) {
    part = detail::trim(part);
    if (part.empty()) continue;
    const auto m = parse_method(part);
    if (!m) throw bad_input("unknown method '" + std::string(part) + "'");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw bad_input("no methods selected");
  return out;
}

inline bool uses_stream(Method m) {
  return m == Method::ks || m == Method::ks_avg || m == Method::ks_cv;
}

struct ScoringContext {
  const KnowledgeGraph& graph;
  const SimilarityModel& model;
  StreamConfig stream;
  KatzParams katz;
  std::size_t ks_avg_paths = 2;
};

// Scores one claim with a per-claim method. `top_k` restricts KS to the first
// k paths; KS-AVG uses ctx.ks_avg_paths.
inline ClaimReport score_claim(const ScoringContext& ctx, Method method,
                               const ClaimTriple& c,
                               std::optional<std::size_t> top_k = {}) {
  const auto name = std::string(method_name(method));
  switch (method) {
    case Method::ks:
    case Method::ks_avg: {
      const auto s = knowledge_stream(ctx.graph, ctx.model, c, ctx.stream);
      std::size_t k = method == Method::ks_avg ? ctx.ks_avg_paths : kUnlimited;
      if (top_k) k = *top_k;
      return report_stream(c, name, truth_score_topk(s, k), s);
    }
    case Method::ks_cv:
      throw bad_input("ks-cv needs a labeled dataset; use evaluate");
    case Method::kl: return report_linker(c, name, kl_score(ctx.graph, c));
    case Method::kl_rel:
      return report_linker(c, name, kl_rel_score(ctx.graph, ctx.model, c));
    case Method::katz: return report_scalar(c, name, katz(ctx.graph, c, ctx.katz));
    case Method::adamic_adar: return report_scalar(c, name, adamic_adar(ctx.graph, c));
    case Method::jaccard: return report_scalar(c, name, jaccard(ctx.graph, c));
    case Method::degree_product:
      return report_scalar(c, name, degree_product(ctx.graph, c));
  }
  throw internal_error("unhandled method");
}

struct EvaluationConfig {
  std::vector<Method> methods;
  std::string dataset_name = "dataset";
  std::size_t folds = 5;
  std::vector<std::size_t> k_grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t seed = 42;
  std::size_t workers = 1;
};

struct EvaluationRow {
  std::string method;
  std::string dataset;
  double auroc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double runtime_ms = 0.0;
};

inline std::vector<Stream> compute_streams(const ScoringContext& ctx,
                                           std::span<const LabeledClaim> claims,
                                           std::size_t workers) {
  return parallel_map(claims.size(), workers, [&](std::size_t i) {
    return knowledge_stream(ctx.graph, ctx.model, claims[i].claim, ctx.stream);
  });
}

inline std::vector<EvaluationRow> evaluate(const ScoringContext& ctx,
                                           std::span<const LabeledClaim> claims,
                                           const EvaluationConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto elapsed_ms = [](clock::time_point since) {
    return std::chrono::duration<double, std::milli>(clock::now() - since).count();
  };

  std::vector<bool> labels;
  std::size_t pos = 0;
  for (const auto& lc : claims) {
    labels.push_back(lc.label);
    pos += lc.label ? 1 : 0;
  }

  std::vector<Stream> streams;
  double stream_ms = 0.0;
  const bool need_streams =
      std::any_of(cfg.methods.begin(), cfg.methods.end(), uses_stream);
  if (need_streams) {
    const auto t0 = clock::now();
    streams = compute_streams(ctx, claims, cfg.workers);
    stream_ms = elapsed_ms(t0);
  }

  std::vector<EvaluationRow> rows;
  for (auto method : cfg.methods) {
    EvaluationRow row{std::string(method_name(method)), cfg.dataset_name, 0.0, pos,
                      claims.size() - pos, 0.0};
    const auto t0 = clock::now();
    if (method == Method::ks_cv) {
      row.auroc = cross_validated_auroc(streams, labels, cfg.folds, cfg.k_grid, cfg.seed);
      row.runtime_ms = stream_ms + elapsed_ms(t0);
    } else if (uses_stream(method)) {
      const std::size_t k = method == Method::ks_avg ? ctx.ks_avg_paths : kUnlimited;
      std::vector<double> scores;
      for (const auto& s : streams) scores.push_back(truth_score_topk(s, k));
      row.auroc = auroc(scores, labels);
      row.runtime_ms = stream_ms + elapsed_ms(t0);
    } else {
      const auto scores = parallel_map(claims.size(), cfg.workers, [&](std::size_t i) {
        return score_claim(ctx, method, claims[i].claim).score;
      });
      row.auroc = auroc(scores, labels);
      row.runtime_ms = elapsed_ms(t0);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// CSV with header method,dataset,auroc,n_pos,n_neg,runtime_ms. The runtime
// column holds NA unless `with_timing` is set.
inline std::string rows_to_csv(std::span<const EvaluationRow> rows, bool with_timing) {
  std::ostringstream out;
  out << "method,dataset,auroc,n_pos,n_neg,runtime_ms\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.dataset << ',' << detail::fixed(r.auroc, 6) << ','
        << r.n_pos << ',' << r.n_neg << ','
        << (with_timing ? detail::fixed(r.runtime_ms, 3) : std::string("NA")) << '\n';
  }
  return out.str();
}

// Streams for every claim of `relation`, paired with their labels.
inline std::vector<ClaimEvidence> collect_evidence(const ScoringContext& ctx,
                                                   std::span<const LabeledClaim> claims,
                                                   RelationId relation,
                                                   std::size_t workers) {
  std::vector<LabeledClaim> selected;
  for (const auto& lc : claims)
    if (lc.claim.predicate == relation) selected.push_back(lc);
  auto streams = compute_streams(ctx, selected, workers);
  std::vector<ClaimEvidence> out;
  out.reserve(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i)
    out.push_back({std::move(selected[i]), std::move(streams[i])});
  return out;
}

}  // namespace kstream
