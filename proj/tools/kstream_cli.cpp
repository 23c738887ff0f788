// kstream: command-line front end.
//
// Exit codes: 0 success, 1 internal error, 2 bad input.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kstream/kstream.hpp"

namespace fs = std::filesystem;
using namespace kstream;

namespace {

struct GraphOptions {
  std::string graph;
  std::string format = "auto";
  std::string cache;
};

struct FlowOptions {
  std::size_t max_paths = 0;  // 0 = unlimited
  std::size_t max_hops = 0;
  std::size_t time_budget_ms = 0;
  bool decompose = false;
  std::int64_t integral_scale = 0;
  double katz_beta = 0.05;
  std::size_t katz_maxlen = 3;
  std::size_t ks_avg_paths = 2;
};

void add_graph_options(CLI::App& cmd, GraphOptions& o, bool with_cache = true) {
  cmd.add_option("--graph", o.graph, "Triple file (TSV or N-Triples)")->required();
  cmd.add_option("--format", o.format, "auto, tsv or nt")
      ->check(CLI::IsMember({"auto", "tsv", "nt"}));
  if (with_cache) cmd.add_option("--cache", o.cache, "Similarity cache file");
}

void add_flow_options(CLI::App& cmd, FlowOptions& o) {
  cmd.add_option("--max-paths", o.max_paths, "Stop after N augmenting paths (0 = no limit)");
  cmd.add_option("--max-hops", o.max_hops, "Longest admissible path in hops (0 = no limit)");
  cmd.add_option("--time-budget-ms", o.time_budget_ms, "Per-claim time budget (0 = none)");
  cmd.add_flag("--decompose", o.decompose, "Report a decomposition of the final flow");
  cmd.add_option("--integral-scale", o.integral_scale,
                 "Round capacities to integers at this scale (0 = real-valued)");
  cmd.add_option("--katz-beta", o.katz_beta, "Katz damping factor");
  cmd.add_option("--katz-maxlen", o.katz_maxlen, "Longest walk counted by Katz");
  cmd.add_option("--avg-paths", o.ks_avg_paths, "Paths summed by ks-avg")
      ->check(CLI::PositiveNumber);
}

StreamConfig stream_config(const FlowOptions& o) {
  StreamConfig cfg;
  if (o.max_paths) cfg.max_paths = o.max_paths;
  if (o.max_hops) cfg.max_hops = o.max_hops;
  if (o.time_budget_ms) cfg.time_budget = std::chrono::milliseconds(o.time_budget_ms);
  if (o.decompose) cfg.mode = PathMode::decomposition;
  if (o.integral_scale) cfg.integral_scale = o.integral_scale;
  return cfg;
}

KnowledgeGraph load(const GraphOptions& o) {
  std::optional<GraphFormat> format;
  if (o.format == "tsv") format = GraphFormat::tsv;
  if (o.format == "nt") format = GraphFormat::ntriples;
  LoadStats stats;
  auto g = load_graph_file(o.graph, format, &stats);
  std::cerr << "# loaded " << g.num_nodes() << " nodes, " << g.num_edges() << " edges, "
            << g.num_relations() << " relations";
  if (stats.literals_dropped) std::cerr << "; dropped " << stats.literals_dropped << " literals";
  if (stats.duplicates) std::cerr << "; merged " << stats.duplicates << " duplicates";
  if (stats.self_loops) std::cerr << "; skipped " << stats.self_loops << " self-loops";
  std::cerr << '\n';
  return g;
}

// Loads the cached model when it matches the graph, otherwise builds it and
// refreshes the cache.
SimilarityModel model_for(const KnowledgeGraph& g, const std::string& cache) {
  const auto checksum = graph_checksum(g);
  if (!cache.empty()) {
    if (auto m = load_similarity_cache(cache, g.num_relations(), checksum)) {
      std::cerr << "# similarity cache hit: " << cache << '\n';
      return std::move(*m);
    }
  }
  auto m = build_similarity(g);
  if (!cache.empty()) {
    save_similarity_cache(m, checksum, cache);
    std::cerr << "# similarity cache written: " << cache << '\n';
  }
  return m;
}

ClaimTriple parse_claim(const KnowledgeGraph& g, std::string text) {
  if (text.find('\t') == std::string::npos)
    for (std::size_t at; (at = text.find("\\t")) != std::string::npos;)
      text.replace(at, 2, "\t");
  const auto fields = detail::split(text, '\t');
  if (fields.size() != 3) throw bad_input("claim must be subject<TAB>predicate<TAB>object");
  const auto s = detail::trim(fields[0]), p = detail::trim(fields[1]),
             o = detail::trim(fields[2]);
  if (!g.find_node(s)) throw bad_input("unknown entity '" + std::string(s) + "'");
  if (!g.find_node(o)) throw bad_input("unknown entity '" + std::string(o) + "'");
  if (!g.find_relation(p)) throw bad_input("unknown relation '" + std::string(p) + "'");
  return make_claim(g, s, p, o);
}

Dataset read_dataset(const KnowledgeGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bad_input("cannot open dataset " + path);
  auto ds = load_dataset(in, g);
  std::cerr << "# dataset " << path << ": " << ds.claims.size() << " claims";
  if (ds.skipped) std::cerr << ", skipped " << ds.skipped << " with unknown ids";
  std::cerr << '\n';
  return ds;
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  for (auto part : detail::split(text, ',')) {
    part = detail::trim(part);
    if (part.empty()) continue;
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), k);
    if (ec != std::errc{} || ptr != part.data() + part.size() || k == 0)
      throw bad_input("bad k-grid entry '" + std::string(part) + "'");
    grid.push_back(k);
  }
  if (grid.empty()) throw bad_input("k grid is empty");
  return grid;
}

void echo(const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::cerr << "# kstream " << command;
  for (const auto& [k, v] : kv) std::cerr << ' ' << k << '=' << v;
  std::cerr << '\n';
}

std::string limit(std::size_t x) { return x ? std::to_string(x) : "none"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fact checking over knowledge graphs with knowledge streams"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "kstream 1.0.0");

  // build-sim
  GraphOptions sim_graph;
  std::size_t top_k = 0;
  std::string top_relation;
  auto* build_sim = app.add_subcommand("build-sim", "Build and cache the relation similarity model");
  add_graph_options(*build_sim, sim_graph);
  build_sim->add_option("--top-k", top_k, "Print the K relations most similar to --relation");
  build_sim->add_option("--relation", top_relation, "Relation queried by --top-k");

  // check
  GraphOptions check_graph;
  FlowOptions check_flow;
  std::string claim_text, mode = "ks", emit = "json";
  std::size_t check_k = 0;
  auto* check = app.add_subcommand("check", "Score one claim and print its evidence");
  add_graph_options(*check, check_graph);
  add_flow_options(*check, check_flow);
  check->add_option("--claim", claim_text, "subject<TAB>predicate<TAB>object")->required();
  check->add_option("--mode", mode, "ks, ks-avg, kl, kl-rel, katz, aa, jaccard or dp");
  check->add_option("--k", check_k, "Sum only the first K paths");
  check->add_option("--emit", emit, "json, dot or tsv")
      ->check(CLI::IsMember({"json", "dot", "tsv"}));

  // evaluate
  GraphOptions eval_graph;
  FlowOptions eval_flow;
  std::string eval_dataset, methods = "all", k_grid = "1,2,3,4,5,6,7,8,9,10", dataset_name,
                            eval_out;
  std::size_t folds = 5, workers = 1;
  std::uint64_t eval_seed = 42;
  bool timing = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "AUROC of each method on a labeled dataset");
  add_graph_options(*evaluate_cmd, eval_graph);
  add_flow_options(*evaluate_cmd, eval_flow);
  evaluate_cmd->add_option("--dataset", eval_dataset, "Labeled claims TSV")->required();
  evaluate_cmd->add_option("--methods", methods, "Comma-separated methods or 'all'");
  evaluate_cmd->add_option("--folds", folds, "Cross-validation folds for ks-cv");
  evaluate_cmd->add_option("--k-grid", k_grid, "Candidate path counts for ks-cv");
  evaluate_cmd->add_option("--seed", eval_seed, "Seed for fold assignment");
  evaluate_cmd->add_option("--workers", workers, "Threads scoring claims")
      ->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--name", dataset_name, "Dataset column value (default: file stem)");
  evaluate_cmd->add_option("--out", eval_out, "Write the CSV here instead of stdout");
  evaluate_cmd->add_flag("--timing", timing, "Fill the runtime_ms column");

  // patterns
  GraphOptions pat_graph;
  FlowOptions pat_flow;
  std::string pat_dataset, pat_relation;
  std::size_t pat_top = 0, pat_workers = 1;
  auto* patterns = app.add_subcommand("patterns", "Mine path patterns separating true from false claims");
  add_graph_options(*patterns, pat_graph);
  add_flow_options(*patterns, pat_flow);
  patterns->add_option("--dataset", pat_dataset, "Labeled claims TSV")->required();
  patterns->add_option("--relation", pat_relation, "Predicate whose claims are mined")->required();
  patterns->add_option("--top", pat_top, "Print at most N patterns (0 = all)");
  patterns->add_option("--workers", pat_workers, "Threads scoring claims")
      ->check(CLI::PositiveNumber);

  // negatives
  GraphOptions neg_graph;
  std::string neg_dataset, pool = "dataset";
  std::size_t per_positive = 1;
  std::uint64_t neg_seed = 42;
  auto* negatives = app.add_subcommand("negatives", "Add LCWA negatives to the true claims of a dataset");
  add_graph_options(*negatives, neg_graph, false);
  negatives->add_option("--dataset", neg_dataset, "Claims TSV; rows labeled 1 are used")->required();
  negatives->add_option("--per-positive", per_positive, "Negatives drawn per true claim");
  negatives->add_option("--seed", neg_seed, "Sampling seed");
  negatives->add_option("--pool", pool, "dataset or graph")
      ->check(CLI::IsMember({"dataset", "graph"}));

  // dump
  GraphOptions dump_graph;
  std::string dump_dir;
  auto* dump = app.add_subcommand("dump", "Write nodes.tsv, relations.tsv and edges.tsv");
  add_graph_options(*dump, dump_graph, false);
  dump->add_option("--out", dump_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build_sim) {
      echo("build-sim", {{"graph", sim_graph.graph}, {"cache", sim_graph.cache}});
      const auto g = load(sim_graph);
      const auto m = model_for(g, sim_graph.cache);
      std::size_t nonzero = 0;
      for (RelationId i = 0; i < m.size(); ++i)
        for (RelationId j = i + 1; j < m.size(); ++j)
          if (m.similarity(i, j) > 0.0) ++nonzero;
      if (top_k) {
        if (top_relation.empty()) throw bad_input("--top-k needs --relation");
        std::cout << "rank\trelation\tsimilarity\n";
        const auto ranked = top_k_similar(m, g.relation_id(top_relation), top_k);
        for (std::size_t i = 0; i < ranked.size(); ++i)
          std::cout << i + 1 << '\t' << g.relation_label(ranked[i].relation) << '\t'
                    << detail::fixed(ranked[i].similarity, 12) << '\n';
      } else {
        std::cout << "relations\t" << m.size() << "\nnonzero_pairs\t" << nonzero << '\n';
      }
      return 0;
    }

    if (*check) {
      const auto method = parse_method(mode);
      if (!method) throw bad_input("unknown mode '" + mode + "'");
      echo("check", {{"graph", check_graph.graph},
                     {"mode", mode},
                     {"k", limit(check_k)},
                     {"max-paths", limit(check_flow.max_paths)},
                     {"max-hops", limit(check_flow.max_hops)},
                     {"time-budget-ms", limit(check_flow.time_budget_ms)},
                     {"paths", check_flow.decompose ? "decomposition" : "iteration"},
                     {"emit", emit}});
      const auto g = load(check_graph);
      const auto claim = parse_claim(g, claim_text);
      SimilarityModel model;
      if (*method == Method::ks || *method == Method::ks_avg || *method == Method::kl_rel)
        model = model_for(g, check_graph.cache);
      ScoringContext ctx{g, model, stream_config(check_flow),
                         {check_flow.katz_beta, check_flow.katz_maxlen},
                         check_flow.ks_avg_paths};
      std::optional<std::size_t> k;
      if (check_k) k = check_k;
      const auto report = score_claim(ctx, *method, claim, k);
      if (emit == "json") std::cout << to_json(g, report).dump(2) << '\n';
      else if (emit == "dot") std::cout << to_dot(g, report);
      else std::cout << to_tsv(g, report);
      return 0;
    }

    if (*evaluate_cmd) {
      EvaluationConfig cfg;
      cfg.methods = parse_method_list(methods);
      cfg.folds = folds;
      cfg.k_grid = parse_grid(k_grid);
      cfg.seed = eval_seed;
      cfg.workers = workers;
      cfg.dataset_name = dataset_name.empty() ? fs::path(eval_dataset).stem().string()
                                              : dataset_name;
      echo("evaluate", {{"graph", eval_graph.graph},
                        {"dataset", eval_dataset},
                        {"methods", methods},
                        {"folds", std::to_string(folds)},
                        {"k-grid", k_grid},
                        {"seed", std::to_string(eval_seed)},
                        {"workers", std::to_string(workers)},
                        {"max-paths", limit(eval_flow.max_paths)},
                        {"max-hops", limit(eval_flow.max_hops)}});
      const auto g = load(eval_graph);
      const auto ds = read_dataset(g, eval_dataset);
      const auto model = model_for(g, eval_graph.cache);
      ScoringContext ctx{g, model, stream_config(eval_flow),
                         {eval_flow.katz_beta, eval_flow.katz_maxlen},
                         eval_flow.ks_avg_paths};
      const auto rows = evaluate(ctx, ds.claims, cfg);
      const auto csv = rows_to_csv(rows, timing);
      if (eval_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(eval_out, std::ios::binary);
        if (!out) throw bad_input("cannot write " + eval_out);
        out << csv;
      }
      return 0;
    }

    if (*patterns) {
      echo("patterns", {{"graph", pat_graph.graph},
                        {"dataset", pat_dataset},
                        {"relation", pat_relation},
                        {"max-paths", limit(pat_flow.max_paths)}});
      const auto g = load(pat_graph);
      const auto ds = read_dataset(g, pat_dataset);
      const auto model = model_for(g, pat_graph.cache);
      ScoringContext ctx{g, model, stream_config(pat_flow), {}, pat_flow.ks_avg_paths};
      const auto relation = g.relation_id(pat_relation);
      const auto evidence = collect_evidence(ctx, ds.claims, relation, pat_workers);
      const auto report = mine_patterns(g, evidence);
      std::cout << "rank\tsignature\tfreq\texample\n";
      for (std::size_t i = 0; i < report.patterns.size(); ++i) {
        if (pat_top && i >= pat_top) break;
        const auto& p = report.patterns[i];
        std::cout << i + 1 << '\t' << format_signature(g, p.signature) << '\t' << p.frequency
                  << '\t' << p.example << '\n';
      }
      return 0;
    }

    if (*negatives) {
      echo("negatives", {{"graph", neg_graph.graph},
                         {"dataset", neg_dataset},
                         {"per-positive", std::to_string(per_positive)},
                         {"seed", std::to_string(neg_seed)},
                         {"pool", pool}});
      const auto g = load(neg_graph);
      const auto ds = read_dataset(g, neg_dataset);
      std::vector<LabeledClaim> trues;
      for (const auto& lc : ds.claims)
        if (lc.label) trues.push_back(lc);
      const auto neg = generate_lcwa_negatives(
          g, trues, per_positive, neg_seed,
          pool == "graph" ? NegativePool::graph : NegativePool::dataset);
      if (neg.skipped) std::cerr << "# " << neg.skipped << " true claims had no candidates\n";
      write_dataset(g, trues, std::cout);
      write_dataset(g, neg.claims, std::cout);
      return 0;
    }

    if (*dump) {
      echo("dump", {{"graph", dump_graph.graph}, {"out", dump_dir}});
      const auto g = load(dump_graph);
      write_canonical_dump(g, dump_dir);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::bad_input ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
