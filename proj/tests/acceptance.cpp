// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "kstream/kstream.hpp"
#include "oracles.hpp"

using namespace kstream;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": got " << got << ", want " << want;
    expect(std::abs(got - want) <= tol, msg.str());
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Random connected multigraph: spanning tree plus extra edges, parallel edges allowed.
struct RandomMultigraph {
  std::size_t nodes;
  std::vector<std::pair<int, int>> edges;
};

RandomMultigraph random_multigraph(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> nn(2, 12);
  RandomMultigraph g{nn(rng), {}};
  for (std::size_t v = 1; v < g.nodes; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    g.edges.emplace_back(static_cast<int>(parent(rng)), static_cast<int>(v));
  }
  std::uniform_int_distribution<std::size_t> extra(0, 20 - g.edges.size());
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.nodes) - 1);
  for (std::size_t k = extra(rng); k > 0;) {
    const int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    g.edges.emplace_back(a, b);
    --k;
  }
  return g;
}

Check flow_optimality() {
  Check c;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> cap(0.0, 1.0), cost(0.0, 3.0);
  int instances = 0, with_flow = 0;
  for (int trial = 0; trial < 250 && c.ok; ++trial, ++instances) {
    const auto g = random_multigraph(rng);
    std::vector<oracle::OracleArc> arcs;
    MinCostFlow<double> mcf(g.nodes);
    for (auto [a, b] : g.edges)
      for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
        arcs.push_back({from, to, cap(rng), cost(rng)});
        mcf.add_arc(from, to, arcs.back().capacity, arcs.back().cost);
      }
    const int t = static_cast<int>(g.nodes) - 1;
    const auto got = mcf.solve(0, t);
    const auto want = oracle::min_cost_max_flow(g.nodes, arcs, 0, t);
    with_flow += want.flow > 1e-9;
    c.near(got.total_flow, want.flow, 1e-6, "engine flow, trial " + std::to_string(trial));
    c.near(got.total_cost, want.cost, 1e-6, "engine cost, trial " + std::to_string(trial));
  }
  // The same comparison through knowledge_stream on random KGs.
  for (int trial = 0; trial < 250 && c.ok; ++trial, ++instances) {
    const auto g = oracle::random_graph(rng, 3 + trial % 10, 4 + trial % 17, 1 + trial % 4);
    const auto m = build_similarity(g);
    const auto claim = make_claim(g, 0, static_cast<RelationId>(trial % g.num_relations()), 1);
    const auto mask = mask_claim_edges(g, claim);
    std::vector<oracle::OracleArc> arcs;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      if (mask.contains(e)) continue;
      const auto& edge = g.edge(e);
      const double u = m.similarity(edge.relation, claim.predicate);
      if (u <= 0.0) continue;
      for (auto [from, to] : {std::pair{edge.a, edge.b}, std::pair{edge.b, edge.a}}) {
        const double lk = std::log(static_cast<double>(g.degree(to)));
        arcs.push_back({static_cast<int>(from), static_cast<int>(to), u / (1 + lk), lk});
      }
    }
    const auto s = knowledge_stream(g, m, claim);
    const auto want = oracle::min_cost_max_flow(g.num_nodes(), arcs, 0, 1);
    with_flow += want.flow > 1e-9;
    c.near(s.total_flow, want.flow, 1e-6, "stream flow, trial " + std::to_string(trial));
    c.near(s.diagnostics.total_cost, want.cost, 1e-6,
           "stream cost, trial " + std::to_string(trial));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
  c.expect(with_flow * 2 > instances, "too few instances carry flow");
  if (c.ok)
    c.detail = std::to_string(instances) + " instances, " + std::to_string(with_flow) +
               " with positive flow, " + std::to_string(secs) + " s";
  return c;
}

void check_identities(Check& c, const KnowledgeGraph& g, const SimilarityModel& m,
                      const ClaimTriple& claim, const std::string& tag) {
  for (auto mode : {PathMode::iteration, PathMode::decomposition}) {
    StreamConfig cfg;
    cfg.verify_invariants = true;
    cfg.mode = mode;
    const auto s = knowledge_stream(g, m, claim, cfg);
    double beta = 0.0, tau = 0.0;
    for (const auto& p : s.paths) {
      beta += p.bottleneck;
      tau += p.bottleneck * p.specificity;
    }
    c.near(beta, s.total_flow, 1e-9, tag + " gamma");
    c.near(tau, s.truth_score, 1e-9, tag + " tau");
    c.expect(s.diagnostics.max_conservation_error <= 1e-9, tag + " conservation");
    c.expect(s.diagnostics.max_capacity_violation <= 1e-12, tag + " capacity");
  }
}

Check flow_identities() {
  Check c;
  const auto toy = fixtures::toy_graph();
  const auto toy_model = build_similarity(toy);
  for (NodeId s = 0; s < toy.num_nodes(); ++s)
    for (NodeId o = 0; o < toy.num_nodes(); ++o)
      for (RelationId p = 0; p < toy.num_relations(); ++p)
        if (s != o) check_identities(c, toy, toy_model, make_claim(toy, s, p, o), "toy");
  const auto family = load_graph_file(fixtures::data_path("family_kg.tsv"));
  const auto family_model = build_similarity(family);
  const auto spouse = family.relation_id("spouse");
  for (int i = 0; i < 20; ++i) {
    char h[8], w[8];
    std::snprintf(h, sizeof h, "h%02d", i);
    std::snprintf(w, sizeof w, "w%02d", (i * 7) % 20);
    check_identities(c, family, family_model,
                     make_claim(family, family.node_id(h), spouse, family.node_id(w)), "family");
  }
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200 && c.ok; ++trial) {
    const auto g = oracle::random_graph(rng, 3 + trial % 10, 4 + trial % 17, 1 + trial % 4);
    check_identities(c, g, build_similarity(g),
                     make_claim(g, 0, static_cast<RelationId>(trial % g.num_relations()), 1),
                     "random " + std::to_string(trial));
  }
  return c;
}

std::vector<std::vector<std::uint64_t>> dense(const CooccurrenceMatrix& m) {
  std::vector<std::vector<std::uint64_t>> out(m.size(), std::vector<std::uint64_t>(m.size()));
  for (RelationId i = 0; i < m.size(); ++i)
    for (RelationId j = 0; j < m.size(); ++j) out[i][j] = m.at(i, j);
  return out;
}

Check line_graph() {
  Check c;
  const auto toy = fixtures::toy_graph();
  const auto m = build_cooccurrence(toy);
  const auto id = [&](const char* r) { return toy.relation_id(r); };
  const std::vector<std::tuple<const char*, const char*, std::uint64_t>> expected{
      {"A", "B", 2}, {"A", "C", 2}, {"A", "D", 1}, {"B", "C", 1}, {"B", "D", 1}, {"C", "D", 1},
      {"A", "A", 0}, {"B", "B", 0}, {"C", "C", 0}, {"D", "D", 0}};
  for (const auto& [a, b, n] : expected) {
    c.expect(m.at(id(a), id(b)) == n && m.at(id(b), id(a)) == n,
             std::string("toy C[") + a + "," + b + "]");
  }
  c.expect(toy.num_relations() == 4, "toy relation count");
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 150; ++trial) {
    const auto g = oracle::random_graph(rng, 2 + trial % 8, 1 + trial % 10, 1 + trial % 4);
    c.expect(dense(build_cooccurrence(g)) == oracle::cooccurrence_by_contraction(g),
             "random trial " + std::to_string(trial));
  }
  return c;
}

Check similarity_properties() {
  Check c;
  const auto m = build_similarity(fixtures::toy_graph());
  for (RelationId i = 0; i < m.size(); ++i) {
    if (m.row_norm(i) > 0) c.expect(m.similarity(i, i) == 1.0, "u(r,r) = 1");
    for (RelationId j = 0; j < m.size(); ++j) {
      const double u = m.similarity(i, j);
      c.near(u, m.similarity(j, i), 1e-12, "symmetry");
      c.expect(u >= 0.0 && u <= 1.0 + 1e-12, "range");
    }
  }
  // Column 0 is non-zero in every row, so its IDF is zero.
  CooccurrenceMatrix full(3);
  full.add(0, 0, 1);
  full.add(1, 0, 2);
  full.add(2, 0, 1);
  full.add(1, 2, 1);
  const auto t = tfidf_transform(full);
  for (RelationId i = 0; i < 3; ++i) c.expect(t.weight(i, 0) == 0.0, "zero IDF column");
  c.expect(t.weight(1, 2) > 0.0, "other columns keep weight");
  return c;
}

Check linker_oracle() {
  Check c;
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 150; ++trial) {
    const auto g = oracle::random_graph(rng, 3 + trial % 8, 3 + trial % 12, 1 + trial % 4);
    const auto m = build_similarity(g);
    const auto claim = make_claim(g, 0, static_cast<RelationId>(trial % g.num_relations()), 1);
    const auto mask = mask_claim_edges(g, claim);
    c.near(kl_score(g, claim).score, oracle::best_specificity(g, 0, 1, mask), 1e-9,
           "KL trial " + std::to_string(trial));
    c.near(kl_rel_score(g, m, claim).score,
           oracle::best_relational_specificity(g, 0, 1, mask, m.similarity_to(claim.predicate)),
           1e-9, "KL-REL trial " + std::to_string(trial));
  }
  return c;
}

Check baseline_oracles() {
  Check c;
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 150; ++trial) {
    const auto g = oracle::random_graph(rng, 3 + trial % 9, 3 + trial % 15, 1 + trial % 3);
    const auto claim = make_claim(g, 0, 0, 1);
    const auto mask = mask_claim_edges(g, claim);
    const auto tag = " trial " + std::to_string(trial);
    for (std::size_t len = 1; len <= 4; ++len)
      c.near(katz(g, claim, {0.05, len}), oracle::katz_matrix(g, 0, 1, mask, 0.05, len), 1e-9,
             "katz" + tag);
    const auto ns = oracle::neighbor_set(g, 0, mask), no = oracle::neighbor_set(g, 1, mask);
    double aa = 0.0;
    std::size_t common = 0;
    std::set<NodeId> all = ns;
    all.insert(no.begin(), no.end());
    for (auto z : ns)
      if (no.contains(z)) {
        ++common;
        aa += 1.0 / std::log(static_cast<double>(oracle::recount_degree(g, z)));
      }
    c.expect(adamic_adar(g, claim) == aa, "adamic-adar" + tag);
    c.expect(jaccard(g, claim) ==
                 (all.empty() ? 0.0 : static_cast<double>(common) / static_cast<double>(all.size())),
             "jaccard" + tag);
    c.expect(degree_product(g, claim) == static_cast<double>(oracle::recount_degree(g, 0) *
                                                             oracle::recount_degree(g, 1)),
             "degree product" + tag);
  }
  return c;
}

Check auroc_oracle() {
  Check c;
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<std::size_t> size(2, 100);
  std::uniform_int_distribution<int> coarse(0, 9);
  std::uniform_real_distribution<double> fine(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = size(rng);
    std::vector<double> scores(n);
    std::vector<bool> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = trial % 2 ? fine(rng) : coarse(rng) / 9.0;
      labels[i] = coarse(rng) < 4;
    }
    labels[0] = true;
    labels[1] = false;
    c.near(auroc(scores, labels), oracle::pairwise_auroc(scores, labels), 1e-12,
           "trial " + std::to_string(trial));
  }
  const std::vector<double> sep{0.9, 0.8, 0.2, 0.1}, ties{0.3, 0.3, 0.3, 0.3};
  const std::vector<bool> labels{true, true, false, false};
  c.expect(auroc(sep, labels) == 1.0, "perfect separation");
  c.expect(auroc(ties, labels) == 0.5, "all ties");
  return c;
}

Check end_to_end() {
  Check c;
  const auto t0 = Clock::now();
  const auto g = load_graph_file(fixtures::data_path("family_kg.tsv"));
  std::ifstream in(fixtures::data_path("spouse_true.tsv"));
  const auto trues = load_dataset(in, g);
  c.expect(trues.claims.size() == 20 && trues.skipped == 0, "20 true claims");
  c.expect(g.num_nodes() >= 50 && g.num_nodes() <= 70,
           "graph has " + std::to_string(g.num_nodes()) + " nodes");
  const auto neg = generate_lcwa_negatives(g, trues.claims, 1, 7);
  c.expect(neg.claims.size() == 20, "20 LCWA negatives");
  std::vector<LabeledClaim> claims = trues.claims;
  claims.insert(claims.end(), neg.claims.begin(), neg.claims.end());

  const auto model = build_similarity(g);
  ScoringContext ctx{g, model, {}, {}, 2};
  EvaluationConfig cfg;
  cfg.methods = {Method::ks, Method::ks_avg, Method::kl_rel, Method::degree_product};
  cfg.folds = 4;
  const auto rows = evaluate(ctx, claims, cfg);
  const double dp = rows[3].auroc;
  std::ostringstream summary;
  summary.precision(4);
  for (const auto& r : rows) summary << r.method << '=' << r.auroc << ' ';
  for (std::size_t i = 0; i < 3; ++i) {
    c.expect(rows[i].auroc >= 0.9, rows[i].method + " below 0.9: " + summary.str());
    c.expect(rows[i].auroc > dp, rows[i].method + " does not beat dp: " + summary.str());
  }

  const auto evidence = collect_evidence(ctx, claims, g.relation_id("spouse"), 1);
  const auto report = mine_patterns(g, evidence);
  c.expect(!report.patterns.empty() &&
               format_signature(g, report.patterns[0].signature) == "(child, child^-1)",
           "top pattern is not (child, child^-1)");
  const double secs = seconds_since(t0);
  c.expect(secs < 30.0, "took " + std::to_string(secs) + " s");
  if (c.ok) c.detail = summary.str() + "top=" + format_signature(g, report.patterns[0].signature);
  return c;
}

Check topk_plumbing() {
  Check c;
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_graph(rng, 6 + trial % 6, 10 + trial % 10, 2);
    const auto s = knowledge_stream(g, build_similarity(g), make_claim(g, 0, 0, 1));
    c.expect(truth_score_topk(s, kUnlimited) == s.truth_score, "top-inf equals tau");
  }
  std::vector<Stream> streams;
  std::vector<bool> labels;
  const auto stream_of = [](std::initializer_list<double> ws) {
    Stream s;
    for (double w : ws) {
      EvidencePath p;
      p.net_flow = w;
      s.paths.push_back(p);
    }
    return s;
  };
  for (int i = 0; i < 10; ++i) {
    streams.push_back(stream_of({0.1, 0.5, 0.0}));
    labels.push_back(true);
    streams.push_back(stream_of({0.3, 0.0, 1.0}));
    labels.push_back(false);
  }
  const std::vector<std::size_t> grid{1, 2, 3, 4, 5};
  const auto cv = cross_validate_k(streams, labels, 5, grid, 42);
  c.expect(cv.chosen_k == 2, "chosen k = " + std::to_string(cv.chosen_k));
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Check determinism() {
  Check c;
  const auto dir = std::filesystem::temp_directory_path() / "kstream_acceptance";
  std::filesystem::create_directories(dir);
  const auto dataset = (dir / "spouse.tsv").string();
  const std::string cli = KSTREAM_CLI;
  const std::string graph = fixtures::data_path("family_kg.tsv");
  const auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " 2>/dev/null";
    return std::system(cmd.c_str());
  };
  c.expect(run("negatives --graph \"" + graph + "\" --dataset \"" +
               fixtures::data_path("spouse_true.tsv") + "\" --seed 7 > \"" + dataset + "\"") == 0,
           "negatives failed");
  std::vector<std::string> outputs;
  for (int i = 0; i < 2; ++i) {
    const auto out = (dir / ("run" + std::to_string(i) + ".csv")).string();
    c.expect(run("evaluate --graph \"" + graph + "\" --dataset \"" + dataset +
                 "\" --methods all --folds 4 --seed 11 --workers 3 --out \"" + out + "\"") == 0,
             "evaluate failed");
    outputs.push_back(slurp(out));
  }
  c.expect(!outputs[0].empty() && outputs[0] == outputs[1], "CSV differs between runs");
  c.expect(std::count(outputs[0].begin(), outputs[0].end(), '\n') == 10,
           "expected header plus 9 rows");
  std::filesystem::remove_all(dir);
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
      {"flow optimality against min-cost max-flow oracle", flow_optimality},
      {"stream identities and conservation", flow_identities},
      {"co-occurrence equals contracted line graph", line_graph},
      {"similarity properties", similarity_properties},
      {"KL and KL-REL against exhaustive paths", linker_oracle},
      {"baselines against matrix and set oracles", baseline_oracles},
      {"AUROC against pairwise oracle", auroc_oracle},
      {"family/company end to end", end_to_end},
      {"top-k and cross-validation plumbing", topk_plumbing},
      {"evaluate output is deterministic", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    std::cout << (c.ok ? "PASS" : "FAIL") << "  " << name;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
    std::cout << '\n';
    failed += c.ok ? 0 : 1;
  }
  if (failed) std::cout << "acceptance: " << failed << " failed\n";
  else std::cout << "acceptance: all passed\n";
  return failed ? 1 : 0;
}
