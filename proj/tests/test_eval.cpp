#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "kstream/eval.hpp"
#include "kstream/patterns.hpp"
#include "oracles.hpp"

using namespace kstream;

namespace {

Stream stream_of(std::initializer_list<double> ws) {
  Stream s;
  for (double w : ws) {
    EvidencePath p;
    p.net_flow = w;
    s.paths.push_back(p);
  }
  return s;
}

LabeledClaim labeled(const KnowledgeGraph& g, const char* s, const char* p, const char* o,
                     bool label) {
  return {make_claim(g, s, p, o), label, ""};
}

}  // namespace

TEST(Dataset, LoadsAndSkipsUnknowns) {
  const auto g = fixtures::toy_graph();
  std::istringstream in(
      "# header\n"
      "a\tA\tb\t1\tgold\n"
      "a\tA\td\t0\n"
      "a\tZ\tb\t1\n"
      "a\tA\tnobody\tfalse\n"
      "a\tA\ta\t1\n");
  const auto ds = load_dataset(in, g);
  ASSERT_EQ(ds.claims.size(), 2u);
  EXPECT_EQ(ds.skipped, 3u);
  EXPECT_TRUE(ds.claims[0].label);
  EXPECT_EQ(ds.claims[0].source_tag, "gold");
  EXPECT_FALSE(ds.claims[1].label);

  std::ostringstream out;
  write_dataset(g, ds.claims, out);
  std::istringstream back(out.str());
  EXPECT_EQ(load_dataset(back, g).claims, ds.claims);
}

TEST(Dataset, Errors) {
  const auto g = fixtures::toy_graph();
  std::istringstream empty("# nothing\n\n");
  EXPECT_THROW(load_dataset(empty, g), Error);
  std::istringstream short_row("a\tA\tb\n");
  EXPECT_THROW(load_dataset(short_row, g), Error);
  std::istringstream bad_label("a\tA\tb\tyes\n");
  try {
    load_dataset(bad_label, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::bad_input);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(Lcwa, DrawsFromPoolAndExcludesKnownTrues) {
  const auto g = fixtures::from_tsv(
      "h1\tspouse\tw1\nh2\tspouse\tw2\nh3\tspouse\tw3\nh1\tspouse\tw4\n");
  const std::vector<LabeledClaim> trues{
      labeled(g, "h1", "spouse", "w1", true), labeled(g, "h2", "spouse", "w2", true),
      labeled(g, "h3", "spouse", "w3", true), labeled(g, "h1", "spouse", "w4", true)};
  const auto neg = generate_lcwa_negatives(g, trues, 2, 7);
  EXPECT_EQ(neg.skipped, 0u);
  EXPECT_EQ(neg.claims.size(), 8u);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& n : neg.claims) {
    EXPECT_FALSE(n.label);
    EXPECT_EQ(n.source_tag, "lcwa");
    for (const auto& t : trues) EXPECT_FALSE(n.claim == t.claim);
    seen.insert({n.claim.subject, n.claim.object});
  }
  // h1 can only draw w2 and w3.
  EXPECT_EQ(seen.size(), 2u + 2u + 2u);

  const auto again = generate_lcwa_negatives(g, trues, 2, 7);
  EXPECT_EQ(again.claims, neg.claims);
  EXPECT_TRUE(generate_lcwa_negatives(g, trues, 0, 7).claims.empty());
}

TEST(Lcwa, EmptyPoolIsSkipped) {
  const auto g = fixtures::from_tsv("a\tr\tb\n");
  const std::vector<LabeledClaim> trues{labeled(g, "a", "r", "b", true)};
  const auto neg = generate_lcwa_negatives(g, trues, 3, 1);
  EXPECT_TRUE(neg.claims.empty());
  EXPECT_EQ(neg.skipped, 1u);
}

TEST(Lcwa, GraphPoolUsesStoredObjects) {
  const auto g = fixtures::from_tsv("a\tr\tb\nc\tr\td\nx\tq\ty\n");
  const std::vector<LabeledClaim> trues{labeled(g, "a", "r", "b", true)};
  const auto neg = generate_lcwa_negatives(g, trues, 5, 1, NegativePool::graph);
  ASSERT_EQ(neg.claims.size(), 1u);
  EXPECT_EQ(neg.claims[0].claim.object, g.node_id("d"));
}

TEST(Auroc, HandValues) {
  const std::vector<double> perfect{0.9, 0.8, 0.1, 0.2};
  const std::vector<bool> labels{true, true, false, false};
  EXPECT_EQ(auroc(perfect, labels), 1.0);
  const std::vector<double> inverted{0.1, 0.2, 0.9, 0.8};
  EXPECT_EQ(auroc(inverted, labels), 0.0);
  const std::vector<double> tied{0.5, 0.5, 0.5, 0.5};
  EXPECT_EQ(auroc(tied, labels), 0.5);
  const std::vector<double> partial{0.9, 0.3, 0.3, 0.1};
  EXPECT_EQ(auroc(partial, labels), 0.875);
  const std::vector<bool> one_class{true, true, true, true};
  EXPECT_THROW(auroc(perfect, one_class), Error);
  const std::vector<bool> short_labels{true};
  EXPECT_THROW(auroc(perfect, short_labels), Error);
}

TEST(Auroc, MatchesPairwiseOracleAndInvariances) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> level(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + trial % 30;
    std::vector<double> scores(n);
    std::vector<bool> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = level(rng) * 0.25;
      labels[i] = i % 2 == 0 || level(rng) == 0;
    }
    labels[1] = false;
    const double a = auroc(scores, labels);
    EXPECT_NEAR(a, oracle::pairwise_auroc(scores, labels), 1e-12);

    std::vector<double> shifted;
    for (double x : scores) shifted.push_back(std::exp(3 * x) + 7);
    EXPECT_NEAR(auroc(shifted, labels), a, 1e-12);
    std::vector<bool> flipped;
    for (bool l : labels) flipped.push_back(!l);
    EXPECT_NEAR(auroc(scores, flipped), 1.0 - a, 1e-12);
  }
}

TEST(Folds, StratifiedAndSeeded) {
  std::vector<bool> labels;
  for (int i = 0; i < 23; ++i) labels.push_back(i % 3 == 0);
  const auto a = stratified_folds(labels, 5, 3);
  EXPECT_EQ(a, stratified_folds(labels, 5, 3));
  std::vector<int> pos(5, 0), all(5, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++all[a[i]];
    if (labels[i]) ++pos[a[i]];
  }
  for (int f = 0; f < 5; ++f) {
    EXPECT_GE(pos[f], 1);
    EXPECT_LE(pos[f], 2);
    EXPECT_GE(all[f], 4);
    EXPECT_LE(all[f], 5);
  }
  EXPECT_THROW(stratified_folds(labels, 30, 3), Error);
  EXPECT_THROW(stratified_folds(labels, 1, 3), Error);
}

TEST(CrossValidation, PicksSeparatingK) {
  std::vector<Stream> streams;
  std::vector<bool> labels;
  for (int i = 0; i < 10; ++i) {
    streams.push_back(stream_of({0.1, 0.5, 0.0}));
    labels.push_back(true);
    streams.push_back(stream_of({0.3, 0.0, 1.0}));
    labels.push_back(false);
  }
  const std::vector<std::size_t> grid{1, 2, 3};
  const auto cv = cross_validate_k(streams, labels, 5, grid, 42);
  EXPECT_EQ(cv.chosen_k, 2u);
  EXPECT_EQ(cv.mean_auroc, (std::vector<double>{0.0, 1.0, 0.0}));
  EXPECT_EQ(cv.fold_auroc.size(), 5u);
  EXPECT_EQ(cross_validated_auroc(streams, labels, 5, grid, 42), 1.0);
  EXPECT_EQ(truth_score_topk(streams[0], 2), 0.6);
  EXPECT_NEAR(truth_score_topk(streams[1], 2), 0.3, 1e-15);
}

TEST(CrossValidation, TiesPreferSmallerK) {
  std::vector<Stream> streams;
  std::vector<bool> labels;
  for (int i = 0; i < 6; ++i) {
    streams.push_back(stream_of({1.0}));
    labels.push_back(true);
    streams.push_back(stream_of({0.5}));
    labels.push_back(false);
  }
  const std::vector<std::size_t> grid{3, 1, 2};
  EXPECT_EQ(cross_validate_k(streams, labels, 3, grid, 1).chosen_k, 1u);
}

TEST(CrossValidation, Errors) {
  std::vector<Stream> streams(4, stream_of({1.0}));
  const std::vector<bool> labels{true, false, true, false};
  const std::vector<std::size_t> grid{1}, empty_grid{}, zero_grid{0};
  EXPECT_THROW(cross_validate_k(streams, labels, 5, grid, 1), Error);
  EXPECT_THROW(cross_validate_k(streams, labels, 2, empty_grid, 1), Error);
  EXPECT_THROW(cross_validate_k(streams, labels, 2, zero_grid, 1), Error);
}

TEST(Patterns, DifferenceAndOrdering) {
  const auto g = fixtures::from_tsv(
      "h\tchild\tk\nw\tchild\tk\nh\tworksFor\tc\nw\tworksFor\tc\nh\tspouse\tw\n");
  const auto child = g.relation_id("child"), works = g.relation_id("worksFor");
  const auto h = g.node_id("h"), w = g.node_id("w"), k = g.node_id("k"), c = g.node_id("c");

  const auto path = [&](NodeId mid, RelationId r, EdgeId e1, EdgeId e2) {
    EvidencePath p;
    p.nodes = {h, mid, w};
    p.steps = {{e1, r, true}, {e2, r, false}};
    return p;
  };
  Stream t1, t2, f1;
  t1.paths = {path(k, child, 0, 1), path(c, works, 2, 3)};
  t2.paths = {path(k, child, 0, 1)};
  f1.paths = {path(c, works, 2, 3)};
  const auto spouse = g.relation_id("spouse");
  const std::vector<ClaimEvidence> ev{{{{h, spouse, w}, true, ""}, t1},
                                      {{{h, spouse, w}, true, ""}, t2},
                                      {{{h, spouse, w}, false, ""}, f1}};
  const auto report = mine_patterns(g, ev);
  EXPECT_EQ(report.relation, spouse);
  ASSERT_EQ(report.patterns.size(), 1u);
  EXPECT_EQ(report.patterns[0].frequency, 2u);
  EXPECT_EQ(format_signature(g, report.patterns[0].signature), "(child, child^-1)");
  EXPECT_EQ(report.patterns[0].example, "h -child-> k <-child- w");
}

TEST(Patterns, NoTrueClaimsGivesEmptyReport) {
  const auto g = fixtures::toy_graph();
  const std::vector<ClaimEvidence> ev;
  EXPECT_TRUE(mine_patterns(g, ev).patterns.empty());
}
