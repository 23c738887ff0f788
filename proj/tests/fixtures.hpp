#pragma once

#include <cmath>
#include <sstream>
#include <vector>
#include <string>

#include "kstream/graph.hpp"
#include "kstream/relsim.hpp"

namespace kstream::fixtures {

// Five entities a..e and four relations A..D:
//   a -A- b, b -B- c, a -C- c, c -D- d, c -A- e
// Co-incident label pairs: at a {A,C}; at b {A,B}; at c {B,C,D,A}; d, e none.
inline const char* kToyTsv =
    "a\tA\tb\n"
    "b\tB\tc\n"
    "a\tC\tc\n"
    "c\tD\td\n"
    "c\tA\te\n";

inline KnowledgeGraph toy_graph() {
  std::istringstream in(kToyTsv);
  return load_graph(in, GraphFormat::tsv);
}

inline KnowledgeGraph from_tsv(const std::string& text) {
  std::istringstream in(text);
  return load_graph(in, GraphFormat::tsv);
}

// Model whose similarity to `target` is u[r] for every r != target. Row
// target is the unit vector e_target; row r is u[r] e_target + sqrt(1-u^2) e_r.
inline SimilarityModel model_with_similarity(std::size_t relations, RelationId target,
                                             const std::vector<double>& u) {
  std::vector<double> w(relations * relations, 0.0);
  w[target * relations + target] = 1.0;
  for (RelationId r = 0; r < relations; ++r) {
    if (r == target) continue;
    w[r * relations + target] = u[r];
    w[r * relations + r] = std::sqrt(1.0 - u[r] * u[r]);
  }
  return SimilarityModel(relations, std::move(w));
}

inline std::string data_path(const std::string& name) {
  return std::string(KSTREAM_TEST_DATA) + "/" + name;
}

}  // namespace kstream::fixtures
