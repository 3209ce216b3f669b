#pragma once
// GloVe text vectors and the vocabulary-aligned embedding matrix.

#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "sentilab/features.hpp"
#include "sentilab/util/error.hpp"
#include "sentilab/util/io.hpp"
#include "sentilab/util/rng.hpp"

namespace sentilab::neural {

struct EmbeddingTable {
  std::size_t dimension = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::vector<std::string> diagnostics;

  const std::vector<double>* find(std::string_view word) const {
    auto it = vectors.find(std::string(word));
    return it == vectors.end() ? nullptr : &it->second;
  }
};

// One entry per line: word followed by d decimals. The first well-formed line
// fixes d; a later line with a different component count is fatal, a line
// with a non-numeric component is skipped.
inline EmbeddingTable load_glove(std::string_view text) {
  EmbeddingTable table;
  std::size_t line_no = 0;
  std::size_t start = 0;
  std::vector<std::string_view> parts;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    parts.clear();
    std::size_t p = 0;
    while (p < line.size()) {
      while (p < line.size() && (line[p] == ' ' || line[p] == '\t')) ++p;
      const std::size_t q = p;
      while (p < line.size() && line[p] != ' ' && line[p] != '\t') ++p;
      if (p > q) parts.push_back(line.substr(q, p - q));
    }
    const std::size_t dim = parts.size() - 1;
    if (dim == 0) throw InputError("glove line " + std::to_string(line_no) + ": no vector components");
    if (table.dimension == 0) table.dimension = dim;
    if (dim != table.dimension) {
      throw InputError("glove line " + std::to_string(line_no) + ": " + std::to_string(dim) +
                       " components, expected " + std::to_string(table.dimension));
    }
    std::vector<double> v(dim);
    bool ok = true;
    for (std::size_t k = 0; k < dim && ok; ++k) ok = parse_double(parts[k + 1], v[k]) && std::isfinite(v[k]);
    if (!ok) {
      table.diagnostics.push_back("line " + std::to_string(line_no) + ": non-numeric component, skipped");
      continue;
    }
    std::string word(parts[0]);
    if (table.vectors.contains(word)) {
      table.diagnostics.push_back("line " + std::to_string(line_no) + ": duplicate '" + word + "', last wins");
    }
    table.vectors[std::move(word)] = std::move(v);
  }
  if (table.dimension == 0) throw InputError("glove: empty file, dimension undeterminable");
  return table;
}

// Row 0 is the padding row (zeros); row i + 1 belongs to vocabulary term i.
// Terms missing from the table get components uniform in [-0.05, 0.05] drawn
// from Rng::derive(seed, {i}), so a row depends only on (seed, term index).
inline Eigen::MatrixXd build_embedding_matrix(const Vocabulary& vocab, const EmbeddingTable& table,
                                              std::uint64_t seed) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vocab.size() + 1),
                                            static_cast<Eigen::Index>(table.dimension));
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i + 1);
    if (const auto* v = table.find(vocab.term(i))) {
      for (std::size_t k = 0; k < v->size(); ++k) m(row, static_cast<Eigen::Index>(k)) = (*v)[k];
    } else {
      Rng rng = Rng::derive(seed, {i});
      for (Eigen::Index k = 0; k < m.cols(); ++k) m(row, k) = rng.uniform(-0.05, 0.05);
    }
  }
  return m;
}

// Same layout without pretrained vectors: every term row is random.
inline Eigen::MatrixXd random_embedding_matrix(const Vocabulary& vocab, std::size_t dimension, std::uint64_t seed) {
  EmbeddingTable empty;
  empty.dimension = dimension;
  return build_embedding_matrix(vocab, empty, seed);
}

}  // namespace sentilab::neural
