#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sentilab/features.hpp"
#include "sentilab/sentiment.hpp"
#include "sentilab/util/error.hpp"

namespace sentilab::neural {

inline constexpr std::int32_t kPadId = 0;

// Row-major id matrix (rows x max_len); ids past a row's length are kPadId.
struct SequenceBatch {
  std::size_t max_len = 0;
  std::vector<std::int32_t> token_ids;
  std::vector<std::size_t> lengths;
  std::vector<Sentiment> labels;

  std::size_t rows() const noexcept { return lengths.size(); }
  std::span<const std::int32_t> row(std::size_t r) const { return {token_ids.data() + r * max_len, max_len}; }
  std::span<const std::int32_t> tokens(std::size_t r) const { return {token_ids.data() + r * max_len, lengths[r]}; }

  SequenceBatch select(std::span<const std::size_t> picks) const {
    SequenceBatch out;
    out.max_len = max_len;
    out.token_ids.reserve(picks.size() * max_len);
    for (auto r : picks) {
      auto ids = row(r);
      out.token_ids.insert(out.token_ids.end(), ids.begin(), ids.end());
      out.lengths.push_back(lengths[r]);
      out.labels.push_back(labels[r]);
    }
    return out;
  }
};

// Term i of the unigram vocabulary maps to id i + 1. Tokens outside the
// vocabulary are skipped; sequences keep their first max_len ids.
inline SequenceBatch encode_sequences(std::span<const TokenList> docs, std::span<const Sentiment> labels,
                                      const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 1) throw PreconditionError("encode_sequences: max_len must be >= 1");
  if (docs.size() != labels.size()) throw PreconditionError("encode_sequences: docs/labels length mismatch");
  SequenceBatch batch;
  batch.max_len = max_len;
  batch.token_ids.assign(docs.size() * max_len, kPadId);
  for (std::size_t r = 0; r < docs.size(); ++r) {
    std::size_t len = 0;
    for (const auto& tok : docs[r]) {
      if (len == max_len) break;
      if (auto idx = vocab.index_of(tok)) batch.token_ids[r * max_len + len++] = static_cast<std::int32_t>(*idx) + 1;
    }
    batch.lengths.push_back(len);
    batch.labels.push_back(labels[r]);
  }
  return batch;
}

}  // namespace sentilab::neural
