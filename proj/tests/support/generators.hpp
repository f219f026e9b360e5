#pragma once

// Small random generators for property tests.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chartdate/corpus.hpp"
#include "chartdate/metrics.hpp"

namespace chartdate::testing {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::string word(int i) { return "w" + std::to_string(i); }

// Tokens drawn from a vocabulary of `vocab` words.
inline std::vector<std::string> random_tokens(Rng& rng, int vocab, int min_len, int max_len) {
  const int n = uniform_int(rng, min_len, max_len);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(word(uniform_int(rng, 0, vocab - 1)));
  return out;
}

inline Document random_document(Rng& rng, const std::string& id, int vocab, int min_len, int max_len,
                                std::optional<int> year = std::nullopt) {
  Document d;
  d.id = id;
  d.year = year;
  d.tokens = random_tokens(rng, vocab, min_len, max_len);
  return d;
}

// Dated documents with years uniform in [year_min, year_max].
inline std::vector<Document> random_corpus(Rng& rng, std::size_t n, int vocab, int min_len, int max_len,
                                           int year_min, int year_max) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "doc%05zu", i);
    docs.push_back(random_document(rng, id, vocab, min_len, max_len, uniform_int(rng, year_min, year_max)));
  }
  return docs;
}

// Dense nonnegative integer counts, at least one positive.
inline std::vector<double> random_counts(Rng& rng, int dims, int max_count, double zero_prob = 0.4) {
  std::vector<double> v(static_cast<std::size_t>(dims));
  bool any = false;
  for (auto& x : v) {
    x = uniform_real(rng, 0.0, 1.0) < zero_prob ? 0.0 : uniform_int(rng, 1, max_count);
    any = any || x > 0.0;
  }
  if (!any) v[static_cast<std::size_t>(uniform_int(rng, 0, dims - 1))] = 1.0;
  return v;
}

}  // namespace chartdate::testing
