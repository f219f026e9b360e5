#include "chartdate/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <regex>
#include <stdexcept>

#include "chartdate/error.hpp"

namespace chartdate {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// ASCII letters and digits, plus every byte of a multi-byte UTF-8 sequence.
bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_roman_numeral(std::string_view word) {
  static const std::regex pattern(
      "m{0,4}(cm|cd|d?c{0,3})(xc|xl|l?x{0,3})(ix|iv|v?i{0,3})",
      std::regex::ECMAScript | std::regex::optimize);
  static constexpr std::array<std::string_view, 4> stoplist{"i", "mi", "di", "vi"};
  if (word.empty()) return false;
  const std::string lower = lowercase(word);
  if (std::find(stoplist.begin(), stoplist.end(), lower) != stoplist.end()) return false;
  return std::regex_match(lower, pattern);
}

bool is_digits(std::string_view word) {
  return !word.empty() && std::all_of(word.begin(), word.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

// Encased numbers as they appear in manually prepared corpora: "!xv!".
bool is_encased(std::string_view word) {
  return word.size() > 2 && word.front() == '!' && word.back() == '!';
}

std::string strip_bangs(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (char c : word)
    if (c != '!') out.push_back(c);
  return out;
}

}  // namespace

bool is_number_word(std::string_view word) {
  return is_digits(word) || is_roman_numeral(word);
}

Document preprocess(const RawDocument& raw, const SubstitutionTable* substitutions) {
  if (raw.text.empty()) throw DataError("document '" + raw.id + "' has empty text");

  Document doc;
  doc.id = raw.id;
  doc.year = raw.year;

  std::size_t pos = 0;
  const std::string& text = raw.text;
  while (pos < text.size()) {
    while (pos < text.size() && is_space(text[pos])) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !is_space(text[end])) ++end;
    if (end == pos) break;
    const std::string_view chunk(text.data() + pos, end - pos);
    pos = end;

    std::string word;
    word.reserve(chunk.size());
    for (char c : chunk)
      if (c == '!' || is_word_byte(c)) word.push_back(c);

    const bool encased = is_encased(word);
    word = strip_bangs(word);
    if (word.empty()) continue;

    if (substitutions != nullptr) {
      if (auto it = substitutions->find(word); it != substitutions->end()) {
        word = it->second;
        if (word.empty()) continue;
      }
    }

    // Encased tokens (including our own "!NUM!") are numbers by fiat.
    if (encased || is_number_word(word)) {
      doc.tokens.emplace_back(kNumberToken);
      continue;
    }
    doc.tokens.push_back(std::move(word));
  }

  if (doc.tokens.empty())
    throw DataError("document '" + raw.id + "' is empty after preprocessing");
  return doc;
}

std::optional<int> parse_year(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && is_space(text[i])) ++i;
  std::size_t j = i;
  while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
  if (j == i || j - i > 6) return std::nullopt;
  const int year = std::stoi(std::string(text.substr(i, j - i)));
  // Anything after the leading year must be a range tail: separator then digits.
  std::string_view rest = text.substr(j);
  while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
  if (rest.empty()) return year;
  static constexpr std::array<std::string_view, 4> separators{"-", "\xE2\x80\x93",
                                                              "\xE2\x80\x94", "/"};
  for (auto sep : separators) {
    if (rest.starts_with(sep)) {
      rest.remove_prefix(sep.size());
      while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
      while (!rest.empty() && is_space(rest.back())) rest.remove_suffix(1);
      if (is_digits(rest)) return year;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string shingle_key(std::span<const std::string> words) {
  std::string key;
  std::size_t size = words.empty() ? 0 : words.size() - 1;
  for (const auto& w : words) size += w.size();
  key.reserve(size);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i != 0) key.push_back(' ');
    key += words[i];
  }
  return key;
}

std::string Shingle::key() const { return shingle_key(words); }

std::vector<Shingle> extract_shingles(const Document& doc, int k) {
  if (k < 1) throw std::invalid_argument("shingle size k must be >= 1");
  std::vector<Shingle> out;
  const auto m = doc.tokens.size();
  const auto ku = static_cast<std::size_t>(k);
  if (m < ku) return out;
  out.reserve(m - ku + 1);
  for (std::size_t j = 0; j + ku <= m; ++j)
    out.push_back(Shingle{{doc.tokens.begin() + static_cast<std::ptrdiff_t>(j),
                           doc.tokens.begin() + static_cast<std::ptrdiff_t>(j + ku)}});
  return out;
}

std::vector<std::string> shingle_keys(const Document& doc, int k) {
  if (k < 1) throw std::invalid_argument("shingle size k must be >= 1");
  std::vector<std::string> out;
  const auto m = doc.tokens.size();
  const auto ku = static_cast<std::size_t>(k);
  if (m < ku) return out;
  out.reserve(m - ku + 1);
  const std::span<const std::string> tokens(doc.tokens);
  for (std::size_t j = 0; j + ku <= m; ++j) out.push_back(shingle_key(tokens.subspan(j, ku)));
  return out;
}

// ---------------------------------------------------------------------------
// ShingleIndex

ShingleIndex ShingleIndex::build(std::span<const Document> docs, int k) {
  if (k < 1) throw std::invalid_argument("shingle size k must be >= 1");
  if (docs.empty()) throw DataError("cannot index an empty corpus");

  ShingleIndex index;
  index.k_ = k;

  std::vector<const Document*> kept;
  kept.reserve(docs.size());
  for (const auto& doc : docs) {
    if (!doc.year) throw DataError("training document '" + doc.id + "' has no year");
    if (doc.tokens.size() >= static_cast<std::size_t>(k)) kept.push_back(&doc);
  }
  if (kept.empty()) throw DataError("no training document is at least k tokens long");

  auto [lo, hi] = std::minmax_element(kept.begin(), kept.end(), [](auto* a, auto* b) {
    return *a->year < *b->year;
  });
  index.year_min_ = *(*lo)->year;
  index.year_max_ = *(*hi)->year;
  const auto span_years = static_cast<std::size_t>(index.year_max_ - index.year_min_ + 1);
  index.slots_.assign(span_years, 0);
  index.docs_by_year_.assign(span_years, {});

  // Accumulate per (shingle, year) and per (shingle, doc) in flat maps,
  // then sort into the compact per-shingle vectors.
  std::vector<std::map<int, std::int64_t>> year_acc;
  for (std::uint32_t d = 0; d < kept.size(); ++d) {
    const Document& doc = *kept[d];
    const int year = *doc.year;
    index.doc_ids_.push_back(doc.id);
    index.doc_years_.push_back(year);
    const auto y = static_cast<std::size_t>(year - index.year_min_);
    index.docs_by_year_[y].push_back(d);

    std::unordered_map<ShingleId, std::int64_t> local;
    for (auto& key : shingle_keys(doc, k)) {
      auto [it, inserted] = index.ids_.try_emplace(key, static_cast<ShingleId>(index.keys_.size()));
      if (inserted) {
        index.keys_.push_back(std::move(key));
        year_acc.emplace_back();
        index.by_doc_.emplace_back();
      }
      ++local[it->second];
    }
    const auto n_slots = static_cast<std::int64_t>(doc.tokens.size()) - k + 1;
    index.slots_[y] += n_slots;
    index.total_slots_ += n_slots;

    std::vector<std::pair<ShingleId, std::int64_t>> sorted(local.begin(), local.end());
    std::sort(sorted.begin(), sorted.end());
    for (auto [id, count] : sorted) {
      year_acc[id][year] += count;
      index.by_doc_[id].push_back(DocCount{d, count});
    }
  }

  index.by_year_.resize(year_acc.size());
  for (std::size_t id = 0; id < year_acc.size(); ++id) {
    auto& out = index.by_year_[id];
    out.reserve(year_acc[id].size());
    for (auto [year, count] : year_acc[id]) out.push_back(YearCount{year, count});
  }

  for (std::size_t y = 0; y < span_years; ++y)
    if (!index.docs_by_year_[y].empty()) index.years_.push_back(index.year_min_ + static_cast<int>(y));

  std::vector<int> sorted_years = index.doc_years_;
  std::sort(sorted_years.begin(), sorted_years.end());
  const auto n = sorted_years.size();
  index.median_year_ = n % 2 == 1
                           ? sorted_years[n / 2]
                           : 0.5 * (sorted_years[n / 2 - 1] + sorted_years[n / 2]);
  return index;
}

std::optional<ShingleId> ShingleIndex::find(std::string_view key) const {
  auto it = ids_.find(std::string(key));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::int64_t ShingleIndex::count(std::string_view key, int year) const {
  auto id = find(key);
  if (!id) return 0;
  const auto& counts = by_year_[*id];
  auto it = std::lower_bound(counts.begin(), counts.end(), year,
                             [](const YearCount& yc, int y) { return yc.year < y; });
  return it != counts.end() && it->year == year ? it->count : 0;
}

std::int64_t ShingleIndex::slots(int year) const {
  if (year < year_min_ || year > year_max_) return 0;
  return slots_[static_cast<std::size_t>(year - year_min_)];
}

std::span<const std::uint32_t> ShingleIndex::docs_in_year(int year) const {
  if (year < year_min_ || year > year_max_) return {};
  return docs_by_year_[static_cast<std::size_t>(year - year_min_)];
}

// ---------------------------------------------------------------------------
// Splitting

CorpusSplit split_corpus(std::span<const Document> docs, SplitFractions fractions,
                         std::uint64_t seed) {
  if (!(fractions.train > 0.0) || !(fractions.validation > 0.0) || !(fractions.test > 0.0))
    throw std::invalid_argument("split fractions must all be positive");
  if (std::abs(fractions.train + fractions.validation + fractions.test - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
  if (docs.size() < 3) throw DataError("need at least 3 documents to split");

  const auto n = docs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto rounded = [n](double f) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(n))));
  };
  std::size_t n_val = rounded(fractions.validation);
  std::size_t n_test = rounded(fractions.test);
  while (n_val + n_test > n - 1) {
    if (n_val >= n_test) --n_val; else --n_test;
  }

  CorpusSplit split;
  split.validation.reserve(n_val);
  split.test.reserve(n_test);
  split.train.reserve(n - n_val - n_test);
  for (std::size_t i = 0; i < n; ++i) {
    const Document& doc = docs[order[i]];
    if (i < n_val)
      split.validation.push_back(doc);
    else if (i < n_val + n_test)
      split.test.push_back(doc);
    else
      split.train.push_back(doc);
  }
  return split;
}

}  // namespace chartdate
