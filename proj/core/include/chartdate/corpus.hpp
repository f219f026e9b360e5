#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace chartdate {

/// The single token every number is mapped to.
inline constexpr std::string_view kNumberToken = "!NUM!";

/// Global bounds on plausible document years.
struct YearBounds {
  int min = 1000;
  int max = 1500;
};

/// A document as ingested: untokenized text and an optional known year.
struct RawDocument {
  std::string id;
  std::optional<int> year;
  std::string text;
};

/// A preprocessed document: whitespace-free tokens, numbers collapsed to
/// kNumberToken, case preserved.
struct Document {
  std::string id;
  std::optional<int> year;
  std::vector<std::string> tokens;
};

/// Whole-token replacements applied before number detection (spelling
/// normalization tables and the like).
using SubstitutionTable = std::unordered_map<std::string, std::string>;

/// A run of k consecutive tokens.
struct Shingle {
  std::vector<std::string> words;

  /// Canonical key: words joined by a single space. Tokens never contain
  /// whitespace, so the key is unambiguous.
  std::string key() const;

  friend bool operator==(const Shingle&, const Shingle&) = default;
};

std::string shingle_key(std::span<const std::string> words);

/// True for digit strings and for strict Roman numerals (case-insensitive)
/// that are not on the Latin stoplist {i, mi, di, vi}.
bool is_number_word(std::string_view word);

/// Tokenizes `raw.text`: drops punctuation (every ASCII non-alphanumeric
/// character), splits on whitespace, applies `substitutions` to whole
/// tokens, then replaces numbers (including manually encased `!xv!`
/// tokens) by kNumberToken. Bytes >= 0x80 are kept as word characters so
/// UTF-8 letters survive.
///
/// Throws DataError when the text is empty or nothing survives.
Document preprocess(const RawDocument& raw,
                    const SubstitutionTable* substitutions = nullptr);

/// Parses a year field such as "1230", "1230-1231" or "1230–1231" to the
/// lower year. Returns nullopt for text that is not a year.
std::optional<int> parse_year(std::string_view text);

/// All max(0, |tokens| - k + 1) shingles in document order, duplicates
/// retained. Throws std::invalid_argument for k < 1.
std::vector<Shingle> extract_shingles(const Document& doc, int k);

/// Same as extract_shingles but returns the canonical keys.
std::vector<std::string> shingle_keys(const Document& doc, int k);

using ShingleId = std::uint32_t;

struct YearCount {
  int year = 0;
  std::int64_t count = 0;
};

struct DocCount {
  std::uint32_t doc = 0;  ///< position in ShingleIndex::doc_ids()
  std::int64_t count = 0;
};

/// Occurrence counts of every k-shingle of a dated training corpus, broken
/// down by year and by document, plus the number of shingle slots per
/// year. Immutable once built; safe to share between threads.
class ShingleIndex {
 public:
  /// Documents shorter than k contribute nothing and are left out. Throws
  /// DataError when `docs` is empty, a document is undated, or no document
  /// yields a shingle; std::invalid_argument for k < 1.
  static ShingleIndex build(std::span<const Document> docs, int k);

  int k() const { return k_; }
  int year_min() const { return year_min_; }
  int year_max() const { return year_max_; }

  std::size_t shingle_count() const { return keys_.size(); }
  std::optional<ShingleId> find(std::string_view key) const;
  const std::string& key(ShingleId id) const { return keys_[id]; }

  /// Per-year counts for a shingle, ascending by year, zero years omitted.
  std::span<const YearCount> year_counts(ShingleId id) const {
    return by_year_[id];
  }
  /// Per-document counts for a shingle, ascending by document position.
  std::span<const DocCount> doc_counts(ShingleId id) const {
    return by_doc_[id];
  }
  /// Occurrences of `key` in documents dated `year` (0 when absent).
  std::int64_t count(std::string_view key, int year) const;

  /// Sum over documents dated `year` of (|tokens| - k + 1).
  std::int64_t slots(int year) const;
  std::int64_t total_slots() const { return total_slots_; }
  /// Years holding at least one indexed document, ascending.
  const std::vector<int>& years() const { return years_; }

  std::span<const std::string> doc_ids() const { return doc_ids_; }
  std::span<const int> doc_years() const { return doc_years_; }
  /// Positions (into doc_ids()) of the documents dated `year`.
  std::span<const std::uint32_t> docs_in_year(int year) const;

  /// Median of the indexed documents' years (mean of the middle two for an
  /// even count).
  double median_year() const { return median_year_; }

 private:
  int k_ = 1;
  int year_min_ = 0;
  int year_max_ = 0;
  std::unordered_map<std::string, ShingleId> ids_;
  std::vector<std::string> keys_;
  std::vector<std::vector<YearCount>> by_year_;
  std::vector<std::vector<DocCount>> by_doc_;
  std::vector<std::int64_t> slots_;  // indexed by year - year_min_
  std::vector<std::vector<std::uint32_t>> docs_by_year_;
  std::vector<int> years_;
  std::vector<std::string> doc_ids_;
  std::vector<int> doc_years_;
  std::int64_t total_slots_ = 0;
  double median_year_ = 0.0;
};

struct SplitFractions {
  double train = 0.0;
  double validation = 0.0;
  double test = 0.0;
};

/// Fractions reproducing a 2608/419/326 partition of 3353 documents.
inline constexpr SplitFractions kReferenceSplit{2608.0 / 3353.0, 419.0 / 3353.0,
                                                326.0 / 3353.0};

struct CorpusSplit {
  std::vector<Document> train;
  std::vector<Document> validation;
  std::vector<Document> test;
};

/// Random disjoint, exhaustive partition. Validation and test sizes are
/// rounded to nearest, train takes the remainder. Identical seeds give
/// identical partitions. Throws std::invalid_argument when a fraction is
/// not positive or the fractions do not sum to 1, DataError for fewer than
/// three documents.
CorpusSplit split_corpus(std::span<const Document> docs, SplitFractions fractions,
                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// File formats

/// Problem found while reading a line-oriented input file.
struct LineIssue {
  std::size_t line = 0;
  std::string message;
};

struct CorpusReadResult {
  std::vector<RawDocument> documents;
  /// Pre-tokenized records (a "tokens" array) are returned here instead.
  std::vector<Document> tokenized;
  std::vector<LineIssue> issues;
};

struct ReadOptions {
  bool strict = false;  ///< first malformed line throws DataError
  YearBounds bounds{};
};

/// Reads JSON Lines records {"id": str, "year": int|null|"1230-1231",
/// "text": str} or, for already preprocessed corpora, {"id", "year",
/// "tokens": [str, ...]}. Blank lines are skipped. Malformed records are
/// reported in `issues` (or thrown under strict). Duplicate ids always
/// throw DataError.
CorpusReadResult read_corpus_jsonl(std::istream& in, const ReadOptions& options = {});
CorpusReadResult read_corpus_file(const std::string& path,
                                  const ReadOptions& options = {});

/// Reads raw or tokenized records and returns preprocessed documents.
std::vector<Document> load_documents(const std::string& path,
                                     const SubstitutionTable* substitutions = nullptr,
                                     const ReadOptions& options = {});

/// Writes {"id", "year", "tokens"} records, one per line.
void write_documents_jsonl(std::ostream& out, std::span<const Document> docs);
/// Writes {"id", "year", "text"} records, one per line.
void write_raw_jsonl(std::ostream& out, std::span<const RawDocument> docs);

/// Two-column TSV (from, to). Lines starting with '#' are comments.
SubstitutionTable read_substitutions_tsv(std::istream& in);
SubstitutionTable read_substitutions_file(const std::string& path);

}  // namespace chartdate
