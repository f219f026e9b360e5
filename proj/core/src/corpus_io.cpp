#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "chartdate/corpus.hpp"
#include "chartdate/error.hpp"

namespace chartdate {

namespace {

using nlohmann::json;

std::optional<int> year_from_json(const json& value) {
  if (value.is_null()) return std::nullopt;
  if (value.is_number_integer()) return value.get<int>();
  if (value.is_string()) {
    auto year = parse_year(value.get_ref<const std::string&>());
    if (!year) throw DataError("unparseable year '" + value.get<std::string>() + "'");
    return year;
  }
  throw DataError("year must be an integer, a year-range string or null");
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

CorpusReadResult read_corpus_jsonl(std::istream& in, const ReadOptions& options) {
  CorpusReadResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::optional<RawDocument> raw;
    std::optional<Document> tokenized;
    try {
      const json record = json::parse(line);
      if (!record.is_object()) throw DataError("record is not a JSON object");
      if (!record.contains("id") || !record["id"].is_string())
        throw DataError("missing string field 'id'");
      std::string id = record["id"].get<std::string>();
      std::optional<int> year;
      if (record.contains("year")) year = year_from_json(record["year"]);
      if (year && (*year < options.bounds.min || *year > options.bounds.max))
        throw DataError("year " + std::to_string(*year) + " outside [" +
                        std::to_string(options.bounds.min) + ", " +
                        std::to_string(options.bounds.max) + "]");
      if (record.contains("tokens")) {
        const json& tokens = record["tokens"];
        if (!tokens.is_array()) throw DataError("'tokens' must be an array");
        Document doc{std::move(id), year, {}};
        for (const auto& t : tokens) {
          if (!t.is_string() || t.get_ref<const std::string&>().empty())
            throw DataError("tokens must be nonempty strings");
          doc.tokens.push_back(t.get<std::string>());
        }
        tokenized = std::move(doc);
      } else {
        if (!record.contains("text") || !record["text"].is_string())
          throw DataError("missing string field 'text'");
        raw = RawDocument{std::move(id), year, record["text"].get<std::string>()};
      }
    } catch (const std::exception& e) {
      if (options.strict)
        throw DataError("line " + std::to_string(line_no) + ": " + e.what());
      result.issues.push_back({line_no, e.what()});
      continue;
    }

    const std::string& id = raw ? raw->id : tokenized->id;
    if (!seen.insert(id).second)
      throw DataError("duplicate document id '" + id + "' on line " + std::to_string(line_no));
    if (raw)
      result.documents.push_back(std::move(*raw));
    else
      result.tokenized.push_back(std::move(*tokenized));
  }
  return result;
}

CorpusReadResult read_corpus_file(const std::string& path, const ReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  return read_corpus_jsonl(in, options);
}

std::vector<Document> load_documents(const std::string& path,
                                     const SubstitutionTable* substitutions,
                                     const ReadOptions& options) {
  CorpusReadResult read = read_corpus_file(path, options);
  std::vector<Document> docs = std::move(read.tokenized);
  docs.reserve(docs.size() + read.documents.size());
  for (const auto& raw : read.documents) docs.push_back(preprocess(raw, substitutions));
  return docs;
}

void write_documents_jsonl(std::ostream& out, std::span<const Document> docs) {
  for (const auto& doc : docs) {
    json record;
    record["id"] = doc.id;
    record["year"] = doc.year ? json(*doc.year) : json(nullptr);
    record["tokens"] = doc.tokens;
    out << record.dump() << '\n';
  }
}

void write_raw_jsonl(std::ostream& out, std::span<const RawDocument> docs) {
  for (const auto& doc : docs) {
    json record;
    record["id"] = doc.id;
    record["year"] = doc.year ? json(*doc.year) : json(nullptr);
    record["text"] = doc.text;
    out << record.dump() << '\n';
  }
}

SubstitutionTable read_substitutions_tsv(std::istream& in) {
  SubstitutionTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line) || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw DataError("substitution table line " + std::to_string(line_no) +
                      ": expected exactly two tab-separated columns");
    std::string from = line.substr(0, tab);
    std::string to = line.substr(tab + 1);
    if (from.empty()) throw DataError("substitution table line " + std::to_string(line_no) + ": empty source token");
    if (to.find_first_of(" \t") != std::string::npos)
      throw DataError("substitution table line " + std::to_string(line_no) + ": replacement contains whitespace");
    table[std::move(from)] = std::move(to);
  }
  return table;
}

SubstitutionTable read_substitutions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open substitution table '" + path + "'");
  return read_substitutions_tsv(in);
}

}  // namespace chartdate
