#pragma once

// Offline tweet-dump filtering. Stages run in a fixed order and every input
// line is accounted for exactly once:
//
//   malformed -> missing text -> country != ES -> duplicate -> <= 20 words
//
// Survivors are grouped by author, preserving dump order.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "casebook/detail/io.hpp"
#include "casebook/error.hpp"
#include "casebook/text.hpp"
#include "json.hpp"

namespace casebook {

inline constexpr std::size_t kMinWordsExclusive = 20;
inline constexpr std::string_view kCountry = "ES";

struct RawTweetRecord {
  std::string tweet_id;
  std::string author_id;
  std::optional<std::string> text;
  std::optional<std::string> lang;
  std::optional<std::string> country;
  std::optional<std::string> created_at;

  friend bool operator==(const RawTweetRecord&, const RawTweetRecord&) = default;
};

struct IngestStats {
  std::size_t input_records = 0;
  std::size_t malformed = 0;
  std::size_t missing_text = 0;
  std::size_t wrong_country = 0;
  std::size_t duplicate = 0;
  std::size_t too_short = 0;
  std::size_t accepted = 0;
  /// 1-based line numbers of malformed records.
  std::vector<std::size_t> malformed_lines;
  std::optional<std::string> earliest_created_at;
  std::optional<std::string> latest_created_at;

  std::size_t rejected() const noexcept { return malformed + missing_text + wrong_country + duplicate + too_short; }
};

struct ReaderCorpus {
  std::map<std::string, std::vector<RawTweetRecord>> readers;
  IngestStats stats;
};

namespace detail {

inline std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) throw Error(Errc::MalformedRecord, std::string("'") + key + "' is not a string");
  return j[key].get<std::string>();
}

inline RawTweetRecord parse_tweet(std::string_view line) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::MalformedRecord, "not a JSON object");
  RawTweetRecord r;
  auto id = optional_string(j, "tweet_id");
  auto author = optional_string(j, "author_id");
  if (!id || id->empty() || !author || author->empty())
    throw Error(Errc::MalformedRecord, "tweet_id and author_id are required");
  r.tweet_id = *id;
  r.author_id = *author;
  r.text = optional_string(j, "text");
  r.lang = optional_string(j, "lang");
  r.country = optional_string(j, "country");
  r.created_at = optional_string(j, "created_at");
  return r;
}

}  // namespace detail

inline nlohmann::json to_json_record(const RawTweetRecord& r) {
  nlohmann::json j{{"tweet_id", r.tweet_id}, {"author_id", r.author_id}};
  if (r.text) j["text"] = *r.text;
  if (r.lang) j["lang"] = *r.lang;
  if (r.country) j["country"] = *r.country;
  if (r.created_at) j["created_at"] = *r.created_at;
  return j;
}

/// Filters line-delimited JSON content. Malformed lines are counted and
/// skipped; a dump without any non-blank line is an EmptyDump.
inline ReaderCorpus filter_dump_text(std::string_view content, const PipelineConfig& pipeline = {}) {
  ReaderCorpus corpus;
  auto& st = corpus.stats;
  std::unordered_set<std::string> seen_ids;
  std::unordered_set<std::string> seen_texts;
  std::size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    auto line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    ++st.input_records;

    RawTweetRecord rec;
    try {
      rec = detail::parse_tweet(line);
      if (!seen_ids.insert(rec.tweet_id).second) throw Error(Errc::MalformedRecord, "repeated tweet_id");
    } catch (const Error&) {
      ++st.malformed;
      st.malformed_lines.push_back(line_no);
      continue;
    }
    if (rec.created_at) {
      if (!st.earliest_created_at || *rec.created_at < *st.earliest_created_at) st.earliest_created_at = rec.created_at;
      if (!st.latest_created_at || *rec.created_at > *st.latest_created_at) st.latest_created_at = rec.created_at;
    }

    // 1. missing or empty text (including text that is pure noise)
    std::optional<RawText> clean;
    if (rec.text) {
      try {
        clean = preprocess(RawText{*rec.text, rec.tweet_id}, pipeline);
      } catch (const Error&) {
        clean.reset();
      }
    }
    if (!clean) {
      ++st.missing_text;
      continue;
    }
    // 2. geography
    if (!rec.country || *rec.country != kCountry) {
      ++st.wrong_country;
      continue;
    }
    // 3. exact duplicates after cleaning; first occurrence wins
    if (!seen_texts.insert(clean->content).second) {
      ++st.duplicate;
      continue;
    }
    // 4. strictly more than 20 words
    if (tokenize(*clean).token_count <= kMinWordsExclusive) {
      ++st.too_short;
      continue;
    }
    ++st.accepted;
    corpus.readers[rec.author_id].push_back(std::move(rec));
  }
  if (st.input_records == 0) throw Error(Errc::EmptyDump, "the dump has no records");
  return corpus;
}

inline ReaderCorpus filter_dump(const std::filesystem::path& path, const PipelineConfig& pipeline = {}) {
  if (!std::filesystem::exists(path)) throw Error(Errc::Io, "no such file: " + path.string());
  return filter_dump_text(detail::read_file(path), pipeline);
}

/// Reconciled summary of a filtering run.
struct CorpusReport {
  std::size_t input_records = 0;
  std::size_t malformed = 0;
  std::size_t missing_text = 0;
  std::size_t wrong_country = 0;
  std::size_t duplicate = 0;
  std::size_t too_short = 0;
  std::size_t accepted = 0;
  std::size_t readers = 0;
  std::optional<std::string> earliest_created_at;
  std::optional<std::string> latest_created_at;

  std::size_t rejected() const noexcept { return malformed + missing_text + wrong_country + duplicate + too_short; }
  bool reconciles() const noexcept { return accepted + rejected() == input_records; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"input_records", input_records},
                     {"rejected",
                      {{"malformed", malformed},
                       {"missing_text", missing_text},
                       {"wrong_country", wrong_country},
                       {"duplicate", duplicate},
                       {"too_short", too_short}}},
                     {"rejected_total", rejected()},
                     {"accepted", accepted},
                     {"readers", readers}};
    j["earliest_created_at"] = earliest_created_at ? nlohmann::json(*earliest_created_at) : nlohmann::json(nullptr);
    j["latest_created_at"] = latest_created_at ? nlohmann::json(*latest_created_at) : nlohmann::json(nullptr);
    return j;
  }

  std::string to_table() const {
    std::ostringstream os;
    auto row = [&](std::string_view name, std::size_t v) {
      os << name;
      for (auto i = name.size(); i < 24; ++i) os << ' ';
      os << v << '\n';
    };
    row("input records", input_records);
    row("malformed", malformed);
    row("missing text", missing_text);
    row("outside ES", wrong_country);
    row("duplicate text", duplicate);
    row("<= 20 words", too_short);
    row("accepted", accepted);
    row("readers", readers);
    return os.str();
  }
};

inline CorpusReport corpus_report(const ReaderCorpus& corpus) {
  const auto& s = corpus.stats;
  CorpusReport r{s.input_records, s.malformed, s.missing_text, s.wrong_country, s.duplicate,
                 s.too_short,     s.accepted,  corpus.readers.size(), s.earliest_created_at, s.latest_created_at};
  return r;
}

inline nlohmann::json corpus_json(const ReaderCorpus& corpus) {
  nlohmann::json readers = nlohmann::json::object();
  for (const auto& [author, recs] : corpus.readers) {
    auto& arr = readers[author] = nlohmann::json::array();
    for (const auto& r : recs) arr.push_back(to_json_record(r));
  }
  return nlohmann::json{{"readers", std::move(readers)}};
}

/// Writes `corpus.json` and `corpus_stats.json` into `out_dir`.
inline void write_corpus(const std::filesystem::path& out_dir, const ReaderCorpus& corpus) {
  std::filesystem::create_directories(out_dir);
  detail::atomic_write(out_dir / "corpus.json", corpus_json(corpus).dump(2) + "\n");
  detail::atomic_write(out_dir / "corpus_stats.json", corpus_report(corpus).to_json().dump(2) + "\n");
}

}  // namespace casebook
