#pragma once

// Text pipeline: cleaning, tokenization and mean-pooled document vectors.

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "casebook/detail/io.hpp"
#include "casebook/error.hpp"

namespace casebook {

struct RawText {
  std::string content;
  std::string source_id;
};

struct TokenizedText {
  std::vector<std::string> tokens;
  /// Distinct tokens, sorted bytewise.
  std::vector<std::string> token_set;
  std::size_t token_count = 0;

  friend bool operator==(const TokenizedText&, const TokenizedText&) = default;
};

struct DocumentVector {
  std::vector<double> values;
  std::size_t covered_tokens = 0;
  std::size_t total_tokens = 0;

  std::size_t dimension() const noexcept { return values.size(); }
  friend bool operator==(const DocumentVector&, const DocumentVector&) = default;
};

struct PipelineConfig {
  bool remove_stopwords = false;
  /// Already-cleaned stopword forms, sorted and unique.
  std::vector<std::string> stopwords;
};

/// Immutable token -> vector map. Rows are stored contiguously.
class EmbeddingTable {
 public:
  static EmbeddingTable from_entries(const std::vector<std::pair<std::string, std::vector<double>>>& entries) {
    if (entries.empty()) throw Error(Errc::EmptyFile, "no embedding entries");
    EmbeddingTable t;
    t.dimension_ = entries.front().second.size();
    if (t.dimension_ == 0) throw Error(Errc::MalformedLine, "zero-length vector", 1);
    std::size_t n = 0;
    for (const auto& [token, vec] : entries) {
      ++n;
      if (vec.size() != t.dimension_) throw Error(Errc::DimensionMismatch, "entry '" + token + "'", n);
      t.add_row(token, vec, n);
    }
    return t;
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t vocab_size() const noexcept { return index_.size(); }

  std::optional<std::span<const double>> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return std::span<const double>(data_.data() + it->second * dimension_, dimension_);
  }

  /// Euclidean norm of a stored row; nullopt for OOV tokens.
  std::optional<double> norm(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return norms_[it->second];
  }

 private:
  friend EmbeddingTable load_embeddings(const std::filesystem::path&);

  void add_row(const std::string& token, std::span<const double> vec, std::size_t line_no) {
    if (!index_.emplace(token, norms_.size()).second)
      throw Error(Errc::MalformedLine, "duplicate token '" + token + "'", line_no);
    double sq = 0.0;
    for (double v : vec) {
      data_.push_back(v);
      sq += v * v;
    }
    norms_.push_back(std::sqrt(sq));
  }

  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
  std::vector<double> norms_;
};

namespace detail {

inline icu::UnicodeString to_unicode(std::string_view utf8) {
  std::vector<UChar> buf(utf8.size() + 1);
  int32_t len = 0;
  UErrorCode status = U_ZERO_ERROR;
  u_strFromUTF8(buf.data(), static_cast<int32_t>(buf.size()), &len, utf8.data(), static_cast<int32_t>(utf8.size()),
                &status);
  if (U_FAILURE(status)) throw Error(Errc::InvalidText, "input is not valid UTF-8");
  return icu::UnicodeString(buf.data(), len);
}

inline icu::UnicodeString nfc(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(Errc::InvalidText, "NFC normalizer unavailable");
  auto out = n->normalize(s, status);
  if (U_FAILURE(status)) throw Error(Errc::InvalidText, "NFC normalization failed");
  return out;
}

inline bool is_word_char(UChar32 c) {
  switch (u_charType(c)) {
    case U_UPPERCASE_LETTER:
    case U_LOWERCASE_LETTER:
    case U_TITLECASE_LETTER:
    case U_MODIFIER_LETTER:
    case U_OTHER_LETTER:
    case U_NON_SPACING_MARK:
    case U_ENCLOSING_MARK:
    case U_COMBINING_SPACING_MARK:
    case U_DECIMAL_DIGIT_NUMBER:
    case U_LETTER_NUMBER:
    case U_OTHER_NUMBER:
      return true;
    default:
      return false;
  }
}

inline bool starts_with_at(const std::u32string& s, std::size_t i, std::u32string_view prefix) {
  return s.size() - i >= prefix.size() && std::u32string_view(s).substr(i, prefix.size()) == prefix;
}

inline std::string to_utf8(const std::u32string& s) {
  icu::UnicodeString u;
  for (char32_t c : s) u.append(static_cast<UChar32>(c));
  std::string out;
  u.toUTF8String(out);
  return out;
}

/// Lowercase, NFC, URL and mention removal, punctuation to spaces. Returns the
/// space-joined tokens (possibly empty).
inline std::vector<std::string> clean_tokens(std::string_view content) {
  auto u = nfc(to_unicode(content));
  u.toLower(icu::Locale::getRoot());
  u = nfc(u);

  std::u32string cps;
  cps.reserve(static_cast<std::size_t>(u.length()));
  for (int32_t i = 0; i < u.length(); i = u.moveIndex32(i, 1)) cps.push_back(static_cast<char32_t>(u.char32At(i)));

  // Pass 1: blank out URLs (to the next whitespace) and @-mentions.
  auto is_space = [](char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; };
  for (std::size_t i = 0; i < cps.size();) {
    bool boundary = i == 0 || !is_word_char(static_cast<UChar32>(cps[i - 1]));
    if (boundary && (starts_with_at(cps, i, U"http://") || starts_with_at(cps, i, U"https://") ||
                     starts_with_at(cps, i, U"www."))) {
      while (i < cps.size() && !is_space(cps[i])) cps[i++] = U' ';
      continue;
    }
    if (boundary && cps[i] == U'@' && i + 1 < cps.size() &&
        (is_word_char(static_cast<UChar32>(cps[i + 1])) || cps[i + 1] == U'_')) {
      cps[i++] = U' ';
      while (i < cps.size() && (is_word_char(static_cast<UChar32>(cps[i])) || cps[i] == U'_')) cps[i++] = U' ';
      continue;
    }
    ++i;
  }

  // Pass 2: everything that is not a letter, mark or number separates tokens.
  std::vector<std::string> tokens;
  std::u32string current;
  for (char32_t c : cps) {
    if (is_word_char(static_cast<UChar32>(c))) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(to_utf8(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(to_utf8(current));
  return tokens;
}

inline std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace detail

/// Builds a stopword list from raw words, cleaning each with the same rules
/// as documents. Multi-token entries contribute every token.
inline std::vector<std::string> make_stopwords(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  for (const auto& w : words)
    for (auto& t : detail::clean_tokens(w)) out.push_back(std::move(t));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// One stopword per line, UTF-8.
inline std::vector<std::string> load_stopwords(const std::filesystem::path& path) {
  auto data = detail::read_file(path);
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start <= data.size()) {
    auto end = data.find('\n', start);
    if (end == std::string::npos) end = data.size();
    words.emplace_back(data.substr(start, end - start));
    start = end + 1;
  }
  return make_stopwords(words);
}

/// Deterministic cleaning step. Throws EmptyAfterCleaning when only noise is
/// left, InvalidText on malformed UTF-8.
inline RawText preprocess(const RawText& raw, const PipelineConfig& config = {}) {
  auto tokens = detail::clean_tokens(raw.content);
  if (config.remove_stopwords && !config.stopwords.empty()) {
    std::erase_if(tokens, [&](const std::string& t) {
      return std::binary_search(config.stopwords.begin(), config.stopwords.end(), t);
    });
  }
  if (tokens.empty()) throw Error(Errc::EmptyAfterCleaning, "nothing left after cleaning '" + raw.content + "'");
  return RawText{detail::join(tokens), raw.source_id};
}

inline TokenizedText tokenize(const RawText& clean) {
  TokenizedText out;
  std::string_view s = clean.content;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    auto j = s.find(' ', i);
    if (j == std::string_view::npos) j = s.size();
    if (j > i) out.tokens.emplace_back(s.substr(i, j - i));
    i = j;
  }
  out.token_count = out.tokens.size();
  out.token_set = out.tokens;
  std::sort(out.token_set.begin(), out.token_set.end());
  out.token_set.erase(std::unique(out.token_set.begin(), out.token_set.end()), out.token_set.end());
  return out;
}

/// Reads `token v1 ... vD` lines. The first line fixes D. Blank lines are
/// skipped; line numbers in errors are 1-based physical lines.
inline EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  auto data = detail::read_file(path);
  EmbeddingTable table;
  std::vector<double> row;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto eol = data.find('\n', pos);
    if (eol == std::string::npos) eol = data.size();
    std::string_view line(data.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      auto j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) fields.push_back(line.substr(i, j - i));
      i = j;
    }
    if (fields.front().front() == '#') throw Error(Errc::MalformedLine, "comment lines are not allowed", line_no);
    if (fields.size() < 2) throw Error(Errc::MalformedLine, "token without vector", line_no);

    row.clear();
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      auto f = fields[k];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
        throw Error(Errc::MalformedLine, "bad component '" + std::string(f) + "'", line_no);
      row.push_back(v);
    }
    if (table.dimension_ == 0) table.dimension_ = row.size();
    if (row.size() != table.dimension_)
      throw Error(Errc::DimensionMismatch,
                  "expected " + std::to_string(table.dimension_) + " components, got " + std::to_string(row.size()),
                  line_no);
    table.add_row(std::string(fields.front()), row, line_no);
  }
  if (table.vocab_size() == 0) throw Error(Errc::EmptyFile, path.string());
  return table;
}

/// Mean of the embeddings of in-vocabulary token occurrences, or nullopt when
/// no token is covered.
inline std::optional<DocumentVector> try_vectorize(const TokenizedText& text, const EmbeddingTable& table) {
  DocumentVector out;
  out.values.assign(table.dimension(), 0.0);
  out.total_tokens = text.token_count;
  for (const auto& tok : text.tokens) {
    auto row = table.find(tok);
    if (!row) continue;
    ++out.covered_tokens;
    for (std::size_t d = 0; d < row->size(); ++d) out.values[d] += (*row)[d];
  }
  if (out.covered_tokens == 0) return std::nullopt;
  for (double& v : out.values) v /= static_cast<double>(out.covered_tokens);
  return out;
}

inline DocumentVector vectorize(const TokenizedText& text, const EmbeddingTable& table) {
  auto v = try_vectorize(text, table);
  if (!v) throw Error(Errc::NoCoverage, "no token has an embedding");
  return std::move(*v);
}

/// Shared preprocessing state for cases and queries: config plus an optional
/// embedding table. Immutable once built.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config = {}, std::shared_ptr<const EmbeddingTable> table = nullptr)
      : config_(std::move(config)), table_(std::move(table)) {}

  const PipelineConfig& config() const noexcept { return config_; }
  const EmbeddingTable* embeddings() const noexcept { return table_.get(); }

  RawText clean(const RawText& raw) const { return preprocess(raw, config_); }

  std::optional<DocumentVector> embed(const TokenizedText& t) const {
    if (!table_) return std::nullopt;
    return try_vectorize(t, *table_);
  }

  /// Identifies the config + table shape that derived representations depend on.
  std::string fingerprint() const {
    std::string canon = "stop=" + std::string(config_.remove_stopwords ? "1" : "0");
    for (const auto& w : config_.stopwords) canon += "," + w;
    if (table_) canon += ";emb=" + std::to_string(table_->dimension()) + "x" + std::to_string(table_->vocab_size());
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(canon)));
    return buf;
  }

 private:
  PipelineConfig config_;
  std::shared_ptr<const EmbeddingTable> table_;
};

}  // namespace casebook
