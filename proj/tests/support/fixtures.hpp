#pragma once

// Shared test helpers: temp directories, a deterministic clock, generated
// case bases, and brute-force oracles that deliberately avoid the library's
// own similarity code paths.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "casebook/casebook.hpp"

namespace casebook::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("casebook-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

/// Advances one millisecond per call from a fixed epoch.
inline Clock fake_clock() {
  auto t = std::make_shared<std::atomic<long long>>(1648771200000LL);  // 2022-04-01T00:00:00Z
  return [t] { return Timestamp(std::chrono::milliseconds((*t)++)); };
}

inline ExpertPanel test_panel() {
  return ExpertPanel{{{"ana", "tok-ana"}, {"bruno", "tok-bruno"}, {"carla", "tok-carla"}}};
}

inline const std::vector<std::string>& mbti_codes() {
  static const std::vector<std::string> codes = [] {
    std::vector<std::string> out;
    for (char a : {'I', 'E'})
      for (char b : {'N', 'S'})
        for (char c : {'T', 'F'})
          for (char d : {'J', 'P'}) out.push_back(std::string{a, b, c, d});
    return out;
  }();
  return codes;
}

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words{
      "amor",    "libro",   "noche",  "mar",     "ciudad",  "sueño",   "camino",  "tiempo",  "luz",     "sombra",
      "guerra",  "paz",     "casa",   "familia", "viaje",   "miedo",   "alegría", "tristeza", "madre",  "padre",
      "río",     "montaña", "verano", "invierno", "secreto", "verdad",  "mentira", "corazón", "fuego",   "agua",
      "tierra",  "cielo",   "estrella", "palabra", "silencio", "memoria", "olvido", "destino", "libertad", "muerte",
      "vida",    "jardín",  "puerta", "ventana", "carta",   "reloj",   "espejo",  "bosque",  "isla",    "puerto"};
  return words;
}

/// Random word sequence over the shared vocabulary (with repeats).
inline std::string random_text(std::mt19937& rng, std::size_t min_words, std::size_t max_words) {
  std::uniform_int_distribution<std::size_t> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, vocabulary().size() - 1);
  std::string out;
  auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += vocabulary()[pick(rng)];
  }
  return out;
}

/// `n` distinct seed records over a small vocabulary, so score ties occur.
inline std::vector<SeedRecord> generate_seed(std::mt19937& rng, std::size_t n, std::size_t min_words = 3,
                                             std::size_t max_words = 10) {
  std::vector<SeedRecord> out;
  std::set<std::string> seen;
  std::uniform_int_distribution<std::size_t> mbti(0, 15);
  while (out.size() < n) {
    auto text = random_text(rng, min_words, max_words);
    if (!seen.insert(text).second) continue;
    out.push_back(SeedRecord{text, "Libro " + std::to_string(out.size() % 40), mbti_codes()[mbti(rng)]});
  }
  return out;
}

inline nlohmann::json seed_json(const std::vector<SeedRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records)
    arr.push_back({{"text", r.text}, {"book_title", r.book_title}, {"personality", r.personality}});
  return arr;
}

/// Word sets by plain whitespace splitting of already-clean text.
inline std::set<std::string> word_set(const std::string& clean) {
  std::set<std::string> out;
  std::string cur;
  for (char c : clean) {
    if (c == ' ') {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

/// Jaccard by explicit enumeration of intersection and union.
inline double jaccard_oracle(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::vector<std::string> inter, uni;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

struct OracleHit {
  std::string case_id;
  double score;
};

/// Full scan + full sort under (score desc, case_id asc).
inline std::vector<OracleHit> brute_force_jaccard_ranking(const std::string& query_clean, const StoreView& view) {
  auto q = word_set(query_clean);
  std::vector<OracleHit> hits;
  for (const auto& c : view.cases) hits.push_back({c->case_id, jaccard_oracle(q, word_set(c->clean_text))});
  std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) {
    return a.score != b.score ? a.score > b.score : a.case_id < b.case_id;
  });
  return hits;
}

/// A line-delimited dump whose composition is known by construction.
struct PlantedDump {
  std::string content;
  std::size_t input = 0, malformed = 0, missing_text = 0, wrong_country = 0, duplicate = 0, too_short = 0, accepted = 0;
  /// Accepted tweet ids per author, in dump order.
  std::map<std::string, std::vector<std::string>> accepted_ids;
};

/// `n` words: a unique marker followed by vocabulary words.
inline std::string words_with_marker(std::mt19937& rng, const std::string& marker, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, vocabulary().size() - 1);
  std::string out = marker;
  for (std::size_t i = 1; i < n; ++i) out += " " + vocabulary()[pick(rng)];
  return out;
}

inline PlantedDump planted_dump(unsigned seed = 1) {
  std::mt19937 rng(seed);
  PlantedDump d;
  int next_id = 0;
  std::vector<std::string> accepted_texts;
  auto line = [&](nlohmann::json j) {
    d.content += j.dump() + "\n";
    ++d.input;
  };
  auto author = [&] { return "lector" + std::to_string(next_id % 5); };
  auto record = [&](std::optional<std::string> text, std::optional<std::string> country) {
    nlohmann::json j{{"tweet_id", "tw" + std::to_string(++next_id)}, {"author_id", author()},
                     {"lang", "es"},
                     {"created_at", "2022-03-" + std::string(next_id % 28 < 9 ? "0" : "") +
                                        std::to_string(next_id % 28 + 1) + "T10:00:00Z"}};
    if (text) j["text"] = *text;
    if (country) j["country"] = *country;
    return j;
  };
  auto marker = [&] { return "m" + std::to_string(next_id + 1); };

  // 40 accepted: 20 at exactly 21 words, 20 longer.
  for (int i = 0; i < 40; ++i) {
    auto text = words_with_marker(rng, marker(), i < 20 ? 21 : 22 + static_cast<std::size_t>(i % 9));
    auto j = record(text, "ES");
    d.accepted_ids[j["author_id"]].push_back(j["tweet_id"]);
    accepted_texts.push_back(text);
    line(j);
    ++d.accepted;
  }
  // 12 duplicates that differ only in case and punctuation.
  for (int i = 0; i < 12; ++i) {
    std::string text = accepted_texts[static_cast<std::size_t>(i * 3)];
    for (auto& c : text)
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    line(record("¡" + text + "!!", "ES"));
    ++d.duplicate;
  }
  // 20 too short: 10 at exactly 20 words, 10 much shorter.
  for (int i = 0; i < 20; ++i) {
    line(record(words_with_marker(rng, marker(), i < 10 ? 20 : 5), "ES"));
    ++d.too_short;
  }
  // 10 missing text: absent, empty, or noise only.
  for (int i = 0; i < 10; ++i) {
    std::optional<std::string> text;
    if (i >= 4) text = i < 7 ? "" : "@alguien https://t.co/x !!!";
    line(record(text, "ES"));
    ++d.missing_text;
  }
  // 15 outside ES: other country, missing country, wrong case.
  for (int i = 0; i < 15; ++i) {
    std::optional<std::string> country;
    if (i < 8) country = "FR";
    if (i >= 12) country = "es";
    line(record(words_with_marker(rng, marker(), 25), country));
    ++d.wrong_country;
  }
  // 3 malformed: not JSON, no tweet_id, repeated tweet_id.
  d.content += "{not json\n";
  ++d.input;
  line({{"author_id", "lector0"}, {"text", "sin identificador"}, {"country", "ES"}});
  line({{"tweet_id", "tw1"}, {"author_id", "lector0"}, {"text", "repetido"}, {"country", "ES"}});
  d.malformed = 3;
  return d;
}

}  // namespace casebook::testing
