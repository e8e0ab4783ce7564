#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "casebook/detail/io.hpp"
#include "casebook/error.hpp"
#include "casebook/personality.hpp"
#include "casebook/review.hpp"
#include "casebook/text.hpp"
#include "json.hpp"

namespace casebook {

enum class Origin { Seed, Retained };

constexpr std::string_view to_string(Origin o) noexcept { return o == Origin::Seed ? "seed" : "retained"; }

struct Case {
  std::string case_id;
  std::string text;
  std::string book_title;
  PersonalityLabel personality{"INTJ"};
  Origin origin = Origin::Seed;
  Timestamp created_at;
  /// Admitting ticket; set iff origin == Retained.
  std::optional<std::string> ticket_id;

  // Derived from `text` by the store's pipeline.
  std::string clean_text;
  TokenizedText tokenized;
  std::optional<DocumentVector> vector;

  friend bool operator==(const Case&, const Case&) = default;
};

/// Immutable point-in-time view of the store.
struct StoreView {
  std::uint64_t version = 0;
  std::vector<std::shared_ptr<const Case>> cases;

  std::size_t size() const noexcept { return cases.size(); }
  bool empty() const noexcept { return cases.empty(); }
};

struct SeedRecord {
  std::string text;
  std::string book_title;
  std::string personality;
};

inline void to_json(nlohmann::json& j, const Case& c) {
  j = nlohmann::json{{"case_id", c.case_id},
                      {"text", c.text},
                      {"book_title", c.book_title},
                      {"personality", c.personality.code()},
                      {"origin", to_string(c.origin)},
                      {"created_at", format_utc(c.created_at)}};
  if (c.ticket_id) j["ticket_id"] = *c.ticket_id;
}

/// Append-only case memory. Many readers take snapshots; one writer at a
/// time mutates by publishing a new view. When attached to a directory every
/// mutation is journaled to `cases.jsonl` and committed by rewriting
/// `manifest.json` before the call returns.
class CaseStore {
 public:
  explicit CaseStore(std::shared_ptr<const Pipeline> pipeline, Clock clock = system_now)
      : pipeline_(std::move(pipeline)), clock_(std::move(clock)), view_(std::make_shared<StoreView>()) {}

  CaseStore(const CaseStore&) = delete;
  CaseStore& operator=(const CaseStore&) = delete;

  /// Restores from `dir` if it holds a manifest, otherwise starts empty;
  /// either way later mutations are journaled there.
  static std::unique_ptr<CaseStore> open(const std::filesystem::path& dir, std::shared_ptr<const Pipeline> pipeline,
                                         Clock clock = system_now) {
    std::unique_ptr<CaseStore> store;
    if (std::filesystem::exists(dir / kManifest)) {
      store = restore(dir, std::move(pipeline), std::move(clock));
      // Drop any uncommitted journal tail.
      if (std::filesystem::file_size(dir / kJournal) != store->journal_bytes_)
        detail::truncate_file(dir / kJournal, store->journal_bytes_);
    } else {
      std::filesystem::create_directories(dir);
      store = std::make_unique<CaseStore>(std::move(pipeline), std::move(clock));
      detail::atomic_write(dir / kJournal, "");
      store->write_manifest(dir, 0, 0);
    }
    store->dir_ = dir;
    return store;
  }

  static std::unique_ptr<CaseStore> restore(const std::filesystem::path& dir, std::shared_ptr<const Pipeline> pipeline,
                                            Clock clock = system_now) {
    if (!std::filesystem::exists(dir / kManifest)) throw Error(Errc::CorruptStore, "no manifest in " + dir.string());
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(detail::read_file(dir / kManifest));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::CorruptStore, std::string("manifest: ") + e.what());
    }
    auto store = std::make_unique<CaseStore>(std::move(pipeline), std::move(clock));
    std::uint64_t version = 0, count = 0, bytes = 0;
    std::string checksum;
    try {
      if (manifest.at("format").get<int>() != kFormat) throw Error(Errc::CorruptStore, "unsupported format");
      version = manifest.at("version").get<std::uint64_t>();
      count = manifest.at("case_count").get<std::uint64_t>();
      bytes = manifest.at("journal_bytes").get<std::uint64_t>();
      checksum = manifest.at("checksum").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::CorruptStore, std::string("manifest: ") + e.what());
    }
    if (!std::filesystem::exists(dir / kJournal)) throw Error(Errc::CorruptStore, "missing " + std::string(kJournal));
    auto data = detail::read_file(dir / kJournal);
    if (data.size() < bytes) throw Error(Errc::CorruptStore, "journal shorter than the committed length");
    data.resize(bytes);
    auto crc = detail::crc32_of(data);
    if (hex32(crc) != checksum) throw Error(Errc::CorruptStore, "journal checksum mismatch");

    auto next = std::make_shared<StoreView>();
    std::size_t pos = 0, line_no = 0;
    while (pos < data.size()) {
      auto eol = data.find('\n', pos);
      if (eol == std::string::npos) throw Error(Errc::CorruptStore, "unterminated journal line");
      ++line_no;
      auto line = std::string_view(data).substr(pos, eol - pos);
      pos = eol + 1;
      try {
        auto j = nlohmann::json::parse(line);
        Case c;
        c.case_id = j.at("case_id").get<std::string>();
        c.text = j.at("text").get<std::string>();
        c.book_title = j.at("book_title").get<std::string>();
        c.personality = PersonalityLabel(j.at("personality").get<std::string>());
        auto origin = j.at("origin").get<std::string>();
        if (origin != "seed" && origin != "retained") throw Error(Errc::CorruptStore, "bad origin");
        c.origin = origin == "seed" ? Origin::Seed : Origin::Retained;
        c.created_at = parse_utc(j.at("created_at").get<std::string>());
        if (j.contains("ticket_id")) c.ticket_id = j["ticket_id"].get<std::string>();
        if ((c.origin == Origin::Retained) != c.ticket_id.has_value())
          throw Error(Errc::CorruptStore, "retained cases must reference exactly one ticket");
        store->derive(c);
        store->index(c);
        next->cases.push_back(std::make_shared<const Case>(std::move(c)));
      } catch (const Error& e) {
        if (e.code() == Errc::CorruptStore) throw;
        throw Error(Errc::CorruptStore, "journal line " + std::to_string(line_no) + ": " + e.what());
      } catch (const std::exception& e) {
        throw Error(Errc::CorruptStore, "journal line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (next->cases.size() != count) throw Error(Errc::CorruptStore, "case count does not match manifest");
    next->version = version;
    store->view_ = std::move(next);
    store->journal_bytes_ = bytes;
    store->journal_crc_ = crc;
    return store;
  }

  /// Writes a complete copy of the store to `dir`.
  void persist(const std::filesystem::path& dir) const {
    std::lock_guard lock(write_mu_);
    auto view = snapshot();
    std::filesystem::create_directories(dir);
    std::string data;
    for (const auto& c : view->cases) data += journal_line(*c);
    detail::atomic_write(dir / kJournal, data);
    write_manifest(dir, view->version, view->size(), data.size(), detail::crc32_of(data));
  }

  std::shared_ptr<const StoreView> snapshot() const {
    std::lock_guard lock(view_mu_);
    return view_;
  }

  const Pipeline& pipeline() const noexcept { return *pipeline_; }
  std::shared_ptr<const Pipeline> pipeline_ptr() const noexcept { return pipeline_; }
  const std::filesystem::path& directory() const noexcept { return dir_; }

  /// Seed file: JSON array of {text, book_title, personality}.
  std::size_t import_seed(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(detail::read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaError, std::string("seed file is not JSON: ") + e.what());
    }
    return import_seed_json(doc);
  }

  std::size_t import_seed_json(const nlohmann::json& doc) {
    if (!doc.is_array()) throw Error(Errc::SchemaError, "seed document must be a JSON array");
    std::vector<SeedRecord> records;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto& r = doc[i];
      if (!r.is_object()) throw Error(Errc::SchemaError, "record is not an object", i);
      SeedRecord rec;
      for (auto [key, field] : {std::pair{"text", &rec.text}, std::pair{"book_title", &rec.book_title},
                                std::pair{"personality", &rec.personality}}) {
        if (!r.contains(key)) throw Error(Errc::SchemaError, std::string("missing key '") + key + "'", i);
        if (!r[key].is_string()) throw Error(Errc::SchemaError, std::string("'") + key + "' must be a string", i);
        *field = r[key].get<std::string>();
      }
      records.push_back(std::move(rec));
    }
    return import_records(records);
  }

  /// All-or-nothing: every record is validated before any is added.
  std::size_t import_records(const std::vector<SeedRecord>& records) {
    std::lock_guard lock(write_mu_);
    if (records.empty()) return 0;
    auto now = clock_();
    auto current = snapshot();
    std::vector<Case> fresh;
    std::unordered_set<std::string> batch_keys;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (r.text.empty()) throw Error(Errc::SchemaError, "empty 'text'", i);
      if (r.book_title.empty()) throw Error(Errc::SchemaError, "empty 'book_title'", i);
      if (!PersonalityLabel::is_valid(r.personality))
        throw Error(Errc::InvalidPersonality, "'" + r.personality + "' is not an MBTI code", i);
      Case c;
      c.case_id = make_case_id(current->size() + fresh.size() + 1);
      c.text = r.text;
      c.book_title = r.book_title;
      c.personality = PersonalityLabel(r.personality);
      c.origin = Origin::Seed;
      c.created_at = now;
      try {
        derive(c);
      } catch (const Error& e) {
        throw Error(e.code(), e.detail(), i);
      }
      auto key = dedup_key(c);
      if (keys_.count(key) || !batch_keys.insert(key).second)
        throw Error(Errc::DuplicateRecord, "duplicate (text, book_title)", i);
      fresh.push_back(std::move(c));
    }
    commit(std::move(fresh));
    return records.size();
  }

  /// Appends the ticket's candidate as a Retained case. The ticket must be
  /// Accepted and not already retained.
  Case retain(const ReviewTicket& ticket) {
    std::lock_guard lock(write_mu_);
    if (ticket.state != TicketState::Accepted)
      throw Error(Errc::NotAccepted, ticket.ticket_id + " is " + std::string(to_string(ticket.state)));
    if (consumed_tickets_.count(ticket.ticket_id))
      throw Error(Errc::NotAccepted, ticket.ticket_id + " was already retained");
    auto current = snapshot();
    Case c;
    c.case_id = make_case_id(current->size() + 1);
    c.text = ticket.candidate.tweet_text;
    c.book_title = ticket.candidate.book_title;
    c.personality = ticket.candidate.personality;
    c.origin = Origin::Retained;
    c.created_at = clock_();
    c.ticket_id = ticket.ticket_id;
    derive(c);
    if (keys_.count(dedup_key(c))) throw Error(Errc::DuplicateRecord, "case already stored");
    commit({c});
    return c;
  }

  /// True if a case with the same cleaned text and book title is stored.
  bool contains(const std::string& clean_text, const std::string& book_title) const {
    std::lock_guard lock(write_mu_);
    return keys_.count(clean_text + '\x1f' + book_title) > 0;
  }

  /// Swaps the pipeline and re-derives every case's representations.
  void reconfigure(std::shared_ptr<const Pipeline> pipeline) {
    std::lock_guard lock(write_mu_);
    pipeline_ = std::move(pipeline);
    auto current = snapshot();
    auto next = std::make_shared<StoreView>();
    keys_.clear();
    for (const auto& old : current->cases) {
      Case c = *old;
      derive(c);
      index(c);
      next->cases.push_back(std::make_shared<const Case>(std::move(c)));
    }
    next->version = current->version + 1;
    if (!dir_.empty()) write_manifest(dir_, next->version, next->size(), journal_bytes_, journal_crc_);
    publish(std::move(next));
  }

 private:
  static constexpr int kFormat = 1;
  static constexpr const char* kJournal = "cases.jsonl";
  static constexpr const char* kManifest = "manifest.json";

  static std::string make_case_id(std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "c-%06zu", n);
    return buf;
  }

  static std::string hex32(std::uint32_t v) {
    char buf[12];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
  }

  static std::string dedup_key(const Case& c) { return c.clean_text + '\x1f' + c.book_title; }

  static std::string journal_line(const Case& c) {
    nlohmann::json j = c;
    return j.dump() + "\n";
  }

  void derive(Case& c) const {
    auto clean = pipeline_->clean(RawText{c.text, c.case_id});
    c.clean_text = clean.content;
    c.tokenized = tokenize(clean);
    c.vector = pipeline_->embed(c.tokenized);
  }

  void index(const Case& c) {
    keys_.insert(dedup_key(c));
    if (c.ticket_id) consumed_tickets_.insert(*c.ticket_id);
  }

  void write_manifest(const std::filesystem::path& dir, std::uint64_t version, std::size_t count,
                      std::uint64_t bytes = 0, std::uint32_t crc = 0) const {
    nlohmann::ordered_json m{{"format", kFormat},
                             {"version", version},
                             {"case_count", count},
                             {"journal_bytes", bytes},
                             {"checksum", hex32(crc)},
                             {"pipeline", pipeline_->fingerprint()}};
    detail::atomic_write(dir / kManifest, m.dump(2) + "\n");
  }

  void commit(std::vector<Case> fresh) {
    auto current = snapshot();
    auto next = std::make_shared<StoreView>(*current);
    next->version = current->version + 1;
    std::string lines;
    for (const auto& c : fresh) lines += journal_line(c);
    if (!dir_.empty()) {
      detail::durable_append(dir_ / kJournal, lines);
      auto crc = static_cast<std::uint32_t>(
          ::crc32(journal_crc_, reinterpret_cast<const Bytef*>(lines.data()), static_cast<uInt>(lines.size())));
      write_manifest(dir_, next->version, next->size() + fresh.size(), journal_bytes_ + lines.size(), crc);
      journal_crc_ = crc;
    } else {
      journal_crc_ = static_cast<std::uint32_t>(
          ::crc32(journal_crc_, reinterpret_cast<const Bytef*>(lines.data()), static_cast<uInt>(lines.size())));
    }
    journal_bytes_ += lines.size();
    for (auto& c : fresh) {
      index(c);
      next->cases.push_back(std::make_shared<const Case>(std::move(c)));
    }
    publish(std::move(next));
  }

  void publish(std::shared_ptr<const StoreView> next) {
    std::lock_guard lock(view_mu_);
    view_ = std::move(next);
  }

  std::shared_ptr<const Pipeline> pipeline_;
  Clock clock_;
  std::filesystem::path dir_;

  mutable std::mutex write_mu_;
  mutable std::mutex view_mu_;
  std::shared_ptr<const StoreView> view_;

  // Writer-side indexes.
  std::unordered_set<std::string> keys_;
  std::unordered_set<std::string> consumed_tickets_;
  std::uint64_t journal_bytes_ = 0;
  std::uint32_t journal_crc_ = static_cast<std::uint32_t>(::crc32(0L, Z_NULL, 0));
};

}  // namespace casebook
