#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "casebook/case_memory.hpp"
#include "casebook/detail/io.hpp"
#include "casebook/engine.hpp"
#include "casebook/error.hpp"
#include "casebook/review.hpp"
#include "casebook/text.hpp"

namespace casebook {

/// Operator configuration. File format is flat `key = value` lines; `#`
/// starts a comment line. Recognized keys:
///
///   store_dir, embeddings_path, similarity.metric, threshold, top_k,
///   fallback_count, remove_stopwords, stopwords_path, listen,
///   experts = id:token, id:token, id:token
struct CliConfig {
  std::filesystem::path store_dir = "casebook-store";
  std::optional<std::filesystem::path> embeddings_path;
  std::optional<std::filesystem::path> stopwords_path;
  bool remove_stopwords = false;
  EngineConfig engine;
  std::vector<Expert> experts;
  std::string listen = "127.0.0.1:8080";

  void set(const std::string& key, const std::string& value) {
    try {
      if (key == "store_dir") {
        store_dir = value;
      } else if (key == "embeddings_path") {
        embeddings_path = value;
      } else if (key == "stopwords_path") {
        stopwords_path = value;
      } else if (key == "remove_stopwords") {
        if (value != "true" && value != "false") throw Error(Errc::InvalidConfig, "expected true or false");
        remove_stopwords = value == "true";
      } else if (key == "similarity.metric") {
        engine.metric = parse_metric(value);
      } else if (key == "threshold") {
        engine.threshold = std::stod(value);
      } else if (key == "top_k") {
        engine.top_k = std::stoul(value);
      } else if (key == "fallback_count") {
        engine.fallback_count = std::stoul(value);
      } else if (key == "listen") {
        listen = value;
      } else if (key == "experts") {
        experts = parse_experts(value);
      } else {
        throw Error(Errc::InvalidConfig, "unknown key");
      }
    } catch (const Error& e) {
      throw Error(Errc::InvalidConfig, key + ": " + e.detail());
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, key + ": bad value '" + value + "'");
    }
  }

  static std::vector<Expert> parse_experts(const std::string& value) {
    std::vector<Expert> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
      auto comma = value.find(',', pos);
      if (comma == std::string::npos) comma = value.size();
      auto item = trim(value.substr(pos, comma - pos));
      pos = comma + 1;
      if (item.empty()) continue;
      auto colon = item.find(':');
      if (colon == std::string::npos) throw Error(Errc::InvalidConfig, "expert entries are id:token");
      out.push_back(Expert{trim(item.substr(0, colon)), trim(item.substr(colon + 1))});
    }
    return out;
  }

  static CliConfig load(const std::filesystem::path& path) {
    CliConfig cfg;
    auto data = detail::read_file(path);
    std::size_t pos = 0, line_no = 0;
    while (pos < data.size()) {
      auto eol = data.find('\n', pos);
      if (eol == std::string::npos) eol = data.size();
      auto line = trim(data.substr(pos, eol - pos));
      pos = eol + 1;
      ++line_no;
      if (line.empty() || line.front() == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw Error(Errc::InvalidConfig, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    // Relative paths in the file are relative to the file.
    auto base = path.parent_path();
    auto anchor = [&](std::filesystem::path& p) {
      if (p.is_relative()) p = base / p;
    };
    anchor(cfg.store_dir);
    if (cfg.embeddings_path) anchor(*cfg.embeddings_path);
    if (cfg.stopwords_path) anchor(*cfg.stopwords_path);
    return cfg;
  }

  void validate(bool need_experts) const {
    engine.validate();
    if (needs_embeddings(engine.metric) && !embeddings_path)
      throw Error(Errc::InvalidConfig, std::string(to_string(engine.metric)) + " requires embeddings_path");
    if (remove_stopwords && !stopwords_path) throw Error(Errc::InvalidConfig, "remove_stopwords requires stopwords_path");
    if (need_experts) ExpertPanel{experts};
  }

  /// "host:port" -> (host, port)
  std::pair<std::string, int> listen_address() const {
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw Error(Errc::InvalidConfig, "listen must be host:port");
    try {
      return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, "bad port in '" + listen + "'");
    }
  }

  std::shared_ptr<const Pipeline> make_pipeline() const {
    PipelineConfig pc;
    pc.remove_stopwords = remove_stopwords;
    if (remove_stopwords && stopwords_path) pc.stopwords = load_stopwords(*stopwords_path);
    std::shared_ptr<const EmbeddingTable> table;
    if (embeddings_path) table = std::make_shared<const EmbeddingTable>(load_embeddings(*embeddings_path));
    return std::make_shared<const Pipeline>(std::move(pc), std::move(table));
  }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
};

/// Everything a running service needs, opened from one config. The review
/// journal lives next to the case journal.
struct Workspace {
  std::shared_ptr<const Pipeline> pipeline;
  std::unique_ptr<CaseStore> store;
  std::unique_ptr<ReviewBoard> board;
  std::unique_ptr<Engine> engine;

  static std::unique_ptr<Workspace> open(const CliConfig& cfg, Clock clock = system_now) {
    cfg.validate(true);
    auto ws = std::make_unique<Workspace>();
    ws->pipeline = cfg.make_pipeline();
    ws->store = CaseStore::open(cfg.store_dir, ws->pipeline, clock);
    ws->board = std::make_unique<ReviewBoard>(ExpertPanel{cfg.experts}, clock);
    ws->board->attach(cfg.store_dir / "reviews.jsonl");
    ws->engine = std::make_unique<Engine>(*ws->store, *ws->board, cfg.engine);
    return ws;
  }
};

}  // namespace casebook
