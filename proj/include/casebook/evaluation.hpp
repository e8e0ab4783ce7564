#pragma once

// Side-by-side metric comparison over labelled text pairs, with wall-clock
// timing per pair.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "casebook/error.hpp"
#include "casebook/similarity.hpp"
#include "casebook/text.hpp"
#include "json.hpp"

namespace casebook {

struct TextPair {
  std::string text_a;
  std::string text_b;
  std::string label;  // "same" or "paraphrase"
};

struct EvalRow {
  std::size_t pair_index = 0;
  std::string label;
  Metric metric = Metric::Jaccard;
  std::optional<double> similarity;
  std::optional<std::string> error;
  double millis = 0.0;
};

inline std::vector<TextPair> parse_pairs(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error(Errc::SchemaError, "pairs file must be a JSON array");
  std::vector<TextPair> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& p = doc[i];
    if (!p.is_object()) throw Error(Errc::SchemaError, "pair is not an object", i);
    TextPair tp;
    for (auto [key, field] : {std::pair{"text_a", &tp.text_a}, std::pair{"text_b", &tp.text_b},
                              std::pair{"label", &tp.label}}) {
      if (!p.contains(key) || !p[key].is_string())
        throw Error(Errc::SchemaError, std::string("missing string '") + key + "'", i);
      *field = p[key].get<std::string>();
    }
    if (tp.label != "same" && tp.label != "paraphrase")
      throw Error(Errc::SchemaError, "label must be 'same' or 'paraphrase'", i);
    out.push_back(std::move(tp));
  }
  return out;
}

inline std::vector<TextPair> load_pairs(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaError, std::string("pairs file is not JSON: ") + e.what());
  }
  return parse_pairs(doc);
}

/// Similarity of one pair under one metric, from raw text. Cosine works on
/// mean-pooled vectors, soft cosine on term counts.
inline double pair_similarity(const TextPair& pair, Metric metric, const Pipeline& pipeline) {
  auto a = tokenize(pipeline.clean(RawText{pair.text_a, "a"}));
  auto b = tokenize(pipeline.clean(RawText{pair.text_b, "b"}));
  switch (metric) {
    case Metric::Jaccard:
      return jaccard(a, b).value();
    case Metric::Cosine: {
      const auto* table = pipeline.embeddings();
      if (!table) throw Error(Errc::MetricUnavailable, "cosine needs embeddings");
      return cosine(vectorize(a, *table), vectorize(b, *table)).value();
    }
    case Metric::SoftCosine: {
      const auto* table = pipeline.embeddings();
      if (!table) throw Error(Errc::MetricUnavailable, "soft cosine needs embeddings");
      return soft_cosine(a, b, *table).value();
    }
  }
  return 0.0;
}

/// Runs every pair under every metric in `metrics`. Per-pair failures are
/// reported in the row rather than aborting the run.
inline std::vector<EvalRow> evaluate_pairs(const std::vector<TextPair>& pairs, const std::vector<Metric>& metrics,
                                           const Pipeline& pipeline) {
  std::vector<EvalRow> rows;
  for (auto metric : metrics) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      EvalRow row;
      row.pair_index = i;
      row.label = pairs[i].label;
      row.metric = metric;
      auto start = std::chrono::steady_clock::now();
      try {
        row.similarity = pair_similarity(pairs[i], metric, pipeline);
      } catch (const Error& e) {
        row.error = std::string(to_string(e.code()));
      }
      row.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// One table per metric: Type of text | Similarity | Time(ms).
inline std::string render_eval_tables(const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  std::optional<Metric> current;
  char buf[160];
  for (const auto& r : rows) {
    if (!current || *current != r.metric) {
      if (current) os << '\n';
      current = r.metric;
      os << "metric: " << to_string(r.metric) << '\n';
      std::snprintf(buf, sizeof buf, "%-6s %-16s %-12s %s\n", "pair", "Type of text", "Similarity", "Time(ms)");
      os << buf;
    }
    std::string type = r.label == "same" ? "Same text" : "Different text";
    std::string sim = "error:" + r.error.value_or("?");
    if (r.similarity) {
      std::snprintf(buf, sizeof buf, "%.8f", *r.similarity);
      sim = buf;
    }
    std::snprintf(buf, sizeof buf, "%-6zu %-16s %-12s %.4f\n", r.pair_index, type.c_str(), sim.c_str(), r.millis);
    os << buf;
  }
  return os.str();
}

inline nlohmann::json eval_json(const std::vector<EvalRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{"pair", r.pair_index}, {"label", r.label}, {"metric", to_string(r.metric)}, {"millis", r.millis}};
    j["similarity"] = r.similarity ? nlohmann::json(std::round(*r.similarity * 1e8) / 1e8) : nlohmann::json(nullptr);
    if (r.error) j["error"] = *r.error;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace casebook
