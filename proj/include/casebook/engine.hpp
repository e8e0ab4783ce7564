#pragma once

// Retrieve -> Reuse -> (Revise, Retain) over a case store snapshot.

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "casebook/case_memory.hpp"
#include "casebook/error.hpp"
#include "casebook/review.hpp"
#include "casebook/similarity.hpp"
#include "casebook/text.hpp"
#include "json.hpp"

namespace casebook {

inline constexpr std::string_view kHighConfidenceMessage = "Reliability of the recommendation: +50%";
inline constexpr std::string_view kLowConfidenceMessage = "Recommendation reliability: -50%";

struct EngineConfig {
  Metric metric = Metric::Jaccard;
  double threshold = 0.50;
  std::size_t top_k = 5;
  std::size_t fallback_count = 2;

  void validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error(Errc::InvalidConfig, "threshold must lie in (0, 1)");
    if (top_k == 0) throw Error(Errc::InvalidConfig, "top_k must be positive");
    if (fallback_count == 0) throw Error(Errc::InvalidConfig, "fallback_count must be positive");
    if (fallback_count > top_k) throw Error(Errc::InvalidConfig, "fallback_count must not exceed top_k");
  }
};

struct QueryText {
  RawText raw;
  RawText clean;
  TokenizedText tokenized;
  std::optional<DocumentVector> vector;
};

inline QueryText make_query(const RawText& raw, const Pipeline& pipeline) {
  QueryText q;
  q.raw = raw;
  q.clean = pipeline.clean(raw);
  q.tokenized = tokenize(q.clean);
  q.vector = pipeline.embed(q.tokenized);
  return q;
}

struct RankedCase {
  std::string case_id;
  std::string book_title;
  PersonalityLabel personality;
  SimilarityScore score;
};

struct RetrievalResult {
  std::vector<RankedCase> ranked;
  QueryText query;
  /// Metric actually used; differs from the configured one after a fallback.
  Metric metric = Metric::Jaccard;
  bool metric_fallback = false;
  /// Cases skipped because they lack a document vector (cosine only).
  std::size_t unscored_cases = 0;
  std::uint64_t store_version = 0;
};

/// Descending score, then ascending case_id.
inline bool ranks_before(const RankedCase& a, const RankedCase& b) {
  if (a.score.value() != b.score.value()) return a.score.value() > b.score.value();
  return a.case_id < b.case_id;
}

namespace detail {

inline std::vector<RankedCase> score_all(const QueryText& query, const StoreView& view, Metric metric,
                                         const EmbeddingTable* table, std::size_t& unscored) {
  std::vector<RankedCase> out;
  out.reserve(view.size());
  unscored = 0;
  for (const auto& c : view.cases) {
    std::optional<SimilarityScore> s;
    switch (metric) {
      case Metric::Jaccard:
        s = jaccard(query.tokenized, c->tokenized);
        break;
      case Metric::Cosine:
        if (c->vector) s = cosine(*query.vector, *c->vector);
        break;
      case Metric::SoftCosine:
        s = soft_cosine(query.tokenized, c->tokenized, *table);
        break;
    }
    if (!s) {
      ++unscored;
      continue;
    }
    out.push_back(RankedCase{c->case_id, c->book_title, c->personality, *s});
  }
  return out;
}

}  // namespace detail

/// Scores every case with the configured metric and returns the top_k.
/// Cosine falls back to Jaccard (flagged) when the query has no embedding
/// coverage or no stored case has a vector.
inline RetrievalResult retrieve(const QueryText& query, const StoreView& view, const EngineConfig& config,
                                const EmbeddingTable* table = nullptr) {
  if (view.empty()) throw Error(Errc::EmptyCaseBase, "the case base is empty");
  if (needs_embeddings(config.metric) && table == nullptr)
    throw Error(Errc::MetricUnavailable, std::string(to_string(config.metric)) + " needs an embedding table");

  RetrievalResult r;
  r.query = query;
  r.store_version = view.version;
  r.metric = config.metric;
  if (config.metric == Metric::Cosine && !query.vector) {
    r.metric = Metric::Jaccard;
    r.metric_fallback = true;
  }
  r.ranked = detail::score_all(query, view, r.metric, table, r.unscored_cases);
  if (r.ranked.empty()) {
    r.metric = Metric::Jaccard;
    r.metric_fallback = true;
    r.ranked = detail::score_all(query, view, r.metric, table, r.unscored_cases);
  }
  auto k = std::min(config.top_k, r.ranked.size());
  std::partial_sort(r.ranked.begin(), r.ranked.begin() + static_cast<std::ptrdiff_t>(k), r.ranked.end(),
                    ranks_before);
  r.ranked.erase(r.ranked.begin() + static_cast<std::ptrdiff_t>(k), r.ranked.end());
  return r;
}

enum class Confidence { High, Low };

constexpr std::string_view to_string(Confidence c) noexcept {
  return c == Confidence::High ? "HighConfidence" : "LowConfidence";
}

struct Pick {
  std::string case_id;
  std::string book_title;
  PersonalityLabel personality;
  double score = 0.0;
};

struct Recommendation {
  Confidence kind = Confidence::Low;
  std::vector<Pick> picks;
  std::string reliability_message;
  bool eligible_for_retention = false;
  Metric metric = Metric::Jaccard;
  bool metric_fallback = false;
};

/// Threshold gate: one pick when the best score strictly exceeds the
/// threshold, otherwise the top fallback_count picks.
inline Recommendation reuse(const RetrievalResult& result, const EngineConfig& config) {
  if (result.ranked.empty()) throw Error(Errc::EmptyCaseBase, "nothing was retrieved");
  Recommendation rec;
  rec.metric = result.metric;
  rec.metric_fallback = result.metric_fallback;
  auto to_pick = [](const RankedCase& r) { return Pick{r.case_id, r.book_title, r.personality, r.score.value()}; };
  if (result.ranked.front().score.value() > config.threshold) {
    rec.kind = Confidence::High;
    rec.picks.push_back(to_pick(result.ranked.front()));
    rec.reliability_message = kHighConfidenceMessage;
    rec.eligible_for_retention = true;
  } else {
    rec.kind = Confidence::Low;
    auto n = std::min(config.fallback_count, result.ranked.size());
    for (std::size_t i = 0; i < n; ++i) rec.picks.push_back(to_pick(result.ranked[i]));
    rec.reliability_message = kLowConfidenceMessage;
  }
  return rec;
}

/// What happened to the retention candidate of a high-confidence answer.
enum class TicketStatus { None, Opened, AlreadyPending, AlreadyStored };

constexpr std::string_view to_string(TicketStatus s) noexcept {
  switch (s) {
    case TicketStatus::None: return "none";
    case TicketStatus::Opened: return "opened";
    case TicketStatus::AlreadyPending: return "already_pending";
    case TicketStatus::AlreadyStored: return "already_stored";
  }
  return "none";
}

struct SolveOutcome {
  Recommendation recommendation;
  std::optional<ReviewTicket> ticket;
  TicketStatus ticket_status = TicketStatus::None;
};

/// Rounds to 8 decimals for serialization.
inline double round8(double v) { return std::round(v * 1e8) / 1e8; }

inline nlohmann::json to_json(const Recommendation& rec, const std::optional<ReviewTicket>& ticket = std::nullopt) {
  nlohmann::json picks = nlohmann::json::array();
  for (const auto& p : rec.picks)
    picks.push_back({{"case_id", p.case_id},
                     {"book_title", p.book_title},
                     {"personality", p.personality.code()},
                     {"score", round8(p.score)}});
  nlohmann::json j{{"kind", to_string(rec.kind)},
                   {"picks", std::move(picks)},
                   {"reliability_message", rec.reliability_message},
                   {"eligible_for_retention", rec.eligible_for_retention},
                   {"metric", to_string(rec.metric)},
                   {"metric_fallback", rec.metric_fallback}};
  if (ticket) j["ticket_id"] = ticket->ticket_id;
  return j;
}

/// Wires a pipeline, a case store and a review board into the full cycle.
/// Accepted tickets are retained into the store.
class Engine {
 public:
  Engine(CaseStore& store, ReviewBoard& board, EngineConfig config = {})
      : store_(store), board_(board), config_(config) {
    config_.validate();
    if (needs_embeddings(config_.metric) && store_.pipeline().embeddings() == nullptr)
      throw Error(Errc::InvalidConfig, std::string(to_string(config_.metric)) + " requires an embeddings file");
    board_.set_retain_hook([this](const ReviewTicket& t) { return store_.retain(t).case_id; });
  }

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const noexcept { return config_; }
  CaseStore& store() noexcept { return store_; }
  ReviewBoard& board() noexcept { return board_; }

  RetrievalResult retrieve_text(const RawText& raw) const {
    auto query = make_query(raw, store_.pipeline());
    auto view = store_.snapshot();
    return retrieve(query, *view, config_, store_.pipeline().embeddings());
  }

  /// Retrieve + reuse only; never opens a ticket.
  Recommendation recommend(const RawText& raw) const { return reuse(retrieve_text(raw), config_); }

  /// Full cycle. A high-confidence answer opens a Pending review ticket unless
  /// the same (text, book) is already stored or already awaiting review.
  SolveOutcome solve(const RawText& raw) {
    auto result = retrieve_text(raw);
    SolveOutcome out;
    out.recommendation = reuse(result, config_);
    if (!out.recommendation.eligible_for_retention) return out;

    const auto& best = out.recommendation.picks.front();
    std::lock_guard lock(mu_);
    if (store_.contains(result.query.clean.content, best.book_title)) {
      out.ticket_status = TicketStatus::AlreadyStored;
      return out;
    }
    const auto& pipeline = store_.pipeline();
    auto pending = board_.find_pending([&](const ReviewTicket& t) {
      return t.candidate.book_title == best.book_title &&
             pipeline.clean(RawText{t.candidate.tweet_text, t.ticket_id}).content == result.query.clean.content;
    });
    if (pending) {
      out.ticket = std::move(pending);
      out.ticket_status = TicketStatus::AlreadyPending;
      return out;
    }
    out.ticket = board_.open(Candidate{raw.content, best.book_title, best.personality, best.score, best.case_id});
    out.ticket_status = TicketStatus::Opened;
    return out;
  }

  /// Serialized with ticket creation so a candidate cannot be retained twice.
  ReviewTicket vote(const std::string& ticket_id, const Vote& vote) {
    std::lock_guard lock(mu_);
    return board_.cast_vote(ticket_id, vote);
  }

 private:
  CaseStore& store_;
  ReviewBoard& board_;
  EngineConfig config_;
  std::mutex mu_;
};

}  // namespace casebook
