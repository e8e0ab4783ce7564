#pragma once

// Expert review of retention candidates. Three experts vote on each ticket;
// the multiset of decisions fixes the outcome:
//
//   3 approvals -> Accepted (the retain hook runs)
//   2 approvals -> RejectedWithJustification (dissent must be justified)
//   0-1         -> RejectedSingleApproval

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "casebook/detail/io.hpp"
#include "casebook/error.hpp"
#include "casebook/personality.hpp"
#include "json.hpp"

namespace casebook {

enum class Decision { Approve, Reject };

enum class TicketState { Pending, Accepted, RejectedSingleApproval, RejectedWithJustification };

constexpr std::string_view to_string(Decision d) noexcept { return d == Decision::Approve ? "approve" : "reject"; }

constexpr std::string_view to_string(TicketState s) noexcept {
  switch (s) {
    case TicketState::Pending: return "pending";
    case TicketState::Accepted: return "accepted";
    case TicketState::RejectedSingleApproval: return "rejected_single_approval";
    case TicketState::RejectedWithJustification: return "rejected_with_justification";
  }
  return "pending";
}

inline Decision parse_decision(std::string_view s) {
  if (s == "approve") return Decision::Approve;
  if (s == "reject") return Decision::Reject;
  throw Error(Errc::InvalidArgument, "decision must be 'approve' or 'reject'");
}

inline TicketState parse_ticket_state(std::string_view s) {
  for (auto st : {TicketState::Pending, TicketState::Accepted, TicketState::RejectedSingleApproval,
                  TicketState::RejectedWithJustification})
    if (to_string(st) == s) return st;
  throw Error(Errc::InvalidArgument, "unknown ticket state '" + std::string(s) + "'");
}

/// What would be retained: the reader's text and the recommended book.
struct Candidate {
  std::string tweet_text;
  std::string book_title;
  PersonalityLabel personality{"INTJ"};
  double score = 0.0;
  std::string matched_case_id;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct Vote {
  std::string expert_id;
  Decision decision = Decision::Approve;
  std::optional<std::string> justification;
};

struct RecordedVote {
  Decision decision = Decision::Approve;
  std::optional<std::string> justification;
  Timestamp at;

  friend bool operator==(const RecordedVote&, const RecordedVote&) = default;
};

struct ReviewTicket {
  std::string ticket_id;
  Candidate candidate;
  std::map<std::string, RecordedVote> votes;
  TicketState state = TicketState::Pending;
  std::optional<std::string> justification;
  Timestamp opened_at;
  std::optional<Timestamp> closed_at;
  std::optional<std::string> retained_case_id;

  friend bool operator==(const ReviewTicket&, const ReviewTicket&) = default;
};

struct AuditEntry {
  std::string expert_id;
  Decision decision = Decision::Approve;
  std::optional<std::string> justification;
  Timestamp at;
  TicketState state_after = TicketState::Pending;
};

struct PendingEntry {
  ReviewTicket ticket;
  std::size_t vote_count = 0;
  bool voted_by_caller = false;
};

struct Expert {
  std::string id;
  std::string token;
};

/// Exactly three experts with distinct ids and tokens.
class ExpertPanel {
 public:
  explicit ExpertPanel(std::vector<Expert> experts) {
    if (experts.size() != 3) throw Error(Errc::InvalidConfig, "the expert panel needs exactly 3 experts");
    for (std::size_t i = 0; i < 3; ++i) {
      if (experts[i].id.empty() || experts[i].token.empty())
        throw Error(Errc::InvalidConfig, "expert id and token must be non-empty");
      for (std::size_t j = 0; j < i; ++j)
        if (experts[i].id == experts_[j].id || experts[i].token == experts_[j].token)
          throw Error(Errc::InvalidConfig, "expert ids and tokens must be distinct");
      experts_[i] = std::move(experts[i]);
    }
  }

  bool contains(std::string_view id) const {
    return std::any_of(experts_.begin(), experts_.end(), [&](const Expert& e) { return e.id == id; });
  }

  std::optional<std::string> id_for_token(std::string_view token) const {
    for (const auto& e : experts_)
      if (e.token == token) return e.id;
    return std::nullopt;
  }

  const std::array<Expert, 3>& experts() const noexcept { return experts_; }

 private:
  std::array<Expert, 3> experts_;
};

/// Outcome for a complete set of three decisions.
inline TicketState resolve_votes(std::size_t approvals) {
  if (approvals == 3) return TicketState::Accepted;
  if (approvals == 2) return TicketState::RejectedWithJustification;
  return TicketState::RejectedSingleApproval;
}

namespace detail {

inline bool has_text(const std::optional<std::string>& s) {
  return s && s->find_first_not_of(" \t\r\n") != std::string::npos;
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const Candidate& c) {
  j = nlohmann::json{{"tweet_text", c.tweet_text},
                     {"book_title", c.book_title},
                     {"personality", c.personality.code()},
                     {"score", c.score},
                     {"matched_case_id", c.matched_case_id}};
}

inline Candidate candidate_from_json(const nlohmann::json& j) {
  return Candidate{j.at("tweet_text").get<std::string>(), j.at("book_title").get<std::string>(),
                   PersonalityLabel(j.at("personality").get<std::string>()), j.at("score").get<double>(),
                   j.at("matched_case_id").get<std::string>()};
}

inline void to_json(nlohmann::json& j, const ReviewTicket& t) {
  nlohmann::json votes = nlohmann::json::object();
  for (const auto& [id, v] : t.votes) {
    nlohmann::json jv{{"decision", to_string(v.decision)}, {"at", format_utc(v.at)}};
    if (v.justification) jv["justification"] = *v.justification;
    votes[id] = std::move(jv);
  }
  j = nlohmann::json{{"ticket_id", t.ticket_id},
                     {"candidate", t.candidate},
                     {"votes", std::move(votes)},
                     {"vote_count", t.votes.size()},
                     {"state", to_string(t.state)},
                     {"opened_at", format_utc(t.opened_at)}};
  j["justification"] = t.justification ? nlohmann::json(*t.justification) : nlohmann::json(nullptr);
  j["closed_at"] = t.closed_at ? nlohmann::json(format_utc(*t.closed_at)) : nlohmann::json(nullptr);
  j["retained_case_id"] = t.retained_case_id ? nlohmann::json(*t.retained_case_id) : nlohmann::json(nullptr);
}

inline void to_json(nlohmann::json& j, const AuditEntry& e) {
  j = nlohmann::json{{"expert_id", e.expert_id},
                     {"decision", to_string(e.decision)},
                     {"at", format_utc(e.at)},
                     {"state_after", to_string(e.state_after)}};
  j["justification"] = e.justification ? nlohmann::json(*e.justification) : nlohmann::json(nullptr);
}

class ReviewBoard {
 public:
  /// Runs when a ticket is about to resolve Accepted; returns the id of the
  /// retained case. If it throws, the deciding vote is not recorded.
  using RetainHook = std::function<std::string(const ReviewTicket&)>;

  explicit ReviewBoard(ExpertPanel panel, Clock clock = system_now)
      : panel_(std::move(panel)), clock_(std::move(clock)) {}

  ReviewBoard(const ReviewBoard&) = delete;
  ReviewBoard& operator=(const ReviewBoard&) = delete;

  void set_retain_hook(RetainHook hook) {
    std::lock_guard lock(mu_);
    retain_ = std::move(hook);
  }

  const ExpertPanel& panel() const noexcept { return panel_; }

  /// Replays an existing journal (if any) and appends every later event to it.
  void attach(const std::filesystem::path& journal) {
    std::lock_guard lock(mu_);
    if (std::filesystem::exists(journal)) replay(journal);
    journal_ = journal;
  }

  ReviewTicket open(Candidate candidate) {
    std::lock_guard lock(mu_);
    ReviewTicket t;
    char id[32];
    std::snprintf(id, sizeof id, "t-%06zu", tickets_.size() + 1);
    t.ticket_id = id;
    t.candidate = std::move(candidate);
    t.opened_at = clock_();
    journal({{"event", "open"},
             {"ticket_id", t.ticket_id},
             {"candidate", t.candidate},
             {"opened_at", format_utc(t.opened_at)}});
    order_.push_back(t.ticket_id);
    tickets_.emplace(t.ticket_id, Entry{t, {}});
    return t;
  }

  ReviewTicket cast_vote(const std::string& ticket_id, const Vote& vote) {
    std::lock_guard lock(mu_);
    auto it = tickets_.find(ticket_id);
    if (it == tickets_.end()) throw Error(Errc::UnknownTicket, "no ticket '" + ticket_id + "'");
    if (!panel_.contains(vote.expert_id)) throw Error(Errc::UnknownExpert, "'" + vote.expert_id + "' is not on the panel");
    auto& entry = it->second;
    ReviewTicket next = entry.ticket;
    if (next.state != TicketState::Pending) throw Error(Errc::TicketClosed, ticket_id + " is already resolved");
    if (next.votes.count(vote.expert_id)) throw Error(Errc::AlreadyVoted, vote.expert_id + " already voted on " + ticket_id);

    bool justified = detail::has_text(vote.justification);
    if (vote.decision == Decision::Reject && !justified) {
      bool other_reject = std::any_of(next.votes.begin(), next.votes.end(),
                                      [](const auto& kv) { return kv.second.decision == Decision::Reject; });
      // A lone reject may end up as the single dissent against two approvals.
      if (!other_reject) throw Error(Errc::JustificationRequired, "a lone reject must be justified");
    }

    auto at = clock_();
    next.votes.emplace(vote.expert_id, RecordedVote{vote.decision, justified ? vote.justification : std::nullopt, at});
    if (next.votes.size() == 3) resolve(next, at);
    if (next.state == TicketState::Accepted) {
      if (!retain_) throw Error(Errc::NotAccepted, "no retain hook configured");
      next.retained_case_id = retain_(next);
    }

    nlohmann::json ev{{"event", "vote"},
                      {"ticket_id", ticket_id},
                      {"expert_id", vote.expert_id},
                      {"decision", to_string(vote.decision)},
                      {"at", format_utc(at)}};
    if (justified) ev["justification"] = *vote.justification;
    if (next.retained_case_id) ev["retained_case_id"] = *next.retained_case_id;
    journal(ev);

    entry.audit.push_back(
        AuditEntry{vote.expert_id, vote.decision, next.votes.at(vote.expert_id).justification, at, next.state});
    entry.ticket = next;
    return next;
  }

  /// Pending tickets, oldest first. `caller` flags tickets that expert has
  /// already voted on.
  std::vector<PendingEntry> pending_queue(const std::optional<std::string>& caller = std::nullopt) const {
    std::lock_guard lock(mu_);
    std::vector<PendingEntry> out;
    for (const auto& id : order_) {
      const auto& t = tickets_.at(id).ticket;
      if (t.state != TicketState::Pending) continue;
      out.push_back(PendingEntry{t, t.votes.size(), caller && t.votes.count(*caller) > 0});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const PendingEntry& a, const PendingEntry& b) { return a.ticket.opened_at < b.ticket.opened_at; });
    return out;
  }

  std::vector<AuditEntry> audit_log(const std::string& ticket_id) const {
    std::lock_guard lock(mu_);
    auto it = tickets_.find(ticket_id);
    if (it == tickets_.end()) throw Error(Errc::UnknownTicket, "no ticket '" + ticket_id + "'");
    return it->second.audit;
  }

  std::optional<ReviewTicket> find(const std::string& ticket_id) const {
    std::lock_guard lock(mu_);
    auto it = tickets_.find(ticket_id);
    if (it == tickets_.end()) return std::nullopt;
    return it->second.ticket;
  }

  std::optional<ReviewTicket> find_pending(const std::function<bool(const ReviewTicket&)>& pred) const {
    std::lock_guard lock(mu_);
    for (const auto& id : order_) {
      const auto& t = tickets_.at(id).ticket;
      if (t.state == TicketState::Pending && pred(t)) return t;
    }
    return std::nullopt;
  }

  std::vector<ReviewTicket> tickets() const {
    std::lock_guard lock(mu_);
    std::vector<ReviewTicket> out;
    for (const auto& id : order_) out.push_back(tickets_.at(id).ticket);
    return out;
  }

 private:
  struct Entry {
    ReviewTicket ticket;
    std::vector<AuditEntry> audit;
  };

  static void resolve(ReviewTicket& t, Timestamp at) {
    std::size_t approvals = 0;
    const std::optional<std::string>* dissent = nullptr;
    for (const auto& [id, v] : t.votes) {
      if (v.decision == Decision::Approve)
        ++approvals;
      else
        dissent = &v.justification;
    }
    t.state = resolve_votes(approvals);
    if (t.state == TicketState::RejectedWithJustification) t.justification = *dissent;
    t.closed_at = at;
  }

  void journal(const nlohmann::json& ev) {
    if (!journal_.empty()) detail::durable_append(journal_, ev.dump() + "\n");
  }

  void replay(const std::filesystem::path& path) {
    auto data = detail::read_file(path);
    std::size_t pos = 0, line_no = 0, good_bytes = 0;
    while (pos < data.size()) {
      auto eol = data.find('\n', pos);
      ++line_no;
      if (eol == std::string::npos) break;  // torn tail, never acknowledged
      auto line = std::string_view(data).substr(pos, eol - pos);
      pos = eol + 1;
      try {
        apply(nlohmann::json::parse(line));
      } catch (const std::exception& e) {
        throw Error(Errc::CorruptStore, "review journal line " + std::to_string(line_no) + ": " + e.what());
      }
      good_bytes = pos;
    }
    if (good_bytes != data.size()) detail::truncate_file(path, good_bytes);
  }

  void apply(const nlohmann::json& ev) {
    const auto kind = ev.at("event").get<std::string>();
    const auto id = ev.at("ticket_id").get<std::string>();
    if (kind == "open") {
      ReviewTicket t;
      t.ticket_id = id;
      t.candidate = candidate_from_json(ev.at("candidate"));
      t.opened_at = parse_utc(ev.at("opened_at").get<std::string>());
      order_.push_back(id);
      tickets_.emplace(id, Entry{t, {}});
      return;
    }
    auto& entry = tickets_.at(id);
    auto& t = entry.ticket;
    auto expert = ev.at("expert_id").get<std::string>();
    RecordedVote v{parse_decision(ev.at("decision").get<std::string>()), std::nullopt,
                   parse_utc(ev.at("at").get<std::string>())};
    if (ev.contains("justification")) v.justification = ev["justification"].get<std::string>();
    t.votes.emplace(expert, v);
    if (t.votes.size() == 3) resolve(t, v.at);
    if (ev.contains("retained_case_id")) t.retained_case_id = ev["retained_case_id"].get<std::string>();
    entry.audit.push_back(AuditEntry{expert, v.decision, v.justification, v.at, t.state});
  }

  ExpertPanel panel_;
  Clock clock_;
  RetainHook retain_;
  std::filesystem::path journal_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> tickets_;
  std::vector<std::string> order_;
};

}  // namespace casebook
