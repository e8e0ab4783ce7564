#include <gtest/gtest.h>

#include <algorithm>
#include <array>

#include "casebook/case_memory.hpp"
#include "casebook/review.hpp"
#include "support/fixtures.hpp"

using namespace casebook;
using namespace casebook::testing;

namespace {

Candidate candidate(const std::string& text = "un libro para la noche") {
  return Candidate{text, "Rayuela", PersonalityLabel("INFP"), 0.75, "c-000001"};
}

Vote approve(const std::string& who) { return {who, Decision::Approve, std::nullopt}; }
Vote reject(const std::string& who, std::optional<std::string> why = std::nullopt) {
  return {who, Decision::Reject, std::move(why)};
}

Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Io;
}

struct Board {
  ReviewBoard board{test_panel(), fake_clock()};
  std::vector<std::string> retained;
  Board() {
    board.set_retain_hook([this](const ReviewTicket& t) {
      retained.push_back(t.ticket_id);
      return "c-" + t.ticket_id;
    });
  }
};

}  // namespace

TEST(ResolveVotes, Table) {
  EXPECT_EQ(resolve_votes(3), TicketState::Accepted);
  EXPECT_EQ(resolve_votes(2), TicketState::RejectedWithJustification);
  EXPECT_EQ(resolve_votes(1), TicketState::RejectedSingleApproval);
  EXPECT_EQ(resolve_votes(0), TicketState::RejectedSingleApproval);
}

TEST(ExpertPanel, RequiresThreeDistinctExperts) {
  EXPECT_THROW(ExpertPanel({{"a", "1"}, {"b", "2"}}), Error);
  EXPECT_THROW(ExpertPanel({{"a", "1"}, {"a", "2"}, {"c", "3"}}), Error);
  EXPECT_THROW(ExpertPanel({{"a", "1"}, {"b", "1"}, {"c", "3"}}), Error);
  EXPECT_THROW(ExpertPanel({{"a", ""}, {"b", "2"}, {"c", "3"}}), Error);
  auto p = test_panel();
  EXPECT_EQ(p.id_for_token("tok-bruno"), "bruno");
  EXPECT_FALSE(p.id_for_token("nope"));
}

TEST(CastVote, UnanimousApprovalRetains) {
  Board b;
  auto t = b.board.open(candidate());
  EXPECT_EQ(t.state, TicketState::Pending);
  b.board.cast_vote(t.ticket_id, approve("ana"));
  b.board.cast_vote(t.ticket_id, approve("bruno"));
  EXPECT_TRUE(b.retained.empty());
  auto done = b.board.cast_vote(t.ticket_id, approve("carla"));
  EXPECT_EQ(done.state, TicketState::Accepted);
  EXPECT_EQ(done.retained_case_id, "c-" + t.ticket_id);
  EXPECT_FALSE(done.justification);
  EXPECT_TRUE(done.closed_at);
  EXPECT_EQ(b.retained, std::vector<std::string>{t.ticket_id});
}

TEST(CastVote, SingleDissentStoresJustification) {
  Board b;
  auto t = b.board.open(candidate());
  b.board.cast_vote(t.ticket_id, approve("ana"));
  b.board.cast_vote(t.ticket_id, approve("bruno"));
  EXPECT_EQ(error_of([&] { b.board.cast_vote(t.ticket_id, reject("carla")); }), Errc::JustificationRequired);
  EXPECT_EQ(error_of([&] { b.board.cast_vote(t.ticket_id, reject("carla", "  ")); }), Errc::JustificationRequired);
  EXPECT_EQ(b.board.find(t.ticket_id)->votes.size(), 2u);
  auto done = b.board.cast_vote(t.ticket_id, reject("carla", "off-topic tweet"));
  EXPECT_EQ(done.state, TicketState::RejectedWithJustification);
  EXPECT_EQ(done.justification, "off-topic tweet");
  EXPECT_TRUE(b.retained.empty());
}

TEST(CastVote, SingleApprovalRejects) {
  Board b;
  auto t = b.board.open(candidate());
  b.board.cast_vote(t.ticket_id, approve("ana"));
  b.board.cast_vote(t.ticket_id, reject("bruno", "no encaja"));
  // A second reject needs no justification.
  auto done = b.board.cast_vote(t.ticket_id, reject("carla"));
  EXPECT_EQ(done.state, TicketState::RejectedSingleApproval);
  EXPECT_FALSE(done.justification);
  EXPECT_TRUE(b.retained.empty());
}

TEST(CastVote, Errors) {
  Board b;
  auto t = b.board.open(candidate());
  EXPECT_EQ(error_of([&] { b.board.cast_vote("t-999999", approve("ana")); }), Errc::UnknownTicket);
  EXPECT_EQ(error_of([&] { b.board.cast_vote(t.ticket_id, approve("zoe")); }), Errc::UnknownExpert);
  b.board.cast_vote(t.ticket_id, approve("ana"));
  EXPECT_EQ(error_of([&] { b.board.cast_vote(t.ticket_id, reject("ana", "cambio")); }), Errc::AlreadyVoted);
  EXPECT_EQ(b.board.find(t.ticket_id)->votes.at("ana").decision, Decision::Approve);
  b.board.cast_vote(t.ticket_id, approve("bruno"));
  b.board.cast_vote(t.ticket_id, approve("carla"));
  EXPECT_EQ(error_of([&] { b.board.cast_vote(t.ticket_id, approve("ana")); }), Errc::TicketClosed);
}

TEST(CastVote, FailingRetainHookLeavesTicketPending) {
  ReviewBoard board(test_panel(), fake_clock());
  board.set_retain_hook([](const ReviewTicket&) -> std::string { throw Error(Errc::DuplicateRecord, "dup"); });
  auto t = board.open(candidate());
  board.cast_vote(t.ticket_id, approve("ana"));
  board.cast_vote(t.ticket_id, approve("bruno"));
  EXPECT_EQ(error_of([&] { board.cast_vote(t.ticket_id, approve("carla")); }), Errc::DuplicateRecord);
  auto now = board.find(t.ticket_id);
  EXPECT_EQ(now->state, TicketState::Pending);
  EXPECT_EQ(now->votes.size(), 2u);
  EXPECT_EQ(board.audit_log(t.ticket_id).size(), 2u);
}

// Every combination of three decisions under every arrival order.
TEST(CastVote, ExhaustiveResolutionIsOrderIndependent) {
  const std::array<std::string, 3> experts{"ana", "bruno", "carla"};
  int sequences = 0;
  for (int mask = 0; mask < 8; ++mask) {
    std::array<int, 3> order{0, 1, 2};
    std::optional<TicketState> first;
    do {
      TempDir dir;
      auto store = CaseStore::open(dir / "s", std::make_shared<Pipeline>(), fake_clock());
      store->import_records({{"semilla", "Libro", "INTJ"}});
      ReviewBoard board(test_panel(), fake_clock());
      board.set_retain_hook([&](const ReviewTicket& t) { return store->retain(t).case_id; });
      auto t = board.open(candidate());
      ReviewTicket last;
      for (int i : order) {
        bool ok = mask & (1 << i);
        last = board.cast_vote(t.ticket_id, ok ? approve(experts[i]) : reject(experts[i], "motivo " + experts[i]));
      }
      int approvals = __builtin_popcount(static_cast<unsigned>(mask));
      auto expected = approvals == 3   ? TicketState::Accepted
                      : approvals == 2 ? TicketState::RejectedWithJustification
                                       : TicketState::RejectedSingleApproval;
      EXPECT_EQ(last.state, expected) << mask;
      if (first) EXPECT_EQ(last.state, *first);
      first = last.state;
      EXPECT_EQ(store->snapshot()->size(), expected == TicketState::Accepted ? 2u : 1u);
      EXPECT_EQ(last.justification.has_value(), expected == TicketState::RejectedWithJustification);
      if (last.justification) EXPECT_FALSE(last.justification->empty());
      ++sequences;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  EXPECT_EQ(sequences, 48);
}

TEST(PendingQueue, OrderingAndCallerFlags) {
  Board b;
  EXPECT_TRUE(b.board.pending_queue().empty());
  auto t1 = b.board.open(candidate("uno"));
  auto t2 = b.board.open(candidate("dos"));
  b.board.cast_vote(t1.ticket_id, approve("ana"));
  b.board.cast_vote(t1.ticket_id, approve("bruno"));
  auto q = b.board.pending_queue("ana");
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0].ticket.ticket_id, t1.ticket_id);
  EXPECT_EQ(q[1].ticket.ticket_id, t2.ticket_id);
  EXPECT_EQ(q[0].vote_count, 2u);
  EXPECT_TRUE(q[0].voted_by_caller);
  EXPECT_FALSE(q[1].voted_by_caller);
  EXPECT_FALSE(b.board.pending_queue("carla")[0].voted_by_caller);
  b.board.cast_vote(t1.ticket_id, approve("carla"));
  q = b.board.pending_queue();
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q[0].ticket.ticket_id, t2.ticket_id);
}

TEST(AuditLog, RecordsEveryVote) {
  Board b;
  auto t = b.board.open(candidate());
  b.board.cast_vote(t.ticket_id, approve("ana"));
  b.board.cast_vote(t.ticket_id, approve("bruno"));
  b.board.cast_vote(t.ticket_id, reject("carla", "off-topic tweet"));
  auto log = b.board.audit_log(t.ticket_id);
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[0].expert_id, "ana");
  EXPECT_EQ(log[0].state_after, TicketState::Pending);
  EXPECT_LT(log[0].at, log[1].at);
  EXPECT_EQ(log[2].justification, "off-topic tweet");
  EXPECT_EQ(log[2].state_after, TicketState::RejectedWithJustification);
  EXPECT_EQ(error_of([&] { b.board.audit_log("t-000404"); }), Errc::UnknownTicket);

  auto t2 = b.board.open(candidate("otro"));
  for (auto who : {"ana", "bruno", "carla"}) b.board.cast_vote(t2.ticket_id, approve(who));
  auto log2 = b.board.audit_log(t2.ticket_id);
  ASSERT_EQ(log2.size(), 3u);
  for (const auto& e : log2) EXPECT_FALSE(e.justification);
}

TEST(Journal, ReplayRestoresTicketsAndAudit) {
  TempDir dir;
  auto path = dir / "reviews.jsonl";
  std::vector<ReviewTicket> before;
  std::vector<AuditEntry> audit_before;
  {
    Board b;
    b.board.attach(path);
    auto t1 = b.board.open(candidate("uno"));
    auto t2 = b.board.open(candidate("dos"));
    for (auto who : {"ana", "bruno", "carla"}) b.board.cast_vote(t1.ticket_id, approve(who));
    b.board.cast_vote(t2.ticket_id, reject("bruno", "flojo"));
    before = b.board.tickets();
    audit_before = b.board.audit_log(t1.ticket_id);
  }
  detail::durable_append(path, "{\"event\":\"vo");
  ReviewBoard again(test_panel(), fake_clock());
  again.attach(path);
  EXPECT_EQ(again.tickets(), before);
  auto audit = again.audit_log("t-000001");
  ASSERT_EQ(audit.size(), audit_before.size());
  for (std::size_t i = 0; i < audit.size(); ++i) {
    EXPECT_EQ(audit[i].expert_id, audit_before[i].expert_id);
    EXPECT_EQ(audit[i].at, audit_before[i].at);
    EXPECT_EQ(audit[i].state_after, audit_before[i].state_after);
  }
  auto t3 = again.open(candidate("tres"));
  EXPECT_EQ(t3.ticket_id, "t-000003");
  EXPECT_EQ(again.pending_queue().size(), 2u);
}

TEST(TicketJson, Shape) {
  Board b;
  auto t = b.board.open(candidate());
  b.board.cast_vote(t.ticket_id, reject("ana", "no"));
  nlohmann::json j = *b.board.find(t.ticket_id);
  EXPECT_EQ(j["state"], "pending");
  EXPECT_EQ(j["vote_count"], 1);
  EXPECT_EQ(j["votes"]["ana"]["decision"], "reject");
  EXPECT_EQ(j["votes"]["ana"]["justification"], "no");
  EXPECT_TRUE(j["justification"].is_null());
  EXPECT_EQ(j["candidate"]["book_title"], "Rayuela");
  EXPECT_EQ(j["opened_at"], "2022-04-01T00:00:00.000Z");
}
