#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <csignal>
#include <thread>

#include "httplib.h"
#include "support/fixtures.hpp"

using namespace casebook;
using namespace casebook::testing;
using json = nlohmann::json;

namespace {

const std::string kCli = CASEBOOK_CLI;
const std::filesystem::path kSamples = CASEBOOK_SAMPLES;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run run(const std::vector<std::string>& args) {
  TempDir io;
  std::string cmd = quote(kCli);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >" + quote((io / "out").string()) + " 2>" + quote((io / "err").string());
  int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = detail::read_file(io / "out");
  r.err = detail::read_file(io / "err");
  return r;
}

std::string seed_file() { return (kSamples / "seed_cases.json").string(); }

std::string first_seed_text() {
  return json::parse(detail::read_file(kSamples / "seed_cases.json"))[0]["text"].get<std::string>();
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"recommend"}).code, 2);
  EXPECT_EQ(run({"ingest", "/nonexistent/dump.jsonl"}).code, 2);
  EXPECT_EQ(run({"import-seed", "/nonexistent/seed.json"}).code, 2);
  EXPECT_EQ(run({"recommend", "--text", "   "}).code, 2);
  EXPECT_EQ(run({"recommend", "--text", "hola", "--metric", "euclid"}).code, 2);
  EXPECT_EQ(run({"recommend", "--text", "hola", "--threshold", "1.5"}).code, 2);
  auto missing = run({"ingest", "/nonexistent/dump.jsonl"});
  EXPECT_NE(missing.err.find("not found"), std::string::npos);
}

TEST(Cli, ImportSeedReportsCount) {
  TempDir dir;
  auto r = run({"import-seed", seed_file(), "--store", (dir / "store").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "150 cases loaded\n");
  auto again = run({"import-seed", seed_file(), "--store", (dir / "store").string()});
  EXPECT_EQ(again.code, 1);
  EXPECT_NE(again.err.find("duplicate_record"), std::string::npos);
}

TEST(Cli, ImportSchemaErrorPrintsRecordIndex) {
  TempDir dir;
  write_text(dir / "bad.json", R"([{"text": "a", "book_title": "B", "personality": "INTJ"}, {"text": "b"}])");
  auto r = run({"import-seed", (dir / "bad.json").string(), "--store", (dir / "store").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("record 1"), std::string::npos) << r.err;
}

TEST(Cli, RecommendHighLowAndDeterministic) {
  TempDir dir;
  auto store = (dir / "store").string();
  ASSERT_EQ(run({"import-seed", seed_file(), "--store", store}).code, 0);

  auto high = run({"recommend", "--store", store, "--text", first_seed_text()});
  ASSERT_EQ(high.code, 0) << high.err;
  auto j = json::parse(high.out);
  EXPECT_EQ(j["kind"], "HighConfidence");
  EXPECT_EQ(j["picks"][0]["score"].get<double>(), 1.0);
  EXPECT_EQ(j["picks"][0]["case_id"], "c-000001");
  EXPECT_EQ(j["reliability_message"], "Reliability of the recommendation: +50%");

  auto low = run({"recommend", "--store", store, "--text", "Sonreír es lo más saludable que puedes hacer a diario"});
  ASSERT_EQ(low.code, 0);
  auto l = json::parse(low.out);
  EXPECT_EQ(l["kind"], "LowConfidence");
  EXPECT_EQ(l["picks"].size(), 2u);
  EXPECT_EQ(l["reliability_message"], "Recommendation reliability: -50%");

  auto again = run({"recommend", "--store", store, "--text", "Sonreír es lo más saludable que puedes hacer a diario"});
  EXPECT_EQ(again.out, low.out);
}

TEST(Cli, RecommendDomainErrors) {
  TempDir dir;
  auto empty = run({"recommend", "--store", (dir / "none").string(), "--text", "hola"});
  EXPECT_EQ(empty.code, 1);
  EXPECT_NE(empty.err.find("empty_case_base"), std::string::npos);
  ASSERT_EQ(run({"import-seed", seed_file(), "--store", (dir / "s").string()}).code, 0);
  EXPECT_EQ(run({"recommend", "--store", (dir / "s").string(), "--text", "!!! ..."}).code, 1);
}

TEST(Cli, RecommendWithConfigFile) {
  TempDir dir;
  write_text(dir / "cb.conf", "store_dir = store\nembeddings_path = " + (kSamples / "embeddings.txt").string() +
                                  "\nsimilarity.metric = softcosine\nexperts = a:1, b:2, c:3\n");
  ASSERT_EQ(run({"import-seed", seed_file(), "--config", (dir / "cb.conf").string()}).code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "store" / "manifest.json"));
  auto r = run({"recommend", "--config", (dir / "cb.conf").string(), "--text", first_seed_text()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["metric"], "softcosine");
  EXPECT_NEAR(j["picks"][0]["score"].get<double>(), 1.0, 1e-8);
  write_text(dir / "bad.conf", "colour = blue\n");
  EXPECT_EQ(run({"recommend", "--config", (dir / "bad.conf").string(), "--text", "x"}).code, 2);
}

TEST(Cli, EvalMatchesHandComputedValues) {
  TempDir dir;
  write_text(dir / "emb.txt", "gato 1.0 0.0\nfelino 0.8 0.6\n");
  write_text(dir / "pairs.json", R"([{"text_a": "gato", "text_b": "gato", "label": "same"},
                                     {"text_a": "gato", "text_b": "felino", "label": "paraphrase"}])");
  auto r = run({"eval", "--pairs", (dir / "pairs.json").string(), "--embeddings", (dir / "emb.txt").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::pair<int, std::string>, double> got;
  for (const auto& row : json::parse(r.out)) got[{row["pair"], row["metric"]}] = row["similarity"];
  EXPECT_EQ((got[{0, "jaccard"}]), 1.0);
  EXPECT_NEAR((got[{0, "cosine"}]), 1.0, 1e-9);
  // [1,0]·[0.8,0.6] / (1 · 1)
  EXPECT_NEAR((got[{1, "cosine"}]), 0.8, 1e-8);
  EXPECT_EQ((got[{1, "jaccard"}]), 0.0);

  auto table = run({"eval", "--pairs", (kSamples / "pairs.json").string()});
  EXPECT_EQ(table.code, 0);
  EXPECT_NE(table.out.find("Same text"), std::string::npos);
  EXPECT_NE(table.out.find("Time(ms)"), std::string::npos);

  write_text(dir / "badpairs.json", R"([{"text_a": "a", "text_b": "b", "label": "other"}])");
  EXPECT_EQ(run({"eval", "--pairs", (dir / "badpairs.json").string()}).code, 1);
}

TEST(Cli, IngestWritesStats) {
  TempDir dir;
  auto planted = planted_dump();
  write_text(dir / "dump.jsonl", planted.content);
  auto r = run({"ingest", (dir / "dump.jsonl").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto stats = json::parse(detail::read_file(dir / "out" / "corpus_stats.json"));
  EXPECT_EQ(stats["input_records"], planted.input);
  EXPECT_EQ(stats["accepted"], planted.accepted);
  EXPECT_EQ(stats["rejected"]["missing_text"], planted.missing_text);
  EXPECT_EQ(stats["rejected"]["wrong_country"], planted.wrong_country);
  EXPECT_EQ(stats["rejected"]["duplicate"], planted.duplicate);
  EXPECT_EQ(stats["rejected"]["too_short"], planted.too_short);
  EXPECT_EQ(stats["rejected"]["malformed"], planted.malformed);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "corpus.json"));

  write_text(dir / "empty.jsonl", "");
  auto empty = run({"ingest", (dir / "empty.jsonl").string(), "--out", (dir / "out2").string()});
  EXPECT_EQ(empty.code, 1);
  EXPECT_NE(empty.err.find("empty_dump"), std::string::npos);
}

TEST(Cli, ServeAnswersHealth) {
  TempDir dir;
  int port = 20000 + static_cast<int>(::getpid() % 20000);
  write_text(dir / "cb.conf", "store_dir = store\nexperts = a:1, b:2, c:3\nlisten = 127.0.0.1:" +
                                  std::to_string(port) + "\n");
  ASSERT_EQ(run({"import-seed", seed_file(), "--config", (dir / "cb.conf").string()}).code, 0);

  pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    if (!::freopen("/dev/null", "w", stderr)) ::_exit(127);
    ::execl(kCli.c_str(), kCli.c_str(), "serve", "--config", (dir / "cb.conf").c_str(), nullptr);
    ::_exit(127);
  }
  httplib::Client client("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 100 && !res; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    res = client.Get("/health");
  }
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["case_count"], 150);
  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

TEST(Cli, ServeRequiresThreeExperts) {
  TempDir dir;
  write_text(dir / "cb.conf", "store_dir = store\nexperts = a:1, b:2\n");
  EXPECT_EQ(run({"serve", "--config", (dir / "cb.conf").string()}).code, 2);
}
