// casebook: operator CLI.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "casebook/api.hpp"
#include "casebook/casebook.hpp"

namespace fs = std::filesystem;
using namespace casebook;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config;
  std::string store;
  std::string embeddings;
  std::string metric;
  std::optional<double> threshold;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config, "flat key = value config file");
    cmd->add_option("--store", store, "case store directory (overrides store_dir)");
    cmd->add_option("--embeddings", embeddings, "plain-text embedding file (overrides embeddings_path)");
    cmd->add_option("--metric", metric, "jaccard | cosine | softcosine");
    cmd->add_option("--threshold", threshold, "reliability threshold in (0, 1)");
  }

  CliConfig resolve() const {
    CliConfig cfg;
    if (!config.empty()) {
      if (!fs::exists(config)) throw UsageError("config file not found: " + config);
      cfg = CliConfig::load(config);
    }
    if (!store.empty()) cfg.store_dir = store;
    if (!embeddings.empty()) cfg.embeddings_path = embeddings;
    if (!metric.empty()) cfg.set("similarity.metric", metric);
    if (threshold) cfg.engine.threshold = *threshold;
    return cfg;
  }
};

ApiServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_ingest(const std::string& dump, const std::string& out) {
  if (!fs::exists(dump)) throw UsageError("dump file not found: " + dump);
  auto corpus = filter_dump(dump);
  write_corpus(out, corpus);
  std::cout << corpus_report(corpus).to_table();
  return kOk;
}

int run_import(const CommonFlags& flags, const std::string& seed) {
  if (!fs::exists(seed)) throw UsageError("seed file not found: " + seed);
  auto cfg = flags.resolve();
  cfg.validate(false);
  auto store = CaseStore::open(cfg.store_dir, cfg.make_pipeline());
  auto n = store->import_seed(seed);
  std::cout << n << " cases loaded\n";
  return kOk;
}

int run_recommend(const CommonFlags& flags, const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw UsageError("--text must not be empty");
  auto cfg = flags.resolve();
  cfg.validate(false);
  auto pipeline = cfg.make_pipeline();
  if (!fs::exists(cfg.store_dir / "manifest.json"))
    throw Error(Errc::EmptyCaseBase, "no case store at " + cfg.store_dir.string());
  auto store = CaseStore::restore(cfg.store_dir, pipeline);
  auto query = make_query(RawText{text, "cli"}, *pipeline);
  auto result = retrieve(query, *store->snapshot(), cfg.engine, pipeline->embeddings());
  std::cout << to_json(reuse(result, cfg.engine)).dump(2) << '\n';
  return kOk;
}

int run_eval(const CommonFlags& flags, const std::string& pairs_path, bool as_json) {
  if (!fs::exists(pairs_path)) throw UsageError("pairs file not found: " + pairs_path);
  auto cfg = flags.resolve();
  auto pipeline = cfg.make_pipeline();
  std::vector<Metric> metrics{Metric::Jaccard};
  if (pipeline->embeddings()) {
    metrics.push_back(Metric::Cosine);
    metrics.push_back(Metric::SoftCosine);
  }
  auto rows = evaluate_pairs(load_pairs(pairs_path), metrics, *pipeline);
  if (as_json)
    std::cout << eval_json(rows).dump(2) << '\n';
  else
    std::cout << render_eval_tables(rows);
  return kOk;
}

int run_serve(const CommonFlags& flags, const std::string& listen) {
  auto cfg = flags.resolve();
  if (!listen.empty()) cfg.listen = listen;
  auto ws = Workspace::open(cfg);
  auto [host, port] = cfg.listen_address();
  ApiServer server(*ws->engine);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << host << ":" << port << std::endl;
  bool ok = server.listen(host, port);
  g_server = nullptr;
  if (!ok) throw Error(Errc::Io, "cannot listen on " + cfg.listen);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"casebook: case-based book recommendations from short texts"};
  app.require_subcommand(1);

  std::string dump, out_dir = ".";
  auto* ingest = app.add_subcommand("ingest", "filter a tweet dump into a reader corpus");
  ingest->add_option("dump", dump, "line-delimited JSON dump")->required();
  ingest->add_option("--out", out_dir, "output directory");

  CommonFlags import_flags;
  std::string seed;
  auto* import = app.add_subcommand("import-seed", "load seed cases into the store");
  import->add_option("file", seed, "JSON array of {text, book_title, personality}")->required();
  import_flags.add_to(import);

  CommonFlags rec_flags;
  std::string text;
  auto* recommend = app.add_subcommand("recommend", "one-shot recommendation, printed as JSON");
  recommend->add_option("--text", text, "reader text")->required();
  rec_flags.add_to(recommend);

  CommonFlags eval_flags;
  std::string pairs;
  bool as_json = false;
  auto* eval = app.add_subcommand("eval", "compare similarity metrics over labelled text pairs");
  eval->add_option("--pairs", pairs, "JSON array of {text_a, text_b, label}")->required();
  eval->add_flag("--json", as_json, "emit JSON instead of tables");
  eval_flags.add_to(eval);

  CommonFlags serve_flags;
  std::string listen;
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--listen", listen, "host:port (overrides listen)");
  serve_flags.add_to(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*ingest) return run_ingest(dump, out_dir);
    if (*import) return run_import(import_flags, seed);
    if (*recommend) return run_recommend(rec_flags, text);
    if (*eval) return run_eval(eval_flags, pairs, as_json);
    if (*serve) return run_serve(serve_flags, listen);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what();
    if (e.position()) std::cerr << " (record " << *e.position() << ")";
    std::cerr << '\n';
    return e.code() == Errc::InvalidConfig ? kUsageError : kDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}
