#pragma once

// JSON-over-HTTP facade. Every handler is a thin serialization of an engine,
// review-board or store operation; errors leave as {code, detail}.

#include <charconv>
#include <optional>
#include <string>
#include <string_view>

#include "casebook/engine.hpp"
#include "casebook/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace casebook {

struct ApiError {
  int status = 500;
  std::string code;
  std::string detail;
  std::optional<std::size_t> record_index;
};

inline int http_status(Errc e) noexcept {
  switch (e) {
    case Errc::InvalidText:
    case Errc::InvalidArgument:
      return 400;
    case Errc::UnknownExpert:
      return 401;
    case Errc::UnknownTicket:
      return 404;
    case Errc::AlreadyVoted:
    case Errc::TicketClosed:
    case Errc::NotAccepted:
      return 409;
    case Errc::EmptyAfterCleaning:
    case Errc::JustificationRequired:
    case Errc::SchemaError:
    case Errc::InvalidPersonality:
    case Errc::DuplicateRecord:
      return 422;
    case Errc::EmptyCaseBase:
      return 503;
    default:
      return 500;
  }
}

inline ApiError to_api_error(const Error& e) {
  return ApiError{http_status(e.code()), std::string(to_string(e.code())), e.detail(), e.position()};
}

class ApiService {
 public:
  explicit ApiService(Engine& engine) : engine_(engine) {}

  void mount(httplib::Server& srv) {
    srv.Post("/recommend", [this](const auto& req, auto& res) { guarded(res, [&] { recommend(req, res); }); });
    srv.Get("/reviews/pending", [this](const auto& req, auto& res) { guarded(res, [&] { pending(req, res); }); });
    srv.Post("/reviews/:id/vote", [this](const auto& req, auto& res) { guarded(res, [&] { vote(req, res); }); });
    srv.Get("/reviews/:id/audit", [this](const auto& req, auto& res) { guarded(res, [&] { audit(req, res); }); });
    srv.Get("/cases", [this](const auto& req, auto& res) { guarded(res, [&] { cases(req, res); }); });
    srv.Post("/cases/import", [this](const auto& req, auto& res) { guarded(res, [&] { import(req, res); }); });
    srv.Get("/health", [this](const auto&, auto& res) { guarded(res, [&] { health(res); }); });
  }

 private:
  static constexpr std::size_t kDefaultLimit = 50;
  static constexpr std::size_t kMaxLimit = 1000;

  static void send(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, const ApiError& err) {
    nlohmann::json body{{"code", err.code}, {"detail", err.detail}};
    if (err.record_index) body["record_index"] = *err.record_index;
    send(res, err.status, body);
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      send_error(res, to_api_error(e));
    } catch (const std::exception& e) {
      send_error(res, ApiError{500, "internal_error", e.what(), std::nullopt});
    }
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::InvalidArgument, "request body is not valid JSON");
    return j;
  }

  static std::optional<std::string> bearer(const httplib::Request& req) {
    if (req.has_param("expert_token")) return req.get_param_value("expert_token");
    auto auth = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (auth.size() > prefix.size() && auth.compare(0, prefix.size(), prefix) == 0) return auth.substr(prefix.size());
    return std::nullopt;
  }

  void recommend(const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string() ||
        body["text"].get<std::string>().find_first_not_of(" \t\r\n") == std::string::npos) {
      send_error(res, ApiError{400, "empty_text", "body must carry a non-empty 'text'", std::nullopt});
      return;
    }
    auto outcome = engine_.solve(RawText{body["text"].get<std::string>(), "api"});
    auto j = to_json(outcome.recommendation, outcome.ticket);
    j["ticket_status"] = to_string(outcome.ticket_status);
    send(res, 200, j);
  }

  void pending(const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> caller;
    if (auto token = bearer(req)) {
      caller = engine_.board().panel().id_for_token(*token);
      if (!caller) throw Error(Errc::UnknownExpert, "unknown expert token");
    }
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : engine_.board().pending_queue(caller)) {
      nlohmann::json t = e.ticket;
      t["voted_by_caller"] = e.voted_by_caller;
      list.push_back(std::move(t));
    }
    send(res, 200, nlohmann::json{{"tickets", std::move(list)}});
  }

  void vote(const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (!body.is_object()) throw Error(Errc::InvalidArgument, "body must be an object");
    if (!body.contains("expert_token") || !body["expert_token"].is_string())
      throw Error(Errc::UnknownExpert, "missing expert_token");
    auto expert = engine_.board().panel().id_for_token(body["expert_token"].get<std::string>());
    if (!expert) throw Error(Errc::UnknownExpert, "unknown expert token");
    if (!body.contains("decision") || !body["decision"].is_string())
      throw Error(Errc::InvalidArgument, "missing decision");
    Vote v{*expert, parse_decision(body["decision"].get<std::string>()), std::nullopt};
    if (body.contains("justification") && !body["justification"].is_null()) {
      if (!body["justification"].is_string()) throw Error(Errc::InvalidArgument, "justification must be a string");
      v.justification = body["justification"].get<std::string>();
    }
    auto ticket = engine_.vote(req.path_params.at("id"), v);
    nlohmann::json j = ticket;
    j["case_count"] = engine_.store().snapshot()->size();
    send(res, 200, j);
  }

  void audit(const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    auto entries = engine_.board().audit_log(id);
    send(res, 200, nlohmann::json{{"ticket_id", id}, {"entries", entries}});
  }

  static std::size_t parse_count(const httplib::Request& req, const char* key, std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    auto s = req.get_param_value(key);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument(key);
    return v;
  }

  void cases(const httplib::Request& req, httplib::Response& res) {
    std::size_t limit = 0, offset = 0;
    try {
      limit = parse_count(req, "limit", kDefaultLimit);
      offset = parse_count(req, "offset", 0);
    } catch (const std::invalid_argument& e) {
      send_error(res, ApiError{400, "bad_pagination", std::string("'") + e.what() + "' must be a non-negative integer",
                               std::nullopt});
      return;
    }
    if (limit == 0 || limit > kMaxLimit) {
      send_error(res, ApiError{400, "bad_pagination", "limit must be in [1, 1000]", std::nullopt});
      return;
    }
    auto view = engine_.store().snapshot();
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = offset; i < view->size() && i < offset + limit; ++i) list.push_back(*view->cases[i]);
    send(res, 200,
         nlohmann::json{{"total", view->size()},
                        {"offset", offset},
                        {"limit", limit},
                        {"store_version", view->version},
                        {"cases", std::move(list)}});
  }

  void import(const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    auto n = engine_.store().import_seed_json(body);
    auto view = engine_.store().snapshot();
    send(res, 200, nlohmann::json{{"imported", n}, {"case_count", view->size()}, {"store_version", view->version}});
  }

  void health(httplib::Response& res) {
    auto view = engine_.store().snapshot();
    send(res, 200, nlohmann::json{{"status", "ok"}, {"store_version", view->version}, {"case_count", view->size()}});
  }

  Engine& engine_;
};

/// An httplib server with the routes mounted.
class ApiServer {
 public:
  explicit ApiServer(Engine& engine) : service_(engine) { service_.mount(server_); }

  /// Blocks until stop().
  bool listen(const std::string& host, int port) { return server_.listen(host, port); }

  /// Binds an ephemeral port and returns it; follow with listen_after_bind().
  int bind_any(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }

  void wait_until_ready() const { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

 private:
  httplib::Server server_;
  ApiService service_;
};

}  // namespace casebook
