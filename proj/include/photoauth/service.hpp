#pragma once

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "photoauth/decision.hpp"
#include "photoauth/session.hpp"
#include "photoauth/verify.hpp"

namespace photoauth {

/// Server configuration. Loaded from JSON; every field has a default.
struct ServiceConfig {
  std::vector<std::string> server_domains = {"microsoft.com", "www.microsoft.com"};
  std::map<std::string, Preference> users = {{"bob", Preference::Sms}};
  std::size_t token_length = ShortLinkToken::kDefaultLength;
  int retake_cap = 5;
  double cr_threshold = 0.8;
  double confidence_floor = 0.5;
  double iou_threshold = 0.5;
  ColocationPolicy colocation;
  std::int64_t session_ttl_s = 300;
  int lookups_per_second = 10;
  Resolution target_resolution{1920, 1080};
  std::uint64_t seed = 0;
  int port = 8080;
  // Echo the phone notification in the /login response, for local testing.
  bool test_mode = false;

  void validate() const {
    if (server_domains.empty()) throw Error(ErrorCode::InvalidArgument, "server_domains must not be empty");
    if (token_length < 6 || token_length > 12) throw Error(ErrorCode::InvalidArgument, "token_length must be in [6, 12]");
    auto unit = [](double v, const char* name) {
      if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be in (0,1]");
    };
    unit(cr_threshold, "cr_threshold");
    unit(confidence_floor, "confidence_floor");
    unit(iou_threshold, "iou_threshold");
    if (retake_cap < 0) throw Error(ErrorCode::InvalidArgument, "retake_cap must be >= 0");
    if (session_ttl_s <= 0) throw Error(ErrorCode::InvalidArgument, "session_ttl_s must be positive");
  }
};

inline ServiceConfig service_config_from_json(const nlohmann::json& j) {
  try {
    ServiceConfig c;
    if (j.contains("server_domains")) c.server_domains = j["server_domains"].get<std::vector<std::string>>();
    if (j.contains("users")) {
      c.users.clear();
      for (const auto& [name, pref] : j["users"].items()) c.users[name] = preference_from_string(pref.get<std::string>());
    }
    c.token_length = j.value("token_length", c.token_length);
    c.retake_cap = j.value("retake_cap", c.retake_cap);
    c.cr_threshold = j.value("cr_threshold", c.cr_threshold);
    c.confidence_floor = j.value("confidence_floor", c.confidence_floor);
    c.iou_threshold = j.value("iou_threshold", c.iou_threshold);
    if (j.contains("colocation_mode")) {
      c.colocation.mode = colocation_mode_from_string(j["colocation_mode"].get<std::string>());
    }
    c.colocation.prefix_length = j.value("colocation_prefix", c.colocation.prefix_length);
    c.session_ttl_s = j.value("session_ttl_s", c.session_ttl_s);
    c.lookups_per_second = j.value("lookups_per_second", c.lookups_per_second);
    if (j.contains("target_resolution")) {
      const auto& r = j["target_resolution"];
      c.target_resolution = Resolution(r.at("w").get<int>(), r.at("h").get<int>());
    }
    c.seed = j.value("seed", c.seed);
    c.port = j.value("port", c.port);
    c.test_mode = j.value("test_mode", c.test_mode);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
}

inline ServiceConfig load_service_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  return service_config_from_json(j);
}

/// PHOTOAUTH_PORT and PHOTOAUTH_SEED override the file.
inline void apply_env_overrides(ServiceConfig& c) {
  if (const char* port = std::getenv("PHOTOAUTH_PORT")) c.port = std::stoi(port);
  if (const char* seed = std::getenv("PHOTOAUTH_SEED")) c.seed = std::stoull(seed);
}

struct WireRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> headers;  // keys lowercase
  std::string body;
  std::string remote_addr;
};

struct WireResponse {
  int status = 200;
  std::map<std::string, std::string> headers;
  std::string body;

  [[nodiscard]] nlohmann::json json() const { return nlohmann::json::parse(body); }
};

inline constexpr std::string_view kSessionCookieName = "session";

/// Value of the session cookie in a Cookie header, if any.
inline std::optional<std::string> session_cookie(const std::map<std::string, std::string>& headers) {
  const auto it = headers.find("cookie");
  if (it == headers.end()) return std::nullopt;
  std::string_view rest = it->second;
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    auto pair = detail::trim(rest.substr(0, semi));
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    const auto eq = pair.find('=');
    if (eq != std::string_view::npos && detail::trim(pair.substr(0, eq)) == kSessionCookieName) {
      return std::string(detail::trim(pair.substr(eq + 1)));
    }
  }
  return std::nullopt;
}

inline std::string set_cookie_header(const Cookie& c) {
  return std::string(kSessionCookieName) + "=" + c.value + "; Path=/; Secure; HttpOnly; SameSite=Lax";
}

/// Transport-free request handler. The HTTP server and the simulator both
/// drive it; handlers keep no cross-request state besides the session store.
class Service {
 public:
  using LogSink = std::function<void(const std::string&)>;
  using NotificationSink = std::function<void(const Notification&)>;

  Service(ServiceConfig config, Clock clock, NotificationSink on_notify = {}, LogSink log = {})
      : config_(validated(std::move(config))),
        store_(DomainName::from_host(config_.server_domains.front()), config_.seed, clock,
               StoreConfig{config_.session_ttl_s * 1000, config_.lookups_per_second, config_.retake_cap}),
        engine_(store_, config_.users, accept_set_of(config_), engine_config_of(config_),
                [this](const Notification& n) { deliver(n); }),
        on_notify_(std::move(on_notify)),
        log_(std::move(log)) {}

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }
  [[nodiscard]] SessionStore& store() noexcept { return store_; }
  [[nodiscard]] Engine& engine() noexcept { return engine_; }

  WireResponse handle(const WireRequest& req) {
    WireResponse resp;
    try {
      resp = route(req);
    } catch (const Error& e) {
      resp = error_response(e);
    }
    if (log_) {
      nlohmann::json line{{"t", store_.now()}, {"method", req.method}, {"path", req.path}, {"status", resp.status}};
      if (const auto body = nlohmann::json::parse(resp.body, nullptr, false); body.is_object()) {
        if (body.contains("status")) line["outcome"] = body["status"];
        if (body.contains("reason")) line["reason"] = body["reason"];
      }
      log_(line.dump());
    }
    return resp;
  }

 private:
  static ServiceConfig validated(ServiceConfig c) {
    c.validate();
    return c;
  }

  static AcceptSet accept_set_of(const ServiceConfig& c) {
    AcceptSet s;
    for (const auto& d : c.server_domains) s.insert(DomainName::from_host(d));
    return s;
  }

  static EngineConfig engine_config_of(const ServiceConfig& c) {
    EngineConfig e;
    e.token_length = c.token_length;
    e.verify.cr_threshold = c.cr_threshold;
    e.verify.confidence_floor = c.confidence_floor;
    e.colocation = c.colocation;
    return e;
  }

  void deliver(const Notification& n) {
    {
      std::lock_guard lock(outbox_mutex_);
      last_notification_ = n;
    }
    if (on_notify_) on_notify_(n);
  }

  static WireResponse reply(int status, nlohmann::json body) { return {status, {}, body.dump()}; }

  static WireResponse error_response(const Error& e) {
    int status = 400;
    if (e.code() == ErrorCode::InvalidState) status = 409;
    return reply(status, {{"status", status == 409 ? "conflict" : "bad-request"}, {"reason", to_string(e.code())},
                          {"detail", e.what()}});
  }

  static NetAddress address_of(const WireRequest& req) {
    try {
      return NetAddress::parse(req.remote_addr);
    } catch (const Error&) {
      return NetAddress{};
    }
  }

  WireResponse route(const WireRequest& req) {
    const std::string path = req.path.substr(0, req.path.find('?'));
    if (path == "/") {
      if (req.method != "GET") return method_not_allowed();
      return reply(200, {{"status", "login-page"}, {"host", config_.server_domains.front()}});
    }
    if (path == "/login") {
      if (req.method != "POST") return method_not_allowed();
      return login(req);
    }
    if (path == "/status") {
      if (req.method != "GET") return method_not_allowed();
      return to_wire(engine_.check_status(session_cookie(req.headers)));
    }
    if (path.substr(0, 3) == "/c/") {
      const std::string_view rest = std::string_view(path).substr(3);
      const auto slash = rest.find('/');
      const std::string digits(rest.substr(0, slash));
      const auto tail = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
      if (tail.empty()) {
        if (req.method != "GET") return method_not_allowed();
        return to_wire(engine_.handle_link_click({digits, session_cookie(req.headers), address_of(req)}));
      }
      if (tail == "/photo") {
        if (req.method != "POST") return method_not_allowed();
        return photo(digits, req);
      }
      if (tail == "/image") {
        // Raw image upload needs a detector backend; none is wired in.
        return reply(501, {{"status", "not-implemented"}, {"reason", "raw-image-upload"}});
      }
    }
    return reply(404, {{"status", "not-found"}});
  }

  static WireResponse method_not_allowed() { return reply(405, {{"status", "method-not-allowed"}}); }

  WireResponse login(const WireRequest& req) {
    const auto body = nlohmann::json::parse(req.body.empty() ? "{}" : req.body, nullptr, false);
    if (!body.is_object()) return reply(400, {{"status", "bad-request"}, {"reason", "malformed-json"}});
    AuthRequest r;
    r.presented_cookie = session_cookie(req.headers);
    if (body.contains("username") && body["username"].is_string()) r.username = body["username"].get<std::string>();
    r.source_address = address_of(req);
    r.channel = body.value("channel", std::string("pc")) == "phone" ? Channel::PhoneBrowser : Channel::PcBrowser;
    const AuthDecision d = engine_.handle_auth_request(r);
    WireResponse resp = to_wire(d);
    if (d.kind == AuthDecision::Kind::LinkSent && config_.test_mode) {
      std::lock_guard lock(outbox_mutex_);
      if (last_notification_) {
        auto j = resp.json();
        j["notification"] = {{"to", last_notification_->username},
                             {"channel", to_string(last_notification_->channel)},
                             {"text", last_notification_->text}};
        resp.body = j.dump();
      }
    }
    return resp;
  }

  WireResponse photo(const std::string& digits, const WireRequest& req) {
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return reply(400, {{"status", "bad-request"}, {"reason", "malformed-json"}});
    const PhotoAnalysis analysis = rescale_analysis(photo_analysis_from_json(body), config_.target_resolution);
    return to_wire(engine_.handle_photo_submission(digits, analysis, address_of(req)));
  }

  WireResponse to_wire(const AuthDecision& d) const {
    using K = AuthDecision::Kind;
    nlohmann::json j;
    int status = 200;
    switch (d.kind) {
      case K::Authorize: j["status"] = "authorized"; break;
      case K::LinkSent:
        j["status"] = "link-sent";
        j["session_id"] = *d.session_id;
        j["link"] = d.token->path();
        break;
      case K::Pending:
        j["status"] = "pending";
        j["state"] = d.reason;
        break;
      case K::RequirePhoto:
        j["status"] = "photo-required";
        j["upload"] = d.token->path() + "/photo";
        j["remaining_retakes"] = d.remaining_retakes;
        if (!d.advisory.empty()) j["advisory"] = d.advisory;
        break;
      case K::RequestRetake:
        j["status"] = "retake";
        j["reason"] = d.reason;
        j["remaining_retakes"] = d.remaining_retakes;
        j["warning"] = d.warning;
        break;
      case K::Fallback:
        j["status"] = "fallback";
        j["reason"] = d.reason;
        j["warning"] = true;
        break;
      case K::BadRequest:
        status = 400;
        j["status"] = "bad-request";
        j["reason"] = d.reason;
        break;
      case K::Deny:
        j["status"] = "denied";
        j["reason"] = d.reason;
        if (d.warning) j["warning"] = true;
        if (d.found_domain) j["found"] = d.found_domain->str();
        if (d.reason == reason::kUnknownToken) status = 403;
        if (d.reason == reason::kRateLimited) status = 429;
        if (d.reason == reason::kUnknownUser || d.reason == reason::kNoValidCookie) status = 401;
        break;
    }
    WireResponse resp{status, {}, j.dump()};
    if (d.set_cookie) resp.headers["set-cookie"] = set_cookie_header(*d.set_cookie);
    return resp;
  }

  ServiceConfig config_;
  SessionStore store_;
  Engine engine_;
  NotificationSink on_notify_;
  LogSink log_;
  mutable std::mutex outbox_mutex_;
  std::optional<Notification> last_notification_;
};

}  // namespace photoauth
