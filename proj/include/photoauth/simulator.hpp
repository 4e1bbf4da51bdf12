#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "photoauth/random.hpp"
#include "photoauth/service.hpp"
#include "photoauth/synth.hpp"

namespace photoauth {

enum class LinkTrust { Safe, Unsafe };

constexpr std::string_view to_string(LinkTrust t) noexcept { return t == LinkTrust::Safe ? "safe" : "unsafe"; }

/// Browser cookie storage. A cookie set by origin X is only ever handed back
/// on requests to X.
class CookieJar {
 public:
  void store(const std::string& origin, std::string_view set_cookie) {
    const auto semi = set_cookie.find(';');
    const auto pair = detail::trim(set_cookie.substr(0, semi));
    const auto eq = pair.find('=');
    if (eq == std::string_view::npos) return;
    cookies_[origin][std::string(pair.substr(0, eq))] = std::string(pair.substr(eq + 1));
  }

  /// Cookie header for a request to `destination`, if the jar has any.
  [[nodiscard]] std::optional<std::string> header_for(const std::string& destination) const {
    const auto it = cookies_.find(destination);
    if (it == cookies_.end() || it->second.empty()) return std::nullopt;
    std::string out;
    for (const auto& [name, value] : it->second) {
      if (!out.empty()) out += "; ";
      out += name + "=" + value;
    }
    return out;
  }

  [[nodiscard]] std::optional<std::string> get(const std::string& origin, const std::string& name) const {
    const auto it = cookies_.find(origin);
    if (it == cookies_.end()) return std::nullopt;
    const auto c = it->second.find(name);
    if (c == it->second.end()) return std::nullopt;
    return c->second;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> cookies_;
};

/// Substitutes every occurrence of `from` with `to` in one left-to-right pass.
inline std::string replace_all(std::string_view text, std::string_view from, std::string_view to) {
  if (from.empty()) return std::string(text);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = text.find(from, pos);
    if (hit == std::string_view::npos) break;
    out.append(text.substr(pos, hit - pos));
    out.append(to);
    pos = hit + from.size();
  }
  out.append(text.substr(pos));
  return out;
}

/// Classic one-time-code second factor, kept only as the contrast fixture:
/// the code travels to the phone, the user types it into whatever site the
/// PC is showing.
class OtpServer {
 public:
  using NotificationSink = std::function<void(const Notification&)>;

  OtpServer(std::map<std::string, Preference> users, std::uint64_t seed, NotificationSink notify)
      : users_(std::move(users)), rng_(seed), notify_(std::move(notify)) {}

  WireResponse handle(const WireRequest& req) {
    const auto cookie = session_cookie(req.headers);
    if (req.path == "/" && req.method == "GET") return reply(200, {{"status", "login-page"}});
    if (req.path == "/login" && req.method == "POST") {
      const auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (!body.is_object() || !body.contains("username")) return reply(400, {{"status", "bad-request"}});
      const auto user = users_.find(body["username"].get<std::string>());
      if (user == users_.end()) return reply(401, {{"status", "denied"}, {"reason", "unknown-user"}});
      Entry e{user->first, rng_.digits(6), false};
      const std::string value = rng_.hex(Cookie::kBytes);
      sessions_[value] = e;
      notify_(Notification{e.username, user->second, "Your sign-in code is " + e.code});
      WireResponse r = reply(200, {{"status", "otp-required"}, {"session_id", value.substr(0, 16)}});
      r.headers["set-cookie"] = std::string(kSessionCookieName) + "=" + value + "; Path=/; Secure; HttpOnly";
      return r;
    }
    if (req.path == "/otp" && req.method == "POST") {
      const auto body = nlohmann::json::parse(req.body, nullptr, false);
      const auto it = cookie ? sessions_.find(*cookie) : sessions_.end();
      if (it == sessions_.end()) return reply(401, {{"status", "denied"}, {"reason", "no-valid-cookie"}});
      if (!body.is_object() || body.value("code", std::string()) != it->second.code) {
        return reply(403, {{"status", "denied"}, {"reason", "wrong-code"}});
      }
      it->second.authorized = true;
      return reply(200, {{"status", "authorized"}});
    }
    if (req.path == "/status" && req.method == "GET") {
      const auto it = cookie ? sessions_.find(*cookie) : sessions_.end();
      if (it == sessions_.end()) return reply(401, {{"status", "denied"}, {"reason", "no-valid-cookie"}});
      return reply(200, it->second.authorized ? nlohmann::json{{"status", "authorized"}}
                                              : nlohmann::json{{"status", "pending"}, {"state", "otp-sent"}});
    }
    return reply(404, {{"status", "not-found"}});
  }

 private:
  struct Entry {
    std::string username;
    std::string code;
    bool authorized;
  };

  static WireResponse reply(int status, const nlohmann::json& body) { return {status, {}, body.dump()}; }

  std::map<std::string, Preference> users_;
  Rng rng_;
  NotificationSink notify_;
  std::map<std::string, Entry> sessions_;
};

enum class InjectionPlacement { Title, PageContent, PictureInPicture };

constexpr std::string_view to_string(InjectionPlacement p) noexcept {
  switch (p) {
    case InjectionPlacement::Title: return "title";
    case InjectionPlacement::PageContent: return "content";
    case InjectionPlacement::PictureInPicture: return "pip";
  }
  return "title";
}

inline InjectionPlacement injection_placement_from_string(std::string_view s) {
  if (s == "title") return InjectionPlacement::Title;
  if (s == "content") return InjectionPlacement::PageContent;
  if (s == "pip") return InjectionPlacement::PictureInPicture;
  throw Error(ErrorCode::ParseError, "unknown injection placement '" + std::string(s) + "'");
}

struct ScenarioEvent {
  std::string actor;   // pc | phone | adversary
  std::string action;
  nlohmann::json args = nlohmann::json::object();
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  std::string scheme = "photoauth";  // or "otp"
  std::vector<std::string> server_domains = {"microsoft.com", "www.microsoft.com"};
  std::map<std::string, Preference> users = {{"bob", Preference::Sms}};
  std::optional<std::string> fake_domain;  // host run by the adversary's proxy
  DetectorProfile profile = DetectorProfile::oracle();
  ColocationPolicy colocation;
  int retake_cap = 5;
  // The user switches the PC to light mode when asked to retake.
  bool light_after_retake = false;
  std::vector<ScenarioEvent> events;
  std::optional<std::string> expected;
};

/// One decision the real server handed out, attributed to whoever owns the
/// session it concerns.
struct TrailEntry {
  std::size_t step = 0;
  std::string actor;  // who sent the request that reached the server
  std::string owner;  // user | adversary | none
  std::string decision;
  std::string reason;
  bool warning = false;
};

struct ScenarioReport {
  std::string name;
  std::uint64_t seed = 0;
  std::string outcome;
  std::optional<std::string> expected;
  std::vector<TrailEntry> trail;
  std::vector<std::string> log;  // JSON lines

  [[nodiscard]] bool passed() const { return !expected || *expected == outcome; }

  [[nodiscard]] std::size_t count(std::string_view decision, std::string_view owner = {}) const {
    return static_cast<std::size_t>(std::count_if(trail.begin(), trail.end(), [&](const TrailEntry& e) {
      return e.decision == decision && (owner.empty() || e.owner == owner);
    }));
  }
};

inline nlohmann::json to_json(const ScenarioReport& r) {
  nlohmann::json trail = nlohmann::json::array();
  for (const auto& e : r.trail) {
    trail.push_back({{"step", e.step},
                     {"actor", e.actor},
                     {"owner", e.owner},
                     {"decision", e.decision},
                     {"reason", e.reason},
                     {"warning", e.warning}});
  }
  nlohmann::json j{{"name", r.name}, {"seed", r.seed}, {"outcome", r.outcome}, {"trail", trail},
                   {"messages", r.log.size()}};
  if (r.expected) {
    j["expected"] = *r.expected;
    j["passed"] = r.passed();
  }
  return j;
}

namespace detail {

inline std::string decision_of_status(std::string_view status) {
  if (status == "authorized") return "Authorize";
  if (status == "denied") return "Deny";
  if (status == "photo-required") return "RequirePhoto";
  if (status == "retake") return "RequestRetake";
  if (status == "fallback") return "Fallback";
  if (status == "bad-request") return "BadRequest";
  if (status == "link-sent" || status == "otp-required") return "LinkSent";
  if (status == "pending") return "Pending";
  return {};
}

/// Everything one scenario run touches. Single-threaded; all time is logical.
class World {
 public:
  static constexpr std::string_view kPcAddress = "198.51.100.23";
  static constexpr std::string_view kPhoneAddress = "203.0.113.45";
  static constexpr std::string_view kAdversaryAddress = "192.0.2.66";
  static constexpr std::int64_t kStepMs = 100;

  explicit World(const Scenario& sc) : sc_(sc) {
    if (sc.server_domains.empty()) throw Error(ErrorCode::InvalidArgument, "scenario needs a server domain");
    server_host_ = DomainName::from_host(sc.server_domains.front()).str();
    auto deliver = [this](const Notification& n) { notify(n); };
    if (sc.scheme == "photoauth") {
      ServiceConfig cfg;
      cfg.server_domains = sc.server_domains;
      cfg.users = sc.users;
      cfg.retake_cap = sc.retake_cap;
      cfg.colocation = sc.colocation;
      cfg.seed = derive_seed(sc.seed, 1);
      service_ = std::make_unique<Service>(cfg, clock_.clock(), deliver);
    } else if (sc.scheme == "otp") {
      otp_ = std::make_unique<OtpServer>(sc.users, derive_seed(sc.seed, 1), deliver);
    } else {
      throw Error(ErrorCode::ParseError, "unknown scheme '" + sc.scheme + "'");
    }
    links_[{"pc", server_host_}] = LinkTrust::Unsafe;
    links_[{"adversary", server_host_}] = LinkTrust::Unsafe;
    links_[{"phone", server_host_}] = LinkTrust::Safe;
    if (sc.fake_domain) {
      fake_host_ = DomainName::from_host(*sc.fake_domain).str();
      if (fake_host_ == server_host_) throw Error(ErrorCode::InvalidArgument, "fake domain equals the server");
      links_[{"pc", fake_host_}] = LinkTrust::Unsafe;
      links_[{"phone", fake_host_}] = LinkTrust::Unsafe;
    }
  }

  ScenarioReport run() {
    for (const auto& ev : sc_.events) apply(ev);
    ScenarioReport r;
    r.name = sc_.name;
    r.seed = sc_.seed;
    r.expected = sc_.expected;
    r.trail = trail_;
    r.log = log_;
    r.outcome = outcome();
    return r;
  }

 private:
  struct Browser {
    std::string location;
    CookieJar jar;
    std::string address;
  };

  void apply(const ScenarioEvent& ev) {
    const auto& a = ev.args;
    const std::string key = ev.actor + ":" + ev.action;
    if (key == "pc:navigate") {
      pc_.location = host_arg(a);
      event_log(ev.actor, ev.action, {{"host", pc_.location}});
      send("pc", pc_, pc_.location, "GET", "/", "");
    } else if (key == "pc:login") {
      require_location(pc_, "pc");
      send("pc", pc_, pc_.location, "POST", "/login",
           nlohmann::json{{"username", a.value("username", std::string("bob"))}, {"password", "*"}}.dump());
    } else if (key == "pc:status") {
      require_location(pc_, "pc");
      send("pc", pc_, pc_.location, "GET", "/status", "");
    } else if (key == "pc:set-theme") {
      theme_ = a.value("theme", std::string("light")) == "dark" ? Theme::Dark : Theme::Light;
      event_log(ev.actor, ev.action, {{"theme", to_string(theme_)}});
    } else if (key == "pc:enter-otp") {
      require_location(pc_, "pc");
      if (!otp_code_) throw Error(ErrorCode::InvalidState, "no code has been read from the phone");
      send("pc", pc_, pc_.location, "POST", "/otp", nlohmann::json{{"code", *otp_code_}}.dump());
    } else if (key == "phone:navigate") {
      phone_.location = host_arg(a);
      event_log(ev.actor, ev.action, {{"host", phone_.location}});
      send("phone", phone_, phone_.location, "GET", "/", "");
    } else if (key == "phone:login") {
      require_location(phone_, "phone");
      send("phone", phone_, phone_.location, "POST", "/login",
           nlohmann::json{{"username", a.value("username", std::string("bob"))}, {"password", "*"}, {"channel", "phone"}}
               .dump());
    } else if (key == "phone:click") {
      click();
    } else if (key == "phone:photo") {
      photograph(a.value("max", sc_.retake_cap + 2));
    } else if (key == "phone:read-otp") {
      read_otp();
    } else if (key == "adversary:inject") {
      injection_ = injection_placement_from_string(a.value("placement", std::string("title")));
      injected_text_ = a.value("text", server_host_);
      event_log(ev.actor, ev.action, {{"placement", to_string(*injection_)}, {"text", injected_text_}});
    } else if (key == "adversary:redirect") {
      pc_.location = a.contains("host") ? host_arg(a) : server_host_;
      event_log(ev.actor, ev.action, {{"host", pc_.location}});
      send("pc", pc_, pc_.location, "GET", "/", "");
    } else if (key == "adversary:guess") {
      guess(a.value("budget", std::size_t{1}), a.value("length", ShortLinkToken::kDefaultLength));
    } else {
      throw Error(ErrorCode::ParseError, "unknown event " + key);
    }
  }

  static std::string host_arg(const nlohmann::json& a) {
    if (!a.contains("host")) throw Error(ErrorCode::ParseError, "event needs a host");
    return DomainName::from_host(a["host"].get<std::string>()).str();
  }

  static void require_location(const Browser& b, const char* who) {
    if (b.location.empty()) throw Error(ErrorCode::InvalidState, std::string(who) + " has not opened a site");
  }

  void tick() { clock_.advance(kStepMs); }

  void event_log(const std::string& actor, const std::string& action, nlohmann::json detail) {
    tick();
    detail["seq"] = log_.size();
    detail["t"] = clock_.now();
    detail["event"] = action;
    detail["actor"] = actor;
    log_.push_back(detail.dump());
  }

  /// Sends one HTTP request from an actor over its link to `host`, with the
  /// actor's cookies for exactly that host. Set-Cookie lands in the jar under
  /// the host that answered.
  WireResponse send(const std::string& actor, Browser& browser, const std::string& host, const std::string& method,
                    const std::string& path, const std::string& body, std::optional<std::string> from_address = {}) {
    const auto link = links_.find({actor, host});
    if (link == links_.end()) throw Error(ErrorCode::InvalidState, "no link from " + actor + " to " + host);
    tick();
    WireRequest req{method, path, {}, body, from_address.value_or(browser.address)};
    const auto cookie = browser.jar.header_for(host);
    if (cookie) req.headers["cookie"] = *cookie;

    WireResponse resp = host == server_host_ ? server(actor, req) : proxy(req);
    if (const auto sc = resp.headers.find("set-cookie"); sc != resp.headers.end()) browser.jar.store(host, sc->second);

    nlohmann::json line{{"seq", log_.size()},
                        {"t", clock_.now()},
                        {"from", actor},
                        {"to", host},
                        {"trust", to_string(link->second)},
                        {"method", method},
                        {"path", path},
                        {"cookie_origin", cookie ? nlohmann::json(host) : nlohmann::json(nullptr)},
                        {"status", resp.status},
                        {"response", nlohmann::json::parse(resp.body, nullptr, false)}};
    log_.push_back(line.dump());
    return resp;
  }

  /// The real server, with an omniscient observer attributing each decision
  /// to the party that owns the session.
  WireResponse server(const std::string& actor, const WireRequest& req) {
    WireResponse resp = service_ ? service_->handle(req) : otp_->handle(req);
    const auto body = nlohmann::json::parse(resp.body, nullptr, false);
    const std::string status = body.is_object() ? body.value("status", std::string()) : std::string();
    const std::string requester = actor == "adversary" ? "adversary" : "user";

    std::string owner = "none";
    if (const auto sc = resp.headers.find("set-cookie"); sc != resp.headers.end()) {
      CookieJar j;
      j.store("x", sc->second);
      if (auto v = j.get("x", std::string(kSessionCookieName))) owner_by_cookie_[*v] = requester;
      owner = requester;
      if (body.contains("link")) {
        const auto link = body["link"].get<std::string>();
        owner_by_token_[link.substr(link.rfind('/') + 1)] = requester;
      }
    } else if (req.path.rfind("/c/", 0) == 0) {
      const auto digits = req.path.substr(3, req.path.find('/', 3) - 3);
      if (const auto it = owner_by_token_.find(digits); it != owner_by_token_.end()) owner = it->second;
    } else if (const auto c = session_cookie(req.headers)) {
      if (const auto it = owner_by_cookie_.find(*c); it != owner_by_cookie_.end()) owner = it->second;
    }

    const auto decision = decision_of_status(status);
    if (!decision.empty()) {
      trail_.push_back({trail_.size(), actor, owner, decision, body.value("reason", std::string()),
                        body.value("warning", false)});
    }
    return resp;
  }

  /// The adversary's reverse proxy: relays to the real server through the
  /// adversary's own browser, swapping domain strings both ways.
  WireResponse proxy(const WireRequest& in) {
    const std::string body = replace_all(in.body, fake_host_, server_host_);
    WireResponse up = send("adversary", adversary_, server_host_, in.method, in.path, body);
    WireResponse out{up.status, {}, replace_all(up.body, server_host_, fake_host_)};
    // The server's cookie is passed on to the victim, now scoped to the fake origin.
    if (const auto sc = up.headers.find("set-cookie"); sc != up.headers.end()) out.headers["set-cookie"] = sc->second;
    return out;
  }

  void notify(const Notification& n) {
    tick();
    inbox_.push_back(n.text);
    log_.push_back(nlohmann::json{{"seq", log_.size()},
                                  {"t", clock_.now()},
                                  {"from", "server"},
                                  {"to", "phone"},
                                  {"trust", to_string(LinkTrust::Safe)},
                                  {"channel", to_string(n.channel)},
                                  {"notification", n.text}}
                       .dump());
  }

  void click() {
    if (inbox_.empty()) throw Error(ErrorCode::InvalidState, "phone has no link to click");
    const std::string& link = inbox_.back();
    const auto slash = link.find('/');
    if (slash == std::string::npos) throw Error(ErrorCode::InvalidState, "last notification is not a link");
    const auto host = DomainName::from_host(link.substr(0, slash)).str();
    phone_.location = host;
    const auto resp = send("phone", phone_, host, "GET", link.substr(slash), "");
    const auto body = nlohmann::json::parse(resp.body, nullptr, false);
    if (body.is_object() && body.contains("upload")) upload_ = body["upload"].get<std::string>();
  }

  /// What the PC screen shows right now, as a layout request.
  LayoutRequest pc_screen() const {
    LayoutRequest req;
    req.url = "https://" + pc_.location + "/login";
    req.theme = theme_;
    if (pc_.location == fake_host_ && injection_) {
      req.injected_text = injected_text_;
      switch (*injection_) {
        case InjectionPlacement::Title: req.variant = LayoutVariant::TitleInjection; break;
        case InjectionPlacement::PageContent: req.variant = LayoutVariant::ContentInjection; break;
        case InjectionPlacement::PictureInPicture:
          req.variant = LayoutVariant::PictureInPicture;
          req.injected_text = "https://" + injected_text_ + "/login";
          break;
      }
    }
    return req;
  }

  /// The user checks the PC first and only photographs a screen that shows
  /// a login in progress. Retakes repeat until the server settles.
  void photograph(int max_photos) {
    if (!upload_) throw Error(ErrorCode::InvalidState, "phone has no photo request");
    require_location(pc_, "pc");
    const auto poll = send("pc", pc_, pc_.location, "GET", "/status", "");
    if (nlohmann::json::parse(poll.body, nullptr, false).value("status", std::string()) != "pending") {
      event_log("phone", "photo-skipped", {{"reason", "no-login-pending"}});
      return;
    }
    for (int i = 0; i < max_photos; ++i) {
      const auto layout = generate_layout(pc_screen(), derive_seed(sc_.seed, 1000 + photos_));
      DetectorProfile p = sc_.profile;
      p.seed = derive_seed(derive_seed(sc_.seed, sc_.profile.seed), 2000 + photos_);
      ++photos_;
      const auto analysis = simulate_detection(layout, p);
      const auto resp = send("phone", phone_, phone_.location, "POST", *upload_, to_json(analysis).dump());
      if (nlohmann::json::parse(resp.body, nullptr, false).value("status", std::string()) != "retake") return;
      if (sc_.light_after_retake) theme_ = Theme::Light;
    }
  }

  void read_otp() {
    if (inbox_.empty()) throw Error(ErrorCode::InvalidState, "phone has no code");
    const auto& text = inbox_.back();
    otp_code_ = text.substr(text.find_last_of(' ') + 1);
    event_log("phone", "read-otp", nlohmann::json::object());
  }

  /// Blind token guessing from a botnet: every guess comes from its own
  /// source address, so per-source rate limits never engage. A hit is
  /// followed straight away with the adversary's own cookie.
  void guess(std::size_t budget, std::size_t length) {
    Rng rng(derive_seed(sc_.seed, 3));
    for (std::size_t i = 0; i < budget; ++i) {
      const std::string digits = rng.digits(length);
      const auto source = NetAddress(0x0a000000u + static_cast<std::uint32_t>(i)).str();
      const auto resp = send("adversary", adversary_, server_host_, "GET", "/c/" + digits, "", source);
      if (resp.status == 200) return;
    }
  }

  std::string outcome() const {
    const auto any = [&](auto pred) { return std::any_of(trail_.begin(), trail_.end(), pred); };
    if (any([](const TrailEntry& e) { return e.decision == "Authorize" && e.owner == "adversary"; })) {
      return "Authorized(adversary)";
    }
    if (any([](const TrailEntry& e) { return e.decision == "Deny" && e.reason == reason::kPhishingDetected; })) {
      return "AttackDetected";
    }
    if (any([](const TrailEntry& e) { return e.decision == "Authorize" && e.owner == "user"; })) {
      return "Authorized(user)";
    }
    for (auto it = trail_.rbegin(); it != trail_.rend(); ++it) {
      if (it->decision == "Deny" || it->decision == "RequestRetake" || it->decision == "Fallback") {
        return "AttackBlocked(" + it->reason + ")";
      }
    }
    return "Incomplete";
  }

 private:
  const Scenario& sc_;
  ManualClock clock_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<OtpServer> otp_;
  std::string server_host_;
  std::string fake_host_;
  std::map<std::pair<std::string, std::string>, LinkTrust> links_;
  Browser pc_{{}, {}, std::string(kPcAddress)};
  Browser phone_{{}, {}, std::string(kPhoneAddress)};
  Browser adversary_{{}, {}, std::string(kAdversaryAddress)};
  Theme theme_ = Theme::Light;
  std::optional<InjectionPlacement> injection_;
  std::string injected_text_;
  std::vector<std::string> inbox_;
  std::optional<std::string> upload_;
  std::optional<std::string> otp_code_;
  int photos_ = 0;
  std::map<std::string, std::string> owner_by_cookie_;
  std::map<std::string, std::string> owner_by_token_;
  std::vector<TrailEntry> trail_;
  std::vector<std::string> log_;
};

}  // namespace detail

/// Runs a scenario script. Same scenario and seed give a byte-identical log.
inline ScenarioReport run_scenario(const Scenario& sc) {
  return detail::World(sc).run();
}

// Scenario JSON ------------------------------------------------------------

inline Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    Scenario sc;
    sc.name = j.value("name", sc.name);
    sc.seed = j.value("seed", sc.seed);
    sc.scheme = j.value("scheme", sc.scheme);
    if (j.contains("server_domains")) sc.server_domains = j["server_domains"].get<std::vector<std::string>>();
    if (j.contains("users")) {
      sc.users.clear();
      for (const auto& [name, pref] : j["users"].items()) sc.users[name] = preference_from_string(pref.get<std::string>());
    }
    if (j.contains("fake_domain") && !j["fake_domain"].is_null()) sc.fake_domain = j["fake_domain"].get<std::string>();
    if (j.contains("profile")) sc.profile = detector_profile_from_json(j["profile"]);
    if (j.contains("colocation_mode")) sc.colocation.mode = colocation_mode_from_string(j["colocation_mode"].get<std::string>());
    sc.colocation.prefix_length = j.value("colocation_prefix", sc.colocation.prefix_length);
    sc.retake_cap = j.value("retake_cap", sc.retake_cap);
    sc.light_after_retake = j.value("light_after_retake", sc.light_after_retake);
    for (const auto& e : j.at("events")) {
      ScenarioEvent ev;
      ev.actor = e.at("actor").get<std::string>();
      ev.action = e.at("action").get<std::string>();
      for (const auto& [k, v] : e.items()) {
        if (k != "actor" && k != "action") ev.args[k] = v;
      }
      sc.events.push_back(std::move(ev));
    }
    if (j.contains("expected")) sc.expected = j["expected"].get<std::string>();
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scenario: ") + e.what());
  }
}

inline nlohmann::json to_json(const Scenario& sc) {
  nlohmann::json users = nlohmann::json::object();
  for (const auto& [name, pref] : sc.users) users[name] = to_string(pref);
  nlohmann::json events = nlohmann::json::array();
  for (const auto& ev : sc.events) {
    nlohmann::json e = ev.args;
    e["actor"] = ev.actor;
    e["action"] = ev.action;
    events.push_back(e);
  }
  nlohmann::json j{{"name", sc.name},
                   {"seed", sc.seed},
                   {"scheme", sc.scheme},
                   {"server_domains", sc.server_domains},
                   {"users", users},
                   {"profile", to_json(sc.profile)},
                   {"colocation_mode", to_string(sc.colocation.mode)},
                   {"colocation_prefix", sc.colocation.prefix_length},
                   {"retake_cap", sc.retake_cap},
                   {"light_after_retake", sc.light_after_retake},
                   {"events", events}};
  if (sc.fake_domain) j["fake_domain"] = *sc.fake_domain;
  if (sc.expected) j["expected"] = *sc.expected;
  return j;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open scenario " + path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, "scenario " + path + " is not valid JSON");
  return scenario_from_json(j);
}

// Built-in scenarios ---------------------------------------------------------

namespace detail {

inline ScenarioEvent ev(std::string actor, std::string action, nlohmann::json args = nlohmann::json::object()) {
  return {std::move(actor), std::move(action), std::move(args)};
}

inline std::vector<std::string> accept_domains(const std::string& upstream) {
  const auto d = DomainName::from_host(upstream).str();
  if (d.rfind("www.", 0) == 0) return {d, d.substr(4)};
  return {d, "www." + d};
}

}  // namespace detail

struct BenignOptions {
  Theme theme = Theme::Light;
  bool phone_login = false;
  // The user switches the PC to light mode after being asked to retake.
  bool light_after_retake = false;
};

inline Scenario benign_scenario(std::uint64_t seed, const DetectorProfile& profile, BenignOptions opt = {}) {
  using detail::ev;
  Scenario sc;
  sc.name = opt.phone_login ? "benign-phone-login" : "benign";
  sc.seed = seed;
  sc.profile = profile;
  if (opt.phone_login) {
    sc.events = {ev("phone", "navigate", {{"host", "microsoft.com"}}), ev("phone", "login"), ev("phone", "click")};
  } else {
    sc.events = {ev("pc", "set-theme", {{"theme", to_string(opt.theme)}}), ev("pc", "navigate", {{"host", "microsoft.com"}}),
                 ev("pc", "login"), ev("phone", "click"), ev("phone", "photo"), ev("pc", "status")};
  }
  sc.light_after_retake = opt.light_after_retake;
  sc.expected = "Authorized(user)";
  return sc;
}

inline ScenarioReport run_benign_login(std::uint64_t seed, const DetectorProfile& profile, BenignOptions opt = {}) {
  return run_scenario(benign_scenario(seed, profile, opt));
}

/// RTP attack: the victim logs in through the adversary's proxy at
/// `fake_domain`, which relays to the real `upstream`. With guess_budget > 0
/// the adversary tries to guess the short link instead of waiting for a photo.
inline Scenario rtp_scenario(std::uint64_t seed, const std::string& fake_domain, const DetectorProfile& profile,
                             const std::string& upstream = "microsoft.com", std::size_t guess_budget = 0) {
  using detail::ev;
  Scenario sc;
  sc.name = "rtp";
  sc.seed = seed;
  sc.profile = profile;
  sc.server_domains = detail::accept_domains(upstream);
  sc.fake_domain = fake_domain;
  sc.events = {ev("pc", "navigate", {{"host", fake_domain}}), ev("pc", "login")};
  if (guess_budget > 0) {
    sc.events.push_back(ev("adversary", "guess", {{"budget", guess_budget}}));
    sc.expected = "AttackBlocked(unknown-token)";
  } else {
    sc.events.push_back(ev("phone", "click"));
    sc.events.push_back(ev("phone", "photo"));
    sc.events.push_back(ev("pc", "status"));
    sc.expected = "AttackDetected";
  }
  return sc;
}

inline ScenarioReport run_rtp_attack(std::uint64_t seed, const std::string& fake_domain,
                                     const DetectorProfile& profile = DetectorProfile::oracle(),
                                     const std::string& upstream = "microsoft.com", std::size_t guess_budget = 0) {
  return run_scenario(rtp_scenario(seed, fake_domain, profile, upstream, guess_budget));
}

/// The adversary passes the server's cookie to the victim and redirects the
/// victim to the real site. The cookie is scoped to the fake origin, so the
/// real site sees a browser with no login in progress.
inline Scenario redirection_scenario(std::uint64_t seed, const DetectorProfile& profile = DetectorProfile::oracle()) {
  using detail::ev;
  Scenario sc;
  sc.name = "redirect";
  sc.seed = seed;
  sc.profile = profile;
  sc.fake_domain = "microsoft1.com";
  sc.events = {ev("pc", "navigate", {{"host", "microsoft1.com"}}), ev("pc", "login"),
               ev("adversary", "redirect", {{"host", "microsoft.com"}}), ev("pc", "status"), ev("phone", "click"),
               ev("phone", "photo")};
  sc.expected = "AttackBlocked(no-valid-cookie)";
  return sc;
}

inline ScenarioReport run_redirection_attack(std::uint64_t seed,
                                             const DetectorProfile& profile = DetectorProfile::oracle()) {
  return run_scenario(redirection_scenario(seed, profile));
}

inline Scenario injection_scenario(std::uint64_t seed, InjectionPlacement placement,
                                   const DetectorProfile& profile = DetectorProfile::oracle()) {
  using detail::ev;
  Scenario sc;
  sc.name = "inject-" + std::string(to_string(placement));
  sc.seed = seed;
  sc.profile = profile;
  sc.fake_domain = "microsoft1.com";
  sc.events = {ev("adversary", "inject", {{"placement", to_string(placement)}, {"text", "microsoft.com"}}),
               ev("pc", "navigate", {{"host", "microsoft1.com"}}),
               ev("pc", "login"),
               ev("phone", "click"),
               ev("phone", "photo")};
  sc.expected =
      placement == InjectionPlacement::PictureInPicture ? "AttackBlocked(multiple-addrbars)" : "AttackDetected";
  return sc;
}

inline ScenarioReport run_injection_attack(std::uint64_t seed, InjectionPlacement placement,
                                           const DetectorProfile& profile = DetectorProfile::oracle()) {
  return run_scenario(injection_scenario(seed, placement, profile));
}

/// The same RTP proxy against a plain one-time-code scheme.
inline Scenario otp_baseline_scenario(std::uint64_t seed) {
  using detail::ev;
  Scenario sc;
  sc.name = "otp-baseline";
  sc.seed = seed;
  sc.scheme = "otp";
  sc.fake_domain = "microsoft1.com";
  sc.events = {ev("pc", "navigate", {{"host", "microsoft1.com"}}), ev("pc", "login"), ev("phone", "read-otp"),
               ev("pc", "enter-otp")};
  sc.expected = "Authorized(adversary)";
  return sc;
}

inline ScenarioReport run_otp_baseline(std::uint64_t seed) { return run_scenario(otp_baseline_scenario(seed)); }

}  // namespace photoauth
