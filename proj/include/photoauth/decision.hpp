#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "photoauth/session.hpp"
#include "photoauth/verify.hpp"

namespace photoauth {

/// Stable reason codes. These travel on the wire and simulators match on
/// them, so they never change spelling.
namespace reason {
inline constexpr std::string_view kPhishingDetected = "phishing-detected";
inline constexpr std::string_view kUnknownToken = "unknown-token";
inline constexpr std::string_view kUnknownUser = "unknown-user";
inline constexpr std::string_view kNoValidCookie = "no-valid-cookie";
inline constexpr std::string_view kRateLimited = "rate-limited";
inline constexpr std::string_view kMalformedCookie = "malformed-cookie";
inline constexpr std::string_view kMissingUsername = "missing-username";
inline constexpr std::string_view kFallback = "retake-limit";
}  // namespace reason

struct ColocationPolicy {
  enum class Mode { CookieEquality, IpEquality, SameNetwork };

  Mode mode = Mode::CookieEquality;
  int prefix_length = 24;  // SameNetwork only

  static ColocationPolicy cookie() { return {}; }
  static ColocationPolicy ip() { return {Mode::IpEquality, 32}; }
  static ColocationPolicy same_network(int prefix) { return {Mode::SameNetwork, prefix}; }
};

constexpr std::string_view to_string(ColocationPolicy::Mode m) noexcept {
  switch (m) {
    case ColocationPolicy::Mode::CookieEquality: return "cookie";
    case ColocationPolicy::Mode::IpEquality: return "ip";
    case ColocationPolicy::Mode::SameNetwork: return "same-network";
  }
  return "cookie";
}

inline ColocationPolicy::Mode colocation_mode_from_string(std::string_view s) {
  if (s == "cookie") return ColocationPolicy::Mode::CookieEquality;
  if (s == "ip") return ColocationPolicy::Mode::IpEquality;
  if (s == "same-network") return ColocationPolicy::Mode::SameNetwork;
  throw Error(ErrorCode::ParseError, "unknown colocation mode '" + std::string(s) + "'");
}

struct AuthRequest {
  std::optional<std::string> presented_cookie;  // raw Cookie header value
  std::optional<std::string> username;
  NetAddress source_address;
  Channel channel = Channel::PcBrowser;
};

struct LinkClick {
  std::string token_digits;
  std::optional<std::string> presented_cookie;
  NetAddress source_address;
};

struct AuthDecision {
  enum class Kind { Authorize, Deny, RequirePhoto, RequestRetake, Fallback, BadRequest, LinkSent, Pending };

  Kind kind = Kind::Deny;
  std::string reason;
  bool warning = false;
  std::optional<std::string> session_id;
  std::optional<Cookie> set_cookie;
  std::optional<ShortLinkToken> token;
  std::optional<DomainName> found_domain;
  int remaining_retakes = 0;
  std::string advisory;

  static AuthDecision make(Kind k, std::string_view why = {}) {
    AuthDecision d;
    d.kind = k;
    d.reason = std::string(why);
    return d;
  }
};

constexpr std::string_view to_string(AuthDecision::Kind k) noexcept {
  using K = AuthDecision::Kind;
  switch (k) {
    case K::Authorize: return "Authorize";
    case K::Deny: return "Deny";
    case K::RequirePhoto: return "RequirePhoto";
    case K::RequestRetake: return "RequestRetake";
    case K::Fallback: return "Fallback";
    case K::BadRequest: return "BadRequest";
    case K::LinkSent: return "LinkSent";
    case K::Pending: return "Pending";
  }
  return "Deny";
}

/// A message for the user's phone. Delivery is out of band (the safe link).
struct Notification {
  std::string username;
  Preference channel;
  std::string text;
};

using Notifier = std::function<void(const Notification&)>;

struct EngineConfig {
  std::size_t token_length = ShortLinkToken::kDefaultLength;
  VerifyConfig verify;
  ColocationPolicy colocation;
};

/// The authentication flow: cookie check, short link, colocation check and
/// the photo branch. Holds no per-request state of its own; everything
/// mutable lives in the SessionStore.
class Engine {
 public:
  Engine(SessionStore& store, std::map<std::string, Preference> users, AcceptSet accept, EngineConfig config = {},
         Notifier notify = {})
      : store_(store),
        users_(std::move(users)),
        accept_(std::move(accept)),
        config_(config),
        notify_(std::move(notify)) {
    config_.verify.validate();
    if (accept_.empty()) throw Error(ErrorCode::InvalidArgument, "accept set must not be empty");
  }

  [[nodiscard]] const EngineConfig& config() const noexcept { return config_; }
  [[nodiscard]] const AcceptSet& accept_set() const noexcept { return accept_; }
  [[nodiscard]] SessionStore& store() noexcept { return store_; }

  /// Login entry point. An authorized session's cookie short-circuits to
  /// Authorize; otherwise a fresh session is opened and its short link sent
  /// to the user's phone.
  AuthDecision handle_auth_request(const AuthRequest& r) {
    using K = AuthDecision::Kind;
    if (r.presented_cookie) {
      if (!Cookie::well_formed(*r.presented_cookie)) return AuthDecision::make(K::BadRequest, reason::kMalformedCookie);
      if (const auto s = store_.find_by_cookie(*r.presented_cookie); s && s->state == SessionState::Authorized) {
        auto d = AuthDecision::make(K::Authorize);
        d.session_id = s->id;
        return d;
      }
    }
    if (!r.username) return AuthDecision::make(K::BadRequest, reason::kMissingUsername);
    const auto user = users_.find(*r.username);
    if (user == users_.end()) return AuthDecision::make(K::Deny, reason::kUnknownUser);

    const Session s = store_.create_session(*r.username, user->second, r.channel, r.source_address);
    const ShortLinkToken token = store_.issue_short_link(s.id, config_.token_length);
    if (notify_) notify_(Notification{s.username, s.preference, token.link(store_.origin())});

    auto d = AuthDecision::make(K::LinkSent);
    d.session_id = s.id;
    d.set_cookie = s.cookie;
    d.token = token;
    return d;
  }

  /// Status poll from the browser that started a login.
  AuthDecision check_status(const std::optional<std::string>& presented_cookie) const {
    using K = AuthDecision::Kind;
    if (!presented_cookie) return AuthDecision::make(K::Deny, reason::kNoValidCookie);
    if (!Cookie::well_formed(*presented_cookie)) return AuthDecision::make(K::BadRequest, reason::kMalformedCookie);
    const auto s = store_.find_by_cookie(*presented_cookie);
    if (!s) return AuthDecision::make(K::Deny, reason::kNoValidCookie);
    AuthDecision d = from_terminal_state(*s).value_or(AuthDecision::make(K::Pending, to_string(s->state)));
    d.session_id = s->id;
    return d;
  }

  AuthDecision handle_link_click(const LinkClick& c) {
    using K = AuthDecision::Kind;
    const auto found = lookup(c.token_digits, c.source_address);
    if (found.kind != K::Pending) return found;

    return store_.update(*found.session_id, [&](Session& s) {
      if (auto terminal = from_terminal_state(s)) return *terminal;
      if (s.state == SessionState::AwaitingPhoto) return require_photo(s, c);
      if (colocated(s, c)) {
        s.transition_to(SessionState::Authorized);
        auto d = AuthDecision::make(K::Authorize);
        d.session_id = s.id;
        return d;
      }
      s.transition_to(SessionState::AwaitingPhoto);
      return require_photo(s, c);
    });
  }

  /// Photo branch. Verification runs before taking the store lock; the
  /// verdict is then applied atomically.
  AuthDecision handle_photo_submission(std::string_view token_digits, const PhotoAnalysis& analysis,
                                       std::optional<NetAddress> source = std::nullopt) {
    using K = AuthDecision::Kind;
    const auto found = lookup(token_digits, source);
    if (found.kind != K::Pending) return found;

    const VerifyResult verdict = verify_photo(analysis, accept_, config_.verify);
    const int cap = store_.config().retake_cap;
    return store_.update(*found.session_id, [&](Session& s) {
      if (s.state != SessionState::AwaitingPhoto) {
        throw Error(ErrorCode::InvalidState,
                    "session " + s.id + " is " + std::string(to_string(s.state)) + ", not awaiting a photo");
      }
      AuthDecision d;
      if (std::holds_alternative<verdict::Match>(verdict)) {
        s.transition_to(SessionState::Authorized);
        d = AuthDecision::make(K::Authorize);
      } else if (const auto* bad = std::get_if<verdict::Mismatch>(&verdict)) {
        s.transition_to(SessionState::Denied);
        s.phishing_warned = true;
        d = AuthDecision::make(K::Deny, reason::kPhishingDetected);
        d.warning = true;
        d.found_domain = bad->found;
      } else {
        const auto& retake = std::get<verdict::Retake>(verdict);
        const auto why = to_string(retake.reason);
        if (SessionStore::apply_retake(s, why, cap) == RetakeResult::Retake) {
          d = AuthDecision::make(K::RequestRetake, why);
          d.warning = retake.phishing_warning;
          d.remaining_retakes = cap - s.retakes;
        } else {
          d = AuthDecision::make(K::Fallback, why);
          d.warning = true;
        }
      }
      d.session_id = s.id;
      return d;
    });
  }

 private:
  // Pending with a session id means "found, carry on".
  AuthDecision lookup(std::string_view digits, std::optional<NetAddress> source) {
    using K = AuthDecision::Kind;
    const bool numeric = !digits.empty() && std::all_of(digits.begin(), digits.end(),
                                                         [](char ch) { return ch >= '0' && ch <= '9'; });
    if (!numeric) return AuthDecision::make(K::Deny, reason::kUnknownToken);
    const auto hit = store_.resolve_token(digits, source ? std::optional(source->str()) : std::nullopt);
    if (hit.status == LookupStatus::RateLimited) return AuthDecision::make(K::Deny, reason::kRateLimited);
    if (hit.status == LookupStatus::Unknown) return AuthDecision::make(K::Deny, reason::kUnknownToken);
    auto d = AuthDecision::make(K::Pending);
    d.session_id = hit.session->id;
    return d;
  }

  static std::optional<AuthDecision> from_terminal_state(const Session& s) {
    using K = AuthDecision::Kind;
    std::optional<AuthDecision> d;
    switch (s.state) {
      case SessionState::Authorized: d = AuthDecision::make(K::Authorize); break;
      case SessionState::Denied:
        d = AuthDecision::make(K::Deny, reason::kPhishingDetected);
        d->warning = true;
        break;
      case SessionState::FallbackOffered:
        d = AuthDecision::make(K::Fallback, reason::kFallback);
        d->warning = true;
        break;
      default: return std::nullopt;
    }
    d->session_id = s.id;
    return d;
  }

  bool colocated(const Session& s, const LinkClick& c) const {
    switch (config_.colocation.mode) {
      case ColocationPolicy::Mode::CookieEquality:
        return c.presented_cookie && *c.presented_cookie == s.cookie.value;
      case ColocationPolicy::Mode::IpEquality: return c.source_address == s.login_address;
      case ColocationPolicy::Mode::SameNetwork:
        return c.source_address.same_network(s.login_address, config_.colocation.prefix_length);
    }
    return false;
  }

  AuthDecision require_photo(const Session& s, const LinkClick& c) const {
    auto d = AuthDecision::make(AuthDecision::Kind::RequirePhoto);
    d.session_id = s.id;
    d.token = s.token;
    d.remaining_retakes = store_.config().retake_cap - s.retakes;
    // Login came from a phone browser but the click carries another cookie:
    // most likely the link was opened in a different browser on that phone.
    if (config_.colocation.mode == ColocationPolicy::Mode::CookieEquality &&
        s.login_channel == Channel::PhoneBrowser && c.presented_cookie != s.cookie.value) {
      d.advisory = "open the link in the same phone browser you used to log in";
    }
    return d;
  }

  SessionStore& store_;
  std::map<std::string, Preference> users_;
  AcceptSet accept_;
  EngineConfig config_;
  Notifier notify_;
};

}  // namespace photoauth
