#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "photoauth/domain.hpp"
#include "photoauth/error.hpp"
#include "photoauth/random.hpp"

namespace photoauth {

enum class Preference { Sms, Push, Email };
enum class Channel { PcBrowser, PhoneBrowser };

constexpr std::string_view to_string(Preference p) noexcept {
  switch (p) {
    case Preference::Sms: return "sms";
    case Preference::Push: return "push";
    case Preference::Email: return "email";
  }
  return "sms";
}

inline Preference preference_from_string(std::string_view s) {
  if (s == "sms") return Preference::Sms;
  if (s == "push") return Preference::Push;
  if (s == "email") return Preference::Email;
  throw Error(ErrorCode::ParseError, "unknown 2FA preference '" + std::string(s) + "'");
}

/// IPv4 address in host byte order.
class NetAddress {
 public:
  NetAddress() = default;
  explicit NetAddress(std::uint32_t bits) : bits_(bits) {}

  static NetAddress parse(std::string_view text) {
    std::uint32_t bits = 0;
    int parts = 0;
    std::size_t i = 0;
    while (parts < 4) {
      std::uint32_t octet = 0;
      std::size_t digits = 0;
      while (i < text.size() && text[i] >= '0' && text[i] <= '9' && digits < 3) {
        octet = octet * 10 + static_cast<std::uint32_t>(text[i] - '0');
        ++i;
        ++digits;
      }
      if (digits == 0 || octet > 255) break;
      bits = (bits << 8) | octet;
      ++parts;
      if (parts < 4) {
        if (i >= text.size() || text[i] != '.') break;
        ++i;
      }
    }
    if (parts != 4 || i != text.size()) {
      throw Error(ErrorCode::ParseError, "not an IPv4 address: '" + std::string(text) + "'");
    }
    return NetAddress(bits);
  }

  [[nodiscard]] std::uint32_t bits() const noexcept { return bits_; }

  [[nodiscard]] bool same_network(const NetAddress& other, int prefix_length) const noexcept {
    if (prefix_length <= 0) return true;
    if (prefix_length >= 32) return bits_ == other.bits_;
    const std::uint32_t mask = ~std::uint32_t{0} << (32 - prefix_length);
    return (bits_ & mask) == (other.bits_ & mask);
  }

  [[nodiscard]] std::string str() const {
    return std::to_string(bits_ >> 24) + "." + std::to_string((bits_ >> 16) & 0xff) + "." +
           std::to_string((bits_ >> 8) & 0xff) + "." + std::to_string(bits_ & 0xff);
  }

  friend bool operator==(const NetAddress&, const NetAddress&) = default;

 private:
  std::uint32_t bits_ = 0;
};

/// Web cookie issued at login. The value carries 128 random bits as 32
/// lowercase hex digits; anything else is syntactically invalid.
struct Cookie {
  static constexpr std::size_t kBytes = 16;

  std::string value;
  std::string origin;  // host that set it

  static bool well_formed(std::string_view v) noexcept {
    return v.size() == kBytes * 2 &&
           std::all_of(v.begin(), v.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
  }

  friend bool operator==(const Cookie&, const Cookie&) = default;
};

struct ShortLinkToken {
  std::string digits;

  static constexpr std::size_t kDefaultLength = 10;

  [[nodiscard]] std::string link(const DomainName& server) const { return server.str() + "/c/" + digits; }
  [[nodiscard]] std::string path() const { return "/c/" + digits; }

  friend bool operator==(const ShortLinkToken&, const ShortLinkToken&) = default;
};

enum class SessionState { CredentialsOk, LinkSent, AwaitingPhoto, Authorized, Denied, FallbackOffered };

constexpr std::string_view to_string(SessionState s) noexcept {
  switch (s) {
    case SessionState::CredentialsOk: return "credentials-ok";
    case SessionState::LinkSent: return "link-sent";
    case SessionState::AwaitingPhoto: return "awaiting-photo";
    case SessionState::Authorized: return "authorized";
    case SessionState::Denied: return "denied";
    case SessionState::FallbackOffered: return "fallback-offered";
  }
  return "unknown";
}

/// The lifecycle graph. Authorized, Denied and FallbackOffered are terminal.
constexpr bool can_transition(SessionState from, SessionState to) noexcept {
  using S = SessionState;
  switch (from) {
    case S::CredentialsOk: return to == S::LinkSent;
    case S::LinkSent: return to == S::Authorized || to == S::AwaitingPhoto;
    case S::AwaitingPhoto:
      return to == S::Authorized || to == S::Denied || to == S::AwaitingPhoto || to == S::FallbackOffered;
    default: return false;
  }
}

struct Session {
  std::string id;
  std::string username;
  Cookie cookie;
  std::optional<ShortLinkToken> token;
  Preference preference = Preference::Sms;
  Channel login_channel = Channel::PcBrowser;
  NetAddress login_address;
  SessionState state = SessionState::CredentialsOk;
  int retakes = 0;
  std::int64_t created_at_ms = 0;
  bool phishing_warned = false;

  void transition_to(SessionState next) {
    if (!can_transition(state, next)) {
      throw Error(ErrorCode::InvalidState, "session " + id + ": " + std::string(to_string(state)) + " -> " +
                                               std::string(to_string(next)) + " is not allowed");
    }
    state = next;
  }
};

/// Millisecond time source. The store never reads the wall clock itself.
using Clock = std::function<std::int64_t()>;

/// Hand-advanced clock for simulations and tests.
class ManualClock {
 public:
  [[nodiscard]] std::int64_t now() const noexcept { return now_->load(); }
  void advance(std::int64_t ms) noexcept { now_->fetch_add(ms); }
  [[nodiscard]] Clock clock() const {
    return [state = now_] { return state->load(); };
  }

 private:
  std::shared_ptr<std::atomic<std::int64_t>> now_ = std::make_shared<std::atomic<std::int64_t>>(0);
};

struct StoreConfig {
  std::int64_t session_ttl_ms = 300'000;
  int lookups_per_second = 10;  // per source address; 0 disables the limit
  int retake_cap = 5;
};

enum class LookupStatus { Found, Unknown, RateLimited };

struct TokenLookup {
  LookupStatus status = LookupStatus::Unknown;
  std::optional<Session> session;
};

enum class RetakeResult { Retake, Fallback };

/// Thread-safe home of all login sessions. Every operation takes the one
/// store mutex, so operations are linearizable; callers only ever see
/// snapshots and mutate through the store.
class SessionStore {
 public:
  SessionStore(DomainName origin, std::uint64_t seed, Clock clock, StoreConfig config = {})
      : origin_(std::move(origin)), rng_(seed), clock_(std::move(clock)), config_(config) {}

  [[nodiscard]] const DomainName& origin() const noexcept { return origin_; }
  [[nodiscard]] const StoreConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::int64_t now() const { return clock_(); }

  Session create_session(std::string username, Preference preference, Channel channel = Channel::PcBrowser,
                         NetAddress login_address = {}) {
    std::lock_guard lock(mutex_);
    Session s;
    do {
      s.id = rng_.hex(16);
    } while (sessions_.count(s.id));
    do {
      s.cookie = Cookie{rng_.hex(Cookie::kBytes), origin_.str()};
    } while (by_cookie_.count(s.cookie.value));
    s.username = std::move(username);
    s.preference = preference;
    s.login_channel = channel;
    s.login_address = login_address;
    s.created_at_ms = clock_();
    by_cookie_[s.cookie.value] = s.id;
    sessions_.emplace(s.id, s);
    return s;
  }

  ShortLinkToken issue_short_link(const std::string& id, std::size_t length = ShortLinkToken::kDefaultLength) {
    if (length < 6 || length > 12) throw Error(ErrorCode::InvalidArgument, "token length must be in [6, 12]");
    std::lock_guard lock(mutex_);
    Session& s = locked_get(id);
    if (s.state != SessionState::CredentialsOk) {
      throw Error(ErrorCode::InvalidState, "short link already issued for session " + id);
    }
    const auto now = clock_();
    ShortLinkToken token;
    while (true) {
      token.digits = rng_.digits(length);
      const auto it = by_token_.find(token.digits);
      if (it == by_token_.end()) break;
      if (expired(sessions_.at(it->second), now)) {
        by_token_.erase(it);
        break;
      }
    }
    s.transition_to(SessionState::LinkSent);
    s.token = token;
    by_token_[token.digits] = s.id;
    return token;
  }

  /// Exact-match token lookup. Expired sessions resolve as Unknown; a source
  /// exceeding its lookup budget gets RateLimited without a lookup.
  TokenLookup resolve_token(std::string_view digits, std::optional<std::string> source = std::nullopt) {
    std::lock_guard lock(mutex_);
    const auto now = clock_();
    if (source && !admit_lookup(*source, now)) return {LookupStatus::RateLimited, std::nullopt};
    const auto it = by_token_.find(std::string(digits));
    if (it == by_token_.end()) return {};
    const Session& s = sessions_.at(it->second);
    if (expired(s, now)) {
      by_token_.erase(it);
      return {};
    }
    return {LookupStatus::Found, s};
  }

  std::optional<Session> find_by_cookie(std::string_view value) const {
    std::lock_guard lock(mutex_);
    const auto it = by_cookie_.find(std::string(value));
    if (it == by_cookie_.end()) return std::nullopt;
    return sessions_.at(it->second);
  }

  std::optional<Session> get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
  }

  /// Runs `fn` on the live session under the store lock and returns its
  /// result. This is how read-decide-write sequences stay atomic.
  template <typename F>
  auto update(const std::string& id, F&& fn) -> decltype(fn(std::declval<Session&>())) {
    std::lock_guard lock(mutex_);
    return fn(locked_get(id));
  }

  RetakeResult record_retake(const std::string& id, std::string_view reason) {
    return update(id, [&](Session& s) { return apply_retake(s, reason, config_.retake_cap); });
  }

  static RetakeResult apply_retake(Session& s, std::string_view reason, int cap) {
    if (s.state != SessionState::AwaitingPhoto) {
      throw Error(ErrorCode::InvalidState, "retake recorded outside awaiting-photo");
    }
    if (reason == "multiple-addrbars") s.phishing_warned = true;
    if (s.retakes < cap) {
      ++s.retakes;
      s.transition_to(SessionState::AwaitingPhoto);
      return RetakeResult::Retake;
    }
    s.transition_to(SessionState::FallbackOffered);
    s.phishing_warned = true;
    return RetakeResult::Fallback;
  }

  [[nodiscard]] std::size_t size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
  }

  /// Token and cookie indexes point at sessions that own exactly those
  /// values, and no two sessions share a token.
  [[nodiscard]] bool check_invariants() const {
    std::lock_guard lock(mutex_);
    std::size_t tokened = 0;
    for (const auto& [id, s] : sessions_) {
      if (s.token) ++tokened;
      const bool has_token = s.token.has_value();
      const bool needs_token = s.state != SessionState::CredentialsOk;
      if (has_token != needs_token) return false;
      const auto c = by_cookie_.find(s.cookie.value);
      if (c == by_cookie_.end() || c->second != id) return false;
      if (s.retakes < 0 || s.retakes > config_.retake_cap) return false;
    }
    for (const auto& [digits, id] : by_token_) {
      const auto it = sessions_.find(id);
      if (it == sessions_.end() || !it->second.token || it->second.token->digits != digits) return false;
    }
    return by_token_.size() <= tokened && by_cookie_.size() == sessions_.size();
  }

 private:
  Session& locked_get(const std::string& id) {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::InvalidArgument, "no session " + id);
    return it->second;
  }

  [[nodiscard]] bool expired(const Session& s, std::int64_t now) const noexcept {
    return now - s.created_at_ms >= config_.session_ttl_ms;
  }

  bool admit_lookup(const std::string& source, std::int64_t now) {
    if (config_.lookups_per_second <= 0) return true;
    auto& window = lookups_[source];
    while (!window.empty() && now - window.front() >= 1000) window.pop_front();
    if (window.size() >= static_cast<std::size_t>(config_.lookups_per_second)) return false;
    window.push_back(now);
    return true;
  }

  DomainName origin_;
  mutable std::mutex mutex_;
  Rng rng_;
  Clock clock_;
  StoreConfig config_;
  std::map<std::string, Session> sessions_;
  std::unordered_map<std::string, std::string> by_token_;
  std::unordered_map<std::string, std::string> by_cookie_;
  std::unordered_map<std::string, std::deque<std::int64_t>> lookups_;
};

}  // namespace photoauth
