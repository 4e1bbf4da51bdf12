#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "photoauth/session.hpp"

namespace {

using namespace photoauth;
using S = SessionState;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

struct Fixture {
  ManualClock clock;
  SessionStore store;
  explicit Fixture(StoreConfig cfg = {}, std::uint64_t seed = 1)
      : store(DomainName::from_host("microsoft.com"), seed, clock.clock(), cfg) {}

  std::string awaiting_photo() {
    const auto s = store.create_session("bob", Preference::Sms);
    store.issue_short_link(s.id);
    store.update(s.id, [](Session& x) { x.transition_to(S::AwaitingPhoto); });
    return s.id;
  }
};

TEST(Lifecycle, TransitionTableMatchesTheGraph) {
  const std::vector<S> all = {S::CredentialsOk, S::LinkSent, S::AwaitingPhoto, S::Authorized, S::Denied,
                              S::FallbackOffered};
  const std::set<std::pair<S, S>> edges = {
      {S::CredentialsOk, S::LinkSent},     {S::LinkSent, S::Authorized},      {S::LinkSent, S::AwaitingPhoto},
      {S::AwaitingPhoto, S::Authorized},   {S::AwaitingPhoto, S::Denied},     {S::AwaitingPhoto, S::AwaitingPhoto},
      {S::AwaitingPhoto, S::FallbackOffered}};
  for (auto from : all) {
    for (auto to : all) {
      EXPECT_EQ(can_transition(from, to), edges.count({from, to}) == 1)
          << to_string(from) << " -> " << to_string(to);
    }
  }
}

TEST(Lifecycle, IllegalTransitionThrows) {
  Session s;
  s.id = "x";
  EXPECT_EQ(code_of([&] { s.transition_to(S::Authorized); }), ErrorCode::InvalidState);
  s.transition_to(S::LinkSent);
  s.transition_to(S::Authorized);
  EXPECT_EQ(code_of([&] { s.transition_to(S::AwaitingPhoto); }), ErrorCode::InvalidState);
}

TEST(SessionStore, CreateGivesDistinctWellFormedCookies) {
  Fixture f;
  const auto a = f.store.create_session("bob", Preference::Sms);
  const auto b = f.store.create_session("bob", Preference::Sms);
  EXPECT_NE(a.cookie, b.cookie);
  EXPECT_NE(a.id, b.id);
  EXPECT_TRUE(Cookie::well_formed(a.cookie.value));
  EXPECT_EQ(a.cookie.origin, "microsoft.com");
  EXPECT_EQ(a.state, S::CredentialsOk);
  EXPECT_FALSE(a.token);
}

TEST(SessionStore, HundredThousandCookiesAreUnique) {
  Fixture f({.session_ttl_ms = 300'000, .lookups_per_second = 10, .retake_cap = 5});
  std::set<std::string> cookies, ids;
  for (int i = 0; i < 100'000; ++i) {
    const auto s = f.store.create_session("u", Preference::Push);
    cookies.insert(s.cookie.value);
    ids.insert(s.id);
  }
  EXPECT_EQ(cookies.size(), 100'000u);
  EXPECT_EQ(ids.size(), 100'000u);
  EXPECT_TRUE(f.store.check_invariants());
}

TEST(Cookie, WellFormed) {
  EXPECT_TRUE(Cookie::well_formed(std::string(32, 'a')));
  EXPECT_FALSE(Cookie::well_formed(std::string(31, 'a')));
  EXPECT_FALSE(Cookie::well_formed(std::string(32, 'A')));
  EXPECT_FALSE(Cookie::well_formed(std::string(32, 'g')));
  EXPECT_FALSE(Cookie::well_formed(""));
}

TEST(ShortLink, LengthsAndLink) {
  Fixture f;
  for (std::size_t len : {6u, 10u, 12u}) {
    const auto s = f.store.create_session("bob", Preference::Sms);
    const auto t = f.store.issue_short_link(s.id, len);
    EXPECT_EQ(t.digits.size(), len);
    EXPECT_TRUE(std::all_of(t.digits.begin(), t.digits.end(), [](char c) { return c >= '0' && c <= '9'; }));
    EXPECT_EQ(t.link(f.store.origin()), "microsoft.com/c/" + t.digits);
    EXPECT_EQ(f.store.get(s.id)->state, S::LinkSent);
  }
  const auto s = f.store.create_session("bob", Preference::Sms);
  EXPECT_EQ(code_of([&] { f.store.issue_short_link(s.id, 5); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { f.store.issue_short_link(s.id, 13); }), ErrorCode::InvalidArgument);
}

TEST(ShortLink, IssuingTwiceIsInvalidState) {
  Fixture f;
  const auto s = f.store.create_session("bob", Preference::Sms);
  f.store.issue_short_link(s.id);
  EXPECT_EQ(code_of([&] { f.store.issue_short_link(s.id); }), ErrorCode::InvalidState);
  EXPECT_EQ(code_of([&] { f.store.issue_short_link("nope"); }), ErrorCode::InvalidArgument);
}

TEST(ShortLink, TenThousandLiveTokensAreUnique) {
  Fixture f({.session_ttl_ms = 300'000, .lookups_per_second = 0, .retake_cap = 5});
  std::set<std::string> tokens;
  for (int i = 0; i < 10'000; ++i) {
    const auto s = f.store.create_session("bob", Preference::Sms);
    // Six digits: collisions are likely among 10k draws, and must be retried.
    tokens.insert(f.store.issue_short_link(s.id, 6).digits);
  }
  EXPECT_EQ(tokens.size(), 10'000u);
  EXPECT_TRUE(f.store.check_invariants());
}

TEST(ResolveToken, FoundUnknownAndExpired) {
  Fixture f;
  const auto s = f.store.create_session("bob", Preference::Sms);
  const auto t = f.store.issue_short_link(s.id);
  EXPECT_EQ(f.store.resolve_token(t.digits).status, LookupStatus::Found);
  EXPECT_EQ(f.store.resolve_token(t.digits).session->id, s.id);
  EXPECT_EQ(f.store.resolve_token("0000000000").status, LookupStatus::Unknown);
  EXPECT_EQ(f.store.resolve_token(t.digits.substr(1)).status, LookupStatus::Unknown);

  f.clock.advance(299'999);
  EXPECT_EQ(f.store.resolve_token(t.digits).status, LookupStatus::Found);
  f.clock.advance(1);
  EXPECT_EQ(f.store.resolve_token(t.digits).status, LookupStatus::Unknown);
  EXPECT_TRUE(f.store.check_invariants());
}

TEST(ResolveToken, RateLimitPerSourceWithSlidingWindow) {
  Fixture f;
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(f.store.resolve_token("123", "10.0.0.1").status, LookupStatus::Unknown);
    f.clock.advance(10);
  }
  EXPECT_EQ(f.store.resolve_token("123", "10.0.0.1").status, LookupStatus::RateLimited);
  // Other sources are unaffected; lookups without a source are not counted.
  EXPECT_EQ(f.store.resolve_token("123", "10.0.0.2").status, LookupStatus::Unknown);
  EXPECT_EQ(f.store.resolve_token("123").status, LookupStatus::Unknown);
  // The first lookup was at t=0; at t=1000 it leaves the window.
  f.clock.advance(1000 - 100);
  EXPECT_EQ(f.store.resolve_token("123", "10.0.0.1").status, LookupStatus::Unknown);
  EXPECT_EQ(f.store.resolve_token("123", "10.0.0.1").status, LookupStatus::RateLimited);
}

TEST(ResolveToken, ZeroDisablesRateLimit) {
  Fixture f({.session_ttl_ms = 300'000, .lookups_per_second = 0, .retake_cap = 5});
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(f.store.resolve_token("1", "10.0.0.1").status, LookupStatus::Unknown);
}

TEST(Retake, FallbackAtTheSixthWithCapFive) {
  Fixture f;
  const auto id = f.awaiting_photo();
  for (int i = 1; i <= 5; ++i) {
    ASSERT_EQ(f.store.record_retake(id, "unreadable"), RetakeResult::Retake) << i;
    ASSERT_EQ(f.store.get(id)->retakes, i);
    ASSERT_EQ(f.store.get(id)->state, S::AwaitingPhoto);
  }
  EXPECT_EQ(f.store.record_retake(id, "unreadable"), RetakeResult::Fallback);
  EXPECT_EQ(f.store.get(id)->state, S::FallbackOffered);
  EXPECT_TRUE(f.store.get(id)->phishing_warned);
  EXPECT_EQ(code_of([&] { f.store.record_retake(id, "unreadable"); }), ErrorCode::InvalidState);
}

TEST(Retake, CapsFromZeroToSeven) {
  for (int cap = 0; cap <= 7; ++cap) {
    Fixture f({.session_ttl_ms = 300'000, .lookups_per_second = 10, .retake_cap = cap});
    const auto id = f.awaiting_photo();
    int retakes = 0;
    while (f.store.record_retake(id, "unreadable") == RetakeResult::Retake) ++retakes;
    EXPECT_EQ(retakes, cap);
    EXPECT_TRUE(f.store.check_invariants());
  }
}

TEST(Retake, MultipleAddressBarsWarns) {
  Fixture f;
  const auto id = f.awaiting_photo();
  f.store.record_retake(id, "unreadable");
  EXPECT_FALSE(f.store.get(id)->phishing_warned);
  f.store.record_retake(id, "multiple-addrbars");
  EXPECT_TRUE(f.store.get(id)->phishing_warned);
}

TEST(Retake, OutsideAwaitingPhotoIsInvalidState) {
  Fixture f;
  const auto s = f.store.create_session("bob", Preference::Sms);
  EXPECT_EQ(code_of([&] { f.store.record_retake(s.id, "unreadable"); }), ErrorCode::InvalidState);
}

TEST(NetAddress, ParseAndNetworks) {
  const auto a = NetAddress::parse("192.0.2.10");
  EXPECT_EQ(a.str(), "192.0.2.10");
  EXPECT_TRUE(a.same_network(NetAddress::parse("192.0.2.77"), 24));
  EXPECT_FALSE(a.same_network(NetAddress::parse("192.0.3.10"), 24));
  EXPECT_TRUE(a.same_network(NetAddress::parse("192.0.3.10"), 16));
  EXPECT_FALSE(a.same_network(NetAddress::parse("192.0.2.11"), 32));
  for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "256.1.1.1", "1.2.3.x", "1..2.3", "::1"}) {
    EXPECT_EQ(code_of([&] { NetAddress::parse(bad); }), ErrorCode::ParseError) << bad;
  }
}

TEST(SessionStoreStress, ConcurrentOperationsKeepInvariants) {
  Fixture f({.session_ttl_ms = 300'000, .lookups_per_second = 0, .retake_cap = 3});
  constexpr int kThreads = 8, kPerThread = 500;
  std::vector<std::thread> threads;
  std::atomic<int> fallbacks{0};
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      Rng rng(static_cast<std::uint64_t>(t));
      for (int i = 0; i < kPerThread; ++i) {
        const auto s = f.store.create_session("u" + std::to_string(t), Preference::Sms);
        const auto tok = f.store.issue_short_link(s.id, 6);
        const auto hit = f.store.resolve_token(tok.digits);
        if (hit.status != LookupStatus::Found || hit.session->id != s.id) std::abort();
        if (rng.chance(0.5)) {
          f.store.update(s.id, [](Session& x) { x.transition_to(S::AwaitingPhoto); });
          while (f.store.record_retake(s.id, "unreadable") == RetakeResult::Retake) {
          }
          ++fallbacks;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(f.store.size(), static_cast<std::size_t>(kThreads * kPerThread));
  EXPECT_GT(fallbacks.load(), 0);
  EXPECT_TRUE(f.store.check_invariants());
}

}  // namespace
