#include <gtest/gtest.h>

#include "photoauth/decision.hpp"
#include "support/flowchart.hpp"

namespace {

using namespace photoauth;
using K = AuthDecision::Kind;
using S = SessionState;

PhotoAnalysis photo(std::string_view url, int bars = 1) {
  PhotoAnalysis a;
  a.resolution = Resolution(1920, 1080);
  a.texts = {{BoundingBox(230, 60, 400, 18), std::string(url)}};
  for (int i = 0; i < bars; ++i) a.addrbars.push_back({BoundingBox(100, 50 + 500.0 * i, 1200, 40), 0.9});
  return a;
}

struct Harness {
  ManualClock clock;
  SessionStore store;
  Engine engine;
  std::vector<Notification> sent;

  explicit Harness(EngineConfig cfg = {}, StoreConfig store_cfg = {})
      : store(DomainName::from_host("microsoft.com"), 3, clock.clock(), store_cfg),
        engine(store, {{"bob", Preference::Sms}}, make_accept_set({"microsoft.com", "www.microsoft.com"}), cfg,
               [this](const Notification& n) { sent.push_back(n); }) {}

  AuthDecision login(Channel ch = Channel::PcBrowser, NetAddress from = {}) {
    return engine.handle_auth_request({std::nullopt, "bob", from, ch});
  }
  void force(const std::string& id, S state, int retakes = 0) {
    store.update(id, [&](Session& s) {
      s.state = state;
      s.retakes = retakes;
    });
  }
};

TEST(Flowchart, EveryCellMatchesTheTruthTable) {
  const auto r = testsupport::enumerate_flowchart();
  EXPECT_EQ(r.cells, 15u + 45u + 24u + 4u);
  for (const auto& f : r.failures) ADD_FAILURE() << f;
}

TEST(Flowchart, PhotoCellsMatchTruthTable) {
  struct Verdict {
    PhotoAnalysis analysis;
    K kind_below_cap;
    std::string reason;
    bool warning;
  };
  const std::vector<Verdict> verdicts = {
      {photo("https://microsoft.com/login"), K::Authorize, "", false},
      {photo("https://microsoft1.com/login"), K::Deny, "phishing-detected", true},
      {photo("Search or type a URL"), K::RequestRetake, "unreadable", false},
      {photo("https://microsoft.com/login", 2), K::RequestRetake, "multiple-addrbars", true},
  };
  for (const auto& v : verdicts) {
    for (int retakes : {0, 4, 5}) {
      Harness h;
      const auto first = h.login();
      h.force(*first.session_id, S::AwaitingPhoto, retakes);
      const auto d = h.engine.handle_photo_submission(first.token->digits, v.analysis);
      const bool retake = v.kind_below_cap == K::RequestRetake;
      const K expect = retake && retakes == 5 ? K::Fallback : v.kind_below_cap;
      ASSERT_EQ(d.kind, expect) << v.reason << " retakes=" << retakes;
      EXPECT_EQ(d.warning, expect == K::Fallback ? true : v.warning);
      if (!v.reason.empty()) { EXPECT_EQ(d.reason, v.reason); }
      if (expect == K::RequestRetake) { EXPECT_EQ(d.remaining_retakes, 5 - retakes - 1); }
      if (expect == K::Deny) { EXPECT_EQ(d.found_domain->str(), "microsoft1.com"); }
    }
  }
}

TEST(Flowchart, UnknownTokenPhoto) {
  Harness h;
  EXPECT_EQ(h.engine.handle_photo_submission("123456", photo("microsoft.com")).reason, reason::kUnknownToken);
}

TEST(Status, Cells) {
  Harness h;
  EXPECT_EQ(h.engine.check_status(std::nullopt).reason, reason::kNoValidCookie);
  EXPECT_EQ(h.engine.check_status("bad").kind, K::BadRequest);
  EXPECT_EQ(h.engine.check_status(std::string(32, 'a')).kind, K::Deny);
  const auto first = h.login();
  const auto pending = h.engine.check_status(first.set_cookie->value);
  EXPECT_EQ(pending.kind, K::Pending);
  EXPECT_EQ(pending.reason, "link-sent");
  h.engine.handle_link_click({first.token->digits, first.set_cookie->value, {}});
  EXPECT_EQ(h.engine.check_status(first.set_cookie->value).kind, K::Authorize);
}

TEST(Colocation, SameNetworkPolicy) {
  EngineConfig cfg;
  cfg.colocation = ColocationPolicy::same_network(24);
  Harness h(cfg);
  const auto first = h.login(Channel::PcBrowser, NetAddress::parse("192.0.2.10"));
  EXPECT_EQ(h.engine.handle_link_click({first.token->digits, std::nullopt, NetAddress::parse("192.0.2.77")}).kind,
            K::Authorize);

  Harness far(cfg);
  const auto second = far.login(Channel::PcBrowser, NetAddress::parse("192.0.2.10"));
  EXPECT_EQ(far.engine.handle_link_click({second.token->digits, std::nullopt, NetAddress::parse("198.51.100.7")}).kind,
            K::RequirePhoto);
}

TEST(Colocation, IpEqualityPolicy) {
  EngineConfig cfg;
  cfg.colocation = ColocationPolicy::ip();
  Harness h(cfg);
  const auto first = h.login(Channel::PcBrowser, NetAddress::parse("192.0.2.10"));
  EXPECT_EQ(h.engine.handle_link_click({first.token->digits, std::nullopt, NetAddress::parse("192.0.2.77")}).kind,
            K::RequirePhoto);
  Harness same(cfg);
  const auto second = same.login(Channel::PcBrowser, NetAddress::parse("192.0.2.10"));
  EXPECT_EQ(same.engine.handle_link_click({second.token->digits, std::nullopt, NetAddress::parse("192.0.2.10")}).kind,
            K::Authorize);
}

TEST(Colocation, ModeNames) {
  for (auto m : {ColocationPolicy::Mode::CookieEquality, ColocationPolicy::Mode::IpEquality,
                 ColocationPolicy::Mode::SameNetwork}) {
    EXPECT_EQ(colocation_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(colocation_mode_from_string("dns"), Error);
}

TEST(Advisory, PhoneLoginClickedFromAnotherBrowser) {
  Harness h;
  const auto first = h.login(Channel::PhoneBrowser);
  const auto d = h.engine.handle_link_click({first.token->digits, std::nullopt, {}});
  EXPECT_EQ(d.kind, K::RequirePhoto);
  EXPECT_FALSE(d.advisory.empty());

  Harness pc;
  const auto second = pc.login(Channel::PcBrowser);
  EXPECT_TRUE(pc.engine.handle_link_click({second.token->digits, std::nullopt, {}}).advisory.empty());

  Harness same;
  const auto third = same.login(Channel::PhoneBrowser);
  EXPECT_EQ(same.engine.handle_link_click({third.token->digits, third.set_cookie->value, {}}).kind, K::Authorize);
}

TEST(Idempotence, RepeatedClicksAndStatusGiveTheSameAnswer) {
  Harness h;
  const auto first = h.login();
  const LinkClick same{first.token->digits, first.set_cookie->value, {}};
  EXPECT_EQ(h.engine.handle_link_click(same).kind, K::Authorize);
  EXPECT_EQ(h.engine.handle_link_click(same).kind, K::Authorize);
  EXPECT_EQ(h.engine.handle_link_click({first.token->digits, std::nullopt, {}}).kind, K::Authorize);

  Harness p;
  const auto second = p.login();
  const LinkClick other{second.token->digits, std::nullopt, {}};
  EXPECT_EQ(p.engine.handle_link_click(other).kind, K::RequirePhoto);
  EXPECT_EQ(p.engine.handle_link_click(other).kind, K::RequirePhoto);
  EXPECT_EQ(p.store.get(*second.session_id)->retakes, 0);
}

TEST(EngineConfig, RejectsEmptyAcceptSetAndBadVerifyConfig) {
  ManualClock clock;
  SessionStore store(DomainName::from_host("microsoft.com"), 1, clock.clock());
  EXPECT_THROW(Engine(store, {}, {}), Error);
  EngineConfig cfg;
  cfg.verify.cr_threshold = 2.0;
  EXPECT_THROW(Engine(store, {}, make_accept_set({"microsoft.com"}), cfg), Error);
}

// A session that ever received a Mismatch verdict is never authorized later,
// whatever arrives afterwards.
TEST(DecisionProperty, MismatchIsNeverFollowedByAuthorize) {
  const std::vector<PhotoAnalysis> pool = {photo("microsoft.com"), photo("microsoft1.com"), photo("Sign in"),
                                           photo("microsoft.com", 2), photo("wwwmicrosoft.com")};
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    Harness h;
    const auto first = h.login();
    ASSERT_EQ(h.engine.handle_link_click({first.token->digits, std::nullopt, {}}).kind, K::RequirePhoto);
    bool mismatched = false;
    for (int step = 0; step < 10; ++step) {
      const auto& a = pool[rng.below(pool.size())];
      const auto before = h.store.get(*first.session_id)->state;
      if (before != S::AwaitingPhoto) {
        const auto click = h.engine.handle_link_click({first.token->digits, std::nullopt, {}});
        if (mismatched) { ASSERT_NE(click.kind, K::Authorize); }
        continue;
      }
      const auto d = h.engine.handle_photo_submission(first.token->digits, a);
      if (mismatched) { ASSERT_NE(d.kind, K::Authorize); }
      if (d.kind == K::Deny) mismatched = true;
      if (d.kind == K::Authorize) { ASSERT_EQ(&a - pool.data(), 0); }
    }
    ASSERT_TRUE(h.store.check_invariants());
  }
}

}  // namespace
