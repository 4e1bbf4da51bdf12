// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "photoauth/service.hpp"
#include "photoauth/simulator.hpp"
#include "photoauth/synth.hpp"
#include "support/flowchart.hpp"
#include "support/generators.hpp"
#include "support/punycode_decode.hpp"
#include "support/raster.hpp"

namespace {

using namespace photoauth;

struct Check {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void run(const std::string& name, double budget_s, const std::function<Check()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  try {
    c = fn();
  } catch (const std::exception& e) {
    c = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0 && secs >= budget_s) {
    c.ok = false;
    c.detail += " (over the " + std::to_string(static_cast<int>(budget_s)) + " s budget)";
  }
  if (!c.ok) ++failures;
  std::printf("%s %s: %s [%.2f s]\n", c.ok ? "PASS" : "FAIL", name.c_str(), c.detail.c_str(), secs);
  std::fflush(stdout);
}

Check geometry_oracle() {
  Rng rng(424242);
  testsupport::Raster raster(200);
  constexpr int kCases = 10'000;
  int bad = 0;
  for (int i = 0; i < kCases; ++i) {
    const auto a = testsupport::random_int_box(rng, 200, 100);
    const auto b = testsupport::random_int_box(rng, 200, 100);
    const auto t = testsupport::raster_truth(raster, a, b);
    const BoundingBox fa(a.x, a.y, a.w, a.h), fb(b.x, b.y, b.w, b.h);
    if (std::abs(intersection_area(fa, fb) - t.inter) > 1e-9 || std::abs(iou(fa, fb) - t.iou) > 1e-9 ||
        std::abs(cover_rate(fa, fb) - t.cover) > 1e-9) {
      ++bad;
    }
  }
  return {bad == 0, std::to_string(kCases) + " box pairs vs pixel raster, " + std::to_string(bad) + " disagreements"};
}

Check punycode_round_trip() {
  const auto apple = to_punycode("аpple");
  Rng rng(1000);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto label = testsupport::random_unicode_label(rng);
    const auto enc = to_punycode(detail::encode_utf8(label));
    std::u32string expect = label;
    for (auto& c : expect) {
      if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
    }
    const auto dec = testsupport::punycode_decode(std::string_view(enc).substr(4));
    if (enc.rfind("xn--", 0) != 0 || !dec || *dec != expect) ++bad;
  }
  return {apple == "xn--pple-43d" && bad == 0,
          "\"аpple\" -> " + apple + ", 1000-label round trip failures: " + std::to_string(bad)};
}

Check cr_selection() {
  // Title 32/100, URL 99/100, three content lines outside the bar.
  PhotoAnalysis a;
  a.resolution = Resolution(1100, 1100);
  a.addrbars = {{BoundingBox(10, 100, 1000, 100), 0.9}};
  a.texts = {{BoundingBox(50, 32, 200, 100), "Sign in to microsoft.com"},
             {BoundingBox(200, 101, 300, 100), "https://microsoft1.com/login"},
             {BoundingBox(100, 300, 300, 60), "Sign in"},
             {BoundingBox(100, 400, 300, 60), "Next"},
             {BoundingBox(100, 500, 300, 60), "microsoft.com"}};
  std::ostringstream crs;
  for (const auto& t : a.texts) crs << cover_rate(t.box, a.addrbars[0].box) << " ";
  const auto out = extract_domain(a);
  const auto* d = std::get_if<outcome::Domain>(&out);
  const bool ok = d && d->region_index == 1 && d->domain.str() == "microsoft1.com";
  return {ok, "cover rates { " + crs.str() + "} -> region " + (d ? std::to_string(d->region_index) : "none")};
}

Check attack_suite() {
  constexpr std::uint64_t kSeeds = 100;
  const std::string homograph = extract_hostname("mісrosoft.com").str();
  struct Row {
    std::string name;
    std::function<ScenarioReport(std::uint64_t)> run;
  };
  const std::vector<Row> rows = {
      {"rtp-plain", [](std::uint64_t s) { return run_rtp_attack(s, "microsoft1.com"); }},
      {"rtp-homograph", [&](std::uint64_t s) { return run_rtp_attack(s, homograph); }},
      {"rtp-typosquat", [](std::uint64_t s) { return run_rtp_attack(s, "micros0ft.com"); }},
      {"redirect", [](std::uint64_t s) { return run_redirection_attack(s); }},
      {"title", [](std::uint64_t s) { return run_injection_attack(s, InjectionPlacement::Title); }},
      {"content", [](std::uint64_t s) { return run_injection_attack(s, InjectionPlacement::PageContent); }},
      {"pip", [](std::uint64_t s) { return run_injection_attack(s, InjectionPlacement::PictureInPicture); }},
  };
  bool ok = true;
  std::string detail;
  for (const auto& row : rows) {
    std::size_t adversary_auth = 0, unexpected = 0;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      const auto r = row.run(seed);
      adversary_auth += r.count("Authorize", "adversary");
      if (!r.passed()) ++unexpected;
      if (row.name == "pip") {
        bool pip_ok = r.count("Authorize") == 0 && r.count("RequestRetake") > 0 && r.count("Deny") == 0;
        for (const auto& e : r.trail) {
          if (e.decision == "RequestRetake" && (e.reason != "multiple-addrbars" || !e.warning)) pip_ok = false;
        }
        if (!pip_ok) ++unexpected;
      }
    }
    ok = ok && adversary_auth == 0 && unexpected == 0;
    detail += row.name + " " + std::to_string(adversary_auth) + "/" + std::to_string(unexpected) + "  ";
  }
  return {ok, detail + "(adversary authorizations / unexpected outcomes over 100 seeds each)"};
}

Check otp_baseline() {
  int authorized = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    if (run_otp_baseline(seed).outcome == "Authorized(adversary)") ++authorized;
  }
  return {authorized == 100, "adversary authorized in " + std::to_string(authorized) + "/100 seeds"};
}

// Each trial issues a fresh 10-digit token from the real store and lets the
// adversary try 10^4 distinct guesses. With rate limits sidestepped by a
// botnet, guess order does not matter, so a trial hits iff the token falls in
// a contiguous window of 10^4 values. Expected hits: 10^6 * 10^4 / 10^10 = 1.
Check token_guessing() {
  constexpr std::uint64_t kTrials = 1'000'000, kGuesses = 10'000, kSpace = 10'000'000'000ULL;
  constexpr std::uint64_t kPerStore = 10'000;
  Rng adversary(77);
  std::uint64_t hits = 0;
  for (std::uint64_t batch = 0; batch < kTrials / kPerStore; ++batch) {
    ManualClock clock;
    SessionStore store(DomainName::from_host("microsoft.com"), derive_seed(99, batch), clock.clock());
    for (std::uint64_t i = 0; i < kPerStore; ++i) {
      const auto s = store.create_session("bob", Preference::Sms);
      const std::uint64_t token = std::stoull(store.issue_short_link(s.id).digits);
      const std::uint64_t start = adversary.below(kSpace);
      if ((token + kSpace - start) % kSpace < kGuesses) ++hits;
    }
  }
  return {hits <= 10, std::to_string(hits) + " hits in 10^6 trials of 10^4 guesses (expected 1)"};
}

Check flowchart() {
  const auto r = testsupport::enumerate_flowchart();
  std::string detail = std::to_string(r.cells) + " cells, " + std::to_string(r.failures.size()) + " mismatches";
  if (!r.failures.empty()) detail += " (first: " + r.failures.front() + ")";
  return {r.failures.empty() && r.cells > 0, detail};
}

Check oracle_end_to_end() {
  CorpusParams params;
  params.seed = 2025;
  AcceptSet accept;
  for (const auto& d : params.domains) accept.insert(DomainName::from_host(d));
  const auto r = evaluate_corpus(1000, params, DetectorProfile::oracle(), VerifyConfig{}, accept);
  const bool ok = r.precision == 1.0 && r.recall == 1.0 && r.retake_rate == 0.0;
  return {ok, "1000 layouts: " + to_json(r).dump()};
}

Check retake_cap() {
  ManualClock clock;
  SessionStore store(DomainName::from_host("microsoft.com"), 5, clock.clock());
  Engine engine(store, {{"bob", Preference::Sms}}, make_accept_set({"microsoft.com"}));
  const auto login = engine.handle_auth_request({std::nullopt, "bob", {}, Channel::PcBrowser});
  engine.handle_link_click({login.token->digits, std::nullopt, {}});
  PhotoAnalysis two;
  two.addrbars = {{BoundingBox(100, 50, 1200, 40), 0.9}, {BoundingBox(100, 600, 800, 40), 0.9}};
  two.texts = {{BoundingBox(230, 60, 400, 18), "microsoft.com"}};
  int fallback_at = 0;
  for (int i = 1; i <= 10 && fallback_at == 0; ++i) {
    if (engine.handle_photo_submission(login.token->digits, two).kind == AuthDecision::Kind::Fallback) fallback_at = i;
  }
  return {fallback_at == 6, "cap 5: fallback on failed photo #" + std::to_string(fallback_at)};
}

Check determinism() {
  auto everything = [] {
    std::string out;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      for (const auto& r : {run_rtp_attack(seed, "microsoft1.com", DetectorProfile::noisy(seed)),
                            run_redirection_attack(seed), run_injection_attack(seed, InjectionPlacement::PictureInPicture),
                            run_benign_login(seed, DetectorProfile::noisy(seed)), run_otp_baseline(seed)}) {
        out += to_json(r).dump();
        for (const auto& l : r.log) out += l + "\n";
      }
    }
    CorpusParams params;
    params.seed = 8;
    AcceptSet accept;
    for (const auto& d : params.domains) accept.insert(DomainName::from_host(d));
    out += to_json(evaluate_corpus(200, params, DetectorProfile::noisy(4), VerifyConfig{}, accept)).dump();
    std::ostringstream corpus;
    write_corpus_jsonl(corpus, 50, params, DetectorProfile::noisy(4));
    return out + corpus.str();
  };
  const auto a = everything(), b = everything();
  return {a == b, std::to_string(a.size()) + " bytes of logs and reports, identical: " + (a == b ? "yes" : "no")};
}

Check homograph_statistics() {
  const auto& domains = popular_domains();
  std::size_t chars = 0;
  for (const auto& d : domains) chars += d.size();
  auto profile = DetectorProfile::noisy();
  profile.ocr.sub_rate = 1.0 / 527.0;
  profile.ocr.dot_drop_rate_dark = 0;
  profile.addrbar = AddrbarModel{};
  constexpr int kSeeds = 1000;
  double sum = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    sum += static_cast<double>(homograph_stress(domains, typosquat_rules(), profile, seed).errors);
  }
  const double mean = sum / kSeeds;
  // Errors per run are Binomial(527, 1/527): variance 527 p (1 - p).
  const double p = 1.0 / 527.0;
  const double sigma = std::sqrt(527.0 * p * (1 - p) / kSeeds);
  const bool ok = chars == 527 && std::abs(mean - 1.0) <= 3 * sigma;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu chars, mean errors %.4f over %d seeds, 3 sigma = %.4f", chars, mean, kSeeds,
                3 * sigma);
  return {ok, buf};
}

}  // namespace

int main() {
  run("geometry-oracle", 10, geometry_oracle);
  run("punycode", 0, punycode_round_trip);
  run("cr-selection", 0, cr_selection);
  run("attack-suite", 30, attack_suite);
  run("otp-baseline", 0, otp_baseline);
  run("token-guessing", 60, token_guessing);
  run("flowchart-totality", 0, flowchart);
  run("oracle-end-to-end", 0, oracle_end_to_end);
  run("retake-cap", 0, retake_cap);
  run("determinism", 0, determinism);
  run("homograph-statistics", 0, homograph_statistics);
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
