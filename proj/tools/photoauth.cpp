// photoauth: command-line front end.
//
//   photoauth simulate <scenario.json> [--seed N] [--log FILE]
//   photoauth evaluate --n N --profile <p.json> [--seed N] [--variant V] [--corpus FILE]
//                      [--homograph-rules FILE]
//   photoauth serve --config <c.json>
//   photoauth attack <rtp|redirect|inject-title|inject-content|pip|otp-baseline> [--seed N]
//
// Reports go to stdout as JSON. Exit status is 0 when the outcome is the
// expected one, 1 when it is not and 2 on bad input.

#include <CLI11.hpp>
#include <httplib.h>

#include <cctype>
#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>

#include "photoauth/service.hpp"
#include "photoauth/simulator.hpp"
#include "photoauth/synth.hpp"

namespace {

using namespace photoauth;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, path + " is not valid JSON");
  return j;
}

int report(const ScenarioReport& r, const std::string& log_path) {
  if (!log_path.empty()) {
    std::ofstream out(log_path);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + log_path);
    for (const auto& line : r.log) out << line << '\n';
  }
  std::cout << to_json(r).dump(2) << '\n';
  return r.passed() ? 0 : 1;
}

LayoutVariant variant_from_string(const std::string& s) {
  for (auto v : {LayoutVariant::Genuine, LayoutVariant::TitleInjection, LayoutVariant::ContentInjection,
                 LayoutVariant::PictureInPicture}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::ParseError, "unknown variant '" + s + "'");
}

int serve(const std::string& config_path) {
  ServiceConfig cfg = config_path.empty() ? ServiceConfig{} : load_service_config(config_path);
  apply_env_overrides(cfg);
  std::mutex log_mutex;
  auto log = [&](const std::string& line) {
    std::lock_guard lock(log_mutex);
    std::cerr << line << '\n';
  };
  auto notify = [&](const Notification& n) {
    log(nlohmann::json{{"notification", n.text}, {"to", n.username}, {"channel", to_string(n.channel)}}.dump());
  };
  const auto start = std::chrono::steady_clock::now();
  Clock clock = [start] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  };
  Service service(cfg, clock, notify, log);

  httplib::Server http;
  auto bridge = [&service](const httplib::Request& req, httplib::Response& res) {
    WireRequest w{req.method, req.target, {}, req.body, req.remote_addr};
    for (const auto& [k, v] : req.headers) {
      std::string key = k;
      for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      w.headers[key] = v;
    }
    const WireResponse r = service.handle(w);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, "application/json");
  };
  http.Get(".*", bridge);
  http.Post(".*", bridge);
  http.Put(".*", bridge);
  http.Delete(".*", bridge);
  log(nlohmann::json{{"listening", cfg.port}, {"origin", cfg.server_domains.front()}}.dump());
  if (!http.listen("0.0.0.0", cfg.port)) {
    std::cerr << "photoauth: cannot listen on port " << cfg.port << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PhotoAuth second-factor engine: simulator, evaluator and server"};
  app.require_subcommand(1);

  std::string scenario_path, log_path;
  std::optional<std::uint64_t> seed;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario script");
  simulate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--log", log_path, "Write the message log as JSON lines");

  std::size_t n = 100;
  std::string profile_path, variant = "genuine", corpus_path, rules_path;
  double dark_fraction = 0.5;
  std::uint64_t eval_seed = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Score the verification pipeline on a synthetic corpus");
  evaluate->add_option("--n", n, "Number of photos")->check(CLI::PositiveNumber);
  evaluate->add_option("--profile", profile_path, "Detector profile JSON")->required();
  evaluate->add_option("--seed", eval_seed, "Corpus seed");
  evaluate->add_option("--variant", variant, "genuine | title | content | pip");
  evaluate->add_option("--dark-fraction", dark_fraction, "Share of dark-theme photos")->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--corpus", corpus_path, "Also export the corpus as JSON lines");
  evaluate->add_option("--homograph-rules", rules_path, "Also typosquat popular domains with these rules");

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP server");
  serve_cmd->add_option("--config", config_path, "Config JSON file");

  std::string attack_kind, fake = "microsoft1.com";
  std::uint64_t attack_seed = 1;
  auto* attack = app.add_subcommand("attack", "Run a built-in attack scenario");
  attack->add_option("kind", attack_kind, "rtp | redirect | inject-title | inject-content | pip | otp-baseline")
      ->required();
  attack->add_option("--seed", attack_seed, "Scenario seed");
  attack->add_option("--fake", fake, "Phishing domain for rtp");
  attack->add_option("--log", log_path, "Write the message log as JSON lines");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      Scenario sc = load_scenario(scenario_path);
      if (seed) sc.seed = *seed;
      return report(run_scenario(sc), log_path);
    }
    if (*evaluate) {
      CorpusParams params;
      params.seed = eval_seed;
      params.dark_fraction = dark_fraction;
      params.variant = variant_from_string(variant);
      const DetectorProfile profile = detector_profile_from_json(read_json(profile_path));
      ServiceConfig defaults;
      VerifyConfig cfg;
      cfg.cr_threshold = defaults.cr_threshold;
      cfg.confidence_floor = defaults.confidence_floor;
      AcceptSet accept;
      for (const auto& d : params.domains) accept.insert(DomainName::from_host(d));
      const EvalReport r = evaluate_corpus(n, params, profile, cfg, accept, defaults.iou_threshold);
      if (!corpus_path.empty()) {
        std::ofstream out(corpus_path);
        if (!out) throw Error(ErrorCode::ParseError, "cannot write " + corpus_path);
        write_corpus_jsonl(out, n, params, profile);
      }
      auto out = to_json(r);
      if (!rules_path.empty()) {
        const auto h = homograph_stress(popular_domains(), load_substitution_rules(rules_path), profile, eval_seed);
        out["homograph"] = {{"errors", h.errors}, {"characters", h.characters}};
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (*serve_cmd) return serve(config_path);
    if (*attack) {
      Scenario sc;
      if (attack_kind == "rtp") {
        sc = rtp_scenario(attack_seed, fake, DetectorProfile::oracle());
      } else if (attack_kind == "redirect") {
        sc = redirection_scenario(attack_seed);
      } else if (attack_kind == "inject-title") {
        sc = injection_scenario(attack_seed, InjectionPlacement::Title);
      } else if (attack_kind == "inject-content") {
        sc = injection_scenario(attack_seed, InjectionPlacement::PageContent);
      } else if (attack_kind == "pip") {
        sc = injection_scenario(attack_seed, InjectionPlacement::PictureInPicture);
      } else if (attack_kind == "otp-baseline") {
        sc = otp_baseline_scenario(attack_seed);
      } else {
        std::cerr << "photoauth: unknown attack '" << attack_kind << "'\n";
        return 2;
      }
      return report(run_scenario(sc), log_path);
    }
  } catch (const Error& e) {
    std::cerr << "photoauth: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
