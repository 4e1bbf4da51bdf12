#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "photoauth/domain.hpp"
#include "photoauth/random.hpp"
#include "photoauth/verify.hpp"

namespace photoauth {

enum class Theme { Light, Dark };

enum class LayoutVariant { Genuine, TitleInjection, ContentInjection, PictureInPicture };

constexpr std::string_view to_string(Theme t) noexcept { return t == Theme::Dark ? "dark" : "light"; }

constexpr std::string_view to_string(LayoutVariant v) noexcept {
  switch (v) {
    case LayoutVariant::Genuine: return "genuine";
    case LayoutVariant::TitleInjection: return "title";
    case LayoutVariant::ContentInjection: return "content";
    case LayoutVariant::PictureInPicture: return "pip";
  }
  return "genuine";
}

/// A fake address bar drawn inside the page content.
struct PipInset {
  BoundingBox addrbar;
  TextRegion url;
};

/// Ground-truth geometry of one photographed browser window. Nothing is
/// rasterized; detectors are simulated directly from these boxes.
struct BrowserLayout {
  Resolution resolution;
  BoundingBox window;
  BoundingBox addrbar_truth;  // includes the navigation icon strip on the left
  TextRegion url;             // url.box lies inside addrbar_truth
  std::vector<TextRegion> titles;
  std::vector<TextRegion> contents;
  std::optional<PipInset> pip;
  Theme theme = Theme::Light;

  [[nodiscard]] std::size_t n_addrbars() const noexcept { return pip ? 2 : 1; }
  [[nodiscard]] const std::string& url_string() const noexcept { return url.text; }
};

struct LayoutRequest {
  std::string url;            // exactly what the address bar displays
  std::string injected_text;  // domain string planted by an injection variant
  Theme theme = Theme::Light;
  LayoutVariant variant = LayoutVariant::Genuine;
  Resolution resolution;
};

namespace detail {

inline BoundingBox text_box(double x, double y, double char_h, std::size_t chars, double max_w) {
  const double w = std::min(max_w, std::max(1.0, 0.5 * char_h * static_cast<double>(chars)));
  return BoundingBox(x, y, w, char_h);
}

}  // namespace detail

/// Generates one browser photo layout. The window is placed with a random
/// offset and size, the UI scale varies, and page elements are spread with
/// seeded jitter. Titles sit above the address bar and content below it with
/// a fixed gap, so neither can overlap the true bar.
///
/// Documented ranges, for a W x H photo:
///   window origin   x in [0, 0.08 W], y in [0, 0.08 H]
///   window size     85%..100% of the remaining width and height
///   UI scale        u = H/1080 * [0.9, 1.3]; tab strip 40u, address bar 34u
///   URL text        height 18u, 9u per character, 12u right of the 110u icon strip
inline BrowserLayout generate_layout(const LayoutRequest& req, std::uint64_t seed) {
  if (req.url.empty()) throw Error(ErrorCode::InvalidArgument, "layout needs a URL");
  Rng rng(seed);
  const double W = req.resolution.width;
  const double H = req.resolution.height;

  const double wx = rng.uniform(0.0, 0.08 * W);
  const double wy = rng.uniform(0.0, 0.08 * H);
  const double ww = (W - wx) * rng.uniform(0.85, 1.0);
  const double wh = (H - wy) * rng.uniform(0.85, 1.0);
  const double u = H / 1080.0 * rng.uniform(0.9, 1.3);

  BrowserLayout L{req.resolution,
                  BoundingBox(wx, wy, ww, wh),
                  BoundingBox(wx + 8 * u, wy + 45 * u, ww * rng.uniform(0.7, 0.85), 34 * u),
                  {BoundingBox(0, 0, 1, 1), req.url},
                  {},
                  {},
                  std::nullopt,
                  req.theme};
  const auto& bar = L.addrbar_truth;

  const double url_h = 18 * u;
  const double url_x = bar.x() + 110 * u + 12 * u;
  L.url.box = detail::text_box(url_x, bar.y() + (bar.height() - url_h) / 2, url_h, req.url.size(),
                               bar.right() - 12 * u - url_x);

  const bool inject_title = req.variant == LayoutVariant::TitleInjection;
  const std::string tab_title = inject_title ? req.injected_text : "Sign in to your account";
  const double title_h = 14 * u;
  L.titles.push_back({detail::text_box(wx + rng.uniform(24, 40) * u, wy + 13 * u, title_h, tab_title.size(), 230 * u),
                      tab_title});
  L.titles.push_back(
      {detail::text_box(wx + rng.uniform(280, 320) * u, wy + 13 * u, title_h, 9, 200 * u), "New tab"});

  std::vector<std::string> lines = {"Sign in", "Email, phone, or Skype", "No account? Create one!", "Next"};
  if (req.variant == LayoutVariant::ContentInjection) {
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(rng.below(lines.size() + 1)), req.injected_text);
  } else {
    rng.below(lines.size() + 1);
  }
  const double content_top = bar.bottom() + 30 * u;
  const double col_x = wx + ww * rng.uniform(0.1, 0.2);
  double y = content_top + rng.uniform(10, 40) * u;
  for (const auto& line : lines) {
    const double h = rng.uniform(16, 26) * u;
    if (y + h > H) break;
    L.contents.push_back({detail::text_box(col_x, y, h, line.size(), ww * 0.3), line});
    y += h + rng.uniform(14, 30) * u;
  }

  if (req.variant == LayoutVariant::PictureInPicture) {
    const double px = wx + ww * rng.uniform(0.5, 0.6);
    const double py = content_top + rng.uniform(20, 80) * u;
    const double pw = std::min(ww * 0.4, W - px - 1);
    const BoundingBox inset(px, py, pw, 34 * u);
    const double inset_url_x = px + 60 * u;
    L.pip = PipInset{inset,
                     {detail::text_box(inset_url_x, py + (34 * u - url_h) / 2, url_h, req.injected_text.size(),
                                       inset.right() - 8 * u - inset_url_x),
                      req.injected_text}};
  }
  return L;
}

inline BrowserLayout generate_layout(const DomainName& domain, Theme theme, LayoutVariant variant,
                                     std::uint64_t seed, std::string injected_text = {}) {
  return generate_layout(LayoutRequest{domain.str(), std::move(injected_text), theme, variant, Resolution{}}, seed);
}

struct OcrModel {
  bool oracle = true;
  double sub_rate = 0.002;
  double dot_drop_rate_dark = 0.05;
  bool split_url = false;
};

struct AddrbarModel {
  bool oracle = true;
  double jitter_px = 10.0;
  double cutoff_prob = 0.05;
  double miss_prob = 0.0;
  double spurious_prob = 0.0;
};

struct DetectorProfile {
  OcrModel ocr;
  AddrbarModel addrbar;
  std::uint64_t seed = 0;

  static DetectorProfile oracle(std::uint64_t seed = 0) { return {{}, {}, seed}; }

  /// Default noise magnitudes. They are configuration, not a calibration.
  static DetectorProfile noisy(std::uint64_t seed = 0) {
    DetectorProfile p;
    p.ocr.oracle = false;
    p.addrbar.oracle = false;
    p.seed = seed;
    return p;
  }

  void validate() const {
    auto rate = [](double r, const char* name) {
      if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be in [0,1]");
    };
    rate(ocr.sub_rate, "sub_rate");
    rate(ocr.dot_drop_rate_dark, "dot_drop_rate_dark");
    rate(addrbar.cutoff_prob, "cutoff_prob");
    rate(addrbar.miss_prob, "miss_prob");
    rate(addrbar.spurious_prob, "spurious_prob");
    if (!(addrbar.jitter_px >= 0.0)) throw Error(ErrorCode::InvalidArgument, "jitter_px must be >= 0");
  }
};

inline DetectorProfile detector_profile_from_json(const nlohmann::json& j) {
  try {
    DetectorProfile p;
    p.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("ocr") && j["ocr"].is_object()) {
      const auto& o = j["ocr"];
      p.ocr.oracle = false;
      p.ocr.sub_rate = o.value("sub_rate", p.ocr.sub_rate);
      p.ocr.dot_drop_rate_dark = o.value("dot_drop_rate_dark", p.ocr.dot_drop_rate_dark);
      p.ocr.split_url = o.value("split_url", p.ocr.split_url);
    } else if (j.contains("ocr") && j["ocr"] != "oracle") {
      throw Error(ErrorCode::ParseError, "ocr must be \"oracle\" or an object");
    }
    if (j.contains("addrbar") && j["addrbar"].is_object()) {
      const auto& a = j["addrbar"];
      p.addrbar.oracle = false;
      p.addrbar.jitter_px = a.value("jitter_px", p.addrbar.jitter_px);
      p.addrbar.cutoff_prob = a.value("cutoff_prob", p.addrbar.cutoff_prob);
      p.addrbar.miss_prob = a.value("miss_prob", p.addrbar.miss_prob);
      p.addrbar.spurious_prob = a.value("spurious_prob", p.addrbar.spurious_prob);
    } else if (j.contains("addrbar") && j["addrbar"] != "oracle") {
      throw Error(ErrorCode::ParseError, "addrbar must be \"oracle\" or an object");
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("detector profile: ") + e.what());
  }
}

inline nlohmann::json to_json(const DetectorProfile& p) {
  nlohmann::json j;
  j["seed"] = p.seed;
  if (p.ocr.oracle) {
    j["ocr"] = "oracle";
  } else {
    j["ocr"] = {{"sub_rate", p.ocr.sub_rate},
                {"dot_drop_rate_dark", p.ocr.dot_drop_rate_dark},
                {"split_url", p.ocr.split_url}};
  }
  if (p.addrbar.oracle) {
    j["addrbar"] = "oracle";
  } else {
    j["addrbar"] = {{"jitter_px", p.addrbar.jitter_px},
                    {"cutoff_prob", p.addrbar.cutoff_prob},
                    {"miss_prob", p.addrbar.miss_prob},
                    {"spurious_prob", p.addrbar.spurious_prob}};
  }
  return j;
}

namespace detail {

/// What a noisy recognizer may read each character as. o and l follow the
/// observed error modes; the rest are ordinary look-alikes so that every
/// character of a hostname can be misread. An empty entry drops the
/// character.
inline const std::vector<std::string>& confusions(char c) {
  static const std::array<std::vector<std::string>, 128> table = [] {
    std::array<std::vector<std::string>, 128> t{};
    auto set = [&t](char c, std::vector<std::string> v) { t[static_cast<unsigned char>(c)] = std::move(v); };
    set('a', {"o"});
    set('b', {"h", "6"});
    set('c', {"e"});
    set('d', {"o"});
    set('e', {"c"});
    set('f', {"t"});
    set('g', {"q", "9"});
    set('h', {"b"});
    set('i', {"l"});
    set('j', {"i"});
    set('k', {"x"});
    set('l', {"1"});
    set('m', {"n"});
    set('n', {"m"});
    set('o', {"a", "e", "0"});
    set('p', {"q"});
    set('q', {"g"});
    set('r', {"n"});
    set('s', {"5"});
    set('t', {"f"});
    set('u', {"v"});
    set('v', {"u"});
    set('w', {"v"});
    set('x', {"k"});
    set('y', {"v"});
    set('z', {"2"});
    set('0', {"o"});
    set('1', {"l"});
    set('2', {"z"});
    set('3', {"8"});
    set('4', {"a"});
    set('5', {"s"});
    set('6', {"b"});
    set('7', {"1"});
    set('8', {"3"});
    set('9', {"g"});
    set('-', {"_"});
    set('.', {""});
    return t;
  }();
  static const std::vector<std::string> none;
  const auto u = static_cast<unsigned char>(c);
  return u < 128 ? table[u] : none;
}

// Every character consumes the same two draws whether or not it is
// misread, so outputs for different rates stay coupled under one seed.
inline std::string misread(const std::string& text, double sub_rate, Rng& rng) {
  std::string out;
  for (char c : text) {
    const double roll = rng.uniform();
    const auto pick = rng.next_u64();
    const auto& options = confusions(c);
    if (roll < sub_rate && !options.empty()) {
      out += options[pick % options.size()];
    } else {
      out.push_back(c);
    }
  }
  return out;
}

inline BoundingBox clamp_box(double left, double top, double right, double bottom, const Resolution& res) {
  left = std::clamp(left, 0.0, res.width - 1.0);
  top = std::clamp(top, 0.0, res.height - 1.0);
  right = std::clamp(right, left + 1.0, static_cast<double>(res.width));
  bottom = std::clamp(bottom, top + 1.0, static_cast<double>(res.height));
  return BoundingBox::from_corners(left, top, right, bottom);
}

}  // namespace detail

/// Runs both detector channels over a layout. Oracle channels reproduce the
/// ground truth exactly; noisy ones inject the configured errors.
inline PhotoAnalysis simulate_detection(const BrowserLayout& layout, const DetectorProfile& profile) {
  profile.validate();
  PhotoAnalysis out;
  out.resolution = layout.resolution;

  Rng ocr_rng(derive_seed(profile.seed, 1));
  auto read = [&](const TextRegion& region) {
    return profile.ocr.oracle ? region.text : detail::misread(region.text, profile.ocr.sub_rate, ocr_rng);
  };

  // URL first, then the pip inset, titles and page content.
  std::string url = read(layout.url);
  if (!profile.ocr.oracle) {
    const double roll = ocr_rng.uniform();
    const auto www = url.find("www.");
    if (layout.theme == Theme::Dark && www != std::string::npos && roll < profile.ocr.dot_drop_rate_dark) {
      url.erase(www + 3, 1);
    }
  }
  const double split_at = ocr_rng.uniform(0.25, 0.75);
  if (!profile.ocr.oracle && profile.ocr.split_url && url.size() >= 2) {
    const auto cut = std::clamp<std::size_t>(static_cast<std::size_t>(url.size() * split_at), 1, url.size() - 1);
    const auto& b = layout.url.box;
    const double frac = static_cast<double>(cut) / static_cast<double>(url.size());
    out.texts.push_back({BoundingBox(b.x(), b.y(), b.width() * frac, b.height()), url.substr(0, cut)});
    out.texts.push_back(
        {BoundingBox(b.x() + b.width() * frac, b.y(), b.width() * (1 - frac), b.height()), url.substr(cut)});
  } else {
    out.texts.push_back({layout.url.box, url});
  }
  if (layout.pip) out.texts.push_back({layout.pip->url.box, read(layout.pip->url)});
  for (const auto& t : layout.titles) out.texts.push_back({t.box, read(t)});
  for (const auto& t : layout.contents) out.texts.push_back({t.box, read(t)});
  // Misreads can leave nothing behind (a lone dropped dot).
  std::erase_if(out.texts, [](const TextRegion& t) { return t.text.empty(); });

  std::vector<BoundingBox> truth{layout.addrbar_truth};
  if (layout.pip) truth.push_back(layout.pip->addrbar);

  if (profile.addrbar.oracle) {
    for (const auto& b : truth) out.addrbars.push_back({b, 1.0});
    return out;
  }

  const auto& m = profile.addrbar;
  Rng bar_rng(derive_seed(profile.seed, 2));
  for (const auto& b : truth) {
    const double miss_roll = bar_rng.uniform();
    const double cut_roll = bar_rng.uniform();
    const double keep = bar_rng.uniform(0.15, 0.5);
    const bool keep_top = bar_rng.chance(0.5);
    std::array<double, 4> jitter{};
    for (auto& j : jitter) j = bar_rng.uniform(-m.jitter_px, m.jitter_px);
    const double confidence = bar_rng.uniform(0.6, 1.0);
    if (miss_roll < m.miss_prob) continue;

    double top = b.y();
    double bottom = b.bottom();
    if (cut_roll < m.cutoff_prob) {
      if (keep_top) {
        bottom = top + b.height() * keep;
      } else {
        top = bottom - b.height() * keep;
      }
    }
    out.addrbars.push_back({detail::clamp_box(b.x() + jitter[0], top + jitter[1], b.right() + jitter[2],
                                              bottom + jitter[3], layout.resolution),
                            confidence});
  }

  const double spurious_roll = bar_rng.uniform();
  const double sw = bar_rng.uniform(200, 600);
  const double sh = bar_rng.uniform(20, 40);
  const double sx = bar_rng.uniform(0, std::max(0.0, layout.resolution.width - sw));
  const double sy = bar_rng.uniform(layout.addrbar_truth.bottom(), std::max(layout.addrbar_truth.bottom(),
                                                                            layout.resolution.height - sh));
  const double sconf = bar_rng.uniform(0.5, 1.0);
  if (spurious_roll < m.spurious_prob) {
    out.addrbars.push_back({detail::clamp_box(sx, sy, sx + sw, sy + sh, layout.resolution), sconf});
  }
  return out;
}

// Evaluation --------------------------------------------------------------

struct CorpusParams {
  std::vector<std::string> domains = {"microsoft.com", "www.google.com", "github.com", "www.amazon.com"};
  double dark_fraction = 0.5;
  LayoutVariant variant = LayoutVariant::Genuine;
  Resolution resolution;
  std::uint64_t seed = 0;
};

struct EvalCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t retakes = 0;
  std::size_t total = 0;
};

struct DetectionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalReport {
  std::optional<double> precision;  // undefined when nothing was recognized
  std::optional<double> recall;
  double retake_rate = 0.0;
  EvalCounts counts;
  DetectionCounts detection;  // address-bar boxes scored by IoU
};

inline nlohmann::json to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"precision", opt(r.precision)},
          {"recall", opt(r.recall)},
          {"retake_rate", r.retake_rate},
          {"counts",
           {{"tp", r.counts.tp},
            {"fp", r.counts.fp},
            {"fn", r.counts.fn},
            {"retakes", r.counts.retakes},
            {"total", r.counts.total}}},
          {"detection", {{"tp", r.detection.tp}, {"fp", r.detection.fp}, {"fn", r.detection.fn}}}};
}

struct CorpusItem {
  std::string domain;
  BrowserLayout layout;
  PhotoAnalysis analysis;
};

/// Item `i` of a corpus. Seeds derive from (corpus seed, i) alone, so items
/// can be produced in any order or in parallel.
inline CorpusItem corpus_item(std::size_t i, const CorpusParams& params, const DetectorProfile& profile) {
  if (params.domains.empty()) throw Error(ErrorCode::InvalidArgument, "corpus needs at least one domain");
  Rng rng(derive_seed(params.seed, i));
  const auto& domain = params.domains[rng.below(params.domains.size())];
  const Theme theme = rng.chance(params.dark_fraction) ? Theme::Dark : Theme::Light;
  const std::string injected = DomainName::from_host(domain).str();
  auto layout = generate_layout(LayoutRequest{domain, injected, theme, params.variant, params.resolution},
                                derive_seed(params.seed ^ 0x5eedULL, i));
  DetectorProfile item_profile = profile;
  item_profile.seed = derive_seed(profile.seed, i);
  auto analysis = simulate_detection(layout, item_profile);
  return {domain, std::move(layout), std::move(analysis)};
}

/// Layout -> detection -> verification over n photos. TP: bar found and the
/// hostname read correctly; FP: hostname read wrongly; FN: no bar found.
/// Anything short of a correct read counts as a retake.
inline EvalReport evaluate_corpus(std::size_t n, const CorpusParams& params, const DetectorProfile& profile,
                                  const VerifyConfig& cfg, const AcceptSet& accept, double iou_threshold = 0.5) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "corpus size must be at least 1");
  EvalReport r;
  r.counts.total = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto item = corpus_item(i, params, profile);
    const auto truth = DomainName::from_host(item.domain);

    const auto outcome = extract_domain(item.analysis, cfg);
    const auto verdict = verify_photo(item.analysis, accept, cfg);
    bool correct = false;
    if (const auto* d = std::get_if<outcome::Domain>(&outcome)) {
      correct = d->domain == truth && std::holds_alternative<verdict::Match>(verdict);
      ++(correct ? r.counts.tp : r.counts.fp);
    } else if (std::holds_alternative<outcome::NoAddressBar>(outcome)) {
      ++r.counts.fn;
    }
    if (!correct) ++r.counts.retakes;

    std::vector<BoundingBox> truth_bars{item.layout.addrbar_truth};
    if (item.layout.pip) truth_bars.push_back(item.layout.pip->addrbar);
    std::vector<bool> matched(truth_bars.size(), false);
    for (const auto& pred : item.analysis.addrbars) {
      if (pred.confidence < cfg.confidence_floor) continue;
      bool hit = false;
      for (std::size_t k = 0; k < truth_bars.size() && !hit; ++k) {
        if (!matched[k] && score_detection(pred, truth_bars[k], iou_threshold) == DetectionScore::TruePositive) {
          matched[k] = hit = true;
        }
      }
      ++(hit ? r.detection.tp : r.detection.fp);
    }
    r.detection.fn += static_cast<std::size_t>(std::count(matched.begin(), matched.end(), false));
  }
  if (r.counts.tp + r.counts.fp > 0) {
    r.precision = static_cast<double>(r.counts.tp) / static_cast<double>(r.counts.tp + r.counts.fp);
  }
  if (r.counts.tp + r.counts.fn > 0) {
    r.recall = static_cast<double>(r.counts.tp) / static_cast<double>(r.counts.tp + r.counts.fn);
  }
  r.retake_rate = static_cast<double>(r.counts.retakes) / static_cast<double>(n);
  return r;
}

/// Writes the corpus as JSON lines, one PhotoAnalysis record per photo, for
/// replay against the upload endpoint.
inline void write_corpus_jsonl(std::ostream& out, std::size_t n, const CorpusParams& params,
                               const DetectorProfile& profile) {
  for (std::size_t i = 0; i < n; ++i) {
    const auto item = corpus_item(i, params, profile);
    out << nlohmann::json{{"index", i}, {"domain", item.domain}, {"analysis", to_json(item.analysis)}}.dump()
        << '\n';
  }
}

/// Levenshtein distance: the character-level error count between what was
/// shown and what was read.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

struct HomographStressResult {
  std::size_t errors = 0;
  std::size_t characters = 0;
};

/// Typosquats each domain with the given rules, photographs it (light
/// theme) and counts character-level recognition errors in the URL read.
inline HomographStressResult homograph_stress(const std::vector<std::string>& domains, const SubstitutionRules& rules,
                                              const DetectorProfile& profile, std::uint64_t seed,
                                              std::size_t mutations_per_domain = 1) {
  if (domains.empty()) throw Error(ErrorCode::InvalidArgument, "homograph corpus is empty");
  HomographStressResult r;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const auto shown =
        confusable_mutate(DomainName::from_host(domains[i]), rules, derive_seed(seed, i), mutations_per_domain);
    const auto layout = generate_layout(shown, Theme::Light, LayoutVariant::Genuine, derive_seed(seed ^ 0xa11ceULL, i));
    DetectorProfile p = profile;
    p.seed = derive_seed(derive_seed(seed, profile.seed), i);
    p.ocr.split_url = false;
    const auto analysis = simulate_detection(layout, p);
    // The URL region is emitted first; an empty read was dropped entirely.
    const bool url_read = !analysis.texts.empty() && analysis.texts.front().box == layout.url.box;
    r.errors += edit_distance(layout.url.text, url_read ? analysis.texts.front().text : std::string{});
    r.characters += layout.url.text.size();
  }
  return r;
}

/// Fifty popular site hostnames, 527 characters in total.
inline const std::vector<std::string>& popular_domains() {
  static const std::vector<std::string> list = {
      "google.com", "youtube.com", "tmall.com", "baidu.com",
      "stackexchange.com", "sohu.com", "facebook.com", "taobao.com",
      "360.cn", "jd.com", "amazon.com", "yahoo.com",
      "wikipedia.org", "weibo.com", "sina.com.cn", "zoom.us",
      "xinhuanet.com", "live.com", "reddit.com", "netflix.com",
      "microsoft.com", "office.com", "instagram.com", "spotify.com",
      "zhanqi.tv", "alipay.com", "bing.com", "csdn.net",
      "salesforce.com", "myshopify.com", "naver.com", "okezone.com",
      "twitch.tv", "twitter.com", "ebay.com", "adobe.com",
      "tianya.cn", "huanqiu.com", "googleusercontent.com", "aliexpress.com",
      "linkedin.com", "force.com", "aparat.com", "mail.ru",
      "msn.com", "dropbox.com", "whatsapp.com", "apple.com",
      "stackoverflow.com", "wordpress.com"};
  return list;
}

}  // namespace photoauth
