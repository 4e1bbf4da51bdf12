#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "photoauth/domain.hpp"
#include "photoauth/geometry.hpp"

namespace photoauth {

/// One OCR output: a line of text and where it sits in the photo.
struct TextRegion {
  BoundingBox box;
  std::string text;
};

/// One address-bar detection with its confidence score.
struct AddressBarPrediction {
  BoundingBox box;
  double confidence = 1.0;
};

/// Detector outputs for a single photo. This is what the phone uploads in
/// place of pixels.
struct PhotoAnalysis {
  Resolution resolution;
  std::vector<TextRegion> texts;
  std::vector<AddressBarPrediction> addrbars;

  void validate() const {
    for (const auto& t : texts) {
      if (t.text.empty()) throw Error(ErrorCode::InvalidArgument, "text region with empty text");
      if (!t.box.within(resolution)) throw Error(ErrorCode::BoxOutOfBounds, "text region outside photo");
    }
    for (const auto& a : addrbars) {
      if (!(a.confidence >= 0.0 && a.confidence <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "address-bar confidence outside [0,1]");
      }
      if (!a.box.within(resolution)) throw Error(ErrorCode::BoxOutOfBounds, "address bar outside photo");
    }
  }
};

struct VerifyConfig {
  double cr_threshold = 0.8;
  double confidence_floor = 0.5;
  // Hostnames that equal an accepted one once the dot after a leading "www"
  // is restored are the known dark-mode OCR miss; they earn a retake rather
  // than a phishing verdict.
  bool retake_on_dropped_www_dot = true;

  static constexpr std::size_t kMaxAddressBars = 1;

  void validate() const {
    if (!(cr_threshold > 0.0 && cr_threshold <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "cr_threshold must be in (0,1]");
    }
    if (!(confidence_floor > 0.0 && confidence_floor <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "confidence_floor must be in (0,1]");
    }
  }
};

namespace outcome {
struct Domain {
  DomainName domain;
  double cover_rate;
  std::size_t region_index;  // index into PhotoAnalysis::texts
};
struct MultipleAddressBars {
  std::size_t count;
};
struct NoAddressBar {};
struct NoQualifyingText {};
}  // namespace outcome

using ExtractionOutcome =
    std::variant<outcome::Domain, outcome::MultipleAddressBars, outcome::NoAddressBar, outcome::NoQualifyingText>;

/// Locates the address-bar URL among the OCR regions and parses its
/// hostname. Steps, in order: drop low-confidence bars, insist on exactly
/// one bar, keep texts whose cover rate reaches the threshold, take the best
/// one (cover rate, then larger area, then leftmost, then topmost).
inline ExtractionOutcome extract_domain(const PhotoAnalysis& analysis, const VerifyConfig& cfg = {}) {
  std::vector<const AddressBarPrediction*> bars;
  for (const auto& a : analysis.addrbars) {
    if (a.confidence >= cfg.confidence_floor) bars.push_back(&a);
  }
  if (bars.size() > VerifyConfig::kMaxAddressBars) return outcome::MultipleAddressBars{bars.size()};
  if (bars.empty()) return outcome::NoAddressBar{};

  const BoundingBox& bar = bars.front()->box;
  std::optional<std::size_t> best;
  double best_cr = 0.0;
  for (std::size_t i = 0; i < analysis.texts.size(); ++i) {
    const auto& box = analysis.texts[i].box;
    const double cr = cover_rate(box, bar);
    if (cr < cfg.cr_threshold) continue;
    if (!best) {
      best = i;
      best_cr = cr;
      continue;
    }
    const auto& cur = analysis.texts[*best].box;
    const bool better = cr != best_cr      ? cr > best_cr
                        : area(box) != area(cur) ? area(box) > area(cur)
                        : box.x() != cur.x()     ? box.x() < cur.x()
                                                 : box.y() < cur.y();
    if (better) {
      best = i;
      best_cr = cr;
    }
  }
  if (!best) return outcome::NoQualifyingText{};

  try {
    return outcome::Domain{extract_hostname(analysis.texts[*best].text), best_cr, *best};
  } catch (const Error&) {
    return outcome::NoQualifyingText{};
  }
}

enum class RetakeReason { MultipleAddressBars, Unreadable, LowQuality };

constexpr std::string_view to_string(RetakeReason r) noexcept {
  switch (r) {
    case RetakeReason::MultipleAddressBars: return "multiple-addrbars";
    case RetakeReason::Unreadable: return "unreadable";
    case RetakeReason::LowQuality: return "low-quality";
  }
  return "unreadable";
}

namespace verdict {
struct Match {
  DomainName domain;
};
struct Mismatch {
  DomainName found;
};
struct Retake {
  RetakeReason reason;
  bool phishing_warning;
};
}  // namespace verdict

using VerifyResult = std::variant<verdict::Match, verdict::Mismatch, verdict::Retake>;

using AcceptSet = std::set<DomainName>;

inline AcceptSet make_accept_set(std::initializer_list<std::string_view> hosts) {
  AcceptSet out;
  for (auto h : hosts) out.insert(DomainName::from_host(h));
  return out;
}

namespace detail {

inline bool is_dropped_www_dot(const DomainName& found, const AcceptSet& accept) {
  const auto& first = found.labels().front();
  if (first.size() <= 3 || first.compare(0, 3, "www") != 0) return false;
  try {
    return accept.count(DomainName::from_host("www." + found.str().substr(3))) > 0;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

inline VerifyResult verify_photo(const PhotoAnalysis& analysis, const AcceptSet& accept, const VerifyConfig& cfg = {}) {
  if (accept.empty()) throw Error(ErrorCode::InvalidArgument, "accept set must not be empty");
  const auto extracted = extract_domain(analysis, cfg);
  if (std::holds_alternative<outcome::MultipleAddressBars>(extracted)) {
    return verdict::Retake{RetakeReason::MultipleAddressBars, true};
  }
  const auto* found = std::get_if<outcome::Domain>(&extracted);
  if (!found) return verdict::Retake{RetakeReason::Unreadable, false};
  if (accept.count(found->domain)) return verdict::Match{found->domain};
  if (cfg.retake_on_dropped_www_dot && detail::is_dropped_www_dot(found->domain, accept)) {
    return verdict::Retake{RetakeReason::Unreadable, false};
  }
  return verdict::Mismatch{found->domain};
}

enum class DetectionScore { TruePositive, FalsePositive };

inline DetectionScore score_detection(const AddressBarPrediction& pred, const BoundingBox& truth,
                                      double iou_threshold = 0.5) {
  return iou(pred.box, truth) >= iou_threshold ? DetectionScore::TruePositive : DetectionScore::FalsePositive;
}

/// Moves every box of an analysis into the target resolution (uniform
/// scale, aspect kept). Cover rates and IoU are unchanged by this.
inline PhotoAnalysis rescale_analysis(const PhotoAnalysis& a, const Resolution& to) {
  PhotoAnalysis out;
  out.resolution = to;
  for (const auto& t : a.texts) out.texts.push_back({rescale_box(t.box, a.resolution, to), t.text});
  for (const auto& b : a.addrbars) out.addrbars.push_back({rescale_box(b.box, a.resolution, to), b.confidence});
  return out;
}

// Wire format -------------------------------------------------------------

inline nlohmann::json to_json(const PhotoAnalysis& a) {
  nlohmann::json j;
  j["resolution"] = {{"w", a.resolution.width}, {"h", a.resolution.height}};
  j["texts"] = nlohmann::json::array();
  for (const auto& t : a.texts) {
    j["texts"].push_back(
        {{"x", t.box.x()}, {"y", t.box.y()}, {"w", t.box.width()}, {"h", t.box.height()}, {"text", t.text}});
  }
  j["addrbars"] = nlohmann::json::array();
  for (const auto& b : a.addrbars) {
    j["addrbars"].push_back({{"x", b.box.x()},
                             {"y", b.box.y()},
                             {"w", b.box.width()},
                             {"h", b.box.height()},
                             {"confidence", b.confidence}});
  }
  return j;
}

/// Parses and validates an uploaded analysis. Any schema violation becomes
/// a ParseError; geometric violations keep their own codes.
inline PhotoAnalysis photo_analysis_from_json(const nlohmann::json& j) {
  try {
    PhotoAnalysis a;
    const auto& res = j.at("resolution");
    a.resolution = Resolution(res.at("w").get<int>(), res.at("h").get<int>());
    auto box_of = [](const nlohmann::json& e) {
      return BoundingBox(e.at("x").get<double>(), e.at("y").get<double>(), e.at("w").get<double>(),
                         e.at("h").get<double>());
    };
    for (const auto& e : j.value("texts", nlohmann::json::array())) {
      a.texts.push_back({box_of(e), e.at("text").get<std::string>()});
    }
    for (const auto& e : j.value("addrbars", nlohmann::json::array())) {
      a.addrbars.push_back({box_of(e), e.value("confidence", 1.0)});
    }
    a.validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("photo analysis: ") + e.what());
  }
}

}  // namespace photoauth
