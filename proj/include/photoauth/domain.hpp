#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "photoauth/error.hpp"
#include "photoauth/random.hpp"

namespace photoauth {

namespace detail {

inline bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline char ascii_lower(char c) noexcept {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

/// Strict UTF-8 decoder. Overlong forms, surrogates and truncated sequences
/// are rejected rather than replaced.
inline std::u32string decode_utf8(std::string_view in) {
  std::u32string out;
  std::size_t i = 0;
  auto bad = [] { return Error(ErrorCode::InvalidLabel, "malformed UTF-8"); };
  while (i < in.size()) {
    const auto lead = static_cast<unsigned char>(in[i]);
    std::size_t len;
    char32_t cp;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead & 0xe0) == 0xc0) {
      len = 2;
      cp = lead & 0x1f;
    } else if ((lead & 0xf0) == 0xe0) {
      len = 3;
      cp = lead & 0x0f;
    } else if ((lead & 0xf8) == 0xf0) {
      len = 4;
      cp = lead & 0x07;
    } else {
      throw bad();
    }
    if (i + len > in.size()) throw bad();
    for (std::size_t k = 1; k < len; ++k) {
      const auto cont = static_cast<unsigned char>(in[i + k]);
      if ((cont & 0xc0) != 0x80) throw bad();
      cp = (cp << 6) | (cont & 0x3f);
    }
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) throw bad();
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline std::string encode_utf8(std::u32string_view in) {
  std::string out;
  for (char32_t cp : in) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
      out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
  }
  return out;
}

}  // namespace detail

// Bootstring parameters for Punycode.
namespace punycode {

inline constexpr std::uint32_t kBase = 36;
inline constexpr std::uint32_t kTMin = 1;
inline constexpr std::uint32_t kTMax = 26;
inline constexpr std::uint32_t kSkew = 38;
inline constexpr std::uint32_t kDamp = 700;
inline constexpr std::uint32_t kInitialBias = 72;
inline constexpr std::uint32_t kInitialN = 0x80;
inline constexpr std::uint32_t kMaxInt = UINT32_MAX;

inline constexpr std::uint32_t adapt(std::uint32_t delta, std::uint32_t num_points, bool first_time) noexcept {
  delta = first_time ? delta / kDamp : delta / 2;
  delta += delta / num_points;
  std::uint32_t k = 0;
  while (delta > ((kBase - kTMin) * kTMax) / 2) {
    delta /= kBase - kTMin;
    k += kBase;
  }
  return k + (kBase - kTMin + 1) * delta / (delta + kSkew);
}

inline constexpr char encode_digit(std::uint32_t d) noexcept {
  return static_cast<char>(d < 26 ? 'a' + d : '0' + (d - 26));
}

inline constexpr std::uint32_t threshold(std::uint32_t k, std::uint32_t bias) noexcept {
  if (k <= bias) return kTMin;
  if (k >= bias + kTMax) return kTMax;
  return k - bias;
}

/// Raw bootstring encoding of a code point sequence (no "xn--" prefix).
inline std::string encode(std::u32string_view input) {
  std::string output;
  for (char32_t c : input) {
    if (c < 0x80) output.push_back(static_cast<char>(c));
  }
  const auto basic = static_cast<std::uint32_t>(output.size());
  std::uint32_t handled = basic;
  if (basic > 0) output.push_back('-');

  std::uint32_t n = kInitialN;
  std::uint32_t delta = 0;
  std::uint32_t bias = kInitialBias;
  auto overflow = [] { return Error(ErrorCode::EncodingOverflow, "punycode delta overflow"); };

  while (handled < input.size()) {
    std::uint32_t m = kMaxInt;
    for (char32_t c : input) {
      if (c >= n && c < m) m = c;
    }
    if (m - n > (kMaxInt - delta) / (handled + 1)) throw overflow();
    delta += (m - n) * (handled + 1);
    n = m;
    for (char32_t c : input) {
      if (c < n) {
        if (delta == kMaxInt) throw overflow();
        ++delta;
      }
      if (c == n) {
        std::uint32_t q = delta;
        for (std::uint32_t k = kBase;; k += kBase) {
          const std::uint32_t t = threshold(k, bias);
          if (q < t) break;
          output.push_back(encode_digit(t + (q - t) % (kBase - t)));
          q = (q - t) / (kBase - t);
        }
        output.push_back(encode_digit(q));
        bias = adapt(delta, handled + 1, handled == basic);
        delta = 0;
        ++handled;
      }
    }
    ++delta;
    ++n;
  }
  return output;
}

}  // namespace punycode

/// Converts one hostname label to its ASCII form. Pure-ASCII labels come
/// back lowercased; anything else is Punycode-encoded with the "xn--" prefix.
inline std::string to_punycode(std::string_view label) {
  if (label.empty()) throw Error(ErrorCode::InvalidLabel, "empty label");
  const bool ascii = std::all_of(label.begin(), label.end(),
                                 [](char c) { return static_cast<unsigned char>(c) < 0x80; });
  if (ascii) {
    std::string out(label);
    std::transform(out.begin(), out.end(), out.begin(), detail::ascii_lower);
    return out;
  }
  std::u32string points = detail::decode_utf8(label);
  for (auto& cp : points) {
    if (cp >= U'A' && cp <= U'Z') cp = cp - U'A' + U'a';
  }
  return "xn--" + punycode::encode(points);
}

namespace detail {

inline bool is_ldh_label(std::string_view label) noexcept {
  if (label.empty() || label.size() > 63) return false;
  if (label.front() == '-' || label.back() == '-') return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

}  // namespace detail

/// A normalized, ASCII-only hostname. Two DomainNames are equal exactly when
/// their label sequences are; the raw text they came from is kept only for
/// reporting.
class DomainName {
 public:
  static constexpr std::size_t kMaxLength = 253;

  /// Builds a domain from dot-separated text that is already a bare hostname
  /// (no scheme, port or path). Labels are normalized one by one.
  static DomainName from_host(std::string_view host, std::string original = {}) {
    if (host.empty()) throw Error(ErrorCode::NoHostname, "empty hostname");
    DomainName d;
    d.original_ = original.empty() ? std::string(host) : std::move(original);
    std::size_t start = 0;
    while (true) {
      const auto dot = host.find('.', start);
      const auto raw = host.substr(start, dot == std::string_view::npos ? host.size() - start : dot - start);
      if (raw.empty()) throw Error(ErrorCode::InvalidLabel, "empty label in '" + std::string(host) + "'");
      std::string label = to_punycode(raw);
      if (!detail::is_ldh_label(label)) {
        throw Error(ErrorCode::InvalidLabel, "label '" + label + "' is not letters/digits/hyphen");
      }
      d.labels_.push_back(std::move(label));
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    if (d.str().size() > kMaxLength) throw Error(ErrorCode::InvalidLabel, "hostname longer than 253 characters");
    return d;
  }

  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
  [[nodiscard]] const std::string& original_text() const noexcept { return original_; }

  [[nodiscard]] std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (i) out.push_back('.');
      out += labels_[i];
    }
    return out;
  }

  friend bool operator==(const DomainName& a, const DomainName& b) noexcept { return a.labels_ == b.labels_; }
  friend bool operator<(const DomainName& a, const DomainName& b) noexcept { return a.labels_ < b.labels_; }

 private:
  DomainName() = default;

  std::vector<std::string> labels_;
  std::string original_;
};

inline bool domains_equal(const DomainName& a, const DomainName& b) noexcept { return a == b; }

namespace detail {

inline bool is_scheme(std::string_view s) noexcept {
  if (s.empty()) return false;
  const char first = ascii_lower(s.front());
  if (first < 'a' || first > 'z') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    c = ascii_lower(c);
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
  });
}

inline DomainName parse_host_token(std::string_view token) {
  const std::string original(token);
  if (const auto sep = token.find("://"); sep != std::string_view::npos && is_scheme(token.substr(0, sep))) {
    token.remove_prefix(sep + 3);
  }
  if (const auto end = token.find_first_of("/?#\\"); end != std::string_view::npos) {
    token = token.substr(0, end);
  }
  if (const auto at = token.rfind('@'); at != std::string_view::npos) token.remove_prefix(at + 1);
  if (const auto colon = token.rfind(':'); colon != std::string_view::npos) {
    const auto port = token.substr(colon + 1);
    if (!std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw Error(ErrorCode::InvalidLabel, "bad port in '" + original + "'");
    }
    token = token.substr(0, colon);
  }
  if (!token.empty() && token.back() == '.') token.remove_suffix(1);
  if (token.empty()) throw Error(ErrorCode::NoHostname, "nothing left of '" + original + "'");
  // A bare word is never taken as a hostname: OCR of the address bar also
  // yields glyph runs such as "Not secure".
  if (token.find('.') == std::string_view::npos) {
    throw Error(ErrorCode::NoHostname, "'" + original + "' has no dot");
  }
  return DomainName::from_host(token, original);
}

}  // namespace detail

/// Pulls the hostname out of address-bar text. When the text splits into
/// several whitespace-separated runs, the first run that parses wins.
inline DomainName extract_hostname(std::string_view text) {
  const auto trimmed = detail::trim(text);
  if (trimmed.empty()) throw Error(ErrorCode::NoHostname, "empty address-bar text");

  std::optional<Error> first_error;
  std::size_t i = 0;
  while (i < trimmed.size()) {
    while (i < trimmed.size() && detail::is_ascii_space(trimmed[i])) ++i;
    std::size_t j = i;
    while (j < trimmed.size() && !detail::is_ascii_space(trimmed[j])) ++j;
    if (j > i) {
      try {
        return detail::parse_host_token(trimmed.substr(i, j - i));
      } catch (const Error& e) {
        if (!first_error || (first_error->code() == ErrorCode::NoHostname && e.code() != ErrorCode::NoHostname)) {
          first_error = e;
        }
      }
    }
    i = j;
  }
  throw *first_error;
}

/// One visual-confusion rule: `from` becomes `to`; an empty `to` drops the
/// character (the OCR missing-dot mode).
struct SubstitutionRule {
  char from;
  std::string to;

  friend bool operator==(const SubstitutionRule&, const SubstitutionRule&) = default;
};

using SubstitutionRules = std::vector<SubstitutionRule>;

/// o->0 and l->1, the usual typosquatting pair.
inline SubstitutionRules typosquat_rules() { return {{'o', "0"}, {'l', "1"}}; }

/// The recognition error modes seen in practice: o read as a, e or 0, l read
/// as 1, and a dropped dot.
inline SubstitutionRules ocr_error_rules() {
  return {{'o', "a"}, {'o', "e"}, {'o', "0"}, {'l', "1"}, {'.', ""}};
}

/// Parses rules, one per line: "o 0" substitutes, a lone "." drops.
/// Blank lines and lines starting with '#' are skipped.
inline SubstitutionRules parse_substitution_rules(std::string_view text) {
  SubstitutionRules rules;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields{std::string(body)};
    std::string from, to, extra;
    fields >> from >> to >> extra;
    if (from.size() != 1 || !extra.empty()) {
      throw Error(ErrorCode::ParseError, "rule line " + std::to_string(line_no) + ": expected '<char> [replacement]'");
    }
    rules.push_back({from[0], to});
  }
  return rules;
}

inline SubstitutionRules load_substitution_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open rules file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_substitution_rules(buf.str());
}

/// Deterministically applies `count` confusable substitutions at distinct
/// positions chosen by the seed. Used to build typosquatting corpora.
inline DomainName confusable_mutate(const DomainName& d, const SubstitutionRules& rules, std::uint64_t seed,
                                    std::size_t count = 1) {
  std::string text = d.str();
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (std::any_of(rules.begin(), rules.end(), [&](const auto& r) { return r.from == text[i]; })) {
      eligible.push_back(i);
    }
  }
  count = std::min(count, eligible.size());
  if (count == 0) return d;

  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    const auto pick = k + rng.below(eligible.size() - k);
    std::swap(eligible[k], eligible[pick]);
  }
  std::vector<std::size_t> chosen(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());

  std::vector<std::string> replacement(chosen.size());
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    std::vector<const SubstitutionRule*> options;
    for (const auto& r : rules) {
      if (r.from == text[chosen[k]]) options.push_back(&r);
    }
    replacement[k] = options[rng.below(options.size())]->to;
  }
  for (std::size_t k = chosen.size(); k-- > 0;) text.replace(chosen[k], 1, replacement[k]);
  return DomainName::from_host(text);
}

}  // namespace photoauth
