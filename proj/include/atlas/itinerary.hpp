#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"

namespace atlas {

// Element of the sequence space: a finite word (prepole), an eventually
// periodic word (Julia point), or the symbol infinity.
struct Itinerary {
  std::vector<int> preperiod;
  std::vector<int> period;
  bool is_infinity_terminal = false;

  static Itinerary infinity() { return Itinerary{{}, {}, true}; }
  static Itinerary finite(std::vector<int> w) { return Itinerary{std::move(w), {}, false}; }
  static Itinerary periodic(std::vector<int> w) { return Itinerary{{}, std::move(w), false}; }
  static Itinerary preperiodic(std::vector<int> pre, std::vector<int> per) {
    return Itinerary{std::move(pre), std::move(per), false};
  }

  bool is_finite_word() const { return !is_infinity_terminal && period.empty(); }
  bool is_periodic() const { return !is_infinity_terminal && preperiod.empty() && !period.empty(); }
  bool is_preperiodic() const { return !is_infinity_terminal && !preperiod.empty() && !period.empty(); }

  // k-th symbol (0-based) of the infinite expansion, or of the finite word.
  int symbol(std::size_t k) const {
    if (k < preperiod.size()) return preperiod[k];
    return period[(k - preperiod.size()) % period.size()];
  }

  Itinerary shift() const {
    if (is_infinity_terminal) return *this;
    if (!preperiod.empty()) {
      Itinerary out{{preperiod.begin() + 1, preperiod.end()}, period, false};
      if (out.preperiod.empty() && out.period.empty()) return infinity();
      return out;
    }
    if (period.empty()) return infinity();
    std::vector<int> rot(period.begin() + 1, period.end());
    rot.push_back(period.front());
    return periodic(std::move(rot));
  }

  bool operator==(const Itinerary&) const = default;

  std::string to_string() const {
    if (is_infinity_terminal) return "\xE2\x88\x9E";
    auto join = [](const std::vector<int>& w) {
      std::string out;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(w[i]);
      }
      return out;
    };
    if (period.empty()) return join(preperiod);
    return join(preperiod) + "|" + join(period);
  }
};

namespace detail {

inline std::vector<int> parse_symbols(std::string_view text, bool allow_empty) {
  std::vector<int> out;
  if (text.empty()) {
    if (allow_empty) return out;
    throw Error(Errc::ParseError, "empty word");
  }
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view tok = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    if (tok.empty()) throw Error(Errc::ParseError, "empty symbol");
    std::size_t i = 0;
    bool neg = false;
    if (tok[0] == '-' || tok[0] == '+') {
      neg = tok[0] == '-';
      i = 1;
    }
    if (i >= tok.size()) throw Error(Errc::ParseError, "bad symbol");
    long v = 0;
    for (; i < tok.size(); ++i) {
      if (tok[i] < '0' || tok[i] > '9') throw Error(Errc::ParseError, "bad symbol");
      v = v * 10 + (tok[i] - '0');
      if (v > 1000000) throw Error(Errc::ParseError, "symbol out of range");
    }
    out.push_back(static_cast<int>(neg ? -v : v));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

// "1,2|0" is preperiod (1,2) with period (0); "|0" is the periodic word 0 0 0...;
// "0" is a finite word; "inf" or the infinity sign is the infinity symbol.
inline Itinerary parse_itinerary(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text == "\xE2\x88\x9E" || text == "inf") return Itinerary::infinity();
  const std::size_t bar = text.find('|');
  if (bar == std::string_view::npos) return Itinerary::finite(detail::parse_symbols(text, false));
  if (text.find('|', bar + 1) != std::string_view::npos) throw Error(Errc::ParseError, "more than one '|'");
  auto pre = detail::parse_symbols(text.substr(0, bar), true);
  auto per = detail::parse_symbols(text.substr(bar + 1), false);
  return Itinerary::preperiodic(std::move(pre), std::move(per));
}

}  // namespace atlas
