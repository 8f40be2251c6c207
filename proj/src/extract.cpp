#include "loro/extract.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace loro {

std::string extract_error_name(ExtractError e) {
  switch (e) {
    case ExtractError::NoNumber: return "NoNumber";
    case ExtractError::OutOfRange: return "OutOfRange";
    case ExtractError::NoBracketNumber: return "NoBracketNumber";
  }
  return "Unknown";
}

DiscreteExtraction extract_discrete_action(std::string_view text,
                                           const std::vector<int>& valid_actions) {
  const auto is_digit = [](char c) { return c >= '0' && c <= '9'; };

  long long last_value = -1;
  bool found = false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && is_digit(text[i])) ++i;
    // part of a decimal literal? (digits on the far side of a '.')
    const bool frac_part = start > 0 && text[start - 1] == '.';
    const bool int_part_of_decimal = i < text.size() && text[i] == '.' && i + 1 < text.size() &&
                                     is_digit(text[i + 1]);
    if (frac_part || int_part_of_decimal) continue;
    const std::size_t len = i - start;
    if (len > 9) {
      last_value = -1;  // too large for any action list, but it is still "the last number"
      found = true;
      continue;
    }
    last_value = 0;
    for (std::size_t k = start; k < i; ++k) last_value = last_value * 10 + (text[k] - '0');
    found = true;
  }

  DiscreteExtraction r;
  if (!found) {
    r.error = ExtractError::NoNumber;
    return r;
  }
  if (std::find(valid_actions.begin(), valid_actions.end(), static_cast<int>(last_value)) ==
      valid_actions.end()) {
    r.error = ExtractError::OutOfRange;
    return r;
  }
  r.ok = true;
  r.action = static_cast<int>(last_value);
  return r;
}

TorqueExtraction extract_torque(std::string_view text) {
  TorqueExtraction r;
  std::size_t search_end = text.size();
  while (true) {
    const std::size_t close = text.rfind('>', search_end == 0 ? std::string_view::npos : search_end - 1);
    if (close == std::string_view::npos) break;
    const std::size_t open = text.rfind('<', close);
    if (open == std::string_view::npos) break;
    const std::string inner(text.substr(open + 1, close - open - 1));
    char* end = nullptr;
    const double value = std::strtod(inner.c_str(), &end);
    if (end != inner.c_str()) {
      // strtod skips leading whitespace; only whitespace may follow the number
      bool clean = true;
      for (const char* p = end; *p; ++p)
        if (!std::isspace(static_cast<unsigned char>(*p))) clean = false;
      if (clean) {
        r.ok = true;
        r.torque = std::clamp(value, -2.0, 2.0);
        return r;
      }
    }
    search_end = close;  // keep scanning towards the front
  }
  r.error = ExtractError::NoBracketNumber;
  return r;
}

}  // namespace loro
