#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace loro {

enum class ExtractError { NoNumber, OutOfRange, NoBracketNumber };

std::string extract_error_name(ExtractError e);

struct DiscreteExtraction {
  bool ok = false;
  int action = 0;  // 1-based external numbering
  ExtractError error = ExtractError::NoNumber;
};

// The last integer literal in the text, accepted only when it belongs to
// `valid_actions`. Digit runs that are part of a decimal number (either side
// of a '.') never match, so coordinates like 0.2095 are ignored.
DiscreteExtraction extract_discrete_action(std::string_view text,
                                           const std::vector<int>& valid_actions);

struct TorqueExtraction {
  bool ok = false;
  double torque = 0.0;  // clamped to [-2, 2]
  ExtractError error = ExtractError::NoBracketNumber;
};

// The last "<number>" bracket pair, clamped to [-2, 2].
TorqueExtraction extract_torque(std::string_view text);

}  // namespace loro
