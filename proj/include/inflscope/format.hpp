#pragma once

#include <string>
#include <string_view>

namespace inflscope {

/// Report formatting: 12 significant digits, `-0` printed as `0`.
std::string format_number(double value);

/// Rounds to the value printed by format_number, so JSON emitters that print
/// shortest round-trip forms produce the same digits.
double round_to_report_precision(double value);

/// Shortest decimal representation that parses back to the same double.
std::string format_exact(double value);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

}  // namespace inflscope
