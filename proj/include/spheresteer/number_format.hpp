#pragma once

#include <string>
#include <string_view>

namespace spheresteer {

/// Shortest decimal text that parses back to the same double.
std::string format_shortest(double value);

/// Hexadecimal float text such as "0x1.8p+0" or "-0x1p-3"; exact by construction.
std::string format_hex(double value);

/// Parses decimal or hexadecimal ("0x" prefixed, optionally signed) float text.
/// Throws ParseError naming `what` when the text is not a complete number.
double parse_double(std::string_view text, std::string_view what);

}  // namespace spheresteer
