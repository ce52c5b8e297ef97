#include "spheresteer/number_format.hpp"

#include "spheresteer/error.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace spheresteer {

std::string format_shortest(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string format_hex(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  std::array<char, 64> buf{};
  const bool negative = std::signbit(value);
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(value),
                                 std::chars_format::hex);
  std::string out = negative ? "-0x" : "0x";
  out.append(buf.data(), res.ptr);
  return out;
}

double parse_double(std::string_view text, std::string_view what) {
  const auto fail = [&] {
    throw Error(ErrorCode::ParseError,
                std::string(what) + ": '" + std::string(text) + "' is not a number");
  };
  if (text.empty()) fail();
  bool negative = false;
  std::string_view body = text;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  auto format = std::chars_format::general;
  if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
    body.remove_prefix(2);
    format = std::chars_format::hex;
  }
  if (body.empty() || body.front() == '-' || body.front() == '+') fail();
  double value = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), value, format);
  if (res.ec != std::errc() || res.ptr != body.data() + body.size()) fail();
  return negative ? -value : value;
}

}  // namespace spheresteer
