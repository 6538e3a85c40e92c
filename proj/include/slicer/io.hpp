#pragma once

#include <array>
#include <charconv>
#include <concepts>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>

namespace slicer {

/// Shortest-round-trip is not enough for golden files that must be stable
/// across platforms; reals are always written with 17 significant digits.
[[nodiscard]] inline std::string format_real(double value) {
  std::array<char, 40> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  if (ec != std::errc{}) return "nan";
  return {buf.data(), end};
}

/// Minimal CSV emitter: header row, comma separated, LF line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header) : os_(os) {
    bool first = true;
    for (auto name : header) {
      if (!first) os_ << ',';
      os_ << name;
      first = false;
    }
    os_ << '\n';
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((emit(fields, first)), ...);
    os_ << '\n';
  }

 private:
  template <typename T>
  void emit(const T& value, bool& first) {
    if (!first) os_ << ',';
    first = false;
    if constexpr (std::floating_point<T>) {
      os_ << format_real(static_cast<double>(value));
    } else {
      os_ << value;
    }
  }

  std::ostream& os_;
};

}  // namespace slicer
