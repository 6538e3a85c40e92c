#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace slicer {

/// `count` points geometrically spaced on [lo, hi], endpoints included.
[[nodiscard]] inline std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::domain_error("geometric grid needs 0 < lo <= hi");
  if (count < 2 || lo == hi) return {hi};
  std::vector<double> out(count);
  const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) out[k] = lo * std::exp(ratio * static_cast<double>(k));
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// Distinct integers approximately geometrically spaced on [lo, hi] with
/// `per_decade` points per factor of ten; lo and hi are always included.
[[nodiscard]] inline std::vector<std::uint64_t> geometric_integer_grid(std::uint64_t lo, std::uint64_t hi,
                                                                      std::size_t per_decade) {
  if (lo == 0 || hi < lo) throw std::domain_error("integer grid needs 1 <= lo <= hi");
  if (per_decade == 0) throw std::domain_error("integer grid needs at least one point per decade");
  const double decades = std::log10(static_cast<double>(hi) / static_cast<double>(lo));
  const auto count = static_cast<std::size_t>(std::ceil(decades * static_cast<double>(per_decade))) + 1;
  std::vector<std::uint64_t> out;
  for (double t : geometric_grid(static_cast<double>(lo), static_cast<double>(hi), count)) {
    out.push_back(std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::llround(t)), lo, hi));
  }
  out.push_back(hi);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace slicer
