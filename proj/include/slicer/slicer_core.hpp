#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicer {

using CellIndex = std::int64_t;

/// The one-parameter family of slicer positions
///
///     l_j(alpha) = (|j| + 2^(1/alpha))^(-alpha),   j in Z.
///
/// l_0 is exactly 1/2 for every alpha and l_j decreases strictly in |j|.
class SlicerFamily {
 public:
  explicit SlicerFamily(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw std::invalid_argument("slicer family requires a finite alpha > 0, got " + std::to_string(alpha));
    }
    offset_ = std::exp2(1.0 / alpha);
  }

  [[nodiscard]] double alpha() const noexcept { return alpha_; }

  /// 2^(1/alpha), the shift inside the power law.
  [[nodiscard]] double offset() const noexcept { return offset_; }

  [[nodiscard]] double position(CellIndex j) const noexcept {
    if (j == 0) return 0.5;
    return std::pow(static_cast<double>(j < 0 ? -j : j) + offset_, -alpha_);
  }

  /// l_a - l_b for 0 <= a < b, evaluated without cancellation:
  /// l_b * expm1(alpha * log1p((b - a) / (a + offset))).
  [[nodiscard]] double position_drop(CellIndex a, CellIndex b) const noexcept {
    const double lower = static_cast<double>(a) + offset_;
    const double span = static_cast<double>(b - a);
    return position(b) * std::expm1(alpha_ * std::log1p(span / lower));
  }

  friend bool operator==(const SlicerFamily&, const SlicerFamily&) = default;

 private:
  double alpha_;
  double offset_{};
};

[[nodiscard]] inline double slicer_position(const SlicerFamily& family, CellIndex j) noexcept {
  return family.position(j);
}

/// l_0 ... l_max_index, for kernels that hit the same cells repeatedly.
[[nodiscard]] inline std::vector<double> slicer_table(const SlicerFamily& family, CellIndex max_index) {
  std::vector<double> table(static_cast<std::size_t>(max_index) + 1);
  for (CellIndex j = 0; j <= max_index; ++j) table[static_cast<std::size_t>(j)] = family.position(j);
  return table;
}

/// (x, m): internal coordinate x in [0,1] and cell index m.
struct LatticePoint {
  double x;
  CellIndex cell;

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

enum class Move : int { Left = -1, Right = +1 };

/// Routing rule for one cell whose slicer sits at `slicer`.
///
/// Left on [0, l) and (1/2, 1 - l); right on [l, 1/2] and [1 - l, 1].
/// Both breakpoints l and 1 - l route right.
[[nodiscard]] constexpr Move route(double x, double slicer) noexcept {
  if (x < slicer) return Move::Left;
  if (x > 0.5 && x < 1.0 - slicer) return Move::Left;
  return Move::Right;
}

/// Routing of the inverse map in a cell with slicer `slicer`; the mirror
/// image of route() under x -> 1 - x.
[[nodiscard]] constexpr Move route_inverse(double x, double slicer) noexcept {
  if (x > 1.0 - slicer) return Move::Left;
  if (x > slicer && x < 0.5) return Move::Left;
  return Move::Right;
}

[[nodiscard]] inline LatticePoint step(const SlicerFamily& family, LatticePoint p) noexcept {
  const auto move = route(p.x, family.position(p.cell));
  return {p.x, p.cell + static_cast<CellIndex>(move)};
}

/// Inverse turning rule: the direction is decided by the slicer of the
/// cell the point currently occupies.
///
/// This satisfies involution(step(p)) == step_inverse(involution(p)) for
/// every p. It undoes step() only where routing agrees between neighbouring
/// cells; see is_step_invertible_at().
[[nodiscard]] inline LatticePoint step_inverse(const SlicerFamily& family, LatticePoint p) noexcept {
  const auto move = route_inverse(p.x, family.position(p.cell));
  return {p.x, p.cell + static_cast<CellIndex>(move)};
}

/// True when step_inverse(step(p)) == p.
///
/// Because the slicers are symmetric in the cell index, step() is not
/// injective on the whole lattice: for alpha = 1, (0.4, 0) and (0.4, -2)
/// both land on (0.4, -1). The round trip holds on x < 1/2 with m >= 1 and
/// on x > 1/2 with m <= -1, and at scattered points elsewhere.
[[nodiscard]] inline bool is_step_invertible_at(const SlicerFamily& family, LatticePoint p) noexcept {
  return step_inverse(family, step(family, p)) == p;
}

[[nodiscard]] constexpr LatticePoint involution(LatticePoint p) noexcept { return {1.0 - p.x, p.cell}; }

/// Cell indices visited by p over n steps; n + 1 entries starting at p.cell.
[[nodiscard]] inline std::vector<CellIndex> coarse_trajectory(const SlicerFamily& family, LatticePoint p,
                                                              std::uint64_t n) {
  std::vector<CellIndex> cells;
  cells.reserve(n + 1);
  cells.push_back(p.cell);
  for (std::uint64_t k = 0; k < n; ++k) {
    p = step(family, p);
    cells.push_back(p.cell);
  }
  return cells;
}

/// True if x coincides with one of the three slicers of cell m.
[[nodiscard]] inline bool is_breakpoint(const SlicerFamily& family, LatticePoint p) noexcept {
  const double l = family.position(p.cell);
  return p.x == l || p.x == 0.5 || p.x == 1.0 - l;
}

}  // namespace slicer
