#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "slicer/compensated_sum.hpp"
#include "slicer/io.hpp"
#include "slicer/slicer_core.hpp"

namespace slicer {

/// Endpoint of an occupied interval, carried as a symbol plus its value.
///
/// Ordering is by value first; symbols that share a value (Half and L(0),
/// or L(j) and L(-j)) are then ordered by kind and index so comparisons stay
/// total and consistent.
class SymbolicEndpoint {
 public:
  enum class Kind : std::uint8_t { Zero, Half, One, L, OneMinusL };

  [[nodiscard]] static SymbolicEndpoint zero() { return {Kind::Zero, 0, 0.0}; }
  [[nodiscard]] static SymbolicEndpoint half() { return {Kind::Half, 0, 0.5}; }
  [[nodiscard]] static SymbolicEndpoint one() { return {Kind::One, 0, 1.0}; }
  [[nodiscard]] static SymbolicEndpoint slicer(const SlicerFamily& f, CellIndex j) {
    return {Kind::L, j, f.position(j)};
  }
  [[nodiscard]] static SymbolicEndpoint mirrored_slicer(const SlicerFamily& f, CellIndex j) {
    return {Kind::OneMinusL, j, 1.0 - f.position(j)};
  }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] CellIndex index() const noexcept { return index_; }
  [[nodiscard]] double value() const noexcept { return value_; }

  /// The same point with redundant spellings folded: L(j) == L(-j), and
  /// L(0) == 1 - L(0) == Half because l_0 = 1/2 exactly.
  [[nodiscard]] SymbolicEndpoint canonical() const noexcept {
    SymbolicEndpoint c = *this;
    if (c.kind_ == Kind::L || c.kind_ == Kind::OneMinusL) {
      if (c.index_ < 0) c.index_ = -c.index_;
      if (c.index_ == 0) c = half();
    }
    return c;
  }

  friend bool operator==(const SymbolicEndpoint& a, const SymbolicEndpoint& b) noexcept {
    return a.kind_ == b.kind_ && a.index_ == b.index_;
  }
  friend std::strong_ordering operator<=>(const SymbolicEndpoint& a, const SymbolicEndpoint& b) noexcept {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::tie(a.kind_, a.index_) <=> std::tie(b.kind_, b.index_);
  }

  friend std::ostream& operator<<(std::ostream& os, const SymbolicEndpoint& e) {
    switch (e.kind_) {
      case Kind::Zero: return os << "0";
      case Kind::Half: return os << "1/2";
      case Kind::One: return os << "1";
      case Kind::L: return os << "L(" << e.index_ << ")";
      case Kind::OneMinusL: return os << "1-L(" << e.index_ << ")";
    }
    return os;
  }

 private:
  SymbolicEndpoint(Kind kind, CellIndex index, double value) : kind_(kind), index_(index), value_(value) {}

  Kind kind_;
  CellIndex index_;
  double value_;
};

/// Half-open interval [lo, hi) with symbolic bounds.
struct SymbolicInterval {
  SymbolicEndpoint lo;
  SymbolicEndpoint hi;

  [[nodiscard]] double length() const noexcept { return hi.value() - lo.value(); }
  [[nodiscard]] bool empty() const noexcept { return !(lo.value() < hi.value()); }
};

/// Sorted, disjoint, non-empty half-open intervals inside [0,1).
class IntervalSet {
 public:
  IntervalSet() = default;

  [[nodiscard]] static IntervalSet unit() {
    IntervalSet s;
    s.intervals_.push_back({SymbolicEndpoint::zero(), SymbolicEndpoint::one()});
    return s;
  }

  /// Builds a set from arbitrary pieces: drops empty ones, sorts, and merges
  /// neighbours whose touching endpoints share a value. Throws if pieces
  /// overlap.
  [[nodiscard]] static IntervalSet from_pieces(std::vector<SymbolicInterval> pieces) {
    std::erase_if(pieces, [](const SymbolicInterval& i) { return i.empty(); });
    std::sort(pieces.begin(), pieces.end(),
              [](const SymbolicInterval& a, const SymbolicInterval& b) { return a.lo < b.lo; });
    IntervalSet s;
    for (const auto& piece : pieces) {
      if (!s.intervals_.empty()) {
        auto& last = s.intervals_.back();
        if (piece.lo.value() < last.hi.value()) {
          throw std::logic_error("overlapping intervals in one cell");
        }
        if (piece.lo.value() == last.hi.value()) {
          last.hi = piece.hi;
          continue;
        }
      }
      s.intervals_.push_back(piece);
    }
    return s;
  }

  [[nodiscard]] const std::vector<SymbolicInterval>& intervals() const noexcept { return intervals_; }
  [[nodiscard]] bool empty() const noexcept { return intervals_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return intervals_.size(); }

  [[nodiscard]] double length() const noexcept {
    CompensatedSum<double> acc;
    for (const auto& i : intervals_) acc.add(i.length());
    return acc.value();
  }

 private:
  std::vector<SymbolicInterval> intervals_;
};

/// Exact image of the uniform measure on cell 0 after `time` steps.
class CellOccupancy {
 public:
  using CellMap = std::map<CellIndex, IntervalSet>;

  CellOccupancy(std::uint64_t time, CellMap cells) : time_(time), cells_(std::move(cells)) {}

  [[nodiscard]] std::uint64_t time() const noexcept { return time_; }
  [[nodiscard]] const CellMap& cells() const noexcept { return cells_; }

  [[nodiscard]] std::size_t interval_count() const noexcept {
    std::size_t count = 0;
    for (const auto& [cell, set] : cells_) count += set.size();
    return count;
  }

 private:
  std::uint64_t time_;
  CellMap cells_;
};

[[nodiscard]] inline CellOccupancy uniform_initial() {
  CellOccupancy::CellMap cells;
  cells.emplace(0, IntervalSet::unit());
  return {0, std::move(cells)};
}

namespace detail {

[[nodiscard]] inline const SymbolicEndpoint& max_endpoint(const SymbolicEndpoint& a, const SymbolicEndpoint& b) {
  return a < b ? b : a;
}
[[nodiscard]] inline const SymbolicEndpoint& min_endpoint(const SymbolicEndpoint& a, const SymbolicEndpoint& b) {
  return b < a ? b : a;
}

}  // namespace detail

/// One application of the slicer map to every occupied interval.
///
/// Cell m is cut at L(m), 1/2 and 1 - L(m). [0, L) and [1/2, 1 - L) move to
/// m - 1, [L, 1/2) and [1 - L, 1) move to m + 1; pieces arriving in the same
/// cell are merged.
[[nodiscard]] inline CellOccupancy evolve_occupancy(const SlicerFamily& family, const CellOccupancy& occ) {
  std::map<CellIndex, std::vector<SymbolicInterval>> arriving;
  for (const auto& [cell, set] : occ.cells()) {
    const auto zero = SymbolicEndpoint::zero();
    const auto l = SymbolicEndpoint::slicer(family, cell);
    const auto half = SymbolicEndpoint::half();
    const auto ml = SymbolicEndpoint::mirrored_slicer(family, cell);
    const auto one = SymbolicEndpoint::one();
    const std::pair<SymbolicInterval, CellIndex> regions[] = {
        {{zero, l}, cell - 1},
        {{l, half}, cell + 1},
        {{half, ml}, cell - 1},
        {{ml, one}, cell + 1},
    };
    for (const auto& interval : set.intervals()) {
      for (const auto& [region, target] : regions) {
        SymbolicInterval piece{detail::max_endpoint(interval.lo, region.lo),
                               detail::min_endpoint(interval.hi, region.hi)};
        if (!piece.empty()) arriving[target].push_back(piece);
      }
    }
  }

  CellOccupancy::CellMap cells;
  for (auto& [cell, pieces] : arriving) {
    auto set = IntervalSet::from_pieces(std::move(pieces));
    if (!set.empty()) cells.emplace(cell, std::move(set));
  }
  return {occ.time() + 1, std::move(cells)};
}

[[nodiscard]] inline CellOccupancy evolve_occupancy(const SlicerFamily& family, const CellOccupancy& occ,
                                                    std::uint64_t steps) {
  CellOccupancy current = occ;
  for (std::uint64_t k = 0; k < steps; ++k) current = evolve_occupancy(family, current);
  return current;
}

/// A_j: total occupied length per cell.
[[nodiscard]] inline std::map<CellIndex, double> areas(const CellOccupancy& occ) {
  std::map<CellIndex, double> out;
  for (const auto& [cell, set] : occ.cells()) out.emplace(cell, set.length());
  return out;
}

/// Total occupied length as an integer combination of canonical endpoint
/// symbols. Measure conservation means this reduces to exactly 1 - 0.
[[nodiscard]] inline std::map<std::pair<SymbolicEndpoint::Kind, CellIndex>, std::int64_t> symbolic_total_length(
    const CellOccupancy& occ) {
  std::map<std::pair<SymbolicEndpoint::Kind, CellIndex>, std::int64_t> coeff;
  for (const auto& [cell, set] : occ.cells()) {
    for (const auto& interval : set.intervals()) {
      const auto hi = interval.hi.canonical();
      const auto lo = interval.lo.canonical();
      coeff[{hi.kind(), hi.index()}] += 1;
      coeff[{lo.kind(), lo.index()}] -= 1;
    }
  }
  std::erase_if(coeff, [](const auto& kv) { return kv.second == 0; });
  return coeff;
}

/// CSV export: `cell,area`.
inline void write_areas_csv(std::ostream& os, const CellOccupancy& occ) {
  CsvWriter csv(os, {"cell", "area"});
  for (const auto& [cell, area] : areas(occ)) csv.row(cell, area);
}

/// CSV export: `cell,left_endpoint,right_endpoint`, one row per interval.
inline void write_intervals_csv(std::ostream& os, const CellOccupancy& occ) {
  CsvWriter csv(os, {"cell", "left_endpoint", "right_endpoint"});
  for (const auto& [cell, set] : occ.cells()) {
    for (const auto& interval : set.intervals()) csv.row(cell, interval.lo.value(), interval.hi.value());
  }
}

}  // namespace slicer
