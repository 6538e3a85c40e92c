#pragma once

#include <cmath>
#include <span>

namespace slicer {

/// Neumaier-compensated accumulator.
///
/// Tracks the rounding error of every addition and folds it back in when the
/// value is read. Unlike plain Kahan summation it stays accurate when an
/// addend is larger in magnitude than the running sum, which happens at the
/// edge spike of the coarse-grained distributions.
template <typename Real = double>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(Real init) : sum_(init) {}

  void add(Real value) noexcept {
    const Real t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(Real value) noexcept {
    add(value);
    return *this;
  }

  /// Folds another accumulator in. Merging in a fixed order gives a
  /// reproducible result independent of how the addends were partitioned.
  CompensatedSum& merge(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.compensation_);
    return *this;
  }

  [[nodiscard]] Real value() const noexcept { return sum_ + compensation_; }

 private:
  Real sum_{0};
  Real compensation_{0};
};

template <typename Real>
[[nodiscard]] Real compensated_total(std::span<const Real> values) noexcept {
  CompensatedSum<Real> acc;
  for (Real v : values) acc.add(v);
  return acc.value();
}

}  // namespace slicer
