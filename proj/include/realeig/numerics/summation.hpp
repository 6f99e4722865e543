#pragma once

#include <cmath>

namespace realeig {

/// Neumaier compensated accumulator. Also tracks the largest partial-sum
/// magnitude seen, which bounds the rounding error of the final result.
class NeumaierSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    const double partial = std::fabs(sum_);
    if (partial > max_partial_) max_partial_ = partial;
    const double ax = std::fabs(x);
    if (ax > max_partial_) max_partial_ = ax;
  }

  NeumaierSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }
  double max_partial() const noexcept { return max_partial_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  double max_partial_ = 0.0;
};

}  // namespace realeig
