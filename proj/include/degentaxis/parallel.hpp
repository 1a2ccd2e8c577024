#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace degentaxis {

/// Number of worker threads used by data-parallel loops (default 1).
/// Loops only ever write disjoint per-element results; every reduction is
/// performed afterwards in fixed order, so results do not depend on this.
void set_thread_count(int threads);
int thread_count();

/// Calls body(begin, end) over a partition of [0, n) into chunks of at
/// least `min_chunk` elements; runs inline when one chunk covers everything.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1024);

/// Neumaier-compensated accumulator with a fixed summation order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace degentaxis
