#pragma once

#include <stdexcept>

namespace conelq {

/// Uniform grid on [0, T] with n_steps intervals. Coefficient tables are
/// piecewise constant per interval (left endpoint convention), so time
/// integrals of tabulated data are exact sums.
class TimeGrid {
 public:
  TimeGrid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: need at least one step");
  }

  double horizon() const { return horizon_; }
  int n_steps() const { return n_steps_; }
  double dt() const { return horizon_ / n_steps_; }
  double point(int k) const { return k == n_steps_ ? horizon_ : k * dt(); }

 private:
  double horizon_;
  int n_steps_;
};

}  // namespace conelq
