#pragma once

#include <stdexcept>
#include <vector>

namespace sdemi {

// Uniform discretization of [0, T]: t_k = k*dt, dt = T/N, k = 0..N.
class TimeGrid {
 public:
  TimeGrid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    dt_ = horizon / n_steps;
  }

  double horizon() const { return horizon_; }
  int n_steps() const { return n_steps_; }
  int n_points() const { return n_steps_ + 1; }
  double dt() const { return dt_; }

  // t_N == horizon exactly; interior points are k*dt.
  double time(int k) const { return k == n_steps_ ? horizon_ : k * dt_; }

  bool operator==(const TimeGrid& o) const {
    return horizon_ == o.horizon_ && n_steps_ == o.n_steps_;
  }

 private:
  double horizon_;
  int n_steps_;
  double dt_;
};

// Scalar sample path on a grid, one value per grid point.
struct Path {
  TimeGrid grid;
  std::vector<double> values;

  explicit Path(const TimeGrid& g, double fill = 0.0) : grid(g), values(g.n_points(), fill) {}
};

inline Path constant_path(const TimeGrid& grid, double value) { return Path(grid, value); }

}  // namespace sdemi
