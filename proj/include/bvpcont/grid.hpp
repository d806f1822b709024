#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bvpcont {

/// Uniform 1-D mesh; node k sits exactly at t_start + k*step.
class UniformGrid {
 public:
  UniformGrid(double t_start, double t_end, std::size_t n_nodes);

  /// Grid on (-L, L) with an odd node count so that t = 0 is a node.
  static UniformGrid symmetric(double half_length, std::size_t n_nodes);

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  std::size_t size() const { return n_nodes_; }
  double step() const { return step_; }
  double node(std::size_t k) const { return t_start_ + static_cast<double>(k) * step_; }

  /// Index of the node located at t (relative tolerance on the step), if any.
  std::optional<std::size_t> node_index(double t, double rel_tol = 1e-9) const;

  bool operator==(const UniformGrid& other) const = default;

 private:
  double t_start_;
  double t_end_;
  std::size_t n_nodes_;
  double step_;
};

/// Values of an N-vector valued function on a UniformGrid, stored node-major.
class GridFn {
 public:
  /// Placeholder on a two-node unit grid.
  GridFn() : GridFn(UniformGrid(0.0, 1.0, 2)) {}
  explicit GridFn(UniformGrid grid, std::size_t dim = 1);
  GridFn(UniformGrid grid, std::size_t dim, std::vector<double> values);

  static GridFn sample(const UniformGrid& grid, const std::function<double(double)>& f);
  static GridFn constant(const UniformGrid& grid, std::size_t dim, double value);

  const UniformGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return grid_.size(); }

  double& operator()(std::size_t k, std::size_t d = 0) { return values_[k * dim_ + d]; }
  double operator()(std::size_t k, std::size_t d = 0) const { return values_[k * dim_ + d]; }

  std::span<const double> at(std::size_t k) const { return {values_.data() + k * dim_, dim_}; }
  std::span<double> at(std::size_t k) { return {values_.data() + k * dim_, dim_}; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Component d as a scalar GridFn.
  GridFn component(std::size_t d) const;

  double sup_norm() const;

  /// Piecewise-cubic Hermite evaluation; slopes come from fourth-order
  /// difference stencils (one-sided near the ends).
  double eval(double t, std::size_t d = 0) const;

  bool is_finite() const;

  GridFn& operator+=(const GridFn& other);
  GridFn& operator-=(const GridFn& other);
  GridFn& operator*=(double factor);
  /// Adds the same constant to every component at every node.
  GridFn& operator+=(double shift);

 private:
  double slope(std::size_t k, std::size_t d) const;

  UniformGrid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

GridFn operator+(GridFn lhs, const GridFn& rhs);
GridFn operator-(GridFn lhs, const GridFn& rhs);
GridFn operator*(double factor, GridFn f);
GridFn operator+(GridFn f, double shift);

double sup_distance(const GridFn& a, const GridFn& b);

/// omega-periodic signal sampled on [0, omega) (endpoint excluded).
class PeriodicSignal {
 public:
  /// `slopes`, when given, are exact derivative samples used for Hermite
  /// interpolation; otherwise fourth-order periodic differences are used.
  PeriodicSignal(double period, std::size_t dim, std::vector<double> samples,
                 std::vector<double> slopes = {});

  static PeriodicSignal sample(double period, std::size_t n_samples,
                               const std::function<double(double)>& f);
  static PeriodicSignal constant(double period, std::size_t n_samples, double value);

  double period() const { return period_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return n_samples_; }
  double step() const { return period_ / static_cast<double>(n_samples_); }
  double node(std::size_t k) const { return static_cast<double>(k) * step(); }

  double sample_at(std::size_t k, std::size_t d = 0) const { return samples_[k * dim_ + d]; }
  std::span<const double> samples() const { return samples_; }
  bool has_exact_slopes() const { return !slopes_.empty(); }

  /// Evaluation at any real t, reduced modulo the period.
  double eval(double t, std::size_t d = 0) const;

  /// Rectangle-rule average per component.
  std::vector<double> mean() const;
  double sup_norm() const;

  PeriodicSignal zero_mean() const;
  PeriodicSignal scaled(double factor) const;
  PeriodicSignal plus(const PeriodicSignal& other) const;

  /// Values at the nodes of `grid`, as a GridFn.
  GridFn on_grid(const UniformGrid& grid) const;

 private:
  double slope(std::size_t k, std::size_t d) const;

  double period_;
  std::size_t dim_;
  std::size_t n_samples_;
  std::vector<double> samples_;
  std::vector<double> slopes_;
};

/// Rectangle-rule (periodic) average per component.
std::vector<double> mean_value(const PeriodicSignal& f);
/// Trapezoid-rule average over the grid interval per component.
std::vector<double> mean_value(const GridFn& f);

/// Cubic Hermite basis on [0,1] evaluated at s, combining values and slopes
/// already multiplied by the interval length.
inline double hermite(double s, double f0, double d0, double f1, double d1) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * f1 +
         (s3 - s2) * d1;
}

}  // namespace bvpcont
