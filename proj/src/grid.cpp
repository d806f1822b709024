#include "bvpcont/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bvpcont/errors.hpp"

namespace bvpcont {

UniformGrid::UniformGrid(double t_start, double t_end, std::size_t n_nodes)
    : t_start_(t_start), t_end_(t_end), n_nodes_(n_nodes), step_(0.0) {
  if (n_nodes < 2) {
    throw SolverError(ErrorCode::DegenerateGrid, "a grid needs at least two nodes");
  }
  if (!(t_end > t_start)) {
    throw SolverError(ErrorCode::InvalidArgument, "grid interval must satisfy t_end > t_start");
  }
  step_ = (t_end - t_start) / static_cast<double>(n_nodes - 1);
}

UniformGrid UniformGrid::symmetric(double half_length, std::size_t n_nodes) {
  if (n_nodes % 2 == 0) {
    throw SolverError(ErrorCode::InvalidArgument,
                      "symmetric grid needs an odd node count to contain t = 0");
  }
  return UniformGrid(-half_length, half_length, n_nodes);
}

std::optional<std::size_t> UniformGrid::node_index(double t, double rel_tol) const {
  const double pos = (t - t_start_) / step_;
  const double k = std::round(pos);
  if (k < 0 || k > static_cast<double>(n_nodes_ - 1) || std::abs(pos - k) > rel_tol) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(k);
}

GridFn::GridFn(UniformGrid grid, std::size_t dim)
    : grid_(grid), dim_(dim), values_(grid.size() * dim, 0.0) {
  if (dim == 0) throw SolverError(ErrorCode::InvalidArgument, "GridFn dimension must be positive");
}

GridFn::GridFn(UniformGrid grid, std::size_t dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
  if (dim == 0) throw SolverError(ErrorCode::InvalidArgument, "GridFn dimension must be positive");
  if (values_.size() != grid_.size() * dim_) {
    throw SolverError(ErrorCode::InvalidArgument,
                      "GridFn value count " + std::to_string(values_.size()) +
                          " does not match nodes*dim");
  }
}

GridFn GridFn::sample(const UniformGrid& grid, const std::function<double(double)>& f) {
  GridFn out(grid, 1);
  for (std::size_t k = 0; k < grid.size(); ++k) out(k) = f(grid.node(k));
  return out;
}

GridFn GridFn::constant(const UniformGrid& grid, std::size_t dim, double value) {
  return GridFn(grid, dim, std::vector<double>(grid.size() * dim, value));
}

GridFn GridFn::component(std::size_t d) const {
  GridFn out(grid_, 1);
  for (std::size_t k = 0; k < size(); ++k) out(k) = (*this)(k, d);
  return out;
}

double GridFn::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool GridFn::is_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridFn::slope(std::size_t k, std::size_t d) const {
  const std::size_t n = size();
  const double h = grid_.step();
  auto f = [&](std::size_t j) { return (*this)(j, d); };
  if (n >= 5) {
    if (k >= 2 && k + 2 < n) {
      return (-f(k + 2) + 8 * f(k + 1) - 8 * f(k - 1) + f(k - 2)) / (12 * h);
    }
    if (k == 0) return (-25 * f(0) + 48 * f(1) - 36 * f(2) + 16 * f(3) - 3 * f(4)) / (12 * h);
    if (k == 1) return (-3 * f(0) - 10 * f(1) + 18 * f(2) - 6 * f(3) + f(4)) / (12 * h);
    if (k == n - 1) {
      return (25 * f(n - 1) - 48 * f(n - 2) + 36 * f(n - 3) - 16 * f(n - 4) + 3 * f(n - 5)) /
             (12 * h);
    }
    return (3 * f(n - 1) + 10 * f(n - 2) - 18 * f(n - 3) + 6 * f(n - 4) - f(n - 5)) / (12 * h);
  }
  if (n >= 3) {
    if (k == 0) return (-3 * f(0) + 4 * f(1) - f(2)) / (2 * h);
    if (k == n - 1) return (3 * f(n - 1) - 4 * f(n - 2) + f(n - 3)) / (2 * h);
    return (f(k + 1) - f(k - 1)) / (2 * h);
  }
  return (f(1) - f(0)) / h;
}

double GridFn::eval(double t, std::size_t d) const {
  const double h = grid_.step();
  const double slack = 1e-10 * h;
  if (t < grid_.t_start() - slack || t > grid_.t_end() + slack) {
    throw SolverError(ErrorCode::InvalidArgument,
                      "evaluation point " + std::to_string(t) + " outside the grid interval");
  }
  const double pos = std::clamp((t - grid_.t_start()) / h, 0.0, static_cast<double>(size() - 1));
  std::size_t k = static_cast<std::size_t>(std::floor(pos));
  if (k >= size() - 1) k = size() - 2;
  const double s = pos - static_cast<double>(k);
  if (s == 0.0) return (*this)(k, d);
  return hermite(s, (*this)(k, d), h * slope(k, d), (*this)(k + 1, d), h * slope(k + 1, d));
}

GridFn& GridFn::operator+=(const GridFn& other) {
  if (other.values_.size() != values_.size()) {
    throw SolverError(ErrorCode::InvalidArgument, "GridFn shape mismatch in +=");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFn& GridFn::operator-=(const GridFn& other) {
  if (other.values_.size() != values_.size()) {
    throw SolverError(ErrorCode::InvalidArgument, "GridFn shape mismatch in -=");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFn& GridFn::operator*=(double factor) {
  for (double& v : values_) v *= factor;
  return *this;
}

GridFn& GridFn::operator+=(double shift) {
  for (double& v : values_) v += shift;
  return *this;
}

GridFn operator+(GridFn lhs, const GridFn& rhs) { return lhs += rhs; }
GridFn operator-(GridFn lhs, const GridFn& rhs) { return lhs -= rhs; }
GridFn operator*(double factor, GridFn f) { return f *= factor; }
GridFn operator+(GridFn f, double shift) { return f += shift; }

double sup_distance(const GridFn& a, const GridFn& b) {
  if (a.values().size() != b.values().size()) {
    throw SolverError(ErrorCode::InvalidArgument, "GridFn shape mismatch in sup_distance");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  }
  return m;
}

// ---------------------------------------------------------------------------

PeriodicSignal::PeriodicSignal(double period, std::size_t dim, std::vector<double> samples,
                               std::vector<double> slopes)
    : period_(period), dim_(dim), n_samples_(0), samples_(std::move(samples)),
      slopes_(std::move(slopes)) {
  if (!(period > 0)) throw SolverError(ErrorCode::InvalidArgument, "period must be positive");
  if (dim == 0) throw SolverError(ErrorCode::InvalidArgument, "signal dimension must be positive");
  if (samples_.empty() || samples_.size() % dim != 0) {
    throw SolverError(ErrorCode::EmptyInput, "periodic signal needs a positive multiple of dim samples");
  }
  n_samples_ = samples_.size() / dim;
  if (!slopes_.empty() && slopes_.size() != samples_.size()) {
    throw SolverError(ErrorCode::InvalidArgument, "slope samples must match value samples");
  }
}

PeriodicSignal PeriodicSignal::sample(double period, std::size_t n_samples,
                                      const std::function<double(double)>& f) {
  std::vector<double> v(n_samples);
  const double h = period / static_cast<double>(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) v[k] = f(static_cast<double>(k) * h);
  return PeriodicSignal(period, 1, std::move(v));
}

PeriodicSignal PeriodicSignal::constant(double period, std::size_t n_samples, double value) {
  return PeriodicSignal(period, 1, std::vector<double>(n_samples, value));
}

double PeriodicSignal::slope(std::size_t k, std::size_t d) const {
  if (!slopes_.empty()) return slopes_[k * dim_ + d];
  const std::size_t n = n_samples_;
  if (n < 3) return 0.0;
  const double h = step();
  auto f = [&](std::ptrdiff_t j) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return samples_[static_cast<std::size_t>(((j % m) + m) % m) * dim_ + d];
  };
  const auto i = static_cast<std::ptrdiff_t>(k);
  if (n >= 5) return (-f(i + 2) + 8 * f(i + 1) - 8 * f(i - 1) + f(i - 2)) / (12 * h);
  return (f(i + 1) - f(i - 1)) / (2 * h);
}

double PeriodicSignal::eval(double t, std::size_t d) const {
  if (n_samples_ == 1) return samples_[d];
  double r = std::fmod(t, period_);
  if (r < 0) r += period_;
  const double h = step();
  const double pos = r / h;
  std::size_t k = static_cast<std::size_t>(std::floor(pos));
  double s = pos - static_cast<double>(k);
  if (k >= n_samples_) {
    k = 0;
    s = 0.0;
  }
  const std::size_t k1 = (k + 1) % n_samples_;
  if (s == 0.0) return samples_[k * dim_ + d];
  return hermite(s, samples_[k * dim_ + d], h * slope(k, d), samples_[k1 * dim_ + d],
                 h * slope(k1, d));
}

std::vector<double> PeriodicSignal::mean() const {
  std::vector<double> m(dim_, 0.0);
  for (std::size_t k = 0; k < n_samples_; ++k) {
    for (std::size_t d = 0; d < dim_; ++d) m[d] += samples_[k * dim_ + d];
  }
  for (double& v : m) v /= static_cast<double>(n_samples_);
  return m;
}

double PeriodicSignal::sup_norm() const {
  double m = 0.0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

PeriodicSignal PeriodicSignal::zero_mean() const {
  const auto m = mean();
  std::vector<double> v = samples_;
  for (std::size_t k = 0; k < n_samples_; ++k) {
    for (std::size_t d = 0; d < dim_; ++d) v[k * dim_ + d] -= m[d];
  }
  return PeriodicSignal(period_, dim_, std::move(v), slopes_);
}

PeriodicSignal PeriodicSignal::scaled(double factor) const {
  std::vector<double> v = samples_;
  for (double& x : v) x *= factor;
  std::vector<double> s = slopes_;
  for (double& x : s) x *= factor;
  return PeriodicSignal(period_, dim_, std::move(v), std::move(s));
}

PeriodicSignal PeriodicSignal::plus(const PeriodicSignal& other) const {
  if (other.dim_ != dim_ || other.n_samples_ != n_samples_ || other.period_ != period_) {
    throw SolverError(ErrorCode::InvalidArgument, "periodic signals differ in shape");
  }
  std::vector<double> v = samples_;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.samples_[i];
  std::vector<double> s;
  if (has_exact_slopes() && other.has_exact_slopes()) {
    s = slopes_;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += other.slopes_[i];
  }
  return PeriodicSignal(period_, dim_, std::move(v), std::move(s));
}

GridFn PeriodicSignal::on_grid(const UniformGrid& grid) const {
  GridFn out(grid, dim_);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t d = 0; d < dim_; ++d) out(k, d) = eval(grid.node(k), d);
  }
  return out;
}

std::vector<double> mean_value(const PeriodicSignal& f) { return f.mean(); }

std::vector<double> mean_value(const GridFn& f) {
  const std::size_t n = f.size();
  std::vector<double> m(f.dim(), 0.0);
  for (std::size_t d = 0; d < f.dim(); ++d) {
    double acc = 0.5 * (f(0, d) + f(n - 1, d));
    for (std::size_t k = 1; k + 1 < n; ++k) acc += f(k, d);
    m[d] = acc / static_cast<double>(n - 1);
  }
  return m;
}

}  // namespace bvpcont
