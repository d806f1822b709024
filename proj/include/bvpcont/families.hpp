#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvpcont/grid.hpp"
#include "bvpcont/maps.hpp"

namespace bvpcont {

/// Malformed config content: unknown family, bad arguments, missing keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FamilyCall {
  std::string name;
  std::vector<double> args;
  /// Raw text between the parentheses, used by tabulated(file).
  std::string raw_args;
};

/// Splits "name(a, b, ...)" or a bare "name". Throws ConfigError.
FamilyCall parse_call(const std::string& spec);

/// Scalar function of u from a named family:
///   const(k), poly(c0, c1, ...), sin, sin(amp), cos(amp), atan_ll(scale),
///   cubic_root_shift, monod(m, k_s), tabulated(path).
/// Relative tabulated paths resolve against `base_dir`.
std::function<double(double)> scalar_family(const std::string& spec,
                                            const std::filesystem::path& base_dir = {});

/// Planar map: linear(a11, a12, a21, a22), or one scalar family per
/// component acting on that component.
VectorMap planar_family(const std::vector<std::string>& specs,
                        const std::filesystem::path& base_dir = {});

/// Sum of time terms const(k), cos(amp, freq), sin(amp, freq) meaning
/// amp * cos(freq t) and amp * sin(freq t).
struct TimeSignal {
  std::vector<FamilyCall> terms;

  double value(double t) const;
  double derivative(double t) const;
};

TimeSignal parse_time_signal(const std::vector<std::string>& terms);

/// Samples a time signal on [0, period) with exact slopes attached.
PeriodicSignal sample_signal(const TimeSignal& sig, double period, std::size_t n_samples);

/// Monotone C1 interpolant (Steffen) through (x_i, y_i), extended linearly
/// outside the table. x must be strictly increasing.
std::function<double(double)> tabulated_function(std::vector<double> x, std::vector<double> y);

/// Reads a two-column CSV (optional header line).
std::function<double(double)> load_tabulated(const std::filesystem::path& path);

}  // namespace bvpcont
