#include "bvpcont/families.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

namespace bvpcont {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  std::istringstream in(t);
  in.imbue(std::locale::classic());
  in >> out;
  return in && in.peek() == std::char_traits<char>::eof();
}

void expect_args(const FamilyCall& call, std::size_t lo, std::size_t hi) {
  if (call.args.size() < lo || call.args.size() > hi) {
    std::ostringstream msg;
    msg << "family '" << call.name << "' takes " << lo;
    if (hi != lo) msg << " to " << hi;
    msg << " arguments, got " << call.args.size();
    throw ConfigError(msg.str());
  }
}

struct SteffenTable {
  std::vector<double> x;
  std::vector<double> y;
  gsl_interp* interp = nullptr;

  ~SteffenTable() {
    if (interp) gsl_interp_free(interp);
  }
};

}  // namespace

FamilyCall parse_call(const std::string& spec) {
  const std::string s = trim(spec);
  FamilyCall call;
  const auto open = s.find('(');
  if (open == std::string::npos) {
    call.name = s;
  } else {
    if (s.back() != ')') throw ConfigError("unbalanced parentheses in '" + spec + "'");
    call.name = trim(s.substr(0, open));
    call.raw_args = trim(s.substr(open + 1, s.size() - open - 2));
  }
  if (call.name.empty()) throw ConfigError("empty function name in '" + spec + "'");
  for (char ch : call.name) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) {
      throw ConfigError("bad function name in '" + spec + "'");
    }
  }
  if (call.name == "tabulated" || call.raw_args.empty()) return call;
  std::stringstream in(call.raw_args);
  std::string item;
  while (std::getline(in, item, ',')) {
    double v = 0.0;
    if (!parse_double(item, v)) {
      throw ConfigError("argument '" + trim(item) + "' of '" + spec + "' is not a number");
    }
    call.args.push_back(v);
  }
  return call;
}

std::function<double(double)> scalar_family(const std::string& spec,
                                            const std::filesystem::path& base_dir) {
  const FamilyCall call = parse_call(spec);
  const auto& a = call.args;
  if (call.name == "const") {
    expect_args(call, 1, 1);
    return [k = a[0]](double) { return k; };
  }
  if (call.name == "poly") {
    expect_args(call, 1, 32);
    return [c = a](double u) {
      double acc = 0.0;
      for (std::size_t i = c.size(); i-- > 0;) acc = acc * u + c[i];
      return acc;
    };
  }
  if (call.name == "sin") {
    expect_args(call, 0, 1);
    return [amp = a.empty() ? 1.0 : a[0]](double u) { return amp * std::sin(u); };
  }
  if (call.name == "cos") {
    expect_args(call, 0, 1);
    return [amp = a.empty() ? 1.0 : a[0]](double u) { return amp * std::cos(u); };
  }
  if (call.name == "atan_ll") {
    expect_args(call, 0, 1);
    const double scale = a.empty() ? 1.0 : a[0];
    if (!(scale > 0)) throw ConfigError("atan_ll scale must be positive");
    return [scale](double u) { return 2.0 / std::numbers::pi * std::atan(u / scale); };
  }
  if (call.name == "cubic_root_shift") {
    expect_args(call, 0, 0);
    return [](double u) { return u + std::sin(std::cbrt(u)); };
  }
  if (call.name == "monod") {
    expect_args(call, 2, 2);
    if (!(a[0] > 0 && a[1] > 0)) throw ConfigError("monod parameters must be positive");
    return [m = a[0], ks = a[1]](double s) { return m * s / (ks + s); };
  }
  if (call.name == "tabulated") {
    if (call.raw_args.empty()) throw ConfigError("tabulated needs a file path");
    std::filesystem::path p = call.raw_args;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return load_tabulated(p);
  }
  throw ConfigError("unknown function family '" + call.name + "'");
}

VectorMap planar_family(const std::vector<std::string>& specs,
                        const std::filesystem::path& base_dir) {
  if (specs.size() == 1) {
    const FamilyCall call = parse_call(specs[0]);
    if (call.name != "linear") {
      throw ConfigError("a planar map needs linear(...) or one family per component");
    }
    expect_args(call, 4, 4);
    return [m = call.args](std::span<const double> u, std::span<double> out) {
      out[0] = m[0] * u[0] + m[1] * u[1];
      out[1] = m[2] * u[0] + m[3] * u[1];
    };
  }
  if (specs.size() != 2) throw ConfigError("a planar map needs exactly two component families");
  auto g0 = scalar_family(specs[0], base_dir);
  auto g1 = scalar_family(specs[1], base_dir);
  return [g0, g1](std::span<const double> u, std::span<double> out) {
    out[0] = g0(u[0]);
    out[1] = g1(u[1]);
  };
}

double TimeSignal::value(double t) const {
  double acc = 0.0;
  for (const auto& term : terms) {
    if (term.name == "const") {
      acc += term.args[0];
    } else if (term.name == "cos") {
      acc += term.args[0] * std::cos(term.args[1] * t);
    } else {
      acc += term.args[0] * std::sin(term.args[1] * t);
    }
  }
  return acc;
}

double TimeSignal::derivative(double t) const {
  double acc = 0.0;
  for (const auto& term : terms) {
    if (term.name == "cos") {
      acc -= term.args[0] * term.args[1] * std::sin(term.args[1] * t);
    } else if (term.name == "sin") {
      acc += term.args[0] * term.args[1] * std::cos(term.args[1] * t);
    }
  }
  return acc;
}

TimeSignal parse_time_signal(const std::vector<std::string>& terms) {
  TimeSignal sig;
  for (const auto& spec : terms) {
    FamilyCall call = parse_call(spec);
    if (call.name == "const") {
      expect_args(call, 1, 1);
    } else if (call.name == "cos" || call.name == "sin") {
      expect_args(call, 2, 2);
    } else {
      throw ConfigError("unknown time term '" + call.name + "' (const, cos, sin)");
    }
    sig.terms.push_back(std::move(call));
  }
  return sig;
}

PeriodicSignal sample_signal(const TimeSignal& sig, double period, std::size_t n_samples) {
  std::vector<double> v(n_samples), d(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = period * static_cast<double>(k) / static_cast<double>(n_samples);
    v[k] = sig.value(t);
    d[k] = sig.derivative(t);
  }
  const double scale = 1.0 + std::abs(sig.value(0.0));
  if (std::abs(sig.value(period) - sig.value(0.0)) > 1e-9 * scale ||
      std::abs(sig.derivative(period) - sig.derivative(0.0)) > 1e-9 * (1.0 + std::abs(sig.derivative(0.0)))) {
    throw ConfigError("time signal is not periodic with the problem period");
  }
  return PeriodicSignal(period, 1, std::move(v), std::move(d));
}

std::function<double(double)> tabulated_function(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw ConfigError("a tabulated function needs at least three (x, y) rows");
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw ConfigError("tabulated first column must be strictly increasing");
  }
  gsl_set_error_handler_off();
  auto table = std::make_shared<SteffenTable>();
  table->x = std::move(x);
  table->y = std::move(y);
  table->interp = gsl_interp_alloc(gsl_interp_steffen, table->x.size());
  if (!table->interp ||
      gsl_interp_init(table->interp, table->x.data(), table->y.data(), table->x.size()) != GSL_SUCCESS) {
    throw ConfigError("tabulated interpolant could not be built");
  }
  return [table](double u) {
    const auto& xs = table->x;
    const auto& ys = table->y;
    const double lo = xs.front();
    const double hi = xs.back();
    if (u < lo) {
      return ys.front() + (u - lo) * gsl_interp_eval_deriv(table->interp, xs.data(), ys.data(), lo, nullptr);
    }
    if (u > hi) {
      return ys.back() + (u - hi) * gsl_interp_eval_deriv(table->interp, xs.data(), ys.data(), hi, nullptr);
    }
    return gsl_interp_eval(table->interp, xs.data(), ys.data(), u, nullptr);
  };
}

std::function<double(double)> load_tabulated(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read table '" + path.string() + "'");
  std::vector<double> x, y;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    double a = 0.0, b = 0.0;
    if (comma == std::string::npos || !parse_double(line.substr(0, comma), a) ||
        !parse_double(line.substr(comma + 1), b)) {
      if (x.empty() && line_no == 1) continue;
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected two numbers");
    }
    x.push_back(a);
    y.push_back(b);
  }
  return tabulated_function(std::move(x), std::move(y));
}

}  // namespace bvpcont
