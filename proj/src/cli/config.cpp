#include "config.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bvpcont/errors.hpp"
#include "bvpcont/families.hpp"

namespace bvpcont::cli {
namespace {

const toml::table kEmpty;

std::optional<double> opt_number(const toml::table& t, const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (auto v = n->value<double>()) return *v;
  throw ConfigError("'" + key + "' must be a number");
}

double number(const toml::table& t, const std::string& key, double fallback) {
  return opt_number(t, key).value_or(fallback);
}

double require_number(const toml::table& t, const std::string& key) {
  if (auto v = opt_number(t, key)) return *v;
  throw ConfigError("missing required key '" + key + "'");
}

std::optional<std::int64_t> opt_integer(const toml::table& t, const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (auto v = n->value_exact<std::int64_t>()) return *v;
  throw ConfigError("'" + key + "' must be an integer");
}

std::optional<std::string> opt_string(const toml::table& t, const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (auto v = n->value<std::string>()) return *v;
  throw ConfigError("'" + key + "' must be a string");
}

/// A string or an array of strings.
std::vector<std::string> string_list(const toml::table& t, const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return {};
  if (auto v = n->value<std::string>()) return {*v};
  const toml::array* arr = n->as_array();
  if (!arr) throw ConfigError("'" + key + "' must be a string or an array of strings");
  std::vector<std::string> out;
  for (const auto& item : *arr) {
    auto v = item.value<std::string>();
    if (!v) throw ConfigError("'" + key + "' entries must be strings");
    out.push_back(*v);
  }
  return out;
}

std::vector<double> number_list(const toml::table& t, const std::string& key) {
  const toml::node* n = t.get(key);
  if (!n) return {};
  if (auto v = n->value<double>()) return {*v};
  const toml::array* arr = n->as_array();
  if (!arr) throw ConfigError("'" + key + "' must be a number or an array of numbers");
  std::vector<double> out;
  for (const auto& item : *arr) {
    auto v = item.value<double>();
    if (!v) throw ConfigError("'" + key + "' entries must be numbers");
    out.push_back(*v);
  }
  return out;
}

std::size_t positive_count(std::int64_t v, const std::string& key) {
  if (v <= 0) throw ConfigError("'" + key + "' must be positive");
  return static_cast<std::size_t>(v);
}

double positive_tol(double v) {
  if (!(v > 0)) throw ConfigError("tolerances must be positive");
  return v;
}

PeriodicSignal signal_from(const toml::table& t, const std::string& key, double period,
                           std::size_t n, double fallback) {
  const auto terms = string_list(t, key);
  if (terms.empty()) return PeriodicSignal::constant(period, n, fallback);
  return sample_signal(parse_time_signal(terms), period, n);
}

}  // namespace

const toml::table& ConfigFile::section(const std::string& name) const {
  const toml::node* n = root.get(name);
  if (!n) return kEmpty;
  if (const toml::table* t = n->as_table()) return *t;
  throw ConfigError("'" + name + "' must be a table");
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError("cannot read config '" + path.string() + "'");
  }
  ConfigFile cfg;
  try {
    cfg.root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << path.string() << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  cfg.base_dir = path.parent_path();
  return cfg;
}

std::optional<std::string> declared_kind(const ConfigFile& cfg) {
  return opt_string(cfg.section("problem"), "kind");
}

NonlocalSetup build_nonlocal(const ConfigFile& cfg, const Overrides& ov) {
  const toml::table& p = cfg.section("problem");
  const toml::table& num = cfg.section("numerics");
  NonlocalSetup setup;
  NonlocalProblem& prob = setup.prob;
  prob.half_length = number(p, "half_length", 1.0);
  if (!(prob.half_length > 0)) throw ConfigError("half_length must be positive");
  const auto dim = opt_integer(p, "dim").value_or(1);
  if (dim != 1 && dim != 2) throw ConfigError("dim must be 1 or 2");
  prob.dim = static_cast<std::size_t>(dim);

  const auto f_specs = string_list(p, "f");
  const auto g_specs = string_list(p, "g");
  if (f_specs.empty() || g_specs.empty()) throw ConfigError("nonlocal problems need 'f' and 'g'");
  if (prob.dim == 1) {
    if (f_specs.size() != 1 || g_specs.size() != 1) {
      throw ConfigError("scalar problems take a single family for f and g");
    }
    auto fu = scalar_family(f_specs[0], cfg.base_dir);
    const auto ft_terms = string_list(p, "f_t");
    if (ft_terms.empty()) {
      prob.f = scalar_field([fu](double, double u) { return fu(u); });
    } else {
      const TimeSignal ft = parse_time_signal(ft_terms);
      prob.f = scalar_field([fu, ft](double t, double u) { return fu(u) + ft.value(t); });
    }
    prob.g = scalar_map(scalar_family(g_specs[0], cfg.base_dir));
  } else {
    VectorMap fu = planar_family(f_specs, cfg.base_dir);
    prob.f = [fu](double, std::span<const double> u, std::span<double> out) { fu(u, out); };
    prob.g = planar_family(g_specs, cfg.base_dir);
  }

  if (auto v = opt_number(p, "f_sup")) prob.f_sup = *v;
  prob.working_range = number(p, "working_range", prob.working_range);

  const std::string growth = opt_string(p, "growth").value_or(prob.dim == 2 ? "planar" : "bracket");
  if (growth == "sublinear" || growth == "bounded-sublinear") {
    prob.growth = GrowthClass::BoundedSublinear;
  } else if (growth == "superlinear") {
    prob.growth = GrowthClass::Superlinear;
  } else if (growth == "bracket" || growth == "user-bracket") {
    prob.growth = GrowthClass::UserBracket;
    const auto br = number_list(p, "bracket");
    if (br.size() != 2) throw ConfigError("user bracket needs 'bracket = [a, b]'");
    prob.bracket = {br[0], br[1]};
  } else if (growth == "planar" || growth == "planar-degree") {
    prob.growth = GrowthClass::PlanarDegree;
  } else {
    throw ConfigError("unknown growth class '" + growth + "'");
  }
  if (prob.dim == 2) {
    if (prob.growth != GrowthClass::PlanarDegree) throw ConfigError("planar problems use growth = \"planar\"");
    const auto r = number_list(p, "region");
    if (r.size() != 4) throw ConfigError("planar problems need 'region = [x_lo, x_hi, y_lo, y_hi]'");
    prob.region = Rectangle{r[0], r[1], r[2], r[3]};
    if (!(r[1] > r[0] && r[3] > r[2])) throw ConfigError("region must have positive extent");
  }
  if (const toml::node* rel = p.get("relaxed")) {
    const toml::table* rt = rel->as_table();
    if (!rt) throw ConfigError("'relaxed' must be a table of eps, A, B, C");
    prob.relaxed = RelaxedGrowth{number(*rt, "eps", 0.0), number(*rt, "A", 0.0),
                                 number(*rt, "B", 0.0), number(*rt, "C", 0.0)};
  }

  prob.n_nodes = ov.grid ? *ov.grid : positive_count(opt_integer(num, "n_nodes").value_or(401), "n_nodes");
  if (prob.n_nodes < 5 || prob.n_nodes % 2 == 0) throw ConfigError("the grid size must be odd and >= 5");
  setup.opts.steps = static_cast<int>(positive_count(opt_integer(num, "steps").value_or(64), "steps"));
  setup.opts.tol_c = positive_tol(ov.tol ? *ov.tol : number(num, "tol", 1e-12));
  setup.opts.solver.tol = positive_tol(number(num, "solver_tol", setup.opts.solver.tol));
  setup.multistart = static_cast<int>(positive_count(opt_integer(num, "multistart").value_or(3), "multistart"));
  return setup;
}

ResonanceSetup build_resonance(const ConfigFile& cfg, const Overrides& ov) {
  const toml::table& p = cfg.section("problem");
  const toml::table& num = cfg.section("numerics");
  ResonanceSetup setup;
  ResonantProblem& prob = setup.prob;
  prob.omega = number(p, "omega", 2 * std::numbers::pi);
  if (!(prob.omega > 0)) throw ConfigError("omega must be positive");
  prob.a = number(p, "a", 0.0);
  const auto dim = opt_integer(p, "dim").value_or(1);
  if (dim != 1 && dim != 2) throw ConfigError("dim must be 1 or 2");
  prob.dim = static_cast<std::size_t>(dim);

  const auto g_specs = string_list(p, "g");
  if (g_specs.empty()) throw ConfigError("resonance problems need 'g'");
  if (prob.dim == 1) {
    if (g_specs.size() != 1) throw ConfigError("scalar problems take a single family for g");
    prob.g = scalar_map(scalar_family(g_specs[0], cfg.base_dir));
  } else {
    prob.g = planar_family(g_specs, cfg.base_dir);
  }

  const std::string cls = opt_string(p, "g_class").value_or("generic");
  if (cls == "periodic") {
    prob.g_class = NonlinearityClass::Periodic;
    prob.periods = number_list(p, "periods");
    if (prob.periods.empty()) prob.periods.assign(prob.dim, 2 * std::numbers::pi);
    for (double s : prob.periods) {
      if (!(s > 0)) throw ConfigError("periods must be positive");
    }
  } else if (cls == "landesman-lazer") {
    prob.g_class = NonlinearityClass::LandesmanLazer;
    prob.g_minus = require_number(p, "g_minus");
    prob.g_plus = require_number(p, "g_plus");
  } else if (cls == "generic") {
    prob.g_class = NonlinearityClass::GenericBounded;
  } else {
    throw ConfigError("unknown g_class '" + cls + "'");
  }
  if (auto v = opt_number(p, "g_sup")) prob.g_sup = *v;

  prob.n_nodes = positive_count(opt_integer(num, "n_nodes").value_or(401), "n_nodes");
  setup.wx.n_samples = positive_count(opt_integer(num, "wx_samples").value_or(256), "wx_samples");
  if (ov.grid) (prob.dim == 1 ? prob.n_nodes : setup.wx.n_samples) = *ov.grid;
  if (prob.n_nodes < 5) throw ConfigError("the grid needs at least 5 nodes");

  const std::size_t n = prob.n_nodes - 1;
  const PeriodicSignal first = signal_from(p, "p0", prob.omega, n, 0.0);
  if (prob.dim == 2 && p.get("p0_second")) {
    const PeriodicSignal second = signal_from(p, "p0_second", prob.omega, n, 0.0);
    std::vector<double> v(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
      v[2 * k] = first.sample_at(k);
      v[2 * k + 1] = second.sample_at(k);
    }
    prob.p0 = PeriodicSignal(prob.omega, 2, std::move(v));
  } else {
    prob.p0 = first;
  }
  if (auto s = opt_number(p, "s")) setup.s = *s;

  const auto window = number_list(num, "window");
  if (!window.empty()) {
    if (window.size() != 2 || !(window[1] > window[0])) throw ConfigError("window must be [lo, hi] with lo < hi");
    setup.opts.window = std::pair{window[0], window[1]};
  }
  setup.opts.steps = static_cast<int>(positive_count(opt_integer(num, "steps").value_or(64), "steps"));
  setup.opts.refine_rounds = static_cast<int>(opt_integer(num, "refine_rounds").value_or(3));
  setup.opts.solver.tol = positive_tol(number(num, "solver_tol", setup.opts.solver.tol));
  setup.wx.tol = positive_tol(number(num, "wx_tol", setup.wx.tol));
  setup.wirtinger_radius = number(num, "wirtinger_radius", setup.wirtinger_radius);
  setup.degeneracy_tol = positive_tol(ov.tol ? *ov.tol : number(num, "degeneracy_tol", 1e-6));

  const auto box = number_list(num, "box");
  if (!box.empty()) {
    if (box.size() != 4) throw ConfigError("box must be [x_lo, x_hi, y_lo, y_hi]");
    setup.box = Rectangle{box[0], box[1], box[2], box[3]};
  }
  setup.resolution = static_cast<int>(positive_count(opt_integer(num, "resolution").value_or(9), "resolution"));

  const toml::table& ex = cfg.section("experiment");
  setup.perturbation = string_list(ex, "perturbation");
  setup.amplitudes = number_list(ex, "amplitudes");
  if (auto halvings = opt_integer(ex, "halvings")) {
    for (std::int64_t k = 0; k <= *halvings; ++k) setup.amplitudes.push_back(std::ldexp(1.0, -static_cast<int>(k)));
  }
  return setup;
}

ChemostatSetup build_chemostat(const ConfigFile& cfg, const Overrides& ov) {
  const toml::table& p = cfg.section("problem");
  const toml::table& num = cfg.section("numerics");
  ChemostatSetup setup;
  ChemostatModel& m = setup.model;
  m.omega = number(p, "omega", 1.0);
  m.tau = require_number(p, "tau");
  m.gamma = number(p, "gamma", 1.0);
  m.steps_per_period = ov.grid ? *ov.grid
                               : positive_count(opt_integer(num, "steps_per_period").value_or(2048),
                                                "steps_per_period");
  if (!(m.omega > 0)) throw ConfigError("omega must be positive");
  if (string_list(p, "D").empty() || string_list(p, "s0").empty()) {
    throw ConfigError("chemostat problems need 'D' and 's0'");
  }
  m.D = signal_from(p, "D", m.omega, m.steps_per_period, 0.0);
  m.s0 = signal_from(p, "s0", m.omega, m.steps_per_period, 0.0);
  const std::string mu = opt_string(p, "mu").value_or("monod(1, 1)");
  m.mu = scalar_family(mu, cfg.base_dir);
  m.mu_label = mu;
  setup.x0_max = number(num, "x0_max", setup.x0_max);
  setup.tol = positive_tol(ov.tol ? *ov.tol : number(num, "tol", setup.tol));
  try {
    validate(m);
    step_plan(m);
  } catch (const SolverError& e) {
    throw ConfigError(e.what());
  }
  return setup;
}

}  // namespace bvpcont::cli
