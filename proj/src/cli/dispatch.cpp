#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "bvpcont/cli.hpp"
#include "bvpcont/errors.hpp"
#include "bvpcont/families.hpp"
#include "config.hpp"

namespace bvpcont::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Outcome {
  Json result;
  int code = kOk;
};

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "'");
  }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw IoError("cannot write '" + (dir_ / name).string() + "'");
  }

 private:
  fs::path dir_;
};

std::string csv(const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

std::string branch_csv(const Branch& b) {
  std::vector<std::vector<double>> rows;
  for (const auto& p : b.points) rows.push_back({p.c, p.phi, p.residual});
  return csv("c,phi,residual", rows);
}

Json grid_json(const GridFn& u) {
  Json t = Json::array();
  Json v = Json::array();
  for (std::size_t k = 0; k < u.size(); ++k) {
    t.push_back(u.grid().node(k));
    if (u.dim() == 1) {
      v.push_back(u(k));
    } else {
      Json row = Json::array();
      for (std::size_t d = 0; d < u.dim(); ++d) row.push_back(u(k, d));
      v.push_back(row);
    }
  }
  return Json{{"t", t}, {"u", v}};
}

Json failure_json(const SolverError& e) {
  return Json{{"status", "failure"}, {"error", to_string(e.code())}, {"message", e.what()}};
}

const ConfigFile& need_config(const std::optional<ConfigFile>& cfg) {
  if (!cfg) throw ConfigError("this command needs --config");
  return *cfg;
}

void check_kind(const std::optional<ConfigFile>& cfg, const std::string& expected) {
  const auto kind = declared_kind(need_config(cfg));
  if (kind && *kind != expected) {
    throw ConfigError("config declares problem kind '" + *kind + "', command expects '" + expected + "'");
  }
}

Outcome solve_nonlocal_cmd(const ConfigFile& cfg, const Overrides& ov, const OutputDir& out) {
  const NonlocalSetup setup = build_nonlocal(cfg, ov);
  const NonlocalProblem& prob = setup.prob;
  Outcome oc;
  Json& r = oc.result;
  r["command"] = "solve nonlocal";
  r["half_length"] = prob.half_length;
  r["dim"] = prob.dim;
  r["f_sup"] = effective_f_sup(prob);
  r["radius"] = nonlocal_radius(prob);
  if (prob.dim == 2) {
    const PlanarSolution ps = solve_nonlocal_planar(prob, setup.multistart, setup.opts.tol_c);
    const auto& s = ps.solution;
    const bool ok = s.equation_residual <= 1e-6 && s.boundary_residual <= 1e-8;
    r["status"] = ok ? "ok" : "failure";
    r["winding"] = ps.winding;
    r["starts_tried"] = ps.starts_tried;
    r["c"] = s.c;
    r["equation_residual"] = s.equation_residual;
    r["boundary_residual"] = s.boundary_residual;
    r["verified"] = ok;
    r["solution"] = grid_json(s.u);
    oc.code = ok ? kOk : kNumericalFailure;
    return oc;
  }
  const auto bracket = choose_bracket(prob);
  r["bracket"] = {bracket.first, bracket.second};
  Branch branch;
  const auto sols = solve_nonlocal(prob, setup.opts, &branch);
  out.write("branch.csv", branch_csv(branch));
  bool all_ok = true;
  Json list = Json::array();
  for (const auto& s : sols) {
    const bool ok = s.equation_residual <= 1e-6 && s.boundary_residual <= 1e-8;
    all_ok = all_ok && ok;
    Json item{{"c", s.c[0]},
              {"equation_residual", s.equation_residual},
              {"boundary_residual", s.boundary_residual},
              {"verified", ok}};
    item["solution"] = grid_json(s.u);
    list.push_back(item);
  }
  r["status"] = all_ok ? "ok" : "failure";
  r["solution_count"] = sols.size();
  r["max_state_jump"] = branch.max_state_jump();
  r["solutions"] = list;
  oc.code = all_ok ? kOk : kNumericalFailure;
  return oc;
}

bool in_ll_exterior(const ResonantProblem& prob, double s) {
  return prob.g_class == NonlinearityClass::LandesmanLazer &&
         (s <= std::min(prob.g_minus, prob.g_plus) || s >= std::max(prob.g_minus, prob.g_plus));
}

Outcome solve_resonance_cmd(const ConfigFile& cfg, const Overrides& ov, const OutputDir& out) {
  const ResonanceSetup setup = build_resonance(cfg, ov);
  const ResonantProblem& prob = setup.prob;
  if (prob.dim != 1) throw ConfigError("solve resonance is scalar; use range resonance for dim = 2");
  if (!setup.s) throw ConfigError("solve resonance needs 's'");
  Outcome oc;
  Json& r = oc.result;
  r["command"] = "solve resonance";
  r["s"] = *setup.s;
  Branch branch;
  try {
    const PeriodicSolution sol = solve_for_s(prob, *setup.s, setup.opts, &branch);
    out.write("branch.csv", branch_csv(branch));
    const bool ok = sol.equation_residual <= 1e-6 && sol.closure <= 1e-6;
    r["status"] = ok ? "ok" : "failure";
    r["c"] = sol.c;
    r["equation_residual"] = sol.equation_residual;
    r["closure"] = sol.closure;
    r["mean_defect"] = sol.mean_defect;
    r["verified"] = ok;
    r["solution"] = grid_json(sol.u);
    oc.code = ok ? kOk : kNumericalFailure;
  } catch (const SolverError& e) {
    if (e.code() != ErrorCode::NoSignChange) throw;
    if (branch.points.size() > 0) out.write("branch.csv", branch_csv(branch));
    const bool certified = in_ll_exterior(prob, *setup.s) && check_landesman_lazer_limits(prob);
    Json f = failure_json(e);
    for (auto& [k, v] : f.items()) r[k] = v;
    if (certified) {
      r["status"] = "no_solution";
      r["certificate"] = Json{{"reason", "s outside the open interval between the limits of g"},
                              {"g_minus", prob.g_minus},
                              {"g_plus", prob.g_plus},
                              {"limits_verified", true}};
      oc.code = kCertifiedNoSolution;
    } else {
      oc.code = kNumericalFailure;
    }
  }
  return oc;
}

Json interval_json(const IntervalEstimate& est, const ResonantProblem& prob) {
  const double gs = effective_g_sup(prob);
  return Json{{"lo", est.lo},
              {"hi", est.hi},
              {"tol", est.tol},
              {"window_relative", est.window_relative},
              {"sample_count", est.samples.size()},
              {"g_sup", gs},
              {"within_g_bounds", est.lo >= -gs - 1e-9 && est.hi <= gs + 1e-9}};
}

std::string range_csv(const IntervalEstimate& est) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : est.samples) rows.push_back({s.c, s.value});
  return csv("c,I_value", rows);
}

Outcome range_resonance_cmd(const ConfigFile& cfg, const Overrides& ov, const OutputDir& out,
                            bool degeneracy) {
  const ResonanceSetup setup = build_resonance(cfg, ov);
  const ResonantProblem& prob = setup.prob;
  Outcome oc;
  Json& r = oc.result;
  r["command"] = degeneracy ? "scan degeneracy" : "range resonance";
  if (prob.dim == 2) {
    if (degeneracy) throw ConfigError("scan degeneracy is scalar");
    const RangeCloud cloud = sample_range_nd(prob, setup.box, setup.resolution, setup.wx, ov.jobs);
    std::size_t failures = 0;
    Json pts = Json::array();
    for (std::size_t i = 0; i < cloud.x.size(); ++i) {
      failures += cloud.failed[i] ? 1 : 0;
      pts.push_back(Json{{"x", cloud.x[i]},
                         {"image", cloud.failed[i] ? Json(nullptr) : Json(cloud.image[i])},
                         {"failed", static_cast<bool>(cloud.failed[i])}});
    }
    r["status"] = failures == 0 ? "ok" : "failure";
    r["wirtinger_holds"] = cloud.wirtinger_holds;
    r["max_neighbor_jump"] = cloud.max_neighbor_jump;
    r["failed_points"] = failures;
    r["points"] = pts;
    oc.code = failures == 0 ? kOk : kNumericalFailure;
    return oc;
  }
  Branch branch;
  const IntervalEstimate est = compute_range(prob, setup.opts, &branch);
  out.write("branch.csv", branch_csv(branch));
  out.write("range.csv", range_csv(est));
  r["status"] = "ok";
  r["range"] = interval_json(est, prob);
  if (degeneracy) {
    r["width"] = est.hi - est.lo;
    r["degeneracy_tol"] = setup.degeneracy_tol;
    r["singleton_within_tol"] = est.hi - est.lo <= setup.degeneracy_tol;
    r["note"] = "reported only; degeneracy of the range is not asserted";
  }
  return oc;
}

Outcome continuity_cmd(const ConfigFile& cfg, const Overrides& ov) {
  const ResonanceSetup setup = build_resonance(cfg, ov);
  if (setup.perturbation.empty() || setup.amplitudes.empty()) {
    throw ConfigError("[experiment] needs 'perturbation' and 'amplitudes' or 'halvings'");
  }
  const PeriodicSignal pert = sample_signal(parse_time_signal(setup.perturbation), setup.prob.omega,
                                            setup.prob.n_nodes - 1);
  const auto rows = continuity_experiment(setup.prob, pert, setup.amplitudes, setup.opts, ov.jobs);
  Outcome oc;
  Json& r = oc.result;
  r["command"] = "experiment continuity";
  r["status"] = "ok";
  Json table = Json::array();
  for (const auto& row : rows) {
    table.push_back(Json{{"amplitude", row.amplitude}, {"lo", row.lo}, {"hi", row.hi}, {"distance", row.distance}});
  }
  r["rows"] = table;
  return oc;
}

struct MirandaCase {
  std::string name;
  PlanarMap phi;
  double t;
  double x;
};

std::vector<MirandaCase> miranda_cases() {
  return {
      {"diagonal", [](double t, double x) { return std::array<double, 2>{2 * t - 1, 2 * x - 1}; }, 0.5, 0.5},
      {"quadratic", [](double t, double x) { return std::array<double, 2>{t - x * x - 0.1, x - 0.25}; },
       0.1625, 0.25},
      {"substitution", [](double t, double x) { return std::array<double, 2>{t - 0.3, x - t}; }, 0.3, 0.3},
  };
}

Outcome miranda_cmd(const std::optional<ConfigFile>& cfg) {
  std::string which = "all";
  std::optional<double> M;
  int n_steps = 64;
  if (cfg) {
    const toml::table& d = cfg->section("demo");
    if (auto v = d["case"].value<std::string>()) which = *v;
    if (auto v = d["M"].value<double>()) M = *v;
    if (auto v = d["n_steps"].value<std::int64_t>()) n_steps = static_cast<int>(*v);
  }
  Outcome oc;
  Json& r = oc.result;
  r["command"] = "demo poincare-miranda";
  Json roots = Json::array();
  bool matched = false;
  for (const auto& c : miranda_cases()) {
    if (which != "all" && which != c.name) continue;
    matched = true;
    double sup = 0.0;
    for (int i = 0; i <= 100; ++i) {
      for (int j = 0; j <= 100; ++j) sup = std::max(sup, std::abs(c.phi(i / 100.0, j / 100.0)[1]));
    }
    const MirandaRoot root = poincare_miranda_solve(c.phi, M.value_or(sup), n_steps);
    const auto val = c.phi(root.t, root.x);
    roots.push_back(Json{{"case", c.name},
                         {"t", root.t},
                         {"x", root.x},
                         {"phi", {val[0], val[1]}},
                         {"expected", {c.t, c.x}},
                         {"error", std::max(std::abs(root.t - c.t), std::abs(root.x - c.x))},
                         {"edge_conditions_hold", root.edge_conditions_hold}});
  }
  if (!matched) throw ConfigError("unknown demo case '" + which + "'");
  r["status"] = "ok";
  r["roots"] = roots;
  return oc;
}

Json certificate_json(const NonexistenceCertificate& c) {
  return Json{{"margin", c.margin}, {"mean_mu_vstar", c.mean_mu_vstar}, {"mean_D", c.mean_D}};
}

Outcome solve_chemostat_cmd(const ConfigFile& cfg, const Overrides& ov, const OutputDir& out) {
  const ChemostatSetup setup = build_chemostat(cfg, ov);
  const ChemostatModel& m = setup.model;
  Outcome oc;
  Json& r = oc.result;
  r["command"] = "solve chemostat";
  r["mu"] = m.mu_label;
  const StepPlan plan = step_plan(m);
  r["steps_per_period"] = plan.steps;
  r["delay_aligned"] = plan.aligned;
  const auto found = find_periodic_orbit(m, setup.x0_max, setup.tol);
  if (const auto* cert = std::get_if<NonexistenceCertificate>(&found)) {
    r["status"] = "no_solution";
    r["certificate"] = certificate_json(*cert);
    oc.code = kCertifiedNoSolution;
    return oc;
  }
  const PeriodicOrbit& orbit = std::get<PeriodicOrbit>(found);
  const Trajectory& tr = orbit.trajectory;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < tr.t.size(); ++k) rows.push_back({tr.t[k], tr.s[k], tr.x[k]});
  out.write("trajectory.csv", csv("t,s,x", rows));
  const bool ok = orbit.verified();
  r["status"] = ok ? "ok" : "failure";
  r["x0"] = orbit.x0;
  r["phi_value"] = orbit.phi_value;
  r["poincare_residual"] = orbit.poincare_residual;
  r["log_identity_defect"] = orbit.log_identity_defect;
  r["checks"] = Json{{"positivity", orbit.positivity_ok},
                     {"below_vstar", orbit.below_vstar_ok},
                     {"x_lower_bound", orbit.x_lower_bound_ok}};
  r["verified"] = ok;
  r["scan_probes"] = orbit.scan_probes;
  r["bisection_steps"] = orbit.bisection_steps;
  Json hist = grid_json(orbit.phi);
  r["history"] = Json{{"t", hist["t"]}, {"s", hist["u"]}};
  oc.code = ok ? kOk : kNumericalFailure;
  return oc;
}

Outcome check_cmd(const ConfigFile& cfg, const Overrides& ov) {
  Outcome oc;
  Json& r = oc.result;
  r["command"] = "check condition";
  const std::string kind = declared_kind(cfg).value_or("");
  if (kind == "resonance") {
    const ResonanceSetup setup = build_resonance(cfg, ov);
    const WirtingerCheck w = check_wirtinger(setup.prob, setup.wirtinger_radius);
    r["wirtinger"] = Json{{"holds", w.holds}, {"sup_quotient", w.sup_quotient}, {"threshold", w.threshold},
                          {"radius", setup.wirtinger_radius}};
    if (setup.prob.g_class == NonlinearityClass::LandesmanLazer && setup.prob.dim == 1) {
      r["landesman_lazer_limits"] = Json{{"holds", check_landesman_lazer_limits(setup.prob)},
                                         {"g_minus", setup.prob.g_minus},
                                         {"g_plus", setup.prob.g_plus}};
    }
  } else if (kind == "chemostat") {
    const ChemostatSetup setup = build_chemostat(cfg, ov);
    const double margin = existence_margin(setup.model);
    r["existence_condition"] = Json{{"holds", margin > 0}, {"margin", margin}};
  } else {
    throw ConfigError("check condition needs problem.kind = \"resonance\" or \"chemostat\"");
  }
  r["status"] = "ok";
  return oc;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Continuation solvers for boundary value problems with a free parameter"};
  app.name("bvpcont");
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::size_t> grid;
  std::optional<double> tol;
  int jobs = 1;
  app.add_option("--config", config_path, "TOML run configuration");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--grid", grid, "grid size override (nodes, samples or steps per period)");
  app.add_option("--tol", tol, "tolerance override");
  app.add_option("--jobs", jobs, "threads for independent sweeps")->check(CLI::PositiveNumber);
  app.require_subcommand(1);

  std::string target;
  auto add = [&](const std::string& name, const std::string& help, std::vector<std::string> choices) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("target", target, "what to run")->required()->check(CLI::IsMember(choices));
    return sub;
  };
  CLI::App* solve = add("solve", "solve a problem", {"nonlocal", "resonance", "chemostat"});
  CLI::App* range = add("range", "range of the mean nonlinearity", {"resonance"});
  CLI::App* scan = add("scan", "range degeneracy report", {"degeneracy"});
  CLI::App* experiment = add("experiment", "Hausdorff continuity table", {"continuity"});
  CLI::App* demo = add("demo", "built-in demonstrations", {"poincare-miranda"});
  CLI::App* check = add("check", "hypothesis checks", {"condition"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  const Overrides ov{grid, tol, jobs};
  if (grid && *grid < 2) {
    std::cerr << "bvpcont: --grid must be at least 2\n";
    return kConfigError;
  }
  if (tol && !(*tol > 0)) {
    std::cerr << "bvpcont: --tol must be positive\n";
    return kConfigError;
  }
  try {
    std::optional<ConfigFile> cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    const OutputDir out(out_dir);
    Outcome oc;
    try {
      if (solve->parsed()) {
        check_kind(cfg, target);
        if (target == "nonlocal") oc = solve_nonlocal_cmd(*cfg, ov, out);
        if (target == "resonance") oc = solve_resonance_cmd(*cfg, ov, out);
        if (target == "chemostat") oc = solve_chemostat_cmd(*cfg, ov, out);
      } else if (range->parsed()) {
        check_kind(cfg, "resonance");
        oc = range_resonance_cmd(*cfg, ov, out, false);
      } else if (scan->parsed()) {
        check_kind(cfg, "resonance");
        oc = range_resonance_cmd(*cfg, ov, out, true);
      } else if (experiment->parsed()) {
        check_kind(cfg, "resonance");
        oc = continuity_cmd(*cfg, ov);
      } else if (demo->parsed()) {
        oc = miranda_cmd(cfg);
      } else if (check->parsed()) {
        oc = check_cmd(need_config(cfg), ov);
      }
    } catch (const SolverError& e) {
      oc.result = Json{{"command", app.get_subcommands().front()->get_name() + " " + target}};
      oc.result.update(failure_json(e));
      oc.code = kNumericalFailure;
      std::cerr << "bvpcont: " << to_string(e.code()) << ": " << e.what() << '\n';
    }
    out.write("result.json", oc.result.dump(2) + "\n");
    return oc.code;
  } catch (const ConfigError& e) {
    std::cerr << "bvpcont: config: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "bvpcont: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "bvpcont: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace bvpcont::cli
