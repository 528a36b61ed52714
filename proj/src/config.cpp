#include "rigidfield/config.hpp"

#include "rigidfield/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rigidfield {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kScenarios = {"bar1d",          "crack2d_vertical",   "crack2d_diagonal", "crack2d_lshape",
                                          "two_piece_rotation", "two_piece_skew", "two_wells"};

const std::map<std::string, std::set<std::string>> kKeys = {
    {"scenario", {"name", "mode", "angle", "stretch"}},
    {"model", {"well", "alpha", "degradation", "potential", "finsler", "finsler_params"}},
    {"schedule", {"kappa", "rho", "eps_list"}},
    {"grid", {"cells_per_eps", "refine_facets"}},
    {"profile", {"T", "h"}},
    {"solver", {"tol", "max_outer", "cg_tol", "max_gauss_newton", "pin_v"}},
    {"diagnostics", {"coarea_delta", "coarea_levels", "segment_threshold"}},
    {"output", {"dir", "deterministic", "seed", "dump_fields"}},
};

std::string unquote(std::string s) {
  boost::algorithm::trim(s);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    s = s.substr(1, s.size() - 2);
  return s;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = boost::algorithm::to_lower_copy(unquote(text));
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidInput("config: " + key + " must be true or false");
}

int parse_int(const std::string& key, const std::string& text) {
  const double x = parse_number(text);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw InvalidInput("config: " + key + " must be an integer");
  return static_cast<int>(x);
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string s = unquote(text);
  const auto slash = s.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const double num = parse_number(s.substr(0, slash));
      const double den = parse_number(s.substr(slash + 1));
      if (den == 0.0) throw InvalidInput("config: zero denominator in '" + s + "'");
      return num / den;
    }
    const double x = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(x)) throw std::invalid_argument(s);
    return x;
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidInput("config: '" + s + "' is not a number");
  }
}

std::vector<double> parse_number_list(const std::string& text) {
  std::string s = unquote(text);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw InvalidInput("config: unterminated list '" + s + "'");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<double> out;
  boost::algorithm::trim(s);
  if (s.empty()) return out;
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::algorithm::is_any_of(","));
  for (const auto& p : parts) out.push_back(parse_number(p));
  return out;
}

std::string mode_name(RunMode m) { return m == RunMode::Solver ? "solver" : "recovery"; }

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    const auto known = kKeys.find(section);
    if (known == kKeys.end()) {
      if (!body.data().empty()) throw InvalidInput("config: key '" + section + "' outside a section");
      throw InvalidInput("config: unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!known->second.count(key)) throw InvalidInput("config: unknown key '" + key + "' in [" + section + "]");
      const std::string val = node.data();
      const std::string name = section + "." + key;
      if (name == "scenario.name") {
        c.scenario = unquote(val);
      } else if (name == "scenario.mode") {
        const std::string m = unquote(val);
        if (m == "recovery")
          c.mode = RunMode::Recovery;
        else if (m == "solver")
          c.mode = RunMode::Solver;
        else
          throw InvalidInput("config: scenario.mode must be recovery or solver");
      } else if (name == "scenario.angle") {
        c.angle = parse_number(val);
      } else if (name == "scenario.stretch") {
        c.stretch = parse_number(val);
      } else if (name == "model.well") {
        c.well = unquote(val);
      } else if (name == "model.alpha") {
        c.alpha = parse_number(val);
      } else if (name == "model.degradation") {
        c.model.degradation = unquote(val);
      } else if (name == "model.potential") {
        c.model.potential = unquote(val);
      } else if (name == "model.finsler") {
        c.model.finsler = unquote(val);
      } else if (name == "model.finsler_params") {
        c.model.finsler_params = parse_number_list(val);
      } else if (name == "schedule.kappa") {
        c.kappa = parse_number(val);
      } else if (name == "schedule.rho") {
        c.rho = parse_number(val);
      } else if (name == "schedule.eps_list") {
        c.eps_list = parse_number_list(val);
      } else if (name == "grid.cells_per_eps") {
        c.grid.cells_per_eps = parse_int(name, val);
      } else if (name == "grid.refine_facets") {
        c.grid.refine_facets = parse_bool(name, val);
      } else if (name == "profile.T") {
        c.profile_T = parse_number(val);
      } else if (name == "profile.h") {
        c.profile_h = parse_number(val);
      } else if (name == "solver.tol") {
        c.solver.tol = parse_number(val);
      } else if (name == "solver.max_outer") {
        c.solver.max_outer = parse_int(name, val);
      } else if (name == "solver.cg_tol") {
        c.solver.cg_tol = parse_number(val);
      } else if (name == "solver.max_gauss_newton") {
        c.solver.max_gauss_newton = parse_int(name, val);
      } else if (name == "solver.pin_v") {
        c.pin_v = parse_bool(name, val);
      } else if (name == "diagnostics.coarea_delta") {
        c.coarea_delta = parse_number(val);
      } else if (name == "diagnostics.coarea_levels") {
        c.coarea_levels = parse_int(name, val);
      } else if (name == "diagnostics.segment_threshold") {
        c.segment_threshold = parse_number(val);
      } else if (name == "output.dir") {
        c.out_dir = unquote(val);
      } else if (name == "output.deterministic") {
        c.deterministic = parse_bool(name, val);
      } else if (name == "output.seed") {
        c.seed = static_cast<std::uint64_t>(parse_int(name, val));
      } else if (name == "output.dump_fields") {
        c.dump_fields = parse_bool(name, val);
      }
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void ExperimentConfig::validate() const {
  if (!kScenarios.count(scenario)) throw InvalidInput("config: unknown scenario '" + scenario + "'");
  if (well != "rotation" && well != "skew" && well != "finite")
    throw InvalidInput("config: model.well must be rotation, skew or finite");
  if ((well == "finite") != (scenario == "two_wells"))
    throw InvalidInput("config: the finite well is only defined for the two_wells scenario");
  if (!(alpha > 0.0)) throw InvalidInput("config: model.alpha must be > 0");
  make_degradation(model.degradation);
  make_potential(model.potential);
  make_finsler(model.finsler, model.finsler_params);
  if (!(kappa > 0.0)) throw InvalidInput("config: schedule.kappa must be > 0");
  if (!(rho > 1.0)) throw InvalidInput("config: schedule.rho must be > 1");
  if (eps_list.empty()) throw InvalidInput("config: schedule.eps_list is empty");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0 && eps_list[k] < 1.0)) throw InvalidInput("config: eps_list entries must lie in (0,1)");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
      throw InvalidInput("config: eps_list must be strictly decreasing");
  }
  if (mode == RunMode::Recovery) {
    if (grid.cells_per_eps < 8) throw InvalidInput("config: grid.cells_per_eps must be >= 8 (eps >= 8 h)");
    if (!grid.refine_facets)
      for (double e : eps_list)
        if (std::pow(e, rho) < 2.0 * e / grid.cells_per_eps)
          throw InvalidInput("config: grid_rule does not resolve xi_eps by two cells");
  } else if (grid.cells_per_eps < 2) {
    throw InvalidInput("config: grid.cells_per_eps must be >= 2");
  }
  if (!(profile_T > 0.0) || !(profile_h > 0.0) || profile_h > profile_T / 10.0)
    throw InvalidInput("config: profile needs T > 0 and 0 < h <= T/10");
  if (!(solver.tol > 0.0) || !(solver.cg_tol > 0.0) || solver.max_outer < 1 || solver.max_gauss_newton < 1)
    throw InvalidInput("config: solver tolerances and iteration caps must be positive");
  if (!(coarea_delta > 0.0 && coarea_delta < 0.5)) throw InvalidInput("config: coarea_delta must lie in (0, 1/2)");
  if (coarea_levels < 16) throw InvalidInput("config: coarea_levels must be >= 16");
  if (!(segment_threshold > 0.0 && segment_threshold < 1.0))
    throw InvalidInput("config: segment_threshold must lie in (0,1)");
}

SweepOptions ExperimentConfig::sweep_options() const {
  SweepOptions o;
  o.kappa = kappa;
  o.rho = rho;
  o.profile_T = profile_T;
  o.profile_h = profile_h;
  o.grid = grid;
  return o;
}

}  // namespace rigidfield
