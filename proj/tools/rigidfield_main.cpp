// rigidfield: command-line front-end for scenario runs and sweeps.

#include "rigidfield/errors.hpp"
#include "rigidfield/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using namespace rigidfield;

namespace {

struct Common {
  std::string config;
  std::string out;
  bool deterministic = false;
  std::string eps_list;
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "scenario config file");
  if (config_required) opt->required();
  cmd->add_option("--out", c.out, "output directory (overrides output.dir)");
  cmd->add_flag("--deterministic", c.deterministic, "bitwise-reproducible outputs, no timings");
  cmd->add_option("--eps-list", c.eps_list, "comma-separated, strictly decreasing");
  cmd->add_option("--kappa", c.kappa, "k_eps = eps^-kappa");
  cmd->add_option("--rho", c.rho, "xi_eps = eps^rho");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.deterministic) cfg.deterministic = true;
  if (!c.eps_list.empty()) cfg.eps_list = parse_number_list(c.eps_list);
  if (!std::isnan(c.kappa)) cfg.kappa = c.kappa;
  if (!std::isnan(c.rho)) cfg.rho = c.rho;
  cfg.validate();
  return cfg;
}

int cmd_validate(const ExperimentConfig& cfg) {
  const Scenario sc = build_scenario(cfg);
  const ValidationReport model = validate_model(sc.model);
  const MapReport map = validate_map(sc.target);
  bool ok = model.passed() && map.passed;
  for (const auto& c : model.checks)
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
  for (const auto& issue : map.issues) std::cout << "FAIL map: " << issue << '\n';
  std::cout << "limit energy " << limit_energy(sc.target, sc.model) << '\n';
  return ok ? kExitOk : kExitInvalid;
}

int cmd_profile(const ExperimentConfig& cfg, double T, double h, const std::string& potential) {
  const ScalarFn V = make_potential(potential.empty() ? cfg.model.potential : potential);
  const ProfileSolution p = solve_profile(V, T > 0 ? T : cfg.profile_T, h > 0 ? h : cfg.profile_h);
  std::filesystem::create_directories(cfg.out_dir);
  write_profile_csv(cfg.out_dir / "profile.csv", p);
  std::cout.precision(17);
  std::cout << "T " << p.T << "\nh " << p.h << "\nenergy " << p.energy << "\nC_V " << surface_constant(V)
            << "\niterations " << p.iterations << "\nequipartition_defect " << equipartition_defect(p, V) << '\n';
  return kExitOk;
}

int cmd_segment(ExperimentConfig cfg, const std::string& u_path, const std::string& v_path) {
  const Scenario sc = build_scenario(cfg);
  SegmentationResult seg;
  StructuredGrid grid = StructuredGrid::uniform_1d(0.0, 1.0, 2);
  if (!u_path.empty() || !v_path.empty()) {
    if (u_path.empty() || v_path.empty()) throw InvalidInput("segment: --u and --v go together");
    const FieldFile u = load_field(u_path);
    const FieldFile v = load_field(v_path);
    if (v.components != 1 || u.grid.xs() != v.grid.xs() || u.grid.ys() != v.grid.ys())
      throw InvalidInput("segment: u and v fields live on different grids");
    grid = u.grid;
    seg = segment_rigid(u.grid, u.data, u.components, v.data, cfg.segment_threshold, sc.target.well);
  } else {
    cfg.eps_list = {cfg.eps_list.back()};
    SweepArtifacts art;
    sweep(cfg, &art);
    grid = art.state->grid;
    seg = *art.segmentation;
  }
  std::filesystem::create_directories(cfg.out_dir);
  nlohmann::json j = seg;
  std::ofstream(cfg.out_dir / "segmentation.json") << j.dump(2) << '\n';
  std::cout << "components " << seg.components.size() << ", fitted " << seg.fitted_count() << '\n';
  for (const auto& c : seg.components)
    if (c.fitted) std::cout << "  cells " << c.cells.size() << " residual " << c.residual << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field approximation of brittle fracture in rigid and linearised materials"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, profile_opts, segment_opts, validate_opts;
  auto* run = app.add_subcommand("run", "sweep plus summary, CSV and field dumps");
  add_common(run, run_opts, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "convergence table on stdout and in sweep.csv");
  add_common(sweep_cmd, sweep_opts, true);
  auto* profile = app.add_subcommand("profile", "solve the optimal 1D transition");
  add_common(profile, profile_opts, false);
  double T = 0.0, h = 0.0;
  std::string potential;
  profile->add_option("--horizon", T, "half-line truncation T");
  profile->add_option("--spacing", h, "grid spacing h");
  profile->add_option("--potential", potential, "at2, at1 or double_well");
  auto* segment = app.add_subcommand("segment", "rigid segmentation of the finest state or of dumped fields");
  add_common(segment, segment_opts, true);
  std::string u_path, v_path;
  segment->add_option("--u", u_path, "displacement .pfld");
  segment->add_option("--v", v_path, "phase field .pfld");
  auto* validate = app.add_subcommand("validate", "check the config, model hypotheses and target map");
  add_common(validate, validate_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run) {
      run_scenario(resolve(run_opts), std::cerr);
      return kExitOk;
    }
    if (*sweep_cmd) {
      const ExperimentConfig cfg = resolve(sweep_opts);
      const auto rows = sweep(cfg);
      std::filesystem::create_directories(cfg.out_dir);
      std::ofstream csv(cfg.out_dir / "sweep.csv");
      write_sweep_csv(csv, rows);
      write_sweep_csv(std::cout, rows);
      return kExitOk;
    }
    if (*profile) return cmd_profile(resolve(profile_opts), T, h, potential);
    if (*segment) return cmd_segment(resolve(segment_opts), u_path, v_path);
    if (*validate) return cmd_validate(resolve(validate_opts));
  } catch (const std::exception& e) {
    return report_failure(e, std::cerr);
  }
  return kExitInternal;
}
