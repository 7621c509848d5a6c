#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "granusol/analysis.hpp"
#include "granusol/config.hpp"
#include "granusol/output.hpp"
#include "granusol/particle_io.hpp"
#include "granusol/scenario.hpp"
#include "granusol/shape_metrics.hpp"

namespace fs = std::filesystem;
using namespace granusol;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;

void honor_environment() {
  if (const char* t = std::getenv("GRANUSOL_THREADS")) {
    if (std::string(t) != "1")
      std::cerr << "note: this build is single threaded; GRANUSOL_THREADS="
                << t << " is ignored\n";
  }
  if (const char* d = std::getenv("GRANUSOL_DETERMINISTIC")) {
    if (std::string(d) == "0")
      std::cerr << "note: runs are always deterministic; "
                   "GRANUSOL_DETERMINISTIC=0 has no effect\n";
  }
}

bool check(bool ok, const std::string& what) {
  std::cout << (ok ? "PASS " : "FAIL ") << what << "\n";
  return ok;
}

std::map<std::string, double> read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError("cannot open " + path);
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    key.erase(0, key.find_first_not_of(" \t"));
    out[key] = std::stod(line.substr(eq + 1));
  }
  return out;
}

/// Expected slab-mean concentration along one axis for a wrapped point
/// source: the 1-D marginal of the moving Gaussian, image-summed.
std::vector<double> expected_axis_profile(int n, double dx, double area,
                                          double mass, double d_mol,
                                          double t, double x0, double u) {
  std::vector<double> out(n, 0.0);
  const double length = n * dx;
  const double center = x0 + u * t;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * dx;
    double g = 0.0;
    for (int k = -2; k <= 2; ++k) {
      const double r = x - center + k * length;
      g += std::exp(-r * r / (4.0 * d_mol * t)) /
           std::sqrt(4.0 * M_PI * d_mol * t);
    }
    out[i] = mass / area * g;
  }
  return out;
}

int modular_bin_distance(int a, int b, int n) {
  int d = std::abs(a - b) % n;
  return std::min(d, n - d);
}

struct ProfileCheck {
  double peak_linf = 0.0;  // relative error at the measured peak
  int peak_bin = 0;
};

ProfileCheck compare_at_peak(const std::vector<double>& measured,
                             const std::vector<double>& expected) {
  ProfileCheck r;
  std::size_t peak = 0;
  for (std::size_t i = 1; i < measured.size(); ++i)
    if (measured[i] > measured[peak]) peak = i;
  r.peak_bin = static_cast<int>(peak);
  r.peak_linf =
      std::abs(measured[peak] - expected[peak]) / expected[peak];
  return r;
}

bool validate_diffusion() {
  std::cout << "-- diffusion oracle --\n";
  auto cfg = scenario::scenario_diffusion(200000);
  cfg.steps = 250;  // t = 0.05 s
  scenario::World w(cfg);
  const auto n0 = w.walker_count();
  for (long s = 0; s < cfg.steps; ++s) w.step();

  bool ok = check(w.walker_count() == n0, "walker count exactly conserved");
  const double t = w.time();
  const double d_mol = cfg.diffusion;
  const auto conc = solute::deposit(w.swarm(), cfg.dims, cfg.dx);
  const double area = 0.1 * 0.1;

  for (int axis = 0; axis < 3; ++axis) {
    // sample variance straight from the walkers
    double mean = 0.0;
    for (const auto& x : w.swarm().positions) mean += x[axis];
    mean /= static_cast<double>(n0);
    double var = 0.0;
    for (const auto& x : w.swarm().positions) {
      const double r = x[axis] - mean;
      var += r * r;
    }
    var /= static_cast<double>(n0);
    ok &= check(std::abs(var - 2.0 * d_mol * t) / (2.0 * d_mol * t) < 0.03,
                "axis " + std::to_string(axis) + " variance within 3% of 2Dt");

    const auto profile = solute::axis_profile(conc, axis);
    const auto expected = expected_axis_profile(
        static_cast<int>(profile.size()), cfg.dx, area, 1.0, d_mol, t, 0.05,
        0.0);
    const auto cmp = compare_at_peak(profile, expected);
    ok &= check(cmp.peak_linf < 0.05,
                "axis " + std::to_string(axis) + " profile peak within 5%");
  }
  return ok;
}

bool validate_advection() {
  std::cout << "-- advection oracle --\n";
  auto cfg = scenario::scenario_advection(200000);
  cfg.steps = 200;  // t = 0.04 s, drift 40 bins
  scenario::World w(cfg);
  const auto n0 = w.walker_count();
  for (long s = 0; s < cfg.steps; ++s) w.step();

  bool ok = check(w.walker_count() == n0, "walker count exactly conserved");
  const double t = w.time();
  const auto conc = solute::deposit(w.swarm(), cfg.dims, cfg.dx);
  const auto profile = solute::axis_profile(conc, 0);
  const auto expected = expected_axis_profile(
      static_cast<int>(profile.size()), cfg.dx, 0.01, 1.0, cfg.diffusion, t,
      0.05, 1.0);
  const auto cmp = compare_at_peak(profile, expected);
  ok &= check(cmp.peak_linf < 0.05, "x profile peak within 5%");

  const double expected_center = std::fmod(0.05 + 1.0 * t, 0.1);
  const int expected_bin = static_cast<int>(expected_center / cfg.dx);
  ok &= check(modular_bin_distance(cmp.peak_bin, expected_bin,
                                   static_cast<int>(profile.size())) <= 1,
              "peak drifts at 1 m/s within one bin");
  return ok;
}

std::string write_temp_sphere(double r) {
  const std::string path =
      (fs::temp_directory_path() / "granusol_validate_sphere.txt").string();
  std::ofstream out(path);
  out << "sphere " << r << "\n";
  return path;
}

bool validate_settling() {
  std::cout << "-- settling micro run --\n";
  const auto file = write_temp_sphere(2e-3);
  config::SimulationConfig cfg;
  cfg.dims = {20, 20, 40};
  cfg.dx = 1e-3;
  cfg.face_rules = {lbm::FaceRule::Wall, lbm::FaceRule::Wall,
                    lbm::FaceRule::Wall};
  cfg.dt_lbm = 5e-4;
  cfg.dt_dem = 5e-6;
  cfg.dt_solute = 5e-4;
  cfg.steps = 150;
  cfg.rho_f = 1000.0;
  cfg.mu = 0.05;
  cfg.diffusion = 2e-9;
  cfg.walkers = 20000;
  cfg.walker_mass = 1e-4;
  cfg.band = {Vec3(0.0, 0.0, 0.0), Vec3(0.02, 0.02, 0.008)};
  cfg.particle_file = file;
  cfg.particle_count = 1;
  cfg.particle_region = {Vec3(0.009, 0.009, 0.024), Vec3(0.011, 0.011, 0.028)};
  cfg.particle_density = 1050.0;
  cfg.gravity = Vec3(0.0, 0.0, -9.81);
  cfg.seed = 11;

  scenario::World w(cfg);
  const auto n0 = w.walker_count();
  const double m0 = w.fluid_mass();
  const double z0 = w.particles()[0].pose.translation.z();
  bool count_ok = true;
  for (long s = 0; s < cfg.steps; ++s) {
    w.step();
    count_ok = count_ok && w.walker_count() == n0;
  }
  bool ok = check(count_ok, "walker count exactly conserved every step");
  ok &= check(w.exterior_violations() == 0, "no walker inside the body");
  ok &= check(w.particles()[0].pose.translation.z() < z0,
              "dense particle settles downward");
  ok &= check(std::abs(w.fluid_mass() - m0) / m0 < 1e-3,
              "fluid mass drift bounded");
  fs::remove(file);
  return ok;
}

bool validate_oscillator() {
  std::cout << "-- oscillator micro run --\n";
  const auto file = write_temp_sphere(2e-3);
  config::SimulationConfig cfg;
  cfg.dims = {16, 16, 16};
  cfg.dx = 1e-3;
  cfg.dt_lbm = 2e-4;
  cfg.dt_dem = 2e-6;
  cfg.dt_solute = 2e-4;
  cfg.steps = 120;
  cfg.rho_f = 1000.0;
  cfg.tau = 0.6;
  cfg.diffusion = 2e-9;
  cfg.walkers = 20000;
  cfg.walker_mass = 1e-4;
  cfg.band = {Vec3(0.0, 0.0, 0.006), Vec3(0.016, 0.016, 0.01)};
  cfg.particle_file = file;
  cfg.particle_count = 3;
  cfg.particle_density = 1100.0;
  cfg.forcing_amplitude = 2.0;
  cfg.forcing_period = 20000.0;
  cfg.forcing_direction = Vec3::UnitX();
  cfg.seed = 13;

  scenario::World w(cfg);
  const auto n0 = w.walker_count();
  const double m0 = w.fluid_mass();
  bool count_ok = true, exterior_ok = true;
  for (long s = 0; s < cfg.steps; ++s) {
    w.step();
    count_ok = count_ok && w.walker_count() == n0;
    if (s % 20 == 19) exterior_ok = exterior_ok && w.exterior_violations() == 0;
  }
  bool ok = check(count_ok, "walker count exactly conserved every step");
  ok &= check(exterior_ok, "no walker ends a step inside a body");
  const auto& st = w.last_walker_stats();
  ok &= check(st.type_i + st.type_ii + st.type_iii + st.type_iv == n0,
              "walker type tally covers the population");
  ok &= check(std::abs(w.fluid_mass() - m0) / m0 < 1e-3,
              "fluid mass drift bounded");
  double moved = 0.0;
  for (const auto& p : w.particles()) moved += p.velocity.norm();
  ok &= check(moved > 0.0, "forcing sets the particles in motion");
  fs::remove(file);
  return ok;
}

int cmd_validate(const std::string& which) {
  bool ok = true;
  if (which == "diffusion") ok = validate_diffusion();
  else if (which == "advection") ok = validate_advection();
  else if (which == "settling") ok = validate_settling();
  else if (which == "oscillator") ok = validate_oscillator();
  else if (which == "all")
    ok = validate_diffusion() && validate_advection() && validate_settling() &&
         validate_oscillator();
  else {
    std::cerr << "unknown case '" << which
              << "'; expected diffusion, advection, settling, oscillator or "
                 "all\n";
    return kExitError;
  }
  std::cout << (ok ? "validation passed\n" : "validation FAILED\n");
  return ok ? kExitOk : kExitValidation;
}

int cmd_run(const std::string& config_path, const std::string& resume_path) {
  auto cfg = config::parse_file(config_path);
  for (const auto& wmsg : config::validate(cfg))
    std::cerr << "warning: " << wmsg << "\n";

  scenario::World w(cfg);
  if (!resume_path.empty()) {
    w.restore(output::read_checkpoint(resume_path));
    std::cout << "resumed at step " << w.current_step() << "\n";
  }
  w.run(true);

  std::cout << "completed " << w.current_step() << " steps (t = " << w.time()
            << " s), " << w.walker_count() << " walkers, outputs in "
            << cfg.output_dir << "\n";
  return kExitOk;
}

struct RunData {
  analysis::ProfileSeries series;
  std::map<std::string, double> params;
  std::map<std::string, double> features;  // first shape row, when present
  analysis::DispersionReport report;
};

RunData load_run(const std::string& dir) {
  RunData run;
  const auto table = output::read_csv(dir + "/series.csv");
  run.series.times = table.column("time");
  run.series.means = table.column("mean");
  run.series.variances = table.column("variance");
  run.params = read_params(dir + "/params.txt");

  const std::string feat_path = dir + "/features.csv";
  if (fs::exists(feat_path)) {
    const auto feats = output::read_csv(feat_path);
    if (!feats.rows.empty())
      for (std::size_t c = 0; c < feats.columns.size(); ++c)
        run.features[feats.columns[c]] = feats.rows[0][c];
  }
  return run;
}

int cmd_analyze(const std::vector<std::string>& dirs,
                const std::string& correlations_path) {
  std::vector<RunData> runs;
  for (const auto& dir : dirs) {
    RunData run = load_run(dir);
    const double radius = run.params.at("R");
    const double uslip = run.params.at("U_slip");
    const double phi = run.params.at("phi_solid");
    run.report =
        analysis::dispersion_coefficient(run.series, radius, uslip, phi);
    const auto re_pe = analysis::reynolds_peclet(
        run.params.at("rho"), uslip, 2.0 * radius, run.params.at("mu"),
        run.params.at("diffusion"));

    std::ostringstream rep;
    rep << std::setprecision(10);
    rep << "K = " << run.report.K << "\n"
        << "D_alpha = " << run.report.D_alpha << "\n"
        << "r_squared = " << run.report.r_squared << "\n"
        << "window = [" << run.report.window.begin << ", "
        << run.report.window.end << ")\n"
        << "U_slip = " << uslip << "\n"
        << "phi_solid = " << phi << "\n"
        << "Re = " << re_pe.first << "\n"
        << "Pe = " << re_pe.second << "\n";
    std::ofstream out(dir + "/report.txt");
    if (!out) throw SimError("cannot write " + dir + "/report.txt");
    out << rep.str();
    std::cout << "== " << dir << " ==\n" << rep.str();
    runs.push_back(std::move(run));
  }

  const bool all_have_features =
      !runs.empty() &&
      std::all_of(runs.begin(), runs.end(),
                  [](const RunData& r) { return !r.features.empty(); });
  if (runs.size() >= 2 && all_have_features) {
    std::vector<std::string> cols = {"phi", "C_c", "D_ns", "CSF", "A_m"};
    std::vector<std::string> header;
    std::vector<double> row;
    std::vector<double> dalpha;
    for (const auto& r : runs) dalpha.push_back(r.report.D_alpha);
    for (const auto& col : cols) {
      std::vector<double> xs;
      for (const auto& r : runs) xs.push_back(r.features.at(col));
      header.push_back("rho_" + col);
      row.push_back(analysis::spearman(xs, dalpha));
    }
    output::write_csv(correlations_path, header, {row});
    std::cout << "spearman rank correlations vs D_alpha written to "
              << correlations_path << "\n";
  }
  return kExitOk;
}

int cmd_shape_features(const std::string& particles_path, double dx,
                       double cell) {
  const auto shapes = particle_io::load_particles(particles_path);
  std::cout << "shape,phi,C_c,D_ns,CSF,A_m\n";
  std::cout << std::setprecision(6);
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    const auto f = shape::compute(shapes[s], cell);
    std::cout << s << "," << f.sphericity << "," << f.circularity << ","
              << f.diameter_ratio << "," << f.corey_shape_factor << ","
              << f.max_projected_area / (dx * dx) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  honor_environment();

  CLI::App app{"granusol: coupled grain and solute transport"};
  app.require_subcommand(1);

  std::string config_path, resume_path, case_name, particles_path;
  std::string correlations_path = "correlations.csv";
  std::vector<std::string> dirs;
  double dx_scale = 1.0, cell = 0.0;

  auto* run = app.add_subcommand("run", "run a configured simulation");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_option("--resume", resume_path, "checkpoint file to resume from");

  auto* val = app.add_subcommand(
      "validate", "run a built-in oracle scenario and report pass/fail");
  val->add_option("case", case_name,
                  "diffusion, advection, settling, oscillator or all")
      ->required();

  auto* ana =
      app.add_subcommand("analyze", "dispersion reports from run outputs");
  ana->add_option("dirs", dirs, "run output directories")->required();
  ana->add_option("--correlations", correlations_path,
                  "where the feature correlation table goes");

  auto* shp = app.add_subcommand("shape-features",
                                 "shape descriptor table for a particle file");
  shp->add_option("particles", particles_path, "particle definition file")
      ->required();
  shp->add_option("--dx", dx_scale,
                  "lattice spacing; scales areas into lattice units");
  shp->add_option("--cell", cell, "meshing cell size override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, resume_path);
    if (*val) return cmd_validate(case_name);
    if (*ana) return cmd_analyze(dirs, correlations_path);
    if (*shp) return cmd_shape_features(particles_path, dx_scale, cell);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
