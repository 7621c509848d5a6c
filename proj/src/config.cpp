#include "granusol/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace granusol::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& where) {
  std::size_t used = 0;
  double out;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw SimError("config: " + where + ": not a number: '" + v + "'");
  }
  if (used != v.size())
    throw SimError("config: " + where + ": trailing junk in '" + v + "'");
  return out;
}

long to_long(const std::string& v, const std::string& where) {
  const double d = to_double(v, where);
  const long l = std::lround(d);
  if (static_cast<double>(l) != d)
    throw SimError("config: " + where + ": expected an integer, got '" + v +
                   "'");
  return l;
}

Vec3 to_vec3(const std::string& v, const std::string& where) {
  std::istringstream in(v);
  Vec3 out;
  if (!(in >> out[0] >> out[1] >> out[2]))
    throw SimError("config: " + where + ": expected three numbers, got '" +
                   v + "'");
  std::string rest;
  if (in >> rest)
    throw SimError("config: " + where + ": trailing junk in '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw SimError("config: " + where + ": expected a boolean, got '" + v +
                 "'");
}

lbm::FaceRule to_rule(const std::string& v, const std::string& where) {
  if (v == "periodic") return lbm::FaceRule::Periodic;
  if (v == "wall") return lbm::FaceRule::Wall;
  if (v == "velocity") return lbm::FaceRule::Velocity;
  throw SimError("config: " + where +
                 ": face rule must be periodic, wall or velocity, got '" + v +
                 "'");
}

int to_axis(const std::string& v, const std::string& where) {
  if (v == "x" || v == "0") return 0;
  if (v == "y" || v == "1") return 1;
  if (v == "z" || v == "2") return 2;
  throw SimError("config: " + where + ": axis must be x, y or z, got '" + v +
                 "'");
}

}  // namespace

double SimulationConfig::tau_lbm() const {
  if (tau > 0.0) return tau;
  const double nu_lat = mu / rho_f * dt_lbm / (dx * dx);
  return 3.0 * nu_lat + 0.5;
}

int SimulationConfig::dem_substeps() const {
  if (dt_dem <= 0.0) throw SimError("config: dt_dem must be positive");
  const double ratio = dt_lbm / dt_dem;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
    throw SimError("config: dt_dem must divide dt_lbm evenly");
  return static_cast<int>(n);
}

SimulationConfig parse(std::istream& in, const std::string& label) {
  SimulationConfig c;
  std::string section;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;

  const std::set<std::string> known_sections = {
      "domain", "time", "fluid", "solute", "particles",
      "forcing", "output", "run"};

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string at =
        label + ":" + std::to_string(lineno);

    if (line.front() == '[') {
      if (line.back() != ']')
        throw SimError("config: " + at + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (known_sections.count(section) == 0)
        throw SimError("config: " + at + ": unknown section [" + section +
                       "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SimError("config: " + at + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw SimError("config: " + at + ": key before any section");
    if (key.empty() || value.empty())
      throw SimError("config: " + at + ": empty key or value");

    const std::string full = section + "." + key;
    if (!seen.insert(full).second)
      throw SimError("config: " + at + ": duplicate key " + full);

    if (full == "domain.nx") c.dims.nx = static_cast<int>(to_long(value, at));
    else if (full == "domain.ny") c.dims.ny = static_cast<int>(to_long(value, at));
    else if (full == "domain.nz") c.dims.nz = static_cast<int>(to_long(value, at));
    else if (full == "domain.dx") c.dx = to_double(value, at);
    else if (full == "domain.face_x") c.face_rules[0] = to_rule(value, at);
    else if (full == "domain.face_y") c.face_rules[1] = to_rule(value, at);
    else if (full == "domain.face_z") c.face_rules[2] = to_rule(value, at);
    else if (full == "domain.wall_velocity") c.wall_velocity = to_vec3(value, at);
    else if (full == "time.dt_lbm") c.dt_lbm = to_double(value, at);
    else if (full == "time.dt_dem") c.dt_dem = to_double(value, at);
    else if (full == "time.dt_solute") c.dt_solute = to_double(value, at);
    else if (full == "time.steps") c.steps = to_long(value, at);
    else if (full == "fluid.rho") c.rho_f = to_double(value, at);
    else if (full == "fluid.mu") c.mu = to_double(value, at);
    else if (full == "fluid.tau") c.tau = to_double(value, at);
    else if (full == "fluid.body_accel") c.body_accel = to_vec3(value, at);
    else if (full == "fluid.expected_max_velocity")
      c.expected_max_velocity = to_double(value, at);
    else if (full == "fluid.imposed_velocity")
      c.imposed_velocity = to_vec3(value, at);
    else if (full == "solute.diffusion") c.diffusion = to_double(value, at);
    else if (full == "solute.walker_mass") c.walker_mass = to_double(value, at);
    else if (full == "solute.walkers") c.walkers = to_long(value, at);
    else if (full == "solute.band_lo") c.band.lo = to_vec3(value, at);
    else if (full == "solute.band_hi") c.band.hi = to_vec3(value, at);
    else if (full == "solute.placement") {
      if (value == "uniform") c.grid_placement = false;
      else if (value == "grid") c.grid_placement = true;
      else
        throw SimError("config: " + at +
                       ": placement must be uniform or grid");
    } else if (full == "particles.file") c.particle_file = value;
    else if (full == "particles.count")
      c.particle_count = static_cast<int>(to_long(value, at));
    else if (full == "particles.region_lo") c.particle_region.lo = to_vec3(value, at);
    else if (full == "particles.region_hi") c.particle_region.hi = to_vec3(value, at);
    else if (full == "particles.density") c.particle_density = to_double(value, at);
    else if (full == "forcing.amplitude") c.forcing_amplitude = to_double(value, at);
    else if (full == "forcing.period") c.forcing_period = to_double(value, at);
    else if (full == "forcing.direction") c.forcing_direction = to_vec3(value, at);
    else if (full == "forcing.gravity") c.gravity = to_vec3(value, at);
    else if (full == "output.directory") c.output_dir = value;
    else if (full == "output.cadence")
      c.cadence = static_cast<int>(to_long(value, at));
    else if (full == "output.profile_axis") c.profile_axis = to_axis(value, at);
    else if (full == "output.write_fields") c.write_fields = to_bool(value, at);
    else if (full == "run.seed")
      c.seed = static_cast<std::uint64_t>(to_long(value, at));
    else if (full == "run.checkpoint_every")
      c.checkpoint_every = static_cast<int>(to_long(value, at));
    else
      throw SimError("config: " + at + ": unknown key " + full);
  }

  if (c.dt_dem <= 0.0 && c.dt_lbm > 0.0) c.dt_dem = c.dt_lbm / 100.0;
  if (c.dt_solute <= 0.0) c.dt_solute = c.dt_lbm;
  return c;
}

SimulationConfig parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError("config: cannot open " + path);
  return parse(in, path);
}

SimulationConfig parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in, "<string>");
}

std::vector<std::string> validate(const SimulationConfig& c) {
  if (c.dims.nx <= 0 || c.dims.ny <= 0 || c.dims.nz <= 0)
    throw SimError("config: domain dims must be positive");
  if (c.dx <= 0.0) throw SimError("config: dx must be positive");
  if (c.dt_lbm <= 0.0) throw SimError("config: dt_lbm must be positive");
  if (c.steps <= 0) throw SimError("config: steps must be positive");
  if ((c.mu > 0.0) == (c.tau > 0.0))
    throw SimError("config: set exactly one of fluid.mu and fluid.tau");
  if (c.rho_f <= 0.0) throw SimError("config: fluid density must be positive");
  if (c.tau_lbm() <= 0.5)
    throw SimError("config: relaxation time must exceed 0.5");
  c.dem_substeps();  // throws when dt_dem does not divide dt_lbm
  if (c.dt_solute <= 0.0)
    throw SimError("config: dt_solute must be positive");
  if (c.diffusion < 0.0) throw SimError("config: diffusion must be >= 0");
  if (c.walkers < 0) throw SimError("config: walker count must be >= 0");
  if (c.walker_mass <= 0.0)
    throw SimError("config: walker mass must be positive");
  if (c.cadence <= 0) throw SimError("config: output cadence must be positive");
  if (c.profile_axis < 0 || c.profile_axis > 2)
    throw SimError("config: profile axis out of range");
  if (c.checkpoint_every < 0)
    throw SimError("config: checkpoint interval must be >= 0");
  if (c.particle_count < 0)
    throw SimError("config: particle count must be >= 0");
  if (c.particle_count > 0 && c.particle_file.empty())
    throw SimError("config: particle placement needs particles.file");
  if (c.imposed_velocity.squaredNorm() > 0.0 && !c.particle_file.empty())
    throw SimError(
        "config: imposed_velocity freezes the fluid and excludes particles");

  const Vec3 ext = c.domain_extent();
  if (c.walkers > 0) {
    // lo == hi collapses an axis to a point source, which is allowed
    for (int a = 0; a < 3; ++a)
      if (c.band.lo[a] < -1e-12 || c.band.hi[a] > ext[a] + 1e-12 ||
          c.band.lo[a] > c.band.hi[a])
        throw SimError("config: solute band must sit inside the domain");
  }

  std::vector<std::string> warnings;
  const double tau = c.tau_lbm();
  if (tau - 0.5 < 0.01)
    warnings.push_back("tau = " + std::to_string(tau) +
                       " is close to the stability limit 0.5");
  if (tau > 2.0)
    warnings.push_back("tau = " + std::to_string(tau) +
                       " is large; accuracy degrades well above 1");
  if (c.expected_max_velocity > 0.0) {
    const double cfl = c.expected_max_velocity * c.dt_lbm / c.dx;
    if (cfl >= 0.1)
      warnings.push_back("expected lattice velocity " + std::to_string(cfl) +
                         " exceeds 0.1; reduce dt_lbm or the forcing");
  }
  return warnings;
}

}  // namespace granusol::config
