#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "granusol/lbm.hpp"
#include "granusol/types.hpp"

namespace granusol::config {

/// Parsed simulation configuration. Sections and keys are fixed; unknown
/// names are hard parse errors so typos cannot silently fall back to
/// defaults.
struct SimulationConfig {
  // [domain]
  GridDims dims;
  double dx = 0.0;
  std::array<lbm::FaceRule, 3> face_rules = {
      lbm::FaceRule::Periodic, lbm::FaceRule::Periodic,
      lbm::FaceRule::Periodic};
  Vec3 wall_velocity = Vec3::Zero();  // used by velocity faces

  // [time]
  double dt_lbm = 0.0;
  double dt_dem = 0.0;    // default: dt_lbm / 100
  double dt_solute = 0.0; // default: dt_lbm
  long steps = 0;

  // [fluid]  exactly one of mu or tau
  double rho_f = 1000.0;
  double mu = 0.0;
  double tau = 0.0;
  Vec3 body_accel = Vec3::Zero();       // physical units
  double expected_max_velocity = 0.0;   // advisory, drives the CFL warning
  // Nonzero freezes the fluid at a uniform velocity instead of stepping the
  // lattice; walkers then advect against a known field. Excludes particles.
  Vec3 imposed_velocity = Vec3::Zero();

  // [solute]
  double diffusion = 0.0;
  double walker_mass = 1.0;
  long walkers = 0;
  Aabb band;
  bool grid_placement = false;

  // [particles]
  std::string particle_file;
  int particle_count = 0;  // random placement count; 0 = no particles
  Aabb particle_region;
  double particle_density = 1000.0;

  // [forcing]
  double forcing_amplitude = 0.0;  // physical acceleration amplitude
  double forcing_period = 5000.0;  // in DEM sub-steps
  Vec3 forcing_direction = Vec3::UnitX();
  Vec3 gravity = Vec3::Zero();

  // [output]
  std::string output_dir = "out";
  int cadence = 100;
  int profile_axis = 2;
  bool write_fields = false;

  // [run]
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // 0 disables checkpoints

  /// Relaxation time in lattice units, resolved from mu when tau is unset.
  double tau_lbm() const;
  /// DEM sub-steps per LBM step; throws unless dt_dem divides dt_lbm.
  int dem_substeps() const;
  Vec3 domain_extent() const {
    return Vec3(dims.nx, dims.ny, dims.nz) * dx;
  }
};

SimulationConfig parse(std::istream& in, const std::string& label);
SimulationConfig parse_file(const std::string& path);
SimulationConfig parse_string(const std::string& text);

/// Structural checks throw SimError; advisory findings (CFL margin, tau
/// close to stability limits) come back as printable warnings.
std::vector<std::string> validate(const SimulationConfig& c);

}  // namespace granusol::config
