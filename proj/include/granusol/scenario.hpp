#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "granusol/analysis.hpp"
#include "granusol/config.hpp"
#include "granusol/dem.hpp"
#include "granusol/fsi.hpp"
#include "granusol/lbm.hpp"
#include "granusol/output.hpp"
#include "granusol/solute.hpp"
#include "granusol/types.hpp"

namespace granusol::scenario {

/// Scalars recorded alongside each concentration profile sample.
struct SampleLog {
  std::vector<double> times;
  std::vector<double> mean_u;   // fluid mean velocity along the report axis
  std::vector<double> mean_up;  // particle mean velocity, volume weighted
  std::vector<double> walker_count;
  std::vector<double> fluid_mass;  // lattice units
};

/// One simulation: lattice, rigid particles, walkers and their couplings,
/// advanced in the fixed stage order classify, collide, ibb, mem, dem,
/// refill, walkers. Stages without work (no particles, frozen fluid) are
/// skipped but never reordered.
class World {
 public:
  explicit World(const config::SimulationConfig& cfg);

  void step();

  /// Steps to cfg.steps, sampling every cadence steps (step 0 included) and
  /// writing checkpoints when configured. With write_outputs the series,
  /// run parameters and shape features land in cfg.output_dir.
  void run(bool write_outputs = false);

  const config::SimulationConfig& cfg() const { return cfg_; }
  lbm::LatticeField& field() { return field_; }
  const lbm::LatticeField& field() const { return field_; }
  const std::vector<RigidParticle>& particles() const { return particles_; }
  const solute::WalkerSwarm& swarm() const { return swarm_; }
  analysis::ProfileSeries& series() { return series_; }
  const analysis::ProfileSeries& series() const { return series_; }
  const SampleLog& log() const { return log_; }
  const solute::StepStats& last_walker_stats() const { return walker_stats_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::uint64_t current_step() const { return step_; }
  double time() const { return static_cast<double>(step_) * cfg_.dt_lbm; }
  double solid_fraction() const { return phi_solid_; }
  /// Mean volume-equivalent particle radius; 0 without particles.
  double representative_radius() const { return radius_rep_; }

  std::int64_t walker_count() const { return swarm_.alive(); }
  double fluid_mass() const { return field_.total_mass(); }
  /// Alive walkers strictly beyond the covered surface of some body
  /// (f > c + 1e-3); always 0 when the solver honors the no-flux rule.
  std::int64_t exterior_violations() const;

  /// Deposits the swarm and appends one profile + scalar sample.
  void record_sample();

  /// Appends the name of every executed stage; pass nullptr to stop.
  void set_trace(std::vector<std::string>* sink) { trace_ = sink; }
  /// Test hook: force full lattice stepping even when the flow provably
  /// stays at rest.
  void set_fast_path(bool on) { quiescent_ = on && quiescent_possible_; }

  output::Checkpoint make_checkpoint() const;
  /// Overwrites lattice populations, particle states, springs and walker
  /// positions from a checkpoint of the same configuration.
  void restore(const output::Checkpoint& ck);

 private:
  void prepare_particles();
  void dem_stage();
  void walker_stage();
  void write_run_outputs();
  void write_field_dump();
  void trace(const char* stage) {
    if (trace_) trace_->emplace_back(stage);
  }
  Vec3 mean_fluid_velocity() const;     // physical units
  Vec3 mean_particle_velocity() const;  // volume weighted

  config::SimulationConfig cfg_;
  std::vector<std::string> warnings_;
  lbm::LatticeField field_;
  std::vector<RigidParticle> particles_;
  std::vector<double> volumes_;
  std::vector<MetaballShape> unique_shapes_;
  std::optional<fsi::Coupler> coupler_;
  dem::SpringLedger springs_;
  std::vector<WallPlane> walls_;
  ContactMaterial material_;
  std::vector<fsi::HydroLoad> loads_;
  solute::Domain domain_;
  solute::WalkerSwarm swarm_;
  std::vector<MetaballShape> probes_;
  std::vector<std::uint8_t> mask_;
  std::vector<Vec3> proposals_;
  solute::StepStats walker_stats_;
  analysis::ProfileSeries series_;
  SampleLog log_;
  Vec3 report_dir_ = Vec3::UnitZ();
  double phi_solid_ = 0.0;
  double radius_rep_ = 0.0;
  int n_sub_ = 1;
  bool lattice_live_ = true;  // false under an imposed uniform velocity
  bool quiescent_ = false;
  bool quiescent_possible_ = false;
  std::uint64_t step_ = 0;
  std::vector<std::string>* trace_ = nullptr;
};

/// Canonical configurations; callers may override fields (walker count,
/// steps, seed) before building the World.
config::SimulationConfig scenario_diffusion(long walkers = 1000000);
config::SimulationConfig scenario_advection(long walkers = 1000000);
config::SimulationConfig scenario_settling(const std::string& particle_file);
config::SimulationConfig scenario_oscillator(const std::string& particle_file,
                                             bool reduced = false);

}  // namespace granusol::scenario
