#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "granusol/dem.hpp"
#include "granusol/fsi.hpp"
#include "granusol/lbm.hpp"
#include "granusol/types.hpp"

namespace granusol::solute {

/// Walker-facing box [0, extent). Non-periodic axes reflect at the faces.
struct Domain {
  Vec3 extent = Vec3::Zero();
  std::array<bool, 3> periodic = {true, true, true};
};

struct WalkerSwarm {
  std::vector<Vec3> positions;
  double walker_mass = 1.0;  // m_s
  double diffusion = 0.0;    // length^2 / time
  std::uint64_t seed = 0;
  std::int64_t alive() const {
    return static_cast<std::int64_t>(positions.size());
  }
};

struct StepStats {
  std::int64_t type_i = 0;   // out -> out, accepted
  std::int64_t type_ii = 0;  // in -> in, refilled at the surface
  std::int64_t type_iii = 0; // in -> out, accepted
  std::int64_t type_iv = 0;  // out -> in, reflected
  std::int64_t reverted = 0;
  std::int64_t intersect_failures = 0;
  std::int64_t push_failures = 0;
};

/// Trilinear interpolation of the lattice velocity at a world point,
/// physical units. Covered nodes contribute the owning body's rigid
/// velocity so the interpolant is defined through the boundary skin.
class VelocitySampler {
 public:
  explicit VelocitySampler(const lbm::LatticeField& field,
                           const fsi::Coupler* coupler = nullptr,
                           const std::vector<RigidParticle>* particles = nullptr);
  Vec3 operator()(const Vec3& x) const;

 private:
  const lbm::LatticeField& field_;
  const fsi::Coupler* coupler_;
  const std::vector<RigidParticle>* particles_;
  double vel_scale_;
  std::array<bool, 3> periodic_;
};

/// Copies of the particle shapes with the iso level walkers collide with
/// (the calibrated solid level, i.e. the dilated surface).
std::vector<MetaballShape> walker_probes(const std::vector<RigidParticle>& particles);

/// Per-cell flag: cell intersects some particle's padded bounding box.
/// Cheap O(1) gate deciding which walkers run exact surface tests.
std::vector<std::uint8_t> near_mask(const std::vector<RigidParticle>& particles,
                                    const GridDims& dims, double dx,
                                    const Domain& domain);

/// Advection-diffusion proposals x' = x + u(x) dt + z sqrt(2 D dt). Draws
/// are keyed on (seed, step, walker), so trajectories are reproducible
/// regardless of scheduling.
void step_walkers(const WalkerSwarm& swarm, const VelocitySampler& u,
                  double dt, std::uint64_t step_index,
                  std::vector<Vec3>& proposals);

/// Applies the domain rule to each proposal, resolves walker-body
/// relationships (accept, reflect, refill, revert) and writes the final
/// positions into the swarm. The walker count never changes.
StepStats classify_and_resolve(WalkerSwarm& swarm, std::vector<Vec3>& proposals,
                               const std::vector<RigidParticle>& particles,
                               const std::vector<MetaballShape>& probes,
                               const std::vector<std::uint8_t>& mask,
                               const GridDims& dims, double dx,
                               const Domain& domain, double dt,
                               std::uint64_t step_index);

/// Uniform (or regular sub-grid) placement in a region, pruning walkers born
/// inside a body. Throws when nothing survives. Grid mode rounds the
/// per-axis counts, so the placed total can differ slightly from the ask.
WalkerSwarm initialize_band(const Aabb& region, std::int64_t n_walkers,
                            double walker_mass, double diffusion,
                            std::uint64_t seed,
                            const std::vector<RigidParticle>& particles,
                            const std::vector<MetaballShape>& probes,
                            const Domain& domain, bool grid_mode = false,
                            std::int64_t* removed = nullptr);

struct ConcentrationField {
  GridDims dims;
  double dx = 1.0;
  double walker_mass = 1.0;
  std::vector<std::int64_t> counts;

  double concentration(std::int64_t cell) const {
    return walker_mass * static_cast<double>(counts[cell]) / (dx * dx * dx);
  }
  std::int64_t total_count() const;
  double total_mass() const {
    return walker_mass * static_cast<double>(total_count());
  }
};

/// Bins every walker into the cell containing it (counting identity:
/// total_count == alive).
ConcentrationField deposit(const WalkerSwarm& swarm, const GridDims& dims,
                           double dx);

/// Mean concentration per one-cell slab along an axis.
std::vector<double> axis_profile(const ConcentrationField& field, int axis);

}  // namespace granusol::solute
