#pragma once

#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "granusol/dem.hpp"
#include "granusol/lbm.hpp"
#include "granusol/types.hpp"

namespace granusol::fsi {

/// One cut lattice link from a fluid node into a covered node.
/// `dir` is the departing direction (fluid toward solid); the interpolated
/// bounce-back writes the opposite slot of `fluid_cell`.
struct BoundaryLink {
  std::int64_t fluid_cell = -1;
  std::int64_t solid_cell = -1;
  std::int64_t ff_cell = -1;  // fluid_cell - e*dx, -1 when unavailable
  int dir = 0;
  int particle = -1;
  double q = 0.0;        // fractional intersection, in (0, 1]
  Vec3 wall_point;       // unwrapped world coords, near the particle
  Vec3 fluid_point;      // unwrapped world coords of the fluid node

  // Per-step scratch written by apply_boundaries, read by exchange_momentum.
  double g_out = 0.0;     // reconstructed departing population at the wall
  double g_back = 0.0;    // returning population written into the field
  Vec3 wall_velocity = Vec3::Zero();  // lattice units
  bool fallback = false;  // single-node bounce-back was used
};

struct HydroLoad {
  Vec3 force = Vec3::Zero();   // physical units
  Vec3 torque = Vec3::Zero();  // about the particle centroid
};

struct CouplerStats {
  std::int64_t refilled_nodes = 0;       // last classify/refill
  std::int64_t refill_eq_directions = 0; // equilibrium-branch slots
  std::int64_t covered_nodes = 0;
  std::int64_t fallback_links = 0;       // last apply_boundaries
  std::int64_t underresolved_particles = 0;  // no interior node
};

/// Solid-region iso level for a shape: the level set of the raw field that
/// coincides with the sphero-dilated surface, averaged over sampled surface
/// normals. Shapes without a dilation keep their own iso value.
double calibrate_iso(const MetaballShape& shape, int samples = 64);

/// Couples rigid particles to a lattice field. Owns the node masks, the cut
/// links and the uncover bookkeeping. Cell centers sit at (i + 1/2) dx from a
/// world origin at zero.
class Coupler {
 public:
  Coupler(lbm::LatticeField& field, std::vector<RigidParticle>& particles,
          double fluid_density = 1.0);

  /// Runs calibrate_iso for every particle and stores the result on it.
  void calibrate();

  /// Rebuilds node masks and boundary links for the current poses and
  /// records which nodes the particles just vacated. Cheap no-op when no
  /// pose changed since the previous call.
  void classify();

  /// Initializes populations on freshly vacated nodes. Call after classify
  /// and before the next collide_stream.
  void refill();

  /// Interpolated bounce-back on every link. Call right after
  /// collide_stream; reads the streamed buffer and patches returning slots.
  void apply_boundaries();

  /// Folds the per-link momentum transfer into one force/torque pair per
  /// particle, in physical units.
  std::vector<HydroLoad> exchange_momentum() const;

  const std::vector<BoundaryLink>& links() const { return links_; }
  const CouplerStats& stats() const { return stats_; }
  double fluid_density() const { return fluid_density_; }

  /// Particle covering a node, -1 for fluid.
  int owner_of(std::int64_t cell) const { return owner_[cell]; }

  /// Rigid-body velocity at a world point, lattice units per step.
  Vec3 wall_velocity_lat(int particle, const Vec3& x_world) const;

 private:
  struct ScanBox {
    Vec3i lo = Vec3i::Zero();
    Vec3i hi = Vec3i::Constant(-1);  // empty by default
  };

  bool axis_periodic(int axis) const;
  std::int64_t wrap_cell(int i, int j, int k) const;  // -1 when outside
  Vec3 cell_center(int i, int j, int k) const;
  /// Shifts pos by whole domain periods along periodic axes so it lands in
  /// the image nearest ref.
  Vec3 near_image(const Vec3& pos, const Vec3& ref) const;
  ScanBox particle_box(const RigidParticle& p, int pad) const;
  double link_fraction(const RigidParticle& p, const Vec3& a,
                       const Vec3& b) const;

  lbm::LatticeField& field_;
  std::vector<RigidParticle>& particles_;
  double fluid_density_;

  std::vector<std::int32_t> owner_;
  std::vector<std::int32_t> old_owner_;
  std::vector<lbm::NodeKind> old_kind_;
  std::vector<BoundaryLink> links_;
  std::vector<std::pair<std::int64_t, std::int32_t>> uncovered_;  // cell, owner
  std::vector<ScanBox> last_boxes_;
  std::vector<Pose> last_poses_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::int64_t> region_;
  std::unordered_map<std::int64_t, double> best_ratio_;
  std::unordered_set<std::int64_t> link_keys_;
  std::uint32_t stamp_token_ = 0;
  bool classified_ = false;
  CouplerStats stats_;
};

}  // namespace granusol::fsi
