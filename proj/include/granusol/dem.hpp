#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "granusol/metaball.hpp"
#include "granusol/types.hpp"

namespace granusol {

struct RigidParticle {
  MetaballShape shape;
  Pose pose;
  Vec3 velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();  // world frame
  double mass = 1.0;
  Mat3 inertia_body = Mat3::Identity();  // about the centroid, body frame
  Vec3 force = Vec3::Zero();             // per-step accumulators, world frame
  Vec3 torque = Vec3::Zero();
  double coupling_iso = 1.0;  // field value of the dilated (outer) surface
  bool kinematic = false;     // prescribed motion; forces are ignored
  int id = -1;

  double bounding_radius() const { return shape.bounding_radius(); }
  Mat3 inertia_world() const {
    const Mat3 rot = pose.orientation.toRotationMatrix();
    return rot * inertia_body * rot.transpose();
  }
  /// Velocity of the material point currently at x (world frame).
  Vec3 velocity_at(const Vec3& x) const {
    return velocity + angular_velocity.cross(x - pose.translation);
  }
  void validate() const;
};

struct ContactMaterial {
  double k_n = 0.0;    // normal stiffness
  double k_t = 0.0;    // tangential stiffness
  double eta_n = 0.0;  // normal damping
  double eta_t = 0.0;  // tangential damping
  double mu_s = 0.0;   // static friction bound
};

struct ContactResolution {
  Vec3 point = Vec3::Zero();   // x_cp, middle of the overlap band
  Vec3 normal = Vec3::Zero();  // unit, pushes the first body away
  double overlap = 0.0;        // >= 0 along the normal
  Vec3 surface_a = Vec3::Zero();  // closest internal-surface points
  Vec3 surface_b = Vec3::Zero();
  Vec3 midpoint = Vec3::Zero();  // minimizer of the summed fields (pairs)
};

struct WallPlane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // outward from the wall, into the domain
};

struct PairForce {
  Vec3 force_a = Vec3::Zero();
  Vec3 torque_a = Vec3::Zero();
  Vec3 force_b = Vec3::Zero();
  Vec3 torque_b = Vec3::Zero();
};

namespace dem {

/// Newton failures are skipped, never fabricated; counters let the run loop
/// report them.
struct ContactStats {
  std::int64_t pair_newton_failures = 0;
  std::int64_t wall_newton_failures = 0;
};

inline constexpr double kConstraintTol = 1e-2;  // c_tol floor on f at x_m

/// Narrow-phase Metaball-Metaball contact.  Minimizes f_a + f_b between the
/// bodies (damped Newton from the weighted-centroid midpoint, fallback seeds
/// at 1/4 and 3/4), walks closest points onto each internal surface along the
/// gradients, then applies the sphero radii for overlap and contact frame.
std::optional<ContactResolution> find_contact(const RigidParticle& a,
                                              const RigidParticle& b,
                                              ContactStats* stats = nullptr,
                                              double c_tol = kConstraintTol);

/// Metaball-wall contact: lowest surface point toward the wall by constrained
/// Newton (gradient antiparallel to the wall normal on f = iso).
std::optional<ContactResolution> find_contact_wall(const RigidParticle& p,
                                                   const WallPlane& wall,
                                                   ContactStats* stats = nullptr);

/// Spring-dashpot force at a resolved contact; xi is the persistent
/// tangential spring for this pair, updated in place.
PairForce contact_force(const ContactResolution& c, const RigidParticle& a,
                        const RigidParticle& b, const ContactMaterial& mat,
                        double dt, Vec3& xi);

/// Wall variant: the wall is rigid and immobile.
PairForce contact_force_wall(const ContactResolution& c,
                             const RigidParticle& p,
                             const ContactMaterial& mat, double dt, Vec3& xi);

/// Semi-implicit Euler translation; rotation advances the world-frame angular
/// momentum (d(I w)/dt = T with the gyroscopic bookkeeping handled exactly by
/// working on L itself), then the quaternion by the exponential map.
void integrate(std::span<RigidParticle> particles, const Vec3& gravity,
               double dt);

/// Tangential springs keyed by contact pair, reset when contact is lost.
class SpringLedger {
 public:
  Vec3& pair(int id_a, int id_b);
  Vec3& wall(int id, int wall_index);
  /// Drops springs not touched since the previous sweep.
  void sweep();
  std::size_t size() const { return springs_.size(); }

  /// Serialized view for checkpoints.
  struct Entry {
    std::uint64_t key;
    Vec3 value;
  };
  std::vector<Entry> entries() const;
  void restore(const std::vector<Entry>& entries);

 private:
  struct Slot {
    Vec3 xi = Vec3::Zero();
    bool live = false;
  };
  std::unordered_map<std::uint64_t, Slot> springs_;
};

}  // namespace dem
}  // namespace granusol
