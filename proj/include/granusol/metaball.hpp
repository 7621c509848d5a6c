#pragma once

#include <optional>
#include <vector>

#include "granusol/types.hpp"

namespace granusol {

/// Implicit solid defined by control points and positive weights,
///   f(x) = sum_i w_i / |x - p_i|^2,
/// interior where f > iso_value.  The stored surface f = iso_value is the
/// internal one; the body a grain actually presents to the world is that
/// surface dilated outward by sphero_radius.
struct MetaballShape {
  std::vector<Vec3> control_points;  // body frame
  std::vector<double> weights;       // one per control point, > 0
  double sphero_radius = 0.0;
  double iso_value = 1.0;

  /// Radius of a body-frame ball centered at the origin that contains the
  /// dilated solid: no single lobe reaches past sqrt(sum w / iso) from its
  /// own control point.
  double bounding_radius() const;

  /// Weight-averaged control point, body frame.
  Vec3 weighted_centroid() const;

  void validate() const;  // throws SimError on structural problems
};

namespace metaball {

// Distances below this are treated as sitting on a control point; field and
// gradient saturate instead of overflowing.
inline constexpr double kSingularEps = 1e-12;
inline constexpr double kSaturation = 1e30;

inline constexpr double kIntersectTol = 1e-3;  // on |f - iso|
inline constexpr int kIntersectMaxIter = 200;

double evaluate_body(const MetaballShape& s, const Vec3& x_body);
Vec3 gradient_body(const MetaballShape& s, const Vec3& x_body);
Mat3 hessian_body(const MetaballShape& s, const Vec3& x_body);

double evaluate(const MetaballShape& s, const Pose& pose, const Vec3& x_world);
/// World-frame gradient (rotated from body frame).
Vec3 gradient(const MetaballShape& s, const Pose& pose, const Vec3& x_world);
Mat3 hessian(const MetaballShape& s, const Pose& pose, const Vec3& x_world);

inline bool inside(const MetaballShape& s, const Pose& pose, const Vec3& x) {
  return evaluate(s, pose, x) > s.iso_value;
}

/// Surface crossing of the segment start -> finish by bisection.  Requires
/// f(start) < iso and f(finish) > iso; the bracket invariant is maintained
/// every iteration regardless of how many crossings the segment has, so the
/// returned point always sits on a genuine crossing.  Empty when the
/// preconditions fail or the tolerance is not reached in kIntersectMaxIter.
std::optional<Vec3> intersect_trajectory(const MetaballShape& s,
                                         const Pose& pose, const Vec3& start,
                                         const Vec3& finish);

struct Reflection {
  Vec3 endpoint;        // reflected end of the segment
  Vec3 direction;       // reflected unit direction (zero remainder keeps t_i)
  bool degenerate = false;  // gradient vanished at the hit point
};

/// Specular reflection of the segment remainder about the surface normal at
/// the hit point: t_r = t_i - 2 (t_i . n) n.  Degenerate normal returns the
/// segment unreflected with the flag set; callers revert the walker.
Reflection reflect_trajectory(const MetaballShape& s, const Pose& pose,
                              const Vec3& start, const Vec3& finish,
                              const Vec3& hit);

/// Walks an interior point outward along the gradient until |f - iso| < 1e-3.
/// Steps are Newton-sized but clamped to half the bounding radius so lobes
/// cannot be overshot.  Empty on a degenerate gradient or non-convergence.
std::optional<Vec3> push_to_surface(const MetaballShape& s, const Pose& pose,
                                    const Vec3& x_inside);

}  // namespace metaball
}  // namespace granusol
