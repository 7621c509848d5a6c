#include "granusol/metaball.hpp"

#include <cmath>

namespace granusol {

double MetaballShape::bounding_radius() const {
  double reach = 0.0;
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  const double lobe = std::sqrt(wsum / iso_value);
  for (const Vec3& p : control_points)
    reach = std::max(reach, p.norm());
  return reach + lobe + sphero_radius;
}

Vec3 MetaballShape::weighted_centroid() const {
  Vec3 c = Vec3::Zero();
  double wsum = 0.0;
  for (std::size_t i = 0; i < control_points.size(); ++i) {
    c += weights[i] * control_points[i];
    wsum += weights[i];
  }
  return c / wsum;
}

void MetaballShape::validate() const {
  if (control_points.empty())
    throw SimError("metaball shape has no control points");
  if (control_points.size() != weights.size())
    throw SimError("metaball control point / weight count mismatch");
  for (double w : weights)
    if (!(w > 0.0)) throw SimError("metaball weight must be positive");
  if (!(iso_value > 0.0)) throw SimError("metaball iso value must be positive");
  if (sphero_radius < 0.0) throw SimError("sphero radius must be >= 0");
}

namespace metaball {

double evaluate_body(const MetaballShape& s, const Vec3& x_body) {
  double f = 0.0;
  const std::size_t n = s.control_points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d2 = (x_body - s.control_points[i]).squaredNorm();
    if (d2 < kSingularEps * kSingularEps) return kSaturation;
    f += s.weights[i] / d2;
  }
  return f;
}

Vec3 gradient_body(const MetaballShape& s, const Vec3& x_body) {
  Vec3 g = Vec3::Zero();
  const std::size_t n = s.control_points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 r = x_body - s.control_points[i];
    const double d2 = r.squaredNorm();
    if (d2 < kSingularEps * kSingularEps) {
      // On top of a control point the field saturates; aim the gradient at
      // that point (any direction is as good, this one is deterministic).
      Vec3 dir = -r;
      const double len = dir.norm();
      return (len > 0.0) ? Vec3(dir / len * kSaturation)
                         : Vec3(kSaturation, 0.0, 0.0);
    }
    g += -2.0 * s.weights[i] / (d2 * d2) * r;
  }
  return g;
}

Mat3 hessian_body(const MetaballShape& s, const Vec3& x_body) {
  Mat3 h = Mat3::Zero();
  const std::size_t n = s.control_points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 r = x_body - s.control_points[i];
    const double d2 = r.squaredNorm();
    if (d2 < kSingularEps * kSingularEps) return kSaturation * Mat3::Identity();
    const double d4 = d2 * d2;
    h += s.weights[i] * (-2.0 / d4 * Mat3::Identity() +
                         8.0 / (d4 * d2) * (r * r.transpose()));
  }
  return h;
}

double evaluate(const MetaballShape& s, const Pose& pose, const Vec3& x) {
  return evaluate_body(s, pose.to_body(x));
}

Vec3 gradient(const MetaballShape& s, const Pose& pose, const Vec3& x) {
  return pose.rotate_to_world(gradient_body(s, pose.to_body(x)));
}

Mat3 hessian(const MetaballShape& s, const Pose& pose, const Vec3& x) {
  const Mat3 hb = hessian_body(s, pose.to_body(x));
  const Mat3 rot = pose.orientation.toRotationMatrix();
  return rot * hb * rot.transpose();
}

std::optional<Vec3> intersect_trajectory(const MetaballShape& s,
                                         const Pose& pose, const Vec3& start,
                                         const Vec3& finish) {
  const double iso = s.iso_value;
  if (!(evaluate(s, pose, start) < iso)) return std::nullopt;
  if (!(evaluate(s, pose, finish) > iso)) return std::nullopt;

  Vec3 a = start;  // f < iso side
  Vec3 b = finish; // f > iso side
  for (int it = 0; it < kIntersectMaxIter; ++it) {
    const Vec3 m = 0.5 * (a + b);
    const double fm = evaluate(s, pose, m);
    if (std::abs(fm - iso) < kIntersectTol) return m;
    if (fm < iso)
      a = m;
    else
      b = m;
  }
  return std::nullopt;
}

Reflection reflect_trajectory(const MetaballShape& s, const Pose& pose,
                              const Vec3& start, const Vec3& finish,
                              const Vec3& hit) {
  Reflection out;
  const Vec3 g = gradient(s, pose, hit);
  const double glen = g.norm();
  const Vec3 seg = finish - start;
  const double seg_len = seg.norm();
  if (glen < kSingularEps || seg_len == 0.0) {
    out.endpoint = finish;
    out.direction = seg_len > 0.0 ? Vec3(seg / seg_len) : Vec3::Zero();
    out.degenerate = true;
    return out;
  }
  // Outward normal: the field decays away from the body, so -grad points out.
  const Vec3 n = -g / glen;
  const Vec3 t_i = seg / seg_len;
  const Vec3 t_r = t_i - 2.0 * t_i.dot(n) * n;
  const double remainder = (finish - hit).norm();
  out.endpoint = hit + remainder * t_r;
  out.direction = remainder > 0.0 ? t_r : t_i;
  return out;
}

std::optional<Vec3> push_to_surface(const MetaballShape& s, const Pose& pose,
                                    const Vec3& x_inside) {
  const double iso = s.iso_value;
  const double max_step = 0.5 * s.bounding_radius();
  Vec3 x = x_inside;
  for (int it = 0; it < 500; ++it) {
    const double f = evaluate(s, pose, x);
    if (std::abs(f - iso) < 1e-3) return x;
    const Vec3 g = gradient(s, pose, x);
    const double g2 = g.squaredNorm();
    if (g2 < kSingularEps * kSingularEps) return std::nullopt;
    // Newton step along the gradient line; f > iso moves against the
    // gradient, i.e. outward.
    Vec3 step = (iso - f) / g2 * g;
    const double len = step.norm();
    if (len > max_step) step *= max_step / len;
    x += step;
  }
  return std::nullopt;
}

}  // namespace metaball
}  // namespace granusol
