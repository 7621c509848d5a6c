#include "granusol/dem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "granusol/metaball.hpp"

namespace granusol {

void RigidParticle::validate() const {
  shape.validate();
  if (!(mass > 0.0)) throw SimError("rigid particle needs positive mass");
  if ((inertia_body - inertia_body.transpose()).norm() > 1e-9 * inertia_body.norm())
    throw SimError("inertia tensor must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia_body);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw SimError("inertia tensor must be positive definite");
}

namespace dem {
namespace {

constexpr int kNewtonMaxIter = 100;
constexpr double kGradTol = 1e-12;

// Damped Newton on grad(f_a + f_b) = 0 from the given seed.  The sought
// point between the bodies is a saddle of the summed field (minimum along
// the centroid line, maximum transverse), so this is a root find on the
// gradient with backtracking on the residual, not a descent method.
std::optional<Vec3> find_field_stationary(const RigidParticle& a,
                                          const RigidParticle& b, Vec3 x,
                                          double scale) {
  auto grad = [&](const Vec3& p) {
    return Vec3(metaball::gradient(a.shape, a.pose, p) +
                metaball::gradient(b.shape, b.pose, p));
  };
  const double f0 = metaball::evaluate(a.shape, a.pose, x) +
                    metaball::evaluate(b.shape, b.pose, x);
  const double gtol = 1e-12 * std::max(f0 / scale, 1e-30);
  Vec3 g = grad(x);
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    if (g.norm() < gtol) return x;
    const Mat3 h = metaball::hessian(a.shape, a.pose, x) +
                   metaball::hessian(b.shape, b.pose, x);
    Vec3 step = h.fullPivLu().solve(-g);
    if (!step.allFinite()) step = -g * (0.1 * scale / g.norm());
    if (step.norm() > 0.5 * scale) step *= 0.5 * scale / step.norm();
    double t = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Vec3 trial = x + t * step;
      const Vec3 gt = grad(trial);
      if (gt.norm() < g.norm()) {
        x = trial;
        g = gt;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  // A slightly loose residual still locates the saddle far better than the
  // downstream 1e-3 tolerances need.
  return g.norm() < 1e-6 * std::max(f0 / scale, 1e-30)
             ? std::optional<Vec3>(x)
             : std::nullopt;
}

// Repeated first-order closest-point steps x += (iso - f)/|grad|^2 grad.
// One step is the printed expansion; iterating it lands on the surface
// itself, which the sphere oracle needs.
std::optional<Vec3> project_along_gradient(const MetaballShape& s,
                                           const Pose& pose, Vec3 x) {
  for (int iter = 0; iter < 200; ++iter) {
    const double f = metaball::evaluate(s, pose, x);
    if (std::abs(f - s.iso_value) < 1e-10) return x;
    const Vec3 g = metaball::gradient(s, pose, x);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-300) return std::nullopt;
    Vec3 step = g * ((s.iso_value - f) / g2);
    const double cap = 0.5 * s.bounding_radius();
    if (step.norm() > cap) step *= cap / step.norm();
    x += step;
  }
  return std::nullopt;
}

}  // namespace

std::optional<ContactResolution> find_contact(const RigidParticle& a,
                                              const RigidParticle& b,
                                              ContactStats* stats,
                                              double c_tol) {
  const Vec3 ca = a.pose.to_world(a.shape.weighted_centroid());
  const Vec3 cb = b.pose.to_world(b.shape.weighted_centroid());
  const double reach = a.bounding_radius() + b.bounding_radius();
  if ((cb - ca).norm() > reach) return std::nullopt;

  const double scale = 0.5 * std::min(a.bounding_radius(), b.bounding_radius());
  std::optional<Vec3> xm;
  for (double t : {0.5, 0.25, 0.75}) {
    xm = find_field_stationary(a, b, ca + t * (cb - ca), scale);
    if (xm) break;
  }
  if (!xm) {
    if (stats) ++stats->pair_newton_failures;
    return std::nullopt;
  }
  const double fa = metaball::evaluate(a.shape, a.pose, *xm);
  const double fb = metaball::evaluate(b.shape, b.pose, *xm);
  // Stationary point too weak in either field: bodies are far apart and the
  // solve drifted toward the at-infinity minimum.
  if (fa <= c_tol || fb <= c_tol) return std::nullopt;

  // Note f(x_m) may legitimately sit a hair above iso: for unequal bodies
  // the saddle hugs the larger one's internal surface from inside even when
  // the surfaces are separated, and the projection below still resolves it.
  const auto xc0 = project_along_gradient(a.shape, a.pose, *xm);
  const auto xc1 = project_along_gradient(b.shape, b.pose, *xm);
  if (!xc0 || !xc1) {
    if (stats) ++stats->pair_newton_failures;
    return std::nullopt;
  }

  const Vec3 span = *xc0 - *xc1;
  // Crossed projections mean the internal surfaces interpenetrate; the
  // sphero layer was the whole contact budget, so skip and count instead of
  // fabricating a frame.
  if (span.dot(ca - cb) < 0.0) {
    if (stats) ++stats->pair_newton_failures;
    return std::nullopt;
  }
  const double dist = span.norm();
  const double overlap = a.shape.sphero_radius + b.shape.sphero_radius - dist;
  if (overlap < 0.0) return std::nullopt;

  // Internal surfaces nearly touching leaves the normal direction to the
  // centroid line.
  Vec3 n = dist > 1e-12 ? Vec3(span / dist) : Vec3((ca - cb).normalized());
  ContactResolution c;
  c.normal = n;
  c.overlap = overlap;
  c.surface_a = *xc0;
  c.surface_b = *xc1;
  c.midpoint = *xm;
  c.point = *xc0 - (a.shape.sphero_radius - 0.5 * overlap) * n;
  return c;
}

std::optional<ContactResolution> find_contact_wall(const RigidParticle& p,
                                                   const WallPlane& wall,
                                                   ContactStats* stats) {
  const Vec3 nw = wall.normal.normalized();
  const Vec3 center = p.pose.translation;
  const double slab = nw.dot(center - wall.point);
  if (slab > p.bounding_radius()) return std::nullopt;

  // Seed from the control point whose surface exit toward the wall sits
  // lowest: march from each control point along -nw to f = iso.
  std::optional<Vec3> seed;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.shape.control_points.size(); ++i) {
    const Vec3 origin = p.pose.to_world(p.shape.control_points[i]);
    const double reach = p.bounding_radius() * 2.0;
    Vec3 lo = origin, hi = origin - reach * nw;
    if (metaball::evaluate(p.shape, p.pose, hi) >= p.shape.iso_value) continue;
    for (int iter = 0; iter < 80; ++iter) {
      const Vec3 mid = 0.5 * (lo + hi);
      if (metaball::evaluate(p.shape, p.pose, mid) > p.shape.iso_value)
        lo = mid;
      else
        hi = mid;
    }
    const Vec3 hit = 0.5 * (lo + hi);
    const double h = nw.dot(hit - wall.point);
    if (h < lowest) {
      lowest = h;
      seed = hit;
    }
  }
  if (!seed) {
    if (stats) ++stats->wall_newton_failures;
    return std::nullopt;
  }

  // Lagrange-Newton on [grad f - lambda nw; f - iso] = 0: surface point whose
  // inward gradient lines up with the wall normal.
  Vec3 x = *seed;
  double lambda = metaball::gradient(p.shape, p.pose, x).norm();
  bool converged = false;
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    const Vec3 g = metaball::gradient(p.shape, p.pose, x);
    const double f = metaball::evaluate(p.shape, p.pose, x);
    Eigen::Vector4d res;
    res << g - lambda * nw, f - p.shape.iso_value;
    if (res.norm() < 1e-10) {
      converged = true;
      break;
    }
    Eigen::Matrix4d jac;
    jac.topLeftCorner<3, 3>() = metaball::hessian(p.shape, p.pose, x);
    jac.topRightCorner<3, 1>() = -nw;
    jac.bottomLeftCorner<1, 3>() = g.transpose();
    jac(3, 3) = 0.0;
    Eigen::Vector4d step = jac.fullPivLu().solve(-res);
    if (!step.allFinite()) break;
    const double cap = 0.25 * p.bounding_radius();
    if (step.head<3>().norm() > cap) step *= cap / step.head<3>().norm();
    // Backtrack on the residual norm.
    double t = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 30; ++halving) {
      const Vec3 xt = x + t * step.head<3>();
      const double lt = lambda + t * step(3);
      Eigen::Vector4d rt;
      rt << metaball::gradient(p.shape, p.pose, xt) - lt * nw,
          metaball::evaluate(p.shape, p.pose, xt) - p.shape.iso_value;
      if (rt.norm() < res.norm()) {
        x = xt;
        lambda = lt;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }

  if (!converged) {
    // Projected descent fallback: slide along the surface downhill in wall
    // height.  Slow but only reached when the Newton solve stalls.
    x = *seed;
    double step = 0.1 * p.bounding_radius();
    for (int iter = 0; iter < 400 && step > 1e-12 * p.bounding_radius();
         ++iter) {
      const Vec3 g = metaball::gradient(p.shape, p.pose, x);
      if (g.norm() < 1e-300) break;
      const Vec3 n_surf = g.normalized();
      Vec3 dir = -(nw - nw.dot(n_surf) * n_surf);
      if (dir.norm() < 1e-14) break;  // already at a height extremum
      auto onto = metaball::push_to_surface(p.shape, p.pose,
                                            x + step * dir.normalized());
      if (onto && nw.dot(*onto - wall.point) < nw.dot(x - wall.point)) {
        x = *onto;
      } else {
        step *= 0.5;
      }
    }
    const Vec3 g = metaball::gradient(p.shape, p.pose, x);
    const double f = metaball::evaluate(p.shape, p.pose, x);
    const bool tangent_ok =
        g.norm() > 0.0 && (g.normalized() - nw).norm() < 1e-3;
    if (std::abs(f - p.shape.iso_value) > 1e-6 || !tangent_ok) {
      if (stats) ++stats->wall_newton_failures;
      return std::nullopt;
    }
  }

  // Signed height keeps the contact alive when the internal surface itself
  // dips under the wall plane.
  const double height = nw.dot(x - wall.point);
  const double overlap = p.shape.sphero_radius - height;
  if (overlap < 0.0) return std::nullopt;

  ContactResolution c;
  c.normal = nw;
  c.overlap = overlap;
  c.surface_a = x;
  c.surface_b = x - height * nw;  // projection onto the wall
  c.midpoint = x;
  c.point = c.surface_b + 0.5 * overlap * nw;
  return c;
}

namespace {

PairForce force_at_contact(const ContactResolution& c, const Vec3& va,
                           const Vec3& vb, const Vec3& ra, const Vec3& rb,
                           const ContactMaterial& mat, double dt, Vec3& xi) {
  const Vec3& n = c.normal;
  const Vec3 v_rel = va - vb;  // of a with respect to b, at the contact point
  const double approach = (vb - va).dot(n);
  const double fn = std::max(0.0, mat.k_n * c.overlap + mat.eta_n * approach);

  const Vec3 v_t = v_rel - v_rel.dot(n) * n;
  xi -= xi.dot(n) * n;  // keep the spring in the current tangent plane
  xi += v_t * dt;
  const Vec3 trial = -mat.k_t * xi - mat.eta_t * v_t;
  Vec3 ft = Vec3::Zero();
  const double trial_mag = trial.norm();
  if (trial_mag > 0.0)
    ft = trial * (std::min(mat.mu_s * fn, trial_mag) / trial_mag);

  PairForce out;
  out.force_a = fn * n + ft;
  out.force_b = -out.force_a;
  out.torque_a = ra.cross(out.force_a);
  out.torque_b = rb.cross(out.force_b);
  return out;
}

}  // namespace

PairForce contact_force(const ContactResolution& c, const RigidParticle& a,
                        const RigidParticle& b, const ContactMaterial& mat,
                        double dt, Vec3& xi) {
  return force_at_contact(c, a.velocity_at(c.point), b.velocity_at(c.point),
                          c.point - a.pose.translation,
                          c.point - b.pose.translation, mat, dt, xi);
}

PairForce contact_force_wall(const ContactResolution& c,
                             const RigidParticle& p,
                             const ContactMaterial& mat, double dt, Vec3& xi) {
  return force_at_contact(c, p.velocity_at(c.point), Vec3::Zero(),
                          c.point - p.pose.translation, Vec3::Zero(), mat, dt,
                          xi);
}

void integrate(std::span<RigidParticle> particles, const Vec3& gravity,
               double dt) {
  for (RigidParticle& p : particles) {
    if (!p.kinematic) {
      p.velocity += (p.force / p.mass + gravity) * dt;
      // d(I w)/dt = T advanced on the world-frame angular momentum; torque
      // free motion then conserves L exactly, and the gyroscopic term of the
      // body-frame form is realized by re-expressing I as the body rotates.
      const Mat3 iw = p.inertia_world();
      const Vec3 momentum = iw * p.angular_velocity + p.torque * dt;
      p.angular_velocity = iw.ldlt().solve(momentum);
    }
    p.pose.translation += p.velocity * dt;
    const Vec3 rot = p.angular_velocity * dt;
    const double angle = rot.norm();
    if (angle > 0.0) {
      p.pose.orientation =
          Quat(Eigen::AngleAxisd(angle, rot / angle)) * p.pose.orientation;
    }
    p.pose.renormalize();
    if (!p.pose.translation.allFinite() || !p.velocity.allFinite() ||
        !p.angular_velocity.allFinite())
      throw SimError("non-finite particle state after integration, id " +
                     std::to_string(p.id));
    p.force.setZero();
    p.torque.setZero();
  }
}

Vec3& SpringLedger::pair(int id_a, int id_b) {
  const std::uint64_t lo = static_cast<std::uint32_t>(std::min(id_a, id_b));
  const std::uint64_t hi = static_cast<std::uint32_t>(std::max(id_a, id_b));
  Slot& s = springs_[(hi << 32) | lo];
  s.live = true;
  return s.xi;
}

Vec3& SpringLedger::wall(int id, int wall_index) {
  const std::uint64_t key = (0x8000000000000000ull) |
                            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(id)) << 16) |
                            static_cast<std::uint32_t>(wall_index & 0xffff);
  Slot& s = springs_[key];
  s.live = true;
  return s.xi;
}

void SpringLedger::sweep() {
  for (auto it = springs_.begin(); it != springs_.end();) {
    if (!it->second.live) {
      it = springs_.erase(it);
    } else {
      it->second.live = false;
      ++it;
    }
  }
}

std::vector<SpringLedger::Entry> SpringLedger::entries() const {
  std::vector<Entry> out;
  out.reserve(springs_.size());
  for (const auto& [key, slot] : springs_) out.push_back({key, slot.xi});
  std::sort(out.begin(), out.end(),
            [](const Entry& a, const Entry& b) { return a.key < b.key; });
  return out;
}

void SpringLedger::restore(const std::vector<Entry>& entries) {
  springs_.clear();
  for (const Entry& e : entries) springs_[e.key] = Slot{e.value, true};
}

}  // namespace dem
}  // namespace granusol
