#include "granusol/fsi.hpp"

#include <algorithm>
#include <cmath>

#include "granusol/metaball.hpp"
#include "granusol/shape_metrics.hpp"

namespace granusol::fsi {

namespace {

// Outward surface normal; the field decays away from the body.
Vec3 outward_normal(const MetaballShape& s, const Vec3& x_body) {
  Vec3 g = metaball::gradient_body(s, x_body);
  const double n = g.norm();
  return n > 0.0 ? Vec3(-g / n) : Vec3::UnitZ();
}

// Tightens an approximate surface point with first-order iso projection.
Vec3 refine_surface_point(const MetaballShape& s, Vec3 x) {
  for (int it = 0; it < 30; ++it) {
    const double f = metaball::evaluate_body(s, x);
    if (std::abs(f - s.iso_value) < 1e-12) break;
    const Vec3 g = metaball::gradient_body(s, x);
    const double g2 = g.squaredNorm();
    if (g2 < metaball::kSingularEps) break;
    x += ((s.iso_value - f) / g2) * g;
  }
  return x;
}

}  // namespace

double calibrate_iso(const MetaballShape& shape, int samples) {
  shape.validate();
  if (shape.sphero_radius == 0.0) return shape.iso_value;

  const Pose identity;
  const double reach = 2.5 * shape.bounding_radius();
  const int n_cp = static_cast<int>(shape.control_points.size());
  const std::vector<Vec3> dirs = shape::orientation_directions(samples);

  double sum = 0.0;
  int accepted = 0;
  for (int k = 0; k < samples; ++k) {
    // Seed rays from the control points in turn so every lobe contributes.
    const Vec3 seed = shape.control_points[k % n_cp];
    const Vec3 outside = seed + reach * dirs[k];
    auto hit = metaball::intersect_trajectory(shape, identity, outside, seed);
    if (!hit) continue;
    const Vec3 x_s = refine_surface_point(shape, *hit);
    const Vec3 x_dilated = x_s + shape.sphero_radius * outward_normal(shape, x_s);
    sum += metaball::evaluate_body(shape, x_dilated);
    ++accepted;
  }
  if (accepted == 0)
    throw SimError("calibrate_iso: no surface sample accepted");
  return sum / accepted;
}

Coupler::Coupler(lbm::LatticeField& field, std::vector<RigidParticle>& particles,
                 double fluid_density)
    : field_(field), particles_(particles), fluid_density_(fluid_density) {
  if (!(fluid_density_ > 0.0))
    throw SimError("Coupler: fluid density must be positive");
  const std::int64_t n = field_.dims().cells();
  owner_.assign(n, -1);
  old_owner_.assign(n, -1);
  stamp_.assign(n, 0);
}

void Coupler::calibrate() {
  for (auto& p : particles_) p.coupling_iso = calibrate_iso(p.shape);
}

bool Coupler::axis_periodic(int axis) const {
  return field_.face(axis, 0).rule == lbm::FaceRule::Periodic;
}

std::int64_t Coupler::wrap_cell(int i, int j, int k) const {
  const auto& d = field_.dims();
  int c[3] = {i, j, k};
  const int n[3] = {d.nx, d.ny, d.nz};
  for (int a = 0; a < 3; ++a) {
    if (axis_periodic(a)) {
      c[a] = ((c[a] % n[a]) + n[a]) % n[a];
    } else if (c[a] < 0 || c[a] >= n[a]) {
      return -1;
    }
  }
  return d.flat(c[0], c[1], c[2]);
}

Vec3 Coupler::cell_center(int i, int j, int k) const {
  const double dx = field_.dx();
  return Vec3((i + 0.5) * dx, (j + 0.5) * dx, (k + 0.5) * dx);
}

Vec3 Coupler::near_image(const Vec3& pos, const Vec3& ref) const {
  const auto& d = field_.dims();
  const int n[3] = {d.nx, d.ny, d.nz};
  Vec3 out = pos;
  for (int a = 0; a < 3; ++a) {
    if (!axis_periodic(a)) continue;
    const double span = n[a] * field_.dx();
    out[a] -= span * std::round((out[a] - ref[a]) / span);
  }
  return out;
}

Coupler::ScanBox Coupler::particle_box(const RigidParticle& p, int pad) const {
  const auto& d = field_.dims();
  const int n[3] = {d.nx, d.ny, d.nz};
  const Vec3 t = p.pose.translation;
  const double r = p.bounding_radius();
  const double dx = field_.dx();
  ScanBox box;
  for (int a = 0; a < 3; ++a) {
    int lo = static_cast<int>(std::floor((t[a] - r) / dx - 0.5)) - pad;
    int hi = static_cast<int>(std::ceil((t[a] + r) / dx - 0.5)) + pad;
    if (hi - lo + 1 >= n[a]) {
      lo = 0;
      hi = n[a] - 1;
    } else if (!axis_periodic(a)) {
      lo = std::max(lo, 0);
      hi = std::min(hi, n[a] - 1);
    }
    box.lo[a] = lo;
    box.hi[a] = hi;
  }
  return box;
}

double Coupler::link_fraction(const RigidParticle& p, const Vec3& a,
                              const Vec3& b) const {
  // f(a) <= c0 < f(b) holds by construction: a is a non-solid center, b a
  // solid one owned by p.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = metaball::evaluate(p.shape, p.pose, a + mid * (b - a));
    (f > p.coupling_iso ? hi : lo) = mid;
  }
  return std::max(0.5 * (lo + hi), 1e-9);
}

void Coupler::classify() {
  const std::size_t np = particles_.size();

  if (classified_ && np == last_poses_.size()) {
    bool unmoved = true;
    for (std::size_t i = 0; i < np && unmoved; ++i) {
      const Pose& a = particles_[i].pose;
      const Pose& b = last_poses_[i];
      unmoved = a.translation == b.translation &&
                a.orientation.coeffs() == b.orientation.coeffs();
    }
    if (unmoved) {
      uncovered_.clear();
      stats_.refilled_nodes = 0;
      stats_.covered_nodes = 0;
      stats_.refill_eq_directions = 0;
      return;
    }
  }

  old_kind_ = field_.kinds();
  old_owner_ = owner_;

  // Reset every cell either mask could touch; everything else is untouched
  // fluid far from any particle.
  ++stamp_token_;
  region_.clear();
  std::vector<ScanBox> new_boxes(np);
  for (std::size_t i = 0; i < np; ++i)
    new_boxes[i] = particle_box(particles_[i], 1);
  auto sweep_box = [&](const ScanBox& box) {
    for (int k = box.lo.z(); k <= box.hi.z(); ++k)
      for (int j = box.lo.y(); j <= box.hi.y(); ++j)
        for (int i = box.lo.x(); i <= box.hi.x(); ++i) {
          const std::int64_t c = wrap_cell(i, j, k);
          if (c < 0 || stamp_[c] == stamp_token_) continue;
          stamp_[c] = stamp_token_;
          region_.push_back(c);
          field_.set_kind(c, lbm::NodeKind::Fluid);
          owner_[c] = -1;
        }
  };
  for (const auto& box : last_boxes_) sweep_box(box);
  for (const auto& box : new_boxes) sweep_box(box);

  // Solid where the raw field exceeds the calibrated level; overlaps go to
  // the particle reaching deepest.
  best_ratio_.clear();
  for (std::size_t pi = 0; pi < np; ++pi) {
    const RigidParticle& p = particles_[pi];
    const ScanBox box = particle_box(p, 0);
    for (int k = box.lo.z(); k <= box.hi.z(); ++k)
      for (int j = box.lo.y(); j <= box.hi.y(); ++j)
        for (int i = box.lo.x(); i <= box.hi.x(); ++i) {
          const std::int64_t c = wrap_cell(i, j, k);
          if (c < 0) continue;
          const Vec3 pos = near_image(cell_center(i, j, k), p.pose.translation);
          const double f = metaball::evaluate(p.shape, p.pose, pos);
          // Ties count as covered: a node-centered sphere of integer radius
          // keeps its equatorial ring.
          if (f < p.coupling_iso) continue;
          const double ratio = f / p.coupling_iso;
          auto [it, fresh] = best_ratio_.try_emplace(c, ratio);
          if (!fresh && ratio <= it->second) continue;
          it->second = ratio;
          field_.set_kind(c, lbm::NodeKind::Solid);
          owner_[c] = static_cast<std::int32_t>(pi);
        }
  }

  uncovered_.clear();
  std::int64_t covered = 0;
  std::vector<std::int64_t> interior(np, 0);
  for (const std::int64_t c : region_) {
    const bool was_solid = old_kind_[c] == lbm::NodeKind::Solid;
    const bool is_solid = field_.kind(c) == lbm::NodeKind::Solid;
    if (was_solid && !is_solid) uncovered_.emplace_back(c, old_owner_[c]);
    if (!was_solid && is_solid) ++covered;
    if (is_solid) ++interior[owner_[c]];
  }
  std::sort(uncovered_.begin(), uncovered_.end());
  stats_.covered_nodes = covered;
  stats_.refilled_nodes = 0;
  stats_.refill_eq_directions = 0;
  stats_.underresolved_particles = 0;
  for (std::size_t pi = 0; pi < np; ++pi)
    if (interior[pi] == 0) ++stats_.underresolved_particles;

  // Cut links. Every fluid node next to a covered node gets one link per
  // crossing direction; q locates the calibrated level along the segment.
  links_.clear();
  link_keys_.clear();
  const double dx = field_.dx();
  for (std::size_t pi = 0; pi < np; ++pi) {
    const ScanBox& box = new_boxes[pi];
    for (int k = box.lo.z(); k <= box.hi.z(); ++k)
      for (int j = box.lo.y(); j <= box.hi.y(); ++j)
        for (int i = box.lo.x(); i <= box.hi.x(); ++i) {
          const std::int64_t c = wrap_cell(i, j, k);
          if (c < 0 || field_.kind(c) == lbm::NodeKind::Solid) continue;
          for (int d = 1; d < lbm::kQ; ++d) {
            const std::int64_t cn = wrap_cell(i + lbm::kE[d][0],
                                              j + lbm::kE[d][1],
                                              k + lbm::kE[d][2]);
            if (cn < 0 || field_.kind(cn) != lbm::NodeKind::Solid) continue;
            if (!link_keys_.insert(c * lbm::kQ + d).second) continue;
            field_.set_kind(c, lbm::NodeKind::Boundary);

            const RigidParticle& op = particles_[owner_[cn]];
            const Vec3 a_raw = cell_center(i, j, k);
            const Vec3 shift = near_image(a_raw, op.pose.translation) - a_raw;
            const Vec3 a = a_raw + shift;
            const Vec3 b = a + lbm::evec(d) * dx;

            BoundaryLink l;
            l.fluid_cell = c;
            l.solid_cell = cn;
            l.dir = d;
            l.particle = owner_[cn];
            l.q = link_fraction(op, a, b);
            l.fluid_point = a;
            l.wall_point = a + l.q * (b - a);
            const std::int64_t cff = wrap_cell(i - lbm::kE[d][0],
                                               j - lbm::kE[d][1],
                                               k - lbm::kE[d][2]);
            l.ff_cell =
                (cff >= 0 && field_.kind(cff) != lbm::NodeKind::Solid) ? cff
                                                                       : -1;
            links_.push_back(l);
          }
        }
  }
  std::sort(links_.begin(), links_.end(),
            [](const BoundaryLink& x, const BoundaryLink& y) {
              return x.fluid_cell != y.fluid_cell ? x.fluid_cell < y.fluid_cell
                                                  : x.dir < y.dir;
            });

  last_boxes_ = std::move(new_boxes);
  last_poses_.resize(np);
  for (std::size_t i = 0; i < np; ++i) last_poses_[i] = particles_[i].pose;
  classified_ = true;
}

Vec3 Coupler::wall_velocity_lat(int particle, const Vec3& x_world) const {
  const RigidParticle& p = particles_[particle];
  const Vec3 arm = near_image(x_world, p.pose.translation) - p.pose.translation;
  return (p.velocity + p.angular_velocity.cross(arm)) * (field_.dt() / field_.dx());
}

void Coupler::refill() {
  stats_.refilled_nodes = static_cast<std::int64_t>(uncovered_.size());
  stats_.refill_eq_directions = 0;
  const auto& dims = field_.dims();

  for (const auto& [c, own] : uncovered_) {
    const Vec3i ijk = dims.unflat(c);
    const Vec3 pos = cell_center(ijk.x(), ijk.y(), ijk.z());
    const Vec3 u_new = wall_velocity_lat(own, pos);
    double* g = field_.cell(c);

    // A slot holds genuinely streamed data when its upwind source collided
    // last step, which the old mask decides.
    bool streamed[lbm::kQ];
    for (int q = 0; q < lbm::kQ; ++q) {
      const std::int64_t cu = wrap_cell(ijk.x() - lbm::kE[q][0],
                                        ijk.y() - lbm::kE[q][1],
                                        ijk.z() - lbm::kE[q][2]);
      streamed[q] = cu >= 0 && old_kind_[cu] != lbm::NodeKind::Solid;
    }

    double rho_sum = 0.0;
    int rho_n = 0;
    for (int d = 1; d < lbm::kQ; ++d) {
      const std::int64_t cn = wrap_cell(ijk.x() + lbm::kE[d][0],
                                        ijk.y() + lbm::kE[d][1],
                                        ijk.z() + lbm::kE[d][2]);
      if (cn < 0 || old_kind_[cn] == lbm::NodeKind::Solid) continue;
      rho_sum += lbm::moments(field_.cell(cn)).rho;
      ++rho_n;
    }
    const double rho_f = rho_n > 0 ? rho_sum / rho_n : field_.rho0();

    for (int q = 0; q < lbm::kQ; ++q) {
      if (streamed[q]) continue;
      if (streamed[lbm::kOpp[q]]) {
        const double ew = lbm::kE[q][0] * u_new.x() + lbm::kE[q][1] * u_new.y() +
                          lbm::kE[q][2] * u_new.z();
        g[q] = g[lbm::kOpp[q]] + 6.0 * lbm::kW[q] * rho_f * ew;
      } else {
        g[q] = lbm::equilibrium_dir(q, field_.rho0(), u_new);
        ++stats_.refill_eq_directions;
      }
    }
  }
}

void Coupler::apply_boundaries() {
  stats_.fallback_links = 0;
  for (auto& l : links_) {
    const Vec3 u_w = wall_velocity_lat(l.particle, l.wall_point);
    const int c = l.dir;
    const double g_plus_f = field_.cell(l.solid_cell)[c];
    const double rho_f = field_.rho_at(l.fluid_cell);
    const Vec3 u_f = field_.u_at(l.fluid_cell);
    const double ew = lbm::kE[c][0] * u_w.x() + lbm::kE[c][1] * u_w.y() +
                      lbm::kE[c][2] * u_w.z();

    if (l.ff_cell < 0) {
      // No second fluid node behind: single-node bounce-back.
      l.g_out = g_plus_f;
      l.fallback = true;
      ++stats_.fallback_links;
    } else {
      const Vec3 u_ff = field_.u_at(l.ff_cell);
      const double q = l.q;
      const Vec3 ud1 = q <= 0.5
                           ? Vec3(2.0 * q * u_f + (1.0 - 2.0 * q) * u_ff)
                           : Vec3(((1.0 - q) / q) * u_f +
                                  ((2.0 * q - 1.0) / q) * u_w);
      const Vec3 ud2 = ((1.0 - q) / (1.0 + q)) * u_ff +
                       (2.0 * q / (1.0 + q)) * u_w;
      const Vec3 ud = ud1 / 3.0 + 2.0 / 3.0 * ud2;
      l.g_out = lbm::equilibrium_dir(c, rho_f, ud) +
                (g_plus_f - lbm::equilibrium_dir(c, rho_f, u_f));
      l.fallback = false;
    }
    l.g_back = l.g_out - 6.0 * lbm::kW[c] * rho_f * ew;
    l.wall_velocity = u_w;
    field_.cell(l.fluid_cell)[lbm::kOpp[c]] = l.g_back;
  }
}

std::vector<HydroLoad> Coupler::exchange_momentum() const {
  std::vector<HydroLoad> loads(particles_.size());
  const double dx = field_.dx();
  const double dt = field_.dt();
  const double factor = fluid_density_ * dx * dx * dx * dx / (dt * dt);
  for (const auto& l : links_) {
    const Vec3 e = lbm::evec(l.dir);
    const Vec3 dp = (e - l.wall_velocity) * l.g_out -
                    (-e - l.wall_velocity) * l.g_back;
    const Vec3 f = factor * dp;
    loads[l.particle].force += f;
    loads[l.particle].torque +=
        (l.wall_point - particles_[l.particle].pose.translation).cross(f);
  }
  return loads;
}

}  // namespace granusol::fsi
