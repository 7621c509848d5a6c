#include "granusol/solute.hpp"

#include <cmath>
#include <cstdint>

#include "granusol/metaball.hpp"
#include "granusol/rng.hpp"

namespace granusol::solute {

namespace {

constexpr int kScatterRetries = 20;

// Folds a point into [0, extent): periodic axes wrap, reflecting axes mirror
// at the faces (triangle wave, exact for any overshoot).
Vec3 apply_domain(Vec3 x, const Domain& d) {
  for (int a = 0; a < 3; ++a) {
    const double len = d.extent[a];
    if (len <= 0.0) continue;
    if (d.periodic[a]) {
      x[a] -= len * std::floor(x[a] / len);
      if (x[a] >= len) x[a] = 0.0;
    } else if (x[a] < 0.0 || x[a] > len) {
      double t = std::fmod(x[a], 2.0 * len);
      if (t < 0.0) t += 2.0 * len;
      x[a] = (t <= len) ? t : 2.0 * len - t;
    }
  }
  return x;
}

// Image of x nearest to ref along periodic axes.
Vec3 near_image(const Vec3& x, const Vec3& ref, const Domain& d) {
  Vec3 out = x;
  for (int a = 0; a < 3; ++a) {
    const double len = d.extent[a];
    if (len <= 0.0 || !d.periodic[a]) continue;
    out[a] -= len * std::round((out[a] - ref[a]) / len);
  }
  return out;
}

// Index of the particle whose dilated field covers x most deeply (strict
// interior, f > c), or -1. Bounding spheres prune the exact evaluations.
int deepest_inside(const Vec3& x, const std::vector<RigidParticle>& particles,
                   const std::vector<MetaballShape>& probes, const Domain& d) {
  int best = -1;
  double best_ratio = 1.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const RigidParticle& p = particles[i];
    const Vec3 xi = near_image(x, p.pose.translation, d);
    const double br = p.bounding_radius();
    if ((xi - p.pose.translation).squaredNorm() > br * br) continue;
    const double ratio =
        metaball::evaluate(probes[i], p.pose, xi) / p.coupling_iso;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::int64_t cell_of(const Vec3& x, const GridDims& dims, double dx,
                     const Domain& d) {
  int idx[3];
  const int n[3] = {dims.nx, dims.ny, dims.nz};
  for (int a = 0; a < 3; ++a) {
    int i = static_cast<int>(std::floor(x[a] / dx));
    if (d.periodic[a]) {
      i %= n[a];
      if (i < 0) i += n[a];
    } else {
      i = std::min(n[a] - 1, std::max(0, i));
    }
    idx[a] = i;
  }
  return dims.flat(idx[0], idx[1], idx[2]);
}

// Direction pointing out of the probe surface at x, with a radial fallback
// when the gradient degenerates.
Vec3 outward_dir(const MetaballShape& probe, const RigidParticle& p,
                 const Vec3& x) {
  const Vec3 g = metaball::gradient(probe, p.pose, x);
  const double n = g.norm();
  if (n > 1e-20) return -g / n;
  const Vec3 r = x - p.pose.translation;
  const double rn = r.norm();
  return rn > 1e-20 ? Vec3(r / rn) : Vec3::UnitZ();
}

}  // namespace

VelocitySampler::VelocitySampler(const lbm::LatticeField& field,
                                 const fsi::Coupler* coupler,
                                 const std::vector<RigidParticle>* particles)
    : field_(field),
      coupler_(coupler),
      particles_(particles),
      vel_scale_(field.dx() / field.dt()) {
  for (int a = 0; a < 3; ++a)
    periodic_[a] = field.face(a, 0).rule == lbm::FaceRule::Periodic;
}

Vec3 VelocitySampler::operator()(const Vec3& x) const {
  const GridDims& dims = field_.dims();
  const double dx = field_.dx();
  const int n[3] = {dims.nx, dims.ny, dims.nz};

  int base[3];
  double fr[3];
  for (int a = 0; a < 3; ++a) {
    const double g = x[a] / dx - 0.5;
    const double fl = std::floor(g);
    base[a] = static_cast<int>(fl);
    fr[a] = g - fl;
  }

  Vec3 out = Vec3::Zero();
  for (int corner = 0; corner < 8; ++corner) {
    const int da[3] = {corner & 1, (corner >> 1) & 1, (corner >> 2) & 1};
    double w = 1.0;
    int idx[3];
    for (int a = 0; a < 3; ++a) {
      w *= da[a] ? fr[a] : 1.0 - fr[a];
      int i = base[a] + da[a];
      if (periodic_[a]) {
        i %= n[a];
        if (i < 0) i += n[a];
      } else {
        i = std::min(n[a] - 1, std::max(0, i));
      }
      idx[a] = i;
    }
    if (w == 0.0) continue;
    const std::int64_t c = dims.flat(idx[0], idx[1], idx[2]);

    Vec3 un;
    int own;
    if (coupler_ != nullptr && particles_ != nullptr &&
        field_.kind(c) == lbm::NodeKind::Solid &&
        (own = coupler_->owner_of(c)) >= 0) {
      // Covered node: rigid-body velocity at the node center, evaluated at
      // the image of the (unwrapped) stencil position nearest the body.
      const RigidParticle& p = (*particles_)[own];
      Vec3 pos;
      for (int a = 0; a < 3; ++a) {
        pos[a] = (static_cast<double>(base[a] + da[a]) + 0.5) * dx;
        if (periodic_[a]) {
          const double len = n[a] * dx;
          pos[a] -= len * std::round((pos[a] - p.pose.translation[a]) / len);
        }
      }
      un = p.velocity_at(pos);
    } else {
      un = field_.physical_u_at(c) * vel_scale_;
    }
    out += w * un;
  }
  return out;
}

std::vector<MetaballShape> walker_probes(
    const std::vector<RigidParticle>& particles) {
  std::vector<MetaballShape> probes;
  probes.reserve(particles.size());
  for (const RigidParticle& p : particles) {
    MetaballShape probe = p.shape;
    probe.iso_value = p.coupling_iso;  // walkers collide with the dilated skin
    probes.push_back(std::move(probe));
  }
  return probes;
}

std::vector<std::uint8_t> near_mask(const std::vector<RigidParticle>& particles,
                                    const GridDims& dims, double dx,
                                    const Domain& domain) {
  std::vector<std::uint8_t> mask(dims.cells(), 0);
  const int n[3] = {dims.nx, dims.ny, dims.nz};
  for (const RigidParticle& p : particles) {
    const double reach = p.bounding_radius() + 1e-9;
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = static_cast<int>(
          std::floor((p.pose.translation[a] - reach) / dx));
      hi[a] = static_cast<int>(
          std::floor((p.pose.translation[a] + reach) / dx));
      if (hi[a] - lo[a] + 1 >= n[a]) {
        lo[a] = 0;
        hi[a] = n[a] - 1;
      }
    }
    for (int k = lo[2]; k <= hi[2]; ++k) {
      int kk = k;
      if (domain.periodic[2]) {
        kk = k % n[2];
        if (kk < 0) kk += n[2];
      } else if (k < 0 || k >= n[2]) {
        continue;
      }
      for (int j = lo[1]; j <= hi[1]; ++j) {
        int jj = j;
        if (domain.periodic[1]) {
          jj = j % n[1];
          if (jj < 0) jj += n[1];
        } else if (j < 0 || j >= n[1]) {
          continue;
        }
        for (int i = lo[0]; i <= hi[0]; ++i) {
          int ii = i;
          if (domain.periodic[0]) {
            ii = i % n[0];
            if (ii < 0) ii += n[0];
          } else if (i < 0 || i >= n[0]) {
            continue;
          }
          mask[dims.flat(ii, jj, kk)] = 1;
        }
      }
    }
  }
  return mask;
}

void step_walkers(const WalkerSwarm& swarm, const VelocitySampler& u,
                  double dt, std::uint64_t step_index,
                  std::vector<Vec3>& proposals) {
  const std::size_t n = swarm.positions.size();
  proposals.resize(n);
  const double sigma = std::sqrt(2.0 * swarm.diffusion * dt);
  for (std::size_t w = 0; w < n; ++w) {
    const Vec3& x = swarm.positions[w];
    Vec3 next = x + u(x) * dt;
    if (sigma > 0.0) {
      RandomStream rs(swarm.seed, rng_tag::kWalkerStep, step_index, w);
      next += sigma * rs.normal3();
    }
    proposals[w] = next;
  }
}

StepStats classify_and_resolve(WalkerSwarm& swarm, std::vector<Vec3>& proposals,
                               const std::vector<RigidParticle>& particles,
                               const std::vector<MetaballShape>& probes,
                               const std::vector<std::uint8_t>& mask,
                               const GridDims& dims, double dx,
                               const Domain& domain, double dt,
                               std::uint64_t step_index) {
  if (probes.size() != particles.size())
    throw SimError("solute: probe list does not match the particle list");
  StepStats stats;
  const std::size_t n = swarm.positions.size();
  const bool use_mask = !mask.empty();
  const double scatter_radius = std::sqrt(2.0 * swarm.diffusion * dt);

  for (std::size_t w = 0; w < n; ++w) {
    const Vec3 x0 = swarm.positions[w];
    const Vec3 xp = apply_domain(proposals[w], domain);

    bool near = !particles.empty();
    if (near && use_mask) {
      near = mask[cell_of(x0, dims, dx, domain)] != 0 ||
             mask[cell_of(xp, dims, dx, domain)] != 0;
    }
    if (!near) {
      swarm.positions[w] = xp;
      ++stats.type_i;
      continue;
    }

    const int in0 = deepest_inside(x0, particles, probes, domain);
    const int inp = deepest_inside(xp, particles, probes, domain);

    if (in0 < 0 && inp < 0) {
      swarm.positions[w] = xp;
      ++stats.type_i;
      continue;
    }

    if (in0 >= 0 && inp < 0) {
      swarm.positions[w] = xp;
      ++stats.type_iii;
      continue;
    }

    if (in0 < 0) {
      // Entered a body: bounce the segment remainder off the surface.
      ++stats.type_iv;
      const RigidParticle& p = particles[inp];
      const Vec3 a = near_image(x0, p.pose.translation, domain);
      const Vec3 b = near_image(xp, p.pose.translation, domain);
      const auto hit = metaball::intersect_trajectory(probes[inp], p.pose, a, b);
      if (!hit) {
        ++stats.intersect_failures;
        ++stats.reverted;
        continue;
      }
      const auto refl =
          metaball::reflect_trajectory(probes[inp], p.pose, a, b, *hit);
      if (refl.degenerate) {
        ++stats.reverted;
        continue;
      }
      const Vec3 final_pos =
          apply_domain(refl.endpoint + (x0 - a), domain);
      if (deepest_inside(final_pos, particles, probes, domain) >= 0) {
        ++stats.reverted;  // one bounce only; grazing multi-hits stay put
        continue;
      }
      swarm.positions[w] = final_pos;
      continue;
    }

    // Dragged along inside a body: re-emit from the nearest surface point
    // with a diffusion-sized scatter (Dirichlet refill).
    ++stats.type_ii;
    const RigidParticle& p = particles[in0];
    const Vec3 a = near_image(x0, p.pose.translation, domain);
    Vec3 exit;
    const auto surf = metaball::push_to_surface(probes[in0], p.pose, a);
    if (surf) {
      exit = *surf;
    } else {
      ++stats.push_failures;
      Vec3 dir = a - p.pose.translation;
      const double dn = dir.norm();
      dir = dn > 1e-20 ? Vec3(dir / dn) : Vec3::UnitZ();
      exit = p.pose.translation + dir * (p.bounding_radius() + 1e-3 * dx);
    }

    RandomStream rs(swarm.seed, rng_tag::kScatter, step_index, w);
    bool placed = false;
    for (int attempt = 0; attempt < kScatterRetries && !placed; ++attempt) {
      const Vec3 cand = apply_domain(exit + rs.in_ball(scatter_radius), domain);
      if (deepest_inside(cand, particles, probes, domain) < 0) {
        swarm.positions[w] = cand;
        placed = true;
      }
    }
    if (!placed) {
      swarm.positions[w] = apply_domain(
          exit + 1e-3 * dx * outward_dir(probes[in0], p, exit), domain);
    }
  }
  return stats;
}

WalkerSwarm initialize_band(const Aabb& region, std::int64_t n_walkers,
                            double walker_mass, double diffusion,
                            std::uint64_t seed,
                            const std::vector<RigidParticle>& particles,
                            const std::vector<MetaballShape>& probes,
                            const Domain& domain, bool grid_mode,
                            std::int64_t* removed) {
  if (probes.size() != particles.size())
    throw SimError("solute: probe list does not match the particle list");
  if (n_walkers <= 0) throw SimError("solute: walker count must be positive");

  WalkerSwarm swarm;
  swarm.walker_mass = walker_mass;
  swarm.diffusion = diffusion;
  swarm.seed = seed;
  std::int64_t pruned = 0;

  auto try_place = [&](const Vec3& raw) {
    const Vec3 x = apply_domain(raw, domain);
    if (deepest_inside(x, particles, probes, domain) >= 0) {
      ++pruned;
    } else {
      swarm.positions.push_back(x);
    }
  };

  if (grid_mode) {
    const Vec3 ext = region.extent();
    const double vol = ext.prod();
    if (vol <= 0.0) throw SimError("solute: band region has no volume");
    const double scale = std::cbrt(static_cast<double>(n_walkers) / vol);
    int cnt[3];
    for (int a = 0; a < 3; ++a)
      cnt[a] = std::max(1, static_cast<int>(std::llround(ext[a] * scale)));
    swarm.positions.reserve(static_cast<std::size_t>(cnt[0]) * cnt[1] * cnt[2]);
    for (int k = 0; k < cnt[2]; ++k)
      for (int j = 0; j < cnt[1]; ++j)
        for (int i = 0; i < cnt[0]; ++i) {
          const Vec3 frac{(i + 0.5) / cnt[0], (j + 0.5) / cnt[1],
                          (k + 0.5) / cnt[2]};
          try_place(region.lo + frac.cwiseProduct(ext));
        }
  } else {
    swarm.positions.reserve(static_cast<std::size_t>(n_walkers));
    for (std::int64_t k = 0; k < n_walkers; ++k) {
      RandomStream rs(seed, rng_tag::kWalkerInit,
                      static_cast<std::uint64_t>(k));
      try_place(rs.in_box(region));
    }
  }

  if (removed != nullptr) *removed = pruned;
  if (swarm.positions.empty())
    throw SimError("solute: initial band is entirely inside solids");
  return swarm;
}

std::int64_t ConcentrationField::total_count() const {
  std::int64_t total = 0;
  for (const std::int64_t c : counts) total += c;
  return total;
}

ConcentrationField deposit(const WalkerSwarm& swarm, const GridDims& dims,
                           double dx) {
  ConcentrationField field;
  field.dims = dims;
  field.dx = dx;
  field.walker_mass = swarm.walker_mass;
  field.counts.assign(dims.cells(), 0);
  const int n[3] = {dims.nx, dims.ny, dims.nz};
  for (const Vec3& x : swarm.positions) {
    int idx[3];
    for (int a = 0; a < 3; ++a)
      idx[a] = std::min(n[a] - 1,
                        std::max(0, static_cast<int>(std::floor(x[a] / dx))));
    ++field.counts[dims.flat(idx[0], idx[1], idx[2])];
  }
  return field;
}

std::vector<double> axis_profile(const ConcentrationField& field, int axis) {
  if (axis < 0 || axis > 2) throw SimError("solute: profile axis out of range");
  const GridDims& dims = field.dims;
  const int n[3] = {dims.nx, dims.ny, dims.nz};
  std::vector<std::int64_t> slab(n[axis], 0);
  for (int k = 0; k < dims.nz; ++k)
    for (int j = 0; j < dims.ny; ++j)
      for (int i = 0; i < dims.nx; ++i) {
        const int along = axis == 0 ? i : (axis == 1 ? j : k);
        slab[along] += field.counts[dims.flat(i, j, k)];
      }
  const double slab_cells =
      static_cast<double>(dims.cells()) / static_cast<double>(n[axis]);
  const double slab_volume = slab_cells * field.dx * field.dx * field.dx;
  std::vector<double> profile(n[axis]);
  for (int s = 0; s < n[axis]; ++s)
    profile[s] = field.walker_mass * static_cast<double>(slab[s]) / slab_volume;
  return profile;
}

}  // namespace granusol::solute
