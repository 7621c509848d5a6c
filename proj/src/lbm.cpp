#include "granusol/lbm.hpp"

#include <cmath>
#include <string>

namespace granusol {
namespace lbm {

namespace {

std::string cell_name(const GridDims& d, std::int64_t c) {
  const Vec3i ijk = d.unflat(c);
  return "(" + std::to_string(ijk.x()) + ", " + std::to_string(ijk.y()) +
         ", " + std::to_string(ijk.z()) + ")";
}

struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

LatticeField::LatticeField(GridDims dims, double dx, double dt, double tau,
                           double rho0)
    : dims_(dims), dx_(dx), dt_(dt), tau_(tau), rho0_(rho0) {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
    throw SimError("lattice dimensions must be positive");
  if (!(tau > 0.5)) throw SimError("tau must exceed 0.5 for positive viscosity");
  if (!(dx > 0.0) || !(dt > 0.0)) throw SimError("dx and dt must be positive");
  const std::int64_t n = dims.cells();
  f_[0].assign(n * kQ, 0.0);
  f_[1].assign(n * kQ, 0.0);
  rho_.assign(n, 1.0);
  u_.assign(n, Vec3::Zero());
  kind_.assign(n, NodeKind::Fluid);
}

void LatticeField::set_face(int axis, int side, Face face) {
  faces_[axis][side] = face;
}

void LatticeField::initialize(double rho_lat, const Vec3& u_lat) {
  const auto geq = equilibrium(rho_lat, u_lat);
  const std::int64_t n = dims_.cells();
  for (std::int64_t c = 0; c < n; ++c) {
    for (int i = 0; i < kQ; ++i) {
      f_[0][c * kQ + i] = geq[i];
      f_[1][c * kQ + i] = geq[i];
    }
    rho_[c] = rho_lat;
    u_[c] = u_lat;
  }
}

void LatticeField::collide_stream() {
  const double* src = f_[cur_].data();
  double* dst = f_[1 - cur_].data();
  const double omega = 1.0 / tau_;
  const Vec3 ushift = tau_ * accel_;
  const int nx = dims_.nx, ny = dims_.ny, nz = dims_.nz;

  std::int64_t off[kQ];
  for (int q = 0; q < kQ; ++q)
    off[q] = kE[q][0] + static_cast<std::int64_t>(nx) *
                            (kE[q][1] + static_cast<std::int64_t>(ny) * kE[q][2]);

  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const bool edge_jk = j == 0 || j == ny - 1 || k == 0 || k == nz - 1;
      std::int64_t idx = dims_.flat(0, j, k);
      for (int i = 0; i < nx; ++i, ++idx) {
        if (kind_[idx] == NodeKind::Solid) continue;
        const double* g = src + idx * kQ;

        double rho = 0.0, mx = 0.0, my = 0.0, mz = 0.0;
        for (int q = 0; q < kQ; ++q) {
          rho += g[q];
          mx += g[q] * kE[q][0];
          my += g[q] * kE[q][1];
          mz += g[q] * kE[q][2];
        }
        if (!(rho > 0.0) || !std::isfinite(mx + my + mz))
          throw SimError("lattice blow-up: bad density at cell " +
                         cell_name(dims_, idx));
        const Vec3 u(mx / rho, my / rho, mz / rho);
        rho_[idx] = rho;
        u_[idx] = u;

        const auto geq = equilibrium(rho, u + ushift);
        const bool border = edge_jk || i == 0 || i == nx - 1;
        if (!border) {
          for (int q = 0; q < kQ; ++q) {
            const double gp = g[q] + omega * (geq[q] - g[q]);
            dst[(idx + off[q]) * kQ + q] = gp;
          }
        } else {
          for (int q = 0; q < kQ; ++q) {
            const double gp = g[q] + omega * (geq[q] - g[q]);
            int ti = i + kE[q][0], tj = j + kE[q][1], tk = k + kE[q][2];
            double wall_eu = 0.0;
            bool bounced = false;
            auto face_axis = [&](int& t, int n_ax, int axis) {
              if (t >= 0 && t < n_ax) return;
              const Face& fc = faces_[axis][t < 0 ? 0 : 1];
              if (fc.rule == FaceRule::Periodic) {
                t = (t + n_ax) % n_ax;
              } else {
                bounced = true;
                if (fc.rule == FaceRule::Velocity)
                  wall_eu += kE[q][0] * fc.velocity.x() +
                             kE[q][1] * fc.velocity.y() +
                             kE[q][2] * fc.velocity.z();
              }
            };
            face_axis(ti, nx, 0);
            face_axis(tj, ny, 1);
            face_axis(tk, nz, 2);
            if (bounced) {
              dst[idx * kQ + kOpp[q]] = gp - 6.0 * kW[q] * rho * wall_eu;
            } else {
              dst[dims_.flat(ti, tj, tk) * kQ + q] = gp;
            }
          }
        }
      }
    }
  }
  cur_ = 1 - cur_;
}

double LatticeField::total_mass() const {
  const double* g = f_[cur_].data();
  KahanSum s;
  const std::int64_t n = dims_.cells();
  for (std::int64_t c = 0; c < n; ++c) {
    if (kind_[c] == NodeKind::Solid) continue;
    for (int q = 0; q < kQ; ++q) s.add(g[c * kQ + q]);
  }
  return s.sum;
}

Vec3 LatticeField::total_momentum() const {
  const double* g = f_[cur_].data();
  KahanSum sx, sy, sz;
  const std::int64_t n = dims_.cells();
  for (std::int64_t c = 0; c < n; ++c) {
    if (kind_[c] == NodeKind::Solid) continue;
    for (int q = 0; q < kQ; ++q) {
      const double v = g[c * kQ + q];
      sx.add(v * kE[q][0]);
      sy.add(v * kE[q][1]);
      sz.add(v * kE[q][2]);
    }
  }
  return {sx.sum, sy.sum, sz.sum};
}

double LatticeField::kinetic_energy() const {
  const double* g = f_[cur_].data();
  KahanSum s;
  const std::int64_t n = dims_.cells();
  for (std::int64_t c = 0; c < n; ++c) {
    if (kind_[c] == NodeKind::Solid) continue;
    const Moments m = moments(g + c * kQ);
    s.add(0.5 * m.rho * m.u.squaredNorm());
  }
  return s.sum;
}

double LatticeField::max_speed() const {
  const double* g = f_[cur_].data();
  double best = 0.0;
  const std::int64_t n = dims_.cells();
  for (std::int64_t c = 0; c < n; ++c) {
    if (kind_[c] == NodeKind::Solid) continue;
    const Moments m = moments(g + c * kQ);
    best = std::max(best, m.u.norm());
  }
  return best;
}

void LatticeField::refresh_moment_cache() {
  const double* g = f_[cur_].data();
  const std::int64_t n = dims_.cells();
  for (std::int64_t c = 0; c < n; ++c) {
    if (kind_[c] == NodeKind::Solid) continue;
    const Moments m = moments(g + c * kQ);
    rho_[c] = m.rho;
    u_[c] = m.u;
  }
}

}  // namespace lbm
}  // namespace granusol
