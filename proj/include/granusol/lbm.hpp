#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "granusol/types.hpp"

namespace granusol {
namespace lbm {

inline constexpr int kQ = 19;

// Opposite directions sit in adjacent slots (1,2), (3,4), ... so kOpp is
// trivially derivable, but it is still computed by search below to keep the
// table order a free choice.
inline constexpr std::array<std::array<int, 3>, kQ> kE = {{
    {0, 0, 0},  {1, 0, 0},  {-1, 0, 0},  {0, 1, 0},  {0, -1, 0},
    {0, 0, 1},  {0, 0, -1}, {1, 1, 0},   {-1, -1, 0}, {1, -1, 0},
    {-1, 1, 0}, {1, 0, 1},  {-1, 0, -1}, {1, 0, -1}, {-1, 0, 1},
    {0, 1, 1},  {0, -1, -1}, {0, 1, -1}, {0, -1, 1},
}};

inline constexpr std::array<double, kQ> kW = {
    1.0 / 3.0,  1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0,
    1.0 / 18.0, 1.0 / 18.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
    1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
    1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0};

inline constexpr double kCs2 = 1.0 / 3.0;  // lattice sound speed squared

inline constexpr std::array<int, kQ> kOpp = [] {
  std::array<int, kQ> opp{};
  for (int i = 0; i < kQ; ++i)
    for (int j = 0; j < kQ; ++j)
      if (kE[j][0] == -kE[i][0] && kE[j][1] == -kE[i][1] &&
          kE[j][2] == -kE[i][2])
        opp[i] = j;
  return opp;
}();

inline Vec3 evec(int i) { return Vec3(kE[i][0], kE[i][1], kE[i][2]); }

/// BGK equilibrium, lattice units (|e| = 1 per step).
inline std::array<double, kQ> equilibrium(double rho, const Vec3& u) {
  const double uu = 1.5 * u.squaredNorm();
  std::array<double, kQ> g;
  for (int i = 0; i < kQ; ++i) {
    const double eu =
        kE[i][0] * u.x() + kE[i][1] * u.y() + kE[i][2] * u.z();
    g[i] = kW[i] * rho * (1.0 + 3.0 * eu + 4.5 * eu * eu - uu);
  }
  return g;
}

/// One direction of the BGK equilibrium.
inline double equilibrium_dir(int i, double rho, const Vec3& u) {
  const double eu = kE[i][0] * u.x() + kE[i][1] * u.y() + kE[i][2] * u.z();
  return kW[i] * rho *
         (1.0 + 3.0 * eu + 4.5 * eu * eu - 1.5 * u.squaredNorm());
}

struct Moments {
  double rho = 0.0;
  Vec3 u = Vec3::Zero();
};

/// Density and velocity of one cell's 19 populations.  Non-positive rho is
/// the caller's problem to flag; the per-step path aborts on it.
inline Moments moments(const double* g) {
  double rho = 0.0;
  Vec3 m = Vec3::Zero();
  for (int i = 0; i < kQ; ++i) {
    rho += g[i];
    m.x() += g[i] * kE[i][0];
    m.y() += g[i] * kE[i][1];
    m.z() += g[i] * kE[i][2];
  }
  Moments out;
  out.rho = rho;
  if (rho != 0.0) out.u = m / rho;
  return out;
}

enum class NodeKind : std::uint8_t { Fluid = 0, Boundary = 1, Solid = 2 };

enum class FaceRule : std::uint8_t { Periodic, Wall, Velocity };

struct Face {
  FaceRule rule = FaceRule::Periodic;
  Vec3 velocity = Vec3::Zero();  // lattice units; used by Velocity faces
};

/// Double-buffered D3Q19 field.  Everything inside is in lattice units
/// (dx = dt = 1, reference density 1); dx/dt/rho0 are carried only for
/// conversions at the edges.  collide_stream() is fused: it caches the
/// step-start moments, relaxes, and streams into the back buffer, writing
/// into solid destination slots as well so the coupling layer can read
/// incoming post-collision values and refill can keep genuinely streamed
/// populations.
class LatticeField {
 public:
  LatticeField(GridDims dims, double dx, double dt, double tau,
               double rho0 = 1.0);

  void set_face(int axis, int side, Face face);
  const Face& face(int axis, int side) const { return faces_[axis][side]; }

  /// Fills both buffers and the caches with equilibrium(rho, u).
  void initialize(double rho_lat, const Vec3& u_lat);

  /// One BGK step.  Throws SimError naming the cell on NaN or rho <= 0.
  void collide_stream();

  // Uniform body acceleration, lattice units per step^2 (velocity-shift
  // forcing: equilibrium sees u + tau a, physical velocity is u + a/2).
  void set_body_accel(const Vec3& a) { accel_ = a; }
  const Vec3& body_accel() const { return accel_; }

  const GridDims& dims() const { return dims_; }
  double dx() const { return dx_; }
  double dt() const { return dt_; }
  double tau() const { return tau_; }
  double rho0() const { return rho0_; }
  double viscosity_lat() const { return kCs2 * (tau_ - 0.5); }

  std::int64_t cells() const { return dims_.cells(); }
  double* cell(std::int64_t c) { return &f_[cur_][c * kQ]; }
  const double* cell(std::int64_t c) const { return &f_[cur_][c * kQ]; }
  /// Pre-stream buffer of the latest step (valid until the next step).
  const double* prev_cell(std::int64_t c) const {
    return &f_[1 - cur_][c * kQ];
  }

  /// Step-start macroscopic state (the fields walkers and coupling read).
  double rho_at(std::int64_t c) const { return rho_[c]; }
  const Vec3& u_at(std::int64_t c) const { return u_[c]; }
  /// Momentum moment plus the half-force shift, lattice units.
  Vec3 physical_u_at(std::int64_t c) const { return u_[c] + 0.5 * accel_; }

  NodeKind kind(std::int64_t c) const { return kind_[c]; }
  void set_kind(std::int64_t c, NodeKind k) { kind_[c] = k; }
  const std::vector<NodeKind>& kinds() const { return kind_; }

  /// Kahan-compensated sums over non-solid cells of the current buffer.
  double total_mass() const;
  Vec3 total_momentum() const;
  double kinetic_energy() const;
  double max_speed() const;

  // Checkpoint access: current buffer plus caches are enough to resume (the
  // back buffer is scratch).
  std::vector<double>& buffer() { return f_[cur_]; }
  const std::vector<double>& buffer() const { return f_[cur_]; }
  void refresh_moment_cache();

 private:
  GridDims dims_;
  double dx_, dt_, tau_, rho0_;
  Vec3 accel_ = Vec3::Zero();
  std::array<std::array<Face, 2>, 3> faces_;
  std::vector<double> f_[2];
  int cur_ = 0;
  std::vector<double> rho_;
  std::vector<Vec3> u_;
  std::vector<NodeKind> kind_;
};

}  // namespace lbm
}  // namespace granusol
