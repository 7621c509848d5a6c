#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace granusol {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Vec3i = Eigen::Vector3i;

/// Hard failure: invalid input, diverged numerics, NaN state. Callers are not
/// expected to recover; soft failures (no contact, no intersection) use
/// std::optional instead.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return 0.5 * (lo + hi); }
  bool contains(const Vec3& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  Aabb padded(double pad) const { return {lo.array() - pad, hi.array() + pad}; }
};

/// Flat indexing for a 3D cell grid, x fastest.
struct GridDims {
  int nx = 0, ny = 0, nz = 0;

  std::int64_t cells() const {
    return static_cast<std::int64_t>(nx) * ny * nz;
  }
  std::int64_t flat(int i, int j, int k) const {
    return (static_cast<std::int64_t>(k) * ny + j) * nx + i;
  }
  Vec3i unflat(std::int64_t c) const {
    const int i = static_cast<int>(c % nx);
    const int j = static_cast<int>((c / nx) % ny);
    const int k = static_cast<int>(c / (static_cast<std::int64_t>(nx) * ny));
    return {i, j, k};
  }
  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && i < nx && j >= 0 && j < ny && k >= 0 && k < nz;
  }
};

/// Rigid placement of a body frame in the world.
struct Pose {
  Vec3 translation = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Vec3 to_body(const Vec3& x_world) const {
    return orientation.conjugate() * (x_world - translation);
  }
  Vec3 to_world(const Vec3& x_body) const {
    return orientation * x_body + translation;
  }
  Vec3 rotate_to_world(const Vec3& v_body) const { return orientation * v_body; }
  Vec3 rotate_to_body(const Vec3& v_world) const {
    return orientation.conjugate() * v_world;
  }
  void renormalize() { orientation.normalize(); }
};

}  // namespace granusol
