#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "granusol/types.hpp"

namespace granusol::output {

struct VtkScalars {
  std::string name;
  const std::vector<double>* values;  // one per cell, x fastest
};

struct VtkVectors {
  std::string name;
  const std::vector<Vec3>* values;
};

/// Legacy ASCII structured-points file; data live on cell centers, so the
/// origin is shifted by half a spacing.
void write_vtk(const std::string& path, const std::string& title,
               const GridDims& dims, double dx,
               const std::vector<VtkScalars>& scalars,
               const std::vector<VtkVectors>& vectors);

/// Numeric CSV with %.17g cells: values survive a write/parse round trip
/// bit-exactly.
void write_csv(const std::string& path,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// Columns come back in file order; throws on ragged rows.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

/// Binary little-endian snapshot of everything the run loop cannot rebuild
/// from the configuration alone.
struct Checkpoint {
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  GridDims dims;
  double dx = 0.0, dt = 0.0, tau = 0.0;
  Vec3 body_accel = Vec3::Zero();
  std::vector<double> populations;  // cells * 19, current buffer

  double walker_mass = 0.0;
  double diffusion = 0.0;
  std::vector<Vec3> walkers;

  struct ParticleState {
    Vec3 translation = Vec3::Zero();
    Quat orientation = Quat::Identity();
    Vec3 velocity = Vec3::Zero();
    Vec3 angular_velocity = Vec3::Zero();
  };
  std::vector<ParticleState> particles;

  struct Spring {
    std::uint64_t key = 0;
    Vec3 value = Vec3::Zero();
  };
  std::vector<Spring> springs;
};

void write_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace granusol::output
