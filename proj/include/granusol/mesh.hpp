#pragma once

#include <functional>
#include <vector>

#include "granusol/types.hpp"

namespace granusol {

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

/// Watertight triangle surface, outward-oriented.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3i> triangles;
};

namespace mesh {

/// Extracts the f = iso surface on a regular grid over `box` with cell size
/// `cell`.  Each grid cube is split into six tetrahedra sharing the main
/// diagonal; the split is translation invariant, so neighbouring cubes agree
/// on face diagonals and the result is watertight.  Edge vertices are refined
/// by bisection on the exact field, not just linear interpolation.
/// Throws SimError when the surface does not cross the grid at all.
TriMesh contour(const ScalarField& f, const Aabb& box, double cell, double iso);

/// Moves every vertex `distance` along the local outward normal -grad/|grad|.
void offset_outward(TriMesh& m, const VectorField& grad, double distance);

double surface_area(const TriMesh& m);
double enclosed_volume(const TriMesh& m);

/// Number of connected surface components (vertex connectivity).
int component_count(const TriMesh& m);

struct MassProperties {
  double volume = 0.0;
  double mass = 0.0;
  Vec3 centroid = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();  // about the centroid
};

/// Volume integrals by signed tetrahedra against the origin; valid for any
/// closed outward-oriented mesh.  Density is uniform.
MassProperties mass_properties(const TriMesh& m, double density);

}  // namespace mesh
}  // namespace granusol
