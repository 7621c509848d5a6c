#pragma once

#include <vector>

#include "granusol/mesh.hpp"
#include "granusol/metaball.hpp"
#include "granusol/types.hpp"

namespace granusol {
namespace shape {

/// One orthographic view of the body.
struct Silhouette {
  double area = 0.0;
  double perimeter = 0.0;
};

struct Features {
  double volume = 0.0;
  double surface_area = 0.0;
  double sphericity = 0.0;           // equivalent-sphere area over actual area
  double nominal_diameter = 0.0;     // diameter of the volume-equivalent sphere
  double max_projected_area = 0.0;   // over the sampled view directions
  double projected_perimeter = 0.0;  // outline length of the maximal view
  double surface_equiv_diameter = 0.0;  // circle with the maximal view's area
  double diameter_ratio = 0.0;          // nominal over surface-equivalent
  double circularity = 0.0;             // equivalent circle rim over outline
  double corey_shape_factor = 0.0;      // short axis over sqrt(mid * long)
  double axis_short = 0.0;
  double axis_intermediate = 0.0;
  double axis_long = 0.0;
  int surface_components = 1;
};

/// Body-frame mesh of the surface the grain presents to the flow: the stored
/// isosurface dilated outward by the sphero radius.  cell <= 0 picks the
/// default resolution, bounding-box diagonal / 128.
TriMesh surface_mesh(const MetaballShape& s, double cell = 0.0);

/// Deterministic, quasi-uniform unit directions.  The sequence is nested: the
/// first n directions of a larger request are identical, so enlarging the set
/// can only widen the max search.
std::vector<Vec3> orientation_directions(int n);

/// Rasterizes the mesh orthographically along `dir` at the given pixel size
/// (16 boolean subsamples per pixel) and walks the half-coverage contour for
/// the outline length.  Perimeter extraction is skipped when not requested.
Silhouette project(const TriMesh& m, const Vec3& dir, double pixel,
                   bool want_perimeter);

/// Feature extraction from an already-meshed body; `cell` doubles as the
/// projection pixel size.
Features compute_from_mesh(const TriMesh& m, double cell,
                           int orientations = 256);

Features compute(const MetaballShape& s, double cell = 0.0,
                 int orientations = 256);

}  // namespace shape
}  // namespace granusol
