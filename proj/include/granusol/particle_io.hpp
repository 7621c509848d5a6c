#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "granusol/metaball.hpp"

namespace granusol {
namespace particle_io {

/// Particle definition files are plain text, whitespace-tokenized, with '#'
/// comments.  One particle per record:
///
///   sphere <r>            outer radius r; sphero decomposition applied
///   <n>                   control point count
///   <x> <y> <z> <w>       n times, body frame
///   <R_s>                 dilation radius (0 allowed)
///
/// The n-record form is taken verbatim: the listed weights already describe
/// the internal metaball.  The sphere shorthand omits R_s, which triggers the
/// default decomposition: R_s = 0.1 x the minimum surface-to-centroid
/// distance, with weights rescaled so internal surface + dilation reproduces
/// the original outer surface.
std::vector<MetaballShape> load_particles(const std::string& path);
std::vector<MetaballShape> parse_particles(std::istream& in,
                                           const std::string& label);

/// Outermost crossing of f = iso along origin + t*dir (t > 0), if any.
std::optional<double> surface_distance(const MetaballShape& s,
                                       const Vec3& origin, const Vec3& dir);

/// In-place sphero decomposition of a shape whose current surface is the
/// intended outer one and whose sphero_radius is zero; see the grammar note.
void apply_default_decomposition(MetaballShape& s);

}  // namespace particle_io
}  // namespace granusol
