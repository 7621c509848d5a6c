#include "granusol/shape_metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace granusol {
namespace shape {

namespace {

void make_basis(const Vec3& dir, Vec3& e1, Vec3& e2) {
  const Vec3 d = dir.normalized();
  const Vec3 pick = std::abs(d.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
  e1 = d.cross(pick).normalized();
  e2 = d.cross(e1);
}

// Coverage of the half level set on a grid of pixel-center samples; marching
// squares with linear interpolation.  Saddles are split by the cell average.
double contour_length(const std::vector<double>& cov, int w, int h,
                      double pixel) {
  const double level = 0.5;
  auto at = [&](int i, int j) { return cov[static_cast<std::size_t>(j) * w + i]; };
  auto lerp = [&](double a, double b) { return (level - a) / (b - a); };
  double total = 0.0;
  for (int j = 0; j + 1 < h; ++j)
    for (int i = 0; i + 1 < w; ++i) {
      const double v00 = at(i, j), v10 = at(i + 1, j);
      const double v11 = at(i + 1, j + 1), v01 = at(i, j + 1);
      int mask = 0;
      if (v00 > level) mask |= 1;
      if (v10 > level) mask |= 2;
      if (v11 > level) mask |= 4;
      if (v01 > level) mask |= 8;
      if (mask == 0 || mask == 15) continue;

      // Edge crossing points in cell-local coordinates.
      const Eigen::Vector2d bottom(lerp(v00, v10), 0.0);
      const Eigen::Vector2d right(1.0, lerp(v10, v11));
      const Eigen::Vector2d top(lerp(v01, v11), 1.0);
      const Eigen::Vector2d left(0.0, lerp(v00, v01));
      auto seg = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        total += (a - b).norm() * pixel;
      };

      switch (mask) {
        case 1: case 14: seg(bottom, left); break;
        case 2: case 13: seg(bottom, right); break;
        case 3: case 12: seg(left, right); break;
        case 4: case 11: seg(right, top); break;
        case 6: case 9:  seg(bottom, top); break;
        case 7: case 8:  seg(left, top); break;
        case 5: case 10: {
          const double center = 0.25 * (v00 + v10 + v11 + v01);
          const bool join_first = (center > level) == (mask == 5);
          if (join_first) {
            seg(bottom, right);
            seg(left, top);
          } else {
            seg(bottom, left);
            seg(right, top);
          }
          break;
        }
        default: break;
      }
    }
  return total;
}

}  // namespace

TriMesh surface_mesh(const MetaballShape& s, double cell) {
  s.validate();
  const double rb = s.bounding_radius();
  if (cell <= 0.0) cell = 2.0 * std::sqrt(3.0) * rb / 128.0;
  // Contour the internal surface, then dilate; the box needs slack for both.
  const double inner = rb - s.sphero_radius;
  const Aabb box{Vec3(-inner - 2 * cell, -inner - 2 * cell, -inner - 2 * cell),
                 Vec3(inner + 2 * cell, inner + 2 * cell, inner + 2 * cell)};
  const ScalarField f = [&s](const Vec3& x) {
    return metaball::evaluate_body(s, x);
  };
  TriMesh m = mesh::contour(f, box, cell, s.iso_value);
  if (s.sphero_radius > 0.0) {
    const VectorField g = [&s](const Vec3& x) {
      return metaball::gradient_body(s, x);
    };
    mesh::offset_outward(m, g, s.sphero_radius);
  }
  return m;
}

std::vector<Vec3> orientation_directions(int n) {
  if (n < 1) throw SimError("orientation count must be >= 1");
  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    for (int i = index + 1; i > 0; i /= base) {
      f /= base;
      r += f * (i % base);
    }
    return r;
  };
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * halton(i, 2);
    const double phi = 2.0 * M_PI * halton(i, 3);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

Silhouette project(const TriMesh& m, const Vec3& dir, double pixel,
                   bool want_perimeter) {
  if (!(pixel > 0.0)) throw SimError("projection pixel size must be positive");
  Vec3 e1, e2;
  make_basis(dir, e1, e2);

  std::vector<Eigen::Vector2d> pts(m.vertices.size());
  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    pts[i] = {m.vertices[i].dot(e1), m.vertices[i].dot(e2)};
    lo = lo.cwiseMin(pts[i]);
    hi = hi.cwiseMax(pts[i]);
  }
  lo.array() -= 2.0 * pixel;
  hi.array() += 2.0 * pixel;

  const int w = static_cast<int>(std::ceil((hi.x() - lo.x()) / pixel));
  const int h = static_cast<int>(std::ceil((hi.y() - lo.y()) / pixel));
  constexpr int kSub = 4;  // 4x4 boolean subsamples per pixel
  const int sw = w * kSub, sh = h * kSub;
  const double sub = pixel / kSub;
  std::vector<std::uint8_t> hitgrid(static_cast<std::size_t>(sw) * sh, 0);

  for (const Vec3i& t : m.triangles) {
    const Eigen::Vector2d a = pts[t[0]], b = pts[t[1]], c = pts[t[2]];
    const double area2 =
        (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (std::abs(area2) < 1e-14) continue;  // edge-on sliver
    const double tlx = std::min({a.x(), b.x(), c.x()});
    const double tly = std::min({a.y(), b.y(), c.y()});
    const double thx = std::max({a.x(), b.x(), c.x()});
    const double thy = std::max({a.y(), b.y(), c.y()});
    const int i0 = std::max(0, static_cast<int>((tlx - lo.x()) / sub));
    const int j0 = std::max(0, static_cast<int>((tly - lo.y()) / sub));
    const int i1 = std::min(sw - 1, static_cast<int>((thx - lo.x()) / sub) + 1);
    const int j1 = std::min(sh - 1, static_cast<int>((thy - lo.y()) / sub) + 1);
    const double s = area2 > 0 ? 1.0 : -1.0;
    for (int j = j0; j <= j1; ++j) {
      const double py = lo.y() + (j + 0.5) * sub;
      for (int i = i0; i <= i1; ++i) {
        std::uint8_t& cellv = hitgrid[static_cast<std::size_t>(j) * sw + i];
        if (cellv) continue;
        const double px = lo.x() + (i + 0.5) * sub;
        const double w0 =
            s * ((b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x()));
        const double w1 =
            s * ((c.x() - b.x()) * (py - b.y()) - (c.y() - b.y()) * (px - b.x()));
        const double w2 =
            s * ((a.x() - c.x()) * (py - c.y()) - (a.y() - c.y()) * (px - c.x()));
        if (w0 >= 0 && w1 >= 0 && w2 >= 0) cellv = 1;
      }
    }
  }

  std::vector<double> coverage(static_cast<std::size_t>(w) * h, 0.0);
  std::int64_t hits = 0;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      int count = 0;
      for (int sj = 0; sj < kSub; ++sj)
        for (int si = 0; si < kSub; ++si)
          count += hitgrid[static_cast<std::size_t>(j * kSub + sj) * sw +
                           i * kSub + si];
      coverage[static_cast<std::size_t>(j) * w + i] =
          count / static_cast<double>(kSub * kSub);
      hits += count;
    }

  Silhouette out;
  out.area = static_cast<double>(hits) * sub * sub;
  if (want_perimeter) out.perimeter = contour_length(coverage, w, h, pixel);
  return out;
}

Features compute(const MetaballShape& s, double cell, int orientations) {
  const double rb = s.bounding_radius();
  if (cell <= 0.0) cell = 2.0 * std::sqrt(3.0) * rb / 128.0;
  return compute_from_mesh(surface_mesh(s, cell), cell, orientations);
}

Features compute_from_mesh(const TriMesh& m, double cell, int orientations) {
  Features out;
  out.volume = mesh::enclosed_volume(m);
  out.surface_area = mesh::surface_area(m);
  out.surface_components = mesh::component_count(m);
  out.nominal_diameter = std::cbrt(6.0 * out.volume / M_PI);
  out.sphericity =
      std::pow(M_PI, 1.0 / 3.0) * std::pow(6.0 * out.volume, 2.0 / 3.0) /
      out.surface_area;

  const auto dirs = orientation_directions(orientations);
  double best_area = -1.0;
  Vec3 best_dir = Vec3::UnitZ();
  for (const Vec3& d : dirs) {
    const Silhouette sil = project(m, d, cell, false);
    if (sil.area > best_area) {
      best_area = sil.area;
      best_dir = d;
    }
  }
  const Silhouette maximal = project(m, best_dir, cell, true);
  out.max_projected_area = maximal.area;
  out.projected_perimeter = maximal.perimeter;
  out.surface_equiv_diameter = std::sqrt(4.0 * maximal.area / M_PI);
  out.diameter_ratio = out.nominal_diameter / out.surface_equiv_diameter;
  out.circularity = M_PI * out.surface_equiv_diameter / maximal.perimeter;

  // Principal extents from the area-weighted surface covariance.  Plain
  // vertex covariance is not rotation stable: vertex density depends on how
  // the surface slices the meshing grid.  The exact per-triangle integral
  // int x x^T dA = A/12 (a a^T + b b^T + c c^T + 9 m m^T) is.
  Vec3 mean = Vec3::Zero();
  double area_sum = 0.0;
  for (const Vec3i& t : m.triangles) {
    const Vec3 &a = m.vertices[t[0]], &b = m.vertices[t[1]],
               &c = m.vertices[t[2]];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    mean += area * (a + b + c) / 3.0;
    area_sum += area;
  }
  mean /= area_sum;
  Mat3 cov = Mat3::Zero();
  for (const Vec3i& t : m.triangles) {
    const Vec3 a = m.vertices[t[0]] - mean;
    const Vec3 b = m.vertices[t[1]] - mean;
    const Vec3 c = m.vertices[t[2]] - mean;
    const double area = 0.5 * (b - a).cross(c - a).norm();
    const Vec3 mid = (a + b + c) / 3.0;
    cov += area / 12.0 *
           (a * a.transpose() + b * b.transpose() + c * c.transpose() +
            9.0 * mid * mid.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  std::array<double, 3> extent{};
  for (int a = 0; a < 3; ++a) {
    const Vec3 axis = eig.eigenvectors().col(a);
    double pmin = 1e300, pmax = -1e300;
    for (const Vec3& v : m.vertices) {
      const double p = (v - mean).dot(axis);
      pmin = std::min(pmin, p);
      pmax = std::max(pmax, p);
    }
    extent[a] = pmax - pmin;
  }
  std::sort(extent.begin(), extent.end());
  out.axis_short = extent[0];
  out.axis_intermediate = extent[1];
  out.axis_long = extent[2];
  out.corey_shape_factor =
      out.axis_short / std::sqrt(out.axis_intermediate * out.axis_long);
  return out;
}

}  // namespace shape
}  // namespace granusol
