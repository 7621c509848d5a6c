#include "granusol/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace granusol {
namespace mesh {

namespace {

// Kuhn split: six tetrahedra around the 0-7 main diagonal.  Corner bit order
// is (x, y, z) -> bit 0, 1, 2.
constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                             {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

struct GridPoint {
  Vec3 pos;
  double value;
};

struct EdgeKey {
  std::uint64_t packed;
  bool operator==(const EdgeKey& o) const { return packed == o.packed; }
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const {
    std::uint64_t z = k.packed;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }
};

class Contourer {
 public:
  Contourer(const ScalarField& f, const Aabb& box, double cell, double iso)
      : f_(f), iso_(iso), cell_(cell), origin_(box.lo) {
    const Vec3 ext = box.extent();
    nx_ = std::max(2, static_cast<int>(std::ceil(ext.x() / cell)) + 1);
    ny_ = std::max(2, static_cast<int>(std::ceil(ext.y() / cell)) + 1);
    nz_ = std::max(2, static_cast<int>(std::ceil(ext.z() / cell)) + 1);
    values_.resize(static_cast<std::size_t>(nx_) * ny_ * nz_);
    for (int k = 0; k < nz_; ++k)
      for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i)
          values_[pid(i, j, k)] = f_(point(i, j, k));
  }

  void run(TriMesh& out) {
    mesh_ = &out;
    for (int k = 0; k + 1 < nz_; ++k)
      for (int j = 0; j + 1 < ny_; ++j)
        for (int i = 0; i + 1 < nx_; ++i) cube(out, i, j, k);
    if (out.triangles.empty())
      throw SimError("isosurface does not cross the meshing grid");
  }

 private:
  std::size_t pid(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
  }
  Vec3 point(int i, int j, int k) const {
    return origin_ + cell_ * Vec3(i, j, k);
  }

  void cube(TriMesh& out, int i, int j, int k) {
    std::size_t gid[8];
    for (int c = 0; c < 8; ++c)
      gid[c] = pid(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));

    // Cheap reject: a cube with all corners on one side cuts no tet.
    bool any_in = false, any_out = false;
    for (int c = 0; c < 8; ++c)
      (values_[gid[c]] > iso_ ? any_in : any_out) = true;
    if (!any_in || !any_out) return;

    for (const auto& tet : kTets) {
      std::size_t t[4] = {gid[tet[0]], gid[tet[1]], gid[tet[2]], gid[tet[3]]};
      int mask = 0;
      for (int c = 0; c < 4; ++c)
        if (values_[t[c]] > iso_) mask |= 1 << c;
      if (mask == 0 || mask == 15) continue;

      int in[4], out_c[4], ni = 0, no = 0;
      for (int c = 0; c < 4; ++c)
        (mask & (1 << c)) ? in[ni++] = c : out_c[no++] = c;

      if (ni == 1) {
        emit_tri(out, t, edge(t, in[0], out_c[0]), edge(t, in[0], out_c[1]),
                 edge(t, in[0], out_c[2]), {in[0]}, {out_c[0], out_c[1],
                 out_c[2]});
      } else if (ni == 3) {
        emit_tri(out, t, edge(t, in[0], out_c[0]), edge(t, in[1], out_c[0]),
                 edge(t, in[2], out_c[0]), {in[0], in[1], in[2]}, {out_c[0]});
      } else {  // two in, two out: a quad split into two triangles
        const int a = in[0], b = in[1], c = out_c[0], d = out_c[1];
        const int vac = edge(t, a, c);
        const int vad = edge(t, a, d);
        const int vbd = edge(t, b, d);
        const int vbc = edge(t, b, c);
        emit_tri(out, t, vac, vad, vbd, {a, b}, {c, d});
        emit_tri(out, t, vac, vbd, vbc, {a, b}, {c, d});
      }
    }
  }

  // Vertex on the edge between grid points pa (inside) and pb (outside),
  // refined by bisection on the exact field and deduplicated per edge.
  int edge(const std::size_t* t, int ca, int cb) {
    std::size_t a = t[ca], b = t[cb];
    const EdgeKey key{(static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                      std::max(a, b)};
    if (auto it = edge_cache_.find(key); it != edge_cache_.end())
      return it->second;

    Vec3 pin = grid_pos(a), pout = grid_pos(b);
    double fin = values_[a], fout = values_[b];
    // Seed from linear interpolation, then tighten the bracket.
    for (int iter = 0; iter < 40; ++iter) {
      const Vec3 mid = 0.5 * (pin + pout);
      const double fm = f_(mid);
      if (fm > iso_) {
        pin = mid;
        fin = fm;
      } else {
        pout = mid;
        fout = fm;
      }
      if ((pin - pout).norm() < 1e-10 * cell_) break;
    }
    (void)fin;
    (void)fout;
    const Vec3 v = 0.5 * (pin + pout);
    const int idx = static_cast<int>(mesh_->vertices.size());
    mesh_->vertices.push_back(v);
    edge_cache_.emplace(key, idx);
    return idx;
  }

  Vec3 grid_pos(std::size_t id) const {
    const int i = static_cast<int>(id % nx_);
    const int j = static_cast<int>((id / nx_) % ny_);
    const int k = static_cast<int>(id / (static_cast<std::size_t>(nx_) * ny_));
    return point(i, j, k);
  }

  // Orientation is decided numerically per triangle: the outward normal must
  // point from the inside corners toward the outside ones.  That keeps the
  // case bookkeeping honest without a hand-derived winding table.
  void emit_tri(TriMesh& out, const std::size_t* t, int v0, int v1, int v2,
                std::initializer_list<int> ins, std::initializer_list<int> outs) {
    const Vec3& a = mesh_->vertices[v0];
    const Vec3& b = mesh_->vertices[v1];
    const Vec3& c = mesh_->vertices[v2];
    Vec3 inc = Vec3::Zero(), outc = Vec3::Zero();
    for (int idx : ins) inc += grid_pos(t[idx]);
    for (int idx : outs) outc += grid_pos(t[idx]);
    inc /= static_cast<double>(ins.size());
    outc /= static_cast<double>(outs.size());
    const Vec3 n = (b - a).cross(c - a);
    if (n.dot(outc - inc) >= 0.0)
      out.triangles.push_back({v0, v1, v2});
    else
      out.triangles.push_back({v0, v2, v1});
  }

  TriMesh* mesh_ = nullptr;
  const ScalarField& f_;
  double iso_, cell_;
  Vec3 origin_;
  int nx_, ny_, nz_;
  std::vector<double> values_;
  std::unordered_map<EdgeKey, int, EdgeKeyHash> edge_cache_;
};

}  // namespace

TriMesh contour(const ScalarField& f, const Aabb& box, double cell,
                double iso) {
  if (!(cell > 0.0)) throw SimError("contour cell size must be positive");
  Contourer c(f, box, cell, iso);
  TriMesh out;
  c.run(out);
  return out;
}

void offset_outward(TriMesh& m, const VectorField& grad, double distance) {
  if (distance == 0.0) return;
  for (Vec3& v : m.vertices) {
    const Vec3 g = grad(v);
    const double len = g.norm();
    if (len < 1e-14)
      throw SimError("degenerate gradient while offsetting mesh vertex");
    v += distance * (-g / len);
  }
}

double surface_area(const TriMesh& m) {
  double a = 0.0;
  for (const Vec3i& t : m.triangles) {
    const Vec3& v0 = m.vertices[t[0]];
    a += 0.5 * (m.vertices[t[1]] - v0).cross(m.vertices[t[2]] - v0).norm();
  }
  return a;
}

double enclosed_volume(const TriMesh& m) {
  double v = 0.0;
  for (const Vec3i& t : m.triangles)
    v += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]]));
  return v / 6.0;
}

int component_count(const TriMesh& m) {
  std::vector<int> parent(m.vertices.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Vec3i& t : m.triangles) {
    const int a = find(t[0]);
    parent[find(t[1])] = a;
    parent[find(t[2])] = a;
  }
  int count = 0;
  for (std::size_t i = 0; i < parent.size(); ++i)
    if (find(static_cast<int>(i)) == static_cast<int>(i)) ++count;
  return count;
}

MassProperties mass_properties(const TriMesh& m, double density) {
  // Signed tetrahedra (origin, v0, v1, v2).  For x x^T over the canonical
  // simplex the exact integrals are 1/60 on the diagonal and 1/120 off it.
  double vol = 0.0;
  Vec3 first = Vec3::Zero();
  Mat3 second = Mat3::Zero();
  Mat3 canon;
  canon << 1.0 / 60, 1.0 / 120, 1.0 / 120,
           1.0 / 120, 1.0 / 60, 1.0 / 120,
           1.0 / 120, 1.0 / 120, 1.0 / 60;
  for (const Vec3i& t : m.triangles) {
    Mat3 a;
    a.col(0) = m.vertices[t[0]];
    a.col(1) = m.vertices[t[1]];
    a.col(2) = m.vertices[t[2]];
    const double det = a.col(0).dot(a.col(1).cross(a.col(2)));
    vol += det / 6.0;
    first += det / 24.0 * (a.col(0) + a.col(1) + a.col(2));
    second += det * (a * canon * a.transpose());
  }
  if (vol <= 0.0) throw SimError("mesh encloses non-positive volume");

  MassProperties out;
  out.volume = vol;
  out.mass = density * vol;
  out.centroid = first / vol;
  // Shift the second moment to the centroid, then convert to inertia.
  const Mat3 c2 = second - vol * out.centroid * out.centroid.transpose();
  out.inertia = density * (c2.trace() * Mat3::Identity() - c2);
  return out;
}

}  // namespace mesh
}  // namespace granusol
