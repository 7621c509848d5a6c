#include "granusol/particle_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "granusol/shape_metrics.hpp"

namespace granusol {
namespace particle_io {

namespace {

struct Token {
  std::string text;
  int line;
};

std::vector<Token> tokenize(std::istream& in) {
  std::vector<Token> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) out.push_back({tok, lineno});
  }
  return out;
}

double to_number(const Token& t, const std::string& label) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t.text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != t.text.size())
    throw SimError(label + ":" + std::to_string(t.line) +
                   ": expected a number, got '" + t.text + "'");
  return v;
}

}  // namespace

std::optional<double> surface_distance(const MetaballShape& s,
                                       const Vec3& origin, const Vec3& dir) {
  // March inward from past the bounding radius so the outermost crossing is
  // found even when the ray re-enters other lobes on the way.
  const Vec3 d = dir.normalized();
  const double reach = s.bounding_radius() - s.sphero_radius + 1e-9;
  const int steps = 512;
  double t_out = reach;
  double f_out = metaball::evaluate_body(s, origin + t_out * d);
  if (f_out >= s.iso_value) return std::nullopt;  // shape pokes past reach?
  for (int i = 1; i <= steps; ++i) {
    const double t = reach * (1.0 - static_cast<double>(i) / steps);
    const double f = metaball::evaluate_body(s, origin + t * d);
    if (f >= s.iso_value) {
      double lo = t, hi = t_out;  // f(lo) >= iso > f(hi)
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (metaball::evaluate_body(s, origin + mid * d) >= s.iso_value)
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    t_out = t;
    f_out = f;
  }
  return std::nullopt;
}

void apply_default_decomposition(MetaballShape& s) {
  s.validate();
  if (s.sphero_radius != 0.0)
    throw SimError("decomposition expects an undecomposed shape (R_s = 0)");

  const Vec3 centroid = s.weighted_centroid();
  const auto dirs = shape::orientation_directions(256);
  std::vector<Vec3> hit_dirs;
  std::vector<double> radii;
  double min_radius = 1e300;
  for (const Vec3& d : dirs) {
    if (const auto r = surface_distance(s, centroid, d)) {
      hit_dirs.push_back(d);
      radii.push_back(*r);
      min_radius = std::min(min_radius, *r);
    }
  }
  if (radii.size() < dirs.size() / 2)
    throw SimError("sphero decomposition: centroid sees too little surface");

  const double sphero = 0.1 * min_radius;

  // Rescale weights by beta so the shrunken internal surface plus dilation
  // reproduces the original outer surface on average over the sampled rays.
  // beta * f = iso is the same surface as f = iso / beta, and the mean radius
  // mismatch is monotone in beta, so plain bisection suffices.
  MetaballShape probe = s;
  auto mean_gap = [&](double beta) {
    probe.iso_value = s.iso_value / beta;
    double gap = 0.0;
    for (std::size_t i = 0; i < hit_dirs.size(); ++i) {
      const auto r = surface_distance(probe, centroid, hit_dirs[i]);
      if (!r) return -1e300;  // shrunk below this ray; push beta up
      gap += *r - (radii[i] - sphero);
    }
    return gap / static_cast<double>(hit_dirs.size());
  };

  double lo = 1e-6, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_gap(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double beta = 0.5 * (lo + hi);
  for (double& w : s.weights) w *= beta;
  s.sphero_radius = sphero;
}

std::vector<MetaballShape> parse_particles(std::istream& in,
                                           const std::string& label) {
  const auto tokens = tokenize(in);
  std::vector<MetaballShape> shapes;
  std::size_t pos = 0;
  auto need = [&](const char* what) -> const Token& {
    if (pos >= tokens.size())
      throw SimError(label + ": unexpected end of file, expected " +
                     std::string(what));
    return tokens[pos++];
  };

  while (pos < tokens.size()) {
    MetaballShape s;
    if (tokens[pos].text == "sphere") {
      const int line = tokens[pos].line;
      ++pos;
      const double r = to_number(need("sphere radius"), label);
      if (!(r > 0.0))
        throw SimError(label + ":" + std::to_string(line) +
                       ": sphere radius must be positive");
      s.control_points = {Vec3::Zero()};
      s.weights = {r * r};
      apply_default_decomposition(s);
    } else {
      const Token& head = tokens[pos];
      const double n_raw = to_number(need("control point count"), label);
      const int n = static_cast<int>(n_raw);
      if (n <= 0 || n != n_raw)
        throw SimError(label + ":" + std::to_string(head.line) +
                       ": control point count must be a positive integer");
      for (int i = 0; i < n; ++i) {
        const double x = to_number(need("control point x"), label);
        const double y = to_number(need("control point y"), label);
        const double z = to_number(need("control point z"), label);
        const Token& wt = tokens[pos];
        const double w = to_number(need("control point weight"), label);
        if (!(w > 0.0))
          throw SimError(label + ":" + std::to_string(wt.line) +
                         ": weight must be positive");
        s.control_points.emplace_back(x, y, z);
        s.weights.push_back(w);
      }
      const Token& rst = tokens[pos];
      const double rs = to_number(need("sphero radius"), label);
      if (rs < 0.0)
        throw SimError(label + ":" + std::to_string(rst.line) +
                       ": sphero radius must be >= 0");
      s.sphero_radius = rs;
    }
    s.validate();
    shapes.push_back(std::move(s));
  }
  if (shapes.empty()) throw SimError(label + ": no particle records found");
  return shapes;
}

std::vector<MetaballShape> load_particles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError("cannot open particle file: " + path);
  return parse_particles(in, path);
}

}  // namespace particle_io
}  // namespace granusol
