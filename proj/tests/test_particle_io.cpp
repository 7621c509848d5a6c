#include <doctest.h>

#include <cmath>
#include <sstream>

#include "granusol/particle_io.hpp"
#include "granusol/rng.hpp"

using namespace granusol;

TEST_SUITE_BEGIN("particle_io");

namespace {

std::vector<MetaballShape> parse(const std::string& text) {
  std::istringstream in(text);
  return particle_io::parse_particles(in, "test");
}

}  // namespace

TEST_CASE("explicit record is taken verbatim") {
  const auto shapes = parse(
      "# a two-lobe grain\n"
      "2\n"
      "-0.5 0 0 1.0\n"
      " 0.5 0 0 1.5   # second lobe\n"
      "0.05\n");
  REQUIRE(shapes.size() == 1);
  const auto& s = shapes[0];
  CHECK(s.control_points.size() == 2);
  CHECK(s.weights[0] == 1.0);
  CHECK(s.weights[1] == 1.5);
  CHECK(s.sphero_radius == 0.05);
}

TEST_CASE("sphere shorthand decomposes with a tenth-radius dilation") {
  const auto shapes = parse("sphere 2.0\n");
  REQUIRE(shapes.size() == 1);
  const auto& s = shapes[0];
  CHECK(s.sphero_radius == doctest::Approx(0.2).epsilon(1e-9));
  // Internal surface shrinks to 0.9 r, so the rescaled weight is (0.9 r)^2.
  CHECK(s.weights[0] == doctest::Approx(3.24).epsilon(1e-6));
  // Outer surface (internal + dilation) still sits at r.
  const double inner = std::sqrt(s.weights[0]);
  CHECK(inner + s.sphero_radius == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("multiple records in one file") {
  const auto shapes = parse(
      "sphere 1.0\n"
      "1\n"
      "0 0 0 4.0\n"
      "0.0\n"
      "sphere 0.5\n");
  CHECK(shapes.size() == 3);
  CHECK(shapes[1].sphero_radius == 0.0);
  CHECK(shapes[1].weights[0] == 4.0);
}

TEST_CASE("decomposition preserves the outer surface of a blob") {
  MetaballShape s;
  s.control_points = {Vec3(-0.8, 0, 0), Vec3(0.7, 0.2, 0), Vec3(0, -0.3, 0.5)};
  s.weights = {1.0, 1.3, 0.8};
  MetaballShape original = s;
  particle_io::apply_default_decomposition(s);
  CHECK(s.sphero_radius > 0.0);

  // Compare outer radii along rays: dilated internal vs original surface.
  const Vec3 centroid = original.weighted_centroid();
  RandomStream r(5);
  double mean_err = 0.0, max_err = 0.0;
  int count = 0;
  for (int i = 0; i < 200; ++i) {
    const Vec3 d = r.normal3().normalized();
    const auto r_orig = particle_io::surface_distance(original, centroid, d);
    const auto r_int = particle_io::surface_distance(s, centroid, d);
    if (!r_orig || !r_int) continue;
    const double err = (*r_int + s.sphero_radius) - *r_orig;
    mean_err += err;
    max_err = std::max(max_err, std::abs(err) / *r_orig);
    ++count;
  }
  REQUIRE(count > 150);
  // Mean-fit: bias is driven to zero, per-direction spread stays small.
  CHECK(std::abs(mean_err / count) < 5e-3);
  CHECK(max_err < 0.08);
}

TEST_CASE("surface distance finds the outermost crossing") {
  MetaballShape s;
  s.control_points = {Vec3::Zero()};
  s.weights = {4.0};
  const auto d = particle_io::surface_distance(s, Vec3::Zero(), Vec3(1, 0, 0));
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(2.0).epsilon(1e-9));
  // From outside looking away: no crossing.
  CHECK_FALSE(particle_io::surface_distance(s, Vec3(5, 0, 0), Vec3(1, 0, 0)));
}

TEST_CASE("malformed files are rejected with location info") {
  CHECK_THROWS_WITH_AS(parse(""), "test: no particle records found", SimError);
  CHECK_THROWS_AS(parse("sphere -1\n"), SimError);
  CHECK_THROWS_AS(parse("sphere bogus\n"), SimError);
  CHECK_THROWS_AS(parse("2\n0 0 0 1\n"), SimError);        // truncated record
  CHECK_THROWS_AS(parse("1\n0 0 0 -2\n0.1\n"), SimError);  // negative weight
  CHECK_THROWS_AS(parse("1\n0 0 0 1\n-0.1\n"), SimError);  // negative R_s
  CHECK_THROWS_AS(parse("1.5\n0 0 0 1\n0.1\n"), SimError); // fractional count
  try {
    parse("1\n0 0 0 oops\n0.1\n");
    FAIL("expected SimError");
  } catch (const SimError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_SUITE_END();
