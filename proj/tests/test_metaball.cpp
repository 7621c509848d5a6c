#include <doctest.h>

#include <cmath>
#include <optional>

#include "granusol/metaball.hpp"
#include "granusol/rng.hpp"

using namespace granusol;
using namespace granusol::metaball;

TEST_SUITE_BEGIN("metaball");

namespace {

MetaballShape unit_ball(double w = 1.0) {
  MetaballShape s;
  s.control_points = {Vec3::Zero()};
  s.weights = {w};
  return s;
}

MetaballShape random_blob(RandomStream& r, int lobes) {
  MetaballShape s;
  for (int i = 0; i < lobes; ++i) {
    s.control_points.push_back(r.in_ball(1.5));
    s.weights.push_back(r.uniform(0.5, 4.0));
  }
  return s;
}

Quat random_rotation(RandomStream& r) {
  Quat q(r.normal(), r.normal(), r.normal(), r.normal());
  q.normalize();
  return q;
}

// Independent crossing finder: dense march along the segment, refine the
// first sign-change bracket by bisection on the exact field.
std::optional<Vec3> marched_crossing(const MetaballShape& s, const Pose& pose,
                                     const Vec3& a, const Vec3& b) {
  const int n = 20000;
  double prev = evaluate(s, pose, a) - s.iso_value;
  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double cur = evaluate(s, pose, a + t * (b - a)) - s.iso_value;
    if (prev < 0.0 && cur >= 0.0) {
      double lo = static_cast<double>(i - 1) / n, hi = t;
      for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (evaluate(s, pose, a + mid * (b - a)) - s.iso_value < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      return a + 0.5 * (lo + hi) * (b - a);
    }
    prev = cur;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("field value and gradient at hand-checked points") {
  MetaballShape s = unit_ball();
  CHECK(evaluate_body(s, Vec3(1, 0, 0)) == doctest::Approx(1.0));
  CHECK(evaluate_body(s, Vec3(0.5, 0, 0)) == doctest::Approx(4.0));
  const Vec3 g = gradient_body(s, Vec3(1, 0, 0));
  CHECK(g.x() == doctest::Approx(-2.0));
  CHECK(g.y() == doctest::Approx(0.0));
  CHECK(g.z() == doctest::Approx(0.0));

  // Weight 4 puts the surface at radius 2.
  MetaballShape s4 = unit_ball(4.0);
  CHECK(evaluate_body(s4, Vec3(2, 0, 0)) == doctest::Approx(1.0));
  CHECK(evaluate_body(s4, Vec3(0, -2, 0)) == doctest::Approx(1.0));

  // Two equal lobes: field is the sum.
  MetaballShape two;
  two.control_points = {Vec3(-0.5, 0, 0), Vec3(0.5, 0, 0)};
  two.weights = {1.0, 1.0};
  CHECK(evaluate_body(two, Vec3::Zero()) == doctest::Approx(8.0));
}

TEST_CASE("sphere isosurface sits at sqrt(w) in every direction") {
  MetaballShape s = unit_ball(6.25);
  const double radius = 2.5;
  RandomStream r(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 dir = r.normal3().normalized();
    CHECK(evaluate_body(s, radius * dir) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches central differences on random blobs") {
  RandomStream r(12);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    MetaballShape s = random_blob(r, 1 + trial % 4);
    // Exterior-ish sample: keep away from control points where the field is
    // stiff and finite differences lose accuracy.
    Vec3 x;
    do {
      x = r.in_ball(4.0);
    } while (evaluate_body(s, x) > 20.0);
    const Vec3 g = gradient_body(s, x);
    for (int d = 0; d < 3; ++d) {
      Vec3 e = Vec3::Zero();
      e[d] = h;
      const double fd =
          (evaluate_body(s, x + e) - evaluate_body(s, x - e)) / (2.0 * h);
      CHECK(g[d] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("hessian matches finite differences of the gradient") {
  RandomStream r(13);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    MetaballShape s = random_blob(r, 2);
    Vec3 x;
    do {
      x = r.in_ball(3.0);
    } while (evaluate_body(s, x) > 10.0);
    const Mat3 hess = hessian_body(s, x);
    for (int d = 0; d < 3; ++d) {
      Vec3 e = Vec3::Zero();
      e[d] = h;
      const Vec3 fd = (gradient_body(s, x + e) - gradient_body(s, x - e)) /
                      (2.0 * h);
      for (int c = 0; c < 3; ++c)
        CHECK(hess(c, d) == doctest::Approx(fd[c]).epsilon(2e-5));
    }
    CHECK((hess - hess.transpose()).norm() < 1e-12 * hess.norm());
  }
}

TEST_CASE("field saturates on control points instead of overflowing") {
  MetaballShape s = unit_ball();
  CHECK(evaluate_body(s, Vec3::Zero()) == kSaturation);
  CHECK(std::isfinite(gradient_body(s, Vec3(kSingularEps / 4, 0, 0)).norm()));
}

TEST_CASE("world-frame evaluation is pose equivariant") {
  RandomStream r(14);
  for (int trial = 0; trial < 50; ++trial) {
    MetaballShape s = random_blob(r, 3);
    Pose pose;
    pose.translation = r.in_ball(5.0);
    pose.orientation = random_rotation(r);
    const Vec3 xb = r.in_ball(3.0);
    const Vec3 xw = pose.to_world(xb);
    CHECK(evaluate(s, pose, xw) ==
          doctest::Approx(evaluate_body(s, xb)).epsilon(1e-12));
    const Vec3 gw = gradient(s, pose, xw);
    const Vec3 gb = gradient_body(s, xb);
    CHECK((gw - pose.rotate_to_world(gb)).norm() < 1e-12 * (1.0 + gb.norm()));
  }
}

TEST_CASE("segment crossing agrees with the analytic sphere") {
  RandomStream r(15);
  Pose pose;  // identity
  for (int trial = 0; trial < 1000; ++trial) {
    const double w = r.uniform(0.25, 9.0);
    MetaballShape s = unit_ball(w);
    const double radius = std::sqrt(w);
    // Outside point aimed somewhere into the ball.
    const Vec3 a = (radius + r.uniform(0.5, 2.0)) * r.normal3().normalized();
    const Vec3 inside = r.in_ball(0.8 * radius);
    const auto hit = intersect_trajectory(s, pose, a, inside);
    REQUIRE(hit.has_value());
    // Analytic first crossing of |a + t d| = radius.
    const Vec3 d = inside - a;
    const double A = d.squaredNorm();
    const double B = 2.0 * a.dot(d);
    const double C = a.squaredNorm() - radius * radius;
    const double t = (-B - std::sqrt(B * B - 4 * A * C)) / (2 * A);
    const Vec3 expected = a + t * d;
    // |f - 1| < 1e-3 translates to ~ radius * 2.5e-4 positional slack.
    CHECK((*hit - expected).norm() < 1e-3 * radius);
  }
}

TEST_CASE("crossing respects the bracket on wiggly multi-lobe fields") {
  RandomStream r(16);
  Pose pose;
  int found = 0;
  for (int trial = 0; trial < 200; ++trial) {
    MetaballShape s = random_blob(r, 4);
    Vec3 a = r.in_ball(6.0);
    while (evaluate_body(s, a) >= 1.0) a = r.in_ball(8.0) + Vec3(6, 0, 0);
    Vec3 b = s.control_points[0] + r.in_ball(0.1);
    if (evaluate_body(s, b) <= 1.0) continue;
    const auto hit = intersect_trajectory(s, pose, a, b);
    REQUIRE(hit.has_value());
    ++found;
    CHECK(std::abs(evaluate(s, pose, *hit) - 1.0) < 1e-3);
    // The hit lies on the segment.
    const Vec3 d = b - a;
    const double t = (*hit - a).dot(d) / d.squaredNorm();
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
    CHECK(((a + t * d) - *hit).norm() < 1e-9 * d.norm());
    // And some genuine crossing exists nearby along the segment.
    const auto truth = marched_crossing(s, pose, a, b);
    REQUIRE(truth.has_value());
  }
  CHECK(found > 150);
}

TEST_CASE("crossing requires a straddling segment") {
  MetaballShape s = unit_ball(4.0);
  Pose pose;
  CHECK_FALSE(intersect_trajectory(s, pose, Vec3(3, 0, 0), Vec3(4, 0, 0)));
  CHECK_FALSE(intersect_trajectory(s, pose, Vec3(0.5, 0, 0), Vec3(1, 0, 0)));
}

TEST_CASE("radial reflection on a sphere reverses the path") {
  MetaballShape s = unit_ball(1.0);
  Pose pose;
  const Vec3 a(2.0, 0, 0);
  const Vec3 b(0.2, 0, 0);
  const auto hit = intersect_trajectory(s, pose, a, b);
  REQUIRE(hit.has_value());
  const auto refl = reflect_trajectory(s, pose, a, b, *hit);
  CHECK_FALSE(refl.degenerate);
  CHECK(refl.direction.x() == doctest::Approx(1.0));
  // Remainder length is preserved, endpoint walks back outward along +x.
  const double remainder = (b - *hit).norm();
  CHECK(refl.endpoint.x() == doctest::Approx(hit->x() + remainder));
}

TEST_CASE("reflection preserves direction norm and is involutive") {
  RandomStream r(17);
  Pose pose;
  for (int trial = 0; trial < 500; ++trial) {
    MetaballShape s = random_blob(r, 3);
    Vec3 a = r.in_ball(8.0);
    while (evaluate_body(s, a) >= 1.0) a = 1.5 * (a + Vec3(1, 1, 1));
    const Vec3 b = s.control_points[0];
    const auto hit = intersect_trajectory(s, pose, a, b);
    if (!hit) continue;
    const auto refl = reflect_trajectory(s, pose, a, b, *hit);
    if (refl.degenerate) continue;
    CHECK(refl.direction.norm() == doctest::Approx(1.0).epsilon(1e-10));
    // Reflecting the reflected direction about the same normal restores the
    // incident direction.
    const Vec3 g = gradient(s, pose, *hit);
    const Vec3 n = -g.normalized();
    const Vec3 back = refl.direction - 2.0 * refl.direction.dot(n) * n;
    const Vec3 t_i = (b - a).normalized();
    CHECK((back - t_i).norm() < 1e-10);
    // Endpoint distance from the hit equals the unreflected remainder.
    CHECK((refl.endpoint - *hit).norm() ==
          doctest::Approx((b - *hit).norm()).epsilon(1e-10));
  }
}

TEST_CASE("push to surface lands on the sphere radius") {
  MetaballShape s = unit_ball(2.25);  // radius 1.5
  Pose pose;
  RandomStream r(18);
  for (int trial = 0; trial < 200; ++trial) {
    Vec3 x = r.in_ball(1.2);
    if (x.norm() < 1e-3) continue;
    const auto out = push_to_surface(s, pose, x);
    REQUIRE(out.has_value());
    CHECK(std::abs(evaluate(s, pose, *out) - 1.0) < 1e-3);
    // Gradient flow from inside a ball is radial.
    CHECK((out->normalized() - x.normalized()).norm() < 1e-6);
  }
}

TEST_CASE("push to surface fails cleanly at a symmetric saddle") {
  MetaballShape s;
  s.control_points = {Vec3(-1, 0, 0), Vec3(1, 0, 0)};
  s.weights = {1.0, 1.0};
  Pose pose;
  // Exact midpoint: gradient cancels, no outward direction exists.
  CHECK_FALSE(push_to_surface(s, pose, Vec3::Zero()).has_value());
}

TEST_CASE("bounding radius encloses the dilated surface") {
  RandomStream r(19);
  for (int trial = 0; trial < 50; ++trial) {
    MetaballShape s = random_blob(r, 3);
    s.sphero_radius = r.uniform(0.0, 0.3);
    const double rb = s.bounding_radius();
    for (int k = 0; k < 100; ++k) {
      const Vec3 x = (rb + 1e-9) * r.normal3().normalized();
      CHECK(evaluate_body(s, x) <= s.iso_value + 1e-12);
    }
  }
}

TEST_CASE("shape validation rejects malformed input") {
  MetaballShape s;
  CHECK_THROWS_AS(s.validate(), SimError);
  s.control_points = {Vec3::Zero()};
  s.weights = {-1.0};
  CHECK_THROWS_AS(s.validate(), SimError);
  s.weights = {1.0};
  s.sphero_radius = -0.1;
  CHECK_THROWS_AS(s.validate(), SimError);
  s.sphero_radius = 0.1;
  CHECK_NOTHROW(s.validate());
}

TEST_SUITE_END();
