#include "granusol/lbm.hpp"

#include <cmath>

#include "doctest.h"
#include "granusol/rng.hpp"

using namespace granusol;

TEST_SUITE_BEGIN("lbm");

TEST_CASE("velocity set identities") {
  double wsum = 0.0;
  Vec3 wev = Vec3::Zero();
  Mat3 second = Mat3::Zero();
  for (int i = 0; i < lbm::kQ; ++i) {
    wsum += lbm::kW[i];
    wev += lbm::kW[i] * lbm::evec(i);
    second += lbm::kW[i] * lbm::evec(i) * lbm::evec(i).transpose();
  }
  // The rational identity is exact: numerators over a common 36 sum to 36.
  int numerators = 0;
  for (int i = 0; i < lbm::kQ; ++i)
    numerators += static_cast<int>(std::round(lbm::kW[i] * 36.0));
  CHECK(numerators == 36);
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(wev.norm() == 0.0);
  // Second moment isotropy: sum w e e^T = c_s^2 I.
  CHECK((second - lbm::kCs2 * Mat3::Identity()).norm() < 1e-15);

  for (int i = 0; i < lbm::kQ; ++i) {
    CHECK((lbm::evec(lbm::kOpp[i]) + lbm::evec(i)).norm() == 0.0);
    CHECK(lbm::kW[lbm::kOpp[i]] == lbm::kW[i]);
  }
}

TEST_CASE("equilibrium moments") {
  auto rest = lbm::equilibrium(1.0, Vec3::Zero());
  for (int i = 0; i < lbm::kQ; ++i) CHECK(rest[i] == lbm::kW[i]);

  RandomStream rng(3, 0, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const double rho = 0.5 + rng.uniform() * 2.0;
    const Vec3 u = 0.1 * rng.normal3();
    const auto g = lbm::equilibrium(rho, u);
    double s = 0.0;
    Vec3 m = Vec3::Zero();
    for (int i = 0; i < lbm::kQ; ++i) {
      s += g[i];
      m += g[i] * lbm::evec(i);
    }
    CHECK(std::abs(s - rho) < 1e-14 * rho);
    CHECK((m - rho * u).norm() < 1e-13 * std::max(1.0, (rho * u).norm()));
  }

  auto two = lbm::equilibrium(2.0, Vec3(0.05, 0, 0));
  const auto mm = lbm::moments(two.data());
  CHECK(mm.rho == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(mm.u.x() == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(std::abs(mm.u.y()) < 1e-16);
}

TEST_CASE("moments match a direct summation oracle bit for bit") {
  RandomStream rng(4, 0, 0, 0);
  for (int trial = 0; trial < 20; ++trial) {
    double g[lbm::kQ];
    for (double& v : g) v = rng.uniform() + 1e-3;
    const auto m = lbm::moments(g);
    double rho = 0.0, mx = 0.0, my = 0.0, mz = 0.0;
    for (int i = 0; i < lbm::kQ; ++i) {
      rho += g[i];
      mx += g[i] * lbm::kE[i][0];
      my += g[i] * lbm::kE[i][1];
      mz += g[i] * lbm::kE[i][2];
    }
    CHECK(m.rho == rho);
    CHECK(m.u.x() == mx / rho);
    CHECK(m.u.y() == my / rho);
    CHECK(m.u.z() == mz / rho);
  }
}

TEST_CASE("uniform equilibrium is a fixed point of the periodic step") {
  lbm::LatticeField f({8, 6, 5}, 1.0, 1.0, 0.8);
  f.initialize(1.0, Vec3::Zero());
  f.collide_stream();
  for (std::int64_t c = 0; c < f.cells(); ++c)
    for (int q = 0; q < lbm::kQ; ++q)
      CHECK(f.cell(c)[q] == doctest::Approx(lbm::kW[q]).epsilon(1e-15));
}

TEST_CASE("advected uniform equilibrium stays equilibrium (Galilean)") {
  lbm::LatticeField f({10, 8, 6}, 1.0, 1.0, 0.7);
  const Vec3 u0(0.08, -0.03, 0.05);
  f.initialize(1.0, u0);
  const auto geq = lbm::equilibrium(1.0, u0);
  for (int n = 0; n < 20; ++n) f.collide_stream();
  for (std::int64_t c = 0; c < f.cells(); ++c)
    for (int q = 0; q < lbm::kQ; ++q)
      CHECK(std::abs(f.cell(c)[q] - geq[q]) < 20 * 1e-12);
}

TEST_CASE("mass is conserved in periodic and walled boxes") {
  RandomStream rng(11, 0, 0, 0);
  for (bool walls : {false, true}) {
    lbm::LatticeField f({12, 10, 9}, 1.0, 1.0, 0.9);
    if (walls) {
      f.set_face(2, 0, {lbm::FaceRule::Wall, Vec3::Zero()});
      f.set_face(2, 1, {lbm::FaceRule::Wall, Vec3::Zero()});
    }
    f.initialize(1.0, Vec3::Zero());
    // Random perturbation, then let it slosh.
    for (std::int64_t c = 0; c < f.cells(); ++c)
      for (int q = 0; q < lbm::kQ; ++q)
        f.cell(c)[q] *= 1.0 + 0.1 * (rng.uniform() - 0.5);
    const double m0 = f.total_mass();
    for (int n = 0; n < 200; ++n) f.collide_stream();
    CHECK(std::abs(f.total_mass() - m0) < 1e-10 * m0);
  }
}

TEST_CASE("cached moments match the pre-stream buffer exactly") {
  lbm::LatticeField f({9, 7, 6}, 1.0, 1.0, 0.8);
  f.initialize(1.0, Vec3::Zero());
  RandomStream rng(12, 0, 0, 0);
  for (std::int64_t c = 0; c < f.cells(); ++c)
    for (int q = 0; q < lbm::kQ; ++q)
      f.cell(c)[q] *= 1.0 + 0.05 * (rng.uniform() - 0.5);
  f.collide_stream();
  for (std::int64_t c = 0; c < f.cells(); c += 7) {
    const auto m = lbm::moments(f.prev_cell(c));
    CHECK(std::abs(m.rho - f.rho_at(c)) < 1e-12);
    CHECK((m.u - f.u_at(c)).norm() < 1e-12);
  }
}

TEST_CASE("blow-up aborts with the offending cell named") {
  lbm::LatticeField f({4, 4, 4}, 1.0, 1.0, 0.8);
  f.initialize(1.0, Vec3::Zero());
  for (int q = 0; q < lbm::kQ; ++q) f.cell(f.dims().flat(2, 1, 3))[q] = -1.0;
  try {
    f.collide_stream();
    FAIL("expected SimError");
  } catch (const SimError& e) {
    CHECK(std::string(e.what()).find("(2, 1, 3)") != std::string::npos);
  }
}

TEST_CASE("shear wave decays at the BGK viscosity") {
  const int nx = 48;
  const double tau = 0.8;
  lbm::LatticeField f({nx, 4, 4}, 1.0, 1.0, tau);
  f.initialize(1.0, Vec3::Zero());
  const double kwave = 2.0 * M_PI / nx;
  const double amp0 = 0.01;
  for (std::int64_t c = 0; c < f.cells(); ++c) {
    const Vec3i ijk = f.dims().unflat(c);
    const Vec3 u(0.0, amp0 * std::sin(kwave * ijk.x()), 0.0);
    const auto geq = lbm::equilibrium(1.0, u);
    for (int q = 0; q < lbm::kQ; ++q) f.cell(c)[q] = geq[q];
  }
  auto amplitude = [&] {
    double s = 0.0;
    for (int i = 0; i < nx; ++i) {
      const auto m = lbm::moments(f.cell(f.dims().flat(i, 1, 1)));
      s += m.u.y() * std::sin(kwave * i);
    }
    return 2.0 * s / nx;
  };
  const int steps = 400;
  const double a_begin = amplitude();
  for (int n = 0; n < steps; ++n) f.collide_stream();
  const double a_end = amplitude();
  const double nu_measured = std::log(a_begin / a_end) / (kwave * kwave * steps);
  CHECK(nu_measured ==
        doctest::Approx(lbm::kCs2 * (tau - 0.5)).epsilon(0.02));
}

TEST_CASE("body-forced Poiseuille channel matches the parabola") {
  const int nz = 16;
  const double tau = 0.9;
  lbm::LatticeField f({6, 4, nz}, 1.0, 1.0, tau);
  f.set_face(2, 0, {lbm::FaceRule::Wall, Vec3::Zero()});
  f.set_face(2, 1, {lbm::FaceRule::Wall, Vec3::Zero()});
  const double a = 1e-6;
  f.set_body_accel(Vec3(a, 0, 0));
  f.initialize(1.0, Vec3::Zero());
  for (int n = 0; n < 12000; ++n) f.collide_stream();

  const double nu = lbm::kCs2 * (tau - 0.5);
  for (int k = 0; k < nz; ++k) {
    const double z = k + 0.5;  // walls at faces 0 and nz
    const double analytic = 0.5 * a / nu * z * (nz - z);
    const auto m = lbm::moments(f.cell(f.dims().flat(3, 2, k)));
    const double u_phys = m.u.x() + 0.5 * a;
    CHECK(u_phys == doctest::Approx(analytic).epsilon(0.01));
  }
}

TEST_CASE("moving-lid Couette develops the linear profile") {
  const int nz = 12;
  const double lid = 0.05;
  lbm::LatticeField f({4, 4, nz}, 1.0, 1.0, 0.8);
  f.set_face(2, 0, {lbm::FaceRule::Wall, Vec3::Zero()});
  f.set_face(2, 1, {lbm::FaceRule::Velocity, Vec3(lid, 0, 0)});
  f.initialize(1.0, Vec3::Zero());
  for (int n = 0; n < 8000; ++n) f.collide_stream();
  for (int k = 0; k < nz; ++k) {
    const double analytic = lid * (k + 0.5) / nz;
    const auto m = lbm::moments(f.cell(f.dims().flat(2, 2, k)));
    CHECK(m.u.x() == doctest::Approx(analytic).epsilon(0.01));
  }
}

TEST_CASE("solid cells are skipped but streamed into") {
  lbm::LatticeField f({6, 6, 6}, 1.0, 1.0, 0.8);
  f.initialize(1.0, Vec3::Zero());
  const std::int64_t solid = f.dims().flat(3, 3, 3);
  f.set_kind(solid, lbm::NodeKind::Solid);
  // Tag the solid cell's populations; they must not propagate anywhere.
  for (int q = 0; q < lbm::kQ; ++q) f.cell(solid)[q] = 99.0;
  f.collide_stream();
  // Neighbor fluid cells received only regular equilibrium values.
  for (std::int64_t c = 0; c < f.cells(); ++c) {
    if (c == solid) continue;
    for (int q = 0; q < lbm::kQ; ++q)
      CHECK(f.cell(c)[q] == doctest::Approx(lbm::kW[q]).epsilon(1e-14));
  }
  // The solid cell's slots hold the neighbors' streamed post-collision
  // values (what the coupling layer reads as incoming populations).
  for (int q = 1; q < lbm::kQ; ++q)
    CHECK(f.cell(solid)[q] == doctest::Approx(lbm::kW[q]).epsilon(1e-14));
}

TEST_SUITE_END();
