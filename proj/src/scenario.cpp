#include "granusol/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>

#include "granusol/mesh.hpp"
#include "granusol/particle_io.hpp"
#include "granusol/rng.hpp"
#include "granusol/shape_metrics.hpp"

namespace granusol::scenario {

namespace {

/// Runs structural validation before any big allocation happens.
const config::SimulationConfig& checked(const config::SimulationConfig& cfg) {
  config::validate(cfg);
  return cfg;
}

Vec3 axis_unit(int axis) {
  Vec3 e = Vec3::Zero();
  e[axis] = 1.0;
  return e;
}

std::int64_t axis_cells(const GridDims& dims, int axis) {
  return axis == 0 ? dims.nx : axis == 1 ? dims.ny : dims.nz;
}

}  // namespace

World::World(const config::SimulationConfig& cfg)
    : cfg_(checked(cfg)),
      warnings_(config::validate(cfg_)),
      field_(cfg_.dims, cfg_.dx, cfg_.dt_lbm, cfg_.tau_lbm()) {
  const double vel_lat = cfg_.dt_lbm / cfg_.dx;
  bool driven_face = false;
  for (int a = 0; a < 3; ++a) {
    lbm::Face face;
    face.rule = cfg_.face_rules[a];
    if (face.rule == lbm::FaceRule::Velocity) {
      face.velocity = cfg_.wall_velocity * vel_lat;
      driven_face = driven_face || !face.velocity.isZero();
    }
    field_.set_face(a, 0, face);
    field_.set_face(a, 1, face);
    domain_.periodic[a] = face.rule == lbm::FaceRule::Periodic;
  }
  domain_.extent = cfg_.domain_extent();
  field_.set_body_accel(cfg_.body_accel * cfg_.dt_lbm * cfg_.dt_lbm / cfg_.dx);

  lattice_live_ = cfg_.imposed_velocity.isZero();
  field_.initialize(1.0, cfg_.imposed_velocity * vel_lat);

  n_sub_ = cfg_.dem_substeps();
  prepare_particles();
  if (!particles_.empty()) {
    coupler_.emplace(field_, particles_, cfg_.rho_f);
    coupler_->calibrate();
    coupler_->classify();
    loads_.assign(particles_.size(), {});
  }
  probes_ = solute::walker_probes(particles_);
  mask_ = solute::near_mask(particles_, cfg_.dims, cfg_.dx, domain_);

  if (cfg_.walkers > 0) {
    swarm_ = solute::initialize_band(cfg_.band, cfg_.walkers, cfg_.walker_mass,
                                     cfg_.diffusion, cfg_.seed, particles_,
                                     probes_, domain_, cfg_.grid_placement);
  } else {
    swarm_.walker_mass = cfg_.walker_mass;
    swarm_.diffusion = cfg_.diffusion;
    swarm_.seed = cfg_.seed;
  }

  // At rest with nothing driving it, the lattice sits on an exact collision
  // fixpoint: the momentum sums cancel pairwise (opposite directions are
  // adjacent in the table), so the cached velocity stays identically zero
  // and walkers cannot tell whether collide_stream ran.
  quiescent_possible_ = lattice_live_ && particles_.empty() &&
                        cfg_.body_accel.isZero() && !driven_face;
  quiescent_ = quiescent_possible_;

  series_.bin_width = cfg_.dx;
  series_.origin = 0.0;
  const double volume = domain_.extent.prod();
  series_.slab_volume =
      volume / static_cast<double>(axis_cells(cfg_.dims, cfg_.profile_axis));

  if (cfg_.forcing_amplitude != 0.0 && cfg_.forcing_direction.norm() > 0.0)
    report_dir_ = cfg_.forcing_direction.normalized();
  else if (cfg_.gravity.norm() > 0.0)
    report_dir_ = -cfg_.gravity.normalized();
  else
    report_dir_ = axis_unit(cfg_.profile_axis);
}

void World::prepare_particles() {
  if (cfg_.particle_file.empty()) return;
  const auto shapes = particle_io::load_particles(cfg_.particle_file);
  if (shapes.empty())
    throw SimError("scenario: particle file lists no shapes: " +
                   cfg_.particle_file);
  const int count = cfg_.particle_count > 0 ? cfg_.particle_count
                                            : static_cast<int>(shapes.size());

  struct Prep {
    MetaballShape shape;  // control points shifted so the origin is the COM
    double mass = 0.0;
    double volume = 0.0;
    Mat3 inertia = Mat3::Identity();
  };
  std::vector<Prep> preps(shapes.size());
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    MetaballShape shape = shapes[s];
    const TriMesh m = shape::surface_mesh(shape);
    const auto props = mesh::mass_properties(m, cfg_.particle_density);
    for (auto& cp : shape.control_points) cp -= props.centroid;
    preps[s] = {shape, props.mass, props.volume, props.inertia};
    unique_shapes_.push_back(shape);
  }

  Aabb region = cfg_.particle_region;
  if ((region.hi - region.lo).minCoeff() <= 0.0)
    region = {Vec3::Zero(), domain_.extent};

  std::uint64_t attempt = 0;
  particles_.reserve(count);
  for (int i = 0; i < count; ++i) {
    const Prep& pr = preps[static_cast<std::size_t>(i) % preps.size()];
    const double rb = pr.shape.bounding_radius();

    Aabb box = region;
    for (int a = 0; a < 3; ++a) {
      if (domain_.periodic[a]) continue;
      // keep the bounding sphere off the walls
      box.lo[a] = std::max(box.lo[a], rb);
      box.hi[a] = std::min(box.hi[a], domain_.extent[a] - rb);
    }
    if ((box.hi - box.lo).minCoeff() < 0.0)
      throw SimError("scenario: placement region cannot hold particle " +
                     std::to_string(i));

    bool placed = false;
    for (int tries = 0; tries < 100000 && !placed; ++tries) {
      RandomStream rng(cfg_.seed, rng_tag::kPlacement, attempt++);
      const Vec3 c = rng.in_box(box);
      Quat q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
      if (q.norm() < 1e-12) continue;
      q.normalize();

      bool clash = false;
      for (const auto& other : particles_) {
        Vec3 d = c - other.pose.translation;
        for (int a = 0; a < 3; ++a)
          if (domain_.periodic[a])
            d[a] -= domain_.extent[a] *
                    std::round(d[a] / domain_.extent[a]);
        if (d.norm() < rb + other.bounding_radius()) {
          clash = true;
          break;
        }
      }
      if (clash) continue;

      RigidParticle p;
      p.shape = pr.shape;
      p.pose.translation = c;
      p.pose.orientation = q;
      p.mass = pr.mass;
      p.inertia_body = pr.inertia;
      p.id = i;
      p.validate();
      particles_.push_back(std::move(p));
      volumes_.push_back(pr.volume);
      placed = true;
    }
    if (!placed)
      throw SimError("scenario: no non-overlapping spot for particle " +
                     std::to_string(i) + " after 100000 tries");
  }

  double total_volume = 0.0;
  double radius_sum = 0.0;
  for (double v : volumes_) {
    total_volume += v;
    radius_sum += std::cbrt(3.0 * v / (4.0 * std::numbers::pi));
  }
  phi_solid_ = total_volume / domain_.extent.prod();
  radius_rep_ = radius_sum / static_cast<double>(volumes_.size());

  for (int a = 0; a < 3; ++a) {
    if (domain_.periodic[a]) continue;
    WallPlane lo, hi;
    lo.point = Vec3::Zero();
    lo.normal = axis_unit(a);
    hi.point = domain_.extent[a] * axis_unit(a);
    hi.normal = -axis_unit(a);
    walls_.push_back(lo);
    walls_.push_back(hi);
  }

  // Spring-dashpot constants sized to the lightest body: contacts resolve
  // over ~20 DEM sub-steps with mild restitution, sliding bound 0.5.
  double m_min = particles_.front().mass;
  for (const auto& p : particles_) m_min = std::min(m_min, p.mass);
  const double m_eff = 0.5 * m_min;
  const double t_contact = 20.0 * cfg_.dt_dem;
  const double pi = std::numbers::pi;
  material_.k_n = m_eff * (pi / t_contact) * (pi / t_contact);
  const double loge = std::log(0.3);
  const double gamma = -loge / std::sqrt(pi * pi + loge * loge);
  material_.eta_n = 2.0 * gamma * std::sqrt(m_eff * material_.k_n);
  material_.k_t = 0.5 * material_.k_n;
  material_.eta_t = 0.5 * material_.eta_n;
  material_.mu_s = 0.5;
}

void World::step() {
  const char* stage = "start";
  try {
    stage = "classify";
    if (coupler_) {
      coupler_->classify();
      trace(stage);
    }
    stage = "collide";
    if (lattice_live_ && !quiescent_) {
      field_.collide_stream();
      trace(stage);
    }
    stage = "ibb";
    if (coupler_) {
      coupler_->apply_boundaries();
      trace(stage);
    }
    stage = "mem";
    if (coupler_) {
      loads_ = coupler_->exchange_momentum();
      trace(stage);
    }
    stage = "dem";
    if (!particles_.empty()) {
      dem_stage();
      trace(stage);
    }
    stage = "refill";
    if (coupler_) {
      coupler_->classify();
      coupler_->refill();
      trace(stage);
    }
    stage = "walkers";
    if (swarm_.alive() > 0) {
      walker_stage();
      trace(stage);
    }
  } catch (const SimError& e) {
    throw SimError("step " + std::to_string(step_) + ", stage " + stage +
                   ": " + e.what());
  }
  ++step_;
}

void World::dem_stage() {
  const double dt = cfg_.dt_dem;
  const Vec3 dir = cfg_.forcing_direction.norm() > 0.0
                       ? Vec3(cfg_.forcing_direction.normalized())
                       : Vec3::Zero();
  dem::ContactStats cstats;

  for (int s = 0; s < n_sub_; ++s) {
    for (std::size_t i = 0; i < particles_.size(); ++i) {
      for (std::size_t j = i + 1; j < particles_.size(); ++j) {
        auto& a = particles_[i];
        auto& b = particles_[j];
        Vec3 shift = Vec3::Zero();
        Vec3 d = a.pose.translation - b.pose.translation;
        for (int ax = 0; ax < 3; ++ax)
          if (domain_.periodic[ax])
            shift[ax] = domain_.extent[ax] *
                        std::round(d[ax] / domain_.extent[ax]);
        if ((d - shift).norm() >= a.bounding_radius() + b.bounding_radius())
          continue;

        const RigidParticle* bp = &b;
        RigidParticle b_image;
        if (!shift.isZero()) {
          b_image = b;
          b_image.pose.translation += shift;
          bp = &b_image;
        }
        const auto contact = dem::find_contact(a, *bp, &cstats);
        if (!contact) continue;
        Vec3& xi = springs_.pair(a.id, b.id);
        const auto pf = dem::contact_force(*contact, a, *bp, material_, dt, xi);
        a.force += pf.force_a;
        a.torque += pf.torque_a;
        b.force += pf.force_b;
        b.torque += pf.torque_b;  // torque is about b's own centroid
      }
    }

    for (std::size_t w = 0; w < walls_.size(); ++w) {
      for (auto& p : particles_) {
        const double gap =
            (p.pose.translation - walls_[w].point).dot(walls_[w].normal);
        if (gap >= p.bounding_radius()) continue;
        const auto contact = dem::find_contact_wall(p, walls_[w], &cstats);
        if (!contact) continue;
        Vec3& xi = springs_.wall(p.id, static_cast<int>(w));
        const auto pf =
            dem::contact_force_wall(*contact, p, material_, dt, xi);
        p.force += pf.force_a;
        p.torque += pf.torque_a;
      }
    }
    springs_.sweep();

    const double t_sub = static_cast<double>(step_) * n_sub_ + s;
    const double drive =
        cfg_.forcing_amplitude *
        std::cos(2.0 * std::numbers::pi * t_sub / cfg_.forcing_period);
    for (std::size_t i = 0; i < particles_.size(); ++i) {
      auto& p = particles_[i];
      // hydrodynamic load held constant across the sub-steps of one LBM step
      p.force += loads_[i].force;
      p.torque += loads_[i].torque;
      // the lattice carries no hydrostatic gradient, so buoyancy is explicit
      p.force -= cfg_.rho_f * volumes_[i] * cfg_.gravity;
      p.force += p.mass * drive * dir;
    }
    dem::integrate(std::span(particles_), cfg_.gravity, dt);
  }

  for (auto& p : particles_)
    for (int a = 0; a < 3; ++a)
      if (domain_.periodic[a]) {
        double& t = p.pose.translation[a];
        t -= domain_.extent[a] * std::floor(t / domain_.extent[a]);
      }
}

void World::walker_stage() {
  if (!particles_.empty())
    mask_ = solute::near_mask(particles_, cfg_.dims, cfg_.dx, domain_);
  const solute::VelocitySampler sampler(
      field_, coupler_ ? &*coupler_ : nullptr,
      particles_.empty() ? nullptr : &particles_);
  solute::step_walkers(swarm_, sampler, cfg_.dt_solute, step_, proposals_);
  walker_stats_ = solute::classify_and_resolve(
      swarm_, proposals_, particles_, probes_, mask_, cfg_.dims, cfg_.dx,
      domain_, cfg_.dt_solute, step_);
}

Vec3 World::mean_fluid_velocity() const {
  Vec3 sum = Vec3::Zero();
  std::int64_t n = 0;
  const std::int64_t cells = field_.cells();
  for (std::int64_t c = 0; c < cells; ++c) {
    if (field_.kind(c) == lbm::NodeKind::Solid) continue;
    sum += field_.physical_u_at(c);
    ++n;
  }
  if (n == 0) return Vec3::Zero();
  return sum / static_cast<double>(n) * (cfg_.dx / cfg_.dt_lbm);
}

Vec3 World::mean_particle_velocity() const {
  if (particles_.empty()) return Vec3::Zero();
  Vec3 sum = Vec3::Zero();
  double vol = 0.0;
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    sum += volumes_[i] * particles_[i].velocity;
    vol += volumes_[i];
  }
  return sum / vol;
}

std::int64_t World::exterior_violations() const {
  std::int64_t bad = 0;
  for (const Vec3& x : swarm_.positions) {
    for (std::size_t i = 0; i < probes_.size(); ++i) {
      Vec3 nx = x;
      const Vec3& c = particles_[i].pose.translation;
      for (int a = 0; a < 3; ++a)
        if (domain_.periodic[a])
          nx[a] -= domain_.extent[a] *
                   std::round((nx[a] - c[a]) / domain_.extent[a]);
      if ((nx - c).norm() > probes_[i].bounding_radius()) continue;
      if (metaball::evaluate(probes_[i], particles_[i].pose, nx) >
          probes_[i].iso_value + 1e-3)
        ++bad;
    }
  }
  return bad;
}

void World::record_sample() {
  const auto conc = solute::deposit(swarm_, cfg_.dims, cfg_.dx);
  series_.times.push_back(time());
  series_.profiles.push_back(solute::axis_profile(conc, cfg_.profile_axis));
  log_.times.push_back(time());
  log_.mean_u.push_back(mean_fluid_velocity().dot(report_dir_));
  log_.mean_up.push_back(mean_particle_velocity().dot(report_dir_));
  log_.walker_count.push_back(static_cast<double>(swarm_.alive()));
  log_.fluid_mass.push_back(field_.total_mass());
  trace("deposit");
}

void World::run(bool write_outputs) {
  const auto cadence = static_cast<std::uint64_t>(cfg_.cadence);
  if (step_ == 0) record_sample();
  if (cfg_.write_fields && step_ == 0) write_field_dump();
  while (step_ < static_cast<std::uint64_t>(cfg_.steps)) {
    step();
    if (step_ % cadence == 0) {
      record_sample();
      if (cfg_.write_fields) write_field_dump();
    }
    if (cfg_.checkpoint_every > 0 &&
        step_ % static_cast<std::uint64_t>(cfg_.checkpoint_every) == 0) {
      std::filesystem::create_directories(cfg_.output_dir);
      output::write_checkpoint(cfg_.output_dir + "/checkpoint_" +
                                   std::to_string(step_) + ".ck",
                               make_checkpoint());
    }
  }
  if (write_outputs) write_run_outputs();
}

void World::write_run_outputs() {
  namespace fs = std::filesystem;
  fs::create_directories(cfg_.output_dir);

  analysis::fit_series(series_);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < series_.times.size(); ++i) {
    rows.push_back({series_.times[i], series_.means[i], series_.variances[i],
                    series_.mass(i), log_.mean_u[i], log_.mean_up[i],
                    log_.walker_count[i], log_.fluid_mass[i]});
  }
  output::write_csv(cfg_.output_dir + "/series.csv",
                    {"time", "mean", "variance", "mass", "mean_u", "mean_up",
                     "walkers", "fluid_mass"},
                    rows);

  const double mu_phys = cfg_.mu > 0.0
                             ? cfg_.mu
                             : cfg_.rho_f * (cfg_.tau_lbm() - 0.5) / 3.0 *
                                   cfg_.dx * cfg_.dx / cfg_.dt_lbm;
  const double slip =
      analysis::slip_velocity(log_.mean_u, log_.mean_up);
  std::ofstream params(cfg_.output_dir + "/params.txt");
  if (!params)
    throw SimError("scenario: cannot write " + cfg_.output_dir +
                   "/params.txt");
  params << "R = " << radius_rep_ << "\n"
         << "phi_solid = " << phi_solid_ << "\n"
         << "U_slip = " << slip << "\n"
         << "diffusion = " << cfg_.diffusion << "\n"
         << "mu = " << mu_phys << "\n"
         << "rho = " << cfg_.rho_f << "\n"
         << "dx = " << cfg_.dx << "\n"
         << "dt = " << cfg_.dt_lbm << "\n"
         << "steps = " << cfg_.steps << "\n"
         << "axis = " << cfg_.profile_axis << "\n"
         << "seed = " << cfg_.seed << "\n";

  if (!unique_shapes_.empty()) {
    // Table-style shape descriptors in lattice units
    std::vector<std::vector<double>> feat_rows;
    for (std::size_t s = 0; s < unique_shapes_.size(); ++s) {
      const auto f = shape::compute(unique_shapes_[s]);
      feat_rows.push_back({static_cast<double>(s), f.sphericity,
                           f.circularity, f.diameter_ratio,
                           f.corey_shape_factor,
                           f.max_projected_area / (cfg_.dx * cfg_.dx)});
    }
    output::write_csv(cfg_.output_dir + "/features.csv",
                      {"shape", "phi", "C_c", "D_ns", "CSF", "A_m"},
                      feat_rows);
  }
}

void World::write_field_dump() {
  std::filesystem::create_directories(cfg_.output_dir);
  const std::int64_t n = field_.cells();
  const auto conc = solute::deposit(swarm_, cfg_.dims, cfg_.dx);
  std::vector<double> rho(n), c(n), kind(n);
  std::vector<Vec3> u(n);
  const double vel = cfg_.dx / cfg_.dt_lbm;
  for (std::int64_t i = 0; i < n; ++i) {
    rho[i] = field_.rho_at(i);
    u[i] = field_.physical_u_at(i) * vel;
    c[i] = conc.concentration(i);
    kind[i] = static_cast<double>(field_.kind(i));
  }
  output::write_vtk(
      cfg_.output_dir + "/fields_" + std::to_string(step_) + ".vtk",
      "granusol fields", cfg_.dims, cfg_.dx,
      {{"density", &rho}, {"concentration", &c}, {"node_kind", &kind}},
      {{"velocity", &u}});
}

output::Checkpoint World::make_checkpoint() const {
  output::Checkpoint ck;
  ck.step = step_;
  ck.seed = cfg_.seed;
  ck.dims = cfg_.dims;
  ck.dx = cfg_.dx;
  ck.dt = cfg_.dt_lbm;
  ck.tau = cfg_.tau_lbm();
  ck.body_accel = cfg_.body_accel;
  ck.populations = field_.buffer();
  ck.walker_mass = swarm_.walker_mass;
  ck.diffusion = swarm_.diffusion;
  ck.walkers = swarm_.positions;
  for (const auto& p : particles_)
    ck.particles.push_back({p.pose.translation, p.pose.orientation,
                            p.velocity, p.angular_velocity});
  for (const auto& e : springs_.entries()) ck.springs.push_back({e.key, e.value});
  return ck;
}

void World::restore(const output::Checkpoint& ck) {
  if (ck.dims.nx != cfg_.dims.nx || ck.dims.ny != cfg_.dims.ny ||
      ck.dims.nz != cfg_.dims.nz || ck.dx != cfg_.dx || ck.dt != cfg_.dt_lbm)
    throw SimError("scenario: checkpoint does not match the configuration");
  if (ck.populations.size() != field_.buffer().size())
    throw SimError("scenario: checkpoint population size mismatch");
  if (ck.particles.size() != particles_.size())
    throw SimError("scenario: checkpoint particle count mismatch");

  step_ = ck.step;
  field_.buffer() = ck.populations;
  field_.refresh_moment_cache();
  swarm_.positions = ck.walkers;
  swarm_.walker_mass = ck.walker_mass;
  swarm_.diffusion = ck.diffusion;
  swarm_.seed = ck.seed;

  for (std::size_t i = 0; i < particles_.size(); ++i) {
    auto& p = particles_[i];
    p.pose.translation = ck.particles[i].translation;
    p.pose.orientation = ck.particles[i].orientation;
    p.velocity = ck.particles[i].velocity;
    p.angular_velocity = ck.particles[i].angular_velocity;
    p.force = Vec3::Zero();
    p.torque = Vec3::Zero();
  }
  std::vector<dem::SpringLedger::Entry> entries;
  for (const auto& s : ck.springs) entries.push_back({s.key, s.value});
  springs_ = dem::SpringLedger();
  springs_.restore(entries);

  if (!particles_.empty()) {
    // A fresh coupler sees the restored poses as initial coverage, so no
    // node is flagged as uncovered and the next refill stage starts clean.
    coupler_.emplace(field_, particles_, cfg_.rho_f);
    coupler_->calibrate();
    coupler_->classify();
    loads_.assign(particles_.size(), {});
  }
  probes_ = solute::walker_probes(particles_);
  mask_ = solute::near_mask(particles_, cfg_.dims, cfg_.dx, domain_);
}

config::SimulationConfig scenario_diffusion(long walkers) {
  config::SimulationConfig c;
  c.dims = {100, 100, 100};
  c.dx = 1e-3;
  c.dt_lbm = 2e-4;
  c.dt_dem = 2e-6;
  c.dt_solute = 2e-4;
  c.steps = 500;
  c.tau = 0.8;
  c.rho_f = 1000.0;
  c.diffusion = 1e-3;
  c.walkers = walkers;
  c.walker_mass = 1.0 / static_cast<double>(walkers);
  c.band = {Vec3(0.05, 0.05, 0.05), Vec3(0.05, 0.05, 0.05)};
  c.cadence = 50;
  c.profile_axis = 0;
  c.output_dir = "out_diffusion";
  return c;
}

config::SimulationConfig scenario_advection(long walkers) {
  auto c = scenario_diffusion(walkers);
  c.imposed_velocity = Vec3(1.0, 0.0, 0.0);
  c.output_dir = "out_advection";
  return c;
}

config::SimulationConfig scenario_settling(const std::string& particle_file) {
  config::SimulationConfig c;
  c.dims = {40, 40, 150};
  c.dx = 1e-3;
  c.face_rules = {lbm::FaceRule::Wall, lbm::FaceRule::Wall,
                  lbm::FaceRule::Wall};
  c.dt_lbm = 5e-4;
  c.dt_dem = 5e-6;
  c.dt_solute = 5e-4;
  c.steps = 4000;
  c.rho_f = 1000.0;
  c.mu = 0.05;
  c.expected_max_velocity = 0.06;
  c.diffusion = 2e-9;
  c.walkers = 200000;
  c.walker_mass = 1e-4;
  c.band = {Vec3(0.0, 0.0, 0.0), Vec3(0.04, 0.04, 0.03)};
  c.particle_file = particle_file;
  c.particle_count = 1;
  c.particle_region = {Vec3(0.017, 0.017, 0.052), Vec3(0.023, 0.023, 0.058)};
  c.particle_density = 1050.0;
  c.gravity = Vec3(0.0, 0.0, -9.81);
  c.cadence = 50;
  c.profile_axis = 2;
  c.output_dir = "out_settling";
  return c;
}

config::SimulationConfig scenario_oscillator(const std::string& particle_file,
                                             bool reduced) {
  config::SimulationConfig c;
  c.dims = reduced ? GridDims{60, 60, 90} : GridDims{120, 120, 180};
  c.dx = 1e-3;
  c.dt_lbm = 2e-4;
  c.dt_dem = 2e-6;
  c.dt_solute = 2e-4;
  c.steps = 2000;
  c.rho_f = 1000.0;
  c.tau = 0.6;
  c.expected_max_velocity = 0.15;
  c.diffusion = 2e-9;
  c.walkers = 2000000;
  c.walker_mass = 0.000125;
  const double lz = c.dims.nz * c.dx;
  const Vec3 hi(c.dims.nx * c.dx, c.dims.ny * c.dx, 0.5 * (lz + 5e-3));
  c.band = {Vec3(0.0, 0.0, 0.5 * (lz - 5e-3)), hi};
  c.particle_file = particle_file;
  c.particle_count = 50;
  c.particle_density = 1100.0;
  c.forcing_amplitude = 4.0;
  c.forcing_period = 100000.0;  // DEM sub-steps, one cycle per 0.2 s
  c.forcing_direction = Vec3::UnitX();
  c.cadence = 50;
  c.profile_axis = 2;
  c.output_dir = "out_oscillator";
  return c;
}

}  // namespace granusol::scenario
