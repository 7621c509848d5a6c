#include "granusol/output.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace granusol::output {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw SimError("output: " + what);
}

constexpr std::uint32_t kCheckpointMagic = 0x4753434bu;  // "GSCK"
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw SimError("output: checkpoint truncated");
  return v;
}

void put_vec3(std::ostream& out, const Vec3& v) {
  put(out, v.x());
  put(out, v.y());
  put(out, v.z());
}

Vec3 get_vec3(std::istream& in) {
  Vec3 v;
  v.x() = get<double>(in);
  v.y() = get<double>(in);
  v.z() = get<double>(in);
  return v;
}

}  // namespace

void write_vtk(const std::string& path, const std::string& title,
               const GridDims& dims, double dx,
               const std::vector<VtkScalars>& scalars,
               const std::vector<VtkVectors>& vectors) {
  const std::int64_t n = dims.cells();
  for (const auto& s : scalars)
    require(s.values && static_cast<std::int64_t>(s.values->size()) == n,
            "vtk scalar array size mismatch: " + s.name);
  for (const auto& v : vectors)
    require(v.values && static_cast<std::int64_t>(v.values->size()) == n,
            "vtk vector array size mismatch: " + v.name);

  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot open " + path);
  out << "# vtk DataFile Version 3.0\n"
      << title << "\nASCII\nDATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << dims.nx << ' ' << dims.ny << ' ' << dims.nz << '\n'
      << "ORIGIN " << g17(0.5 * dx) << ' ' << g17(0.5 * dx) << ' '
      << g17(0.5 * dx) << '\n'
      << "SPACING " << g17(dx) << ' ' << g17(dx) << ' ' << g17(dx) << '\n'
      << "POINT_DATA " << n << '\n';
  for (const auto& s : scalars) {
    out << "SCALARS " << s.name << " double 1\nLOOKUP_TABLE default\n";
    for (std::int64_t c = 0; c < n; ++c) out << g17((*s.values)[c]) << '\n';
  }
  for (const auto& v : vectors) {
    out << "VECTORS " << v.name << " double\n";
    for (std::int64_t c = 0; c < n; ++c) {
      const Vec3& u = (*v.values)[c];
      out << g17(u.x()) << ' ' << g17(u.y()) << ' ' << g17(u.z()) << '\n';
    }
  }
  require(static_cast<bool>(out), "write failed for " + path);
}

void write_csv(const std::string& path,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot open " + path);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << columns[i] << (i + 1 < columns.size() ? ',' : '\n');
  for (const auto& row : rows) {
    require(row.size() == columns.size(), "csv row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << g17(row[i]) << (i + 1 < row.size() ? ',' : '\n');
  }
  require(static_cast<bool>(out), "write failed for " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path);
  CsvTable table;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty csv " + path);
  std::istringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      require(used == cell.size(), "csv cell is not a number: " + cell);
    }
    require(values.size() == table.columns.size(),
            "csv row width mismatch in " + path);
    table.rows.push_back(std::move(values));
  }
  return table;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] != name) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[i]);
    return out;
  }
  throw SimError("output: csv column not found: " + name);
}

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open " + path);
  put(out, kCheckpointMagic);
  put(out, kCheckpointVersion);
  put(out, ck.step);
  put(out, ck.seed);
  put(out, static_cast<std::int32_t>(ck.dims.nx));
  put(out, static_cast<std::int32_t>(ck.dims.ny));
  put(out, static_cast<std::int32_t>(ck.dims.nz));
  put(out, ck.dx);
  put(out, ck.dt);
  put(out, ck.tau);
  put_vec3(out, ck.body_accel);

  put(out, static_cast<std::uint64_t>(ck.populations.size()));
  out.write(reinterpret_cast<const char*>(ck.populations.data()),
            static_cast<std::streamsize>(ck.populations.size() *
                                         sizeof(double)));

  put(out, ck.walker_mass);
  put(out, ck.diffusion);
  put(out, static_cast<std::uint64_t>(ck.walkers.size()));
  for (const Vec3& w : ck.walkers) put_vec3(out, w);

  put(out, static_cast<std::uint64_t>(ck.particles.size()));
  for (const auto& p : ck.particles) {
    put_vec3(out, p.translation);
    put(out, p.orientation.w());
    put(out, p.orientation.x());
    put(out, p.orientation.y());
    put(out, p.orientation.z());
    put_vec3(out, p.velocity);
    put_vec3(out, p.angular_velocity);
  }

  put(out, static_cast<std::uint64_t>(ck.springs.size()));
  for (const auto& s : ck.springs) {
    put(out, s.key);
    put_vec3(out, s.value);
  }
  require(static_cast<bool>(out), "write failed for " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path);
  require(get<std::uint32_t>(in) == kCheckpointMagic,
          "not a checkpoint: " + path);
  require(get<std::uint32_t>(in) == kCheckpointVersion,
          "unsupported checkpoint version in " + path);

  Checkpoint ck;
  ck.step = get<std::uint64_t>(in);
  ck.seed = get<std::uint64_t>(in);
  ck.dims.nx = get<std::int32_t>(in);
  ck.dims.ny = get<std::int32_t>(in);
  ck.dims.nz = get<std::int32_t>(in);
  ck.dx = get<double>(in);
  ck.dt = get<double>(in);
  ck.tau = get<double>(in);
  ck.body_accel = get_vec3(in);

  ck.populations.resize(get<std::uint64_t>(in));
  in.read(reinterpret_cast<char*>(ck.populations.data()),
          static_cast<std::streamsize>(ck.populations.size() *
                                       sizeof(double)));
  require(static_cast<bool>(in), "checkpoint truncated in " + path);

  ck.walker_mass = get<double>(in);
  ck.diffusion = get<double>(in);
  ck.walkers.resize(get<std::uint64_t>(in));
  for (Vec3& w : ck.walkers) w = get_vec3(in);

  ck.particles.resize(get<std::uint64_t>(in));
  for (auto& p : ck.particles) {
    p.translation = get_vec3(in);
    p.orientation.w() = get<double>(in);
    p.orientation.x() = get<double>(in);
    p.orientation.y() = get<double>(in);
    p.orientation.z() = get<double>(in);
    p.velocity = get_vec3(in);
    p.angular_velocity = get_vec3(in);
  }

  ck.springs.resize(get<std::uint64_t>(in));
  for (auto& s : ck.springs) {
    s.key = get<std::uint64_t>(in);
    s.value = get_vec3(in);
  }
  return ck;
}

}  // namespace granusol::output
