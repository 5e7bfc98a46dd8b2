#include "fraclab/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

constexpr char kMagic[8] = {'F', 'R', 'A', 'C', 'S', 'N', 'A', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ConfigError("snapshot is truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw ConfigError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string snapshot_bytes(const HalfSpaceGrid& grid, const Field& field) {
  std::string out;
  out.reserve(96 + 8 * field.size());
  out.append(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::int32_t>(out, grid.d());
  put<std::int32_t>(out, grid.nx());
  put<std::int32_t>(out, grid.ny());
  put<double>(out, grid.L());
  put<double>(out, grid.Y());
  put<double>(out, grid.grading());
  put<double>(out, grid.params().s());
  put<std::int32_t>(out, grid.params().N());
  put<std::int32_t>(out, field.component());
  put<std::uint64_t>(out, field.size());
  for (double v : field.values()) put<double>(out, v);
  return out;
}

void write_snapshot(const std::filesystem::path& path, const HalfSpaceGrid& grid,
                    const Field& field) {
  write_file_atomic(path, snapshot_bytes(grid, field));
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open snapshot " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string in = ss.str();
  if (in.size() < sizeof kMagic || std::memcmp(in.data(), kMagic, sizeof kMagic) != 0) {
    throw ConfigError(path.string() + " is not a field snapshot");
  }
  std::size_t pos = sizeof kMagic;
  if (get<std::uint32_t>(in, pos) != kVersion) throw ConfigError("unsupported snapshot version");
  Snapshot snap;
  snap.grid.d = get<std::int32_t>(in, pos);
  snap.grid.nx = get<std::int32_t>(in, pos);
  snap.grid.ny = get<std::int32_t>(in, pos);
  snap.grid.L = get<double>(in, pos);
  snap.grid.Y = get<double>(in, pos);
  snap.grid.grading_p = get<double>(in, pos);
  snap.s = get<double>(in, pos);
  snap.N = get<std::int32_t>(in, pos);
  snap.component = get<std::int32_t>(in, pos);
  const auto count = get<std::uint64_t>(in, pos);
  if (in.size() - pos != count * sizeof(double)) throw ConfigError("snapshot payload size mismatch");
  snap.values.resize(count);
  std::memcpy(snap.values.data(), in.data() + pos, count * sizeof(double));
  return snap;
}

std::string field_csv(const HalfSpaceGrid& grid, const Field& field) {
  std::string out = grid.d() == 1 ? "x1,y,value\n" : "x1,x2,y,value\n";
  for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
    for (double c : grid.coords(n)) {
      out += format_double(c);
      out += ',';
    }
    out += format_double(field[n]);
    out += '\n';
  }
  return out;
}

}  // namespace fraclab
