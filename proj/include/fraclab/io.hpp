#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fraclab/extension_grid.hpp"

namespace fraclab {

/// Field snapshot: grid description plus nodal values.
struct Snapshot {
  GridConfig grid;
  double s = 0.5;
  int N = 1;
  int component = 0;
  std::vector<double> values;  // index (j * nx + i2) * nx + i1
};

/// Binary layout, little-endian:
///   char[8] "FRACSNAP", u32 version, i32 d, i32 nx, i32 ny, f64 L, f64 Y, f64 p,
///   f64 s, i32 N, i32 component, u64 count, f64 values[count]
std::string snapshot_bytes(const HalfSpaceGrid& grid, const Field& field);
void write_snapshot(const std::filesystem::path& path, const HalfSpaceGrid& grid,
                    const Field& field);
Snapshot read_snapshot(const std::filesystem::path& path);

/// CSV with header x1[,x2],y,value; intended for small grids.
std::string field_csv(const HalfSpaceGrid& grid, const Field& field);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace fraclab
