// snapshot.hpp
// Binary field snapshots. Layout, all little-endian:
//   magic "OKF1" | u32 version=1 | u32 dims | u32 nodes per axis
//   | f64 time | f64 values (row-major)

#pragma once

#include <string>
#include <vector>

#include "okflow/grid.hpp"

namespace okflow {

struct Snapshot {
    std::vector<int> nodes;
    double time = 0.0;
    std::vector<double> values;
};

void write_snapshot(const Field& field, double time, const std::string& path);

/// Throws std::runtime_error on a bad magic, version, or size mismatch.
Snapshot read_snapshot(const std::string& path);

/// Rebinds a snapshot to a grid, validating the node counts.
Field snapshot_to_field(const Snapshot& snap, GridPtr grid);

}  // namespace okflow
