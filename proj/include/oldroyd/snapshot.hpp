#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "oldroyd/field.hpp"

namespace oldroyd {

// ASCII field snapshot.
//
//   line 1:  dim n1 [n2 [n3]] components t
//   then one line per node in row-major order (last axis fastest), holding
//   that node's components separated by spaces.
//
// n_i are cell counts per axis. Values and t are printed with 17 significant
// digits, so write followed by read reproduces every double bit for bit.
struct Snapshot {
    int dim = 0;
    std::array<int, 3> cells{0, 0, 0};
    int components = 0;
    double time = 0.0;
    // Node-major: values[node * components + c].
    std::vector<double> values;
};

void write_snapshot(std::ostream& os, const Field& field, double time);
void write_snapshot(const std::filesystem::path& path, const Field& field, double time);

Snapshot read_snapshot(std::istream& is);
Snapshot read_snapshot(const std::filesystem::path& path);

// Copies snapshot values into `field`; throws InvalidArgument on shape mismatch.
void load_snapshot(const Snapshot& snap, Field& field);

}  // namespace oldroyd
