#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "topo/morse.hpp"
#include "topo/persistence.hpp"
#include "topo/solver.hpp"

namespace topo {

// Field files: a JSON sidecar header naming dims, dtype, layout and the
// raw little-endian value file. Read/write round-trips are bit-identical.
enum class FieldDType { F32, F64 };

struct FieldFileInfo {
  FieldDType dtype = FieldDType::F64;
  std::filesystem::path data_path;
};

std::pair<ScalarField, FieldFileInfo> read_field(const std::filesystem::path& header_path);
void write_field(const std::filesystem::path& header_path, const ScalarField& field,
                 FieldDType dtype = FieldDType::F64);

// Diagram CSV: header dim,birth,death,birthVertex,deathVertex,finite; one
// row per pair, sorted by (dim, birth, death); infinite generators carry
// the convention death value with finite=0.
void write_diagram_csv(const std::filesystem::path& path, const PersistenceDiagram& d);
PersistenceDiagram read_diagram_csv(const std::filesystem::path& path);

void write_report_json(const std::filesystem::path& path, const SolverReport& report);

void write_polylines_csv(const std::filesystem::path& path,
                         const std::vector<Filament>& filaments);
void write_histogram_json(const std::filesystem::path& path, const SkipHistogram& hist);

}  // namespace topo
