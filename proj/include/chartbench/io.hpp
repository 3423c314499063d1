#pragma once

// CSV and JSON artifacts. Every CSV starts with a "# schema: chartbench.<kind>.v1"
// line, then a header row; floats are written with 17 significant digits.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "chartbench/diagnostics.hpp"
#include "chartbench/dmap.hpp"
#include "chartbench/readout.hpp"
#include "chartbench/synth.hpp"

namespace chartbench {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string format_double(double v);

struct CsvTable {
  std::string schema;  // e.g. "chartbench.scan.v1"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws SchemaError naming the column if absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(const fs::path& path);
void write_csv(const fs::path& path, const CsvTable& table);

/// Checks schema and required columns; throws SchemaError on mismatch or no data rows.
void require_schema(const CsvTable& table, const std::string& schema,
                    const std::vector<std::string>& columns);

Json read_json(const fs::path& path);
void write_json(const fs::path& path, const Json& json);

/// Sidecar manifest path for an artifact: "<path>.json".
fs::path sidecar(const fs::path& path);

// Dataset: columns s,h,x,y,z plus a sidecar with the generation parameters.
void write_dataset(const fs::path& path, const Dataset& ds);
Dataset read_dataset(const fs::path& path);

// Diffusion basis: first data row holds the eigenvalues, the remaining rows psi.
void write_basis(const fs::path& path, const DiffusionBasis<double>& basis, const Json& extra = {});
DiffusionBasis<double> read_basis(const fs::path& path);

void write_embedding(const fs::path& path, const Embedding& emb);

Json fit_to_json(const ReadoutFit& fit, Method method, Index d);
ReadoutFit fit_from_json(const Json& json);

void write_scan(const fs::path& path, const ScanTable& table);
ScanTable read_scan(const fs::path& path);

void write_rank(const fs::path& path, const RankReport& report);
RankReport read_rank(const fs::path& path);

void write_spectrum(const fs::path& path, const ReadoutSpectrum& spectrum);

/// Summary rows to `path`, per-pair scatter coordinates to `scatter_path`.
void write_pairs(const fs::path& path, const fs::path& scatter_path, const PairChartReport& report);
PairChartReport read_pairs(const fs::path& path, const fs::path& scatter_path);

}  // namespace chartbench
