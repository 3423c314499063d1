#pragma once

// Minimal self-contained SVG rendering of the benchmark figures.

#include <filesystem>
#include <string>
#include <vector>

#include "chartbench/diagnostics.hpp"
#include "chartbench/readout.hpp"
#include "chartbench/types.hpp"

namespace chartbench {

struct ScatterPanel {
  std::string title;
  MatrixXd xy;     // N x 2
  VectorXd color;  // N values mapped onto a sequential palette
};

/// Log-log frob_sq against d, one series per method, one x tick per scanned d.
std::string svg_scan_plot(const ScanTable& table);

/// Panels laid out row-major, `columns` per row.
std::string svg_scatter_grid(const std::vector<ScatterPanel>& panels, int columns,
                             const std::string& title);

/// Mode-pair scatter grid; points colored by the sheet coordinate s.
std::string svg_pairs_plot(const PairChartReport& report);

/// |L(n, s)| and |L(n, h)| against 1 - lambda_n, log y axis.
std::string svg_spectrum_plot(const ReadoutSpectrum& spectrum);

/// Threshold, stable and entropy ranks against beta, log-log.
std::string svg_rank_plot(const RankReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace chartbench
