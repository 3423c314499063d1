#pragma once

// Run configuration. The text form is a flat list of `key = value` lines;
// blank lines and anything after `#` are ignored. Lists are comma-separated,
// ranges use `lo:hi` (or `lo:hi:count` for log-spaced grids).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "chartbench/dmap.hpp"
#include "chartbench/types.hpp"

namespace chartbench {

struct LogGrid {
  double lo = 1e-6;
  double hi = 1e4;
  int count = 25;

  static LogGrid parse(const std::string& text);
  std::string to_string() const;
  std::vector<double> values() const;
};

struct RunConfig {
  // dataset
  Index n = 2000;
  double width = 60.0;
  double height = 10.0;
  double inner_radius = 1.0;
  double growth = 0.5;
  std::uint64_t seed = 7;

  // methods
  BetaRule beta;
  double alpha = 0.0;
  int isomap_k = 10;
  int umap_k = 15;
  int umap_epochs = 200;
  std::uint64_t umap_seed = 7;
  std::optional<double> ridge;

  // scan and figures
  std::vector<Index> dims;
  std::vector<Method> methods{Method::dmap, Method::isomap, Method::umap};
  std::vector<Index> recon_dims{2, 4, 8, 1024};
  Index pair_base = 0;
  Index pair_first = 1;
  Index pair_last = 10;
  int novelty_window = 20;
  LogGrid beta_grid;
  double tau = 1e-3;

  // execution
  std::filesystem::path out_dir = "out";
  bool plots = true;
  int threads = 0;  // 0: hardware concurrency

  RunConfig();

  /// Sets one key from its text value; throws InvalidArgument on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  /// Flat key = value text accepted by parse_config_text.
  std::string to_text() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& json);
};

RunConfig parse_config_text(const std::string& text);

/// Reads a flat config file, or a manifest.json written by a previous run.
RunConfig load_config(const std::filesystem::path& path);

std::vector<Index> parse_index_list(const std::string& text);
std::pair<Index, Index> parse_index_range(const std::string& text);
std::vector<Method> parse_method_list(const std::string& text);

}  // namespace chartbench
