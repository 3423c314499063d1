#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "chartbench/config.hpp"
#include "chartbench/diagnostics.hpp"
#include "chartbench/errors.hpp"
#include "chartbench/io.hpp"
#include "chartbench/isomap.hpp"
#include "chartbench/linalg.hpp"
#include "chartbench/parallel.hpp"
#include "chartbench/pipeline.hpp"
#include "chartbench/readout.hpp"
#include "chartbench/svg.hpp"
#include "chartbench/umaplite.hpp"

namespace cb = chartbench;
namespace fs = std::filesystem;

namespace {

// Flags that map onto config keys; applied after the config file so they win.
struct Overrides {
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
  void apply(cb::RunConfig& config) const {
    for (const auto& [k, v] : values) config.set(k, v);
  }
};

struct Paths {
  std::string in, out, basis, fit, scatter, svg, fit_out;
};

fs::path or_default(const std::string& given, const cb::RunConfig& config, const std::string& name) {
  return given.empty() ? config.out_dir / name : fs::path(given);
}

fs::path with_suffix(const fs::path& path, const std::string& suffix, const std::string& ext) {
  fs::path out = path;
  out.replace_filename(path.stem().string() + suffix + ext);
  return out;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

cb::Dataset load_or_generate(const std::string& in, const cb::RunConfig& config) {
  return in.empty() ? cb::make_dataset(config) : cb::read_dataset(in);
}

int report_scan_failures(const cb::ScanTable& table) {
  int failed = 0;
  for (const auto& r : table.rows)
    if (!r.ok()) {
      ++failed;
      std::cerr << "chartbench: " << cb::to_string(r.method) << " d=" << r.d << " " << r.status << "\n";
    }
  if (failed == 0) return cb::exit_ok;
  if (auto it = table.resolved.find("isomap.components"); it != table.resolved.end()) {
    std::cerr << "chartbench: disconnected neighbor graph, components: " << it->second << "\n";
    return cb::exit_disconnected_graph;
  }
  return cb::exit_numerical_failure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chartbench: chart recovery benchmark for spectral manifold embeddings"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  Overrides global;
  app.add_option("--config", config_path, "flat key = value config file or a previous manifest.json");
  global.add(&app, "--threads", "threads", "worker threads (0: all cores)");
  global.add(&app, "--seed", "seed", "dataset seed");
  global.add(&app, "--out-dir", "out_dir", "output directory for default artifact paths");

  Paths paths;
  Overrides local;
  std::string method_name;
  std::optional<cb::Index> embed_d, kmax;
  std::string base_text, partners_text, neighbor_k;
  bool print_summary = true;

  auto* gen = app.add_subcommand("gen", "sample the Swiss roll dataset");
  gen->set_help_flag("--help", "print this help message and exit");
  local.add(gen, "--n", "n", "number of points");
  local.add(gen, "--w", "width", "sheet width W");
  local.add(gen, "--h", "height", "sheet height H");
  local.add(gen, "--a", "inner_radius", "spiral inner radius a");
  local.add(gen, "--b", "growth", "spiral growth b per radian");
  gen->add_option("--out", paths.out, "dataset CSV");

  auto* embed = app.add_subcommand("embed", "embed a dataset with one method");
  embed->add_option("--method", method_name, "dmap | isomap | umap")->required();
  embed->add_option("--in", paths.in, "dataset CSV (generated from the config if omitted)");
  embed->add_option("--out", paths.out, "basis CSV (dmap) or embedding CSV")->required();
  embed->add_option("--d", embed_d, "embedding dimension");
  embed->add_option("--kmax", kmax, "dmap: number of modes to keep, including the constant one");
  local.add(embed, "--beta", "beta", "dmap kernel scale: median:<c>, explicit:<beta> or a number");
  local.add(embed, "--alpha", "alpha", "dmap density normalization exponent");
  embed->add_option("--k", neighbor_k, "neighbor count (isomap, umap)");
  local.add(embed, "--epochs", "umap_epochs", "umap layout epochs");
  embed->add_option("--fit-out", paths.fit_out, "also write the oracle readout of (s, h) as JSON");

  auto* scan = app.add_subcommand("scan", "dimension scan across methods");
  scan->add_option("--in", paths.in, "dataset CSV (generated from the config if omitted)");
  scan->add_option("--out", paths.out, "scan CSV");
  local.add(scan, "--dims", "dims", "comma-separated dimensions");
  local.add(scan, "--methods", "methods", "comma-separated methods");
  local.add(scan, "--beta", "beta", "dmap kernel scale rule");
  local.add(scan, "--alpha", "alpha", "dmap density normalization exponent");
  local.add(scan, "--isomap-k", "isomap_k", "isomap neighbor count");
  local.add(scan, "--umap-k", "umap_k", "umap neighbor count");
  local.add(scan, "--epochs", "umap_epochs", "umap layout epochs");

  auto* spectra = app.add_subcommand("spectra", "readout coefficient magnitudes against 1 - lambda");
  spectra->add_option("--basis", paths.basis, "basis CSV")->required();
  spectra->add_option("--fit", paths.fit, "fit JSON from a dmap readout")->required();
  spectra->add_option("--out", paths.out, "spectra CSV");
  spectra->add_option("--svg", paths.svg, "also render the spectrum");

  auto* pairs = app.add_subcommand("pairs", "mode-pair charts scored by novelty and pair readout");
  pairs->add_option("--basis", paths.basis, "basis CSV")->required();
  pairs->add_option("--in", paths.in, "dataset CSV holding the (s, h) truth")->required();
  pairs->add_option("--base", base_text, "base mode (0 = first nontrivial)");
  pairs->add_option("--partners", partners_text, "partner range first:last");
  local.add(pairs, "--window", "novelty_window", "novelty regression window");
  pairs->add_option("--out", paths.out, "pairs CSV");
  pairs->add_option("--scatter-out", paths.scatter, "scatter CSV (default: <out>_scatter.csv)");
  pairs->add_option("--svg", paths.svg, "scatter grid SVG (default: <out>.svg)");

  auto* rank = app.add_subcommand("rank", "effective ranks across kernel scales");
  rank->add_option("--in", paths.in, "dataset CSV (generated from the config if omitted)");
  local.add(rank, "--beta-grid", "beta_grid", "lo:hi:count, log-spaced");
  local.add(rank, "--tau", "tau", "threshold-rank cutoff");
  rank->add_option("--out", paths.out, "rank CSV");
  rank->add_option("--svg", paths.svg, "also render the rank curves");

  auto* plot_scan = app.add_subcommand("plot-scan", "render scan.csv as a log-log SVG");
  plot_scan->add_option("--in", paths.in, "scan CSV")->required();
  plot_scan->add_option("--out", paths.out, "SVG")->required();

  auto* plot_pairs = app.add_subcommand("plot-pairs", "render pairs.csv as a scatter grid");
  plot_pairs->add_option("--in", paths.in, "pairs CSV")->required();
  plot_pairs->add_option("--scatter", paths.scatter, "scatter CSV (default: <in>_scatter.csv)");
  plot_pairs->add_option("--out", paths.out, "SVG")->required();

  auto* reproduce = app.add_subcommand("reproduce", "run every experiment into --out-dir");
  reproduce->add_flag("!--quiet", print_summary, "suppress the stage summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cb::exit_config_error;
  }

  try {
    cb::RunConfig config = config_path.empty() ? cb::RunConfig{} : cb::load_config(config_path);
    global.apply(config);
    local.apply(config);
    if (!neighbor_k.empty()) {
      config.set("isomap_k", neighbor_k);
      config.set("umap_k", neighbor_k);
    }
    config.validate();
    cb::set_num_threads(config.threads > 0 ? config.threads
                                           : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));

    if (gen->parsed()) {
      const fs::path out = or_default(paths.out, config, "dataset.csv");
      ensure_parent(out);
      cb::write_dataset(out, cb::make_dataset(config));
      return cb::exit_ok;
    }

    if (embed->parsed()) {
      const cb::Method method = cb::parse_method(method_name);
      const cb::Dataset ds = load_or_generate(paths.in, config);
      const fs::path out = paths.out;
      ensure_parent(out);
      std::optional<cb::ReadoutFit> fit;
      cb::Index d = embed_d.value_or(2);
      if (method == cb::Method::dmap) {
        const cb::Index k = std::min(kmax.value_or(embed_d ? *embed_d + 1 : 1025), ds.size());
        cb::KernelConfig kc{config.beta, config.alpha};
        const auto basis = cb::fit_diffusion(ds.X, kc, k);
        cb::write_basis(out, basis);
        if (!embed_d) d = basis.size() - 1;
        if (!paths.fit_out.empty()) fit = cb::fit_oracle(cb::truncate(basis, d), ds.chart.Q, config.ridge);
      } else {
        cb::Embedding emb;
        if (method == cb::Method::isomap) {
          const auto graph = cb::knn_graph(ds.X, config.isomap_k);
          emb = cb::classical_mds(cb::geodesics(graph).G, d).embedding;
        } else {
          cb::LayoutOptions options;
          options.epochs = config.umap_epochs;
          options.seed = global.values.count("seed") ? config.seed : config.umap_seed;
          const auto graph = cb::build_fuzzy_graph(ds.X, config.umap_k);
          emb = cb::optimize_layout(graph, cb::spectral_init(graph, d), options);
        }
        cb::write_embedding(out, emb);
        if (!paths.fit_out.empty()) fit = cb::fit_oracle(emb, ds.chart.Q, config.ridge);
      }
      if (fit) {
        ensure_parent(paths.fit_out);
        cb::write_json(paths.fit_out, cb::fit_to_json(*fit, method, d));
      }
      return cb::exit_ok;
    }

    if (scan->parsed()) {
      const cb::Dataset ds = load_or_generate(paths.in, config);
      const cb::ScanTable table = cb::run_scan(ds, config.dims, config.methods, cb::make_scan_params(config));
      const fs::path out = or_default(paths.out, config, "scan.csv");
      ensure_parent(out);
      cb::write_scan(out, table);
      return report_scan_failures(table);
    }

    if (spectra->parsed()) {
      const auto basis = cb::read_basis(paths.basis);
      const cb::ReadoutFit fit = cb::fit_from_json(cb::read_json(paths.fit));
      const cb::ReadoutSpectrum spectrum = cb::readout_spectrum(fit, basis);
      const fs::path out = or_default(paths.out, config, "spectra.csv");
      ensure_parent(out);
      cb::write_spectrum(out, spectrum);
      if (!paths.svg.empty()) cb::write_text(paths.svg, cb::svg_spectrum_plot(spectrum));
      return cb::exit_ok;
    }

    if (pairs->parsed()) {
      if (!base_text.empty()) config.set("pair_base", base_text);
      if (!partners_text.empty()) config.set("pair_partners", partners_text);
      const auto basis = cb::read_basis(paths.basis);
      const cb::Dataset ds = cb::read_dataset(paths.in);
      if (ds.size() != basis.num_points())
        throw cb::InvalidArgument("pairs: dataset and basis have different point counts");
      const auto report = cb::pair_charts(basis, config.pair_base, config.pair_first, config.pair_last,
                                          ds.chart.Q, config.novelty_window);
      const fs::path out = or_default(paths.out, config, "pairs.csv");
      const fs::path scatter = paths.scatter.empty() ? with_suffix(out, "_scatter", ".csv") : fs::path(paths.scatter);
      const fs::path svg = paths.svg.empty() ? with_suffix(out, "", ".svg") : fs::path(paths.svg);
      ensure_parent(out);
      cb::write_pairs(out, scatter, report);
      if (config.plots) cb::write_text(svg, cb::svg_pairs_plot(report));
      return cb::exit_ok;
    }

    if (rank->parsed()) {
      const cb::Dataset ds = load_or_generate(paths.in, config);
      const auto betas = config.beta_grid.values();
      const auto report = cb::rank_scan(cb::pairwise_sq_dists(ds.X), betas, config.tau);
      const fs::path out = or_default(paths.out, config, "rank.csv");
      ensure_parent(out);
      cb::write_rank(out, report);
      if (!paths.svg.empty()) cb::write_text(paths.svg, cb::svg_rank_plot(report));
      return cb::exit_ok;
    }

    if (plot_scan->parsed()) {
      const std::string svg = cb::svg_scan_plot(cb::read_scan(paths.in));
      cb::write_text(paths.out, svg);
      return cb::exit_ok;
    }

    if (plot_pairs->parsed()) {
      const fs::path in = paths.in;
      const fs::path scatter = paths.scatter.empty() ? with_suffix(in, "_scatter", ".csv") : fs::path(paths.scatter);
      const std::string svg = cb::svg_pairs_plot(cb::read_pairs(in, scatter));
      cb::write_text(paths.out, svg);
      return cb::exit_ok;
    }

    if (reproduce->parsed()) {
      const cb::ReproduceReport report = cb::cmd_reproduce(config);
      for (const auto& st : report.stages) {
        if (print_summary || !st.ok()) {
          std::fprintf(st.ok() ? stdout : stderr, "%-16s %-7s %9.1f ms  %s\n", st.name.c_str(),
                       st.ok() ? "ok" : "FAILED", st.wall_ms, st.error.c_str());
        }
      }
      return report.exit_code();
    }
  } catch (const cb::DisconnectedGraph& e) {
    std::cerr << "chartbench: error: " << e.what() << "\ncomponents: " << e.components() << "\n";
    return cb::exit_disconnected_graph;
  } catch (const cb::SchemaError& e) {
    std::cerr << "chartbench: schema error: " << e.what() << " (column '" << e.column() << "')\n";
    return cb::exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "chartbench: error: " << e.what() << "\n";
    return cb::exit_code_for(e);
  }
  return cb::exit_config_error;
}
