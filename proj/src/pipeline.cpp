#include "chartbench/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>

#include "chartbench/diagnostics.hpp"
#include "chartbench/errors.hpp"
#include "chartbench/io.hpp"
#include "chartbench/linalg.hpp"
#include "chartbench/svg.hpp"

namespace chartbench {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DisconnectedGraph*>(&e)) return exit_disconnected_graph;
  if (dynamic_cast<const NumericalError*>(&e)) return exit_numerical_failure;
  if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const std::filesystem::filesystem_error*>(&e) ||
      dynamic_cast<const nlohmann::json::exception*>(&e))
    return exit_config_error;
  return exit_numerical_failure;
}

int ReproduceReport::exit_code() const {
  for (const auto& s : stages)
    if (!s.ok()) return s.code;
  return exit_ok;
}

Dataset make_dataset(const RunConfig& config) {
  const SheetChart chart = sample_sheet(config.n, config.width, config.height, config.seed);
  return roll(chart, SpiralParams{config.inner_radius, config.growth});
}

ScanParams make_scan_params(const RunConfig& config) {
  ScanParams p;
  p.dmap.rule = config.beta;
  p.dmap.alpha = config.alpha;
  p.isomap_k = config.isomap_k;
  p.umap_k = config.umap_k;
  p.umap_epochs = config.umap_epochs;
  p.umap_seed = config.umap_seed;
  p.ridge = config.ridge;
  return p;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string label(Method m) { return std::string(to_string(m)); }

struct Runner {
  ReproduceReport& report;

  bool run(const std::string& name, const std::function<void(StageResult&)>& body) {
    StageResult stage;
    stage.name = name;
    const auto start = Clock::now();
    try {
      body(stage);
    } catch (const std::exception& e) {
      stage.code = exit_code_for(e);
      stage.error = e.what();
    }
    stage.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    report.stages.push_back(stage);
    return stage.ok();
  }

  void skip(const std::string& name, const std::string& reason) {
    StageResult stage;
    stage.name = name;
    stage.code = exit_numerical_failure;
    stage.error = "skipped: " + reason;
    report.stages.push_back(stage);
  }
};

struct Reconstruction {
  Method method;
  Index d;
  MatrixXd predicted;
};

}  // namespace

ReproduceReport cmd_reproduce(const RunConfig& config) {
  ReproduceReport report;
  report.out_dir = config.out_dir;
  Runner runner{report};
  const fs::path dir = config.out_dir;

  Json resolved = Json::object();
  Dataset ds;
  DiffusionBasis<double> basis;
  ScanTable table;
  std::vector<Reconstruction> recon;
  std::optional<ReadoutFit> spectrum_fit;

  const bool config_ok = runner.run("config", [&](StageResult&) {
    config.validate();
    fs::create_directories(dir);
  });
  if (!config_ok) return report;

  const bool have_data = runner.run("dataset", [&](StageResult& st) {
    ds = make_dataset(config);
    write_dataset(dir / "dataset.csv", ds);
    st.artifacts = {"dataset.csv", "dataset.csv.json"};
  });

  const Index spectrum_d = *std::max_element(config.recon_dims.begin(), config.recon_dims.end());
  bool have_basis = false;
  if (have_data) {
    have_basis = runner.run("basis", [&](StageResult& st) {
      Index need = std::max(spectrum_d, config.pair_last + 1);
      if (std::find(config.methods.begin(), config.methods.end(), Method::dmap) != config.methods.end())
        need = std::max(need, *std::max_element(config.dims.begin(), config.dims.end()));
      KernelConfig kc{config.beta, config.alpha};
      basis = fit_diffusion(ds.X, kc, std::min(need + 1, ds.size()));
      resolved["dmap.beta"] = basis.config.beta;
      resolved["dmap.modes"] = basis.size();
      write_basis(dir / "basis.csv", basis);
      st.artifacts = {"basis.csv", "basis.csv.json"};
    });
  } else {
    runner.skip("basis", "no dataset");
  }

  if (have_data) {
    runner.run("scan", [&](StageResult& st) {
      ScanParams params = make_scan_params(config);
      if (have_basis) params.dmap_basis = &basis;
      params.observer = [&](const ScanRow& row, const Embedding&, const ReadoutFit& fit) {
        if (std::find(config.recon_dims.begin(), config.recon_dims.end(), row.d) != config.recon_dims.end())
          recon.push_back({row.method, row.d, fit.predicted});
        if (row.method == Method::dmap && row.d == spectrum_d) spectrum_fit = fit;
      };
      table = run_scan(ds, config.dims, config.methods, params);
      for (const auto& [k, v] : table.resolved) resolved["scan." + k] = v;
      write_scan(dir / "scan.csv", table);
      st.artifacts = {"scan.csv"};
      if (config.plots) {
        write_text(dir / "error.svg", svg_scan_plot(table));
        st.artifacts.push_back("error.svg");
      }
      std::vector<std::string> failed;
      for (const auto& r : table.rows)
        if (!r.ok()) failed.push_back(label(r.method) + " d=" + std::to_string(r.d) + ": " + r.status);
      if (!failed.empty()) {
        st.code = table.resolved.count("isomap.components") ? exit_disconnected_graph : exit_numerical_failure;
        st.error = std::to_string(failed.size()) + " scan rows failed; first: " + failed.front();
      }
    });
  } else {
    runner.skip("scan", "no dataset");
  }

  if (have_data) {
    runner.run("reconstructions", [&](StageResult& st) {
      CsvTable csv;
      csv.schema = "chartbench.reconstruction.v1";
      csv.header = {"method", "d", "i", "s", "h", "s_hat", "h_hat"};
      std::sort(recon.begin(), recon.end(), [](const Reconstruction& a, const Reconstruction& b) {
        return std::tie(a.method, a.d) < std::tie(b.method, b.d);
      });
      std::vector<std::string> missing;
      for (Method m : config.methods) {
        std::vector<ScatterPanel> panels;
        panels.push_back({"truth (s, h)", ds.chart.Q, ds.chart.Q.col(0)});
        for (Index d : config.recon_dims) {
          auto it = std::find_if(recon.begin(), recon.end(),
                                 [&](const Reconstruction& r) { return r.method == m && r.d == d; });
          if (it == recon.end()) {
            missing.push_back(label(m) + " d=" + std::to_string(d));
            continue;
          }
          panels.push_back({label(m) + " d=" + std::to_string(d), it->predicted, ds.chart.Q.col(0)});
          for (Index i = 0; i < ds.size(); ++i)
            csv.rows.push_back({label(m), std::to_string(d), std::to_string(i),
                                format_double(ds.chart.Q(i, 0)), format_double(ds.chart.Q(i, 1)),
                                format_double(it->predicted(i, 0)), format_double(it->predicted(i, 1))});
        }
        if (config.plots && panels.size() > 1) {
          const std::string name = "recon_" + label(m) + ".svg";
          write_text(dir / name,
                     svg_scatter_grid(panels, static_cast<int>(panels.size()),
                                      label(m) + " chart reconstructions"));
          st.artifacts.push_back(name);
        }
      }
      write_csv(dir / "reconstructions.csv", csv);
      st.artifacts.insert(st.artifacts.begin(), "reconstructions.csv");
      if (!missing.empty()) {
        st.code = exit_numerical_failure;
        st.error = "no successful scan row for " + missing.front() +
                   (missing.size() > 1 ? " (+" + std::to_string(missing.size() - 1) + " more)" : "");
      }
    });
  } else {
    runner.skip("reconstructions", "no dataset");
  }

  if (have_basis) {
    runner.run("spectra", [&](StageResult& st) {
      if (!spectrum_fit) {
        const Embedding emb = truncate(basis, std::min(spectrum_d, basis.size() - 1));
        spectrum_fit = fit_oracle(emb, ds.chart.Q, config.ridge);
      }
      const Index d = spectrum_fit->fit.L.rows();
      write_json(dir / "fit.json", fit_to_json(*spectrum_fit, Method::dmap, d));
      const ReadoutSpectrum spectrum = readout_spectrum(*spectrum_fit, basis);
      write_spectrum(dir / "spectra.csv", spectrum);
      st.artifacts = {"fit.json", "spectra.csv"};
      if (config.plots) {
        write_text(dir / "spectra.svg", svg_spectrum_plot(spectrum));
        st.artifacts.push_back("spectra.svg");
      }
    });
    runner.run("pairs", [&](StageResult& st) {
      const PairChartReport pairs = pair_charts(basis, config.pair_base, config.pair_first,
                                                config.pair_last, ds.chart.Q, config.novelty_window);
      write_pairs(dir / "pairs.csv", dir / "pairs_scatter.csv", pairs);
      st.artifacts = {"pairs.csv", "pairs_scatter.csv"};
      if (config.plots) {
        write_text(dir / "pairs.svg", svg_pairs_plot(pairs));
        st.artifacts.push_back("pairs.svg");
      }
    });
  } else {
    runner.skip("spectra", "no diffusion basis");
    runner.skip("pairs", "no diffusion basis");
  }

  if (have_data) {
    runner.run("rank", [&](StageResult& st) {
      const auto betas = config.beta_grid.values();
      const RankReport rank = rank_scan(pairwise_sq_dists(ds.X), betas, config.tau);
      write_rank(dir / "rank.csv", rank);
      st.artifacts = {"rank.csv", "rank.csv.json"};
      if (config.plots) {
        write_text(dir / "rank.svg", svg_rank_plot(rank));
        st.artifacts.push_back("rank.svg");
      }
      resolved["rank.weyl_slope"] = rank.weyl_slope ? Json(*rank.weyl_slope) : Json(nullptr);
      resolved["rank.fit_r2"] = rank.fit_r2;
    });
  } else {
    runner.skip("rank", "no dataset");
  }

  Json manifest;
  manifest["schema"] = "chartbench.manifest.v1";
  manifest["tool"] = {{"name", "chartbench"}, {"version", kVersion}, {"eigen", EIGEN_WORLD_VERSION * 10000 + EIGEN_MAJOR_VERSION * 100 + EIGEN_MINOR_VERSION}};
  manifest["config"] = config.to_json();
  manifest["resolved"] = resolved;
  Json stages = Json::array();
  for (const auto& s : report.stages)
    stages.push_back({{"name", s.name},
                      {"status", s.ok() ? "ok" : "FAILED"},
                      {"exit_code", s.code},
                      {"error", s.error},
                      {"artifacts", s.artifacts},
                      {"wall_ms", s.wall_ms}});
  manifest["stages"] = stages;
  manifest["exit_code"] = report.exit_code();
  try {
    write_json(dir / "manifest.json", manifest);
  } catch (const std::exception& e) {
    StageResult st;
    st.name = "manifest";
    st.code = exit_code_for(e);
    st.error = e.what();
    report.stages.push_back(st);
  }
  return report;
}

}  // namespace chartbench
