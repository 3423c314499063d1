#include "chartbench/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "chartbench/errors.hpp"

namespace chartbench {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& column) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw SchemaError("column '" + column + "': not a number: '" + text + "'", column);
  return v;
}

std::string stem_schema(const std::string& kind) { return "chartbench." + kind + ".v1"; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw SchemaError("missing column '" + name + "'", name);
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::size_t c = column(name);
  if (c >= rows.at(row).size()) throw SchemaError("short row in column '" + name + "'", name);
  return parse_double(rows[row][c], name);
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# schema:";
      if (line.rfind(key, 0) == 0) {
        table.schema = line.substr(key.size());
        const auto first = table.schema.find_first_not_of(' ');
        table.schema = first == std::string::npos ? "" : table.schema.substr(first);
      }
      continue;
    }
    if (!have_header) {
      table.header = split(line);
      have_header = true;
    } else {
      table.rows.push_back(split(line));
    }
  }
  return table;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "# schema: " << table.schema << '\n';
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void require_schema(const CsvTable& table, const std::string& schema,
                    const std::vector<std::string>& columns) {
  if (table.header.empty()) throw SchemaError("empty CSV (no header row)", columns.empty() ? "" : columns[0]);
  if (!table.schema.empty() && table.schema != schema)
    throw SchemaError("schema mismatch: expected " + schema + ", found " + table.schema, "schema");
  for (const auto& c : columns) table.column(c);
  if (table.rows.empty()) throw SchemaError("CSV has no data rows", columns.empty() ? "" : columns[0]);
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& json) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << json.dump(2) << '\n';
}

fs::path sidecar(const fs::path& path) { return fs::path(path.string() + ".json"); }

void write_dataset(const fs::path& path, const Dataset& ds) {
  CsvTable t;
  t.schema = stem_schema("dataset");
  t.header = {"s", "h", "x", "y", "z"};
  for (Index i = 0; i < ds.size(); ++i)
    t.rows.push_back({format_double(ds.chart.Q(i, 0)), format_double(ds.chart.Q(i, 1)),
                      format_double(ds.X(i, 0)), format_double(ds.X(i, 1)), format_double(ds.X(i, 2))});
  write_csv(path, t);
  Json meta = {{"schema", t.schema},
               {"n", ds.size()},
               {"w", ds.chart.width},
               {"h", ds.chart.height},
               {"a", ds.spiral.inner_radius},
               {"b", ds.spiral.growth},
               {"seed", ds.chart.seed},
               {"generator", "mt19937_64, u = (x >> 11) * 2^-53, s then h per row"}};
  write_json(sidecar(path), meta);
}

Dataset read_dataset(const fs::path& path) {
  const CsvTable t = read_csv(path);
  require_schema(t, stem_schema("dataset"), {"s", "h", "x", "y", "z"});
  Dataset ds;
  const Index n = static_cast<Index>(t.rows.size());
  ds.X.resize(n, 3);
  ds.chart.Q.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    ds.chart.Q(i, 0) = t.number(r, "s");
    ds.chart.Q(i, 1) = t.number(r, "h");
    ds.X(i, 0) = t.number(r, "x");
    ds.X(i, 1) = t.number(r, "y");
    ds.X(i, 2) = t.number(r, "z");
  }
  ds.chart.width = ds.chart.Q.col(0).maxCoeff();
  ds.chart.height = ds.chart.Q.col(1).maxCoeff();
  if (fs::exists(sidecar(path))) {
    const Json meta = read_json(sidecar(path));
    ds.chart.width = meta.value("w", ds.chart.width);
    ds.chart.height = meta.value("h", ds.chart.height);
    ds.chart.seed = meta.value("seed", std::uint64_t{0});
    ds.spiral.inner_radius = meta.value("a", ds.spiral.inner_radius);
    ds.spiral.growth = meta.value("b", ds.spiral.growth);
  }
  return ds;
}

void write_basis(const fs::path& path, const DiffusionBasis<double>& basis, const Json& extra) {
  CsvTable t;
  t.schema = stem_schema("basis");
  const Index k = basis.size();
  for (Index c = 0; c < k; ++c) t.header.push_back("mode_" + std::to_string(c));
  std::vector<std::string> row;
  for (Index c = 0; c < k; ++c) row.push_back(format_double(basis.lambdas(c)));
  t.rows.push_back(row);
  for (Index i = 0; i < basis.num_points(); ++i) {
    row.clear();
    for (Index c = 0; c < k; ++c) row.push_back(format_double(basis.psi(i, c)));
    t.rows.push_back(row);
  }
  write_csv(path, t);
  Json meta = {{"schema", t.schema},
               {"n", basis.num_points()},
               {"k", k},
               {"beta", basis.config.beta},
               {"beta_rule", basis.config.rule.to_string()},
               {"alpha", basis.config.alpha}};
  if (extra.is_object())
    for (const auto& [key, value] : extra.items()) meta[key] = value;
  write_json(sidecar(path), meta);
}

DiffusionBasis<double> read_basis(const fs::path& path) {
  const CsvTable t = read_csv(path);
  require_schema(t, stem_schema("basis"), {"mode_0"});
  const Index k = static_cast<Index>(t.header.size());
  const Index n = static_cast<Index>(t.rows.size()) - 1;
  if (n < 1) throw SchemaError("basis CSV needs an eigenvalue row and at least one psi row", "mode_0");
  DiffusionBasis<double> basis;
  basis.lambdas.resize(k);
  basis.psi.resize(n, k);
  for (Index c = 0; c < k; ++c)
    if (t.header[static_cast<std::size_t>(c)] != "mode_" + std::to_string(c))
      throw SchemaError("basis CSV: expected column mode_" + std::to_string(c), t.header[static_cast<std::size_t>(c)]);
  for (Index r = 0; r <= n; ++r) {
    const auto& row = t.rows[static_cast<std::size_t>(r)];
    if (static_cast<Index>(row.size()) != k) throw SchemaError("basis CSV: ragged row " + std::to_string(r), "mode_0");
    for (Index c = 0; c < k; ++c) {
      const double v = parse_double(row[static_cast<std::size_t>(c)], t.header[static_cast<std::size_t>(c)]);
      if (r == 0)
        basis.lambdas(c) = v;
      else
        basis.psi(r - 1, c) = v;
    }
  }
  if (fs::exists(sidecar(path))) {
    const Json meta = read_json(sidecar(path));
    basis.config.beta = meta.value("beta", 0.0);
    basis.config.alpha = meta.value("alpha", 0.0);
    if (meta.contains("beta_rule")) basis.config.rule = BetaRule::parse(meta["beta_rule"].get<std::string>());
  }
  return basis;
}

void write_embedding(const fs::path& path, const Embedding& emb) {
  CsvTable t;
  t.schema = stem_schema("embedding");
  for (Index c = 0; c < emb.d(); ++c) t.header.push_back("u" + std::to_string(c + 1));
  for (Index i = 0; i < emb.size(); ++i) {
    std::vector<std::string> row;
    for (Index c = 0; c < emb.d(); ++c) row.push_back(format_double(emb.U(i, c)));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
  Json meta = {{"schema", t.schema}, {"method", std::string(to_string(emb.method))}, {"d", emb.d()}};
  for (const auto& [key, value] : emb.meta) meta["meta"][key] = value;
  write_json(sidecar(path), meta);
}

Json fit_to_json(const ReadoutFit& fit, Method method, Index d) {
  Json L = Json::array();
  for (Index r = 0; r < fit.fit.L.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < fit.fit.L.cols(); ++c) row.push_back(fit.fit.L(r, c));
    L.push_back(row);
  }
  Json b = Json::array();
  for (Index c = 0; c < fit.fit.b.size(); ++c) b.push_back(fit.fit.b(c));
  return {{"schema", stem_schema("fit")},
          {"method", std::string(to_string(method))},
          {"d", d},
          {"ridge", fit.fit.ridge},
          {"L", L},
          {"b", b},
          {"frob_sq", fit.frob_sq},
          {"mse", fit.mse},
          {"rel_frob", fit.rel_frob}};
}

ReadoutFit fit_from_json(const Json& json) {
  if (json.value("schema", std::string{}) != stem_schema("fit"))
    throw SchemaError("fit JSON: expected schema " + stem_schema("fit"), "schema");
  for (const char* key : {"L", "b", "frob_sq", "mse", "rel_frob"})
    if (!json.contains(key)) throw SchemaError(std::string("fit JSON: missing '") + key + "'", key);
  ReadoutFit fit;
  const auto& L = json["L"];
  const auto& b = json["b"];
  const Index rows = static_cast<Index>(L.size());
  const Index cols = static_cast<Index>(b.size());
  fit.fit.L.resize(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(L[r].size()) != cols) throw SchemaError("fit JSON: ragged L", "L");
    for (Index c = 0; c < cols; ++c) fit.fit.L(r, c) = L[r][c].get<double>();
  }
  fit.fit.b.resize(cols);
  for (Index c = 0; c < cols; ++c) fit.fit.b(c) = b[c].get<double>();
  fit.fit.ridge = json.value("ridge", 0.0);
  fit.frob_sq = json["frob_sq"].get<double>();
  fit.mse = json["mse"].get<double>();
  fit.rel_frob = json["rel_frob"].get<double>();
  return fit;
}

void write_scan(const fs::path& path, const ScanTable& table) {
  CsvTable t;
  t.schema = stem_schema("scan");
  t.header = {"method", "d", "frob_sq", "mse", "rel_frob", "wall_ms", "status"};
  for (const auto& r : table.rows) {
    if (r.ok())
      t.rows.push_back({std::string(to_string(r.method)), std::to_string(r.d), format_double(r.frob_sq),
                        format_double(r.mse), format_double(r.rel_frob), format_double(r.wall_ms), "ok"});
    else {
      std::string status = r.status;
      std::replace(status.begin(), status.end(), ',', ';');
      t.rows.push_back({std::string(to_string(r.method)), std::to_string(r.d), "", "", "", "", status});
    }
  }
  write_csv(path, t);
}

ScanTable read_scan(const fs::path& path) {
  const CsvTable t = read_csv(path);
  require_schema(t, stem_schema("scan"), {"method", "d", "frob_sq", "mse", "rel_frob", "wall_ms", "status"});
  ScanTable table;
  const std::size_t status_col = t.column("status");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    ScanRow r;
    r.method = parse_method(t.rows[i].at(t.column("method")));
    r.d = static_cast<Index>(t.number(i, "d"));
    r.status = t.rows[i].at(status_col);
    if (r.status == "ok") {
      r.frob_sq = t.number(i, "frob_sq");
      r.mse = t.number(i, "mse");
      r.rel_frob = t.number(i, "rel_frob");
      r.wall_ms = t.number(i, "wall_ms");
    } else {
      r.frob_sq = r.mse = r.rel_frob = std::nan("");
    }
    table.rows.push_back(r);
  }
  return table;
}

void write_rank(const fs::path& path, const RankReport& report) {
  CsvTable t;
  t.schema = stem_schema("rank");
  t.header = {"beta", "threshold_rank", "stable_rank", "entropy_rank"};
  for (const auto& r : report.rows)
    t.rows.push_back({format_double(r.beta), std::to_string(r.threshold_rank), format_double(r.stable_rank),
                      format_double(r.entropy_rank)});
  write_csv(path, t);
  Json meta = {{"schema", t.schema}, {"n", report.n}};
  if (report.weyl_slope) {
    meta["weyl_slope"] = *report.weyl_slope;
    meta["weyl_window"] = {report.weyl_window->first, report.weyl_window->second};
    meta["fit_r2"] = report.fit_r2;
  } else {
    meta["weyl_slope"] = nullptr;  // no qualifying window
  }
  write_json(sidecar(path), meta);
}

RankReport read_rank(const fs::path& path) {
  const CsvTable t = read_csv(path);
  require_schema(t, stem_schema("rank"), {"beta", "threshold_rank", "stable_rank", "entropy_rank"});
  RankReport report;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    report.rows.push_back({t.number(i, "beta"), static_cast<Index>(t.number(i, "threshold_rank")),
                           t.number(i, "stable_rank"), t.number(i, "entropy_rank")});
  if (fs::exists(sidecar(path))) {
    const Json meta = read_json(sidecar(path));
    report.n = meta.value("n", Index{0});
    if (meta.contains("weyl_slope") && !meta["weyl_slope"].is_null()) {
      report.weyl_slope = meta["weyl_slope"].get<double>();
      report.weyl_window = std::make_pair(meta["weyl_window"][0].get<double>(), meta["weyl_window"][1].get<double>());
      report.fit_r2 = meta.value("fit_r2", 0.0);
    }
  }
  return report;
}

void write_spectrum(const fs::path& path, const ReadoutSpectrum& spectrum) {
  CsvTable t;
  t.schema = stem_schema("spectra");
  t.header = {"n", "one_minus_lambda", "coeff_mag_s", "coeff_mag_h"};
  for (const auto& r : spectrum.rows)
    t.rows.push_back({std::to_string(r.n), format_double(r.one_minus_lambda), format_double(r.coeff_mag_s),
                      format_double(r.coeff_mag_h)});
  write_csv(path, t);
}

void write_pairs(const fs::path& path, const fs::path& scatter_path, const PairChartReport& report) {
  CsvTable t;
  t.schema = stem_schema("pairs");
  t.header = {"base", "partner", "novelty", "pair_readout_rel_frob"};
  for (const auto& r : report.rows)
    t.rows.push_back({std::to_string(report.base), std::to_string(r.partner), format_double(r.novelty),
                      format_double(r.pair_readout_rel_frob)});
  write_csv(path, t);

  CsvTable s;
  s.schema = stem_schema("pairs_scatter");
  s.header = {"partner", "i", "base_coord", "partner_coord", "s", "h"};
  for (std::size_t p = 0; p < report.rows.size(); ++p) {
    const MatrixXd& xy = report.scatter[p];
    for (Index i = 0; i < xy.rows(); ++i)
      s.rows.push_back({std::to_string(report.rows[p].partner), std::to_string(i), format_double(xy(i, 0)),
                        format_double(xy(i, 1)), format_double(report.truth(i, 0)),
                        format_double(report.truth(i, 1))});
  }
  write_csv(scatter_path, s);
}

PairChartReport read_pairs(const fs::path& path, const fs::path& scatter_path) {
  const CsvTable t = read_csv(path);
  require_schema(t, stem_schema("pairs"), {"base", "partner", "novelty", "pair_readout_rel_frob"});
  PairChartReport report;
  report.base = static_cast<Index>(t.number(0, "base"));
  std::map<Index, std::size_t> slot;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    PairRow r{static_cast<Index>(t.number(i, "partner")), t.number(i, "novelty"),
              t.number(i, "pair_readout_rel_frob")};
    slot[r.partner] = report.rows.size();
    report.rows.push_back(r);
  }

  const CsvTable s = read_csv(scatter_path);
  require_schema(s, stem_schema("pairs_scatter"), {"partner", "i", "base_coord", "partner_coord", "s", "h"});
  std::map<Index, std::vector<std::array<double, 4>>> points;
  for (std::size_t i = 0; i < s.rows.size(); ++i)
    points[static_cast<Index>(s.number(i, "partner"))].push_back(
        {s.number(i, "base_coord"), s.number(i, "partner_coord"), s.number(i, "s"), s.number(i, "h")});
  report.scatter.resize(report.rows.size());
  for (const auto& [partner, pts] : points) {
    auto it = slot.find(partner);
    if (it == slot.end()) throw SchemaError("scatter references unknown partner " + std::to_string(partner), "partner");
    MatrixXd xy(static_cast<Index>(pts.size()), 2);
    report.truth.resize(static_cast<Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      xy(static_cast<Index>(i), 0) = pts[i][0];
      xy(static_cast<Index>(i), 1) = pts[i][1];
      report.truth(static_cast<Index>(i), 0) = pts[i][2];
      report.truth(static_cast<Index>(i), 1) = pts[i][3];
    }
    report.scatter[it->second] = std::move(xy);
  }
  return report;
}

}  // namespace chartbench
