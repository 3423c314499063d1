#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "chartbench/config.hpp"
#include "chartbench/errors.hpp"
#include "chartbench/io.hpp"
#include "chartbench/svg.hpp"
#include "test_support.hpp"

using namespace chartbench;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("chartbench_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

  fs::path dir_;
};

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

ScanTable small_scan() {
  ScanTable t;
  const Method methods[] = {Method::dmap, Method::isomap, Method::umap};
  for (Method m : methods)
    for (Index d : default_scan_dims()) {
      ScanRow r;
      r.method = m;
      r.d = d;
      r.frob_sq = 1000.0 / static_cast<double>(d) + static_cast<double>(static_cast<int>(m));
      r.mse = r.frob_sq / 4000;
      r.rel_frob = r.frob_sq / 1e4;
      r.wall_ms = 1.5;
      t.rows.push_back(r);
    }
  return t;
}

}  // namespace

using IoTest = TempDir;

TEST(FormatDouble, RoundTripsExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1e-9}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST_F(IoTest, DatasetRoundTrip) {
  const Dataset ds = fixtures::swiss_roll(50, 3);
  write_dataset(path("ds.csv"), ds);
  const std::string text = slurp(path("ds.csv"));
  EXPECT_EQ(text.rfind("# schema: chartbench.dataset.v1\ns,h,x,y,z\n", 0), 0u);
  const Dataset back = read_dataset(path("ds.csv"));
  EXPECT_TRUE((back.X.array() == ds.X.array()).all());
  EXPECT_TRUE((back.chart.Q.array() == ds.chart.Q.array()).all());
  EXPECT_EQ(back.chart.seed, 3u);
  EXPECT_EQ(back.spiral.growth, 0.5);
  EXPECT_TRUE(fs::exists(path("ds.csv.json")));
}

TEST_F(IoTest, MissingColumnIsNamed) {
  spit(path("bad.csv"), "# schema: chartbench.dataset.v1\ns,h,x,y\n1,2,3,4\n");
  try {
    read_dataset(path("bad.csv"));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "z");
    EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos);
  }
}

TEST_F(IoTest, NonNumericCellIsNamed) {
  spit(path("bad.csv"), "# schema: chartbench.dataset.v1\ns,h,x,y,z\n1,2,oops,4,5\n");
  try {
    read_dataset(path("bad.csv"));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "x");
  }
}

TEST_F(IoTest, WrongSchemaRejected) {
  write_scan(path("scan.csv"), small_scan());
  try {
    read_dataset(path("scan.csv"));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "schema");
  }
}

TEST_F(IoTest, EmptyCsvRejected) {
  spit(path("empty.csv"), "");
  EXPECT_THROW(read_scan(path("empty.csv")), SchemaError);
  spit(path("header.csv"), "# schema: chartbench.scan.v1\nmethod,d,frob_sq,mse,rel_frob,wall_ms,status\n");
  EXPECT_THROW(read_scan(path("header.csv")), SchemaError);
  EXPECT_THROW(read_scan(path("missing.csv")), InvalidArgument);
}

TEST_F(IoTest, BasisRoundTrip) {
  const auto basis = fit_diffusion(fixtures::swiss_roll(80, 2).X, KernelConfig{}, 6);
  write_basis(path("basis.csv"), basis, Json{{"note", "x"}});
  const auto back = read_basis(path("basis.csv"));
  EXPECT_TRUE((back.lambdas.array() == basis.lambdas.array()).all());
  EXPECT_TRUE((back.psi.array() == basis.psi.array()).all());
  EXPECT_EQ(back.config.beta, basis.config.beta);
  EXPECT_EQ(back.config.rule.to_string(), basis.config.rule.to_string());
  EXPECT_EQ(read_json(path("basis.csv.json")).at("note"), "x");
}

TEST_F(IoTest, BasisHeaderChecked) {
  spit(path("b.csv"), "# schema: chartbench.basis.v1\nmode_0,mode_2\n1,0.5\n1,2\n");
  try {
    read_basis(path("b.csv"));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "mode_2");
  }
}

TEST_F(IoTest, ScanRoundTripKeepsFailures) {
  ScanTable t = small_scan();
  t.rows[3].status = "FAILED: boom, twice";
  write_scan(path("scan.csv"), t);
  const ScanTable back = read_scan(path("scan.csv"));
  ASSERT_EQ(back.rows.size(), 45u);
  EXPECT_EQ(back.rows[0].frob_sq, t.rows[0].frob_sq);
  EXPECT_EQ(back.rows[20].method, Method::isomap);
  EXPECT_FALSE(back.rows[3].ok());
  EXPECT_TRUE(std::isnan(back.rows[3].frob_sq));
  EXPECT_EQ(back.rows[3].status, "FAILED: boom; twice");
}

TEST_F(IoTest, FitJsonRoundTrip) {
  const MatrixXd U = fixtures::random_matrix(40, 3, 1);
  const ReadoutFit fit = fit_oracle(U, fixtures::random_matrix(40, 2, 2));
  write_json(path("fit.json"), fit_to_json(fit, Method::dmap, 3));
  const ReadoutFit back = fit_from_json(read_json(path("fit.json")));
  EXPECT_TRUE((back.fit.L.array() == fit.fit.L.array()).all());
  EXPECT_TRUE((back.fit.b.array() == fit.fit.b.array()).all());
  EXPECT_EQ(back.frob_sq, fit.frob_sq);
  Json broken = fit_to_json(fit, Method::dmap, 3);
  broken.erase("b");
  EXPECT_THROW(fit_from_json(broken), SchemaError);
  broken["schema"] = "other";
  EXPECT_THROW(fit_from_json(broken), SchemaError);
}

TEST_F(IoTest, RankRoundTrip) {
  RankReport r;
  r.n = 10;
  r.rows = {{0.1, 1, 1.0, 1.0}, {1.0, 4, 2.5, 3.2}, {10.0, 9, 7.0, 8.9}};
  r.weyl_slope = 0.97;
  r.weyl_window = std::make_pair(1.0, 10.0);
  r.fit_r2 = 0.99;
  write_rank(path("rank.csv"), r);
  const RankReport back = read_rank(path("rank.csv"));
  ASSERT_EQ(back.rows.size(), 3u);
  EXPECT_EQ(back.rows[1].threshold_rank, 4);
  EXPECT_EQ(*back.weyl_slope, 0.97);
  EXPECT_EQ(back.weyl_window->second, 10.0);

  r.weyl_slope.reset();
  r.weyl_window.reset();
  write_rank(path("rank2.csv"), r);
  EXPECT_TRUE(read_json(path("rank2.csv.json")).at("weyl_slope").is_null());
  EXPECT_FALSE(read_rank(path("rank2.csv")).weyl_slope.has_value());
}

TEST_F(IoTest, PairsRoundTrip) {
  const auto basis = fit_diffusion(fixtures::swiss_roll(120, 4).X, KernelConfig{}, 8);
  const PairChartReport r = pair_charts(basis, 0, 1, 5, fixtures::swiss_roll(120, 4).chart.Q, 10);
  write_pairs(path("pairs.csv"), path("pairs_scatter.csv"), r);
  const PairChartReport back = read_pairs(path("pairs.csv"), path("pairs_scatter.csv"));
  ASSERT_EQ(back.rows.size(), 5u);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(back.rows[t].partner, r.rows[t].partner);
    EXPECT_EQ(back.rows[t].novelty, r.rows[t].novelty);
    EXPECT_TRUE((back.scatter[t].array() == r.scatter[t].array()).all());
  }
  EXPECT_TRUE((back.truth.array() == r.truth.array()).all());
}

TEST(LogGridParse, Grammar) {
  const LogGrid g = LogGrid::parse("1e-6:1e4:25");
  EXPECT_EQ(g.lo, 1e-6);
  EXPECT_EQ(g.hi, 1e4);
  EXPECT_EQ(g.count, 25);
  EXPECT_EQ(LogGrid::parse(g.to_string()).values(), g.values());
  EXPECT_THROW(LogGrid::parse("1:2"), InvalidArgument);
  EXPECT_THROW(LogGrid::parse("2:1:5"), InvalidArgument);
  EXPECT_THROW(LogGrid::parse("1:2:two"), InvalidArgument);
  EXPECT_THROW(LogGrid::parse("0:2:5"), InvalidArgument);
}

TEST(ConfigText, DefaultsAndOverrides) {
  const RunConfig def;
  EXPECT_EQ(def.n, 2000);
  EXPECT_EQ(def.seed, 7u);
  EXPECT_EQ(def.dims, default_scan_dims());
  EXPECT_EQ(def.recon_dims, (std::vector<Index>{2, 4, 8, 1024}));

  const RunConfig c = parse_config_text(
      "# comment\n"
      "n = 300   # trailing\n"
      "\n"
      "beta = median:20\n"
      "dims = 1,2,4\n"
      "methods = dmap, isomap\n"
      "recon_dims = 2,4\n"
      "pair_partners = 1:6\n"
      "ridge = 1e-8\n"
      "plots = false\n");
  EXPECT_EQ(c.n, 300);
  EXPECT_EQ(c.beta.to_string(), BetaRule::median_scaled(20).to_string());
  EXPECT_EQ(c.dims, (std::vector<Index>{1, 2, 4}));
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::dmap, Method::isomap}));
  EXPECT_EQ(c.pair_first, 1);
  EXPECT_EQ(c.pair_last, 6);
  EXPECT_EQ(*c.ridge, 1e-8);
  EXPECT_FALSE(c.plots);
}

TEST(ConfigText, RoundTrip) {
  RunConfig c = parse_config_text("n = 321\nseed = 99\nbeta = 0.25\nalpha = 0.5\numap_epochs = 17\nout_dir = /tmp/x y\n");
  const RunConfig back = parse_config_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.out_dir, fs::path("/tmp/x y"));
  const RunConfig from_json = RunConfig::from_json(c.to_json());
  EXPECT_EQ(from_json.to_text(), c.to_text());
}

TEST(ConfigText, Errors) {
  EXPECT_THROW(parse_config_text("bogus = 1\n"), InvalidArgument);
  EXPECT_THROW(parse_config_text("n = ten\n"), InvalidArgument);
  EXPECT_THROW(parse_config_text("n 10\n"), InvalidArgument);
  EXPECT_THROW(parse_config_text("methods = dmap,tsne\n"), InvalidArgument);
  EXPECT_THROW(parse_config_text("alpha = 2\n").validate(), InvalidArgument);
  EXPECT_THROW(parse_config_text("dims = 1,0\n").validate(), InvalidArgument);
  EXPECT_THROW(parse_config_text("dims = 1,2\nrecon_dims = 2,4\n").validate(), InvalidArgument);
}

TEST_F(IoTest, LoadConfigFromManifest) {
  RunConfig c = parse_config_text("n = 444\nseed = 5\n");
  write_json(path("manifest.json"), Json{{"schema", "chartbench.manifest.v1"}, {"config", c.to_json()}});
  EXPECT_EQ(load_config(path("manifest.json")).to_text(), c.to_text());
  spit(path("run.cfg"), c.to_text());
  EXPECT_EQ(load_config(path("run.cfg")).to_text(), c.to_text());
  EXPECT_THROW(load_config(path("nope.cfg")), InvalidArgument);
}

TEST(ConfigLists, Parsers) {
  EXPECT_EQ(parse_index_list("1, 2,3"), (std::vector<Index>{1, 2, 3}));
  EXPECT_EQ(parse_index_range("1:10"), std::make_pair(Index{1}, Index{10}));
  EXPECT_THROW(parse_index_range("10:1"), InvalidArgument);
  EXPECT_THROW(parse_index_list(""), InvalidArgument);
  EXPECT_EQ(parse_method_list("umap"), std::vector<Method>{Method::umap});
}

TEST(Svg, ScanPlotSeriesAndTicks) {
  const std::string svg = svg_scan_plot(small_scan());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "<g class=\"series\""), 3u);
  const auto ticks_begin = svg.find("<g class=\"xticks\"");
  ASSERT_NE(ticks_begin, std::string::npos);
  const std::string ticks = svg.substr(ticks_begin, svg.find("</g>", ticks_begin) - ticks_begin);
  EXPECT_EQ(count(ticks, "<text"), 15u);
  EXPECT_THROW(svg_scan_plot(ScanTable{}), InvalidArgument);
}

TEST(Svg, ScanPlotSkipsFailedRows) {
  ScanTable t = small_scan();
  for (auto& r : t.rows)
    if (r.method == Method::umap) r.status = "FAILED: x";
  const std::string svg = svg_scan_plot(t);
  const auto begin = svg.find("<g class=\"series\" data-name=\"umap\"");
  ASSERT_NE(begin, std::string::npos);
  const std::string umap = svg.substr(begin, svg.find("</g>", begin) - begin);
  EXPECT_EQ(count(umap, "<circle"), 0u);
  EXPECT_EQ(count(umap, "<path"), 0u);
}

TEST(Svg, ScatterGridPanels) {
  std::vector<ScatterPanel> panels;
  for (int p = 0; p < 4; ++p)
    panels.push_back({"panel " + std::to_string(p), fixtures::random_matrix(30, 2, p), VectorXd::LinSpaced(30, 0, 1)});
  const std::string svg = svg_scatter_grid(panels, 2, "grid & <title>");
  EXPECT_EQ(count(svg, "<g class=\"panel\""), 4u);
  EXPECT_NE(svg.find("grid &amp; &lt;title&gt;"), std::string::npos);
  EXPECT_EQ(count(svg, "<circle"), 120u);
}

TEST(Svg, OutputsAreFinite) {
  RankReport r;
  r.n = 10;
  r.rows = {{0.1, 1, 1.0, 1.0}, {1.0, 4, 2.5, 3.2}, {10.0, 9, 7.0, 8.9}};
  ReadoutSpectrum s;
  s.rows = {{1, 0.01, 10.0, 0.1}, {2, 0.02, 0.0, 1.0}};
  for (const std::string& svg : {svg_rank_plot(r), svg_spectrum_plot(s)}) {
    EXPECT_EQ(svg.find("nan"), std::string::npos);
    EXPECT_EQ(svg.find("inf"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
  }
}
