#include "chartbench/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "chartbench/errors.hpp"

namespace chartbench {

namespace {

constexpr std::array<const char*, 4> kSeriesColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Five-stop viridis approximation.
std::string palette(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops = {{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;
  std::vector<double> ticks;

  double unit(double v) const {
    const double a = log ? std::log10(v) : v;
    const double l = log ? std::log10(lo) : lo;
    const double h = log ? std::log10(hi) : hi;
    return h > l ? (a - l) / (h - l) : 0.5;
  }
};

bool plottable(const Axis& axis, double v) { return std::isfinite(v) && (!axis.log || v > 0); }

Axis auto_axis(const std::vector<double>& values, bool log) {
  Axis axis;
  axis.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values)
    if (plottable(axis, v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(lo <= hi)) {
    lo = log ? 1.0 : 0.0;
    hi = log ? 10.0 : 1.0;
  }
  if (log) {
    axis.lo = std::pow(10.0, std::floor(std::log10(lo)));
    axis.hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (axis.hi <= axis.lo) axis.hi = axis.lo * 10.0;
    const int decades = static_cast<int>(std::lround(std::log10(axis.hi / axis.lo)));
    const int stride = std::max(1, decades / 8);
    for (int e = 0; e <= decades; e += stride) axis.ticks.push_back(axis.lo * std::pow(10.0, e));
  } else {
    if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    axis.lo = lo - pad;
    axis.hi = hi + pad;
    for (int i = 0; i <= 4; ++i) axis.ticks.push_back(lo + (hi - lo) * i / 4.0);
  }
  return axis;
}

struct Series {
  std::string name;
  std::vector<double> xs, ys;
  bool line = true;
};

std::string line_plot(const std::vector<Series>& series, const Axis& x, const Axis& y,
                      const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  constexpr double W = 760, H = 500, left = 80, right = 170, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double v) { return left + x.unit(v) * pw; };
  auto py = [&](double v) { return top + (1.0 - y.unit(v)) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<g class=\"xticks\">\n";
  for (double t : x.ticks) {
    out << "<line x1=\"" << num(px(t)) << "\" x2=\"" << num(px(t)) << "\" y1=\"" << num(top + ph)
        << "\" y2=\"" << num(top + ph + 5) << "\" stroke=\"black\"/>";
    out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 18)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  out << "</g>\n<g class=\"yticks\">\n";
  for (double t : y.ticks) {
    out << "<line x1=\"" << num(left - 5) << "\" x2=\"" << num(left) << "\" y1=\"" << num(py(t))
        << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>";
    out << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
        << tick_label(t) << "</text>\n";
  }
  out << "</g>\n";
  out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 15) << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
  out << "<text transform=\"translate(18," << num(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const Series& ser = series[s];
    const char* color = kSeriesColors[s % kSeriesColors.size()];
    out << "<g class=\"series\" data-name=\"" << escape(ser.name) << "\">\n";
    std::string path;
    for (std::size_t i = 0; i < ser.xs.size(); ++i) {
      if (!plottable(x, ser.xs[i]) || !plottable(y, ser.ys[i])) continue;
      path += (path.empty() ? "M" : " L") + num(px(ser.xs[i])) + ',' + num(py(ser.ys[i]));
      out << "<circle cx=\"" << num(px(ser.xs[i])) << "\" cy=\"" << num(py(ser.ys[i]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (ser.line && !path.empty())
      out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    out << "</g>\n";
    const double ly = top + 10 + 20.0 * static_cast<double>(s);
    out << "<rect x=\"" << num(left + pw + 15) << "\" y=\"" << num(ly) << "\" width=\"12\" height=\"12\" fill=\""
        << color << "\"/><text x=\"" << num(left + pw + 33) << "\" y=\"" << num(ly + 10) << "\">"
        << escape(ser.name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string svg_scan_plot(const ScanTable& table) {
  if (table.rows.empty()) throw InvalidArgument("svg_scan_plot: empty scan table");
  std::vector<Series> series;
  std::set<double> dims;
  std::vector<double> all_x, all_y;
  for (Method m : {Method::dmap, Method::isomap, Method::umap}) {
    const auto rows = table.rows_for(m);
    if (rows.empty()) continue;
    Series s;
    s.name = to_string(m);
    for (const auto& r : rows) {
      dims.insert(static_cast<double>(r.d));
      if (!r.ok()) continue;
      s.xs.push_back(static_cast<double>(r.d));
      s.ys.push_back(r.frob_sq);
      all_y.push_back(r.frob_sq);
    }
    series.push_back(std::move(s));
  }
  Axis x;
  x.log = true;
  x.lo = *dims.begin() / 1.3;
  x.hi = *dims.rbegin() * 1.3;
  x.ticks.assign(dims.begin(), dims.end());
  const Axis y = auto_axis(all_y, true);
  return line_plot(series, x, y, "Chart readout error vs embedding dimension", "d",
                   "||Q - Qhat||_F^2");
}

std::string svg_scatter_grid(const std::vector<ScatterPanel>& panels, int columns,
                             const std::string& title) {
  if (panels.empty()) throw InvalidArgument("svg_scatter_grid: no panels");
  if (columns < 1) throw InvalidArgument("svg_scatter_grid: columns must be >= 1");
  constexpr double cell = 210, inner = 170, pad = 20, header = 40;
  const int rows = static_cast<int>((panels.size() + static_cast<std::size_t>(columns) - 1) /
                                    static_cast<std::size_t>(columns));
  const double W = cell * columns, H = header + cell * rows;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const ScatterPanel& panel = panels[p];
    if (panel.xy.cols() < 2) throw InvalidArgument("svg_scatter_grid: panel needs two columns");
    const double ox = cell * static_cast<double>(p % static_cast<std::size_t>(columns)) + pad;
    const double oy = header + cell * static_cast<double>(p / static_cast<std::size_t>(columns)) + pad;
    out << "<g class=\"panel\">\n<text x=\"" << num(ox + inner / 2) << "\" y=\"" << num(oy - 6)
        << "\" text-anchor=\"middle\">" << escape(panel.title) << "</text>\n";
    out << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\"" << inner << "\" height=\""
        << inner << "\" fill=\"none\" stroke=\"#888\"/>\n";

    const auto x = panel.xy.col(0), y = panel.xy.col(1);
    const double xlo = x.minCoeff(), xhi = x.maxCoeff(), ylo = y.minCoeff(), yhi = y.maxCoeff();
    const double clo = panel.color.size() ? panel.color.minCoeff() : 0.0;
    const double chi = panel.color.size() ? panel.color.maxCoeff() : 1.0;
    auto scale = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; };
    for (Index i = 0; i < panel.xy.rows(); ++i) {
      if (!std::isfinite(x(i)) || !std::isfinite(y(i))) continue;
      const double cx = ox + 5 + scale(x(i), xlo, xhi) * (inner - 10);
      const double cy = oy + 5 + (1.0 - scale(y(i), ylo, yhi)) * (inner - 10);
      const double t = i < panel.color.size() ? scale(panel.color(i), clo, chi) : 0.5;
      out << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"1.3\" fill=\"" << palette(t)
          << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_pairs_plot(const PairChartReport& report) {
  if (report.rows.empty()) throw InvalidArgument("svg_pairs_plot: no pairs");
  std::vector<ScatterPanel> panels;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    ScatterPanel p;
    char buf[96];
    std::snprintf(buf, sizeof buf, "mode %ld vs %ld (novelty %.2f)", static_cast<long>(report.base),
                  static_cast<long>(report.rows[i].partner), report.rows[i].novelty);
    p.title = buf;
    p.xy = report.scatter.at(i);
    if (report.truth.rows() == p.xy.rows()) p.color = report.truth.col(0);
    panels.push_back(std::move(p));
  }
  return svg_scatter_grid(panels, 5, "DMAP mode pairs");
}

std::string svg_spectrum_plot(const ReadoutSpectrum& spectrum) {
  if (spectrum.rows.empty()) throw InvalidArgument("svg_spectrum_plot: empty spectrum");
  Series s{"|L(n, s)|", {}, {}, false}, h{"|L(n, h)|", {}, {}, false};
  std::vector<double> xs, ys;
  for (const auto& r : spectrum.rows) {
    s.xs.push_back(r.one_minus_lambda);
    s.ys.push_back(r.coeff_mag_s);
    h.xs.push_back(r.one_minus_lambda);
    h.ys.push_back(r.coeff_mag_h);
    xs.push_back(r.one_minus_lambda);
    ys.push_back(r.coeff_mag_s);
    ys.push_back(r.coeff_mag_h);
  }
  return line_plot({s, h}, auto_axis(xs, false), auto_axis(ys, true), "DMAP readout coefficients",
                   "1 - lambda_n", "coefficient magnitude");
}

std::string svg_rank_plot(const RankReport& report) {
  if (report.rows.empty()) throw InvalidArgument("svg_rank_plot: empty rank report");
  Series t{"threshold", {}, {}}, st{"stable", {}, {}}, en{"entropy", {}, {}};
  std::vector<double> xs, ys;
  for (const auto& r : report.rows) {
    for (Series* s : {&t, &st, &en}) s->xs.push_back(r.beta);
    t.ys.push_back(static_cast<double>(r.threshold_rank));
    st.ys.push_back(r.stable_rank);
    en.ys.push_back(r.entropy_rank);
    xs.push_back(r.beta);
    ys.insert(ys.end(), {static_cast<double>(r.threshold_rank), r.stable_rank, r.entropy_rank});
  }
  std::string title = "Effective rank vs kernel scale";
  if (report.weyl_slope) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (entropy slope %.3f)", *report.weyl_slope);
    title += buf;
  }
  return line_plot({t, st, en}, auto_axis(xs, true), auto_axis(ys, true), title, "beta", "rank");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

}  // namespace chartbench
