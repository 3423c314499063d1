#include "chartbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "chartbench/errors.hpp"

namespace chartbench {

namespace {

double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Antiderivative of sqrt(r^2 + b^2) with respect to r.
double arclength_primitive(double r, double b) {
  const double root = std::sqrt(r * r + b * b);
  return 0.5 * r * root + 0.5 * b * b * std::log(r + root);
}

}  // namespace

void SpiralParams::validate() const {
  if (!(inner_radius > 0) || !(growth > 0))
    throw InvalidArgument("spiral parameters a and b must be strictly positive");
}

SheetChart sample_sheet(Index n, double w, double h, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample_sheet: n must be >= 1");
  if (!(w > 0) || !(h > 0)) throw InvalidArgument("sample_sheet: w and h must be positive");
  SheetChart chart;
  chart.Q.resize(n, 2);
  chart.width = w;
  chart.height = h;
  chart.seed = seed;
  std::mt19937_64 gen(seed);
  for (Index i = 0; i < n; ++i) {
    chart.Q(i, 0) = w * unit_uniform(gen);
    chart.Q(i, 1) = h * unit_uniform(gen);
  }
  return chart;
}

double spiral_arclength(const SpiralParams& spiral, double theta) {
  const double a = spiral.inner_radius;
  const double b = spiral.growth;
  return (arclength_primitive(a + b * theta, b) - arclength_primitive(a, b)) / b;
}

double spiral_angle(const SpiralParams& spiral, double s, double scale) {
  spiral.validate();
  const double a = spiral.inner_radius;
  const double b = spiral.growth;
  if (s == 0.0) return 0.0;

  double lo = s > 0 ? 0.0 : s / b;
  double hi = s > 0 ? s / std::sqrt(a * a + b * b) : 0.0;
  double theta = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = spiral_arclength(spiral, theta) - s;
    if (f > 0)
      hi = theta;
    else
      lo = theta;
    const double r = a + b * theta;
    double next = theta - f / std::sqrt(r * r + b * b);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - theta);
    theta = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(theta)))
      break;
  }
  const double residual = std::abs(spiral_arclength(spiral, theta) - s);
  if (residual > 1e-10 * std::max(scale, std::abs(s)))
    throw NumericalError("spiral_angle: arc-length inversion did not converge");
  return theta;
}

Eigen::Vector3d roll_point(const SpiralParams& spiral, double s, double h, double scale) {
  const double theta = spiral_angle(spiral, s, scale);
  const double r = spiral.inner_radius + spiral.growth * theta;
  return {r * std::cos(theta), r * std::sin(theta), h};
}

Dataset roll(const SheetChart& chart, const SpiralParams& spiral) {
  spiral.validate();
  Dataset ds;
  ds.chart = chart;
  ds.spiral = spiral;
  ds.X.resize(chart.size(), 3);
  for (Index i = 0; i < chart.size(); ++i)
    ds.X.row(i) = roll_point(spiral, chart.Q(i, 0), chart.Q(i, 1), chart.width).transpose();
  return ds;
}

double verify_isometry(const std::function<Eigen::Vector3d(double, double)>& embed,
                       const MatrixXd& probes, double step) {
  if (!(step > 0)) throw InvalidArgument("verify_isometry: step must be positive");
  if (probes.cols() != 2) throw InvalidArgument("verify_isometry: probes must be P x 2");
  double worst = 0.0;
  for (Index i = 0; i < probes.rows(); ++i) {
    const double s = probes(i, 0);
    const double h = probes(i, 1);
    const double s_hi = s + step, s_lo = s - step;
    const double h_hi = h + step, h_lo = h - step;
    const Eigen::Vector3d ds = (embed(s_hi, h) - embed(s_lo, h)) / (s_hi - s_lo);
    const Eigen::Vector3d dh = (embed(s, h_hi) - embed(s, h_lo)) / (h_hi - h_lo);
    worst = std::max({worst, std::abs(ds.norm() - 1.0), std::abs(dh.norm() - 1.0),
                      std::abs(ds.dot(dh))});
  }
  return worst;
}

double verify_isometry(const Dataset& ds, double step) {
  const double scale = ds.chart.width;
  const SpiralParams spiral = ds.spiral;
  return verify_isometry(
      [&](double s, double h) { return roll_point(spiral, s, h, scale); }, ds.chart.Q, step);
}

}  // namespace chartbench
