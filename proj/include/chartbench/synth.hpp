#pragma once

// Ground-truth Swiss roll: a uniformly sampled W x H sheet rolled isometrically
// onto an Archimedean spiral r(theta) = a + b * theta, parametrized by arc length.

#include <cstdint>
#include <functional>

#include "chartbench/types.hpp"

namespace chartbench {

struct SpiralParams {
  double inner_radius = 1.0;  // a
  double growth = 0.5;        // b, radius gained per radian

  void validate() const;
};

/// Intrinsic (s, h) coordinates of the sheet. Q is N x 2.
struct SheetChart {
  MatrixXd Q;
  double width = 60.0;
  double height = 10.0;
  std::uint64_t seed = 0;

  Index size() const { return Q.rows(); }
};

struct Dataset {
  MatrixXd X;  // N x 3
  SheetChart chart;
  SpiralParams spiral;

  Index size() const { return X.rows(); }
};

/// n i.i.d. uniform samples over [0, w] x [0, h]. The stream is std::mt19937_64
/// seeded with `seed`; each 64-bit draw x maps to (x >> 11) * 2^-53 in [0, 1),
/// s drawn before h for every row.
SheetChart sample_sheet(Index n, double w, double h, std::uint64_t seed);

/// Arc length of the spiral from angle 0 to theta (closed form; negative for theta < 0).
double spiral_arclength(const SpiralParams& spiral, double theta);

/// Angle whose arc length equals s, to |arclength - s| <= 1e-10 * scale.
double spiral_angle(const SpiralParams& spiral, double s, double scale);

Eigen::Vector3d roll_point(const SpiralParams& spiral, double s, double h, double scale);

Dataset roll(const SheetChart& chart, const SpiralParams& spiral);

/// Max over probe points of ||dX/ds| - 1|, ||dX/dh| - 1| and |<dX/ds, dX/dh>|,
/// using central differences with spacing `step`. `probes` is P x 2 of (s, h).
double verify_isometry(const std::function<Eigen::Vector3d(double, double)>& embed,
                       const MatrixXd& probes, double step);

/// Same check using the dataset's own spiral, probed at every chart point.
double verify_isometry(const Dataset& ds, double step);

}  // namespace chartbench
