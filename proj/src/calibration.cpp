#include "eamon/calibration.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <string>

#include "eamon/error.hpp"
#include "eamon/keyvalue.hpp"

namespace eamon {

namespace {

void check_point(const CalPoint& p) {
  if (!(p.mass_g > 0.0) || !std::isfinite(p.mass_g) || !std::isfinite(p.pressure)) {
    throw Error(Errc::InvalidArgument,
                fmt::format("calibration point ({} g, {}) needs a positive mass and a finite pressure", p.mass_g,
                            p.pressure));
  }
}

}  // namespace

CalibrationModel fit_two_point(const CalPoint& p1, const CalPoint& p2, const DriveConfig& drive) {
  check_point(p1);
  check_point(p2);
  if (p1.mass_g == p2.mass_g) {
    throw Error(Errc::DegenerateMasses, fmt::format("both calibration points have mass {} g", p1.mass_g));
  }
  CalibrationModel model;
  model.slope_a = (p2.pressure - p1.pressure) / (p2.mass_g - p1.mass_g);
  model.intercept_b = p1.pressure - model.slope_a * p1.mass_g;
  // Anchoring on the lighter point makes the fit independent of argument order.
  if (p2.mass_g < p1.mass_g) model.intercept_b = p2.pressure - model.slope_a * p2.mass_g;
  model.drive = drive;
  return model;
}

CalibrationModel fit_least_squares(std::span<const CalPoint> points, const DriveConfig& drive) {
  if (points.size() < 2) throw Error(Errc::DegenerateMasses, "least squares needs at least two points");
  for (const CalPoint& p : points) check_point(p);
  const double n = static_cast<double>(points.size());
  double mean_m = 0.0, mean_p = 0.0;
  for (const CalPoint& p : points) {
    mean_m += p.mass_g;
    mean_p += p.pressure;
  }
  mean_m /= n;
  mean_p /= n;
  // Centred sums keep the normal equations well conditioned.
  double sxx = 0.0, sxy = 0.0;
  for (const CalPoint& p : points) {
    sxx += (p.mass_g - mean_m) * (p.mass_g - mean_m);
    sxy += (p.mass_g - mean_m) * (p.pressure - mean_p);
  }
  bool distinct = false;
  for (const CalPoint& p : points) distinct = distinct || p.mass_g != points.front().mass_g;
  if (!distinct || sxx == 0.0) throw Error(Errc::DegenerateMasses, "least squares needs two distinct masses");

  // Two distinct masses: the exact line through them, identical to fit_two_point.
  if (points.size() == 2) return fit_two_point(points[0], points[1], drive);

  CalibrationModel model;
  model.slope_a = sxy / sxx;
  model.intercept_b = mean_p - model.slope_a * mean_m;
  model.drive = drive;
  return model;
}

double estimate_mass(const CalibrationModel& model, double pressure) {
  if (model.slope_a == 0.0) throw Error(Errc::ZeroSlope, "calibration slope is zero; model is not invertible");
  return (pressure - model.intercept_b) / model.slope_a;
}

bool drive_matches(const CalibrationModel& model, const DriveConfig& drive) {
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); };
  return close(model.drive.amplitude_v, drive.amplitude_v) && close(model.drive.frequency_hz, drive.frequency_hz);
}

void write_calibration(const CalibrationModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out << "# P = slope_a * mass_g + intercept_b\n";
  out << fmt::format("slope_a = {:.17g}\n", model.slope_a);
  out << fmt::format("intercept_b = {:.17g}\n", model.intercept_b);
  out << fmt::format("amplitude_v = {:.17g}\n", model.drive.amplitude_v);
  out << fmt::format("frequency_hz = {:.17g}\n", model.drive.frequency_hz);
  if (!out) throw Error(Errc::IoFailure, "write to " + path.string() + " failed");
}

CalibrationModel read_calibration(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  CalibrationModel model;
  model.slope_a = kv.get_double("slope_a");
  model.intercept_b = kv.get_double("intercept_b");
  model.drive.amplitude_v = kv.get_double("amplitude_v");
  model.drive.frequency_hz = kv.get_double("frequency_hz");
  return model;
}

}  // namespace eamon
