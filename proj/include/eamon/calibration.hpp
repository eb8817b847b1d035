#pragma once

#include <filesystem>
#include <span>

#include "eamon/pulse.hpp"

namespace eamon {

struct CalPoint {
  double mass_g = 0.0;
  double pressure = 0.0;  ///< normalized peak pressure
};

/// Linear mass-to-pressure relation P = slope_a * m + intercept_b, valid for the drive it
/// was fitted under.
struct CalibrationModel {
  double slope_a = 0.0;
  double intercept_b = 0.0;
  DriveConfig drive;

  double pressure_at(double mass_g) const noexcept { return slope_a * mass_g + intercept_b; }
};

/// Line through two points. Throws DegenerateMasses when the masses coincide.
CalibrationModel fit_two_point(const CalPoint& p1, const CalPoint& p2, const DriveConfig& drive = {});

/// Ordinary least squares over >= 2 distinct masses. Throws DegenerateMasses otherwise.
CalibrationModel fit_least_squares(std::span<const CalPoint> points, const DriveConfig& drive = {});

/// Inverts the model. Negative results are returned as-is. Throws ZeroSlope.
double estimate_mass(const CalibrationModel& model, double pressure);

/// Amplitude and frequency agree within a relative 1e-9.
bool drive_matches(const CalibrationModel& model, const DriveConfig& drive);

void write_calibration(const CalibrationModel& model, const std::filesystem::path& path);
CalibrationModel read_calibration(const std::filesystem::path& path);

}  // namespace eamon
