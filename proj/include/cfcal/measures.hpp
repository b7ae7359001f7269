#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cfcal/trajectory.hpp"

namespace cfcal {

/// VT-Micro style regression coefficients: exponent of a degree-3 bivariate
/// polynomial in speed and acceleration, one matrix per acceleration regime.
/// v_scale/a_scale convert the SI inputs (m/s, m/s^2) into the units the
/// coefficient set was fitted in.
struct FuelCoefficients {
    std::array<std::array<double, 4>, 4> accel{};  ///< a >= 0 regime
    std::array<std::array<double, 4>, 4> decel{};  ///< a <  0 regime
    double v_scale = 1.0;
    double a_scale = 1.0;
    std::string source_path;  ///< provenance, recorded in reports
    std::string source_hash;

    static FuelCoefficients all_zero();
    /// CSV file: 8 data rows x 4 columns (accel matrix rows then decel matrix
    /// rows, row = speed power m, column = acceleration power p); unit scales
    /// come from `# v_scale=` / `# a_scale=` comment lines.
    static FuelCoefficients load(const std::string& path);
};

/// Interval partition of the recording horizon plus the spatial segment used
/// for traversal. A vehicle belongs to the interval containing its
/// segment-entry time.
struct IntervalSpec {
    std::vector<double> boundaries;  ///< Omega + 2 ascending times
    double entry_x = 0.0;
    double exit_x = 0.0;

    void validate() const;
    std::size_t interval_count() const { return boundaries.size() - 1; }
    /// Index of the interval containing t, or nullopt when outside the horizon.
    std::optional<std::size_t> interval_of(double t) const;
};

struct MacroMeasures {
    struct Interval {
        double travel_time = 0.0;       ///< s, mean over member vehicles
        double fuel_per_100km = 0.0;    ///< L/100km, mean over member vehicles
        std::size_t vehicle_count = 0;
    };
    std::vector<Interval> intervals;
    std::vector<std::string> excluded_vehicles;  ///< never completed the segment
};

// -- Operations ------------------------------------------------------------

/// Mean squared elementwise difference. Throws on length mismatch.
double mse(const std::vector<double>& obs, const std::vector<double>& sim);

/// Segment traversal time with linearly interpolated crossing times.
/// nullopt when the vehicle never reaches exit_x (caller reports exclusion).
std::optional<double> traversal_time(const Trajectory& traj, double entry_x, double exit_x);

/// Mean displacement rate (x_{t2} - x_{t1}) / (t2 - t1).
double eq_mean_rate(const Trajectory& traj, double t1, double t2);

/// Instantaneous fuel rate, L/s. Strictly positive (exponential form).
double fuel_rate(double v, double a, const FuelCoefficients& c);

struct FuelTotal {
    double liters = 0.0;
    std::optional<double> per_100km;  ///< empty when traversed distance is zero
};

/// Rectangle-rule total over the sample points; per-distance uses the x span.
FuelTotal vehicle_fuel(const Trajectory& traj, const FuelCoefficients& c, double dt);

MacroMeasures aggregate_macro(const std::vector<Trajectory>& trajs, const IntervalSpec& spec,
                              const FuelCoefficients& c);

}  // namespace cfcal
