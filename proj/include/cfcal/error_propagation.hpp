#pragma once

#include <string>
#include <vector>

#include "cfcal/cf_models.hpp"

namespace cfcal {

/// Per-vehicle error terms over t = 0..T. All closed forms in this module
/// assume unit time steps; callers with other sampling must resample first.
struct ErrorSeries {
    std::vector<double> eps_a, eps_v, eps_x;
    std::vector<double> r;  ///< model residuals
};

/// Speed error as the prefix sum of acceleration errors. Requires eps_a[0] = 0.
std::vector<double> speed_error_closed_form(const std::vector<double>& eps_a);

/// Position error as the weighted prefix sum with weight (t + 1 - t').
std::vector<double> position_error_closed_form(const std::vector<double>& eps_a);

struct SpeedMseDecomposition {
    double total = 0.0;        ///< equals mse_a + convolution + cross
    double mse_a = 0.0;
    double convolution = 0.0;  ///< (1/T) sum (T-t) eps_t^2
    double cross = 0.0;
};
SpeedMseDecomposition mse_speed_decomposition(const std::vector<double>& eps_a);

struct PositionMseDecomposition {
    double total = 0.0;  ///< equals leading + diagonal_correction + cross
    double leading = 0.0;              ///< ((T+1)^3 / T) * MSE^a
    double diagonal_correction = 0.0;  ///< brings the squared-term weight to its exact value
    double cross = 0.0;
};
PositionMseDecomposition mse_position_decomposition(const std::vector<double>& eps_a);

/// Propagates linear-model residuals through the platoon. `residuals[n][t]`
/// with residuals[0][*] = 0 and residuals[n][0] = 0. The returned eps_a
/// arrays equal the acceleration difference between a residual-perturbed and
/// a clean platoon simulation at dt = 1 with clamps disabled.
std::vector<std::vector<double>> multi_vehicle_error(
    const std::vector<std::vector<double>>& residuals, const LinearParams& k);

enum class FigureCase { InstantSingleVehicle, InstantMultiVehicle };

struct FigureRow {
    std::size_t vehicle;
    std::size_t t;
    double eps_a, eps_v, eps_x;
};

/// InstantSingleVehicle: one vehicle, eps_a[5] = 0.2, T = 20.
/// InstantMultiVehicle: four vehicles, r[1][1] = 5, T = 50, default linear
/// parameters (-0.053, 0.284, 0.918).
std::vector<FigureRow> figure_case_rows(FigureCase c);

void write_figure_csv(const std::string& path, const std::vector<FigureRow>& rows);

}  // namespace cfcal
