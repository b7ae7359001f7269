#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfcal/cf_models.hpp"
#include "cfcal/trajectory.hpp"

namespace cfcal {

enum class CollisionPolicy { Error, Clamp };

struct SimConfig {
    double dt = 1.0;
    std::size_t horizon = 0;  ///< number of steps T; arrays span 0..T
    double min_speed = 0.0;
    double min_gap_stop = 0.1;
    CollisionPolicy collision_policy = CollisionPolicy::Error;

    /// Disables the speed clamp and collision handling; used where the
    /// closed-form analyses apply (they assume unconstrained dynamics).
    static SimConfig unconstrained(double dt, std::size_t horizon) {
        SimConfig c;
        c.dt = dt;
        c.horizon = horizon;
        c.min_speed = -std::numeric_limits<double>::infinity();
        c.min_gap_stop = -std::numeric_limits<double>::infinity();
        c.collision_policy = CollisionPolicy::Clamp;
        return c;
    }
};

struct FollowerInit {
    std::string vehicle_id;
    VehicleClass vclass = VehicleClass::Small;
    double length = 4.5;
    double x0 = 0.0;
    double v0 = 0.0;
};

struct PlatoonScenario {
    Trajectory lead;                  ///< exogenous, replayed
    std::vector<FollowerInit> followers;  ///< front to back
    ModelSpec model;
    /// Optional acceleration residuals, one series per follower indexed by
    /// step; added to the model acceleration at each step. Empty = none.
    std::vector<std::vector<double>> accel_residuals;

    void validate() const;
};

struct VehicleSeries {
    std::string vehicle_id;
    std::vector<double> x, v, a;  ///< length horizon + 1
};

struct SimResult {
    VehicleSeries lead;
    std::vector<VehicleSeries> followers;
    std::vector<std::pair<std::size_t, std::size_t>> clamp_events;      ///< (follower, step)
    std::vector<std::pair<std::size_t, std::size_t>> collision_events;  ///< (follower, step)
};

class CollisionError : public std::runtime_error {
public:
    CollisionError(std::string leader, std::string follower, std::size_t step,
                   std::size_t horizon);
    std::string leader_id, follower_id;
    std::size_t step;
    std::size_t horizon;
};

/// Resamples observed x, v, a onto the grid start_t + k*dt, k = 0..horizon.
/// Exact when the grids coincide; linear interpolation otherwise. Throws when
/// the horizon exceeds the trajectory span.
VehicleSeries replay_observed(const Trajectory& traj, double dt, std::size_t horizon,
                              double start_t);

/// Rolls the platoon forward: lead replays its observed trajectory, each
/// follower applies the car-following law to the previous vehicle's t-1
/// state, then updates speed before position (semi-implicit step).
SimResult simulate_platoon(const PlatoonScenario& sc, const SimConfig& cfg);

}  // namespace cfcal
