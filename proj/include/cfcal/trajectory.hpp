#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cfcal/config.hpp"

namespace cfcal {

enum class VehicleClass { Small, Large };

std::string to_string(VehicleClass c);
VehicleClass vehicle_class_from_string(const std::string& s);

/// One sample of a vehicle's kinematic record on the uniform time grid.
struct TrajectoryPoint {
    double t = 0.0;                 ///< seconds
    double x = 0.0;                 ///< longitudinal position, m
    std::optional<double> y;        ///< lateral position, m (drift detection only)
    double v = 0.0;                 ///< speed, m/s
    double a = 0.0;                 ///< acceleration, m/s^2
    std::optional<std::string> lane;
    std::optional<std::string> edge;
    std::optional<std::string> leader_id;
    bool cleaned = false;           ///< set when a drift point was reconstructed
};

struct Trajectory {
    std::string vehicle_id;
    VehicleClass vclass = VehicleClass::Small;
    double length = 4.5;            ///< vehicle length, m
    std::vector<TrajectoryPoint> points;

    double dt() const;              ///< sampling step, requires >= 2 points
    double front_t() const { return points.front().t; }
    double back_t() const { return points.back().t; }
};

struct CleaningConfig {
    double angle_threshold_deg = 30.0;  ///< interior angle below this flags a drift point
    int window = 5;                     ///< moving-average window, odd, >= 3

    void validate() const;
};

/// Column mapping from CSV header names to trajectory fields.
struct CsvSchema {
    std::string id = "id";
    std::string t = "t_sec";
    std::string position = "position";   ///< pre-computed longitudinal position
    std::string x_utm = "x_utm";
    std::string y_utm = "y_utm";
    std::string v = "v";
    std::string a = "a";
    std::string lane = "lane";
    std::string edge = "edge";
    std::string leader = "pre_id";
    std::string vclass = "class";
    std::string length = "length";
};

/// Per-edge reference line used to project (x_utm, y_utm) onto a 1-D
/// longitudinal coordinate. Loaded from a corridor config file with
/// `polyline = x1,y1; x2,y2; ...` and optional `offset` per [edge <id>] section.
struct CorridorMap {
    struct Edge {
        std::vector<std::pair<double, double>> polyline;
        double offset = 0.0;
        double length = 0.0;
    };
    std::map<std::string, Edge> edges;

    static CorridorMap load(const std::string& path);

    /// Arc length (plus edge offset) of the closest point on the edge's polyline.
    double project(const std::string& edge_id, double x, double y) const;
};

struct TrajectoryDataset {
    std::vector<Trajectory> vehicles;
    double dt = 0.0;

    const Trajectory* find(const std::string& vehicle_id) const;
};

/// Leader->follower chains with per-pair shared time windows.
struct PlatoonIndex {
    struct Chain {
        std::vector<std::string> vehicle_ids;  ///< front to back
    };
    std::vector<Chain> chains;
    /// Pairs rejected because x_leader > x_follower failed at some shared t,
    /// or the time overlap was empty. Each entry: (leader, follower, reason).
    std::vector<std::tuple<std::string, std::string, std::string>> excluded;
};

// -- Operations ------------------------------------------------------------

TrajectoryDataset load_trajectories(const std::string& path, const CsvSchema& schema = {},
                                    const CorridorMap* corridor = nullptr);

void write_trajectories(const std::string& path, const TrajectoryDataset& dataset,
                        bool cleaned_flag_column = false);

/// Indices of points whose interior angle between adjacent direction vectors
/// is below cfg.angle_threshold_deg (near-reversal spikes). Needs >= 3 points;
/// fewer yields the empty set. Zero-length direction vectors are never flagged.
std::set<std::size_t> detect_drift_points(const Trajectory& traj, const CleaningConfig& cfg);

/// Replaces the removed points by the mean of surviving neighbors inside the
/// smoothing window; falls back to linear interpolation between the nearest
/// surviving points when the window holds no survivor. Timestamps unchanged.
Trajectory reconstruct_points(const Trajectory& traj, const std::set<std::size_t>& removed,
                              const CleaningConfig& cfg);

/// Centered moving average on positions; boundary points use a truncated
/// symmetric window (radius shrinks so the mean stays centered). Timestamps
/// unchanged.
Trajectory smooth_moving_average(const Trajectory& traj, const CleaningConfig& cfg);

/// Backward differences: v_t = (x_t - x_{t-1})/dt, a_t = (v_t - v_{t-1})/dt.
/// Entries left undefined by the differencing are copied from the first
/// defined value so every series spans the full horizon.
Trajectory differentiate(const Trajectory& traj);

/// Full cleaning pass: drift detection, reconstruction, smoothing, differentiation.
struct CleaningDiagnostics {
    std::map<std::string, std::vector<std::size_t>> drift_points;  ///< per vehicle
};
TrajectoryDataset clean_dataset(const TrajectoryDataset& dataset, const CleaningConfig& cfg,
                                CleaningDiagnostics* diag = nullptr);

PlatoonIndex build_platoons(const TrajectoryDataset& dataset);

}  // namespace cfcal
