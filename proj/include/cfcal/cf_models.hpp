#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cfcal/config.hpp"
#include "cfcal/trajectory.hpp"

namespace cfcal {

enum class ModelKind { Linear, FVD, IDM };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

/// Follower state as seen by a car-following law. `gap` is the positive
/// spacing to the leader (leader position - ego position); `dv` is
/// v_leader - v_ego. The linear law internally uses the signed spacing
/// ego - leader = -gap.
struct CFState {
    double v_ego = 0.0;
    double gap = 0.0;
    double dv = 0.0;
    double leader_length = 0.0;
};

struct LinearParams {
    double k1 = 0.0;  ///< spacing gain, 1/s^2
    double k2 = 0.0;  ///< relative-speed gain, 1/s
    double k3 = 0.0;  ///< constant term, m/s^2
};

struct FVDParams {
    double k = 0.0;       ///< relaxation gain toward the optimal velocity, 1/s
    double lambda = 0.0;  ///< relative-speed gain, 1/s
    double V0 = 1.0;      ///< optimal-velocity scale, m/s
    double b = 1.0;       ///< spacing scale, m
    double beta = 0.0;    ///< dimensionless offset
};

struct IDMParams {
    double v_f = 1.0;     ///< free-flow speed, m/s
    double a_max = 1.0;   ///< maximum acceleration, m/s^2
    double b_comf = 1.0;  ///< comfortable deceleration, m/s^2
    double S0 = 0.0;      ///< minimum spacing, m
    double t0 = 0.0;      ///< desired time headway, s
};

using CFParams = std::variant<LinearParams, FVDParams, IDMParams>;

/// Whether gap values fed to the laws are center-to-center or already
/// bumper-to-bumper. With bumper gaps the FVD spacing term drops the
/// leader length (it is already excluded).
enum class GapSemantics { Center, Bumper };

/// Parameter set per vehicle class for one model kind.
struct ModelSpec {
    ModelKind kind = ModelKind::IDM;
    std::map<VehicleClass, CFParams> params;
    GapSemantics gap_semantics = GapSemantics::Center;

    const CFParams& for_class(VehicleClass c) const;

    static ModelSpec from_config(const Config& cfg, const std::string& model,
                                 const std::string& method = "");
};

// -- Acceleration laws (pure, no clamping) ---------------------------------

double linear_accel(const CFState& s, const LinearParams& p);

double optimal_velocity(double gap, double leader_length, const FVDParams& p);

double fvd_accel(const CFState& s, const FVDParams& p);

double idm_desired_gap(double v, double dv, const IDMParams& p);

/// Throws std::domain_error when s.gap <= 0; the caller decides collision
/// semantics.
double idm_accel(const CFState& s, const IDMParams& p);

/// Dispatch on the stored alternative.
double cf_accel(const CFState& s, const CFParams& p);

/// Parameter vector encoding used by the calibration search.
std::vector<double> to_vector(const CFParams& p);
CFParams from_vector(ModelKind kind, const std::vector<double>& v);
std::size_t param_count(ModelKind kind);
std::vector<std::string> param_names(ModelKind kind);

}  // namespace cfcal
