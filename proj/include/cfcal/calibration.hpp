#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfcal/cf_models.hpp"
#include "cfcal/measures.hpp"
#include "cfcal/optimizer.hpp"
#include "cfcal/simulation.hpp"
#include "cfcal/trajectory.hpp"

namespace cfcal {

enum class ObjectiveKind { MiC, MaC, BiC };
std::string to_string(ObjectiveKind k);
ObjectiveKind objective_kind_from_string(const std::string& s);

/// Cascade: each follower reads the simulated state of the vehicle ahead
/// (whole-trajectory rollout; the platoon head replays observed data).
/// TeacherForced: per-step prediction from observed states only.
enum class RolloutMode { Cascade, TeacherForced };

enum class ClassMode { Joint, PerClass };

/// Per-term scale divisors. Defaults of 1 leave the objectives exactly as
/// written; variance_normalization() fills them with observed-data variances
/// so unit choices stop mattering.
struct Normalization {
    double micro = 1.0;
    double travel_time = 1.0;
    double fuel = 1.0;
};

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::MiC;
    double w0_sys = 1.0;
    double w1_mac = 1.0;
    double w2_mac = 1.0;
    IntervalSpec intervals;
    Normalization normalization;
    RolloutMode rollout = RolloutMode::Cascade;
    FuelCoefficients fuel;
};

struct ParamBounds {
    std::vector<std::pair<double, double>> bounds;  ///< per parameter (lower, upper)

    void validate(ModelKind kind) const;
    /// Defaults wide enough to enclose every published parameter set shipped
    /// in data/published_params.ini.
    static ParamBounds defaults(ModelKind kind);
};

/// Observed platoons on a common grid; the unit the objectives consume.
struct CalibrationDataset {
    struct Platoon {
        Trajectory lead;
        std::vector<Trajectory> followers;  ///< front to back
    };
    std::vector<Platoon> platoons;
    double dt = 1.0;
    GapSemantics gap_semantics = GapSemantics::Center;

    static CalibrationDataset assemble(const TrajectoryDataset& ds, const PlatoonIndex& index);
    std::vector<VehicleClass> classes_present() const;
};

struct ObjectiveBreakdown {
    double micro = 0.0;        ///< acceleration MSE term (already weighted/normalized)
    double travel_time = 0.0;  ///< weighted travel-time term
    double fuel = 0.0;         ///< weighted fuel term
    double penalty = 0.0;      ///< collision penalty contribution
    double total() const { return micro + travel_time + fuel + penalty; }
};

struct CalibrationResult {
    ModelKind model = ModelKind::IDM;
    std::map<VehicleClass, CFParams> params;
    double objective = 0.0;
    ObjectiveBreakdown breakdown;
    std::size_t evaluations = 0;
    std::uint64_t seed = 0;
    std::vector<double> trace;  ///< best-so-far per generation, nonincreasing
    Normalization normalization;
    std::string fuel_coefficients_hash;
};

// -- Objectives ------------------------------------------------------------

/// Full platoon rollout under `spec`'s model parameters, with collisions
/// mapped to the ordered finite penalty 1e6 * (1 + fraction of horizon
/// remaining). Never throws for infeasible parameters.
double objective_mic(const ModelSpec& spec, const CalibrationDataset& data,
                     RolloutMode rollout = RolloutMode::Cascade,
                     ObjectiveBreakdown* breakdown = nullptr);

double objective_mac(const ModelSpec& spec, const CalibrationDataset& data,
                     const ObjectiveSpec& ospec, ObjectiveBreakdown* breakdown = nullptr);

double objective_bic(const ModelSpec& spec, const CalibrationDataset& data,
                     const ObjectiveSpec& ospec, ObjectiveBreakdown* breakdown = nullptr);

/// Dispatch on ospec.kind.
double evaluate_objective(const ModelSpec& spec, const CalibrationDataset& data,
                          const ObjectiveSpec& ospec, ObjectiveBreakdown* breakdown = nullptr);

/// Observed-data variances for normalizing the BiC terms.
Normalization variance_normalization(const CalibrationDataset& data, const ObjectiveSpec& ospec);

// -- Search ----------------------------------------------------------------

struct CalibrateOptions {
    std::size_t budget = 20000;
    std::uint64_t seed = 0;
    ClassMode class_mode = ClassMode::Joint;
    int threads = 1;
    std::size_t population = 0;  ///< 0 = auto
};

CalibrationResult calibrate(const CalibrationDataset& data, ModelKind model,
                            const ObjectiveSpec& ospec, const ParamBounds& bounds,
                            const CalibrateOptions& opts);

/// Deterministic result-file serialization (no timestamps; reruns with the
/// same seed and inputs are byte-identical).
void write_result(const std::string& path, const CalibrationResult& result);

/// Simulates every platoon under the given model and returns follower
/// trajectories on the observed grid. Used for report generation and
/// held-out evaluation.
std::vector<Trajectory> reconstruct_followers(const ModelSpec& spec,
                                              const CalibrationDataset& data,
                                              const SimConfig* override_cfg = nullptr);

/// Observed follower trajectories trimmed to the same grids as
/// reconstruct_followers output.
std::vector<Trajectory> observed_followers(const CalibrationDataset& data);

}  // namespace cfcal
