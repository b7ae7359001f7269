#include "cfcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace cfcal {

namespace {
constexpr double kPenaltyScale = 1e6;

Trajectory series_to_trajectory(const VehicleSeries& s, double t0, double dt, VehicleClass vclass,
                                double length) {
    Trajectory out;
    out.vehicle_id = s.vehicle_id;
    out.vclass = vclass;
    out.length = length;
    out.points.resize(s.x.size());
    for (std::size_t k = 0; k < s.x.size(); ++k) {
        out.points[k].t = t0 + double(k) * dt;
        out.points[k].x = s.x[k];
        out.points[k].v = s.v[k];
        out.points[k].a = s.a[k];
    }
    return out;
}

SimConfig rollout_config(double dt, std::size_t horizon) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = horizon;
    cfg.min_speed = 0.0;
    cfg.min_gap_stop = 0.1;
    cfg.collision_policy = CollisionPolicy::Error;
    return cfg;
}

PlatoonScenario make_scenario(const CalibrationDataset::Platoon& p, const ModelSpec& spec) {
    PlatoonScenario sc;
    sc.lead = p.lead;
    sc.model = spec;
    for (const auto& f : p.followers) {
        FollowerInit init;
        init.vehicle_id = f.vehicle_id;
        init.vclass = f.vclass;
        init.length = f.length;
        init.x0 = f.points.front().x;
        init.v0 = f.points.front().v;
        sc.followers.push_back(init);
    }
    return sc;
}

double variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return s / double(xs.size());
}
}  // namespace

std::string to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::MiC: return "mic";
        case ObjectiveKind::MaC: return "mac";
        case ObjectiveKind::BiC: return "bic";
    }
    return "?";
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
    if (s == "mic") return ObjectiveKind::MiC;
    if (s == "mac") return ObjectiveKind::MaC;
    if (s == "bic") return ObjectiveKind::BiC;
    throw std::runtime_error("unknown objective '" + s + "' (expected mic|mac|bic)");
}

void ParamBounds::validate(ModelKind kind) const {
    if (bounds.size() != param_count(kind))
        throw std::runtime_error("bounds size mismatch for model " + to_string(kind));
    for (const auto& [lo, hi] : bounds)
        if (!(lo < hi)) throw std::runtime_error("each lower bound must be < upper bound");
}

ParamBounds ParamBounds::defaults(ModelKind kind) {
    switch (kind) {
        case ModelKind::Linear:
            return {{{-1.0, 0.5}, {-0.5, 3.0}, {-1.0, 6.5}}};
        case ModelKind::FVD:
            return {{{0.0, 0.5}, {0.0, 0.2}, {15.0, 40.0}, {5.0, 20.0}, {3.0, 12.0}}};
        case ModelKind::IDM:
            return {{{10.0, 30.0}, {0.2, 3.0}, {0.5, 6.0}, {1.0, 10.0}, {0.3, 3.5}}};
    }
    throw std::logic_error("unreachable");
}

CalibrationDataset CalibrationDataset::assemble(const TrajectoryDataset& ds,
                                                const PlatoonIndex& index) {
    CalibrationDataset out;
    out.dt = ds.dt;
    for (const auto& chain : index.chains) {
        std::vector<const Trajectory*> members;
        for (const auto& id : chain.vehicle_ids) {
            const Trajectory* t = ds.find(id);
            if (!t) throw std::runtime_error("platoon member '" + id + "' missing from dataset");
            members.push_back(t);
        }
        double t0 = members.front()->front_t();
        double t1 = members.front()->back_t();
        for (const auto* m : members) {
            t0 = std::max(t0, m->front_t());
            t1 = std::min(t1, m->back_t());
        }
        const auto horizon = static_cast<std::size_t>(std::floor((t1 - t0) / ds.dt + 1e-9));
        if (horizon < 2) continue;  // no usable overlap

        Platoon p;
        for (std::size_t i = 0; i < members.size(); ++i) {
            auto series = replay_observed(*members[i], ds.dt, horizon, t0);
            Trajectory trimmed =
                series_to_trajectory(series, t0, ds.dt, members[i]->vclass, members[i]->length);
            trimmed.vehicle_id = members[i]->vehicle_id;
            if (i == 0)
                p.lead = std::move(trimmed);
            else
                p.followers.push_back(std::move(trimmed));
        }
        out.platoons.push_back(std::move(p));
    }
    return out;
}

std::vector<VehicleClass> CalibrationDataset::classes_present() const {
    std::set<VehicleClass> seen;
    for (const auto& p : platoons)
        for (const auto& f : p.followers) seen.insert(f.vclass);
    return {seen.begin(), seen.end()};
}

namespace {

/// Raw acceleration MSE plus collision penalty; the shared core of MiC/BiC.
double micro_mse(const ModelSpec& spec, const CalibrationDataset& data, RolloutMode rollout,
                 double* penalty_out) {
    double sum = 0.0;
    std::size_t count = 0;
    double penalty = 0.0;
    const bool bumper = spec.gap_semantics == GapSemantics::Bumper;

    for (const auto& p : data.platoons) {
        const std::size_t T = p.lead.points.size() - 1;
        if (rollout == RolloutMode::TeacherForced) {
            for (std::size_t n = 0; n < p.followers.size(); ++n) {
                const Trajectory& lead = n == 0 ? p.lead : p.followers[n - 1];
                const Trajectory& ego = p.followers[n];
                const CFParams& params = spec.for_class(ego.vclass);
                for (std::size_t t = 1; t <= T; ++t) {
                    CFState st;
                    st.v_ego = ego.points[t - 1].v;
                    st.dv = lead.points[t - 1].v - ego.points[t - 1].v;
                    const double raw = lead.points[t - 1].x - ego.points[t - 1].x;
                    st.gap = bumper ? raw - lead.length : raw;
                    st.leader_length = bumper ? 0.0 : lead.length;
                    double pred;
                    try {
                        pred = cf_accel(st, params);
                    } catch (const std::domain_error&) {
                        penalty += kPenaltyScale;
                        continue;
                    }
                    const double d = pred - ego.points[t].a;
                    sum += d * d;
                    ++count;
                }
            }
            continue;
        }
        try {
            SimResult res = simulate_platoon(make_scenario(p, spec), rollout_config(data.dt, T));
            for (std::size_t n = 0; n < p.followers.size(); ++n) {
                for (std::size_t t = 1; t <= T; ++t) {
                    const double d = res.followers[n].a[t] - p.followers[n].points[t].a;
                    sum += d * d;
                    ++count;
                }
            }
        } catch (const CollisionError& e) {
            // ordered finite penalty: earlier collisions score worse
            penalty += kPenaltyScale *
                       (1.0 + double(e.horizon - e.step) / double(std::max<std::size_t>(e.horizon, 1)));
        }
    }
    if (penalty_out) *penalty_out = penalty;
    return count > 0 ? sum / double(count) : 0.0;
}

/// Weighted, normalized macro terms averaged over non-empty intervals.
void macro_terms(const ModelSpec& spec, const CalibrationDataset& data, const ObjectiveSpec& ospec,
                 double* tt_term, double* fuel_term, double* penalty_out) {
    *tt_term = 0.0;
    *fuel_term = 0.0;
    double penalty = 0.0;

    std::vector<Trajectory> obs, sim;
    for (const auto& p : data.platoons) {
        const std::size_t T = p.lead.points.size() - 1;
        try {
            SimResult res = simulate_platoon(make_scenario(p, spec), rollout_config(data.dt, T));
            const double t0 = p.lead.points.front().t;
            for (std::size_t n = 0; n < p.followers.size(); ++n) {
                obs.push_back(p.followers[n]);
                sim.push_back(series_to_trajectory(res.followers[n], t0, data.dt,
                                                   p.followers[n].vclass, p.followers[n].length));
            }
        } catch (const CollisionError& e) {
            penalty += kPenaltyScale *
                       (1.0 + double(e.horizon - e.step) / double(std::max<std::size_t>(e.horizon, 1)));
        }
    }
    if (penalty_out) *penalty_out = penalty;
    if (obs.empty()) return;

    MacroMeasures m_obs = aggregate_macro(obs, ospec.intervals, ospec.fuel);
    MacroMeasures m_sim = aggregate_macro(sim, ospec.intervals, ospec.fuel);

    double tt_sum = 0.0, fuel_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < m_obs.intervals.size(); ++i) {
        if (m_obs.intervals[i].vehicle_count == 0 || m_sim.intervals[i].vehicle_count == 0)
            continue;  // empty interval: skipped, not counted in the mean
        const double dT = m_obs.intervals[i].travel_time - m_sim.intervals[i].travel_time;
        const double de = m_obs.intervals[i].fuel_per_100km - m_sim.intervals[i].fuel_per_100km;
        tt_sum += ospec.w1_mac * dT * dT / ospec.normalization.travel_time;
        fuel_sum += ospec.w2_mac * de * de / ospec.normalization.fuel;
        ++counted;
    }
    if (counted > 0) {
        *tt_term = tt_sum / double(counted);
        *fuel_term = fuel_sum / double(counted);
    }
}

}  // namespace

double objective_mic(const ModelSpec& spec, const CalibrationDataset& data, RolloutMode rollout,
                     ObjectiveBreakdown* breakdown) {
    double penalty = 0.0;
    const double m = micro_mse(spec, data, rollout, &penalty);
    if (breakdown) *breakdown = {m, 0.0, 0.0, penalty};
    return m + penalty;
}

double objective_mac(const ModelSpec& spec, const CalibrationDataset& data,
                     const ObjectiveSpec& ospec, ObjectiveBreakdown* breakdown) {
    double tt = 0.0, fuel = 0.0, penalty = 0.0;
    macro_terms(spec, data, ospec, &tt, &fuel, &penalty);
    if (breakdown) *breakdown = {0.0, tt, fuel, penalty};
    return tt + fuel + penalty;
}

double objective_bic(const ModelSpec& spec, const CalibrationDataset& data,
                     const ObjectiveSpec& ospec, ObjectiveBreakdown* breakdown) {
    double tt = 0.0, fuel = 0.0, macro_penalty = 0.0;
    macro_terms(spec, data, ospec, &tt, &fuel, &macro_penalty);
    double micro_penalty = 0.0;
    const double m = micro_mse(spec, data, ospec.rollout, &micro_penalty);
    const double micro = ospec.w0_sys * m / ospec.normalization.micro;
    // the same rollout produces both penalties; count the collision once
    const double penalty = std::max(micro_penalty, macro_penalty);
    if (breakdown) *breakdown = {micro, tt, fuel, penalty};
    return micro + tt + fuel + penalty;
}

double evaluate_objective(const ModelSpec& spec, const CalibrationDataset& data,
                          const ObjectiveSpec& ospec, ObjectiveBreakdown* breakdown) {
    switch (ospec.kind) {
        case ObjectiveKind::MiC: return objective_mic(spec, data, ospec.rollout, breakdown);
        case ObjectiveKind::MaC: return objective_mac(spec, data, ospec, breakdown);
        case ObjectiveKind::BiC: return objective_bic(spec, data, ospec, breakdown);
    }
    throw std::logic_error("unreachable");
}

Normalization variance_normalization(const CalibrationDataset& data, const ObjectiveSpec& ospec) {
    Normalization n;
    std::vector<double> accels, times, fuels;
    for (const auto& p : data.platoons) {
        for (const auto& f : p.followers) {
            for (std::size_t t = 1; t < f.points.size(); ++t) accels.push_back(f.points[t].a);
            if (auto tt = traversal_time(f, ospec.intervals.entry_x, ospec.intervals.exit_x))
                times.push_back(*tt);
            auto fuel = vehicle_fuel(f, ospec.fuel, data.dt);
            if (fuel.per_100km) fuels.push_back(*fuel.per_100km);
        }
    }
    auto pick = [](const std::vector<double>& xs) {
        double v = variance(xs);
        return v > 1e-12 ? v : 1.0;
    };
    n.micro = pick(accels);
    n.travel_time = pick(times);
    n.fuel = pick(fuels);
    return n;
}

namespace {
CalibrationDataset filter_by_class(const CalibrationDataset& data, VehicleClass c) {
    CalibrationDataset out;
    out.dt = data.dt;
    out.gap_semantics = data.gap_semantics;
    for (const auto& p : data.platoons) {
        bool all = std::all_of(p.followers.begin(), p.followers.end(),
                               [c](const Trajectory& f) { return f.vclass == c; });
        if (all && !p.followers.empty()) out.platoons.push_back(p);
    }
    return out;
}

ModelSpec decode_joint(ModelKind model, GapSemantics gs,
                       const std::vector<VehicleClass>& classes, const std::vector<double>& x) {
    ModelSpec spec;
    spec.kind = model;
    spec.gap_semantics = gs;
    const std::size_t np = param_count(model);
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        std::vector<double> sub(x.begin() + ci * np, x.begin() + (ci + 1) * np);
        spec.params[classes[ci]] = from_vector(model, sub);
    }
    // classes absent from the data still need an entry; reuse the first block
    for (VehicleClass c : {VehicleClass::Small, VehicleClass::Large}) {
        if (!spec.params.count(c))
            spec.params[c] = from_vector(model, {x.begin(), x.begin() + np});
    }
    return spec;
}
}  // namespace

CalibrationResult calibrate(const CalibrationDataset& data, ModelKind model,
                            const ObjectiveSpec& ospec, const ParamBounds& bounds,
                            const CalibrateOptions& opts) {
    bounds.validate(model);
    if (data.platoons.empty()) throw std::runtime_error("calibration dataset has no platoons");

    auto classes = data.classes_present();
    if (classes.empty()) throw std::runtime_error("no followers in calibration dataset");

    CalibrationResult result;
    result.model = model;
    result.seed = opts.seed;
    result.normalization = ospec.normalization;
    result.fuel_coefficients_hash = ospec.fuel.source_hash;

    OptimizerOptions oopts;
    oopts.budget = opts.budget;
    oopts.seed = opts.seed;
    oopts.threads = opts.threads;
    oopts.population = opts.population;

    if (opts.class_mode == ClassMode::Joint) {
        std::vector<std::pair<double, double>> joint_bounds;
        for (std::size_t ci = 0; ci < classes.size(); ++ci)
            joint_bounds.insert(joint_bounds.end(), bounds.bounds.begin(), bounds.bounds.end());
        auto objective = [&](const std::vector<double>& x) {
            return evaluate_objective(decode_joint(model, data.gap_semantics, classes, x), data,
                                      ospec, nullptr);
        };
        auto opt = differential_evolution(objective, joint_bounds, oopts);
        ModelSpec best = decode_joint(model, data.gap_semantics, classes, opt.best);
        for (VehicleClass c : classes) result.params[c] = best.for_class(c);
        result.objective = evaluate_objective(best, data, ospec, &result.breakdown);
        result.evaluations = opt.evaluations;
        result.trace = std::move(opt.trace);
    } else {
        std::size_t per_class_budget = opts.budget / classes.size();
        ModelSpec best;
        best.kind = model;
        best.gap_semantics = data.gap_semantics;
        for (VehicleClass c : classes) {
            CalibrationDataset sub = filter_by_class(data, c);
            if (sub.platoons.empty())
                throw std::runtime_error("per-class mode: no single-class platoons for class " +
                                         to_string(c));
            auto objective = [&](const std::vector<double>& x) {
                return evaluate_objective(decode_joint(model, data.gap_semantics, {c}, x), sub,
                                          ospec, nullptr);
            };
            OptimizerOptions sub_opts = oopts;
            sub_opts.budget = per_class_budget;
            auto opt = differential_evolution(objective, bounds.bounds, sub_opts);
            best.params[c] = from_vector(model, opt.best);
            result.evaluations += opt.evaluations;
            result.trace.insert(result.trace.end(), opt.trace.begin(), opt.trace.end());
        }
        for (VehicleClass c : {VehicleClass::Small, VehicleClass::Large})
            if (!best.params.count(c)) best.params[c] = best.params.at(classes.front());
        for (VehicleClass c : classes) result.params[c] = best.for_class(c);
        result.objective = evaluate_objective(best, data, ospec, &result.breakdown);
    }

    if (!std::isfinite(result.objective))
        throw std::runtime_error("calibration produced a non-finite objective");
    if (result.breakdown.penalty >= kPenaltyScale && result.objective >= kPenaltyScale)
        throw std::runtime_error(
            "every probed parameter vector collided; revise the parameter bounds");
    return result;
}

void write_result(const std::string& path, const CalibrationResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "[result]\n";
    out << "model = " << to_string(result.model) << "\n";
    out << "objective = " << fmt(result.objective) << "\n";
    out << "micro_term = " << fmt(result.breakdown.micro) << "\n";
    out << "travel_time_term = " << fmt(result.breakdown.travel_time) << "\n";
    out << "fuel_term = " << fmt(result.breakdown.fuel) << "\n";
    out << "penalty_term = " << fmt(result.breakdown.penalty) << "\n";
    out << "evaluations = " << result.evaluations << "\n";
    out << "seed = " << result.seed << "\n";
    out << "norm_micro = " << fmt(result.normalization.micro) << "\n";
    out << "norm_travel_time = " << fmt(result.normalization.travel_time) << "\n";
    out << "norm_fuel = " << fmt(result.normalization.fuel) << "\n";
    if (!result.fuel_coefficients_hash.empty())
        out << "fuel_coefficients_hash = " << result.fuel_coefficients_hash << "\n";
    for (const auto& [cls, params] : result.params) {
        out << "\n[params " << to_string(cls) << "]\n";
        auto names = param_names(result.model);
        auto values = to_vector(params);
        for (std::size_t i = 0; i < names.size(); ++i)
            out << names[i] << " = " << fmt(values[i]) << "\n";
    }
    out << "\n[trace]\n";
    for (std::size_t i = 0; i < result.trace.size(); ++i)
        out << i << " = " << fmt(result.trace[i]) << "\n";
}

std::vector<Trajectory> reconstruct_followers(const ModelSpec& spec,
                                              const CalibrationDataset& data,
                                              const SimConfig* override_cfg) {
    std::vector<Trajectory> out;
    for (const auto& p : data.platoons) {
        const std::size_t T = p.lead.points.size() - 1;
        SimConfig cfg = override_cfg ? *override_cfg : rollout_config(data.dt, T);
        cfg.dt = data.dt;
        cfg.horizon = T;
        if (!override_cfg) cfg.collision_policy = CollisionPolicy::Clamp;  // report mode
        SimResult res = simulate_platoon(make_scenario(p, spec), cfg);
        const double t0 = p.lead.points.front().t;
        for (std::size_t n = 0; n < p.followers.size(); ++n)
            out.push_back(series_to_trajectory(res.followers[n], t0, data.dt,
                                               p.followers[n].vclass, p.followers[n].length));
    }
    return out;
}

std::vector<Trajectory> observed_followers(const CalibrationDataset& data) {
    std::vector<Trajectory> out;
    for (const auto& p : data.platoons)
        for (const auto& f : p.followers) out.push_back(f);
    return out;
}

}  // namespace cfcal
