#include "cfcal/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cfcal {

void PlatoonScenario::validate() const {
    if (lead.points.size() < 2) throw std::runtime_error("lead trajectory needs >= 2 points");
    double prev_x = lead.points.front().x;
    for (const auto& f : followers) {
        if (f.x0 >= prev_x)
            throw std::runtime_error("initial positions must strictly decrease along the platoon (" +
                                     f.vehicle_id + ")");
        if (f.v0 < 0.0)
            throw std::runtime_error("negative initial speed for " + f.vehicle_id);
        prev_x = f.x0;
    }
    if (!accel_residuals.empty() && accel_residuals.size() != followers.size())
        throw std::runtime_error("accel_residuals must have one series per follower");
}

CollisionError::CollisionError(std::string leader, std::string follower, std::size_t step_,
                               std::size_t horizon_)
    : std::runtime_error("collision between " + leader + " and " + follower + " at step " +
                         std::to_string(step_)),
      leader_id(std::move(leader)),
      follower_id(std::move(follower)),
      step(step_),
      horizon(horizon_) {}

VehicleSeries replay_observed(const Trajectory& traj, double dt, std::size_t horizon,
                              double start_t) {
    const auto& pts = traj.points;
    if (pts.size() < 2) throw std::runtime_error("replay needs >= 2 points");
    const double end_t = start_t + double(horizon) * dt;
    if (start_t < pts.front().t - 1e-9 || end_t > pts.back().t + 1e-9)
        throw std::runtime_error("horizon exceeds trajectory span of vehicle " + traj.vehicle_id);

    VehicleSeries out;
    out.vehicle_id = traj.vehicle_id;
    out.x.resize(horizon + 1);
    out.v.resize(horizon + 1);
    out.a.resize(horizon + 1);
    std::size_t j = 0;
    for (std::size_t k = 0; k <= horizon; ++k) {
        const double t = start_t + double(k) * dt;
        while (j + 1 < pts.size() && pts[j + 1].t <= t + 1e-12) ++j;
        if (j + 1 >= pts.size() || std::abs(pts[j].t - t) < 1e-9) {
            out.x[k] = pts[j].x;
            out.v[k] = pts[j].v;
            out.a[k] = pts[j].a;
        } else {
            const double w = (t - pts[j].t) / (pts[j + 1].t - pts[j].t);
            out.x[k] = (1 - w) * pts[j].x + w * pts[j + 1].x;
            out.v[k] = (1 - w) * pts[j].v + w * pts[j + 1].v;
            out.a[k] = (1 - w) * pts[j].a + w * pts[j + 1].a;
        }
    }
    return out;
}

SimResult simulate_platoon(const PlatoonScenario& sc, const SimConfig& cfg) {
    sc.validate();
    if (cfg.dt <= 0.0 || cfg.horizon < 1)
        throw std::runtime_error("sim config requires dt > 0 and horizon >= 1");
    const std::size_t T = cfg.horizon;

    SimResult res;
    res.lead = replay_observed(sc.lead, cfg.dt, T, sc.lead.front_t());

    res.followers.resize(sc.followers.size());
    for (std::size_t n = 0; n < sc.followers.size(); ++n) {
        auto& s = res.followers[n];
        s.vehicle_id = sc.followers[n].vehicle_id;
        s.x.assign(T + 1, 0.0);
        s.v.assign(T + 1, 0.0);
        s.a.assign(T + 1, 0.0);
        s.x[0] = sc.followers[n].x0;
        s.v[0] = sc.followers[n].v0;
    }

    const bool bumper = sc.model.gap_semantics == GapSemantics::Bumper;

    for (std::size_t t = 1; t <= T; ++t) {
        // front to back; vehicle n reads vehicle n-1's state at t-1 only
        for (std::size_t n = 0; n < sc.followers.size(); ++n) {
            const VehicleSeries& lead = n == 0 ? res.lead : res.followers[n - 1];
            const double lead_len = n == 0 ? sc.lead.length : sc.followers[n - 1].length;
            VehicleSeries& ego = res.followers[n];
            const CFParams& params = sc.model.for_class(sc.followers[n].vclass);

            CFState st;
            st.v_ego = ego.v[t - 1];
            st.dv = lead.v[t - 1] - ego.v[t - 1];
            const double raw_gap = lead.x[t - 1] - ego.x[t - 1];
            st.gap = bumper ? raw_gap - lead_len : raw_gap;
            st.leader_length = bumper ? 0.0 : lead_len;

            double acc;
            if (st.gap <= 0.0 && sc.model.kind == ModelKind::IDM) {
                if (cfg.collision_policy == CollisionPolicy::Error)
                    throw CollisionError(lead.vehicle_id, ego.vehicle_id, t, T);
                acc = 0.0;
            } else {
                acc = cf_accel(st, params);
            }
            if (!sc.accel_residuals.empty() && t < sc.accel_residuals[n].size())
                acc += sc.accel_residuals[n][t];

            double v_new = ego.v[t - 1] + acc * cfg.dt;
            if (v_new < cfg.min_speed) {
                v_new = cfg.min_speed;
                res.clamp_events.emplace_back(n, t);
            }
            double x_new = ego.x[t - 1] + v_new * cfg.dt;

            const double new_gap = (lead.x[t] - x_new) - (bumper ? lead_len : 0.0);
            if (new_gap <= cfg.min_gap_stop) {
                if (cfg.collision_policy == CollisionPolicy::Error)
                    throw CollisionError(lead.vehicle_id, ego.vehicle_id, t, T);
                // follower stops at min_gap_stop behind its leader
                x_new = lead.x[t] - cfg.min_gap_stop - (bumper ? lead_len : 0.0);
                x_new = std::min(x_new, ego.x[t - 1] + v_new * cfg.dt);
                v_new = (x_new - ego.x[t - 1]) / cfg.dt;
                res.collision_events.emplace_back(n, t);
            }
            ego.a[t] = acc;
            ego.v[t] = v_new;
            ego.x[t] = x_new;
        }
    }
    return res;
}

}  // namespace cfcal
