#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfcal/calibration.hpp"

using namespace cfcal;

namespace {

// stable spacing law: equilibrium gap k3 / k1 = 10 m, inside the default bounds
const LinearParams kTruth{-0.09, 0.6, -0.9};

Trajectory varying_speed_lead(double dt, std::size_t steps) {
    Trajectory lead;
    lead.vehicle_id = "lead";
    double x = 500.0, v = 10.0;
    for (std::size_t k = 0; k <= steps; ++k) {
        TrajectoryPoint p;
        p.t = double(k) * dt;
        v = 10.0 + 2.0 * std::sin(0.15 * double(k));
        if (k > 0) x += v * dt;
        p.x = x;
        p.v = v;
        lead.points.push_back(p);
    }
    return lead;
}

SimConfig observed_rollout(double dt, std::size_t horizon) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = horizon;
    cfg.min_speed = 0.0;
    cfg.min_gap_stop = 0.1;
    cfg.collision_policy = CollisionPolicy::Error;
    return cfg;
}

/// Simulates followers under `truth` and packages the result as observed data.
CalibrationDataset synthetic_dataset(const CFParams& truth, ModelKind kind,
                                     std::size_t n_followers = 2, std::size_t T = 60) {
    ModelSpec spec;
    spec.kind = kind;
    spec.params[VehicleClass::Small] = truth;

    PlatoonScenario sc;
    sc.lead = varying_speed_lead(1.0, T);
    for (std::size_t n = 1; n <= n_followers; ++n)
        sc.followers.push_back(
            {"f" + std::to_string(n), VehicleClass::Small, 4.5, 500.0 - 12.0 * double(n), 10.0});
    sc.model = spec;

    auto res = simulate_platoon(sc, observed_rollout(1.0, T));

    CalibrationDataset data;
    data.dt = 1.0;
    CalibrationDataset::Platoon p;
    p.lead = sc.lead;
    for (std::size_t n = 0; n < n_followers; ++n) {
        Trajectory f;
        f.vehicle_id = res.followers[n].vehicle_id;
        for (std::size_t k = 0; k <= T; ++k) {
            TrajectoryPoint pt;
            pt.t = double(k);
            pt.x = res.followers[n].x[k];
            pt.v = res.followers[n].v[k];
            pt.a = res.followers[n].a[k];
            f.points.push_back(pt);
        }
        p.followers.push_back(std::move(f));
    }
    data.platoons.push_back(std::move(p));
    return data;
}

ModelSpec spec_of(const CFParams& p, ModelKind kind) {
    ModelSpec s;
    s.kind = kind;
    s.params[VehicleClass::Small] = p;
    s.params[VehicleClass::Large] = p;
    return s;
}

ObjectiveSpec interval_objective() {
    ObjectiveSpec o;
    o.kind = ObjectiveKind::BiC;
    o.intervals.boundaries = {0.0, 30.0, 60.0};
    o.intervals.entry_x = 480.0;
    o.intervals.exit_x = 900.0;
    o.fuel = FuelCoefficients::all_zero();
    return o;
}

}  // namespace

TEST_CASE("differential evolution on a shifted sphere") {
    auto f = [](const std::vector<double>& x) {
        double s = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) {
            double c = x[d] - (3.0 + double(d));
            s += c * c;
        }
        return s;
    };
    std::vector<std::pair<double, double>> bounds(4, {-10.0, 10.0});
    OptimizerOptions opts;
    opts.budget = 6000;
    opts.seed = 7;
    auto res = differential_evolution(f, bounds, opts);
    CHECK(res.best_value < 1e-10);
    for (std::size_t d = 0; d < 4; ++d)
        CHECK(res.best[d] == doctest::Approx(3.0 + double(d)).epsilon(1e-4));
    CHECK(res.evaluations <= opts.budget);

    SUBCASE("best-so-far trace never increases") {
        for (std::size_t i = 1; i < res.trace.size(); ++i)
            CHECK(res.trace[i] <= res.trace[i - 1]);
    }
    SUBCASE("deterministic for a fixed seed") {
        auto res2 = differential_evolution(f, bounds, opts);
        CHECK(res2.best == res.best);
        CHECK(res2.trace == res.trace);
    }
    SUBCASE("threaded evaluation changes nothing") {
        auto opts4 = opts;
        opts4.threads = 4;
        auto res4 = differential_evolution(f, bounds, opts4);
        CHECK(res4.best == res.best);
        CHECK(res4.trace == res.trace);
    }
    SUBCASE("iterates stay inside the bounds") {
        std::vector<std::pair<double, double>> tight(2, {0.5, 1.5});
        auto probe = [&tight](const std::vector<double>& x) {
            for (std::size_t d = 0; d < x.size(); ++d) {
                REQUIRE(x[d] >= tight[d].first);
                REQUIRE(x[d] <= tight[d].second);
            }
            return x[0] + x[1];
        };
        OptimizerOptions o2;
        o2.budget = 500;
        auto r = differential_evolution(probe, tight, o2);
        CHECK(r.best_value >= 1.0);
    }
    SUBCASE("budget below the population size is rejected") {
        OptimizerOptions small;
        small.budget = 3;
        CHECK_THROWS_AS(differential_evolution(f, bounds, small), std::runtime_error);
    }
}

TEST_CASE("objectives vanish at the generating parameters") {
    auto data = synthetic_dataset(kTruth, ModelKind::Linear);
    auto spec = spec_of(kTruth, ModelKind::Linear);

    CHECK(objective_mic(spec, data, RolloutMode::Cascade) < 1e-10);
    CHECK(objective_mic(spec, data, RolloutMode::TeacherForced) < 1e-10);

    auto ospec = interval_objective();
    CHECK(objective_mac(spec, data, ospec) < 1e-10);
    CHECK(objective_bic(spec, data, ospec) < 1e-10);

    SUBCASE("IDM data reproduces as well") {
        IDMParams idm{22.667, 0.494, 2.976, 3.972, 1.127};
        auto d2 = synthetic_dataset(CFParams{idm}, ModelKind::IDM);
        CHECK(objective_mic(spec_of(CFParams{idm}, ModelKind::IDM), d2) < 1e-10);
    }
    SUBCASE("wrong parameters score worse") {
        auto off = spec_of(LinearParams{-0.09, 0.6, -0.5}, ModelKind::Linear);
        CHECK(objective_mic(off, data) > 1e-4);
    }
}

TEST_CASE("combined objective reduces to its parts") {
    auto data = synthetic_dataset(kTruth, ModelKind::Linear);
    auto probe = spec_of(LinearParams{-0.2, 0.9, -0.5}, ModelKind::Linear);
    auto ospec = interval_objective();
    ospec.w0_sys = 0.4;
    ospec.normalization.micro = 2.5;

    SUBCASE("zero macro weights leave the weighted micro term") {
        auto o2 = ospec;
        o2.w1_mac = 0.0;
        o2.w2_mac = 0.0;
        ObjectiveBreakdown mic_b;
        double mic = objective_mic(probe, data, RolloutMode::Cascade, &mic_b);
        ObjectiveBreakdown bic_b;
        double bic = objective_bic(probe, data, o2, &bic_b);
        CHECK(bic == doctest::Approx(ospec.w0_sys * mic_b.micro / 2.5 + mic_b.penalty)
                         .epsilon(1e-12));
        CHECK(bic_b.travel_time == 0.0);
        CHECK(bic_b.fuel == 0.0);
        (void)mic;
    }
    SUBCASE("zero system weight leaves the macro terms") {
        auto o2 = ospec;
        o2.w0_sys = 0.0;
        double mac = objective_mac(probe, data, o2);
        double bic = objective_bic(probe, data, o2);
        CHECK(bic == doctest::Approx(mac).epsilon(1e-12));
    }
    SUBCASE("breakdown sums to the objective") {
        ObjectiveBreakdown b;
        double v = objective_bic(probe, data, ospec, &b);
        CHECK(v == doctest::Approx(b.total()).epsilon(1e-12));
    }
}

TEST_CASE("collision penalty is finite, large, and ordered") {
    auto data = synthetic_dataset(kTruth, ModelKind::Linear);
    // pure constant acceleration into the leader; larger k3 collides earlier
    auto late = spec_of(LinearParams{0.0, 0.0, 1.0}, ModelKind::Linear);
    auto early = spec_of(LinearParams{0.0, 0.0, 6.0}, ModelKind::Linear);
    double v_late = objective_mic(late, data);
    double v_early = objective_mic(early, data);
    CHECK(v_late >= 1e6);
    CHECK(v_early > v_late);
    CHECK(std::isfinite(v_early));
}

TEST_CASE("variance normalization") {
    auto data = synthetic_dataset(kTruth, ModelKind::Linear);
    auto ospec = interval_objective();
    auto n = variance_normalization(data, ospec);
    CHECK(n.micro > 1e-6);  // followers do accelerate
    CHECK(n.travel_time > 0.0);
    CHECK(n.fuel > 0.0);

    SUBCASE("degenerate constant data falls back to 1") {
        CalibrationDataset flat;
        flat.dt = 1.0;
        CalibrationDataset::Platoon p;
        p.lead = varying_speed_lead(1.0, 10);
        Trajectory f;
        f.vehicle_id = "f";
        for (int k = 0; k <= 10; ++k) {
            TrajectoryPoint pt;
            pt.t = k;
            pt.x = 400.0 + 10.0 * k;
            pt.v = 10.0;
            pt.a = 0.0;
            f.points.push_back(pt);
        }
        p.followers.push_back(f);
        flat.platoons.push_back(p);
        auto nf = variance_normalization(flat, ospec);
        CHECK(nf.micro == 1.0);
    }
}

TEST_CASE("calibrate recovers the generating linear parameters") {
    auto data = synthetic_dataset(kTruth, ModelKind::Linear);
    ObjectiveSpec ospec;
    ospec.kind = ObjectiveKind::MiC;
    CalibrateOptions opts;
    opts.budget = 4000;
    opts.seed = 5;
    auto res = calibrate(data, ModelKind::Linear, ospec, ParamBounds::defaults(ModelKind::Linear),
                         opts);
    CHECK(res.objective < 1e-8);
    auto got = std::get<LinearParams>(res.params.at(VehicleClass::Small));
    CHECK(got.k1 == doctest::Approx(kTruth.k1).epsilon(0.02));
    CHECK(got.k2 == doctest::Approx(kTruth.k2).epsilon(0.02));
    CHECK(got.k3 == doctest::Approx(kTruth.k3).epsilon(0.02));
    CHECK(res.evaluations <= opts.budget);
    for (std::size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i] <= res.trace[i - 1]);

    SUBCASE("same seed reruns bit-identically") {
        auto res2 = calibrate(data, ModelKind::Linear, ospec,
                              ParamBounds::defaults(ModelKind::Linear), opts);
        CHECK(to_vector(res2.params.at(VehicleClass::Small)) ==
              to_vector(res.params.at(VehicleClass::Small)));
        CHECK(res2.objective == res.objective);
        CHECK(res2.trace == res.trace);
    }
    SUBCASE("per-class mode matches on single-class data") {
        CalibrateOptions pc = opts;
        pc.class_mode = ClassMode::PerClass;
        auto res2 = calibrate(data, ModelKind::Linear, ospec,
                              ParamBounds::defaults(ModelKind::Linear), pc);
        CHECK(res2.objective < 1e-8);
    }
}

TEST_CASE("calibrate rejects hopeless setups") {
    ObjectiveSpec ospec;
    ospec.kind = ObjectiveKind::MiC;
    CalibrateOptions opts;
    opts.budget = 200;

    SUBCASE("empty dataset") {
        CalibrationDataset empty;
        CHECK_THROWS_AS(calibrate(empty, ModelKind::Linear, ospec,
                                  ParamBounds::defaults(ModelKind::Linear), opts),
                        std::runtime_error);
    }
    SUBCASE("bounds where every vector collides") {
        auto data = synthetic_dataset(kTruth, ModelKind::Linear);
        ParamBounds crash{{{0.0, 0.001}, {0.0, 0.001}, {5.0, 6.0}}};  // always accelerate
        CHECK_THROWS_WITH_AS(
            calibrate(data, ModelKind::Linear, ospec, crash, opts),
            doctest::Contains("every probed parameter vector collided"), std::runtime_error);
    }
    SUBCASE("malformed bounds") {
        auto data = synthetic_dataset(kTruth, ModelKind::Linear);
        ParamBounds bad{{{0.0, 1.0}}};
        CHECK_THROWS_AS(calibrate(data, ModelKind::Linear, ospec, bad, opts), std::runtime_error);
    }
}

TEST_CASE("result files are deterministic") {
    CalibrationResult r;
    r.model = ModelKind::Linear;
    r.params[VehicleClass::Small] = LinearParams{-0.09, 0.6, -0.9};
    r.objective = 1.2345678901234567e-9;
    r.breakdown = {1e-9, 0.0, 0.0, 0.0};
    r.evaluations = 4000;
    r.seed = 5;
    r.trace = {10.0, 1.0, 1e-9};
    auto dir = std::filesystem::temp_directory_path();
    auto p1 = (dir / "cfcal_res1.ini").string();
    auto p2 = (dir / "cfcal_res2.ini").string();
    write_result(p1, r);
    write_result(p2, r);
    std::ifstream f1(p1), f2(p2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    CHECK(s1.str().find("k1 = ") != std::string::npos);
    CHECK(s1.str().find("seed = 5") != std::string::npos);
}

TEST_CASE("dataset assembly trims chains to the shared grid") {
    TrajectoryDataset ds;
    ds.dt = 1.0;
    Trajectory a, b;
    a.vehicle_id = "A";
    b.vehicle_id = "B";
    for (int t = 0; t <= 20; ++t) {
        TrajectoryPoint p;
        p.t = t;
        p.x = 100.0 + 10.0 * t;
        p.v = 10.0;
        a.points.push_back(p);
    }
    for (int t = 5; t <= 30; ++t) {
        TrajectoryPoint p;
        p.t = t;
        p.x = 100.0 + 10.0 * t - 15.0;
        p.v = 10.0;
        p.leader_id = "A";
        b.points.push_back(p);
    }
    ds.vehicles = {a, b};
    auto index = build_platoons(ds);
    REQUIRE(index.chains.size() == 1);
    auto data = CalibrationDataset::assemble(ds, index);
    REQUIRE(data.platoons.size() == 1);
    const auto& p = data.platoons[0];
    REQUIRE(p.followers.size() == 1);
    CHECK(p.lead.points.size() == p.followers[0].points.size());
    CHECK(p.lead.points.front().t == doctest::Approx(5.0));
    CHECK(p.lead.points.back().t == doctest::Approx(20.0));
    CHECK(p.lead.vehicle_id == "A");
    CHECK(p.followers[0].vehicle_id == "B");

    SUBCASE("reconstructed and observed followers align") {
        auto spec = spec_of(kTruth, ModelKind::Linear);
        auto sim = reconstruct_followers(spec, data);
        auto obs = observed_followers(data);
        REQUIRE(sim.size() == obs.size());
        REQUIRE(sim[0].points.size() == obs[0].points.size());
        CHECK(sim[0].points.front().x == doctest::Approx(obs[0].points.front().x));
    }
}
