// Command-line front end for the corridor calibration pipeline.
//
// Subcommands: clean, simulate, calibrate, propagate, report.
// Every run writes a manifest.ini into the output directory recording the
// command, input hashes, seed, and wall-clock timestamps. Result files
// themselves carry no timestamps, so reruns with identical inputs and seed
// are byte-identical.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cfcal/calibration.hpp"
#include "cfcal/cf_models.hpp"
#include "cfcal/config.hpp"
#include "cfcal/csv.hpp"
#include "cfcal/error_propagation.hpp"
#include "cfcal/hash.hpp"
#include "cfcal/measures.hpp"
#include "cfcal/simulation.hpp"
#include "cfcal/svg.hpp"
#include "cfcal/trajectory.hpp"

namespace fs = std::filesystem;
using namespace cfcal;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitInput = 2;      // unreadable/malformed inputs or arguments
constexpr int kExitNumerical = 3;  // computation failed on valid inputs

/// Thrown once inputs are validated; maps to kExitNumerical.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalArgs {
    std::uint64_t seed = 0;
    std::string config;
    std::string out_dir = ".";
    int threads = 1;
    bool svg = false;
};

std::string iso_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Manifest {
    std::string command;
    std::uint64_t seed = 0;
    std::string started;
    std::vector<std::pair<std::string, std::string>> inputs;  // (path, hash)

    void add_input(const std::string& path) { inputs.emplace_back(path, file_hash(path)); }

    void write(const fs::path& dir) const {
        std::ofstream out(dir / "manifest.ini");
        if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
        out << "[run]\n";
        out << "command = " << command << "\n";
        out << "version = " << kVersion << "\n";
        out << "seed = " << seed << "\n";
        out << "started = " << started << "\n";
        out << "finished = " << iso_utc_now() << "\n";
        out << "\n[inputs]\n";
        for (const auto& [path, hash] : inputs) out << path << " = " << hash << "\n";
    }
};

fs::path prepare_out_dir(const GlobalArgs& g) {
    fs::path dir(g.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<double> parse_number_list(const std::string& s) {
    std::vector<double> out;
    std::string tok;
    std::istringstream ss(s);
    while (ss >> tok) {
        for (char& c : tok)
            if (c == ',') c = ' ';
        std::istringstream ts(tok);
        double v;
        while (ts >> v) out.push_back(v);
    }
    return out;
}

CsvSchema schema_from_config(const Config& cfg) {
    CsvSchema s;
    auto pick = [&cfg](const std::string& key, std::string& field) {
        if (auto v = cfg.get("schema", key)) field = *v;
    };
    pick("id", s.id);
    pick("t", s.t);
    pick("position", s.position);
    pick("x_utm", s.x_utm);
    pick("y_utm", s.y_utm);
    pick("v", s.v);
    pick("a", s.a);
    pick("lane", s.lane);
    pick("edge", s.edge);
    pick("leader", s.leader);
    pick("class", s.vclass);
    pick("length", s.length);
    return s;
}

// -- clean -------------------------------------------------------------------

int cmd_clean(const GlobalArgs& g, const std::string& input) {
    Manifest mf;
    mf.command = "clean";
    mf.seed = g.seed;
    mf.started = iso_utc_now();

    Config cfg;
    CleaningConfig ccfg;
    CorridorMap corridor;
    bool have_corridor = false;
    if (!g.config.empty()) {
        cfg = Config::load(g.config);
        mf.add_input(g.config);
        ccfg.angle_threshold_deg = cfg.get_double_or("clean", "angle_threshold", 30.0);
        ccfg.window = int(cfg.get_int_or("clean", "window", 5));
        if (auto cp = cfg.get("clean", "corridor")) {
            corridor = CorridorMap::load(*cp);
            mf.add_input(*cp);
            have_corridor = true;
        }
    }
    ccfg.validate();
    mf.add_input(input);

    auto ds = load_trajectories(input, schema_from_config(cfg),
                                have_corridor ? &corridor : nullptr);

    auto dir = prepare_out_dir(g);
    CleaningDiagnostics diag;
    TrajectoryDataset cleaned;
    try {
        cleaned = clean_dataset(ds, ccfg, &diag);
    } catch (const std::exception& e) {
        throw NumericalFailure(e.what());
    }
    write_trajectories((dir / "cleaned.csv").string(), cleaned, /*cleaned_flag_column=*/true);

    std::ofstream dout(dir / "diagnostics.csv");
    dout << "vehicle_id,drift_point_index,t\n";
    std::size_t total = 0;
    for (const auto& [id, idxs] : diag.drift_points) {
        const Trajectory* t = ds.find(id);
        for (std::size_t i : idxs) {
            dout << id << ',' << i << ',' << (t ? t->points[i].t : 0.0) << '\n';
            ++total;
        }
    }
    mf.write(dir);
    std::cout << "cleaned " << cleaned.vehicles.size() << " vehicles, reconstructed " << total
              << " drift points -> " << (dir / "cleaned.csv").string() << "\n";
    return 0;
}

// -- simulate ----------------------------------------------------------------

std::vector<double> parse_residual_spec(const std::string& s, std::size_t horizon) {
    // "t:value" entries separated by whitespace or ';'
    std::vector<double> r(horizon + 1, 0.0);
    std::string item;
    std::string norm = s;
    for (char& c : norm)
        if (c == ';') c = ' ';
    std::istringstream ss(norm);
    while (ss >> item) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("residual entry '" + item + "' is not t:value");
        std::size_t t = std::stoul(item.substr(0, colon));
        if (t > horizon) throw std::runtime_error("residual step beyond horizon: " + item);
        r[t] = std::stod(item.substr(colon + 1));
    }
    return r;
}

int cmd_simulate(const GlobalArgs& g) {
    if (g.config.empty()) throw std::runtime_error("simulate requires --config <scenario file>");
    Manifest mf;
    mf.command = "simulate";
    mf.seed = g.seed;
    mf.started = iso_utc_now();
    mf.add_input(g.config);
    Config cfg = Config::load(g.config);

    SimConfig sim;
    sim.dt = cfg.get_double_or("scenario", "dt", 1.0);
    sim.horizon = std::size_t(cfg.get_int("scenario", "horizon"));
    sim.min_speed = cfg.get_double_or("scenario", "min_speed", 0.0);
    sim.min_gap_stop = cfg.get_double_or("scenario", "min_gap_stop", 0.1);
    const std::string policy = cfg.get_or("scenario", "collision", "error");
    if (policy == "error")
        sim.collision_policy = CollisionPolicy::Error;
    else if (policy == "clamp")
        sim.collision_policy = CollisionPolicy::Clamp;
    else
        throw std::runtime_error("collision must be error|clamp, got '" + policy + "'");

    const std::string params_path = cfg.get_or_throw("scenario", "params");
    mf.add_input(params_path);
    PlatoonScenario sc;
    sc.model = ModelSpec::from_config(Config::load(params_path),
                                      cfg.get_or_throw("scenario", "model"),
                                      cfg.get_or("scenario", "method", ""));
    const std::string gap = cfg.get_or("scenario", "gap", "center");
    if (gap == "bumper")
        sc.model.gap_semantics = GapSemantics::Bumper;
    else if (gap != "center")
        throw std::runtime_error("gap must be center|bumper, got '" + gap + "'");

    // lead: trajectory file, or synthetic profile v(k) = v + amplitude sin(omega k)
    if (auto file = cfg.get("lead", "file")) {
        mf.add_input(*file);
        auto ds = load_trajectories(*file);
        const std::string id = cfg.get_or_throw("lead", "id");
        const Trajectory* t = ds.find(id);
        if (!t) throw std::runtime_error("lead vehicle '" + id + "' not in " + *file);
        sc.lead = *t;
    } else {
        double x = cfg.get_double("lead", "x0");
        const double v0 = cfg.get_double("lead", "v");
        const double amp = cfg.get_double_or("lead", "amplitude", 0.0);
        const double omega = cfg.get_double_or("lead", "omega", 0.0);
        sc.lead.vehicle_id = "lead";
        sc.lead.length = cfg.get_double_or("lead", "length", 4.5);
        for (std::size_t k = 0; k <= sim.horizon; ++k) {
            TrajectoryPoint p;
            p.t = double(k) * sim.dt;
            double v = v0 + amp * std::sin(omega * double(k));
            if (k > 0) x += v * sim.dt;
            p.x = x;
            p.v = v;
            sc.lead.points.push_back(p);
        }
    }

    std::vector<std::vector<double>> residuals;
    bool any_residuals = false;
    for (const auto& name : cfg.sections()) {
        if (name.rfind("follower ", 0) != 0) continue;
        FollowerInit f;
        f.vehicle_id = name.substr(9);
        f.vclass = vehicle_class_from_string(cfg.get_or(name, "class", "small"));
        f.length = cfg.get_double_or(name, "length", 4.5);
        f.x0 = cfg.get_double(name, "x0");
        f.v0 = cfg.get_double(name, "v0");
        sc.followers.push_back(f);
        if (auto rs = cfg.get(name, "residuals")) {
            residuals.push_back(parse_residual_spec(*rs, sim.horizon));
            any_residuals = true;
        } else {
            residuals.emplace_back();
        }
    }
    if (sc.followers.empty()) throw std::runtime_error("scenario has no [follower <id>] sections");
    if (any_residuals) {
        for (auto& r : residuals)
            if (r.empty()) r.assign(sim.horizon + 1, 0.0);
        sc.accel_residuals = std::move(residuals);
    }

    SimResult res;
    try {
        res = simulate_platoon(sc, sim);
    } catch (const std::exception& e) {
        throw NumericalFailure(e.what());
    }

    TrajectoryDataset out;
    out.dt = sim.dt;
    const double t0 = sc.lead.front_t();
    auto to_traj = [&](const VehicleSeries& s, VehicleClass c, double len,
                       const std::string& leader) {
        Trajectory traj;
        traj.vehicle_id = s.vehicle_id;
        traj.vclass = c;
        traj.length = len;
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            TrajectoryPoint p;
            p.t = t0 + double(k) * sim.dt;
            p.x = s.x[k];
            p.v = s.v[k];
            p.a = s.a[k];
            if (!leader.empty()) p.leader_id = leader;
            traj.points.push_back(p);
        }
        return traj;
    };
    out.vehicles.push_back(to_traj(res.lead, sc.lead.vclass, sc.lead.length, ""));
    std::string prev = res.lead.vehicle_id;
    for (std::size_t n = 0; n < res.followers.size(); ++n) {
        out.vehicles.push_back(
            to_traj(res.followers[n], sc.followers[n].vclass, sc.followers[n].length, prev));
        prev = res.followers[n].vehicle_id;
    }

    auto dir = prepare_out_dir(g);
    write_trajectories((dir / "simulated.csv").string(), out);
    mf.write(dir);
    std::cout << "simulated " << res.followers.size() << " followers over " << sim.horizon
              << " steps -> " << (dir / "simulated.csv").string() << "\n";
    if (!res.collision_events.empty())
        std::cout << "note: " << res.collision_events.size() << " clamped collision events\n";
    return 0;
}

// -- calibrate ---------------------------------------------------------------

int cmd_calibrate(const GlobalArgs& g) {
    if (g.config.empty()) throw std::runtime_error("calibrate requires --config <spec file>");
    Manifest mf;
    mf.command = "calibrate";
    mf.seed = g.seed;
    mf.started = iso_utc_now();
    mf.add_input(g.config);
    Config cfg = Config::load(g.config);

    const std::string data_path = cfg.get_or_throw("data", "trajectories");
    mf.add_input(data_path);
    CorridorMap corridor;
    const CorridorMap* corridor_ptr = nullptr;
    if (auto cp = cfg.get("data", "corridor")) {
        corridor = CorridorMap::load(*cp);
        mf.add_input(*cp);
        corridor_ptr = &corridor;
    }
    auto ds = load_trajectories(data_path, schema_from_config(cfg), corridor_ptr);
    auto index = build_platoons(ds);
    auto data = CalibrationDataset::assemble(ds, index);
    const std::string gap = cfg.get_or("calibrate", "gap", "center");
    if (gap == "bumper") data.gap_semantics = GapSemantics::Bumper;

    const ModelKind model = model_kind_from_string(cfg.get_or_throw("calibrate", "model"));

    ObjectiveSpec ospec;
    ospec.kind = objective_kind_from_string(cfg.get_or("calibrate", "objective", "mic"));
    ospec.w0_sys = cfg.get_double_or("calibrate", "w0", 1.0);
    ospec.w1_mac = cfg.get_double_or("calibrate", "w1", 1.0);
    ospec.w2_mac = cfg.get_double_or("calibrate", "w2", 1.0);
    const std::string rollout = cfg.get_or("calibrate", "rollout", "cascade");
    if (rollout == "teacher")
        ospec.rollout = RolloutMode::TeacherForced;
    else if (rollout != "cascade")
        throw std::runtime_error("rollout must be cascade|teacher, got '" + rollout + "'");

    if (ospec.kind != ObjectiveKind::MiC) {
        ospec.intervals.boundaries =
            parse_number_list(cfg.get_or_throw("intervals", "boundaries"));
        ospec.intervals.entry_x = cfg.get_double("intervals", "entry_x");
        ospec.intervals.exit_x = cfg.get_double("intervals", "exit_x");
        ospec.intervals.validate();
        if (auto fuel_path = cfg.get("fuel", "coefficients")) {
            ospec.fuel = FuelCoefficients::load(*fuel_path);
            mf.add_input(*fuel_path);
        }
    }

    ParamBounds bounds = ParamBounds::defaults(model);
    auto names = param_names(model);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (auto b = cfg.get("bounds", names[i])) {
            auto lohi = parse_number_list(*b);
            if (lohi.size() != 2)
                throw std::runtime_error("bounds." + names[i] + " needs 'lower upper'");
            bounds.bounds[i] = {lohi[0], lohi[1]};
        }
    }

    CalibrateOptions opts;
    opts.budget = std::size_t(cfg.get_int_or("calibrate", "budget", 20000));
    opts.population = std::size_t(cfg.get_int_or("calibrate", "population", 0));
    opts.seed = g.seed;
    opts.threads = g.threads;
    if (cfg.get_or("calibrate", "class_mode", "joint") == "per_class")
        opts.class_mode = ClassMode::PerClass;

    // normalization only matters for objectives with more than one term
    if (ospec.kind != ObjectiveKind::MiC &&
        cfg.get_or("calibrate", "normalization", "variance") == "variance")
        ospec.normalization = variance_normalization(data, ospec);

    CalibrationResult result;
    try {
        result = calibrate(data, model, ospec, bounds, opts);
    } catch (const std::exception& e) {
        throw NumericalFailure(e.what());
    }

    auto dir = prepare_out_dir(g);
    write_result((dir / "result.ini").string(), result);
    mf.write(dir);
    std::cout << "calibrated " << to_string(model) << " (" << to_string(ospec.kind)
              << "), objective " << result.objective << " after " << result.evaluations
              << " evaluations -> " << (dir / "result.ini").string() << "\n";
    return 0;
}

// -- propagate ---------------------------------------------------------------

int cmd_propagate(const GlobalArgs& g, const std::string& case_name,
                  const std::string& residuals_path) {
    Manifest mf;
    mf.command = "propagate";
    mf.seed = g.seed;
    mf.started = iso_utc_now();

    std::vector<FigureRow> rows;
    if (case_name == "instant-single") {
        rows = figure_case_rows(FigureCase::InstantSingleVehicle);
    } else if (case_name == "instant-platoon") {
        rows = figure_case_rows(FigureCase::InstantMultiVehicle);
    } else if (case_name == "custom") {
        if (residuals_path.empty())
            throw std::runtime_error("propagate custom requires --residuals <csv>");
        mf.add_input(residuals_path);
        LinearParams k{-0.053, 0.284, 0.918};
        if (!g.config.empty()) {
            Config cfg = Config::load(g.config);
            mf.add_input(g.config);
            k.k1 = cfg.get_double_or("linear", "k1", k.k1);
            k.k2 = cfg.get_double_or("linear", "k2", k.k2);
            k.k3 = cfg.get_double_or("linear", "k3", k.k3);
        }
        auto table = csv::read_file(residuals_path);
        auto cn = table.column("n"), ct = table.column("t"), cr = table.column("r");
        if (!cn || !ct || !cr)
            throw std::runtime_error(residuals_path + ": needs columns n,t,r");
        std::size_t max_n = 0, max_t = 0;
        for (const auto& row : table.rows) {
            max_n = std::max(max_n, std::size_t(std::stoul(row[*cn])));
            max_t = std::max(max_t, std::size_t(std::stoul(row[*ct])));
        }
        std::vector<std::vector<double>> r(max_n + 1, std::vector<double>(max_t + 1, 0.0));
        for (const auto& row : table.rows)
            r[std::stoul(row[*cn])][std::stoul(row[*ct])] = std::stod(row[*cr]);
        std::vector<std::vector<double>> eps;
        try {
            eps = multi_vehicle_error(r, k);
        } catch (const std::exception& e) {
            throw NumericalFailure(e.what());
        }
        for (std::size_t n = 0; n < eps.size(); ++n) {
            auto ev = speed_error_closed_form(eps[n]);
            auto ex = position_error_closed_form(eps[n]);
            for (std::size_t t = 0; t < eps[n].size(); ++t)
                rows.push_back({n, t, eps[n][t], ev[t], ex[t]});
        }
    } else {
        throw std::runtime_error("unknown case '" + case_name +
                                 "' (expected instant-single|instant-platoon|custom)");
    }

    auto dir = prepare_out_dir(g);
    write_figure_csv((dir / "errors.csv").string(), rows);
    if (g.svg) {
        std::map<std::size_t, std::vector<std::pair<double, double>>> per_vehicle;
        for (const auto& r : rows) per_vehicle[r.vehicle].push_back({double(r.t), r.eps_x});
        std::vector<svg::Series> series;
        for (const auto& [n, pts] : per_vehicle)
            series.push_back({"vehicle " + std::to_string(n), pts});
        svg::write_line_chart((dir / "errors_position.svg").string(),
                              "position error propagation", series);
    }
    mf.write(dir);
    std::cout << "propagated " << rows.size() << " rows -> " << (dir / "errors.csv").string()
              << "\n";
    return 0;
}

// -- report ------------------------------------------------------------------

struct SeriesTriple {
    std::vector<double> x, v, a;
};

int cmd_report(const GlobalArgs& g, const std::string& obs_path, const std::string& sim_path) {
    Manifest mf;
    mf.command = "report";
    mf.seed = g.seed;
    mf.started = iso_utc_now();
    mf.add_input(obs_path);
    mf.add_input(sim_path);

    Config cfg;
    if (!g.config.empty()) {
        cfg = Config::load(g.config);
        mf.add_input(g.config);
    }
    auto obs = load_trajectories(obs_path);
    auto sim = load_trajectories(sim_path);

    // microscopic MSE over vehicles present in both files
    double se_x = 0.0, se_v = 0.0, se_a = 0.0;
    std::size_t count = 0, matched = 0;
    for (const auto& o : obs.vehicles) {
        const Trajectory* s = sim.find(o.vehicle_id);
        if (!s) continue;
        if (s->points.size() != o.points.size())
            throw std::runtime_error("vehicle " + o.vehicle_id +
                                     ": sample counts differ between files");
        ++matched;
        for (std::size_t k = 0; k < o.points.size(); ++k) {
            const double dx = o.points[k].x - s->points[k].x;
            const double dv = o.points[k].v - s->points[k].v;
            const double da = o.points[k].a - s->points[k].a;
            se_x += dx * dx;
            se_v += dv * dv;
            se_a += da * da;
            ++count;
        }
    }
    if (matched == 0) throw std::runtime_error("no vehicle ids shared between obs and sim files");

    auto dir = prepare_out_dir(g);
    std::ofstream table(dir / "mse_table.csv");
    table.precision(12);
    table << "measure,mse\n";
    table << "acceleration," << se_a / double(count) << "\n";
    table << "speed," << se_v / double(count) << "\n";
    table << "position," << se_x / double(count) << "\n";

    // macroscopic comparison when an interval spec is configured
    if (cfg.has("intervals", "boundaries")) {
        IntervalSpec spec;
        spec.boundaries = parse_number_list(cfg.get_or_throw("intervals", "boundaries"));
        spec.entry_x = cfg.get_double("intervals", "entry_x");
        spec.exit_x = cfg.get_double("intervals", "exit_x");
        spec.validate();
        FuelCoefficients fuel = FuelCoefficients::all_zero();
        if (auto fp = cfg.get("fuel", "coefficients")) {
            fuel = FuelCoefficients::load(*fp);
            mf.add_input(*fp);
        }
        auto mo = aggregate_macro(obs.vehicles, spec, fuel);
        auto ms = aggregate_macro(sim.vehicles, spec, fuel);
        double tt_se = 0.0, fuel_se = 0.0;
        std::size_t counted = 0;
        for (std::size_t i = 0; i < mo.intervals.size(); ++i) {
            if (mo.intervals[i].vehicle_count == 0 || ms.intervals[i].vehicle_count == 0) continue;
            const double dT = mo.intervals[i].travel_time - ms.intervals[i].travel_time;
            const double de = mo.intervals[i].fuel_per_100km - ms.intervals[i].fuel_per_100km;
            tt_se += dT * dT;
            fuel_se += de * de;
            ++counted;
        }
        if (counted > 0) {
            table << "travel_time," << tt_se / double(counted) << "\n";
            table << "fuel_per_100km," << fuel_se / double(counted) << "\n";
        }
    }

    // speed/acceleration sample distributions, shared 20-bin grid
    auto collect = [](const TrajectoryDataset& ds, auto get) {
        std::vector<double> out;
        for (const auto& t : ds.vehicles)
            for (const auto& p : t.points) out.push_back(get(p));
        return out;
    };
    auto histogram = [&dir, &g](const std::string& name, const std::vector<double>& a,
                                const std::vector<double>& b) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (double v : a) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (double v : b) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) hi = lo + 1.0;
        const std::size_t bins = 20;
        const double w = (hi - lo) / double(bins);
        std::vector<std::size_t> ca(bins, 0), cb(bins, 0);
        auto bin_of = [&](double v) {
            auto i = std::size_t((v - lo) / w);
            return std::min(i, bins - 1);
        };
        for (double v : a) ++ca[bin_of(v)];
        for (double v : b) ++cb[bin_of(v)];
        std::ofstream out(dir / ("dist_" + name + ".csv"));
        out.precision(12);
        out << "bin_lo,bin_hi,obs_count,sim_count\n";
        for (std::size_t i = 0; i < bins; ++i)
            out << lo + double(i) * w << ',' << lo + double(i + 1) * w << ',' << ca[i] << ','
                << cb[i] << '\n';
        if (g.svg) {
            std::vector<double> edges, counts;
            for (std::size_t i = 0; i <= bins; ++i) edges.push_back(lo + double(i) * w);
            for (std::size_t i = 0; i < bins; ++i) counts.push_back(double(ca[i]));
            svg::write_histogram((dir / ("dist_" + name + ".svg")).string(),
                                 name + " distribution (observed)", edges, counts);
        }
    };
    histogram("speed", collect(obs, [](const TrajectoryPoint& p) { return p.v; }),
              collect(sim, [](const TrajectoryPoint& p) { return p.v; }));
    histogram("accel", collect(obs, [](const TrajectoryPoint& p) { return p.a; }),
              collect(sim, [](const TrajectoryPoint& p) { return p.a; }));

    mf.write(dir);
    std::cout << "report over " << matched << " matched vehicles -> "
              << (dir / "mse_table.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corridor car-following calibration pipeline"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--seed", g.seed, "random seed for stochastic steps");
    app.add_option("--config", g.config, "structured-text config file");
    app.add_option("--out-dir", g.out_dir, "output directory (created if missing)");
    app.add_option("--threads", g.threads, "worker threads for objective evaluation");
    app.add_flag("--svg", g.svg, "also render SVG plots");

    std::string clean_input, obs_path, sim_path;
    std::string prop_case = "instant-single", residuals_path;

    auto* clean = app.add_subcommand("clean", "drift removal, smoothing, differentiation");
    clean->add_option("input", clean_input, "trajectory csv")->required();

    app.add_subcommand("simulate", "platoon rollout from a scenario config");

    app.add_subcommand("calibrate", "parameter search against observed platoons");

    auto* prop = app.add_subcommand("propagate", "closed-form error propagation series");
    prop->add_option("--case", prop_case, "instant-single | instant-platoon | custom");
    prop->add_option("--residuals", residuals_path, "csv with columns n,t,r (custom case)");

    auto* report = app.add_subcommand("report", "MSE table and sample distributions");
    report->add_option("--obs", obs_path, "observed trajectory csv")->required();
    report->add_option("--sim", sim_path, "simulated trajectory csv")->required();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitInput;
    }

    try {
        if (app.got_subcommand("clean")) return cmd_clean(g, clean_input);
        if (app.got_subcommand("simulate")) return cmd_simulate(g);
        if (app.got_subcommand("calibrate")) return cmd_calibrate(g);
        if (app.got_subcommand("propagate")) return cmd_propagate(g, prop_case, residuals_path);
        if (app.got_subcommand("report")) return cmd_report(g, obs_path, sim_path);
    } catch (const NumericalFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
