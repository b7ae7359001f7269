#include "cfcal/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cfcal/csv.hpp"
#include "cfcal/hash.hpp"

namespace cfcal {

FuelCoefficients FuelCoefficients::all_zero() {
    return FuelCoefficients{};
}

FuelCoefficients FuelCoefficients::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open coefficient file: " + path);
    FuelCoefficients c;
    c.source_path = path;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        if (line[b] == '#') {
            for (const char* key : {"v_scale=", "a_scale="}) {
                auto pos = line.find(key);
                if (pos != std::string::npos) {
                    double val = std::stod(line.substr(pos + 8));
                    (key[0] == 'v' ? c.v_scale : c.a_scale) = val;
                }
            }
            continue;
        }
        auto fields = csv::split_line(line);
        if (fields.size() != 4)
            throw std::runtime_error(path + ": expected 4 columns per coefficient row");
        if (row >= 8) throw std::runtime_error(path + ": expected exactly 8 coefficient rows");
        for (std::size_t p = 0; p < 4; ++p) {
            double v = std::stod(fields[p]);
            if (!std::isfinite(v)) throw std::runtime_error(path + ": non-finite coefficient");
            if (row < 4)
                c.accel[row][p] = v;
            else
                c.decel[row - 4][p] = v;
        }
        ++row;
    }
    if (row != 8) throw std::runtime_error(path + ": expected 8 coefficient rows, got " +
                                           std::to_string(row));
    c.source_hash = file_hash(path);
    return c;
}

void IntervalSpec::validate() const {
    if (boundaries.size() < 2) throw std::runtime_error("interval spec needs >= 2 boundaries");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
        if (boundaries[i] <= boundaries[i - 1])
            throw std::runtime_error("interval boundaries must be strictly ascending");
    if (!(entry_x < exit_x)) throw std::runtime_error("segment entry must precede exit");
}

std::optional<std::size_t> IntervalSpec::interval_of(double t) const {
    if (t < boundaries.front() || t > boundaries.back()) return std::nullopt;
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
    std::size_t idx = it == boundaries.begin() ? 0 : std::size_t(it - boundaries.begin()) - 1;
    return std::min(idx, boundaries.size() - 2);
}

double mse(const std::vector<double>& obs, const std::vector<double>& sim) {
    if (obs.size() != sim.size())
        throw std::runtime_error("mse: series length mismatch (" + std::to_string(obs.size()) +
                                 " vs " + std::to_string(sim.size()) + ")");
    if (obs.empty()) throw std::runtime_error("mse: empty series");
    double s = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        double d = obs[i] - sim[i];
        s += d * d;
    }
    return s / double(obs.size());
}

namespace {
/// First time the (assumed nondecreasing) position crosses x_target.
std::optional<double> crossing_time(const Trajectory& traj, double x_target) {
    const auto& pts = traj.points;
    if (pts.front().x >= x_target) return pts.front().t;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].x >= x_target) {
            double x0 = pts[i - 1].x, x1 = pts[i].x;
            if (x1 == x0) return pts[i].t;
            double w = (x_target - x0) / (x1 - x0);
            return pts[i - 1].t + w * (pts[i].t - pts[i - 1].t);
        }
    }
    return std::nullopt;
}
}  // namespace

std::optional<double> traversal_time(const Trajectory& traj, double entry_x, double exit_x) {
    if (!(entry_x < exit_x)) throw std::runtime_error("traversal_time: entry_x must be < exit_x");
    auto t_in = crossing_time(traj, entry_x);
    auto t_out = crossing_time(traj, exit_x);
    if (!t_in || !t_out) return std::nullopt;
    return *t_out - *t_in;
}

double eq_mean_rate(const Trajectory& traj, double t1, double t2) {
    if (!(t1 < t2)) throw std::runtime_error("eq_mean_rate: requires t1 < t2");
    auto x_at = [&traj](double t) {
        const auto& pts = traj.points;
        if (t < pts.front().t - 1e-9 || t > pts.back().t + 1e-9)
            throw std::runtime_error("eq_mean_rate: time outside trajectory span");
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (pts[i].t >= t - 1e-12) {
                double w = (t - pts[i - 1].t) / (pts[i].t - pts[i - 1].t);
                w = std::clamp(w, 0.0, 1.0);
                return (1 - w) * pts[i - 1].x + w * pts[i].x;
            }
        }
        return pts.back().x;
    };
    return (x_at(t2) - x_at(t1)) / (t2 - t1);
}

double fuel_rate(double v, double a, const FuelCoefficients& c) {
    const auto& m = a >= 0.0 ? c.accel : c.decel;
    const double vv = v * c.v_scale;
    const double aa = a * c.a_scale;
    // Horner in a inside Horner in v
    double exponent = 0.0;
    double vpow = 1.0;
    for (std::size_t mi = 0; mi < 4; ++mi) {
        double row = ((m[mi][3] * aa + m[mi][2]) * aa + m[mi][1]) * aa + m[mi][0];
        exponent += row * vpow;
        vpow *= vv;
    }
    return std::exp(exponent);
}

FuelTotal vehicle_fuel(const Trajectory& traj, const FuelCoefficients& c, double dt) {
    FuelTotal out;
    for (const auto& p : traj.points) out.liters += fuel_rate(p.v, p.a, c) * dt;
    if (!traj.points.empty()) {
        double dist = traj.points.back().x - traj.points.front().x;
        if (dist > 0.0) out.per_100km = out.liters / dist * 1e5;
    }
    return out;
}

MacroMeasures aggregate_macro(const std::vector<Trajectory>& trajs, const IntervalSpec& spec,
                              const FuelCoefficients& c) {
    spec.validate();
    MacroMeasures out;
    out.intervals.resize(spec.interval_count());
    std::vector<double> tt_sum(spec.interval_count(), 0.0);
    std::vector<double> fuel_sum(spec.interval_count(), 0.0);

    for (const auto& traj : trajs) {
        if (traj.points.size() < 2) continue;
        auto tt = traversal_time(traj, spec.entry_x, spec.exit_x);
        if (!tt) {
            out.excluded_vehicles.push_back(traj.vehicle_id);
            continue;
        }
        auto t_entry = crossing_time(traj, spec.entry_x);
        auto iv = spec.interval_of(*t_entry);
        if (!iv) {
            out.excluded_vehicles.push_back(traj.vehicle_id);
            continue;
        }
        // fuel over the segment portion only
        Trajectory seg;
        seg.vehicle_id = traj.vehicle_id;
        for (const auto& p : traj.points)
            if (p.x >= spec.entry_x && p.x <= spec.exit_x) seg.points.push_back(p);
        double dt = traj.points[1].t - traj.points[0].t;
        auto fuel = vehicle_fuel(seg, c, dt);

        tt_sum[*iv] += *tt;
        if (fuel.per_100km) fuel_sum[*iv] += *fuel.per_100km;
        out.intervals[*iv].vehicle_count += 1;
    }

    for (std::size_t i = 0; i < out.intervals.size(); ++i) {
        if (out.intervals[i].vehicle_count > 0) {
            out.intervals[i].travel_time = tt_sum[i] / double(out.intervals[i].vehicle_count);
            out.intervals[i].fuel_per_100km = fuel_sum[i] / double(out.intervals[i].vehicle_count);
        }
    }
    return out;
}

}  // namespace cfcal
