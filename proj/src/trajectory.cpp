#include "cfcal/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cfcal/csv.hpp"

namespace cfcal {

namespace {
constexpr double kDtTol = 1e-6;

double parse_double(const std::string& s, const std::string& path, std::size_t lineno,
                    const std::string& col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed value '" + s +
                                 "' in column " + col);
    }
}
}  // namespace

std::string to_string(VehicleClass c) {
    return c == VehicleClass::Small ? "small" : "large";
}

VehicleClass vehicle_class_from_string(const std::string& s) {
    if (s == "small") return VehicleClass::Small;
    if (s == "large") return VehicleClass::Large;
    throw std::runtime_error("unknown vehicle class '" + s + "' (expected small|large)");
}

double Trajectory::dt() const {
    if (points.size() < 2) throw std::runtime_error("trajectory needs >= 2 points for dt");
    return points[1].t - points[0].t;
}

void CleaningConfig::validate() const {
    if (!(angle_threshold_deg > 0.0 && angle_threshold_deg < 180.0))
        throw std::runtime_error("angle_threshold must lie in (0, 180) degrees");
    if (window < 3 || window % 2 == 0)
        throw std::runtime_error("smoothing window must be an odd integer >= 3");
}

CorridorMap CorridorMap::load(const std::string& path) {
    Config cfg = Config::load(path);
    CorridorMap map;
    for (const auto& name : cfg.sections()) {
        if (name.rfind("edge ", 0) != 0) continue;
        Edge e;
        std::string pts = cfg.get_or_throw(name, "polyline");
        std::istringstream ss(pts);
        std::string pair;
        while (std::getline(ss, pair, ';')) {
            auto comma = pair.find(',');
            if (comma == std::string::npos)
                throw std::runtime_error(path + ": malformed polyline point '" + pair + "'");
            e.polyline.emplace_back(std::stod(pair.substr(0, comma)),
                                    std::stod(pair.substr(comma + 1)));
        }
        if (e.polyline.size() < 2)
            throw std::runtime_error(path + ": polyline needs >= 2 points in [" + name + "]");
        e.offset = cfg.get_double_or(name, "offset", 0.0);
        double len = 0.0;
        for (std::size_t i = 1; i < e.polyline.size(); ++i) {
            len += std::hypot(e.polyline[i].first - e.polyline[i - 1].first,
                              e.polyline[i].second - e.polyline[i - 1].second);
        }
        e.length = cfg.get_double_or(name, "length", len);
        map.edges[name.substr(5)] = std::move(e);
    }
    if (map.edges.empty()) throw std::runtime_error(path + ": no [edge <id>] sections");
    return map;
}

double CorridorMap::project(const std::string& edge_id, double x, double y) const {
    auto it = edges.find(edge_id);
    if (it == edges.end()) throw std::runtime_error("unknown edge '" + edge_id + "' in corridor map");
    const Edge& e = it->second;
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    double s0 = 0.0;
    for (std::size_t i = 1; i < e.polyline.size(); ++i) {
        auto [ax, ay] = e.polyline[i - 1];
        auto [bx, by] = e.polyline[i];
        double ux = bx - ax, uy = by - ay;
        double seg_len2 = ux * ux + uy * uy;
        double tt = seg_len2 > 0 ? ((x - ax) * ux + (y - ay) * uy) / seg_len2 : 0.0;
        tt = std::clamp(tt, 0.0, 1.0);
        double px = ax + tt * ux, py = ay + tt * uy;
        double d2 = (x - px) * (x - px) + (y - py) * (y - py);
        if (d2 < best_d2) {
            best_d2 = d2;
            best_s = s0 + tt * std::sqrt(seg_len2);
        }
        s0 += std::sqrt(seg_len2);
    }
    return e.offset + best_s;
}

const Trajectory* TrajectoryDataset::find(const std::string& vehicle_id) const {
    for (const auto& v : vehicles) {
        if (v.vehicle_id == vehicle_id) return &v;
    }
    return nullptr;
}

TrajectoryDataset load_trajectories(const std::string& path, const CsvSchema& schema,
                                    const CorridorMap* corridor) {
    csv::Table table = csv::read_file(path);

    auto col_id = table.column(schema.id);
    auto col_t = table.column(schema.t);
    if (!col_id) throw std::runtime_error(path + ": required column '" + schema.id + "' missing");
    if (!col_t) throw std::runtime_error(path + ": required column '" + schema.t + "' missing");

    auto col_pos = table.column(schema.position);
    auto col_xu = table.column(schema.x_utm);
    auto col_yu = table.column(schema.y_utm);
    auto col_v = table.column(schema.v);
    auto col_a = table.column(schema.a);
    auto col_lane = table.column(schema.lane);
    auto col_edge = table.column(schema.edge);
    auto col_leader = table.column(schema.leader);
    auto col_class = table.column(schema.vclass);
    auto col_length = table.column(schema.length);

    if (!col_pos && !(col_xu && col_yu))
        throw std::runtime_error(path + ": need column '" + schema.position + "' or '" +
                                 schema.x_utm + "'+'" + schema.y_utm + "'");
    if (!col_pos && !corridor)
        throw std::runtime_error(path + ": UTM input requires a corridor config");

    std::map<std::string, Trajectory> by_id;
    std::vector<std::string> order;  // first-appearance order
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        std::size_t lineno = r + 2;
        const std::string& id = row[*col_id];
        if (id.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty vehicle id");

        TrajectoryPoint p;
        p.t = parse_double(row[*col_t], path, lineno, schema.t);
        if (col_edge && !row[*col_edge].empty()) p.edge = row[*col_edge];
        if (col_lane && !row[*col_lane].empty()) p.lane = row[*col_lane];
        if (col_leader && !row[*col_leader].empty() && row[*col_leader] != "-1")
            p.leader_id = row[*col_leader];
        if (col_v && !row[*col_v].empty()) p.v = parse_double(row[*col_v], path, lineno, schema.v);
        if (col_a && !row[*col_a].empty()) p.a = parse_double(row[*col_a], path, lineno, schema.a);

        if (col_pos && !row[*col_pos].empty()) {
            p.x = parse_double(row[*col_pos], path, lineno, schema.position);
            if (col_yu && !row[*col_yu].empty())
                p.y = parse_double(row[*col_yu], path, lineno, schema.y_utm);
        } else {
            double xu = parse_double(row[*col_xu], path, lineno, schema.x_utm);
            double yu = parse_double(row[*col_yu], path, lineno, schema.y_utm);
            if (!p.edge)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": UTM projection needs an edge id");
            p.x = corridor->project(*p.edge, xu, yu);
            p.y = yu;
        }

        auto [it, inserted] = by_id.try_emplace(id);
        if (inserted) {
            it->second.vehicle_id = id;
            order.push_back(id);
        }
        if (col_class && !row[*col_class].empty())
            it->second.vclass = vehicle_class_from_string(row[*col_class]);
        if (col_length && !row[*col_length].empty())
            it->second.length = parse_double(row[*col_length], path, lineno, schema.length);
        it->second.points.push_back(std::move(p));
    }

    TrajectoryDataset ds;
    double dt = 0.0;
    for (const auto& id : order) {
        Trajectory traj = by_id[id];
        std::stable_sort(traj.points.begin(), traj.points.end(),
                         [](const auto& a, const auto& b) { return a.t < b.t; });
        for (std::size_t i = 1; i < traj.points.size(); ++i) {
            double step = traj.points[i].t - traj.points[i - 1].t;
            if (step <= 0.0)
                throw std::runtime_error(path + ": vehicle " + id +
                                         ": duplicate or non-increasing timestamp at t=" +
                                         std::to_string(traj.points[i].t));
            if (dt == 0.0) dt = step;
            if (std::abs(step - dt) > kDtTol)
                throw std::runtime_error(path + ": vehicle " + id +
                                         ": non-uniform time step at t=" +
                                         std::to_string(traj.points[i].t) + " (gap " +
                                         std::to_string(step) + ", expected " +
                                         std::to_string(dt) + ")");
        }
        ds.vehicles.push_back(std::move(traj));
    }
    ds.dt = dt;
    return ds;
}

void write_trajectories(const std::string& path, const TrajectoryDataset& dataset,
                        bool cleaned_flag_column) {
    csv::Table table;
    table.header = {"id", "class", "length", "t_sec", "position", "y_utm",
                    "v",  "a",     "lane",   "edge",  "pre_id"};
    if (cleaned_flag_column) table.header.push_back("cleaned");
    auto fmt = [](double v) {
        std::ostringstream o;
        o.precision(12);
        o << v;
        return o.str();
    };
    for (const auto& traj : dataset.vehicles) {
        for (const auto& p : traj.points) {
            std::vector<std::string> row = {
                traj.vehicle_id,         to_string(traj.vclass),
                fmt(traj.length),        fmt(p.t),
                fmt(p.x),                p.y ? fmt(*p.y) : "",
                fmt(p.v),                fmt(p.a),
                p.lane.value_or(""),     p.edge.value_or(""),
                p.leader_id.value_or("")};
            if (cleaned_flag_column) row.push_back(p.cleaned ? "1" : "0");
            table.rows.push_back(std::move(row));
        }
    }
    csv::write_file(path, table);
}

std::set<std::size_t> detect_drift_points(const Trajectory& traj, const CleaningConfig& cfg) {
    cfg.validate();
    std::set<std::size_t> out;
    const auto& pts = traj.points;
    if (pts.size() < 3) return out;
    auto ycoord = [](const TrajectoryPoint& p) { return p.y.value_or(0.0); };
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        double ux = pts[i].x - pts[i - 1].x;
        double uy = ycoord(pts[i]) - ycoord(pts[i - 1]);
        double wx = pts[i + 1].x - pts[i].x;
        double wy = ycoord(pts[i + 1]) - ycoord(pts[i]);
        double nu = std::hypot(ux, uy), nw = std::hypot(wx, wy);
        if (nu == 0.0 || nw == 0.0) continue;
        double c = std::clamp((ux * wx + uy * wy) / (nu * nw), -1.0, 1.0);
        double turn_deg = std::acos(c) * 180.0 / std::numbers::pi;
        // interior angle at the vertex; near-reversals have small interior angles
        if (180.0 - turn_deg < cfg.angle_threshold_deg) out.insert(i);
    }
    return out;
}

Trajectory reconstruct_points(const Trajectory& traj, const std::set<std::size_t>& removed,
                              const CleaningConfig& cfg) {
    cfg.validate();
    const std::size_t n = traj.points.size();
    for (auto idx : removed) {
        if (idx >= n) throw std::runtime_error("removed index out of range");
    }
    if (n - removed.size() < 2)
        throw std::runtime_error("removal would leave fewer than 2 points");
    if (removed.empty()) return traj;

    Trajectory out = traj;
    const int half = cfg.window / 2;
    auto survives = [&removed](std::size_t j) { return removed.count(j) == 0; };

    for (auto idx : removed) {
        double sx = 0.0, sy = 0.0;
        int cnt = 0;
        bool any_y = false;
        std::size_t lo = idx >= static_cast<std::size_t>(half) ? idx - half : 0;
        std::size_t hi = std::min(n - 1, idx + half);
        for (std::size_t j = lo; j <= hi; ++j) {
            if (j == idx || !survives(j)) continue;
            sx += traj.points[j].x;
            if (traj.points[j].y) {
                sy += *traj.points[j].y;
                any_y = true;
            }
            ++cnt;
        }
        if (cnt > 0) {
            out.points[idx].x = sx / cnt;
            if (any_y) out.points[idx].y = sy / cnt;
        } else {
            // window holds no survivor: interpolate between nearest surviving points
            std::ptrdiff_t prev = -1, next = -1;
            for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(idx) - 1; j >= 0; --j)
                if (survives(j)) { prev = j; break; }
            for (std::size_t j = idx + 1; j < n; ++j)
                if (survives(j)) { next = static_cast<std::ptrdiff_t>(j); break; }
            if (prev >= 0 && next >= 0) {
                double w = double(idx - prev) / double(next - prev);
                out.points[idx].x = (1 - w) * traj.points[prev].x + w * traj.points[next].x;
            } else if (prev >= 0) {
                out.points[idx].x = traj.points[prev].x;
            } else {
                out.points[idx].x = traj.points[next].x;
            }
        }
        out.points[idx].cleaned = true;
    }
    return out;
}

Trajectory smooth_moving_average(const Trajectory& traj, const CleaningConfig& cfg) {
    cfg.validate();
    const std::size_t n = traj.points.size();
    if (n < static_cast<std::size_t>(cfg.window))
        throw std::runtime_error("trajectory shorter than smoothing window");
    Trajectory out = traj;
    const std::size_t half = std::size_t(cfg.window / 2);
    for (std::size_t i = 0; i < n; ++i) {
        // truncated symmetric window: shrink the radius near the boundary so
        // the average stays centered on i
        const std::size_t radius = std::min({half, i, n - 1 - i});
        std::size_t lo = i - radius;
        std::size_t hi = i + radius;
        double sx = 0.0, sy = 0.0;
        bool all_y = true;
        for (std::size_t j = lo; j <= hi; ++j) {
            sx += traj.points[j].x;
            if (traj.points[j].y)
                sy += *traj.points[j].y;
            else
                all_y = false;
        }
        double cnt = double(hi - lo + 1);
        out.points[i].x = sx / cnt;
        if (all_y && traj.points[i].y) out.points[i].y = sy / cnt;
    }
    return out;
}

Trajectory differentiate(const Trajectory& traj) {
    const std::size_t n = traj.points.size();
    if (n < 2) throw std::runtime_error("differentiate needs >= 2 points");
    const double dt = traj.dt();
    Trajectory out = traj;
    for (std::size_t i = 1; i < n; ++i)
        out.points[i].v = (traj.points[i].x - traj.points[i - 1].x) / dt;
    out.points[0].v = out.points[1].v;
    if (n >= 3) {
        for (std::size_t i = 2; i < n; ++i)
            out.points[i].a = (out.points[i].v - out.points[i - 1].v) / dt;
        out.points[0].a = out.points[1].a = out.points[2].a;
    } else {
        out.points[0].a = out.points[1].a = 0.0;
    }
    return out;
}

TrajectoryDataset clean_dataset(const TrajectoryDataset& dataset, const CleaningConfig& cfg,
                                CleaningDiagnostics* diag) {
    cfg.validate();
    TrajectoryDataset out;
    out.dt = dataset.dt;
    for (const auto& traj : dataset.vehicles) {
        auto drift = detect_drift_points(traj, cfg);
        if (diag && !drift.empty())
            diag->drift_points[traj.vehicle_id] = {drift.begin(), drift.end()};
        Trajectory cleaned = reconstruct_points(traj, drift, cfg);
        if (cleaned.points.size() >= static_cast<std::size_t>(cfg.window))
            cleaned = smooth_moving_average(cleaned, cfg);
        out.vehicles.push_back(differentiate(cleaned));
    }
    return out;
}

namespace {
/// Linear interpolation of position at time t; requires t inside the span.
double position_at(const Trajectory& traj, double t) {
    const auto& pts = traj.points;
    auto it = std::lower_bound(pts.begin(), pts.end(), t,
                               [](const TrajectoryPoint& p, double tt) { return p.t < tt; });
    if (it == pts.begin()) return pts.front().x;
    if (it == pts.end()) return pts.back().x;
    const auto& b = *it;
    const auto& a = *(it - 1);
    double w = (t - a.t) / (b.t - a.t);
    return (1 - w) * a.x + w * b.x;
}

std::optional<std::string> dominant_leader(const Trajectory& traj) {
    std::map<std::string, int> counts;
    for (const auto& p : traj.points)
        if (p.leader_id) ++counts[*p.leader_id];
    std::optional<std::string> best;
    int best_count = 0;
    for (const auto& [id, c] : counts) {
        if (c > best_count) {
            best = id;
            best_count = c;
        }
    }
    return best;
}
}  // namespace

PlatoonIndex build_platoons(const TrajectoryDataset& dataset) {
    PlatoonIndex index;
    std::map<std::string, std::string> leader_of;  // follower -> leader (validated)

    for (const auto& traj : dataset.vehicles) {
        auto lead_id = dominant_leader(traj);
        if (!lead_id) continue;
        const Trajectory* leader = dataset.find(*lead_id);
        if (!leader) {
            index.excluded.emplace_back(*lead_id, traj.vehicle_id, "leader not in dataset");
            continue;
        }
        double t0 = std::max(leader->front_t(), traj.front_t());
        double t1 = std::min(leader->back_t(), traj.back_t());
        if (t0 >= t1) {
            index.excluded.emplace_back(*lead_id, traj.vehicle_id, "no time overlap");
            continue;
        }
        bool ok = true;
        for (const auto& p : traj.points) {
            if (p.t < t0 - 1e-9 || p.t > t1 + 1e-9) continue;
            if (position_at(*leader, p.t) <= p.x) {
                std::ostringstream msg;
                msg << "leader behind follower at t=" << p.t;
                index.excluded.emplace_back(*lead_id, traj.vehicle_id, msg.str());
                ok = false;
                break;
            }
        }
        if (ok) leader_of[traj.vehicle_id] = *lead_id;
    }

    // cycle check over validated links
    for (const auto& [start, _] : leader_of) {
        std::set<std::string> seen{start};
        std::string cur = start;
        while (leader_of.count(cur)) {
            cur = leader_of[cur];
            if (!seen.insert(cur).second)
                throw std::runtime_error("cyclic leader links involving vehicle '" + cur + "'");
        }
    }

    std::map<std::string, std::vector<std::string>> followers_of;
    for (const auto& [f, l] : leader_of) followers_of[l].push_back(f);
    for (auto& [_, fs] : followers_of) std::sort(fs.begin(), fs.end());

    // chains start at vehicles with no (validated) leader
    for (const auto& traj : dataset.vehicles) {
        if (leader_of.count(traj.vehicle_id)) continue;
        if (!followers_of.count(traj.vehicle_id)) continue;
        // walk down, splitting at branch points by emitting one chain per branch path
        std::vector<std::vector<std::string>> stack{{traj.vehicle_id}};
        while (!stack.empty()) {
            auto path = std::move(stack.back());
            stack.pop_back();
            const auto& tail = path.back();
            auto it = followers_of.find(tail);
            if (it == followers_of.end()) {
                if (path.size() >= 2) index.chains.push_back({std::move(path)});
                continue;
            }
            for (const auto& f : it->second) {
                auto next = path;
                next.push_back(f);
                stack.push_back(std::move(next));
            }
        }
    }
    std::sort(index.chains.begin(), index.chains.end(),
              [](const auto& a, const auto& b) { return a.vehicle_ids < b.vehicle_ids; });
    return index;
}

}  // namespace cfcal
