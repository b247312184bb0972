#pragma once

#include "tpm/detail/text.hpp"
#include "tpm/errors.hpp"
#include "tpm/geodesy.hpp"
#include "tpm/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace tpm {

/// Time-ordered run of one device's records with no internal gap of theta or more.
struct Trajectory {
    std::string id;
    std::string device_id;
    std::vector<GpsRecord> points;
    double length = 0.0; // meters
};

inline std::vector<double> default_theta_grid() {
    std::vector<double> grid;
    for (int minutes : {1, 2, 5, 10, 15, 20, 30, 45, 60, 90, 120}) grid.push_back(minutes * 60.0);
    return grid;
}

struct SegmentationConfig {
    double theta = 600.0; // seconds
    std::vector<double> theta_grid = default_theta_grid();
    std::size_t min_points = 3;
    double min_length = 300.0; // meters
    double max_jump = 5000.0;  // meters

    void validate() const {
        if (!(theta > 0.0)) throw ConfigError("theta must be positive");
        if (theta_grid.size() < 3) throw ConfigError("theta grid needs at least 3 values");
        for (std::size_t i = 1; i < theta_grid.size(); ++i)
            if (!(theta_grid[i] > theta_grid[i - 1])) throw ConfigError("theta grid must be strictly increasing");
        if (!(theta_grid.front() > 0.0)) throw ConfigError("theta grid values must be positive");
        if (min_points < 2) throw ConfigError("min_points must be at least 2");
        if (!(min_length >= 0.0)) throw ConfigError("min_length must be non-negative");
        if (!(max_jump > 0.0)) throw ConfigError("max_jump must be positive");
    }
};

inline std::string make_trajectory_id(const std::string& device_id, std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", index);
    return device_id + "/" + buf;
}

/// Sum of great-circle distances between consecutive points.
inline double compute_length(const std::vector<GpsRecord>& points, const GeoConstants& c = {}) {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) total += haversine_distance(points[i - 1].coord, points[i].coord, c);
    return total;
}

inline double compute_length(const Trajectory& traj, const GeoConstants& c = {}) {
    return compute_length(traj.points, c);
}

/// Breaks a sorted log wherever the gap to the previous record reaches theta.
/// A gap strictly below theta keeps the point in the current trajectory.
inline std::vector<Trajectory> split_into_trajectories(const DeviceLog& log, double theta,
                                                       const GeoConstants& c = {}) {
    std::vector<Trajectory> out;
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const auto& rec = log.records[i];
        if (i == 0 || static_cast<double>(rec.timestamp - log.records[i - 1].timestamp) >= theta) {
            out.push_back({make_trajectory_id(log.device_id, out.size()), log.device_id, {}, 0.0});
        }
        out.back().points.push_back(rec);
    }
    for (auto& t : out) t.length = compute_length(t, c);
    return out;
}

/// Number of trajectories the logs split into at `theta`, before noise filtering.
inline std::size_t trajectory_count(const std::vector<DeviceLog>& logs, double theta) {
    std::size_t count = 0;
    for (const auto& log : logs) {
        if (log.records.empty()) continue;
        ++count;
        for (std::size_t i = 1; i < log.records.size(); ++i)
            if (static_cast<double>(log.records[i].timestamp - log.records[i - 1].timestamp) >= theta) ++count;
    }
    return count;
}

/// f(theta) over a grid together with its divided second difference at the
/// interior points (second_diff[0] and second_diff.back() are unused zeros).
struct ThetaCurve {
    std::vector<double> grid;
    std::vector<std::size_t> counts;
    std::vector<double> second_diff;
    std::size_t selected = 1; // index into grid
};

inline ThetaCurve theta_curve(const std::vector<DeviceLog>& logs, const std::vector<double>& grid) {
    if (grid.size() < 3) throw ConfigError("theta grid needs at least 3 values");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ConfigError("theta grid must be strictly increasing");

    ThetaCurve curve;
    curve.grid = grid;
    for (double theta : grid) curve.counts.push_back(trajectory_count(logs, theta));
    curve.second_diff.assign(grid.size(), 0.0);

    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double h0 = grid[i] - grid[i - 1];
        const double h1 = grid[i + 1] - grid[i];
        const double f0 = static_cast<double>(curve.counts[i - 1]);
        const double f1 = static_cast<double>(curve.counts[i]);
        const double f2 = static_cast<double>(curve.counts[i + 1]);
        curve.second_diff[i] = 2.0 * ((f2 - f1) / h1 - (f1 - f0) / h0) / (h0 + h1);
    }

    // The count curve is non-increasing, so the knee where it levels off has
    // f'' > 0. A staircase also has a concave corner (f'' < 0) at the top of
    // each drop; that corner is only used when no convex one exists.
    // Strict '>' keeps the smallest theta on ties.
    auto pick = [&](bool convex_only) {
        double best = -1.0;
        std::size_t at = 0;
        for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
            if (convex_only && !(curve.second_diff[i] > 0.0)) continue;
            if (std::abs(curve.second_diff[i]) > best) {
                best = std::abs(curve.second_diff[i]);
                at = i;
            }
        }
        return at;
    };
    curve.selected = pick(true);
    if (curve.selected == 0) curve.selected = pick(false);
    return curve;
}

/// Elbow of the trajectory-count curve: the interior grid value maximizing |f''|,
/// preferring convex knees (see theta_curve).
inline double select_theta(const std::vector<DeviceLog>& logs, const std::vector<double>& grid) {
    const auto curve = theta_curve(logs, grid);
    return curve.grid[curve.selected];
}

inline double max_adjacent_jump(const Trajectory& traj, const GeoConstants& c = {}) {
    double jump = 0.0;
    for (std::size_t i = 1; i < traj.points.size(); ++i)
        jump = std::max(jump, haversine_distance(traj.points[i - 1].coord, traj.points[i].coord, c));
    return jump;
}

inline bool is_noise(const Trajectory& traj, const SegmentationConfig& cfg, const GeoConstants& c = {}) {
    return traj.points.size() < cfg.min_points || max_adjacent_jump(traj, c) > cfg.max_jump ||
           traj.length < cfg.min_length;
}

/// Drops whole trajectories that are too sparse, contain an outlier jump, or are too short.
inline std::vector<Trajectory> filter_noise(const std::vector<Trajectory>& trajs, const SegmentationConfig& cfg,
                                            const GeoConstants& c = {}) {
    std::vector<Trajectory> out;
    for (const auto& t : trajs)
        if (!is_noise(t, cfg, c)) out.push_back(t);
    return out;
}

/// Splits every log at `theta` and removes noise trajectories.
inline std::vector<Trajectory> segment(const std::vector<DeviceLog>& logs, double theta,
                                       const SegmentationConfig& cfg, const GeoConstants& c = {}) {
    std::vector<Trajectory> all;
    for (const auto& log : logs) {
        auto parts = split_into_trajectories(log, theta, c);
        all.insert(all.end(), std::make_move_iterator(parts.begin()), std::make_move_iterator(parts.end()));
    }
    return filter_noise(all, cfg, c);
}

// Trajectory file: the canonical record table with a trajectory_id column appended.

inline void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajs) {
    out << "device_id,timestamp,lat,lng,trajectory_id\n";
    for (const auto& t : trajs)
        for (const auto& r : t.points)
            out << detail::csv_field(r.device_id) << ',' << r.timestamp << ',' << detail::fixed(r.coord.lat, 8) << ','
                << detail::fixed(r.coord.lng, 8) << ',' << detail::csv_field(t.id) << '\n';
}

/// Reads a trajectory file back; trajectories appear in first-seen order and
/// lengths are recomputed.
inline std::vector<Trajectory> read_trajectories_csv(std::istream& in, const GeoConstants& c = {}) {
    std::string line;
    if (!std::getline(in, line)) return {};
    const auto header = detail::split_fields(line, ',');
    const std::size_t id_col = detail::resolve_column(std::string("device_id"), header);
    const std::size_t time_col = detail::resolve_column(std::string("timestamp"), header);
    const std::size_t lat_col = detail::resolve_column(std::string("lat"), header);
    const std::size_t lng_col = detail::resolve_column(std::string("lng"), header);
    const std::size_t traj_col = detail::resolve_column(std::string("trajectory_id"), header);

    std::vector<Trajectory> out;
    std::map<std::string, std::size_t> index;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_fields(line, ',');
        const auto ts = f.size() > time_col ? detail::parse_int(f[time_col]) : std::nullopt;
        const auto lat = f.size() > lat_col ? detail::parse_double(f[lat_col]) : std::nullopt;
        const auto lng = f.size() > lng_col ? detail::parse_double(f[lng_col]) : std::nullopt;
        if (f.size() <= std::max(id_col, traj_col) || !ts || !lat || !lng)
            throw InputError("malformed trajectory row at line " + std::to_string(line_no));
        const std::string tid(detail::trim(f[traj_col]));
        auto [it, fresh] = index.try_emplace(tid, out.size());
        if (fresh) out.push_back({tid, std::string(detail::trim(f[id_col])), {}, 0.0});
        out[it->second].points.push_back({out[it->second].device_id, *ts, make_coord(*lat, *lng)});
    }
    for (auto& t : out) t.length = compute_length(t, c);
    return out;
}

inline std::vector<Trajectory> read_trajectories_csv(const std::string& path, const GeoConstants& c = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_trajectories_csv(in, c);
}

} // namespace tpm
