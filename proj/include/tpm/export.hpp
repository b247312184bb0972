#pragma once

#include "tpm/clustering.hpp"
#include "tpm/detail/text.hpp"
#include "tpm/errors.hpp"
#include "tpm/matching.hpp"
#include "tpm/segmentation.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

namespace tpm {

struct DenseArea {
    Label label = 0;
    GeoCoord centre;
    std::size_t count = 0;
};

struct TrajectoryLine {
    std::string device_id;
    std::string trajectory_id;
    std::vector<GeoCoord> coords;
};

enum class PatternRole { container, contained };

struct PatternLine {
    std::size_t group_index = 0;
    std::string trajectory_id;
    PatternRole role = PatternRole::contained;
    std::vector<GeoCoord> coords;
};

/// Everything the three map layers need: dense areas, trajectories, patterns.
struct ExportBundle {
    std::vector<DenseArea> dense_areas;
    std::vector<TrajectoryLine> trajectories;
    std::vector<PatternLine> pattern_groups;
};

/// Assembles a bundle. Pattern groups are the groups with at least one pair,
/// numbered in key order; every pair participant becomes one feature whose
/// role is `container` if it contains any other member of its group.
/// Throws InputError when a pattern references an unknown trajectory.
inline ExportBundle make_bundle(const ClusterModel& model, const std::vector<Trajectory>& trajs,
                                const std::vector<MatchGroup>& groups) {
    ExportBundle b;
    for (std::size_t j = 0; j < model.centroids.size(); ++j)
        b.dense_areas.push_back({static_cast<Label>(j), model.centroids[j], j < model.counts.size() ? model.counts[j] : 0});

    std::map<std::string, const Trajectory*> by_id;
    for (const auto& t : trajs) {
        std::vector<GeoCoord> coords;
        coords.reserve(t.points.size());
        for (const auto& p : t.points) coords.push_back(p.coord);
        b.trajectories.push_back({t.device_id, t.id, std::move(coords)});
        by_id[t.id] = &t;
    }
    std::sort(b.trajectories.begin(), b.trajectories.end(),
              [](const auto& x, const auto& y) { return x.trajectory_id < y.trajectory_id; });

    auto sorted = groups;
    std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.key < y.key; });
    std::size_t index = 0;
    for (const auto& g : sorted) {
        if (!g.is_pattern()) continue;
        std::set<std::string> containers, participants;
        for (const auto& [outer, inner] : g.pattern_pairs) {
            containers.insert(outer);
            participants.insert(outer);
            participants.insert(inner);
        }
        for (const auto& id : participants) {
            auto it = by_id.find(id);
            if (it == by_id.end()) throw InputError("pattern references unknown trajectory '" + id + "'");
            PatternLine line;
            line.group_index = index;
            line.trajectory_id = id;
            line.role = containers.count(id) ? PatternRole::container : PatternRole::contained;
            for (const auto& p : it->second->points) line.coords.push_back(p.coord);
            b.pattern_groups.push_back(std::move(line));
        }
        ++index;
    }
    return b;
}

namespace detail {

inline std::string json_string(std::string_view s) {
    std::string out = "\"";
    for (unsigned char ch : s) {
        switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\b': out += "\\b"; break;
        case '\f': out += "\\f"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (ch < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                out += buf;
            } else {
                out.push_back(static_cast<char>(ch));
            }
        }
    }
    out.push_back('"');
    return out;
}

// GeoJSON order is [longitude, latitude].
inline std::string json_position(const GeoCoord& c) {
    return "[" + fixed(c.lng, 7) + "," + fixed(c.lat, 7) + "]";
}

inline std::string json_line(const std::vector<GeoCoord>& coords) {
    std::string s = "[";
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (i) s.push_back(',');
        s += json_position(coords[i]);
    }
    s.push_back(']');
    return s;
}

inline void write_collection(std::ostream& out, const std::vector<std::string>& features) {
    out << "{\"type\":\"FeatureCollection\",\"features\":[";
    for (std::size_t i = 0; i < features.size(); ++i) out << (i ? ",\n" : "\n") << features[i];
    out << (features.empty() ? "]}\n" : "\n]}\n");
}

} // namespace detail

inline void write_dense_areas_geojson(std::ostream& out, const ExportBundle& b) {
    auto areas = b.dense_areas;
    std::sort(areas.begin(), areas.end(), [](const auto& x, const auto& y) { return x.label < y.label; });
    std::vector<std::string> features;
    for (const auto& a : areas)
        features.push_back("{\"type\":\"Feature\",\"geometry\":{\"type\":\"Point\",\"coordinates\":" +
                           detail::json_position(a.centre) + "},\"properties\":{\"label\":" +
                           std::to_string(a.label) + ",\"count\":" + std::to_string(a.count) + "}}");
    detail::write_collection(out, features);
}

inline void write_trajectories_geojson(std::ostream& out, const ExportBundle& b) {
    auto lines = b.trajectories;
    std::sort(lines.begin(), lines.end(), [](const auto& x, const auto& y) { return x.trajectory_id < y.trajectory_id; });
    std::vector<std::string> features;
    for (const auto& l : lines)
        features.push_back("{\"type\":\"Feature\",\"geometry\":{\"type\":\"LineString\",\"coordinates\":" +
                           detail::json_line(l.coords) + "},\"properties\":{\"device_id\":" +
                           detail::json_string(l.device_id) + ",\"trajectory_id\":" +
                           detail::json_string(l.trajectory_id) + "}}");
    detail::write_collection(out, features);
}

inline void write_patterns_geojson(std::ostream& out, const ExportBundle& b) {
    auto lines = b.pattern_groups;
    std::sort(lines.begin(), lines.end(), [](const auto& x, const auto& y) {
        return std::tie(x.group_index, x.trajectory_id) < std::tie(y.group_index, y.trajectory_id);
    });
    std::vector<std::string> features;
    for (const auto& l : lines)
        features.push_back("{\"type\":\"Feature\",\"geometry\":{\"type\":\"LineString\",\"coordinates\":" +
                           detail::json_line(l.coords) + "},\"properties\":{\"group_index\":" +
                           std::to_string(l.group_index) + ",\"trajectory_id\":" +
                           detail::json_string(l.trajectory_id) + ",\"role\":\"" +
                           (l.role == PatternRole::container ? "container" : "contained") + "\"}}");
    detail::write_collection(out, features);
}

/// Writes dense_areas.geojson, trajectories.geojson and patterns.geojson into
/// `out_dir` (created if missing) and returns their paths.
inline std::vector<std::filesystem::path> export_geojson(const ExportBundle& b, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

    std::vector<std::filesystem::path> paths;
    auto emit = [&](const char* name, void (*writer)(std::ostream&, const ExportBundle&)) {
        const auto path = out_dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        writer(out, b);
        if (!out) throw IoError("write failed for '" + path.string() + "'");
        paths.push_back(path);
    };
    emit("dense_areas.geojson", write_dense_areas_geojson);
    emit("trajectories.geojson", write_trajectories_geojson);
    emit("patterns.geojson", write_patterns_geojson);
    return paths;
}

} // namespace tpm
