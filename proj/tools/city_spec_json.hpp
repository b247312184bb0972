#pragma once

#include "tpm/errors.hpp"
#include "tpm/synth.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace tpm {

/// Reads a CitySpec from JSON. Missing keys keep their defaults; hotspots are
/// objects {"lat", "lng", "radius"?} and routes are arrays of hotspot indices.
inline CitySpec city_spec_from_json(const nlohmann::json& j) {
    CitySpec s;
    try {
        s.seed = j.value("seed", s.seed);
        for (const auto& h : j.at("hotspots"))
            s.hotspots.push_back({make_coord(h.at("lat").get<double>(), h.at("lng").get<double>()),
                                  h.value("radius", 200.0)});
        for (const auto& r : j.at("routes")) s.routes.push_back(r.get<std::vector<std::size_t>>());
        s.trips_per_route = j.value("trips_per_route", s.trips_per_route);
        s.devices_per_route = j.value("devices_per_route", s.devices_per_route);
        s.point_interval = j.value("point_interval", s.point_interval);
        s.trip_gap = j.value("trip_gap", s.trip_gap);
        s.jitter_sigma = j.value("jitter_sigma", s.jitter_sigma);
        s.speed_mps = j.value("speed_mps", s.speed_mps);
        s.peak_hours = j.value("peak_hours", s.peak_hours);
        s.start_spread = j.value("start_spread", s.start_spread);
        s.epoch_start = j.value("epoch_start", s.epoch_start);
        s.utc_offset_hours = j.value("utc_offset_hours", s.utc_offset_hours);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid city spec: ") + e.what());
    }
    s.validate();
    return s;
}

inline CitySpec load_city_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
    return city_spec_from_json(j);
}

} // namespace tpm
