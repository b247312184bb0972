#pragma once

#include "tpm/detail/random.hpp"
#include "tpm/detail/text.hpp"
#include "tpm/errors.hpp"
#include "tpm/geodesy.hpp"
#include "tpm/ingest.hpp"
#include "tpm/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace tpm {

struct Hotspot {
    GeoCoord centre;
    double radius = 200.0; // meters
};

/// Synthetic city: hotspots, routes through them, and a trip schedule.
struct CitySpec {
    std::uint64_t seed = 1;
    std::vector<Hotspot> hotspots;
    std::vector<std::vector<std::size_t>> routes; // hotspot indices, >= 2 each
    std::size_t trips_per_route = 10;
    std::size_t devices_per_route = 1;
    double point_interval = 60.0; // seconds
    double trip_gap = 1800.0;     // seconds, minimum idle time between trips of a device
    double jitter_sigma = 20.0;   // meters
    double speed_mps = 5.0;
    std::vector<int> peak_hours{8, 13, 17}; // local hours; empty = any hour
    double start_spread = 1800.0;           // seconds after the peak hour a trip may start
    Timestamp epoch_start = 1577836800;     // 2020-01-01T00:00:00Z
    double utc_offset_hours = 0.0;

    void validate() const {
        if (hotspots.size() < 2) throw ConfigError("city needs at least 2 hotspots");
        for (const auto& h : hotspots)
            if (!is_valid(h.centre) || !(h.radius >= 0.0)) throw ConfigError("invalid hotspot");
        for (const auto& r : routes) {
            if (r.size() < 2) throw ConfigError("route needs at least 2 hotspots");
            for (auto i : r)
                if (i >= hotspots.size()) throw ConfigError("route references unknown hotspot");
        }
        if (devices_per_route < 1) throw ConfigError("devices_per_route must be at least 1");
        if (!(point_interval >= 1.0) || point_interval != std::floor(point_interval))
            throw ConfigError("point_interval must be a whole number of seconds >= 1");
        if (!(point_interval < trip_gap)) throw ConfigError("point_interval must be below trip_gap");
        if (!(jitter_sigma >= 0.0)) throw ConfigError("jitter_sigma must be non-negative");
        if (!(speed_mps > 0.0)) throw ConfigError("speed must be positive");
        if (!(start_spread >= 0.0 && start_spread < 86400.0)) throw ConfigError("start_spread out of range");
        for (int h : peak_hours)
            if (h < 0 || h > 23) throw ConfigError("peak hours must lie in [0, 23]");
        if (epoch_start < 0) throw ConfigError("epoch_start must be non-negative");
    }
};

struct PlantedTrip {
    std::size_t trip_id = 0;
    std::string device_id;
    std::size_t route = 0;
    std::string trajectory_id; // id segmentation assigns when it recovers this trip exactly
    Timestamp start = 0;
    Timestamp end = 0;
    std::size_t first_record = 0; // index into SynthOutput::records
    std::size_t record_count = 0;
};

struct SynthTruth {
    std::vector<PlantedTrip> trips;
    std::vector<std::size_t> record_trip;    // trip id per record
    std::vector<int> record_hotspot;         // hotspot whose radius holds the un-jittered point, else -1
    std::vector<std::vector<std::size_t>> co_route; // trip ids per route
};

struct SynthOutput {
    std::vector<GpsRecord> records;
    SynthTruth truth;
};

inline std::string synth_device_id(std::size_t route, std::size_t device) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "r%03zud%02zu", route, device);
    return buf;
}

namespace detail {

// Point at `dist` meters along a polyline of hotspot centres; each leg is a
// straight line in degree space.
inline GeoCoord along_route(const std::vector<GeoCoord>& way, const std::vector<double>& legs, double dist) {
    for (std::size_t i = 0; i < legs.size(); ++i) {
        if (dist <= legs[i] || i + 1 == legs.size()) {
            const double t = legs[i] > 0.0 ? std::clamp(dist / legs[i], 0.0, 1.0) : 1.0;
            return lerp(way[i], way[i + 1], t);
        }
        dist -= legs[i];
    }
    return way.back();
}

} // namespace detail

/// Generates GPS logs for every planted trip. Trips run at constant speed
/// along their route, one fix every point_interval seconds (the last fix sits
/// on the final hotspot), with Gaussian jitter in a local metric frame. Each
/// device waits at least trip_gap between trips and starts trips shortly
/// after one of the peak hours.
inline SynthOutput generate(const CitySpec& spec, const GeoConstants& c = {}) {
    spec.validate();
    SynthOutput out;
    out.truth.co_route.resize(spec.routes.size());
    detail::Rng rng(spec.seed);
    const auto offset_s = static_cast<Timestamp>(std::llround(spec.utc_offset_hours * 3600.0));
    const auto interval = static_cast<Timestamp>(spec.point_interval);

    for (std::size_t r = 0; r < spec.routes.size(); ++r) {
        std::vector<GeoCoord> way;
        for (auto h : spec.routes[r]) way.push_back(spec.hotspots[h].centre);
        std::vector<double> legs;
        double total = 0.0;
        for (std::size_t i = 1; i < way.size(); ++i) {
            legs.push_back(haversine_distance(way[i - 1], way[i], c));
            total += legs.back();
        }
        const auto steps = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(total / (spec.speed_mps * spec.point_interval))));

        std::vector<Timestamp> cursor(spec.devices_per_route, spec.epoch_start);
        std::vector<std::size_t> ordinal(spec.devices_per_route, 0);
        for (std::size_t trip = 0; trip < spec.trips_per_route; ++trip) {
            const std::size_t d = trip % spec.devices_per_route;
            const int hour = spec.peak_hours.empty() ? static_cast<int>(rng.index(24))
                                                     : spec.peak_hours[rng.index(spec.peak_hours.size())];
            const auto minute = static_cast<Timestamp>(std::floor(rng.uniform() * spec.start_spread));
            const Timestamp local_cursor = cursor[d] + offset_s;
            Timestamp day = local_cursor >= 0 ? local_cursor / 86400 : (local_cursor - 86399) / 86400;
            Timestamp start_local = day * 86400 + hour * 3600 + minute;
            if (start_local < local_cursor) start_local += 86400;

            PlantedTrip pt;
            pt.trip_id = out.truth.trips.size();
            pt.device_id = synth_device_id(r, d);
            pt.route = r;
            pt.trajectory_id = make_trajectory_id(pt.device_id, ordinal[d]++);
            pt.start = start_local - offset_s;
            pt.first_record = out.records.size();
            pt.record_count = steps + 1;

            for (std::size_t i = 0; i <= steps; ++i) {
                const double dist = std::min(total, spec.speed_mps * spec.point_interval * static_cast<double>(i));
                const GeoCoord truth_pos = detail::along_route(way, legs, dist);
                GeoCoord pos = truth_pos;
                if (spec.jitter_sigma > 0.0) {
                    const double east = rng.normal() * spec.jitter_sigma;
                    const double north = rng.normal() * spec.jitter_sigma;
                    pos = offset_meters(truth_pos, east, north, c);
                }
                out.records.push_back({pt.device_id, pt.start + static_cast<Timestamp>(i) * interval, pos});

                int member = -1;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t h = 0; h < spec.hotspots.size(); ++h) {
                    const double dh = haversine_distance(truth_pos, spec.hotspots[h].centre, c);
                    if (dh <= spec.hotspots[h].radius && dh < best) {
                        best = dh;
                        member = static_cast<int>(h);
                    }
                }
                out.truth.record_trip.push_back(pt.trip_id);
                out.truth.record_hotspot.push_back(member);
            }
            pt.end = out.records.back().timestamp;
            cursor[d] = pt.end + static_cast<Timestamp>(std::ceil(spec.trip_gap));
            out.truth.co_route[r].push_back(pt.trip_id);
            out.truth.trips.push_back(std::move(pt));
        }
    }
    return out;
}

/// Gaussian blobs around each hotspot centre, `per_hotspot` points each.
struct HotspotSamples {
    std::vector<GeoCoord> points;
    std::vector<std::size_t> membership;
};

inline HotspotSamples generate_hotspot_samples(const std::vector<Hotspot>& hotspots, std::size_t per_hotspot,
                                               double sigma, std::uint64_t seed, const GeoConstants& c = {}) {
    detail::Rng rng(seed);
    HotspotSamples s;
    for (std::size_t h = 0; h < hotspots.size(); ++h) {
        for (std::size_t i = 0; i < per_hotspot; ++i) {
            const double east = rng.normal() * sigma;
            const double north = rng.normal() * sigma;
            s.points.push_back(offset_meters(hotspots[h].centre, east, north, c));
            s.membership.push_back(h);
        }
    }
    return s;
}

/// Per-record truth sidecar: device_id,timestamp,trip_id,route,trajectory_id,hotspot.
inline void write_truth_csv(std::ostream& out, const SynthOutput& s) {
    out << "device_id,timestamp,trip_id,route,trajectory_id,hotspot\n";
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        const auto& trip = s.truth.trips[s.truth.record_trip[i]];
        out << detail::csv_field(s.records[i].device_id) << ',' << s.records[i].timestamp << ',' << trip.trip_id << ','
            << trip.route << ',' << detail::csv_field(trip.trajectory_id) << ',' << s.truth.record_hotspot[i] << '\n';
    }
}

} // namespace tpm
