#pragma once

#include "tpm/detail/text.hpp"
#include "tpm/errors.hpp"
#include "tpm/geodesy.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tpm {

using Timestamp = std::int64_t; // seconds since the Unix epoch, UTC

/// One sensed GPS fix.
struct GpsRecord {
    std::string device_id;
    Timestamp timestamp = 0;
    GeoCoord coord;

    friend bool operator==(const GpsRecord&, const GpsRecord&) = default;
};

/// All records of one device, ascending by timestamp (ties keep input order).
struct DeviceLog {
    std::string device_id;
    std::vector<GpsRecord> records;
};

/// A column is addressed either by zero-based index or by header name.
using ColumnRef = std::variant<std::size_t, std::string>;

/// Parses "3" as an index and anything else as a header name.
inline ColumnRef parse_column_ref(std::string_view s) {
    if (auto i = detail::parse_int(s); i && *i >= 0) return static_cast<std::size_t>(*i);
    return std::string(detail::trim(s));
}

struct CsvLayout {
    ColumnRef id = std::string("device_id");
    ColumnRef time = std::string("timestamp");
    ColumnRef lat = std::string("lat");
    ColumnRef lng = std::string("lng");
    char delimiter = ',';
    bool has_header = true;
};

struct LoadResult {
    std::vector<GpsRecord> records;
    std::size_t rejects = 0;
};

/// Accepts integer epoch seconds or ISO-8601 date-times
/// ("2020-01-01T08:15:00", optional fraction, 'Z' or +HH:MM / +HHMM offset,
/// a space may replace the 'T'). Fractional seconds are truncated.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    s = detail::trim(s);
    if (auto v = detail::parse_int(s)) return *v;

    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        if (pos + len > s.size()) return std::nullopt;
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
        s[16] != ':')
        return std::nullopt;
    auto y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2), se = num(17, 2);
    if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
    if (*h > 23 || *mi > 59 || *se > 60) return std::nullopt;

    using namespace std::chrono;
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;

    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        const auto start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
    }
    std::int64_t offset = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z' && pos + 1 == s.size()) {
            pos = s.size();
        } else if (s[pos] == '+' || s[pos] == '-') {
            const int sign = s[pos] == '-' ? -1 : 1;
            auto oh = num(pos + 1, 2);
            std::optional<int> om;
            if (pos + 3 < s.size() && s[pos + 3] == ':') {
                om = num(pos + 4, 2);
                pos += 6;
            } else {
                om = num(pos + 3, 2);
                pos += 5;
            }
            if (!oh || !om || pos != s.size()) return std::nullopt;
            offset = sign * (*oh * 3600 + *om * 60);
        } else {
            return std::nullopt;
        }
    }
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * 86400 + *h * 3600 + *mi * 60 + *se - offset;
}

namespace detail {

inline std::size_t resolve_column(const ColumnRef& ref, const std::vector<std::string>& header) {
    if (auto idx = std::get_if<std::size_t>(&ref)) return *idx;
    const auto& name = std::get<std::string>(ref);
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == name) return i;
    throw InputError("column '" + name + "' not found in header");
}

} // namespace detail

/// Parses delimited GPS rows. Unmapped columns are ignored; rows with
/// missing or out-of-range fields are counted in `rejects` and skipped.
inline LoadResult load_csv(std::istream& in, const CsvLayout& layout = {}) {
    LoadResult out;
    std::string line;
    std::vector<std::string> header;
    if (layout.has_header) {
        if (!std::getline(in, line)) return out;
        header = detail::split_fields(line, layout.delimiter);
    } else if (std::holds_alternative<std::string>(layout.id) || std::holds_alternative<std::string>(layout.time) ||
               std::holds_alternative<std::string>(layout.lat) || std::holds_alternative<std::string>(layout.lng)) {
        throw InputError("columns addressed by name require a header row");
    }
    const std::size_t id_col = detail::resolve_column(layout.id, header);
    const std::size_t time_col = detail::resolve_column(layout.time, header);
    const std::size_t lat_col = detail::resolve_column(layout.lat, header);
    const std::size_t lng_col = detail::resolve_column(layout.lng, header);
    const std::size_t needed = std::max({id_col, time_col, lat_col, lng_col}) + 1;

    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_fields(line, layout.delimiter);
        if (f.size() < needed) {
            ++out.rejects;
            continue;
        }
        const auto id = detail::trim(f[id_col]);
        const auto ts = parse_timestamp(f[time_col]);
        const auto lat = detail::parse_double(f[lat_col]);
        const auto lng = detail::parse_double(f[lng_col]);
        if (id.empty() || !ts || *ts < 0 || !lat || !lng || !is_valid_lat(*lat) || !std::isfinite(*lng) ||
            *lng < -180.0 || *lng > 180.0) {
            ++out.rejects;
            continue;
        }
        out.records.push_back({std::string(id), *ts, make_coord(*lat, *lng)});
    }
    return out;
}

inline LoadResult load_csv(const std::string& path, const CsvLayout& layout = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return load_csv(in, layout);
}

/// Splits records by device id (output ordered by id) and stable-sorts each
/// device's records by timestamp.
inline std::vector<DeviceLog> group_by_device(const std::vector<GpsRecord>& records) {
    std::map<std::string, std::vector<GpsRecord>> by_id;
    for (const auto& r : records) by_id[r.device_id].push_back(r);
    std::vector<DeviceLog> logs;
    logs.reserve(by_id.size());
    for (auto& [id, recs] : by_id) {
        std::stable_sort(recs.begin(), recs.end(),
                         [](const GpsRecord& a, const GpsRecord& b) { return a.timestamp < b.timestamp; });
        logs.push_back({id, std::move(recs)});
    }
    return logs;
}

inline bool is_sorted_log(const DeviceLog& log) {
    for (std::size_t i = 1; i < log.records.size(); ++i)
        if (log.records[i].timestamp < log.records[i - 1].timestamp) return false;
    return std::all_of(log.records.begin(), log.records.end(),
                       [&](const GpsRecord& r) { return r.device_id == log.device_id; });
}

/// Canonical record table: device_id,timestamp,lat,lng.
inline void write_records_csv(std::ostream& out, const std::vector<GpsRecord>& records) {
    out << "device_id,timestamp,lat,lng\n";
    for (const auto& r : records)
        out << detail::csv_field(r.device_id) << ',' << r.timestamp << ',' << detail::fixed(r.coord.lat, 8) << ','
            << detail::fixed(r.coord.lng, 8) << '\n';
}

} // namespace tpm
