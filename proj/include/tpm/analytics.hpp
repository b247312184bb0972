#pragma once

#include "tpm/errors.hpp"
#include "tpm/ingest.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <vector>

namespace tpm {

/// Record counts per local hour of day.
struct HourHistogram {
    std::array<std::size_t, 24> counts{};

    std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

/// Local hour of a timestamp: floor(((t / 3600) + offset) mod 24).
inline int local_hour(Timestamp t, double utc_offset_hours) {
    const std::int64_t local = t + static_cast<std::int64_t>(std::llround(utc_offset_hours * 3600.0));
    const std::int64_t sec_of_day = ((local % 86400) + 86400) % 86400;
    return static_cast<int>(sec_of_day / 3600);
}

inline HourHistogram hourly_histogram(const std::vector<GpsRecord>& records, double utc_offset_hours = 0.0) {
    if (!(utc_offset_hours >= -12.0 && utc_offset_hours <= 14.0))
        throw ConfigError("utc offset must lie in [-12, 14] hours");
    HourHistogram h;
    for (const auto& r : records) ++h.counts[static_cast<std::size_t>(local_hour(r.timestamp, utc_offset_hours))];
    return h;
}

inline void write_histogram_csv(std::ostream& out, const HourHistogram& h) {
    out << "hour,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) out << i << ',' << h.counts[i] << '\n';
}

} // namespace tpm
