#pragma once

// Test-only oracles. None of these call into the code paths they check.

#include "tpm/tpm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tpm::oracle {

inline constexpr double kRadius = 6371000.0;

/// Great-circle distance from the chord between unit vectors; agrees with
/// haversine to rounding and shares none of its code.
inline double chord_distance(const GeoCoord& a, const GeoCoord& b, double radius = kRadius) {
    auto to_xyz = [](const GeoCoord& c) {
        const double la = c.lat * std::numbers::pi / 180.0, lo = c.lng * std::numbers::pi / 180.0;
        return std::array<double, 3>{std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la)};
    };
    const auto p = to_xyz(a), q = to_xyz(b);
    const double chord = std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) +
                                   (p[2] - q[2]) * (p[2] - q[2]));
    return 2.0 * radius * std::asin(std::min(1.0, chord / 2.0));
}

/// Trajectory boundaries by testing every adjacent gap on its own.
/// Returns record indices per trajectory.
inline std::vector<std::vector<std::size_t>> brute_split(const DeviceLog& log, double theta) {
    const std::size_t n = log.records.size();
    std::vector<bool> starts(n, false);
    for (std::size_t i = 0; i < n; ++i)
        starts[i] = i == 0 || double(log.records[i].timestamp) - double(log.records[i - 1].timestamp) >= theta;
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (starts[i]) out.emplace_back();
        out.back().push_back(i);
    }
    return out;
}

inline double choose2(double n) { return n * (n - 1.0) / 2.0; }

/// Adjusted Rand index from the contingency table.
template <class A, class B>
double adjusted_rand_index(const std::vector<A>& x, const std::vector<B>& y) {
    std::map<std::pair<A, B>, double> cells;
    std::map<A, double> rows;
    std::map<B, double> cols;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cells[{x[i], y[i]}] += 1;
        rows[x[i]] += 1;
        cols[y[i]] += 1;
    }
    double index = 0, a = 0, b = 0;
    for (auto& [k, v] : cells) index += choose2(v);
    for (auto& [k, v] : rows) a += choose2(v);
    for (auto& [k, v] : cols) b += choose2(v);
    const double expected = a * b / choose2(double(x.size()));
    const double max_index = 0.5 * (a + b);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

/// Longest common subsequence length, O(|a|·|b|).
inline std::size_t lcs(const std::vector<Label>& a, const std::vector<Label>& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    return t[a.size()][b.size()];
}

inline bool brute_contains(const std::vector<Label>& outer, const std::vector<Label>& inner, ContainmentMode mode) {
    if (mode == ContainmentMode::subsequence) return inner.size() <= outer.size() && lcs(outer, inner) == inner.size();
    for (Label l : inner) {
        bool found = false;
        for (Label m : outer) found = found || m == l;
        if (!found) return false;
    }
    return true;
}

struct BruteSeq {
    std::string id;
    std::vector<Label> labels;
    double length;
};

/// Whole matching rule from first principles: nearest centroid by chord
/// distance, adjacent-repeat collapse, endpoint grouping by scanning, spread
/// pruning by re-sorting each round, and pairwise containment via LCS.
inline std::set<PatternPair> brute_pairs(const std::vector<Trajectory>& trajs, const std::vector<GeoCoord>& centroids,
                                         double epsilon, ContainmentMode mode) {
    std::vector<BruteSeq> seqs;
    for (const auto& t : trajs) {
        BruteSeq s{t.id, {}, 0.0};
        for (std::size_t i = 0; i < t.points.size(); ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < centroids.size(); ++j)
                if (chord_distance(t.points[i].coord, centroids[j]) < chord_distance(t.points[i].coord, centroids[best]))
                    best = j;
            if (s.labels.empty() || s.labels.back() != best) s.labels.push_back(Label(best));
            if (i > 0) s.length += chord_distance(t.points[i - 1].coord, t.points[i].coord);
        }
        seqs.push_back(std::move(s));
    }

    std::set<PatternPair> pairs;
    std::vector<bool> done(seqs.size(), false);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        if (done[i]) continue;
        std::vector<BruteSeq> group;
        for (std::size_t j = i; j < seqs.size(); ++j) {
            if (seqs[j].labels.front() == seqs[i].labels.front() && seqs[j].labels.back() == seqs[i].labels.back()) {
                group.push_back(seqs[j]);
                done[j] = true;
            }
        }
        for (;;) {
            double lo = 1e300, hi = -1e300;
            for (auto& s : group) {
                lo = std::min(lo, s.length);
                hi = std::max(hi, s.length);
            }
            if (group.size() < 2 || hi - lo < epsilon) break;
            std::vector<double> ls;
            for (auto& s : group) ls.push_back(s.length);
            std::sort(ls.begin(), ls.end());
            const double med = ls.size() % 2 ? ls[ls.size() / 2] : (ls[ls.size() / 2 - 1] + ls[ls.size() / 2]) / 2;
            std::sort(group.begin(), group.end(), [&](const BruteSeq& a, const BruteSeq& b) {
                const double da = std::abs(a.length - med), db = std::abs(b.length - med);
                if (da != db) return da > db;
                if (a.length != b.length) return a.length > b.length;
                return a.id < b.id;
            });
            group.erase(group.begin());
        }
        for (auto& x : group)
            for (auto& y : group) {
                if (x.id == y.id) continue;
                const bool xy = brute_contains(x.labels, y.labels, mode);
                const bool yx = brute_contains(y.labels, x.labels, mode);
                if (xy && (!yx || x.id < y.id)) pairs.insert({x.id, y.id});
            }
    }
    return pairs;
}

inline std::set<PatternPair> pair_set(const std::vector<MatchGroup>& groups) {
    std::set<PatternPair> s;
    for (const auto& g : groups) s.insert(g.pattern_pairs.begin(), g.pattern_pairs.end());
    return s;
}

/// Device log from (timestamp) list along the equator, 100 m per record.
inline DeviceLog log_from_times(const std::string& id, const std::vector<Timestamp>& ts) {
    DeviceLog log{id, {}};
    for (std::size_t i = 0; i < ts.size(); ++i)
        log.records.push_back({id, ts[i], {0.0, 0.0009 * double(i)}});
    return log;
}

/// Random sorted device log with up to `max_records` records and a mix of
/// short and long gaps.
inline DeviceLog random_log(std::mt19937_64& rng, const std::string& id, std::size_t max_records) {
    std::uniform_int_distribution<std::size_t> len(0, max_records);
    std::uniform_int_distribution<int> kind(0, 9);
    std::uniform_int_distribution<Timestamp> small(0, 240), big(300, 20000);
    std::vector<Timestamp> ts;
    Timestamp t = 1600000000;
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) t += kind(rng) < 8 ? small(rng) : big(rng);
        ts.push_back(t);
    }
    return log_from_times(id, ts);
}

/// Trajectory along a list of coordinates, one point per minute.
inline Trajectory make_traj(const std::string& id, const std::vector<GeoCoord>& coords, Timestamp t0 = 0) {
    Trajectory t{id, "dev", {}, 0.0};
    for (std::size_t i = 0; i < coords.size(); ++i) t.points.push_back({"dev", t0 + Timestamp(i) * 60, coords[i]});
    t.length = compute_length(t);
    return t;
}

inline LabelSequence seq(const std::string& id, std::vector<Label> labels, double length = 0.0) {
    return {id, std::move(labels), length};
}

} // namespace tpm::oracle
