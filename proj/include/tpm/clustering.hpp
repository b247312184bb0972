#pragma once

#include "tpm/detail/random.hpp"
#include "tpm/detail/text.hpp"
#include "tpm/errors.hpp"
#include "tpm/geodesy.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace tpm {

using Label = std::uint32_t;

struct ClusterConfig {
    std::size_t k = 20;
    std::uint64_t seed = 42;
    std::size_t max_iters = 100;
    double tol = 1.0;         // meters of centroid movement
    std::size_t threads = 1;  // workers for the assignment step

    void validate() const {
        if (k < 1) throw ConfigError("k must be at least 1");
        if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
        if (!(tol >= 0.0)) throw ConfigError("tol must be non-negative");
        if (threads < 1) throw ConfigError("threads must be at least 1");
    }
};

/// Fitted k-means model: the dense areas and the labels of the training points.
struct ClusterModel {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<GeoCoord> centroids;
    std::vector<Label> assignment;         // one label per training point
    std::vector<std::size_t> counts;       // members per label
    double inertia = 0.0;                  // sum of squared distances, m^2
    std::vector<double> inertia_history;   // inertia after each assignment step
    std::size_t iterations = 0;
    std::size_t reseeds = 0;               // empty-cluster fallbacks taken
};

/// Index of the nearest centroid by haversine distance; ties go to the lowest index.
inline Label nearest_centroid(const GeoCoord& p, std::span<const GeoCoord> centroids, double* dist = nullptr,
                              const GeoConstants& c = {}) {
    Label best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.size(); ++j) {
        const double d = haversine_distance(p, centroids[j], c);
        if (d < best_d) {
            best_d = d;
            best = static_cast<Label>(j);
        }
    }
    if (dist) *dist = best_d;
    return best;
}

inline Label predict_label(const GeoCoord& coord, const ClusterModel& model, const GeoConstants& c = {}) {
    return nearest_centroid(coord, model.centroids, nullptr, c);
}

/// D^2-weighted seeding: the first centre uniformly at random, each further
/// centre with probability proportional to the squared distance to the
/// closest centre chosen so far. When every remaining weight is zero the next
/// centre is drawn uniformly from the unchosen points.
inline std::vector<GeoCoord> kmeanspp_init(std::span<const GeoCoord> points, std::size_t k, std::uint64_t seed,
                                           const GeoConstants& c = {}) {
    if (k < 1) throw ConfigError("k must be at least 1");
    if (points.size() < k) throw InputError("fewer points than clusters");

    detail::Rng rng(seed);
    const std::size_t n = points.size();
    std::vector<GeoCoord> centres;
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    auto take = [&](std::size_t idx) {
        chosen[idx] = true;
        centres.push_back(points[idx]);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = haversine_distance(points[i], points[idx], c);
            d2[i] = std::min(d2[i], d * d);
        }
    };

    take(rng.index(n));
    while (centres.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!chosen[i]) total += d2[i];

        std::size_t pick = n;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double cum = 0.0;
            std::size_t last_positive = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || d2[i] <= 0.0) continue;
                last_positive = i;
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) pick = last_positive;
        } else {
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) free.push_back(i);
            pick = free[rng.index(free.size())];
        }
        take(pick);
    }
    return centres;
}

namespace detail {

// Nearest-centroid labels and distances for every point; the work is split
// into contiguous chunks so the result does not depend on the worker count.
inline void assign_points(std::span<const GeoCoord> points, std::span<const GeoCoord> centroids,
                          std::vector<Label>& labels, std::vector<double>& dists, std::size_t threads,
                          const GeoConstants& c) {
    const std::size_t n = points.size();
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) labels[i] = nearest_centroid(points[i], centroids, &dists[i], c);
    };
    const std::size_t workers = std::min(threads, std::max<std::size_t>(n / 1024, 1));
    if (workers <= 1) {
        work(0, n);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo < hi) pool.emplace_back(work, lo, hi);
    }
}

inline double sum_squares(const std::vector<double>& dists) {
    double s = 0.0;
    for (double d : dists) s += d * d;
    return s;
}

} // namespace detail

/// Lloyd refinement from k-means++ seeds. Assignment uses haversine meters;
/// centroids are arithmetic means of member latitudes and longitudes, which
/// is a good approximation at city scale. Stops when no centroid moves by
/// `tol` meters or more, or after `max_iters` updates. An empty cluster is
/// re-seeded at the point farthest from its own centroid.
inline ClusterModel kmeans_fit(std::span<const GeoCoord> points, const ClusterConfig& cfg,
                               const GeoConstants& c = {}) {
    cfg.validate();
    if (points.size() < cfg.k) throw InputError("fewer points than clusters");

    const std::size_t n = points.size();
    ClusterModel model;
    model.k = cfg.k;
    model.seed = cfg.seed;
    model.centroids = kmeanspp_init(points, cfg.k, cfg.seed, c);
    model.assignment.assign(n, 0);
    std::vector<double> dists(n, 0.0);

    detail::assign_points(points, model.centroids, model.assignment, dists, cfg.threads, c);
    model.inertia_history.push_back(detail::sum_squares(dists));

    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        std::vector<double> sum_lat(cfg.k, 0.0), sum_lng(cfg.k, 0.0);
        std::vector<std::size_t> members(cfg.k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const Label l = model.assignment[i];
            sum_lat[l] += points[i].lat;
            sum_lng[l] += points[i].lng;
            ++members[l];
        }

        std::vector<GeoCoord> next(cfg.k);
        std::vector<bool> used(n, false);
        for (std::size_t j = 0; j < cfg.k; ++j) {
            if (members[j] > 0) {
                const double m = static_cast<double>(members[j]);
                next[j] = {sum_lat[j] / m, sum_lng[j] / m};
                continue;
            }
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!used[i] && dists[i] > far_d) {
                    far_d = dists[i];
                    far = i;
                }
            }
            used[far] = true;
            next[j] = points[far];
            ++model.reseeds;
        }

        double shift = 0.0;
        for (std::size_t j = 0; j < cfg.k; ++j)
            shift = std::max(shift, haversine_distance(model.centroids[j], next[j], c));
        model.centroids = std::move(next);
        ++model.iterations;

        detail::assign_points(points, model.centroids, model.assignment, dists, cfg.threads, c);
        model.inertia_history.push_back(detail::sum_squares(dists));
        if (shift < cfg.tol) break;
    }

    model.inertia = model.inertia_history.back();
    model.counts.assign(cfg.k, 0);
    for (Label l : model.assignment) ++model.counts[l];
    return model;
}

// Model artifact: a small line-oriented text file.
//
//   tpm-cluster-model 1
//   k <k>
//   seed <seed>
//   iterations <n>
//   inertia <m^2>
//   centroid <label> <lat> <lng> <count>     (k lines)
//
// Numbers are written in shortest round-trip form so a reloaded model
// predicts exactly the same labels.

inline void write_model(std::ostream& out, const ClusterModel& m) {
    out << "tpm-cluster-model 1\n";
    out << "k " << m.k << "\n";
    out << "seed " << m.seed << "\n";
    out << "iterations " << m.iterations << "\n";
    out << "inertia " << detail::exact(m.inertia) << "\n";
    for (std::size_t j = 0; j < m.centroids.size(); ++j) {
        const std::size_t count = j < m.counts.size() ? m.counts[j] : 0;
        out << "centroid " << j << ' ' << detail::exact(m.centroids[j].lat) << ' '
            << detail::exact(m.centroids[j].lng) << ' ' << count << "\n";
    }
}

/// Restores k, seed, centroids, counts and inertia. Training assignments are
/// not part of the artifact.
inline ClusterModel read_model(std::istream& in) {
    ClusterModel m;
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "tpm-cluster-model 1")
        throw InputError("not a cluster model file");
    bool have_k = false;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "k") {
            ss >> m.k;
            have_k = true;
            m.centroids.assign(m.k, {});
            m.counts.assign(m.k, 0);
        } else if (key == "seed") {
            ss >> m.seed;
        } else if (key == "iterations") {
            ss >> m.iterations;
        } else if (key == "inertia") {
            std::string v;
            ss >> v;
            m.inertia = detail::parse_double(v).value_or(0.0);
        } else if (key == "centroid") {
            std::size_t j = 0, count = 0;
            std::string lat, lng;
            ss >> j >> lat >> lng >> count;
            const auto plat = detail::parse_double(lat), plng = detail::parse_double(lng);
            if (!have_k || ss.fail() || j >= m.k || !plat || !plng) throw InputError("bad centroid line: " + line);
            m.centroids[j] = {*plat, *plng};
            m.counts[j] = count;
        } else {
            throw InputError("unknown model field '" + key + "'");
        }
        if (ss.fail()) throw InputError("bad model line: " + line);
    }
    if (!have_k || m.k == 0) throw InputError("model file has no k");
    return m;
}

inline void save_model(const std::string& path, const ClusterModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_model(out, m);
}

inline ClusterModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_model(in);
}

} // namespace tpm
