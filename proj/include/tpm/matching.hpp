#pragma once

#include "tpm/clustering.hpp"
#include "tpm/detail/text.hpp"
#include "tpm/errors.hpp"
#include "tpm/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tpm {

/// A trajectory rewritten as the cluster labels it visits, with adjacent
/// repeats collapsed.
struct LabelSequence {
    std::string trajectory_id;
    std::vector<Label> labels;
    double length = 0.0; // meters

    Label first() const { return labels.front(); }
    Label last() const { return labels.back(); }
};

using EndpointKey = std::pair<Label, Label>;
using PatternPair = std::pair<std::string, std::string>; // (container id, contained id)

struct MatchGroup {
    EndpointKey key{};
    std::vector<LabelSequence> members;
    std::vector<PatternPair> pattern_pairs;

    bool is_pattern() const { return !pattern_pairs.empty(); }
};

enum class ContainmentMode { subsequence, set_inclusion };

inline std::string_view to_string(ContainmentMode m) {
    return m == ContainmentMode::subsequence ? "subsequence" : "set";
}

inline ContainmentMode parse_containment_mode(std::string_view s) {
    if (s == "subsequence") return ContainmentMode::subsequence;
    if (s == "set") return ContainmentMode::set_inclusion;
    throw ConfigError("unknown containment mode '" + std::string(s) + "'");
}

struct MatchConfig {
    double epsilon = 1000.0; // meters
    ContainmentMode mode = ContainmentMode::subsequence;

    void validate() const {
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    }
};

inline std::vector<Label> collapse_repeats(const std::vector<Label>& labels) {
    std::vector<Label> out;
    for (Label l : labels)
        if (out.empty() || out.back() != l) out.push_back(l);
    return out;
}

inline LabelSequence to_label_sequence(const Trajectory& traj, const ClusterModel& model, const GeoConstants& c = {}) {
    if (traj.points.empty()) throw InputError("empty trajectory '" + traj.id + "'");
    std::vector<Label> raw;
    raw.reserve(traj.points.size());
    for (const auto& p : traj.points) raw.push_back(predict_label(p.coord, model, c));
    return {traj.id, collapse_repeats(raw), traj.length};
}

/// True when `inner` can be obtained from `outer` by deleting elements.
inline bool is_subsequence(const std::vector<Label>& inner, const std::vector<Label>& outer) {
    std::size_t i = 0;
    for (std::size_t j = 0; j < outer.size() && i < inner.size(); ++j)
        if (outer[j] == inner[i]) ++i;
    return i == inner.size();
}

inline bool is_label_subset(const std::vector<Label>& inner, const std::vector<Label>& outer) {
    auto a = inner, b = outer;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

/// Does `outer` contain `inner` under the given mode?
inline bool contains(const LabelSequence& outer, const LabelSequence& inner, ContainmentMode mode) {
    if (mode == ContainmentMode::subsequence)
        return inner.labels.size() <= outer.labels.size() && is_subsequence(inner.labels, outer.labels);
    return is_label_subset(inner.labels, outer.labels);
}

/// One group per distinct (first label, last label), ordered by key.
inline std::vector<MatchGroup> group_by_endpoints(const std::vector<LabelSequence>& seqs) {
    std::map<EndpointKey, MatchGroup> groups;
    for (const auto& s : seqs) {
        if (s.labels.empty()) throw InputError("empty label sequence '" + s.trajectory_id + "'");
        auto& g = groups[{s.first(), s.last()}];
        g.key = {s.first(), s.last()};
        g.members.push_back(s);
    }
    std::vector<MatchGroup> out;
    for (auto& [key, g] : groups) out.push_back(std::move(g));
    return out;
}

inline double length_spread(const std::vector<LabelSequence>& members) {
    if (members.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(members.begin(), members.end(),
                                        [](const auto& a, const auto& b) { return a.length < b.length; });
    return hi->length - lo->length;
}

/// Removes members until the max pairwise length difference drops below
/// epsilon. Each round drops the member farthest from the median length
/// (ties: the longer one, then the lexicographically smaller id).
inline MatchGroup enforce_spread(MatchGroup group, double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    auto& m = group.members;
    while (m.size() > 1 && length_spread(m) >= epsilon) {
        std::vector<double> lengths;
        for (const auto& s : m) lengths.push_back(s.length);
        std::sort(lengths.begin(), lengths.end());
        const std::size_t mid = lengths.size() / 2;
        const double median = lengths.size() % 2 ? lengths[mid] : 0.5 * (lengths[mid - 1] + lengths[mid]);

        std::size_t victim = 0;
        for (std::size_t i = 1; i < m.size(); ++i) {
            const double di = std::abs(m[i].length - median), dv = std::abs(m[victim].length - median);
            if (di > dv || (di == dv && (m[i].length > m[victim].length ||
                                         (m[i].length == m[victim].length &&
                                          m[i].trajectory_id < m[victim].trajectory_id))))
                victim = i;
        }
        m.erase(m.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    group.pattern_pairs.clear();
    return group;
}

/// All (container, contained) pairs within a group, sorted. When two members
/// contain each other the pair is reported once, with the smaller id as container.
inline std::vector<PatternPair> find_similar(const MatchGroup& group, ContainmentMode mode) {
    std::vector<PatternPair> pairs;
    const auto& m = group.members;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (i == j || !contains(m[i], m[j], mode)) continue;
            if (contains(m[j], m[i], mode) && !(m[i].trajectory_id < m[j].trajectory_id)) continue;
            pairs.emplace_back(m[i].trajectory_id, m[j].trajectory_id);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

/// Label, group, prune and match. Groups without pairs are kept so they can be reported.
inline std::vector<MatchGroup> extract_patterns(const std::vector<Trajectory>& trajs, const ClusterModel& model,
                                                const MatchConfig& cfg, const GeoConstants& c = {}) {
    cfg.validate();
    std::vector<LabelSequence> seqs;
    seqs.reserve(trajs.size());
    for (const auto& t : trajs) seqs.push_back(to_label_sequence(t, model, c));

    auto groups = group_by_endpoints(seqs);
    for (auto& g : groups) {
        g = enforce_spread(std::move(g), cfg.epsilon);
        std::sort(g.members.begin(), g.members.end(),
                  [](const auto& a, const auto& b) { return a.trajectory_id < b.trajectory_id; });
        g.pattern_pairs = find_similar(g, cfg.mode);
    }
    return groups;
}

// Pattern report, tab separated, one item per line:
//
//   group <first> <last> <member count> <pair count>
//   member <trajectory id> <length m> <label> <label> ...
//   pair <container id> <contained id>
//
// Member and pair lines belong to the most recent group line.

inline void write_pattern_report(std::ostream& out, const std::vector<MatchGroup>& groups) {
    out << "# tpm pattern report\n";
    for (const auto& g : groups) {
        out << "group\t" << g.key.first << '\t' << g.key.second << '\t' << g.members.size() << '\t'
            << g.pattern_pairs.size() << '\n';
        for (const auto& s : g.members) {
            out << "member\t" << s.trajectory_id << '\t' << detail::fixed(s.length, 3);
            for (Label l : s.labels) out << '\t' << l;
            out << '\n';
        }
        for (const auto& [a, b] : g.pattern_pairs) out << "pair\t" << a << '\t' << b << '\n';
    }
}

inline std::vector<MatchGroup> read_pattern_report(std::istream& in) {
    std::vector<MatchGroup> groups;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto f = detail::split_fields(line, '\t');
        auto bad = [&] { return InputError("malformed pattern report line " + std::to_string(line_no)); };
        if (f[0] == "group") {
            if (f.size() < 3) throw bad();
            auto a = detail::parse_int(f[1]), b = detail::parse_int(f[2]);
            if (!a || !b || *a < 0 || *b < 0) throw bad();
            MatchGroup g;
            g.key = {static_cast<Label>(*a), static_cast<Label>(*b)};
            groups.push_back(std::move(g));
        } else if (f[0] == "member") {
            if (groups.empty() || f.size() < 4) throw bad();
            LabelSequence s;
            s.trajectory_id = f[1];
            s.length = detail::parse_double(f[2]).value_or(0.0);
            for (std::size_t i = 3; i < f.size(); ++i) {
                auto l = detail::parse_int(f[i]);
                if (!l || *l < 0) throw bad();
                s.labels.push_back(static_cast<Label>(*l));
            }
            groups.back().members.push_back(std::move(s));
        } else if (f[0] == "pair") {
            if (groups.empty() || f.size() != 3) throw bad();
            groups.back().pattern_pairs.emplace_back(f[1], f[2]);
        } else {
            throw bad();
        }
    }
    return groups;
}

inline std::vector<MatchGroup> load_pattern_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_pattern_report(in);
}

} // namespace tpm
