// tpm: batch command line front end for the trajectory pattern mining library.
//
//   tpm synth     --spec city.json --out records.csv
//   tpm ingest    --input raw.csv --id-col id --time-col ts --lat-col lat --lng-col lon --out records.csv
//   tpm segment   --input records.csv --auto-theta --out trajectories.csv
//   tpm cluster   --input trajectories.csv --k 20 --seed 42 --out model.txt
//   tpm match     --model model.txt --trajectories trajectories.csv --out patterns.txt
//   tpm export    --model model.txt --trajectories trajectories.csv --patterns patterns.txt --out geojson/
//   tpm histogram --input records.csv --utc-offset 8

#include "city_spec_json.hpp"
#include "tpm/tpm.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

// Output file or stdout when the path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw tpm::IoError("cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void close(const std::string& path) {
        stream().flush();
        if (!stream()) throw tpm::IoError("write failed for '" + path + "'");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    for (const auto& f : tpm::detail::split_fields(csv, ',')) {
        auto v = tpm::detail::parse_double(f);
        if (!v) throw tpm::ConfigError("bad grid value '" + f + "'");
        grid.push_back(*v);
    }
    return grid;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GPS trajectory pattern mining"};
    app.require_subcommand(1);

    // synth
    std::string spec_path, synth_out, truth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic city GPS log with ground truth");
    synth->add_option("--spec", spec_path, "City spec (JSON)")->required();
    synth->add_option("--out", synth_out, "Records CSV")->required();
    synth->add_option("--truth", truth_out, "Truth sidecar CSV (default <out>.truth.csv)");

    // ingest
    std::string ingest_in, ingest_out = "-", id_col = "device_id", time_col = "timestamp", lat_col = "lat",
                           lng_col = "lng";
    char delimiter = ',';
    bool no_header = false;
    auto* ingest = app.add_subcommand("ingest", "Validate raw GPS rows and write the canonical record table");
    ingest->add_option("--input", ingest_in, "Delimited input file")->required();
    ingest->add_option("--id-col", id_col, "Device id column (index or header name)");
    ingest->add_option("--time-col", time_col, "Timestamp column (epoch seconds or ISO-8601)");
    ingest->add_option("--lat-col", lat_col, "Latitude column");
    ingest->add_option("--lng-col", lng_col, "Longitude column");
    ingest->add_option("--delimiter", delimiter, "Field delimiter");
    ingest->add_flag("--no-header", no_header, "Input has no header row");
    ingest->add_option("--out", ingest_out, "Output CSV (default stdout)");

    // segment
    std::string seg_in, seg_out = "-", grid_csv;
    tpm::SegmentationConfig seg_cfg;
    bool auto_theta = false;
    auto* segment = app.add_subcommand("segment", "Split device logs into trajectories and drop noise");
    segment->add_option("--input", seg_in, "Canonical record CSV")->required();
    auto* theta_opt = segment->add_option("--theta", seg_cfg.theta, "Gap threshold in seconds");
    segment->add_flag("--auto-theta", auto_theta, "Pick theta at the elbow of the trajectory-count curve")
        ->excludes(theta_opt);
    segment->add_option("--grid", grid_csv, "Candidate thetas in seconds, comma separated");
    segment->add_option("--min-points", seg_cfg.min_points, "Minimum points per trajectory");
    segment->add_option("--min-length", seg_cfg.min_length, "Minimum trajectory length in meters");
    segment->add_option("--max-jump", seg_cfg.max_jump, "Maximum distance between adjacent points in meters");
    segment->add_option("--out", seg_out, "Trajectory CSV (default stdout)");

    // cluster
    std::string cl_in, cl_out;
    tpm::ClusterConfig cl_cfg;
    auto* cluster = app.add_subcommand("cluster", "K-means++ over all trajectory points");
    cluster->add_option("--input", cl_in, "Trajectory CSV")->required();
    cluster->add_option("--k", cl_cfg.k, "Number of clusters");
    cluster->add_option("--seed", cl_cfg.seed, "RNG seed");
    cluster->add_option("--max-iters", cl_cfg.max_iters, "Iteration cap");
    cluster->add_option("--tol", cl_cfg.tol, "Convergence threshold on centroid movement (meters)");
    cluster->add_option("--threads", cl_cfg.threads, "Worker threads for the assignment step");
    cluster->add_option("--out", cl_out, "Model file")->required();

    // match
    std::string m_model, m_trajs, m_out = "-", mode = "subsequence";
    tpm::MatchConfig m_cfg;
    auto* match = app.add_subcommand("match", "Extract similar trajectory patterns");
    match->add_option("--model", m_model, "Model file")->required();
    match->add_option("--trajectories", m_trajs, "Trajectory CSV")->required();
    match->add_option("--epsilon", m_cfg.epsilon, "Length spread bound within a group (meters)");
    match->add_option("--mode", mode, "Containment: subsequence or set")
        ->check(CLI::IsMember({"subsequence", "set"}));
    match->add_option("--out", m_out, "Pattern report (default stdout)");

    // export
    std::string e_model, e_trajs, e_patterns, e_out;
    auto* exp = app.add_subcommand("export", "Write GeoJSON layers for dense areas, trajectories and patterns");
    exp->add_option("--model", e_model, "Model file")->required();
    exp->add_option("--trajectories", e_trajs, "Trajectory CSV")->required();
    exp->add_option("--patterns", e_patterns, "Pattern report")->required();
    exp->add_option("--out", e_out, "Output directory")->required();

    // histogram
    std::string h_in, h_out = "-";
    double utc_offset = 0.0;
    auto* hist = app.add_subcommand("histogram", "Record counts per local hour of day");
    hist->add_option("--input", h_in, "Canonical record CSV")->required();
    hist->add_option("--utc-offset", utc_offset, "Local time offset from UTC in hours");
    hist->add_option("--out", h_out, "Output CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            const auto spec = tpm::load_city_spec(spec_path);
            const auto data = tpm::generate(spec);
            Output out(synth_out);
            tpm::write_records_csv(out.stream(), data.records);
            out.close(synth_out);
            if (truth_out.empty()) truth_out = synth_out + ".truth.csv";
            Output truth(truth_out);
            tpm::write_truth_csv(truth.stream(), data);
            truth.close(truth_out);
            std::cerr << "records: " << data.records.size() << "  trips: " << data.truth.trips.size() << "\n";
        } else if (*ingest) {
            tpm::CsvLayout layout;
            layout.id = tpm::parse_column_ref(id_col);
            layout.time = tpm::parse_column_ref(time_col);
            layout.lat = tpm::parse_column_ref(lat_col);
            layout.lng = tpm::parse_column_ref(lng_col);
            layout.delimiter = delimiter;
            layout.has_header = !no_header;
            const auto loaded = tpm::load_csv(ingest_in, layout);
            std::vector<tpm::GpsRecord> ordered;
            ordered.reserve(loaded.records.size());
            for (auto& log : tpm::group_by_device(loaded.records))
                ordered.insert(ordered.end(), log.records.begin(), log.records.end());
            Output out(ingest_out);
            tpm::write_records_csv(out.stream(), ordered);
            out.close(ingest_out);
            std::cerr << "records: " << ordered.size() << "  rejects: " << loaded.rejects << "\n";
        } else if (*segment) {
            if (!grid_csv.empty()) seg_cfg.theta_grid = parse_grid(grid_csv);
            seg_cfg.validate();
            const auto loaded = tpm::load_csv(seg_in);
            const auto logs = tpm::group_by_device(loaded.records);
            double theta = seg_cfg.theta;
            if (auto_theta) {
                const auto curve = tpm::theta_curve(logs, seg_cfg.theta_grid);
                for (std::size_t i = 0; i < curve.grid.size(); ++i)
                    std::cerr << "theta " << curve.grid[i] << "  count " << curve.counts[i] << "  f'' "
                              << curve.second_diff[i] << "\n";
                theta = curve.grid[curve.selected];
            }
            const auto all = tpm::trajectory_count(logs, theta);
            const auto trajs = tpm::segment(logs, theta, seg_cfg);
            Output out(seg_out);
            tpm::write_trajectories_csv(out.stream(), trajs);
            out.close(seg_out);
            std::cerr << "theta: " << theta << "  trajectories: " << all << "  kept: " << trajs.size()
                      << "  rejects: " << loaded.rejects << "\n";
        } else if (*cluster) {
            const auto trajs = tpm::read_trajectories_csv(cl_in);
            std::vector<tpm::GeoCoord> points;
            for (const auto& t : trajs)
                for (const auto& p : t.points) points.push_back(p.coord);
            const auto model = tpm::kmeans_fit(points, cl_cfg);
            tpm::save_model(cl_out, model);
            std::cerr << "points: " << points.size() << "  iterations: " << model.iterations
                      << "  inertia: " << model.inertia << "  reseeds: " << model.reseeds << "\n";
        } else if (*match) {
            m_cfg.mode = tpm::parse_containment_mode(mode);
            const auto model = tpm::load_model(m_model);
            const auto trajs = tpm::read_trajectories_csv(m_trajs);
            const auto groups = tpm::extract_patterns(trajs, model, m_cfg);
            Output out(m_out);
            tpm::write_pattern_report(out.stream(), groups);
            out.close(m_out);
            std::size_t patterns = 0, pairs = 0;
            for (const auto& g : groups) {
                patterns += g.is_pattern();
                pairs += g.pattern_pairs.size();
            }
            std::cerr << "groups: " << groups.size() << "  pattern groups: " << patterns << "  pairs: " << pairs
                      << "\n";
        } else if (*exp) {
            const auto model = tpm::load_model(e_model);
            const auto trajs = tpm::read_trajectories_csv(e_trajs);
            const auto groups = tpm::load_pattern_report(e_patterns);
            const auto bundle = tpm::make_bundle(model, trajs, groups);
            for (const auto& p : tpm::export_geojson(bundle, e_out)) std::cerr << "wrote " << p.string() << "\n";
        } else if (*hist) {
            const auto loaded = tpm::load_csv(h_in);
            const auto h = tpm::hourly_histogram(loaded.records, utc_offset);
            Output out(h_out);
            tpm::write_histogram_csv(out.stream(), h);
            out.close(h_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "tpm: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
