#pragma once

// End-to-end workflows behind the CLI: the Euclidean-vs-homological
// comparison on one cloud, the random unit-square experiment, and D_k
// dendrograms of higher classes. Everything is a pure function of the inputs
// and seeds; writers put each artifact in its own file.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clustering.hpp"
#include "error.hpp"
#include "filtration.hpp"
#include "geometry.hpp"
#include "persistence.hpp"
#include "random.hpp"
#include "render.hpp"
#include "stats.hpp"

namespace phclust {

inline double max_abs_difference(const DistanceMatrix& a, const DistanceMatrix& b) {
    if (a.size() != b.size()) throw ValidationError("matrices differ in size");
    double m = 0.0;
    for (std::size_t k = 0; k < a.entries().size(); ++k) m = std::max(m, std::abs(a.entries()[k] - b.entries()[k]));
    return m;
}

// ---- file helpers -------------------------------------------------------

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

inline std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline std::string merge_table_csv(const Dendrogram& d) {
    std::ostringstream out;
    write_merge_table(out, d);
    return out.str();
}

// ---- pipeline -----------------------------------------------------------

struct PipelineOptions {
    Metric metric = Metric::euclidean;
    LinkageMethod method = LinkageMethod::single;
    int max_dim = 1;
    std::optional<double> max_eps;
    int permutations = 999;
    std::uint64_t seed = 1;
    ComplexLimits limits{};
    FigureSpec figure{};
};

struct PipelineResult {
    DistanceMatrix euclidean;
    CopheneticMatrix c0;
    Dendrogram euclidean_dendrogram;
    Dendrogram c0_dendrogram;
    Barcode barcode;
    std::optional<MantelResult> mantel;
    std::string mantel_error;
    int mantel_exit_code = 0;
    /// max |cophenetic(single linkage of E) - C_0|
    double bridge_error = 0.0;
};

inline PipelineResult run_pipeline(const PointCloud& cloud, const PipelineOptions& opts = {}) {
    PipelineResult res;
    res.euclidean = pairwise_distances(cloud, opts.metric);
    res.c0 = h0_cophenetic(res.euclidean);
    res.euclidean_dendrogram = linkage(res.euclidean, opts.method);
    res.c0_dendrogram = hcd_dendrogram(res.c0, opts.method);
    const auto single = linkage(res.euclidean, LinkageMethod::single);
    res.bridge_error = max_abs_difference(cophenetic(single), res.c0);
    auto complex = build_rips(res.euclidean, opts.max_dim, opts.max_eps, opts.limits);
    auto reduced = reduce(complex);
    res.barcode = reduced.barcode;
    try {
        res.mantel = mantel_test(res.euclidean, res.c0, opts.permutations, opts.seed);
    } catch (const Error& e) {
        res.mantel_error = e.what();
        res.mantel_exit_code = e.exit_code();
    }
    return res;
}

/// Writes every pipeline artifact into `dir`; returns the file names written.
inline std::vector<std::string> write_pipeline(const PipelineResult& res, const std::filesystem::path& dir,
                                               const FigureSpec& figure = {}) {
    ensure_directory(dir);
    std::vector<std::string> written;
    const auto put = [&](const std::string& name, std::string_view content) {
        write_file(dir / name, content);
        written.push_back(name);
    };
    put("euclidean.csv", matrix_csv(res.euclidean));
    put("c0.csv", matrix_csv(res.c0));
    put("euclidean_dendrogram.nwk", to_newick(res.euclidean_dendrogram) + "\n");
    put("euclidean_dendrogram.merges.csv", merge_table_csv(res.euclidean_dendrogram));
    put("euclidean_dendrogram.svg", render_dendrogram(res.euclidean_dendrogram, figure));
    put("c0_dendrogram.nwk", to_newick(res.c0_dendrogram) + "\n");
    put("c0_dendrogram.merges.csv", merge_table_csv(res.c0_dendrogram));
    put("c0_dendrogram.svg", render_dendrogram(res.c0_dendrogram, figure));
    const auto exported = res.barcode.up_to_dimension(res.barcode.complete_dimension());
    put("barcode.json", json_text(barcode_to_json(exported)));
    put("barcode.svg", render_barcode(exported, figure));
    put("enriched.svg", render_enriched(res.c0_dendrogram, res.barcode, figure));
    nlohmann::ordered_json bridge;
    bridge["max_abs_difference"] = res.bridge_error;
    put("bridge.json", json_text(bridge));
    if (res.mantel) put("mantel.json", json_text(mantel_to_json(*res.mantel)));
    return written;
}

// ---- random-cloud experiment -------------------------------------------

struct ExperimentConfig {
    int replicates = 100;
    int points_per_cloud = 20;
    int permutations = 999;
    std::uint64_t master_seed = 1;
    LinkageMethod method = LinkageMethod::single;
    int histogram_bins = 20;

    void validate() const {
        if (replicates < 1) throw ValidationError("replicates must be >= 1");
        if (points_per_cloud < 3) throw ValidationError("points per cloud must be >= 3");
        if (permutations < 1) throw ValidationError("permutations must be >= 1");
        if (histogram_bins < 1) throw ValidationError("histogram bins must be >= 1");
    }
};

/// Seed of replicate i: derive_seed(master_seed, i). The cloud is drawn from
/// Xoshiro256(seed); the Mantel test uses splitmix64(seed).
inline std::uint64_t replicate_seed(std::uint64_t master, int index) {
    return derive_seed(master, static_cast<std::uint64_t>(index));
}

/// n points uniform on [0,1]^2, x then y for each point.
inline PointCloud sample_unit_square(int n, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) {
        const double x = rng.unit();
        const double y = rng.unit();
        p = {x, y};
    }
    return PointCloud(std::move(pts));
}

struct ReplicateResult {
    int index = 0;
    std::uint64_t seed = 0;
    double r = 0.0;
    double p = 1.0;
    /// Mantel r between cophenetic(linkage(E, method)) and C_0.
    double linkage_r = 0.0;
};

struct ExperimentSummary {
    ExperimentConfig config;
    std::vector<ReplicateResult> replicates;
    double median_r = 0.0, min_r = 0.0, max_r = 0.0, median_p = 0.0;
};

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline ReplicateResult run_replicate(const ExperimentConfig& cfg, int index) {
    ReplicateResult out;
    out.index = index;
    out.seed = replicate_seed(cfg.master_seed, index);
    const auto cloud = sample_unit_square(cfg.points_per_cloud, out.seed);
    const auto e = pairwise_distances(cloud);
    const auto c0 = h0_cophenetic(e);
    const auto m = mantel_test(e, c0, cfg.permutations, splitmix64(out.seed));
    out.r = m.r;
    out.p = m.p_value;
    out.linkage_r = mantel_r(cophenetic(linkage(e, cfg.method)), c0);
    return out;
}

inline ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentSummary s;
    s.config = cfg;
    for (int i = 0; i < cfg.replicates; ++i) s.replicates.push_back(run_replicate(cfg, i));
    std::vector<double> rs, ps;
    for (const auto& r : s.replicates) {
        rs.push_back(r.r);
        ps.push_back(r.p);
    }
    s.median_r = median(rs);
    s.median_p = median(ps);
    s.min_r = *std::min_element(rs.begin(), rs.end());
    s.max_r = *std::max_element(rs.begin(), rs.end());
    return s;
}

inline nlohmann::ordered_json experiment_summary_json(const ExperimentSummary& s) {
    nlohmann::ordered_json j;
    j["replicates"] = s.config.replicates;
    j["points_per_cloud"] = s.config.points_per_cloud;
    j["permutations"] = s.config.permutations;
    j["master_seed"] = s.config.master_seed;
    j["method"] = std::string(to_string(s.config.method));
    j["median_r"] = s.median_r;
    j["min_r"] = s.min_r;
    j["max_r"] = s.max_r;
    j["median_p"] = s.median_p;
    return j;
}

inline std::vector<std::string> write_experiment(const ExperimentSummary& s, const std::filesystem::path& dir,
                                                 const FigureSpec& figure = {}) {
    ensure_directory(dir);
    std::ostringstream table;
    table << "replicate,seed,r,p,linkage_r\n";
    std::vector<double> rs;
    for (const auto& r : s.replicates) {
        table << r.index << ',' << r.seed << ',' << csv::format_double(r.r) << ',' << csv::format_double(r.p) << ','
              << csv::format_double(r.linkage_r) << '\n';
        rs.push_back(r.r);
    }
    write_file(dir / "replicates.csv", table.str());
    write_file(dir / "summary.json", json_text(experiment_summary_json(s)));
    write_file(dir / "histogram.svg", render_histogram(rs, s.config.histogram_bins, figure));
    return {"replicates.csv", "summary.json", "histogram.svg"};
}

// ---- higher-dimensional cophenetic matrices ----------------------------

struct HcdResult {
    CopheneticMatrix matrix;
    Dendrogram dendrogram;
};

/// D_k over the Rips filtration of `dist` with max_eps = auto; max_dim defaults to k+1.
inline HcdResult run_hcd(const DistanceMatrix& dist, int k, std::optional<int> max_dim = std::nullopt,
                         ComplexLimits limits = {}) {
    if (k < 0) throw ValidationError("k must be >= 0");
    const int dim = max_dim.value_or(k + 1);
    if (k > 0 && k > dim - 1) {
        throw ValidationError("D_" + std::to_string(k) + " needs --max-dim >= " + std::to_string(k + 1) + ", got " +
                              std::to_string(dim));
    }
    auto complex = build_rips(dist, dim, std::nullopt, limits);
    auto [barcode, reduced] = reduce(complex);
    HcdResult out;
    out.matrix = hcd_matrix(barcode, reduced, k);
    out.dendrogram = out.matrix.size() > 0 ? hcd_dendrogram(out.matrix, LinkageMethod::single) : Dendrogram{};
    return out;
}

} // namespace phclust
