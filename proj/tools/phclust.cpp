// phclust: persistent homology, hierarchical clustering and their comparison.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numeric or
// degenerate-input error.

#include <CLI11.hpp>

#include <phclust/phclust.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace phclust;

namespace {

struct PointInput {
    std::string path;
    bool header = false;
    bool label_column = false;
    std::string metric = "euclidean";
    bool is_distance = false;
};

void add_point_flags(CLI::App* cmd, PointInput& in, bool allow_distance) {
    cmd->add_option("input", in.path, "Point-cloud CSV")->required();
    cmd->add_flag("--header", in.header, "First row is a header");
    cmd->add_flag("--label-column", in.label_column, "First column holds point labels");
    cmd->add_option("--metric", in.metric, "euclidean, manhattan or chebyshev")->capture_default_str();
    if (allow_distance) cmd->add_flag("--distance", in.is_distance, "Input is a distance-matrix CSV, not points");
}

PointCloud read_cloud(const PointInput& in) {
    auto stream = open_input(in.path);
    return load_point_cloud(stream, {in.header, in.label_column});
}

DistanceMatrix read_matrix(const std::string& path) {
    auto stream = open_input(path);
    return load_distance_matrix(stream);
}

DistanceMatrix read_input_matrix(const PointInput& in) {
    if (in.is_distance) return read_matrix(in.path);
    return pairwise_distances(read_cloud(in), parse_metric(in.metric));
}

std::optional<double> parse_max_eps(const std::string& text) {
    if (text == "auto") return std::nullopt;
    auto v = csv::parse_double(text);
    if (!v || !(*v > 0.0)) throw ValidationError("--max-eps must be 'auto' or a positive number");
    return *v;
}

void emit(const std::string& output, std::string_view content) {
    if (output.empty() || output == "-") {
        std::cout << content;
        std::cout.flush();
    } else {
        write_file(output, content);
    }
}

void require_format(const std::string& format, std::initializer_list<std::string_view> allowed) {
    for (auto a : allowed)
        if (format == a) return;
    throw ValidationError("unsupported --format '" + format + "' for this command");
}

FigureSpec figure_from(double width, double height) {
    FigureSpec spec;
    spec.width = width;
    spec.height = height;
    return spec;
}

std::vector<double> read_values(const std::string& path, const std::string& column) {
    auto stream = open_input(path);
    auto rows = csv::read_rows(stream);
    if (rows.empty()) throw ValidationError("'" + path + "' holds no values");
    std::size_t col = 0;
    std::size_t first = 0;
    if (!csv::parse_double(rows.front().fields.front())) {
        first = 1;
        const auto& h = rows.front().fields;
        auto it = std::find(h.begin(), h.end(), column);
        if (it == h.end()) throw ValidationError("column '" + column + "' not found in '" + path + "'");
        col = static_cast<std::size_t>(it - h.begin());
    }
    std::vector<double> values;
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        auto v = col < f.size() ? csv::parse_double(f[col]) : std::nullopt;
        if (!v) throw ValidationError("row " + std::to_string(rows[r].line) + ": non-numeric value");
        values.push_back(*v);
    }
    return values;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Persistent homology, hierarchical clustering and homological cophenetic matrices"};
    app.require_subcommand(1);

    std::string output;
    std::string format;
    std::string out_dir = "out";
    std::string max_eps_text = "auto";
    std::string method_name = "single";
    int max_dim = -1;
    int permutations = 999;
    std::uint64_t seed = 1;
    double width = 720, height = 480;

    const auto add_output = [&](CLI::App* cmd) { cmd->add_option("-o,--output", output, "Output file (default stdout)"); };
    const auto add_figure = [&](CLI::App* cmd) {
        cmd->add_option("--width", width, "Figure width in px")->capture_default_str();
        cmd->add_option("--height", height, "Figure height in px")->capture_default_str();
    };

    // dist
    PointInput dist_in;
    auto* dist = app.add_subcommand("dist", "Pairwise distance matrix of a point cloud");
    add_point_flags(dist, dist_in, false);
    add_output(dist);

    // rips
    std::string rips_in;
    auto* rips = app.add_subcommand("rips", "Dump the Vietoris-Rips filtration of a distance matrix");
    rips->add_option("input", rips_in, "Distance-matrix CSV")->required();
    rips->add_option("--max-dim", max_dim, "Largest simplex dimension (default 1)");
    rips->add_option("--max-eps", max_eps_text, "Filtration cutoff or 'auto'");
    add_output(rips);

    // persist
    std::string persist_in;
    auto* persist = app.add_subcommand("persist", "Persistence barcode of the Rips filtration");
    persist->add_option("input", persist_in, "Distance-matrix CSV")->required();
    persist->add_option("--max-dim", max_dim, "Largest simplex dimension (default 2)");
    persist->add_option("--max-eps", max_eps_text, "Filtration cutoff or 'auto'");
    persist->add_option("--format", format, "json or svg");
    add_output(persist);
    add_figure(persist);

    // linkage
    std::string linkage_in;
    auto* link = app.add_subcommand("linkage", "Hierarchical clustering of a distance matrix");
    link->add_option("input", linkage_in, "Distance-matrix CSV")->required();
    link->add_option("--method", method_name, "single, complete, average or ward")->capture_default_str();
    link->add_option("--format", format, "csv (merge table), newick or svg");
    add_output(link);
    add_figure(link);

    // cophenetic
    std::string coph_in;
    bool homological = false;
    auto* coph = app.add_subcommand("cophenetic", "Cophenetic matrix of a clustering, or C_0 from persistence");
    coph->add_option("input", coph_in, "Distance-matrix CSV")->required();
    coph->add_option("--method", method_name, "single, complete, average or ward")->capture_default_str();
    coph->add_flag("--homological", homological, "Zeroth homological cophenetic matrix instead");
    add_output(coph);

    // hcd
    PointInput hcd_in;
    int k = 0;
    auto* hcd_cmd = app.add_subcommand("hcd", "k-th homological cophenetic matrix and its dendrogram");
    add_point_flags(hcd_cmd, hcd_in, true);
    hcd_cmd->add_option("-k,--k", k, "Homology dimension")->capture_default_str();
    hcd_cmd->add_option("--max-dim", max_dim, "Largest simplex dimension (default k+1)");
    std::size_t max_simplices = 20'000'000;
    hcd_cmd->add_option("--max-simplices", max_simplices, "Complex size budget")->capture_default_str();
    hcd_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    add_figure(hcd_cmd);

    // mantel
    std::string mantel_a, mantel_b;
    auto* mantel = app.add_subcommand("mantel", "Mantel permutation test between two matrices");
    mantel->add_option("a", mantel_a, "First matrix CSV")->required();
    mantel->add_option("b", mantel_b, "Second matrix CSV")->required();
    mantel->add_option("--permutations", permutations, "Number of permutations")->capture_default_str();
    mantel->add_option("--seed", seed, "Seed")->capture_default_str();
    add_output(mantel);

    // pipeline
    PointInput pipe_in;
    auto* pipeline = app.add_subcommand("pipeline", "E(D) vs C_0(D): matrices, dendrograms, barcode, Mantel test");
    add_point_flags(pipeline, pipe_in, false);
    pipeline->add_option("--method", method_name, "Linkage method")->capture_default_str();
    pipeline->add_option("--max-dim", max_dim, "Largest simplex dimension for the barcode (default 1)");
    pipeline->add_option("--max-eps", max_eps_text, "Filtration cutoff or 'auto'");
    pipeline->add_option("--permutations", permutations, "Mantel permutations")->capture_default_str();
    pipeline->add_option("--seed", seed, "Mantel seed")->capture_default_str();
    pipeline->add_option("--out", out_dir, "Output directory")->capture_default_str();
    add_figure(pipeline);

    // experiment
    ExperimentConfig cfg;
    auto* experiment = app.add_subcommand("experiment", "Repeated random unit-square clouds, E(D) vs C_0(D)");
    experiment->add_option("--replicates", cfg.replicates, "Number of clouds")->capture_default_str();
    experiment->add_option("--points", cfg.points_per_cloud, "Points per cloud")->capture_default_str();
    experiment->add_option("--permutations", cfg.permutations, "Mantel permutations")->capture_default_str();
    experiment->add_option("--seed", cfg.master_seed, "Master seed")->capture_default_str();
    experiment->add_option("--method", method_name, "Linkage method")->capture_default_str();
    experiment->add_option("--bins", cfg.histogram_bins, "Histogram bins")->capture_default_str();
    experiment->add_option("--out", out_dir, "Output directory")->capture_default_str();
    add_figure(experiment);

    // render
    std::string kind;
    std::vector<std::string> render_inputs;
    int bins = 20;
    std::string column = "r";
    auto* render = app.add_subcommand("render", "SVG figures from interchange files");
    render->add_option("kind", kind, "dendrogram <matrix.csv> | barcode <barcode.json> | "
                                     "enriched <matrix.csv> <barcode.json> | histogram <values.csv>")
        ->required()
        ->check(CLI::IsMember({"dendrogram", "barcode", "enriched", "histogram"}));
    render->add_option("inputs", render_inputs, "Input files")->required();
    render->add_option("--method", method_name, "Linkage method for dendrograms")->capture_default_str();
    render->add_option("--bins", bins, "Histogram bins")->capture_default_str();
    render->add_option("--column", column, "Histogram column when the CSV has a header")->capture_default_str();
    add_output(render);
    add_figure(render);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto method = parse_linkage_method(method_name);
        const auto figure = figure_from(width, height);

        if (dist->parsed()) {
            emit(output, matrix_csv(pairwise_distances(read_cloud(dist_in), parse_metric(dist_in.metric))));
        } else if (rips->parsed()) {
            auto complex = build_rips(read_matrix(rips_in), max_dim < 0 ? 1 : max_dim, parse_max_eps(max_eps_text));
            std::ostringstream out;
            complex.dump(out);
            emit(output, out.str());
        } else if (persist->parsed()) {
            if (format.empty()) format = "json";
            require_format(format, {"json", "svg"});
            auto complex = build_rips(read_matrix(persist_in), max_dim < 0 ? 2 : max_dim, parse_max_eps(max_eps_text));
            auto [barcode, reduced] = reduce(complex);
            const auto exported = barcode.up_to_dimension(barcode.complete_dimension());
            emit(output, format == "json" ? json_text(barcode_to_json(exported)) : render_barcode(exported, figure));
        } else if (link->parsed()) {
            if (format.empty()) format = "csv";
            require_format(format, {"csv", "newick", "svg"});
            const auto d = linkage(read_matrix(linkage_in), method);
            if (format == "csv") emit(output, merge_table_csv(d));
            else if (format == "newick") emit(output, to_newick(d) + "\n");
            else emit(output, render_dendrogram(d, figure));
        } else if (coph->parsed()) {
            const auto m = read_matrix(coph_in);
            emit(output, matrix_csv(homological ? h0_cophenetic(m) : cophenetic(linkage(m, method))));
        } else if (hcd_cmd->parsed()) {
            const auto m = read_input_matrix(hcd_in);
            const auto res = run_hcd(m, k, max_dim < 0 ? std::nullopt : std::optional<int>(max_dim), {max_simplices});
            const fs::path dir = out_dir;
            ensure_directory(dir);
            const std::string stem = "d" + std::to_string(k);
            write_file(dir / (stem + ".csv"), matrix_csv(res.matrix));
            if (res.matrix.size() > 0) {
                write_file(dir / (stem + "_dendrogram.nwk"), to_newick(res.dendrogram) + "\n");
                write_file(dir / (stem + "_dendrogram.merges.csv"), merge_table_csv(res.dendrogram));
                write_file(dir / (stem + "_dendrogram.svg"), render_dendrogram(res.dendrogram, figure));
            } else {
                warn("no dimension-" + std::to_string(k) + " bars of positive length; dendrogram skipped");
            }
        } else if (mantel->parsed()) {
            const auto res = mantel_test(read_matrix(mantel_a), read_matrix(mantel_b), permutations, seed);
            emit(output, json_text(mantel_to_json(res)));
        } else if (pipeline->parsed()) {
            PipelineOptions opts;
            opts.metric = parse_metric(pipe_in.metric);
            opts.method = method;
            opts.max_dim = max_dim < 0 ? 1 : max_dim;
            opts.max_eps = parse_max_eps(max_eps_text);
            opts.permutations = permutations;
            opts.seed = seed;
            const auto res = run_pipeline(read_cloud(pipe_in), opts);
            write_pipeline(res, out_dir, figure);
            if (!res.mantel) {
                std::cerr << "error: Mantel step skipped: " << res.mantel_error << '\n';
                return res.mantel_exit_code;
            }
        } else if (experiment->parsed()) {
            cfg.method = method;
            const auto summary = run_experiment(cfg);
            write_experiment(summary, out_dir, figure);
            std::cout << json_text(experiment_summary_json(summary));
        } else if (render->parsed()) {
            const auto need = [&](std::size_t count) {
                if (render_inputs.size() != count) {
                    throw ValidationError("render " + kind + " takes " + std::to_string(count) + " input file(s)");
                }
            };
            if (kind == "dendrogram") {
                need(1);
                emit(output, render_dendrogram(linkage(read_matrix(render_inputs[0]), method), figure));
            } else if (kind == "barcode") {
                need(1);
                auto in = open_input(render_inputs[0]);
                emit(output, render_barcode(load_barcode_json(in), figure));
            } else if (kind == "enriched") {
                need(2);
                const auto d = linkage(read_matrix(render_inputs[0]), method);
                auto in = open_input(render_inputs[1]);
                emit(output, render_enriched(d, load_barcode_json(in), figure));
            } else {
                need(1);
                emit(output, render_histogram(read_values(render_inputs[0], column), bins, figure));
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
