#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctlevels/baselines.hpp"
#include "ctlevels/classify.hpp"
#include "ctlevels/dataset_io.hpp"
#include "ctlevels/fcm.hpp"
#include "ctlevels/model_io.hpp"
#include "ctlevels/ordering.hpp"
#include "ctlevels/reference_profiles.hpp"
#include "ctlevels/stats.hpp"
#include "ctlevels/version.hpp"

namespace fs = std::filesystem;
using namespace ctlevels;

namespace {

constexpr std::uint64_t kFallbackSeed = 42;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& cli_seed) {
    if (cli_seed) return *cli_seed;
    if (const char* env = std::getenv("CTLEVELS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw SchemaError(std::string("CTLEVELS_SEED is not an integer: '") + env + "'");
        }
    }
    return kFallbackSeed;
}

class WallClock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path sibling(const fs::path& file, const std::string& suffix) {
    fs::path p = file;
    p.replace_extension();
    return p.concat(suffix);
}

Eigen::MatrixXd load_centroid_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::string cell;
        std::istringstream s(line);
        while (std::getline(s, cell, ',')) row.push_back(parse_double(cell));
        if (row.size() != static_cast<std::size_t>(kDims)) {
            throw SchemaError("centroid file '" + path.string() + "': expected 9 values per row");
        }
        rows.push_back(row);
    }
    if (rows.empty()) throw SchemaError("centroid file '" + path.string() + "' is empty");
    Eigen::MatrixXd c(static_cast<Eigen::Index>(rows.size()), kDims);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int d = 0; d < kDims; ++d) c(static_cast<Eigen::Index>(i), d) = rows[i][static_cast<std::size_t>(d)];
    }
    return c;
}

struct FitArgs {
    std::string input;
    std::string out;
    int k = 6;
    double m = 1.5;
    double epsilon = 1e-5;
    int max_iter = 1000;
    std::optional<std::uint64_t> seed;
};

int cmd_fit(const FitArgs& args) {
    WallClock clock;
    const std::uint64_t seed = resolve_seed(args.seed);

    const Dataset data = load_csv(args.input);
    FcmConfig cfg;
    cfg.k = args.k;
    cfg.m = args.m;
    cfg.epsilon = args.epsilon;
    cfg.max_iter = args.max_iter;
    cfg.seed = seed;
    const OrderedFcmModel model = order_clusters(fit(data, cfg));
    save_ordered_model(model, args.out);

    write_manifest(sibling(args.out, ".manifest"), "fit",
                   {{"input", args.input},
                    {"output", args.out},
                    {"rows", std::to_string(data.size())},
                    {"k", std::to_string(cfg.k)},
                    {"m", format_double(cfg.m)},
                    {"epsilon", format_double(cfg.epsilon)},
                    {"max_iter", std::to_string(cfg.max_iter)},
                    {"seed", std::to_string(seed)},
                    {"iterations_used", std::to_string(model.base.iterations_used)},
                    {"converged", model.base.converged ? "true" : "false"}},
                   clock.seconds());
    std::cout << "fit: " << data.size() << " rows -> " << args.out << " ("
              << model.base.iterations_used << " iterations)\n";
    return 0;
}

struct ClassifyArgs {
    std::string model;
    std::string input;
    std::string out;
    std::optional<double> tau_clear, tau_trans, cert_low, cert_high;
    std::optional<std::uint64_t> seed;
};

int cmd_classify(const ClassifyArgs& args) {
    WallClock clock;
    OrderedFcmModel model = load_ordered_model(args.model);
    if (args.tau_clear) model.thresholds.tau_clear = *args.tau_clear;
    if (args.tau_trans) model.thresholds.tau_trans = *args.tau_trans;
    if (args.cert_low) model.thresholds.cert_low = *args.cert_low;
    if (args.cert_high) model.thresholds.cert_high = *args.cert_high;
    model.thresholds.validate();

    const Dataset data = load_csv(args.input);
    const BatchResult batch = classify_batch(model, data);

    write_classification_csv(batch.records, data.row_ids(), args.out);
    const fs::path summary_path = sibling(args.out, "_summary.txt");
    const fs::path hist_path = sibling(args.out, "_score_hist.csv");
    write_distribution_summary(batch.summary, summary_path);
    write_score_histogram_csv(batch.summary, hist_path);

    write_manifest(sibling(args.out, ".manifest"), "classify",
                   {{"model", args.model},
                    {"input", args.input},
                    {"output", args.out},
                    {"summary", summary_path.string()},
                    {"score_histogram", hist_path.string()},
                    {"rows", std::to_string(data.size())},
                    {"tau_clear", format_double(model.thresholds.tau_clear)},
                    {"tau_trans", format_double(model.thresholds.tau_trans)},
                    {"cert_low", format_double(model.thresholds.cert_low)},
                    {"cert_high", format_double(model.thresholds.cert_high)},
                    {"seed", std::to_string(resolve_seed(args.seed))}},
                   clock.seconds());
    std::cout << "classify: " << data.size() << " rows -> " << args.out << '\n';
    return 0;
}

struct ValidateArgs {
    std::string model;
    std::string train;
    std::string test;
    std::string out_dir;
    int folds = 5;
    bool all_pairs = false;
    std::optional<std::uint64_t> seed;
};

int cmd_validate(const ValidateArgs& args) {
    WallClock clock;
    const std::uint64_t seed = resolve_seed(args.seed);
    const OrderedFcmModel model = load_ordered_model(args.model);
    const Dataset train = load_csv(args.train);
    const Dataset test = load_csv(args.test);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);

    ReportOptions opts;
    opts.all_pairs = args.all_pairs;
    opts.silhouette.seed = seed;

    const ValidationReport train_rep = ordinal_progression_report(model, train, opts);
    const ValidationReport test_rep = ordinal_progression_report(model, test, opts);
    write_validation_report(train_rep, dir / "validation_train.txt");
    write_validation_report(test_rep, dir / "validation_test.txt");
    write_dimension_correlations_csv(train_rep, dir / "per_dimension_train.csv");
    write_dimension_correlations_csv(test_rep, dir / "per_dimension_test.csv");
    write_pca_coordinates_csv(train_rep.pca, 10000, dir / "pca_coordinates.csv");

    const TrainTestReport tt = train_test_report(model, train, test, opts.silhouette);
    write_train_test_csv(tt, dir / "train_test_delta.csv");

    FcmConfig cv_cfg = model.base.config;
    cv_cfg.seed = seed;
    const CrossValidationResult cv =
        cross_validate(train, args.folds, cv_cfg, 5, opts.silhouette);
    write_cv_csv(cv, dir / "cv_folds.csv");

    write_manifest(dir / "manifest.txt", "validate",
                   {{"model", args.model},
                    {"train", args.train},
                    {"test", args.test},
                    {"output_dir", args.out_dir},
                    {"folds", std::to_string(args.folds)},
                    {"all_pairs", args.all_pairs ? "true" : "false"},
                    {"train_rows", std::to_string(train.size())},
                    {"test_rows", std::to_string(test.size())},
                    {"seed", std::to_string(seed)}},
                   clock.seconds());
    std::cout << "validate: reports written to " << args.out_dir << '\n';
    return 0;
}

struct SweepArgs {
    std::string input;
    std::string out_dir;
    int k_min = 2;
    int k_max = 12;
    int B = 10;
    int k = 6;
    std::vector<double> m_grid;
    std::vector<double> eps_grid;
    std::optional<std::uint64_t> seed;
};

int cmd_sweep(const SweepArgs& args) {
    WallClock clock;
    const std::uint64_t seed = resolve_seed(args.seed);
    const Dataset data = load_csv(args.input);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);

    const auto gap = gap_statistic(data, args.k_min, args.k_max, args.B, seed);
    write_gap_csv(gap, dir / "gap.csv");

    const auto m_grid = args.m_grid.empty() ? default_m_grid() : args.m_grid;
    const auto eps_grid = args.eps_grid.empty() ? default_eps_grid() : args.eps_grid;
    const GridSearchResult grid = grid_search(data, m_grid, eps_grid, args.k, seed);
    write_grid_csv(grid, args.k, dir / "grid.csv");

    write_manifest(dir / "manifest.txt", "sweep",
                   {{"input", args.input},
                    {"output_dir", args.out_dir},
                    {"k_min", std::to_string(args.k_min)},
                    {"k_max", std::to_string(args.k_max)},
                    {"B", std::to_string(args.B)},
                    {"grid_k", std::to_string(args.k)},
                    {"rows", std::to_string(data.size())},
                    {"seed", std::to_string(seed)}},
                   clock.seconds());
    std::cout << "sweep: gap and grid tables written to " << args.out_dir << '\n';
    return 0;
}

struct CompareArgs {
    std::string input;
    std::string out;
    std::optional<double> dbscan_eps;
    std::optional<int> dbscan_min_pts;
    std::optional<std::uint64_t> seed;
};

int cmd_compare(const CompareArgs& args) {
    WallClock clock;
    const std::uint64_t seed = resolve_seed(args.seed);
    const Dataset data = load_csv(args.input);

    BaselineOptions opts;
    opts.dbscan_eps = args.dbscan_eps;
    opts.dbscan_min_pts = args.dbscan_min_pts;
    const BaselineReport report = baseline_report(data, seed, opts);
    write_baseline_csv(report, args.out);

    std::vector<std::pair<std::string, std::string>> manifest{
        {"input", args.input},
        {"output", args.out},
        {"rows", std::to_string(data.size())},
        {"seed", std::to_string(seed)}};
    manifest.insert(manifest.end(), report.config_echo.begin(), report.config_echo.end());
    write_manifest(sibling(args.out, ".manifest"), "compare", manifest, clock.seconds());

    const bool any_ok =
        std::any_of(report.rows.begin(), report.rows.end(),
                    [](const BaselineRow& r) { return !r.failed; });
    std::cout << "compare: " << report.rows.size() << " methods -> " << args.out << '\n';
    return any_ok ? 0 : 3;
}

struct SynthArgs {
    std::string centroids = "builtin-table2";
    std::string out;
    int n_per_cluster = 1000;
    double noise_sd = 0.6;
    std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& args) {
    WallClock clock;
    const std::uint64_t seed = resolve_seed(args.seed);

    const Eigen::MatrixXd centroids = args.centroids == "builtin-table2"
                                          ? cefr_reference_centroids()
                                          : load_centroid_file(args.centroids);
    const SyntheticSample sample = synthesize(centroids, args.n_per_cluster, args.noise_sd, seed);
    save_dataset(sample.data, args.out);

    const fs::path labels_path = sibling(args.out, "_labels.csv");
    {
        std::ofstream out(labels_path, std::ios::binary);
        if (!out) throw IoError("cannot write '" + labels_path.string() + "'");
        out << "label\n";
        for (int lab : sample.labels) out << lab << '\n';
    }

    write_manifest(sibling(args.out, ".manifest"), "synth",
                   {{"centroids", args.centroids},
                    {"output", args.out},
                    {"labels", labels_path.string()},
                    {"n_per_cluster", std::to_string(args.n_per_cluster)},
                    {"noise_sd", format_double(args.noise_sd)},
                    {"rows", std::to_string(sample.data.size())},
                    {"seed", std::to_string(seed)}},
                   clock.seconds());
    std::cout << "synth: " << sample.data.size() << " rows -> " << args.out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuzzy C-Means toolkit for CEFR-aligned computational-thinking scores"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "Fit an ordered model on a score CSV");
    fit_cmd->add_option("--input", fit_args.input, "input CSV")->required();
    fit_cmd->add_option("--out", fit_args.out, "output model document")->required();
    fit_cmd->add_option("--k", fit_args.k, "cluster count");
    fit_cmd->add_option("--m", fit_args.m, "fuzzification exponent");
    fit_cmd->add_option("--epsilon", fit_args.epsilon, "convergence tolerance");
    fit_cmd->add_option("--max-iter", fit_args.max_iter, "iteration cap");
    fit_cmd->add_option("--seed", fit_args.seed, "rng seed (default: CTLEVELS_SEED or 42)");

    ClassifyArgs classify_args;
    auto* classify_cmd = app.add_subcommand("classify", "Classify rows against a model");
    classify_cmd->add_option("--model", classify_args.model, "model document")->required();
    classify_cmd->add_option("--input", classify_args.input, "input CSV")->required();
    classify_cmd->add_option("--out", classify_args.out, "output records CSV")->required();
    classify_cmd->add_option("--tau-clear", classify_args.tau_clear, "clear threshold override");
    classify_cmd->add_option("--tau-trans", classify_args.tau_trans, "transition threshold override");
    classify_cmd->add_option("--cert-low", classify_args.cert_low, "low-certainty threshold override");
    classify_cmd->add_option("--cert-high", classify_args.cert_high, "high-certainty threshold override");
    classify_cmd->add_option("--seed", classify_args.seed, "rng seed");

    ValidateArgs validate_args;
    auto* validate_cmd = app.add_subcommand("validate", "Run the validation battery");
    validate_cmd->add_option("--model", validate_args.model, "model document")->required();
    validate_cmd->add_option("--train", validate_args.train, "training CSV")->required();
    validate_cmd->add_option("--test", validate_args.test, "test CSV")->required();
    validate_cmd->add_option("--out", validate_args.out_dir, "output directory")->required();
    validate_cmd->add_option("--folds", validate_args.folds, "cross-validation folds");
    validate_cmd->add_flag("--all-pairs", validate_args.all_pairs,
                           "pairwise tests over all level pairs, not only adjacent");
    validate_cmd->add_option("--seed", validate_args.seed, "rng seed");

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Gap-statistic k sweep and (m, epsilon) grid search");
    sweep_cmd->add_option("--input", sweep_args.input, "input CSV")->required();
    sweep_cmd->add_option("--out", sweep_args.out_dir, "output directory")->required();
    sweep_cmd->add_option("--k-min", sweep_args.k_min, "smallest k");
    sweep_cmd->add_option("--k-max", sweep_args.k_max, "largest k");
    sweep_cmd->add_option("--B", sweep_args.B, "reference draws per k");
    sweep_cmd->add_option("--k", sweep_args.k, "k used by the grid search");
    sweep_cmd->add_option("--m-grid", sweep_args.m_grid, "fuzzification grid");
    sweep_cmd->add_option("--eps-grid", sweep_args.eps_grid, "tolerance grid");
    sweep_cmd->add_option("--seed", sweep_args.seed, "rng seed");

    CompareArgs compare_args;
    auto* compare_cmd = app.add_subcommand("compare", "Baseline comparison table");
    compare_cmd->add_option("--input", compare_args.input, "input CSV")->required();
    compare_cmd->add_option("--out", compare_args.out, "output CSV")->required();
    compare_cmd->add_option("--dbscan-eps", compare_args.dbscan_eps,
                            "DBSCAN eps (default: median 1-NN distance)");
    compare_cmd->add_option("--dbscan-min-pts", compare_args.dbscan_min_pts,
                            "DBSCAN min_pts (default: 2*dims)");
    compare_cmd->add_option("--seed", compare_args.seed, "rng seed");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic score corpus");
    synth_cmd->add_option("--centroids", synth_args.centroids,
                          "centroid CSV path or 'builtin-table2'");
    synth_cmd->add_option("--out", synth_args.out, "output CSV")->required();
    synth_cmd->add_option("--n-per-cluster", synth_args.n_per_cluster, "rows per cluster");
    synth_cmd->add_option("--noise-sd", synth_args.noise_sd, "per-dimension noise sd");
    synth_cmd->add_option("--seed", synth_args.seed, "rng seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_args);
        if (classify_cmd->parsed()) return cmd_classify(classify_args);
        if (validate_cmd->parsed()) return cmd_validate(validate_args);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
        if (compare_cmd->parsed()) return cmd_compare(compare_args);
        if (synth_cmd->parsed()) return cmd_synth(synth_args);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
