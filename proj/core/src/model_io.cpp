#include "ctlevels/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ctlevels/version.hpp"

namespace ctlevels {

namespace {

constexpr const char* kModelHeader = "ctlevels-model v1";
constexpr const char* kManifestHeader = "ctlevels-manifest v1";
constexpr const char* kReportHeader = "ctlevels-validation-report v1";
constexpr const char* kSummaryHeader = "ctlevels-distribution-summary v1";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : "NA";
}

class LineParser {
public:
    explicit LineParser(const std::string& text) : stream_(text) {}

    bool next(std::string& line) {
        while (std::getline(stream_, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        return false;
    }

    std::string expect_value(const std::string& key) {
        std::string line;
        if (!next(line)) throw SchemaError("model document: missing key '" + key + "'");
        if (line == key + ":") return "";
        const std::string prefix = key + ": ";
        if (line.rfind(prefix, 0) != 0) {
            throw SchemaError("model document: expected '" + key + "', got '" + line + "'");
        }
        return line.substr(prefix.size());
    }

private:
    std::istringstream stream_;
};

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw IoError("number formatting failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
    double v = 0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
        throw SchemaError("malformed number '" + s + "'");
    }
    return v;
}

std::string format_p_value(double p) {
    if (p < 1e-300) return "<1e-300";
    return format_double(p);
}

std::string ordered_model_to_string(const OrderedFcmModel& model) {
    std::ostringstream out;
    const auto& cfg = model.base.config;
    out << kModelHeader << '\n';
    out << "k: " << cfg.k << '\n';
    out << "m: " << format_double(cfg.m) << '\n';
    out << "epsilon: " << format_double(cfg.epsilon) << '\n';
    out << "max_iter: " << cfg.max_iter << '\n';
    out << "seed: " << cfg.seed << '\n';
    out << "init: "
        << (cfg.init == FcmInit::seeded_points ? "seeded_points" : "random_membership")
        << '\n';
    out << "iterations_used: " << model.base.iterations_used << '\n';
    out << "final_shift: " << format_double(model.base.final_shift) << '\n';
    out << "objective: " << format_double(model.base.objective) << '\n';
    out << "converged: " << (model.base.converged ? "true" : "false") << '\n';
    out << "degenerate: " << (model.base.degenerate ? "true" : "false") << '\n';
    out << "tau_clear: " << format_double(model.thresholds.tau_clear) << '\n';
    out << "tau_trans: " << format_double(model.thresholds.tau_trans) << '\n';
    out << "cert_low: " << format_double(model.thresholds.cert_low) << '\n';
    out << "cert_high: " << format_double(model.thresholds.cert_high) << '\n';

    out << "order:";
    for (int p : model.order) out << ' ' << p;
    out << '\n';
    out << "totals:";
    for (Eigen::Index j = 0; j < model.totals.size(); ++j) {
        out << ' ' << format_double(model.totals(j));
    }
    out << '\n';
    out << "ties:";
    for (const auto& [a, b] : model.tie_warnings) out << ' ' << a << '-' << b;
    out << '\n';
    out << "dims: " << model.base.centroids.cols() << '\n';
    out << "centroids:" << '\n';
    for (Eigen::Index j = 0; j < model.base.centroids.rows(); ++j) {
        for (Eigen::Index d = 0; d < model.base.centroids.cols(); ++d) {
            out << (d ? " " : "") << format_double(model.base.centroids(j, d));
        }
        out << '\n';
    }
    return out.str();
}

OrderedFcmModel ordered_model_from_string(const std::string& text) {
    LineParser parser(text);
    std::string line;
    if (!parser.next(line) || line != kModelHeader) {
        throw SchemaError("not a ctlevels model document (bad header)");
    }

    OrderedFcmModel model;
    auto& cfg = model.base.config;
    cfg.k = static_cast<int>(parse_double(parser.expect_value("k")));
    cfg.m = parse_double(parser.expect_value("m"));
    cfg.epsilon = parse_double(parser.expect_value("epsilon"));
    cfg.max_iter = static_cast<int>(parse_double(parser.expect_value("max_iter")));
    {
        const std::string seed_text = parser.expect_value("seed");
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(seed_text.data(),
                                         seed_text.data() + seed_text.size(), seed);
        if (ec != std::errc{} || ptr != seed_text.data() + seed_text.size()) {
            throw SchemaError("malformed seed '" + seed_text + "'");
        }
        cfg.seed = seed;
    }
    const std::string init = parser.expect_value("init");
    if (init == "seeded_points") {
        cfg.init = FcmInit::seeded_points;
    } else if (init == "random_membership") {
        cfg.init = FcmInit::random_membership;
    } else {
        throw SchemaError("unknown init '" + init + "'");
    }
    model.base.iterations_used =
        static_cast<int>(parse_double(parser.expect_value("iterations_used")));
    model.base.final_shift = parse_double(parser.expect_value("final_shift"));
    model.base.objective = parse_double(parser.expect_value("objective"));
    model.base.converged = parser.expect_value("converged") == "true";
    model.base.degenerate = parser.expect_value("degenerate") == "true";
    model.thresholds.tau_clear = parse_double(parser.expect_value("tau_clear"));
    model.thresholds.tau_trans = parse_double(parser.expect_value("tau_trans"));
    model.thresholds.cert_low = parse_double(parser.expect_value("cert_low"));
    model.thresholds.cert_high = parse_double(parser.expect_value("cert_high"));

    {
        std::istringstream s(parser.expect_value("order"));
        int v;
        while (s >> v) model.order.push_back(v);
        if (static_cast<int>(model.order.size()) != cfg.k) {
            throw SchemaError("order permutation has wrong length");
        }
    }
    {
        std::istringstream s(parser.expect_value("totals"));
        std::vector<double> vals;
        std::string tok;
        while (s >> tok) vals.push_back(parse_double(tok));
        if (static_cast<int>(vals.size()) != cfg.k) {
            throw SchemaError("totals vector has wrong length");
        }
        model.totals.resize(cfg.k);
        for (int j = 0; j < cfg.k; ++j) model.totals(j) = vals[static_cast<std::size_t>(j)];
    }
    {
        std::istringstream s(parser.expect_value("ties"));
        std::string tok;
        while (s >> tok) {
            const auto dash = tok.find('-');
            if (dash == std::string::npos) throw SchemaError("malformed tie entry '" + tok + "'");
            try {
                model.tie_warnings.emplace_back(std::stoi(tok.substr(0, dash)),
                                                std::stoi(tok.substr(dash + 1)));
            } catch (const std::exception&) {
                throw SchemaError("malformed tie entry '" + tok + "'");
            }
        }
    }
    const int dims = static_cast<int>(parse_double(parser.expect_value("dims")));
    if (!parser.next(line) || line != "centroids:") {
        throw SchemaError("model document: expected 'centroids:'");
    }
    model.base.centroids.resize(cfg.k, dims);
    for (int j = 0; j < cfg.k; ++j) {
        if (!parser.next(line)) throw SchemaError("model document: missing centroid row");
        std::istringstream s(line);
        std::string tok;
        for (int d = 0; d < dims; ++d) {
            if (!(s >> tok)) throw SchemaError("centroid row too short");
            model.base.centroids(j, d) = parse_double(tok);
        }
        if (s >> tok) throw SchemaError("centroid row too long");
    }

    // checks mirrored from order_clusters
    std::vector<bool> seen(static_cast<std::size_t>(cfg.k), false);
    for (int p : model.order) {
        if (p < 0 || p >= cfg.k || seen[static_cast<std::size_t>(p)]) {
            throw SchemaError("order is not a permutation of 0..k-1");
        }
        seen[static_cast<std::size_t>(p)] = true;
    }
    model.thresholds.validate();
    return model;
}

void save_ordered_model(const OrderedFcmModel& model, const std::filesystem::path& path) {
    write_file(path, ordered_model_to_string(model));
}

OrderedFcmModel load_ordered_model(const std::filesystem::path& path) {
    return ordered_model_from_string(read_file(path));
}

void write_classification_csv(const std::vector<ClassificationRecord>& records,
                              const std::vector<std::string>& ids,
                              const std::filesystem::path& path) {
    if (!ids.empty() && ids.size() != records.size()) {
        throw SchemaError("classification export: id/record count mismatch");
    }
    std::ostringstream out;
    out << "id,label,ctype,primary,secondary,score,certainty,band";
    for (int j = 1; j <= kCefrLevels; ++j) out << ",u" << j;
    out << '\n';
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out << (ids.empty() ? std::to_string(i + 1) : ids[i]) << ',' << r.label << ','
            << to_string(r.ctype) << ',' << to_string(r.primary.code) << ','
            << to_string(r.secondary.code) << ',' << format_double(r.score) << ','
            << format_double(r.certainty) << ',' << to_string(r.band);
        for (Eigen::Index j = 0; j < r.memberships.size(); ++j) {
            out << ',' << format_double(r.memberships(j));
        }
        out << '\n';
    }
    write_file(path, out.str());
}

void write_distribution_summary(const DistributionSummary& s,
                                const std::filesystem::path& path) {
    std::ostringstream out;
    out << kSummaryHeader << '\n';
    out << "n: " << s.n << '\n';
    const char* type_names[] = {"clear", "transition", "predominant"};
    for (int t = 0; t < 3; ++t) {
        out << "type." << type_names[t] << ".count: " << s.type_counts[static_cast<std::size_t>(t)]
            << '\n';
        out << "type." << type_names[t] << ".pct: "
            << format_double(s.type_pct(static_cast<ClassificationType>(t))) << '\n';
    }
    const char* band_names[] = {"low", "medium", "high"};
    for (int b = 0; b < 3; ++b) {
        out << "band." << band_names[b] << ".count: " << s.band_counts[static_cast<std::size_t>(b)]
            << '\n';
    }
    for (const auto& [label, count] : s.label_counts) {
        out << "label." << label << ".count: " << count << '\n';
    }
    write_file(path, out.str());
}

void write_score_histogram_csv(const DistributionSummary& s,
                               const std::filesystem::path& path) {
    std::ostringstream out;
    out << "bin_low,bin_high,count\n";
    for (std::size_t b = 0; b < kScoreHistogramBins; ++b) {
        const double lo = 1.0 + 0.1 * static_cast<double>(b);
        out << format_double(lo) << ',' << format_double(lo + 0.1) << ','
            << s.score_histogram[b] << '\n';
    }
    write_file(path, out.str());
}

namespace {

void write_stat_line(std::ostringstream& out, const std::string& name,
                     const StatTestResult& r) {
    out << name << ".method: " << to_string(r.method) << '\n';
    if (!r.defined) {
        out << name << ".statistic: NA\n" << name << ".p: NA\n";
    } else {
        out << name << ".statistic: " << format_double(r.statistic) << '\n';
        out << name << ".p: " << format_p_value(r.p_value) << '\n';
    }
    if (!r.detail.empty()) out << name << ".detail: " << r.detail << '\n';
}

} // namespace

void write_validation_report(const ValidationReport& rep, const std::filesystem::path& path) {
    std::ostringstream out;
    out << kReportHeader << '\n';
    out << "quality.silhouette: " << opt_str(rep.quality.silhouette) << '\n';
    out << "quality.fpc: " << format_double(rep.quality.fpc) << '\n';
    out << "quality.partition_entropy: " << format_double(rep.quality.partition_entropy)
        << '\n';
    out << "quality.avg_certainty: " << format_double(rep.quality.avg_certainty) << '\n';
    write_stat_line(out, "kruskal_wallis", rep.kw);
    for (const auto& pt : rep.pairwise_mw) {
        const std::string name = "mann_whitney." + level_name(pt.lower_ordinal, rep.k) +
                                 "_" + level_name(pt.upper_ordinal, rep.k);
        if (pt.skipped) {
            out << name << ": skipped (empty level group)\n";
        } else {
            write_stat_line(out, name, pt.result);
        }
    }
    write_stat_line(out, "global.kendall", rep.global_tau);
    write_stat_line(out, "global.spearman", rep.global_rho);
    if (rep.pca.defined) {
        out << "pca.explained_variance_ratios:";
        for (Eigen::Index c = 0; c < rep.pca.explained_variance_ratios.size(); ++c) {
            out << ' ' << format_double(rep.pca.explained_variance_ratios(c));
        }
        out << '\n';
    } else {
        out << "pca.explained_variance_ratios: NA\n";
    }
    for (const auto& note : rep.notes) out << "note: " << note << '\n';
    write_file(path, out.str());
}

void write_dimension_correlations_csv(const ValidationReport& rep,
                                      const std::filesystem::path& path) {
    std::ostringstream out;
    out << "dimension,tau,p_tau,rho,p_rho\n";
    for (const auto& dc : rep.per_dimension) {
        out << dc.dimension << ',';
        if (dc.kendall.defined) {
            out << format_double(dc.kendall.statistic) << ','
                << format_p_value(dc.kendall.p_value);
        } else {
            out << "NA,NA";
        }
        out << ',';
        if (dc.spearman.defined) {
            out << format_double(dc.spearman.statistic) << ','
                << format_p_value(dc.spearman.p_value);
        } else {
            out << "NA,NA";
        }
        out << '\n';
    }
    write_file(path, out.str());
}

void write_pca_coordinates_csv(const PcaResult& pca, std::size_t cap,
                               const std::filesystem::path& path) {
    std::ostringstream out;
    if (!pca.defined) {
        out << "pc1,pc2\n";
        write_file(path, out.str());
        return;
    }
    for (Eigen::Index c = 0; c < pca.coordinates.cols(); ++c) {
        out << (c ? "," : "") << "pc" << (c + 1);
    }
    out << '\n';
    const auto rows = std::min<Eigen::Index>(pca.coordinates.rows(),
                                             static_cast<Eigen::Index>(cap));
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index c = 0; c < pca.coordinates.cols(); ++c) {
            out << (c ? "," : "") << format_double(pca.coordinates(i, c));
        }
        out << '\n';
    }
    write_file(path, out.str());
}

void write_gap_csv(const std::vector<GapPoint>& points, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "k,gap,s_k,log_w,mean_log_w_ref\n";
    for (const auto& g : points) {
        out << g.k << ',' << format_double(g.gap) << ',' << format_double(g.s_k) << ','
            << format_double(g.log_w) << ',' << format_double(g.mean_log_w_ref) << '\n';
    }
    write_file(path, out.str());
}

void write_grid_csv(const GridSearchResult& grid, int k, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "m,epsilon,k,fpc,silhouette,selected\n";
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        const auto& c = grid.cells[i];
        out << format_double(c.m) << ',' << format_double(c.epsilon) << ',' << k << ','
            << format_double(c.fpc) << ',' << opt_str(c.silhouette) << ','
            << (i == grid.selected ? 1 : 0) << '\n';
    }
    write_file(path, out.str());
}

void write_cv_csv(const CrossValidationResult& cv, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "fold,silhouette,fpc,partition_entropy,avg_certainty\n";
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
        const auto& q = cv.folds[f];
        out << (f + 1) << ',' << opt_str(q.silhouette) << ',' << format_double(q.fpc) << ','
            << format_double(q.partition_entropy) << ',' << format_double(q.avg_certainty)
            << '\n';
    }
    out << "mean," << (cv.silhouette ? format_double(cv.silhouette->mean) : "NA") << ','
        << format_double(cv.fpc.mean) << ',' << format_double(cv.partition_entropy.mean)
        << ',' << format_double(cv.avg_certainty.mean) << '\n';
    out << "variance," << (cv.silhouette ? format_double(cv.silhouette->variance) : "NA")
        << ',' << format_double(cv.fpc.variance) << ','
        << format_double(cv.partition_entropy.variance) << ','
        << format_double(cv.avg_certainty.variance) << '\n';
    write_file(path, out.str());
}

void write_train_test_csv(const TrainTestReport& rep, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "metric,train,test,delta,delta_pct\n";
    for (const auto& d : rep.deltas) {
        out << d.name << ',' << opt_str(d.train) << ',' << opt_str(d.test) << ','
            << opt_str(d.absolute) << ',' << opt_str(d.percent) << '\n';
    }
    write_file(path, out.str());
}

void write_baseline_csv(const BaselineReport& rep, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto& [key, value] : rep.config_echo) {
        out << "# " << key << " = " << value << '\n';
    }
    out << "method,silhouette,n_clusters,noise_pct,apn,status,note\n";
    for (const auto& r : rep.rows) {
        out << r.method << ',' << opt_str(r.silhouette) << ',' << r.n_clusters << ','
            << format_double(r.noise_pct) << ',' << opt_str(r.apn) << ','
            << (r.failed ? "failed" : "ok") << ',' << r.note << '\n';
    }
    write_file(path, out.str());
}

void write_sensitivity_csv(const std::vector<SensitivityCell>& cells,
                           const std::filesystem::path& path) {
    std::ostringstream out;
    out << "tau_clear,tau_trans,clear_pct,transition_pct,predominant_pct\n";
    for (const auto& c : cells) {
        out << format_double(c.tau_clear) << ',' << format_double(c.tau_trans) << ','
            << format_double(c.clear_pct) << ',' << format_double(c.transition_pct) << ','
            << format_double(c.predominant_pct) << '\n';
    }
    write_file(path, out.str());
}

void write_manifest(const std::filesystem::path& path, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& entries,
                    double wall_seconds) {
    std::ostringstream out;
    out << kManifestHeader << '\n';
    out << "command: " << command << '\n';
    out << "tool_version: " << kVersion << '\n';
    for (const auto& [key, value] : entries) out << key << ": " << value << '\n';
    out << "wall_time_s: " << format_double(wall_seconds) << '\n';
    write_file(path, out.str());
}

} // namespace ctlevels
