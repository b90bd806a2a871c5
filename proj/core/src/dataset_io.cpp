#include "ctlevels/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ctlevels/rng.hpp"

namespace ctlevels {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

int parse_score(const std::string& cell, std::size_t data_row, int dim) {
    int value = 0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    const std::string where = "row " + std::to_string(data_row) + ", column '" +
                              std::string(kDimensionNames[dim]) + "'";
    if (ec != std::errc{} || ptr != end) {
        throw SchemaError(where + ": non-integer value '" + cell + "'");
    }
    if (value < kScoreMin || value > kScoreMax) {
        throw SchemaError(where + ": value " + std::to_string(value) + " out of range [0,4]");
    }
    return value;
}

} // namespace

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw SchemaError("empty input: '" + path.string() + "'");

    const auto header = split_line(lines[0]);
    std::size_t first_dim_col = 0;
    bool has_id = false;
    if (!header.empty() && header[0] == "id") {
        has_id = true;
        first_dim_col = 1;
    }
    if (header.size() != first_dim_col + kDims) {
        // Identify what is wrong before failing on the count alone.
        std::vector<bool> present(kDims, false);
        for (std::size_t c = first_dim_col; c < header.size(); ++c) {
            for (int d = 0; d < kDims; ++d) {
                if (header[c] == kDimensionNames[d]) present[d] = true;
            }
        }
        for (int d = 0; d < kDims; ++d) {
            if (!present[d]) {
                throw SchemaError("missing column '" + std::string(kDimensionNames[d]) +
                                  "' in '" + path.string() + "'");
            }
        }
        throw SchemaError("unexpected column count in '" + path.string() + "'");
    }

    // column position (within file) of each canonical dimension
    std::array<int, kDims> col_of{};
    col_of.fill(-1);
    for (std::size_t c = first_dim_col; c < header.size(); ++c) {
        bool known = false;
        for (int d = 0; d < kDims; ++d) {
            if (header[c] == kDimensionNames[d]) {
                if (col_of[d] != -1) {
                    throw SchemaError("duplicate column '" + header[c] + "' in '" +
                                      path.string() + "'");
                }
                col_of[d] = static_cast<int>(c);
                known = true;
                break;
            }
        }
        if (!known) {
            throw SchemaError("unknown column '" + header[c] + "' in '" + path.string() + "'");
        }
    }
    for (int d = 0; d < kDims; ++d) {
        if (col_of[d] == -1) {
            throw SchemaError("missing column '" + std::string(kDimensionNames[d]) + "' in '" +
                              path.string() + "'");
        }
    }

    std::vector<ProjectVector> rows;
    std::vector<std::string> ids;
    rows.reserve(lines.size() - 1);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        const auto cells = split_line(lines[li]);
        const std::size_t data_row = rows.size() + 1;
        if (cells.size() != header.size()) {
            throw SchemaError("row " + std::to_string(data_row) + ": expected " +
                              std::to_string(header.size()) + " cells, got " +
                              std::to_string(cells.size()));
        }
        ProjectVector row;
        for (int d = 0; d < kDims; ++d) {
            row.scores[d] = parse_score(cells[static_cast<std::size_t>(col_of[d])], data_row, d);
        }
        rows.push_back(row);
        if (has_id) ids.push_back(cells[0]);
    }

    return Dataset(std::move(rows), std::move(ids));
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");

    if (data.has_ids()) out << "id,";
    for (int d = 0; d < kDims; ++d) {
        out << kDimensionNames[d] << (d + 1 < kDims ? "," : "\n");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.has_ids()) out << data.row_ids()[i] << ',';
        const auto& s = data[i].scores;
        for (int d = 0; d < kDims; ++d) {
            out << s[d] << (d + 1 < kDims ? "," : "\n");
        }
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw SchemaError("train_fraction must lie in (0,1)");
    }
    if (strata_bins < 1) throw SchemaError("strata_bins must be >= 1");
}

int stratum_of(const ProjectVector& row, int bins) {
    const int max_total = kDims * kScoreMax; // 36
    const int b = row.total() * bins / (max_total + 1);
    return std::min(b, bins - 1);
}

SplitResult stratified_split(const Dataset& data, const SplitSpec& spec) {
    spec.validate();
    if (data.size() < 2) throw InfeasibleError("cannot split a dataset with fewer than 2 rows");

    std::vector<std::vector<std::size_t>> strata(static_cast<std::size_t>(spec.strata_bins));
    for (std::size_t i = 0; i < data.size(); ++i) {
        strata[static_cast<std::size_t>(stratum_of(data[i], spec.strata_bins))].push_back(i);
    }

    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t s = 0; s < strata.size(); ++s) {
        auto& members = strata[s];
        if (members.empty()) continue;
        Rng rng(substream_seed(spec.seed, s));
        rng.shuffle(members);
        const auto n_train = static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(members.size())));
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < n_train ? train_idx : test_idx).push_back(members[i]);
        }
    }
    // keep input order within each side
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return SplitResult{data.select(train_idx), data.select(test_idx)};
}

SyntheticSample synthesize(const Eigen::MatrixXd& centroids, int per_cluster_n,
                           double noise_sd, std::uint64_t seed) {
    if (centroids.cols() != kDims) {
        throw SchemaError("centroid matrix must have 9 columns, got " +
                          std::to_string(centroids.cols()));
    }
    if (centroids.rows() < 1) throw SchemaError("centroid matrix is empty");
    if (per_cluster_n < 1) throw SchemaError("per_cluster_n must be >= 1 (empty input)");
    if (noise_sd < 0.0) throw SchemaError("noise_sd must be >= 0");
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
        for (Eigen::Index d = 0; d < centroids.cols(); ++d) {
            const double v = centroids(j, d);
            if (!(v >= kScoreMin && v <= kScoreMax)) {
                throw SchemaError("centroid entry (" + std::to_string(j) + "," +
                                  std::to_string(d) + ") = " + std::to_string(v) +
                                  " outside [0,4]");
            }
        }
    }

    const auto k = static_cast<std::size_t>(centroids.rows());
    std::vector<ProjectVector> rows;
    std::vector<int> labels;
    rows.reserve(k * static_cast<std::size_t>(per_cluster_n));
    labels.reserve(rows.capacity());
    for (std::size_t j = 0; j < k; ++j) {
        Rng rng(substream_seed(seed, j + 1));
        for (int i = 0; i < per_cluster_n; ++i) {
            ProjectVector row;
            for (int d = 0; d < kDims; ++d) {
                const double mu = centroids(static_cast<Eigen::Index>(j), d);
                const double v = noise_sd > 0.0 ? rng.normal(mu, noise_sd) : mu;
                row.scores[d] = static_cast<int>(
                    std::clamp<long>(std::lround(v), kScoreMin, kScoreMax));
            }
            rows.push_back(row);
            labels.push_back(static_cast<int>(j));
        }
    }

    Rng master(substream_seed(seed, 0));
    const auto perm = master.permutation(rows.size());
    std::vector<ProjectVector> shuffled_rows(rows.size());
    std::vector<int> shuffled_labels(rows.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        shuffled_rows[i] = rows[perm[i]];
        shuffled_labels[i] = labels[perm[i]];
    }
    return SyntheticSample{Dataset(std::move(shuffled_rows)), std::move(shuffled_labels)};
}

std::array<ColumnStats, kDims> describe(const Dataset& data) {
    if (data.empty()) throw InfeasibleError("describe: empty dataset");
    std::array<ColumnStats, kDims> out{};
    const double n = static_cast<double>(data.size());
    for (int d = 0; d < kDims; ++d) {
        std::vector<double> col;
        col.reserve(data.size());
        double sum = 0;
        for (const auto& row : data.rows()) {
            col.push_back(row.scores[d]);
            sum += row.scores[d];
        }
        std::sort(col.begin(), col.end());
        const double mean = sum / n;
        double ss = 0;
        for (double v : col) ss += (v - mean) * (v - mean);
        auto quantile = [&](double q) {
            // linear interpolation between closest ranks
            const double pos = q * (n - 1);
            const auto lo = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(lo);
            if (lo + 1 >= col.size()) return col.back();
            return col[lo] * (1.0 - frac) + col[lo + 1] * frac;
        };
        out[static_cast<std::size_t>(d)] =
            ColumnStats{mean, std::sqrt(ss / (n > 1 ? n - 1 : 1)), quantile(0.25),
                        quantile(0.5), quantile(0.75)};
    }
    return out;
}

} // namespace ctlevels
