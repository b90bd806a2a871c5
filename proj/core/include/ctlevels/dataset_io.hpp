#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ctlevels/types.hpp"

namespace ctlevels {

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    int strata_bins = 5;

    void validate() const; // throws on fraction outside (0,1) or bins < 1
};

struct SplitResult {
    Dataset train;
    Dataset test;
};

// Synthetic rows plus the generator row index each was drawn from.
struct SyntheticSample {
    Dataset data;
    std::vector<int> labels;
};

// CSV schema: optional leading `id` column, then the nine integer columns
// named as in kDimensionNames (any order). Header mandatory, comma
// separated, LF or CRLF.
Dataset load_csv(const std::filesystem::path& path);
void save_dataset(const Dataset& data, const std::filesystem::path& path);

// Total-score (0..36) equal-width stratum in [0, bins).
int stratum_of(const ProjectVector& row, int bins);

// Deterministic stratified split on total-score bins; per-stratum ties are
// broken by a seeded shuffle.
SplitResult stratified_split(const Dataset& data, const SplitSpec& spec);

// Per cluster: centroid + N(0, noise_sd) per dimension, rounded to the
// nearest integer and clipped to [0,4]. Rows are shuffled by seed; labels
// stay parallel to rows.
SyntheticSample synthesize(const Eigen::MatrixXd& centroids, int per_cluster_n,
                           double noise_sd, std::uint64_t seed);

struct ColumnStats {
    double mean = 0, sd = 0, q1 = 0, median = 0, q3 = 0;
};

std::array<ColumnStats, kDims> describe(const Dataset& data);

} // namespace ctlevels
