#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace ctlevels {

// U is an N x k row-stochastic membership matrix throughout.

// Mean squared membership, in [1/k, 1]; 1 iff one-hot rows.
double fuzzy_partition_coefficient(const Eigen::MatrixXd& U);

// Mean membership entropy in natural-log units; 0 iff one-hot rows.
double partition_entropy(const Eigen::MatrixXd& U);

// 1 - H2(u) / log2(k), clamped to [0,1]; 0 log 0 = 0.
double certainty_from_memberships(const Eigen::VectorXd& u);

double average_certainty(const Eigen::MatrixXd& U);

// Hard labels; first index wins exact ties.
std::vector<int> argmax_labels(const Eigen::MatrixXd& U);

struct SilhouetteOptions {
    // Distance-based metrics run on a seeded subsample above this cap.
    std::size_t subsample_cap = 20000;
    std::uint64_t seed = 0;
};

// Mean silhouette of the hard partition under Euclidean distance. Rows with
// label < 0 (noise) are excluded; singleton clusters score 0 for their row.
// nullopt when fewer than two non-empty clusters remain.
std::optional<double> silhouette(const Eigen::MatrixXd& X,
                                 const std::vector<int>& labels,
                                 const SilhouetteOptions& opts = {});

} // namespace ctlevels
