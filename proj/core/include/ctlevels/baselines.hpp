#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctlevels/cluster_metrics.hpp"
#include "ctlevels/types.hpp"

namespace ctlevels {

struct KMeansConfig {
    int k = 6;
    int batch_size = 1024;
    int max_iter = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

struct KMeansModel {
    Eigen::MatrixXd centroids; // k x D
    KMeansConfig config;
    double inertia = 0;
    std::vector<int> labels;           // final full-data assignment
    std::vector<double> eval_history;  // full-data inertia every 10 iterations
    int iterations_used = 0;
};

// Seeded ++-style init, per-batch nearest-centroid assignment, per-centroid
// streaming mean update. Full-data inertia is evaluated every 10 iterations;
// the loop stops (reverting to the previous snapshot) as soon as an
// evaluation stops improving, so eval_history is non-increasing. Empty
// clusters are reseeded from the farthest point.
KMeansModel minibatch_kmeans(const Eigen::MatrixXd& X, const KMeansConfig& config);
KMeansModel minibatch_kmeans(const Dataset& data, const KMeansConfig& config);

struct DbscanResult {
    std::vector<int> labels; // -1 = noise, else 0..n_clusters-1
    double eps = 0;
    int min_pts = 0;
    int n_clusters = 0;
    double noise_fraction = 0;
};

// Standard density reachability with Euclidean distance; clusters are
// numbered in row-visitation order, and border ties go to the cluster that
// reaches them first (lowest id).
DbscanResult dbscan(const Eigen::MatrixXd& X, double eps, int min_pts);
DbscanResult dbscan(const Dataset& data, double eps, int min_pts);

// Default eps heuristic: median distance to the nearest neighbor.
double median_nn_distance(const Eigen::MatrixXd& X);

// A deterministic clustering procedure under test: labels(data, seed).
struct Clusterer {
    std::string name;
    std::function<std::vector<int>(const Eigen::MatrixXd&, std::uint64_t)> run;
};

struct ApnResult {
    double apn = 0;                  // 0 = perfectly stable
    std::vector<double> per_column;  // proportion broken per dropped column
    std::vector<int> skipped_columns;
    std::size_t pairs_used = 0;
    bool pairs_subsampled = false;
};

// Leave-one-column-out stability: recluster with each dimension removed and
// measure, over pairs co-clustered in the full fit, the proportion no longer
// co-clustered. Pairs are enumerated exactly when few enough, otherwise
// sampled (seeded, capped).
ApnResult apn_stability(const Eigen::MatrixXd& X, const Clusterer& clusterer,
                        std::uint64_t seed, std::size_t max_pairs = 200000);

struct BaselineRow {
    std::string method;
    std::optional<double> silhouette;
    int n_clusters = 0;
    double noise_pct = 0;
    std::optional<double> apn;
    bool failed = false;
    std::string note;
};

struct BaselineOptions {
    std::optional<double> dbscan_eps; // default: median 1-NN distance
    std::optional<int> dbscan_min_pts; // default: 2 * dims
    KMeansConfig kmeans;
    SilhouetteOptions silhouette;
    std::size_t apn_max_pairs = 200000;
};

struct BaselineReport {
    std::vector<BaselineRow> rows; // fcm_argmax, minibatch_kmeans, dbscan
    std::vector<std::pair<std::string, std::string>> config_echo;
};

// FCM argmax, mini-batch k-means and DBSCAN under identical data and
// subsampling; per-method failures leave a marker row.
BaselineReport baseline_report(const Dataset& data, std::uint64_t seed,
                               const BaselineOptions& opts = {});

} // namespace ctlevels
