#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctlevels/classify.hpp"
#include "ctlevels/cluster_metrics.hpp"
#include "ctlevels/dataset_io.hpp"
#include "ctlevels/ordering.hpp"

namespace ctlevels {

struct PartitionQuality {
    std::optional<double> silhouette; // nullopt when < 2 non-empty clusters
    double fpc = 0;
    double partition_entropy = 0; // natural-log units
    double avg_certainty = 0;
};

PartitionQuality partition_quality(const OrderedFcmModel& model, const Dataset& data,
                                   const SilhouetteOptions& opts = {});

enum class StatMethod { kruskal_wallis, mann_whitney, kendall_tau_b, spearman_rho };

std::string_view to_string(StatMethod m);

struct StatTestResult {
    double statistic = 0;
    double p_value = 1; // in [0,1]
    StatMethod method = StatMethod::kruskal_wallis;
    bool defined = true; // false on zero-variance inputs, statistic/p not meaningful
    std::string detail;
};

// H with tie correction; p from the chi-squared upper tail, df = groups - 1.
// All values identical yields H = 0, p = 1.
StatTestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

enum class MwMethod { automatic, exact, normal };

// Two-sided U test. Exact enumeration when n_x + n_y <= 12 and tie-free;
// otherwise normal approximation with tie-corrected variance and a
// continuity correction.
StatTestResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y,
                              MwMethod method = MwMethod::automatic);

struct RankCorrelations {
    StatTestResult kendall;  // tau-b
    StatTestResult spearman; // rho via ranked Pearson, average ranks
};

// Kendall p: exact permutation enumeration for n <= 8, else normal
// approximation with tie corrections. Spearman p: t distribution with
// n - 2 degrees of freedom.
RankCorrelations rank_correlations(const std::vector<double>& a, const std::vector<double>& b);

struct PcaResult {
    bool defined = true;                       // false on zero-variance input
    Eigen::VectorXd explained_variance_ratios; // descending
    Eigen::MatrixXd coordinates;               // N x components
    Eigen::MatrixXd components;                // dims x components
    Eigen::VectorXd mean;
};

// Mean-centered covariance eigendecomposition; per component the
// largest-magnitude loading is made positive.
PcaResult pca_project(const Eigen::MatrixXd& X, int components = 2);
PcaResult pca_project(const Dataset& data, int components = 2);

struct PairwiseTest {
    int lower_ordinal = 0;
    int upper_ordinal = 0;
    bool skipped = false; // empty level group
    StatTestResult result;
};

struct DimensionCorrelation {
    std::string dimension;
    StatTestResult kendall;
    StatTestResult spearman;
};

struct ValidationReport {
    int k = kCefrLevels; // level count of the model under validation
    PartitionQuality quality;
    StatTestResult kw;                        // levels vs total score
    std::vector<PairwiseTest> pairwise_mw;    // adjacent level pairs by default
    StatTestResult global_tau;                // ordinal vs per-level median total
    StatTestResult global_rho;
    std::vector<DimensionCorrelation> per_dimension; // 9 rows, canonical order
    PcaResult pca;
    std::vector<std::string> notes;
};

struct ReportOptions {
    bool all_pairs = false; // all 15 level pairs instead of the 5 adjacent
    SilhouetteOptions silhouette;
    int pca_components = 2;
};

ValidationReport ordinal_progression_report(const OrderedFcmModel& model,
                                            const Dataset& data,
                                            const ReportOptions& opts = {});

struct GapPoint {
    int k = 0;
    double gap = 0;
    double s_k = 0;
    double log_w = 0;          // observed hard-partition dispersion
    double mean_log_w_ref = 0; // uniform reference mean
};

// Tibshirani gap statistic over FCM argmax partitions; references are drawn
// uniformly over the per-dimension observed range.
std::vector<GapPoint> gap_statistic(const Dataset& data, int k_min, int k_max,
                                    int B, std::uint64_t seed);

struct MetricSummary {
    double mean = 0;
    double variance = 0; // sample variance (n-1)
};

struct CrossValidationResult {
    std::vector<PartitionQuality> folds;
    std::optional<MetricSummary> silhouette; // nullopt if undefined in any fold
    MetricSummary fpc;
    MetricSummary partition_entropy;
    MetricSummary avg_certainty;
};

// Deterministic stratified fold assignment on total-score bins; the returned
// index lists partition 0..N-1.
std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& data, int folds,
                                                       int strata_bins,
                                                       std::uint64_t seed);

// Stratified folds on total-score bins; fit on folds-1, evaluate quality on
// the held-out fold.
CrossValidationResult cross_validate(const Dataset& data, int folds,
                                     const FcmConfig& config, int strata_bins = 5,
                                     const SilhouetteOptions& opts = {});

struct MetricDelta {
    std::string name;
    std::optional<double> train;
    std::optional<double> test;
    std::optional<double> absolute; // test - train
    std::optional<double> percent;  // against the train value
};

struct TrainTestReport {
    PartitionQuality train;
    PartitionQuality test;
    std::vector<MetricDelta> deltas; // silhouette, fpc, partition_entropy, avg_certainty
};

TrainTestReport train_test_report(const OrderedFcmModel& model, const Dataset& train,
                                  const Dataset& test, const SilhouetteOptions& opts = {});

} // namespace ctlevels
