#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ctlevels/cluster_metrics.hpp"
#include "ctlevels/types.hpp"

namespace ctlevels {

enum class FcmInit { random_membership, seeded_points };

struct FcmConfig {
    int k = 6;
    double m = 1.5;       // fuzzification exponent, strictly > 1
    double epsilon = 1e-5; // max centroid coordinate change at convergence
    int max_iter = 1000;
    std::uint64_t seed = 0;
    FcmInit init = FcmInit::seeded_points;

    void validate() const;
};

struct FcmModel {
    Eigen::MatrixXd centroids; // k x D
    FcmConfig config;
    int iterations_used = 0;
    double final_shift = 0.0;
    double objective = 0.0; // sum_ij u_ij^m d2_ij at convergence
    bool converged = false;
    bool degenerate = false; // coincident centroids at convergence
    std::vector<double> objective_history;

    int k() const { return static_cast<int>(centroids.rows()); }
    int dims() const { return static_cast<int>(centroids.cols()); }
};

// Alternating optimization: u_ij = 1 / sum_t (d_ij/d_it)^(2/(m-1)) with
// Euclidean d, v_j = sum_i u_ij^m x_i / sum_i u_ij^m. A point coinciding
// with centroids gets its membership split equally among them.
FcmModel fit(const Eigen::MatrixXd& X, const FcmConfig& config);
FcmModel fit(const Dataset& data, const FcmConfig& config);

// Same loop from explicit initial centroids (k x D); exposed so tests can
// pin the starting point.
FcmModel fit_from(const Eigen::MatrixXd& X, const FcmConfig& config,
                  Eigen::MatrixXd initial_centroids);

Eigen::VectorXd memberships(const FcmModel& model, const Eigen::VectorXd& point);
Eigen::VectorXd memberships(const FcmModel& model, const ProjectVector& point);
Eigen::MatrixXd memberships_batch(const FcmModel& model, const Eigen::MatrixXd& X);
Eigen::MatrixXd memberships_batch(const FcmModel& model, const Dataset& data);

struct GridCell {
    double m = 0;
    double epsilon = 0;
    double fpc = 0;
    std::optional<double> silhouette;
};

struct GridSearchResult {
    std::vector<GridCell> cells; // row-major over (m, epsilon)
    std::size_t selected = 0;
};

inline std::vector<double> default_m_grid() { return {1.5, 2.0, 2.5}; }
inline std::vector<double> default_eps_grid() { return {1e-3, 1e-4, 1e-5}; }

// One fit per cell; selection maximizes the min-max-normalized mean of
// (FPC, silhouette), ties broken toward smaller m then smaller epsilon.
GridSearchResult grid_search(const Dataset& data, const std::vector<double>& m_grid,
                             const std::vector<double>& eps_grid, int k,
                             std::uint64_t seed);

} // namespace ctlevels
