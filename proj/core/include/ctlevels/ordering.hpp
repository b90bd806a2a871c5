#pragma once

#include <utility>
#include <vector>

#include "ctlevels/fcm.hpp"
#include "ctlevels/thresholds.hpp"

namespace ctlevels {

// Sum of a centroid's coordinates; ascending totals define the level order.
double centroid_total(const Eigen::VectorXd& centroid);

// A fitted model plus the level ordering imposed on its clusters. Level
// position p (0-based) maps to base cluster order[p]; CEFR codes attach only
// when k == 6, otherwise levels are named L1..Lk.
struct OrderedFcmModel {
    FcmModel base;
    Eigen::VectorXd totals;               // per base cluster
    std::vector<int> order;               // level position -> base cluster
    ClassifyThresholds thresholds;
    std::vector<std::pair<int, int>> tie_warnings; // base-cluster index pairs

    int k() const { return base.k(); }
    int dims() const { return base.dims(); }

    Eigen::MatrixXd ordered_centroids() const;
    Eigen::VectorXd ordered_totals() const;

    // Memberships reported in level order (ascending centroid total).
    Eigen::VectorXd memberships(const Eigen::VectorXd& point) const;
    Eigen::VectorXd memberships(const ProjectVector& point) const;
    Eigen::MatrixXd memberships_batch(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd memberships_batch(const Dataset& data) const;

    // Centroid assigned to a CEFR level; requires k == 6.
    Eigen::VectorXd level_profile(const CefrLevel& level) const;
};

// Sorts clusters by ascending centroid total. Totals tied within 1e-9 are
// ordered by lexicographic centroid comparison and reported in tie_warnings.
OrderedFcmModel order_clusters(const FcmModel& model,
                               const ClassifyThresholds& thresholds = {});

} // namespace ctlevels
