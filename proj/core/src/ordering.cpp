#include "ctlevels/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctlevels {

void ClassifyThresholds::validate() const {
    if (!(tau_clear >= 0.0 && tau_clear <= 1.0)) {
        throw SchemaError("tau_clear must lie in [0,1]");
    }
    if (!(tau_trans > 0.0 && tau_trans < 1.0)) {
        throw SchemaError("tau_trans must lie in (0,1)");
    }
    if (!(cert_low > 0.0 && cert_low < cert_high && cert_high < 1.0)) {
        throw SchemaError("certainty thresholds must satisfy 0 < low < high < 1");
    }
}

double centroid_total(const Eigen::VectorXd& centroid) { return centroid.sum(); }

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index d = 0; d < a.size(); ++d) {
        if (a(d) < b(d)) return true;
        if (a(d) > b(d)) return false;
    }
    return false;
}

} // namespace

OrderedFcmModel order_clusters(const FcmModel& model, const ClassifyThresholds& thresholds) {
    thresholds.validate();
    if (model.centroids.rows() == 0) throw InfeasibleError("order_clusters: unfitted model");

    OrderedFcmModel ordered;
    ordered.base = model;
    ordered.thresholds = thresholds;

    const int k = model.k();
    ordered.totals.resize(k);
    for (int j = 0; j < k; ++j) {
        ordered.totals(j) = centroid_total(model.centroids.row(j).transpose());
    }

    ordered.order.resize(static_cast<std::size_t>(k));
    std::iota(ordered.order.begin(), ordered.order.end(), 0);
    std::sort(ordered.order.begin(), ordered.order.end(), [&](int a, int b) {
        const double ta = ordered.totals(a);
        const double tb = ordered.totals(b);
        if (std::abs(ta - tb) > 1e-9) return ta < tb;
        return lex_less(model.centroids.row(a).transpose(),
                        model.centroids.row(b).transpose());
    });
    for (std::size_t p = 0; p + 1 < ordered.order.size(); ++p) {
        const int a = ordered.order[p];
        const int b = ordered.order[p + 1];
        if (std::abs(ordered.totals(a) - ordered.totals(b)) <= 1e-9) {
            ordered.tie_warnings.emplace_back(a, b);
        }
    }
    return ordered;
}

Eigen::MatrixXd OrderedFcmModel::ordered_centroids() const {
    Eigen::MatrixXd V(k(), dims());
    for (int p = 0; p < k(); ++p) {
        V.row(p) = base.centroids.row(order[static_cast<std::size_t>(p)]);
    }
    return V;
}

Eigen::VectorXd OrderedFcmModel::ordered_totals() const {
    Eigen::VectorXd t(k());
    for (int p = 0; p < k(); ++p) t(p) = totals(order[static_cast<std::size_t>(p)]);
    return t;
}

Eigen::VectorXd OrderedFcmModel::memberships(const Eigen::VectorXd& point) const {
    const Eigen::VectorXd u = ctlevels::memberships(base, point);
    Eigen::VectorXd out(k());
    for (int p = 0; p < k(); ++p) out(p) = u(order[static_cast<std::size_t>(p)]);
    return out;
}

Eigen::VectorXd OrderedFcmModel::memberships(const ProjectVector& point) const {
    return memberships(point.to_real());
}

Eigen::MatrixXd OrderedFcmModel::memberships_batch(const Eigen::MatrixXd& X) const {
    const Eigen::MatrixXd U = ctlevels::memberships_batch(base, X);
    Eigen::MatrixXd out(U.rows(), U.cols());
    for (int p = 0; p < k(); ++p) out.col(p) = U.col(order[static_cast<std::size_t>(p)]);
    return out;
}

Eigen::MatrixXd OrderedFcmModel::memberships_batch(const Dataset& data) const {
    return memberships_batch(data.to_matrix());
}

Eigen::VectorXd OrderedFcmModel::level_profile(const CefrLevel& level) const {
    if (k() != kCefrLevels) {
        throw SchemaError("CEFR level profiles require k=6, model has k=" +
                          std::to_string(k()));
    }
    return ordered_centroids().row(level.ordinal - 1).transpose();
}

} // namespace ctlevels
