#include "ctlevels/classify.hpp"

#include <algorithm>
#include <cmath>

#include "ctlevels/cluster_metrics.hpp"

namespace ctlevels {

std::string_view to_string(ClassificationType t) {
    switch (t) {
        case ClassificationType::Clear: return "Clear";
        case ClassificationType::Transition: return "Transition";
        case ClassificationType::Predominant: return "Predominant";
    }
    return "Clear";
}

std::string_view to_string(CertaintyBand b) {
    switch (b) {
        case CertaintyBand::Low: return "Low";
        case CertaintyBand::Medium: return "Medium";
        case CertaintyBand::High: return "High";
    }
    return "Low";
}

namespace {

struct TopTwo {
    Eigen::Index primary = 0;
    Eigen::Index secondary = 1;
};

// Primary is the first maximum. Secondary ties prefer the single candidate
// adjacent to the primary, then the lower position.
TopTwo top_two(const Eigen::VectorXd& u) {
    TopTwo t;
    u.maxCoeff(&t.primary);

    double second = -1.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        if (j == t.primary) continue;
        if (u(j) > second) second = u(j);
    }
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        if (j != t.primary && u(j) == second) candidates.push_back(j);
    }
    if (candidates.size() <= 1) {
        t.secondary = candidates.empty() ? t.primary : candidates[0];
        return t;
    }
    std::vector<Eigen::Index> adjacent;
    for (auto c : candidates) {
        if (std::abs(static_cast<long>(c) - static_cast<long>(t.primary)) == 1) {
            adjacent.push_back(c);
        }
    }
    t.secondary = adjacent.size() == 1 ? adjacent[0] : candidates.front();
    return t;
}

} // namespace

ClassificationType classify_type(const Eigen::VectorXd& u, const ClassifyThresholds& th) {
    const TopTwo t = top_two(u);
    if (u(t.primary) >= th.tau_clear) return ClassificationType::Clear;
    if (u(t.primary) - u(t.secondary) < th.tau_trans) return ClassificationType::Transition;
    return ClassificationType::Predominant;
}

double continuous_score(const Eigen::VectorXd& u) {
    double s = 0;
    for (Eigen::Index j = 0; j < u.size(); ++j) s += u(j) * static_cast<double>(j + 1);
    return std::clamp(s, 1.0, static_cast<double>(u.size()));
}

double certainty(const Eigen::VectorXd& u) { return certainty_from_memberships(u); }

CertaintyBand certainty_band(double c, const ClassifyThresholds& th) {
    if (c < th.cert_low) return CertaintyBand::Low;
    if (c >= th.cert_high) return CertaintyBand::High;
    return CertaintyBand::Medium;
}

ClassificationRecord classify_from_memberships(const Eigen::VectorXd& u,
                                               const ClassifyThresholds& th) {
    if (u.size() != kCefrLevels) {
        throw SchemaError("classification requires 6 memberships, got " +
                          std::to_string(u.size()));
    }
    ClassificationRecord rec;
    rec.memberships = u;
    const TopTwo t = top_two(u);
    rec.primary = cefr_from_ordinal(static_cast<int>(t.primary) + 1);
    rec.secondary = cefr_from_ordinal(static_cast<int>(t.secondary) + 1);
    rec.ctype = classify_type(u, th);
    rec.score = continuous_score(u);
    rec.certainty = certainty(u);
    rec.band = certainty_band(rec.certainty, th);
    if (rec.ctype == ClassificationType::Transition) {
        rec.label = std::string(to_string(rec.primary.code)) + "-" +
                    std::string(to_string(rec.secondary.code));
    } else {
        rec.label = std::string(to_string(rec.primary.code));
    }
    return rec;
}

ClassificationRecord classify(const OrderedFcmModel& model, const ProjectVector& point) {
    if (model.k() != kCefrLevels) {
        throw SchemaError("classification requires a k=6 model, got k=" +
                          std::to_string(model.k()));
    }
    return classify_from_memberships(model.memberships(point), model.thresholds);
}

double DistributionSummary::type_pct(ClassificationType t) const {
    if (n == 0) return 0;
    return 100.0 * static_cast<double>(type_counts[static_cast<std::size_t>(t)]) /
           static_cast<double>(n);
}

BatchResult classify_batch(const OrderedFcmModel& model, const Dataset& data) {
    if (model.k() != kCefrLevels) {
        throw SchemaError("classification requires a k=6 model, got k=" +
                          std::to_string(model.k()));
    }
    BatchResult out;
    out.records.reserve(data.size());
    const Eigen::MatrixXd U = model.memberships_batch(data);
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        out.records.push_back(
            classify_from_memberships(U.row(i).transpose(), model.thresholds));
    }

    auto& s = out.summary;
    s.n = out.records.size();
    for (const auto& rec : out.records) {
        s.type_counts[static_cast<std::size_t>(rec.ctype)]++;
        s.band_counts[static_cast<std::size_t>(rec.band)]++;
        s.label_counts[rec.label]++;
        const auto bin = static_cast<std::size_t>(
            std::clamp((rec.score - 1.0) / 0.1, 0.0,
                       static_cast<double>(kScoreHistogramBins - 1)));
        s.score_histogram[bin]++;
    }
    return out;
}

std::vector<SensitivityCell> threshold_sensitivity(
    const OrderedFcmModel& model, const Dataset& data,
    const std::vector<double>& tau_clear_grid,
    const std::vector<double>& tau_trans_grid) {
    if (data.empty()) throw InfeasibleError("threshold_sensitivity: empty dataset");

    // single membership pass, thresholds re-applied per cell
    const Eigen::MatrixXd U = model.memberships_batch(data);
    std::vector<std::pair<double, double>> top(static_cast<std::size_t>(U.rows()));
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        const TopTwo t = top_two(U.row(i).transpose());
        top[static_cast<std::size_t>(i)] = {U(i, t.primary), U(i, t.secondary)};
    }

    std::vector<SensitivityCell> cells;
    cells.reserve(tau_clear_grid.size() * tau_trans_grid.size());
    const double n = static_cast<double>(U.rows());
    for (double tc : tau_clear_grid) {
        for (double tt : tau_trans_grid) {
            SensitivityCell cell;
            cell.tau_clear = tc;
            cell.tau_trans = tt;
            std::size_t clear = 0, trans = 0;
            for (const auto& [u1, u2] : top) {
                if (u1 >= tc) {
                    ++clear;
                } else if (u1 - u2 < tt) {
                    ++trans;
                }
            }
            cell.clear_pct = 100.0 * static_cast<double>(clear) / n;
            cell.transition_pct = 100.0 * static_cast<double>(trans) / n;
            cell.predominant_pct = 100.0 - cell.clear_pct - cell.transition_pct;
            cells.push_back(cell);
        }
    }
    return cells;
}

} // namespace ctlevels
