#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ctlevels/ordering.hpp"

namespace ctlevels {

enum class ClassificationType { Clear, Transition, Predominant };
enum class CertaintyBand { Low, Medium, High };

std::string_view to_string(ClassificationType t);
std::string_view to_string(CertaintyBand b);

struct ClassificationRecord {
    Eigen::VectorXd memberships; // level order
    CefrLevel primary;
    CefrLevel secondary;
    ClassificationType ctype = ClassificationType::Clear;
    std::string label; // "B2", or "B2-B1" for transitions
    double score = 0;     // membership-weighted mean of ordinals, [1,6]
    double certainty = 0; // [0,1]
    CertaintyBand band = CertaintyBand::Low;
};

// Clear tested first: max(u) >= tau_clear. Then Transition when the top-two
// gap is strictly below tau_trans, else Predominant.
ClassificationType classify_type(const Eigen::VectorXd& u, const ClassifyThresholds& th);

// sum_j u_j * j with ordinals 1..k; bounded by [1, k].
double continuous_score(const Eigen::VectorXd& u);

// 1 - H2(u)/log2(k), clamped to [0,1].
double certainty(const Eigen::VectorXd& u);

// Low iff c < cert_low; High iff c >= cert_high; else Medium.
CertaintyBand certainty_band(double c, const ClassifyThresholds& th);

// Record assembly from a level-ordered membership vector (k == 6).
ClassificationRecord classify_from_memberships(const Eigen::VectorXd& u,
                                               const ClassifyThresholds& th);

// Full record for one point; requires k == 6.
ClassificationRecord classify(const OrderedFcmModel& model, const ProjectVector& point);

inline constexpr std::size_t kScoreHistogramBins = 50; // 0.1-wide over [1,6]

struct DistributionSummary {
    std::size_t n = 0;
    std::array<std::size_t, 3> type_counts{};               // Clear/Transition/Predominant
    std::array<std::size_t, 3> band_counts{};               // Low/Medium/High
    std::map<std::string, std::size_t> label_counts;        // incl. transition labels
    std::array<std::size_t, kScoreHistogramBins> score_histogram{};

    double type_pct(ClassificationType t) const;
};

struct BatchResult {
    std::vector<ClassificationRecord> records;
    DistributionSummary summary;
};

BatchResult classify_batch(const OrderedFcmModel& model, const Dataset& data);

struct SensitivityCell {
    double tau_clear = 0;
    double tau_trans = 0;
    double clear_pct = 0;
    double transition_pct = 0;
    double predominant_pct = 0;
};

// Memberships are computed once and the threshold rules re-applied per cell.
std::vector<SensitivityCell> threshold_sensitivity(
    const OrderedFcmModel& model, const Dataset& data,
    const std::vector<double>& tau_clear_grid,
    const std::vector<double>& tau_trans_grid);

} // namespace ctlevels
