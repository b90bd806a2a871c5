#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ctlevels/baselines.hpp"
#include "ctlevels/classify.hpp"
#include "ctlevels/fcm.hpp"
#include "ctlevels/ordering.hpp"
#include "ctlevels/stats.hpp"

namespace ctlevels {

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);
double parse_double(const std::string& s);

// Ordered-model document: versioned plain text holding config, centroids at
// full precision, totals, the level permutation and thresholds. Re-saving a
// loaded model is byte-identical.
std::string ordered_model_to_string(const OrderedFcmModel& model);
OrderedFcmModel ordered_model_from_string(const std::string& text);
void save_ordered_model(const OrderedFcmModel& model, const std::filesystem::path& path);
OrderedFcmModel load_ordered_model(const std::filesystem::path& path);

// Classification export: one CSV row per record
// (id,label,ctype,primary,secondary,score,certainty,band,u1..u6).
void write_classification_csv(const std::vector<ClassificationRecord>& records,
                              const std::vector<std::string>& ids,
                              const std::filesystem::path& path);

// Key-value summary plus a plot-ready histogram table.
void write_distribution_summary(const DistributionSummary& summary,
                                const std::filesystem::path& path);
void write_score_histogram_csv(const DistributionSummary& summary,
                               const std::filesystem::path& path);

void write_validation_report(const ValidationReport& report,
                             const std::filesystem::path& path);
void write_dimension_correlations_csv(const ValidationReport& report,
                                      const std::filesystem::path& path);
void write_pca_coordinates_csv(const PcaResult& pca, std::size_t cap,
                               const std::filesystem::path& path);
void write_gap_csv(const std::vector<GapPoint>& points,
                   const std::filesystem::path& path);
void write_grid_csv(const GridSearchResult& grid, int k,
                    const std::filesystem::path& path);
void write_cv_csv(const CrossValidationResult& cv, const std::filesystem::path& path);
void write_train_test_csv(const TrainTestReport& report,
                          const std::filesystem::path& path);
void write_baseline_csv(const BaselineReport& report,
                        const std::filesystem::path& path);
void write_sensitivity_csv(const std::vector<SensitivityCell>& cells,
                           const std::filesystem::path& path);

// Run manifest: versioned key-value text written beside every command's
// outputs (command, resolved config, paths, seed, tool version, wall time).
void write_manifest(const std::filesystem::path& path, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& entries,
                    double wall_seconds);

// p-values below 1e-300 are reported as "<1e-300".
std::string format_p_value(double p);

} // namespace ctlevels
