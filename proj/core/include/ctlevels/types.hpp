#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ctlevels/errors.hpp"

namespace ctlevels {

inline constexpr int kDims = 9;
inline constexpr int kScoreMin = 0;
inline constexpr int kScoreMax = 4;
inline constexpr int kCefrLevels = 6;

// Canonical dimension order. CSV columns may appear in any order but are
// normalized to this one on load.
inline constexpr std::array<std::string_view, kDims> kDimensionNames = {
    "abstraction",        "parallelization",     "logic",
    "synchronization",    "flow_control",        "user_interactivity",
    "data_representation", "math_operators",     "motion_operators",
};

// One project's nine ordinal scores, each in {0..4}.
struct ProjectVector {
    std::array<int, kDims> scores{};

    int total() const {
        int t = 0;
        for (int s : scores) t += s;
        return t;
    }

    Eigen::VectorXd to_real() const {
        Eigen::VectorXd v(kDims);
        for (int d = 0; d < kDims; ++d) v(d) = static_cast<double>(scores[d]);
        return v;
    }

    bool operator==(const ProjectVector&) const = default;
};

// Throws SchemaError if any score is outside {0..4}. `context` is prepended
// to the message (e.g. "row 12").
void validate_scores(const ProjectVector& row, const std::string& context);

// Immutable collection of score rows with optional unique row ids.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<ProjectVector> rows, std::vector<std::string> ids = {});

    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    bool has_ids() const { return !ids_.empty(); }

    const std::vector<ProjectVector>& rows() const { return rows_; }
    const std::vector<std::string>& row_ids() const { return ids_; }
    const ProjectVector& operator[](std::size_t i) const { return rows_[i]; }

    // N x 9 real-valued view used by the numeric layer.
    Eigen::MatrixXd to_matrix() const;

    // New dataset holding the given rows (ids carried along when present).
    Dataset select(const std::vector<std::size_t>& indices) const;

private:
    std::vector<ProjectVector> rows_;
    std::vector<std::string> ids_;
};

enum class CefrCode { A1, A2, B1, B2, C1, C2 };

struct CefrLevel {
    CefrCode code = CefrCode::A1;
    int ordinal = 1; // 1..6, A1..C2

    bool operator==(const CefrLevel&) const = default;
};

std::string_view to_string(CefrCode code);
CefrLevel cefr_from_ordinal(int ordinal);
CefrLevel cefr_from_code(std::string_view name);

// "A1".."C2" when k == 6, otherwise "L1".."Lk".
std::string level_name(int ordinal, int k);

} // namespace ctlevels
