#include "ctlevels/types.hpp"

#include <algorithm>
#include <unordered_set>

namespace ctlevels {

void validate_scores(const ProjectVector& row, const std::string& context) {
    for (int d = 0; d < kDims; ++d) {
        const int s = row.scores[d];
        if (s < kScoreMin || s > kScoreMax) {
            throw SchemaError(context + ", column '" + std::string(kDimensionNames[d]) +
                              "': value " + std::to_string(s) + " out of range [0,4]");
        }
    }
}

Dataset::Dataset(std::vector<ProjectVector> rows, std::vector<std::string> ids)
    : rows_(std::move(rows)), ids_(std::move(ids)) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        validate_scores(rows_[i], "row " + std::to_string(i + 1));
    }
    if (!ids_.empty()) {
        if (ids_.size() != rows_.size()) {
            throw SchemaError("row_ids count (" + std::to_string(ids_.size()) +
                              ") does not match row count (" + std::to_string(rows_.size()) + ")");
        }
        std::unordered_set<std::string> seen;
        for (const auto& id : ids_) {
            if (!seen.insert(id).second) {
                throw SchemaError("duplicate row id '" + id + "'");
            }
        }
    }
}

Eigen::MatrixXd Dataset::to_matrix() const {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows_.size()), kDims);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        for (int d = 0; d < kDims; ++d) {
            X(static_cast<Eigen::Index>(i), d) = static_cast<double>(rows_[i].scores[d]);
        }
    }
    return X;
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const {
    std::vector<ProjectVector> rows;
    rows.reserve(indices.size());
    std::vector<std::string> ids;
    if (has_ids()) ids.reserve(indices.size());
    for (std::size_t i : indices) {
        rows.push_back(rows_[i]);
        if (has_ids()) ids.push_back(ids_[i]);
    }
    return Dataset(std::move(rows), std::move(ids));
}

std::string_view to_string(CefrCode code) {
    switch (code) {
        case CefrCode::A1: return "A1";
        case CefrCode::A2: return "A2";
        case CefrCode::B1: return "B1";
        case CefrCode::B2: return "B2";
        case CefrCode::C1: return "C1";
        case CefrCode::C2: return "C2";
    }
    return "A1";
}

CefrLevel cefr_from_ordinal(int ordinal) {
    if (ordinal < 1 || ordinal > kCefrLevels) {
        throw SchemaError("CEFR ordinal " + std::to_string(ordinal) + " outside 1..6");
    }
    return CefrLevel{static_cast<CefrCode>(ordinal - 1), ordinal};
}

CefrLevel cefr_from_code(std::string_view name) {
    for (int o = 1; o <= kCefrLevels; ++o) {
        if (to_string(static_cast<CefrCode>(o - 1)) == name) return cefr_from_ordinal(o);
    }
    throw SchemaError("unknown CEFR code '" + std::string(name) + "'");
}

std::string level_name(int ordinal, int k) {
    if (k == kCefrLevels) return std::string(to_string(cefr_from_ordinal(ordinal).code));
    return "L" + std::to_string(ordinal);
}

} // namespace ctlevels
