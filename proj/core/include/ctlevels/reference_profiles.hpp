#pragma once

#include <Eigen/Core>

#include "ctlevels/types.hpp"

namespace ctlevels {

// Built-in six-level reference centroid set (one row per CEFR level,
// ascending, columns in canonical dimension order). Ships as the default
// generator for synthetic corpora and as the golden anchor for the
// ordering tests.
inline Eigen::MatrixXd cefr_reference_centroids() {
    Eigen::MatrixXd c(kCefrLevels, kDims);
    c << 0.12, 0.18, 0.09, 0.15, 0.52, 1.01, 0.24, 0.08, 0.31, // A1
         0.89, 1.02, 0.65, 0.88, 1.76, 1.45, 1.34, 0.43, 1.15, // A2
         1.58, 1.89, 1.35, 1.58, 2.45, 1.68, 2.18, 0.82, 1.92, // B1
         2.21, 2.64, 2.01, 2.18, 2.85, 1.84, 2.89, 1.21, 2.55, // B2
         2.78, 3.18, 2.62, 2.71, 3.15, 1.95, 3.45, 1.59, 3.04, // C1
         3.29, 3.61, 3.19, 3.19, 3.38, 2.03, 3.87, 1.96, 3.46; // C2
    return c;
}

} // namespace ctlevels
