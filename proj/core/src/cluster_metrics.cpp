#include "ctlevels/cluster_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ctlevels/rng.hpp"

namespace ctlevels {

double fuzzy_partition_coefficient(const Eigen::MatrixXd& U) {
    return U.array().square().sum() / static_cast<double>(U.rows());
}

double partition_entropy(const Eigen::MatrixXd& U) {
    double h = 0;
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        for (Eigen::Index j = 0; j < U.cols(); ++j) {
            const double u = U(i, j);
            if (u > 0) h -= u * std::log(u);
        }
    }
    return h / static_cast<double>(U.rows());
}

double certainty_from_memberships(const Eigen::VectorXd& u) {
    double h = 0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        if (u(j) > 0) h -= u(j) * std::log2(u(j));
    }
    const double hmax = std::log2(static_cast<double>(u.size()));
    if (hmax <= 0) return 1.0;
    return std::clamp(1.0 - h / hmax, 0.0, 1.0);
}

double average_certainty(const Eigen::MatrixXd& U) {
    double sum = 0;
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        sum += certainty_from_memberships(U.row(i).transpose());
    }
    return sum / static_cast<double>(U.rows());
}

std::vector<int> argmax_labels(const Eigen::MatrixXd& U) {
    std::vector<int> labels(static_cast<std::size_t>(U.rows()));
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        Eigen::Index best = 0;
        U.row(i).maxCoeff(&best);
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return labels;
}

std::optional<double> silhouette(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                 const SilhouetteOptions& opts) {
    // keep only labeled rows
    std::vector<std::size_t> keep;
    keep.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= 0) keep.push_back(i);
    }
    if (keep.size() > opts.subsample_cap) {
        Rng rng(substream_seed(opts.seed, 0x51));
        auto chosen = rng.sample_without_replacement(keep.size(), opts.subsample_cap);
        std::sort(chosen.begin(), chosen.end());
        std::vector<std::size_t> sub;
        sub.reserve(chosen.size());
        for (auto c : chosen) sub.push_back(keep[c]);
        keep = std::move(sub);
    }

    const std::size_t n = keep.size();
    if (n < 2) return std::nullopt;

    // dense cluster ids over the subsample
    std::map<int, int> dense;
    for (auto i : keep) dense.emplace(labels[i], 0);
    if (dense.size() < 2) return std::nullopt;
    int next = 0;
    for (auto& [lab, id] : dense) id = next++;
    const int kc = next;

    std::vector<int> lab(n);
    std::vector<double> counts(static_cast<std::size_t>(kc), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        lab[i] = dense[labels[keep[i]]];
        counts[static_cast<std::size_t>(lab[i])] += 1.0;
    }

    // per-row sum of distances to each cluster
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), kc);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = X.row(static_cast<Eigen::Index>(keep[i]));
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = (xi - X.row(static_cast<Eigen::Index>(keep[j]))).norm();
            sums(static_cast<Eigen::Index>(i), lab[j]) += d;
            sums(static_cast<Eigen::Index>(j), lab[i]) += d;
        }
    }

    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int li = lab[i];
        if (counts[static_cast<std::size_t>(li)] <= 1.0) continue; // singleton scores 0
        const double a = sums(static_cast<Eigen::Index>(i), li) /
                         (counts[static_cast<std::size_t>(li)] - 1.0);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < kc; ++c) {
            if (c == li || counts[static_cast<std::size_t>(c)] == 0.0) continue;
            b = std::min(b, sums(static_cast<Eigen::Index>(i), c) /
                                counts[static_cast<std::size_t>(c)]);
        }
        const double denom = std::max(a, b);
        if (denom > 0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

} // namespace ctlevels
