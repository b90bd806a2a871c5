#include "ctlevels/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <Eigen/Eigenvalues>

#include "ctlevels/rng.hpp"

namespace ctlevels {

namespace {

double normal_two_sided_p(double z) {
    boost::math::normal dist;
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(z)));
    return std::min(p, 1.0);
}

struct Ranked {
    std::vector<double> ranks;           // average ranks, 1-based
    std::vector<std::size_t> tie_sizes;  // size of each tie group (>= 1)
    bool has_ties = false;
};

Ranked average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    Ranked out;
    out.ranks.resize(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) out.ranks[idx[t]] = avg;
        out.tie_sizes.push_back(j - i + 1);
        if (j > i) out.has_ties = true;
        i = j + 1;
    }
    return out;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::string_view to_string(StatMethod m) {
    switch (m) {
        case StatMethod::kruskal_wallis: return "kruskal_wallis";
        case StatMethod::mann_whitney: return "mann_whitney";
        case StatMethod::kendall_tau_b: return "kendall_tau_b";
        case StatMethod::spearman_rho: return "spearman_rho";
    }
    return "kruskal_wallis";
}

PartitionQuality partition_quality(const OrderedFcmModel& model, const Dataset& data,
                                   const SilhouetteOptions& opts) {
    if (data.size() < 2) throw InfeasibleError("partition_quality: need at least 2 rows");
    const Eigen::MatrixXd X = data.to_matrix();
    const Eigen::MatrixXd U = model.memberships_batch(X);

    PartitionQuality q;
    q.fpc = fuzzy_partition_coefficient(U);
    q.partition_entropy = partition_entropy(U);
    q.avg_certainty = average_certainty(U);
    q.silhouette = silhouette(X, argmax_labels(U), opts);
    return q;
}

StatTestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw SchemaError("kruskal_wallis: need at least 2 groups");
    for (const auto& g : groups) {
        if (g.empty()) throw SchemaError("kruskal_wallis: empty group");
    }

    std::vector<double> pooled;
    for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    const double n = static_cast<double>(pooled.size());
    const Ranked ranked = average_ranks(pooled);

    StatTestResult res;
    res.method = StatMethod::kruskal_wallis;

    double h = 0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double rank_sum = 0;
        for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranked.ranks[offset + i];
        h += rank_sum * rank_sum / static_cast<double>(g.size());
        offset += g.size();
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    double tie_term = 0;
    for (std::size_t t : ranked.tie_sizes) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double correction = 1.0 - tie_term / (n * n * n - n);
    if (correction <= 0) {
        // every value identical
        res.statistic = 0;
        res.p_value = 1;
        res.detail = "all values tied";
        return res;
    }
    h /= correction;
    if (std::abs(h) < 1e-12) h = 0; // rounding noise on identical rank sums

    const double df = static_cast<double>(groups.size()) - 1.0;
    boost::math::chi_squared chi(df);
    res.statistic = h;
    res.p_value = h <= 0 ? 1.0 : boost::math::cdf(boost::math::complement(chi, h));
    res.detail = "groups=" + std::to_string(groups.size()) +
                 " n=" + std::to_string(pooled.size()) +
                 (ranked.has_ties ? " tie-corrected" : " no ties");
    return res;
}

StatTestResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y,
                              MwMethod method) {
    if (x.empty() || y.empty()) throw SchemaError("mann_whitney_u: empty sample");
    const std::size_t nx = x.size();
    const std::size_t ny = y.size();
    const std::size_t n = nx + ny;

    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    const Ranked ranked = average_ranks(pooled);

    double rank_sum_x = 0;
    for (std::size_t i = 0; i < nx; ++i) rank_sum_x += ranked.ranks[i];
    const double u_x = rank_sum_x - static_cast<double>(nx) * (static_cast<double>(nx) + 1.0) / 2.0;
    const double nm = static_cast<double>(nx) * static_cast<double>(ny);

    StatTestResult res;
    res.method = StatMethod::mann_whitney;
    res.statistic = u_x;

    const bool want_exact =
        method == MwMethod::exact ||
        (method == MwMethod::automatic && !ranked.has_ties && n <= 12);
    if (want_exact) {
        if (ranked.has_ties) {
            throw SchemaError("mann_whitney_u: exact method requires tie-free data");
        }
        if (n > 20) throw SchemaError("mann_whitney_u: exact method limited to n<=20");
        // enumerate every assignment of ranks 1..n to x
        const auto u_max = static_cast<std::size_t>(nm);
        std::vector<double> counts(u_max + 1, 0.0);
        double total = 0;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            if (static_cast<std::size_t>(std::popcount(mask)) != nx) continue;
            std::size_t rsum = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (1u << i)) rsum += i + 1;
            }
            counts[rsum - nx * (nx + 1) / 2] += 1.0;
            total += 1.0;
        }
        const auto u_obs = static_cast<std::size_t>(std::llround(u_x));
        const std::size_t lo = std::min(u_obs, u_max - u_obs);
        const std::size_t hi = u_max - lo;
        double tail = 0;
        for (std::size_t u = 0; u <= lo; ++u) tail += counts[u];
        for (std::size_t u = hi; u <= u_max; ++u) tail += counts[u];
        res.p_value = std::min(tail / total, 1.0);
        res.detail = "exact n_x=" + std::to_string(nx) + " n_y=" + std::to_string(ny);
        return res;
    }

    // normal approximation, tie-corrected variance, continuity correction
    double tie_term = 0;
    for (std::size_t t : ranked.tie_sizes) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double nd = static_cast<double>(n);
    const double var =
        nm / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (var <= 0) {
        res.p_value = 1.0;
        res.detail = "zero variance (all values tied)";
        return res;
    }
    const double z = std::max(0.0, std::abs(u_x - nm / 2.0) - 0.5) / std::sqrt(var);
    res.p_value = normal_two_sided_p(z);
    res.detail = "normal approximation, continuity-corrected, n_x=" + std::to_string(nx) +
                 " n_y=" + std::to_string(ny) + (ranked.has_ties ? ", tie-corrected" : "");
    return res;
}

namespace {

struct KendallCounts {
    double concordant = 0;
    double discordant = 0;
    double ties_a = 0;  // pairs tied in a only... (pair counts t(t-1)/2 from marginals)
    double ties_b = 0;
};

// Pair classification via the joint contingency table when both variables
// take few distinct values, else a direct O(n^2) sweep.
KendallCounts kendall_counts(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    KendallCounts kc;

    std::vector<double> da(a), db(b);
    std::sort(da.begin(), da.end());
    da.erase(std::unique(da.begin(), da.end()), da.end());
    std::sort(db.begin(), db.end());
    db.erase(std::unique(db.begin(), db.end()), db.end());

    auto pair_count = [](double t) { return t * (t - 1.0) / 2.0; };

    if (da.size() * db.size() <= 10000) {
        const std::size_t ra = da.size();
        const std::size_t rb = db.size();
        std::vector<std::vector<double>> table(ra, std::vector<double>(rb, 0.0));
        std::vector<double> row_marg(ra, 0.0), col_marg(rb, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ia = static_cast<std::size_t>(
                std::lower_bound(da.begin(), da.end(), a[i]) - da.begin());
            const auto ib = static_cast<std::size_t>(
                std::lower_bound(db.begin(), db.end(), b[i]) - db.begin());
            table[ia][ib] += 1.0;
            row_marg[ia] += 1.0;
            col_marg[ib] += 1.0;
        }
        // suffix[i][j] = count of points with a > da[i], b > db[j] etc. via sweeps
        for (std::size_t i = 0; i < ra; ++i) {
            for (std::size_t j = 0; j < rb; ++j) {
                if (table[i][j] == 0) continue;
                double greater_both = 0, greater_a_less_b = 0;
                for (std::size_t i2 = i + 1; i2 < ra; ++i2) {
                    for (std::size_t j2 = j + 1; j2 < rb; ++j2) greater_both += table[i2][j2];
                    for (std::size_t j2 = 0; j2 < j; ++j2) greater_a_less_b += table[i2][j2];
                }
                kc.concordant += table[i][j] * greater_both;
                kc.discordant += table[i][j] * greater_a_less_b;
            }
        }
        for (double t : row_marg) kc.ties_a += pair_count(t);
        for (double t : col_marg) kc.ties_b += pair_count(t);
        return kc;
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double sa = a[i] - a[j];
            const double sb = b[i] - b[j];
            if (sa == 0 || sb == 0) continue;
            if ((sa > 0) == (sb > 0)) {
                kc.concordant += 1;
            } else {
                kc.discordant += 1;
            }
        }
    }
    // marginal tie-pair counts
    {
        std::map<double, double> ca, cb;
        for (double v : a) ca[v] += 1;
        for (double v : b) cb[v] += 1;
        for (const auto& [v, t] : ca) kc.ties_a += pair_count(t);
        for (const auto& [v, t] : cb) kc.ties_b += pair_count(t);
    }
    return kc;
}

double kendall_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double cd = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double sa = a[i] - a[j];
            const double sb = b[i] - b[j];
            if (sa == 0 || sb == 0) continue;
            cd += ((sa > 0) == (sb > 0)) ? 1.0 : -1.0;
        }
    }
    return cd;
}

double kendall_exact_p(const std::vector<double>& a, const std::vector<double>& b,
                       double observed_abs_diff) {
    std::vector<double> perm(b);
    std::sort(perm.begin(), perm.end());
    double total = 0, extreme = 0;
    do {
        const double diff = std::abs(kendall_diff(a, perm));
        total += 1;
        if (diff >= observed_abs_diff - 1e-12) extreme += 1;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return extreme / total;
}

} // namespace

RankCorrelations rank_correlations(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw SchemaError("rank_correlations: length mismatch");
    if (a.size() < 2) throw SchemaError("rank_correlations: need at least 2 observations");
    const std::size_t n = a.size();
    const double nd = static_cast<double>(n);

    RankCorrelations out;
    out.kendall.method = StatMethod::kendall_tau_b;
    out.spearman.method = StatMethod::spearman_rho;

    const bool a_const = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; });
    const bool b_const = std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; });
    if (a_const || b_const) {
        out.kendall.defined = false;
        out.spearman.defined = false;
        out.kendall.detail = out.spearman.detail =
            std::string("undefined: zero variance in ") + (a_const ? "first" : "second") +
            " input";
        return out;
    }

    // Kendall tau-b
    const KendallCounts kc = kendall_counts(a, b);
    const double n0 = nd * (nd - 1.0) / 2.0;
    const double denom = std::sqrt((n0 - kc.ties_a) * (n0 - kc.ties_b));
    const double diff = kc.concordant - kc.discordant;
    out.kendall.statistic = diff / denom;
    if (n <= 8) {
        out.kendall.p_value = kendall_exact_p(a, b, std::abs(diff));
        out.kendall.detail = "exact permutation enumeration";
    } else {
        double vt = 0, vu = 0, sum_t2 = 0, sum_u2 = 0, sum_t3 = 0, sum_u3 = 0;
        {
            std::map<double, double> ca, cb;
            for (double v : a) ca[v] += 1;
            for (double v : b) cb[v] += 1;
            for (const auto& [v, t] : ca) {
                vt += t * (t - 1) * (2 * t + 5);
                sum_t2 += t * (t - 1);
                sum_t3 += t * (t - 1) * (t - 2);
            }
            for (const auto& [v, t] : cb) {
                vu += t * (t - 1) * (2 * t + 5);
                sum_u2 += t * (t - 1);
                sum_u3 += t * (t - 1) * (t - 2);
            }
        }
        const double v0 = nd * (nd - 1.0) * (2.0 * nd + 5.0);
        double var = (v0 - vt - vu) / 18.0 +
                     sum_t2 * sum_u2 / (2.0 * nd * (nd - 1.0)) +
                     sum_t3 * sum_u3 / (9.0 * nd * (nd - 1.0) * (nd - 2.0));
        if (var <= 0) {
            out.kendall.p_value = 1.0;
            out.kendall.detail = "degenerate variance";
        } else {
            out.kendall.p_value = normal_two_sided_p(diff / std::sqrt(var));
            out.kendall.detail = "normal approximation, tie-corrected";
        }
    }

    // Spearman rho: Pearson correlation of average ranks
    const Ranked ra = average_ranks(a);
    const Ranked rb = average_ranks(b);
    const double mean_rank = (nd + 1.0) / 2.0;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xa = ra.ranks[i] - mean_rank;
        const double xb = rb.ranks[i] - mean_rank;
        sab += xa * xb;
        saa += xa * xa;
        sbb += xb * xb;
    }
    const double rho = sab / std::sqrt(saa * sbb);
    out.spearman.statistic = rho;
    if (n < 3 || std::abs(rho) >= 1.0) {
        out.spearman.p_value = std::abs(rho) >= 1.0 ? 0.0 : 1.0;
        out.spearman.detail = "degenerate p (|rho|=1 or n<3)";
    } else {
        const double t = rho * std::sqrt((nd - 2.0) / (1.0 - rho * rho));
        boost::math::students_t dist(nd - 2.0);
        out.spearman.p_value =
            std::min(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 1.0);
        out.spearman.detail = "t approximation, df=" + std::to_string(n - 2);
    }
    return out;
}

PcaResult pca_project(const Eigen::MatrixXd& X, int components) {
    if (X.rows() < 2) throw InfeasibleError("pca_project: need at least 2 rows");
    if (components < 1 || components > X.cols()) {
        throw SchemaError("pca_project: components must lie in [1, dims]");
    }

    PcaResult out;
    out.mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - out.mean.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(X.rows() - 1);
    const double total = cov.trace();
    if (total <= 1e-300) {
        out.defined = false;
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    const Eigen::VectorXd evals = solver.eigenvalues(); // ascending
    const Eigen::MatrixXd evecs = solver.eigenvectors();

    out.explained_variance_ratios.resize(components);
    out.components.resize(X.cols(), components);
    for (int c = 0; c < components; ++c) {
        const Eigen::Index src = X.cols() - 1 - c;
        out.explained_variance_ratios(c) = std::max(evals(src), 0.0) / total;
        Eigen::VectorXd v = evecs.col(src);
        Eigen::Index peak = 0;
        v.cwiseAbs().maxCoeff(&peak);
        if (v(peak) < 0) v = -v;
        out.components.col(c) = v;
    }
    out.coordinates = centered * out.components;
    return out;
}

PcaResult pca_project(const Dataset& data, int components) {
    return pca_project(data.to_matrix(), components);
}

namespace {

double hard_dispersion(const Eigen::MatrixXd& X, const std::vector<int>& labels) {
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    double w = 0;
    for (int j = 0; j < k; ++j) {
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(X.cols());
        double count = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == j) {
                mean += X.row(static_cast<Eigen::Index>(i));
                count += 1;
            }
        }
        if (count == 0) continue;
        mean /= count;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == j) {
                w += (X.row(static_cast<Eigen::Index>(i)) - mean).squaredNorm();
            }
        }
    }
    return w;
}

} // namespace

std::vector<GapPoint> gap_statistic(const Dataset& data, int k_min, int k_max, int B,
                                    std::uint64_t seed) {
    if (B < 5) throw SchemaError("gap_statistic: B must be >= 5");
    if (k_min < 1 || k_min > k_max) throw SchemaError("gap_statistic: invalid k range");
    if (static_cast<std::size_t>(k_max) >= data.size()) {
        throw InfeasibleError("gap_statistic: k_max must be < N");
    }

    const Eigen::MatrixXd X = data.to_matrix();
    Eigen::VectorXd lo(X.cols()), hi(X.cols());
    for (Eigen::Index d = 0; d < X.cols(); ++d) {
        lo(d) = X.col(d).minCoeff();
        hi(d) = X.col(d).maxCoeff();
    }

    auto argmax_fit = [&](const Eigen::MatrixXd& M, int k, std::uint64_t s) {
        FcmConfig cfg;
        cfg.k = k;
        cfg.seed = s;
        return argmax_labels(memberships_batch(fit(M, cfg), M));
    };

    std::vector<GapPoint> out;
    for (int k = k_min; k <= k_max; ++k) {
        GapPoint gp;
        gp.k = k;
        const auto labels = argmax_fit(X, k, substream_seed(seed, 7919u * static_cast<unsigned>(k)));
        gp.log_w = std::log(std::max(hard_dispersion(X, labels), 1e-300));

        std::vector<double> ref_logs;
        ref_logs.reserve(static_cast<std::size_t>(B));
        for (int b = 0; b < B; ++b) {
            double w_ref = 0;
            for (int attempt = 0; attempt < 5; ++attempt) {
                Rng rng(substream_seed(seed, 1000003ull * static_cast<unsigned>(k) +
                                                 static_cast<unsigned>(100 * b + attempt) + 1));
                Eigen::MatrixXd ref(X.rows(), X.cols());
                for (Eigen::Index i = 0; i < ref.rows(); ++i) {
                    for (Eigen::Index d = 0; d < ref.cols(); ++d) {
                        ref(i, d) = rng.uniform(lo(d), hi(d));
                    }
                }
                const auto ref_labels = argmax_fit(
                    ref, k, substream_seed(seed, 4000037ull * static_cast<unsigned>(k) +
                                                     static_cast<unsigned>(b) + 1));
                w_ref = hard_dispersion(ref, ref_labels);
                if (w_ref > 0) break;
            }
            ref_logs.push_back(std::log(std::max(w_ref, 1e-300)));
        }

        const double mean_ref =
            std::accumulate(ref_logs.begin(), ref_logs.end(), 0.0) /
            static_cast<double>(ref_logs.size());
        double var = 0;
        for (double v : ref_logs) var += (v - mean_ref) * (v - mean_ref);
        var /= static_cast<double>(ref_logs.size());
        gp.mean_log_w_ref = mean_ref;
        gp.gap = mean_ref - gp.log_w;
        gp.s_k = std::sqrt(var) * std::sqrt(1.0 + 1.0 / static_cast<double>(B));
        out.push_back(gp);
    }
    return out;
}

namespace {

MetricSummary summarize(const std::vector<double>& v) {
    MetricSummary s;
    const double n = static_cast<double>(v.size());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.variance = ss / (n - 1.0);
    }
    return s;
}

} // namespace

std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& data, int folds,
                                                       int strata_bins, std::uint64_t seed) {
    if (folds < 2) throw InfeasibleError("stratified_folds: folds must be >= 2");
    std::vector<std::vector<std::size_t>> fold_idx(static_cast<std::size_t>(folds));
    std::vector<std::vector<std::size_t>> strata(static_cast<std::size_t>(strata_bins));
    for (std::size_t i = 0; i < data.size(); ++i) {
        strata[static_cast<std::size_t>(stratum_of(data[i], strata_bins))].push_back(i);
    }
    for (std::size_t s = 0; s < strata.size(); ++s) {
        auto& members = strata[s];
        Rng rng(substream_seed(seed, 0xCF00 + s));
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i) {
            fold_idx[i % static_cast<std::size_t>(folds)].push_back(members[i]);
        }
    }
    for (auto& f : fold_idx) std::sort(f.begin(), f.end());
    return fold_idx;
}

CrossValidationResult cross_validate(const Dataset& data, int folds, const FcmConfig& config,
                                     int strata_bins, const SilhouetteOptions& opts) {
    if (folds < 2) throw InfeasibleError("cross_validate: folds must be >= 2");
    if (data.size() < static_cast<std::size_t>(folds) * static_cast<std::size_t>(config.k)) {
        throw InfeasibleError("cross_validate: need at least folds*k rows");
    }

    auto fold_idx = stratified_folds(data, folds, strata_bins, config.seed);

    CrossValidationResult out;
    std::vector<double> sils, fpcs, pes, certs;
    bool sil_ok = true;
    for (int f = 0; f < folds; ++f) {
        auto& test_rows = fold_idx[static_cast<std::size_t>(f)];
        if (test_rows.size() < 2) {
            throw InfeasibleError("cross_validate: fold " + std::to_string(f + 1) +
                                  " too small");
        }
        std::vector<std::size_t> train_rows;
        for (int g = 0; g < folds; ++g) {
            if (g == f) continue;
            const auto& src = fold_idx[static_cast<std::size_t>(g)];
            train_rows.insert(train_rows.end(), src.begin(), src.end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        std::sort(test_rows.begin(), test_rows.end());
        if (train_rows.size() < static_cast<std::size_t>(config.k)) {
            throw InfeasibleError("cross_validate: fold " + std::to_string(f + 1) +
                                  " leaves too few training rows");
        }

        const Dataset train = data.select(train_rows);
        const Dataset test = data.select(test_rows);
        const OrderedFcmModel model = order_clusters(fit(train, config));
        const PartitionQuality q = partition_quality(model, test, opts);
        out.folds.push_back(q);
        if (q.silhouette) {
            sils.push_back(*q.silhouette);
        } else {
            sil_ok = false;
        }
        fpcs.push_back(q.fpc);
        pes.push_back(q.partition_entropy);
        certs.push_back(q.avg_certainty);
    }

    if (sil_ok) out.silhouette = summarize(sils);
    out.fpc = summarize(fpcs);
    out.partition_entropy = summarize(pes);
    out.avg_certainty = summarize(certs);
    return out;
}

namespace {

MetricDelta make_delta(const std::string& name, std::optional<double> train,
                       std::optional<double> test) {
    MetricDelta d;
    d.name = name;
    d.train = train;
    d.test = test;
    if (train && test) {
        d.absolute = *test - *train;
        if (*train != 0) d.percent = 100.0 * *d.absolute / *train;
    }
    return d;
}

} // namespace

TrainTestReport train_test_report(const OrderedFcmModel& model, const Dataset& train,
                                  const Dataset& test, const SilhouetteOptions& opts) {
    TrainTestReport rep;
    rep.train = partition_quality(model, train, opts);
    rep.test = partition_quality(model, test, opts);
    rep.deltas.push_back(make_delta("silhouette", rep.train.silhouette, rep.test.silhouette));
    rep.deltas.push_back(make_delta("fpc", rep.train.fpc, rep.test.fpc));
    rep.deltas.push_back(
        make_delta("partition_entropy", rep.train.partition_entropy, rep.test.partition_entropy));
    rep.deltas.push_back(
        make_delta("avg_certainty", rep.train.avg_certainty, rep.test.avg_certainty));
    return rep;
}

ValidationReport ordinal_progression_report(const OrderedFcmModel& model, const Dataset& data,
                                            const ReportOptions& opts) {
    if (data.empty()) throw InfeasibleError("ordinal_progression_report: empty dataset");
    const int k = model.k();

    ValidationReport rep;
    rep.k = k;
    rep.quality = partition_quality(model, data, opts.silhouette);
    if (data.size() > opts.silhouette.subsample_cap) {
        rep.notes.push_back("silhouette computed on a seeded subsample of " +
                            std::to_string(opts.silhouette.subsample_cap) + " rows");
    }
    rep.notes.push_back("partition entropy uses natural log");

    const Eigen::MatrixXd U = model.memberships_batch(data);
    const std::vector<int> hard = argmax_labels(U); // level positions, 0-based

    std::vector<std::vector<double>> totals_by_level(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < data.size(); ++i) {
        totals_by_level[static_cast<std::size_t>(hard[i])].push_back(
            static_cast<double>(data[i].total()));
    }

    std::vector<std::vector<double>> nonempty;
    for (const auto& g : totals_by_level) {
        if (!g.empty()) nonempty.push_back(g);
    }
    if (nonempty.size() >= 2) {
        rep.kw = kruskal_wallis(nonempty);
        if (nonempty.size() < static_cast<std::size_t>(k)) {
            rep.notes.push_back("kruskal-wallis computed over " +
                                std::to_string(nonempty.size()) + " non-empty levels");
        }
    } else {
        rep.kw.method = StatMethod::kruskal_wallis;
        rep.kw.defined = false;
        rep.kw.detail = "fewer than 2 non-empty levels";
    }

    for (int lo = 1; lo <= k; ++lo) {
        for (int hi = lo + 1; hi <= k; ++hi) {
            if (!opts.all_pairs && hi != lo + 1) continue;
            PairwiseTest pt;
            pt.lower_ordinal = lo;
            pt.upper_ordinal = hi;
            const auto& glo = totals_by_level[static_cast<std::size_t>(lo - 1)];
            const auto& ghi = totals_by_level[static_cast<std::size_t>(hi - 1)];
            if (glo.empty() || ghi.empty()) {
                pt.skipped = true;
                pt.result.method = StatMethod::mann_whitney;
                pt.result.defined = false;
                pt.result.detail = "empty level group";
            } else {
                pt.result = mann_whitney_u(glo, ghi);
            }
            rep.pairwise_mw.push_back(pt);
        }
    }

    // global: CEFR ordinal vs per-level median total score
    {
        std::vector<double> ordinals, medians;
        for (int level = 1; level <= k; ++level) {
            const auto& g = totals_by_level[static_cast<std::size_t>(level - 1)];
            if (g.empty()) continue;
            ordinals.push_back(level);
            medians.push_back(median_of(g));
        }
        if (ordinals.size() >= 2) {
            const RankCorrelations rc = rank_correlations(ordinals, medians);
            rep.global_tau = rc.kendall;
            rep.global_rho = rc.spearman;
        } else {
            rep.global_tau.method = StatMethod::kendall_tau_b;
            rep.global_rho.method = StatMethod::spearman_rho;
            rep.global_tau.defined = rep.global_rho.defined = false;
        }
    }

    // per-dimension: each observation's hard ordinal vs its dimension score
    {
        std::vector<double> ordinals(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            ordinals[i] = static_cast<double>(hard[i] + 1);
        }
        for (int d = 0; d < kDims; ++d) {
            std::vector<double> dim(data.size());
            for (std::size_t i = 0; i < data.size(); ++i) {
                dim[i] = static_cast<double>(data[i].scores[d]);
            }
            DimensionCorrelation dc;
            dc.dimension = std::string(kDimensionNames[d]);
            const RankCorrelations rc = rank_correlations(ordinals, dim);
            dc.kendall = rc.kendall;
            dc.spearman = rc.spearman;
            rep.per_dimension.push_back(dc);
        }
    }

    rep.pca = data.size() >= 2 ? pca_project(data, opts.pca_components) : PcaResult{false};
    return rep;
}

} // namespace ctlevels
