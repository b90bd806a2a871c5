#include "ctlevels/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

#include "ctlevels/fcm.hpp"
#include "ctlevels/rng.hpp"

namespace ctlevels {

namespace {

Eigen::VectorXd min_squared_distances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& V) {
    Eigen::VectorXd d2 =
        (X.rowwise() - V.row(0)).rowwise().squaredNorm();
    for (Eigen::Index j = 1; j < V.rows(); ++j) {
        d2 = d2.cwiseMin((X.rowwise() - V.row(j)).rowwise().squaredNorm());
    }
    return d2;
}

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& X, int k, Rng& rng) {
    const auto n = X.rows();
    Eigen::MatrixXd V(k, X.cols());
    V.row(0) = X.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    Eigen::VectorXd d2 = (X.rowwise() - V.row(0)).rowwise().squaredNorm();
    for (int j = 1; j < k; ++j) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0) {
            double target = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= d2(i);
                if (target <= 0) {
                    pick = i;
                    break;
                }
                pick = i;
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        V.row(j) = X.row(pick);
        d2 = d2.cwiseMin((X.rowwise() - V.row(j)).rowwise().squaredNorm());
    }
    return V;
}

struct Assignment {
    std::vector<int> labels;
    double inertia = 0;
};

Assignment assign_full(const Eigen::MatrixXd& X, const Eigen::MatrixXd& V) {
    Assignment a;
    a.labels.resize(static_cast<std::size_t>(X.rows()));
    Eigen::MatrixXd d2(X.rows(), V.rows());
    for (Eigen::Index j = 0; j < V.rows(); ++j) {
        d2.col(j) = (X.rowwise() - V.row(j)).rowwise().squaredNorm();
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Eigen::Index best = 0;
        a.inertia += d2.row(i).minCoeff(&best);
        a.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return a;
}

} // namespace

void KMeansConfig::validate() const {
    if (k < 1) throw SchemaError("k must be >= 1");
    if (batch_size < k) throw SchemaError("batch_size must be >= k");
    if (max_iter < 1) throw SchemaError("max_iter must be >= 1");
}

KMeansModel minibatch_kmeans(const Eigen::MatrixXd& X, const KMeansConfig& config) {
    config.validate();
    const auto n = X.rows();
    if (n < config.k) {
        throw InfeasibleError("cannot fit " + std::to_string(config.k) + " clusters to " +
                              std::to_string(n) + " rows");
    }

    Rng rng(substream_seed(config.seed, 0x4B));
    Eigen::MatrixXd V = kmeanspp_init(X, config.k, rng);
    std::vector<double> counts(static_cast<std::size_t>(config.k), 0.0);

    KMeansModel model;
    model.config = config;

    const auto batch = static_cast<std::size_t>(
        std::min<Eigen::Index>(config.batch_size, n));
    Eigen::MatrixXd snapshot = V;
    double prev_eval = assign_full(X, V).inertia; // initial assignment
    model.eval_history.push_back(prev_eval);

    int it = 0;
    for (it = 1; it <= config.max_iter; ++it) {
        for (std::size_t b = 0; b < batch; ++b) {
            const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
            Eigen::Index best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < V.rows(); ++j) {
                const double d2 = (X.row(i) - V.row(j)).squaredNorm();
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = j;
                }
            }
            auto& c = counts[static_cast<std::size_t>(best)];
            c += 1.0;
            V.row(best) += (X.row(i) - V.row(best)) / c;
        }

        if (it % 10 == 0 || it == config.max_iter) {
            Assignment a = assign_full(X, V);
            // reseed empty clusters from the farthest point before judging
            bool reseeded = false;
            for (int j = 0; j < config.k; ++j) {
                if (std::count(a.labels.begin(), a.labels.end(), j) == 0) {
                    Eigen::Index far = 0;
                    min_squared_distances(X, V).maxCoeff(&far);
                    V.row(j) = X.row(far);
                    counts[static_cast<std::size_t>(j)] = 1.0;
                    reseeded = true;
                }
            }
            if (reseeded) a = assign_full(X, V);

            if (a.inertia > prev_eval - 1e-6) {
                // plateau: keep the better snapshot and stop
                if (a.inertia > prev_eval) V = snapshot;
                break;
            }
            model.eval_history.push_back(a.inertia);
            prev_eval = a.inertia;
            snapshot = V;
        }
    }

    model.iterations_used = std::min(it, config.max_iter);
    const Assignment final_assign = assign_full(X, V);
    model.centroids = std::move(V);
    model.labels = final_assign.labels;
    model.inertia = final_assign.inertia;
    return model;
}

KMeansModel minibatch_kmeans(const Dataset& data, const KMeansConfig& config) {
    if (data.empty()) throw InfeasibleError("cannot fit on an empty dataset");
    return minibatch_kmeans(data.to_matrix(), config);
}

DbscanResult dbscan(const Eigen::MatrixXd& X, double eps, int min_pts) {
    if (!(eps > 0)) throw SchemaError("dbscan: eps must be > 0");
    if (min_pts < 1) throw SchemaError("dbscan: min_pts must be >= 1");

    const auto n = static_cast<std::size_t>(X.rows());
    const double eps2 = eps * eps;
    auto region = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j) {
            if ((X.row(static_cast<Eigen::Index>(i)) - X.row(static_cast<Eigen::Index>(j)))
                    .squaredNorm() <= eps2) {
                out.push_back(j);
            }
        }
        return out;
    };

    constexpr int kUnvisited = -2;
    DbscanResult res;
    res.eps = eps;
    res.min_pts = min_pts;
    res.labels.assign(n, kUnvisited);

    int cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (res.labels[i] != kUnvisited) continue;
        auto neighbors = region(i);
        if (neighbors.size() < static_cast<std::size_t>(min_pts)) {
            res.labels[i] = -1;
            continue;
        }
        res.labels[i] = cluster;
        std::deque<std::size_t> queue(neighbors.begin(), neighbors.end());
        while (!queue.empty()) {
            const std::size_t q = queue.front();
            queue.pop_front();
            if (res.labels[q] == -1) res.labels[q] = cluster; // border point
            if (res.labels[q] != kUnvisited) continue;
            res.labels[q] = cluster;
            auto qn = region(q);
            if (qn.size() >= static_cast<std::size_t>(min_pts)) {
                queue.insert(queue.end(), qn.begin(), qn.end());
            }
        }
        ++cluster;
    }

    res.n_clusters = cluster;
    res.noise_fraction =
        static_cast<double>(std::count(res.labels.begin(), res.labels.end(), -1)) /
        static_cast<double>(n);
    return res;
}

DbscanResult dbscan(const Dataset& data, double eps, int min_pts) {
    if (data.empty()) throw InfeasibleError("dbscan: empty dataset");
    return dbscan(data.to_matrix(), eps, min_pts);
}

double median_nn_distance(const Eigen::MatrixXd& X) {
    const auto n = X.rows();
    if (n < 2) throw InfeasibleError("median_nn_distance: need at least 2 rows");
    std::vector<double> nn(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (X.row(i) - X.row(j)).squaredNorm();
            nn[static_cast<std::size_t>(i)] = std::min(nn[static_cast<std::size_t>(i)], d2);
            nn[static_cast<std::size_t>(j)] = std::min(nn[static_cast<std::size_t>(j)], d2);
        }
    }
    std::sort(nn.begin(), nn.end());
    const std::size_t mid = nn.size() / 2;
    const double med2 =
        nn.size() % 2 == 1 ? nn[mid] : 0.5 * (nn[mid - 1] + nn[mid]);
    return std::sqrt(med2);
}

ApnResult apn_stability(const Eigen::MatrixXd& X, const Clusterer& clusterer,
                        std::uint64_t seed, std::size_t max_pairs) {
    const auto full = clusterer.run(X, seed);
    if (full.size() != static_cast<std::size_t>(X.rows())) {
        throw SchemaError("apn_stability: clusterer returned wrong label count");
    }

    // co-clustered pairs from the full fit (noise labels never co-cluster)
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < full.size(); ++i) {
        if (full[i] >= 0) groups[full[i]].push_back(i);
    }
    double total_pairs = 0;
    for (const auto& [lab, members] : groups) {
        const double m = static_cast<double>(members.size());
        total_pairs += m * (m - 1.0) / 2.0;
    }

    ApnResult res;
    if (total_pairs < 1) {
        res.per_column.assign(static_cast<std::size_t>(X.cols()), 0.0);
        return res; // nothing co-clustered; stability is vacuous
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (total_pairs <= static_cast<double>(max_pairs)) {
        for (const auto& [lab, members] : groups) {
            for (std::size_t a = 0; a < members.size(); ++a) {
                for (std::size_t b = a + 1; b < members.size(); ++b) {
                    pairs.emplace_back(members[a], members[b]);
                }
            }
        }
    } else {
        // seeded pair sampling: cluster by pair weight, then a uniform pair
        res.pairs_subsampled = true;
        Rng rng(substream_seed(seed, 0xA9));
        std::vector<const std::vector<std::size_t>*> gs;
        std::vector<double> cum;
        double acc = 0;
        for (const auto& [lab, members] : groups) {
            const double m = static_cast<double>(members.size());
            acc += m * (m - 1.0) / 2.0;
            gs.push_back(&members);
            cum.push_back(acc);
        }
        pairs.reserve(max_pairs);
        for (std::size_t t = 0; t < max_pairs; ++t) {
            const double target = rng.uniform() * acc;
            const auto gi = static_cast<std::size_t>(
                std::lower_bound(cum.begin(), cum.end(), target) - cum.begin());
            const auto& members = *gs[std::min(gi, gs.size() - 1)];
            const std::size_t a = rng.below(members.size());
            std::size_t b = rng.below(members.size() - 1);
            if (b >= a) ++b;
            pairs.emplace_back(members[a], members[b]);
        }
    }
    res.pairs_used = pairs.size();

    double col_sum = 0;
    int cols_used = 0;
    for (Eigen::Index drop = 0; drop < X.cols(); ++drop) {
        Eigen::MatrixXd reduced(X.rows(), X.cols() - 1);
        Eigen::Index c = 0;
        for (Eigen::Index d = 0; d < X.cols(); ++d) {
            if (d == drop) continue;
            reduced.col(c++) = X.col(d);
        }
        try {
            const auto labels = clusterer.run(reduced, seed);
            double broken = 0;
            for (const auto& [a, b] : pairs) {
                if (labels[a] < 0 || labels[a] != labels[b]) broken += 1;
            }
            const double prop = broken / static_cast<double>(pairs.size());
            res.per_column.push_back(prop);
            col_sum += prop;
            ++cols_used;
        } catch (const std::exception&) {
            res.per_column.push_back(std::numeric_limits<double>::quiet_NaN());
            res.skipped_columns.push_back(static_cast<int>(drop));
        }
    }
    res.apn = cols_used > 0 ? col_sum / cols_used : 0.0;
    return res;
}

BaselineReport baseline_report(const Dataset& data, std::uint64_t seed,
                               const BaselineOptions& opts) {
    if (data.empty()) throw InfeasibleError("baseline_report: empty dataset");
    const Eigen::MatrixXd X = data.to_matrix();

    BaselineReport report;
    SilhouetteOptions sil_opts = opts.silhouette;
    sil_opts.seed = seed;

    Clusterer fcm_clusterer{
        "fcm_argmax", [](const Eigen::MatrixXd& M, std::uint64_t s) {
            FcmConfig cfg;
            cfg.seed = s;
            return argmax_labels(memberships_batch(fit(M, cfg), M));
        }};
    KMeansConfig km_cfg = opts.kmeans;
    km_cfg.seed = seed;
    Clusterer km_clusterer{
        "minibatch_kmeans", [km_cfg](const Eigen::MatrixXd& M, std::uint64_t s) {
            KMeansConfig c = km_cfg;
            c.seed = s;
            return minibatch_kmeans(M, c).labels;
        }};

    const bool eps_auto = !opts.dbscan_eps.has_value();
    const int min_pts_full =
        opts.dbscan_min_pts.value_or(2 * static_cast<int>(X.cols()));
    Clusterer db_clusterer{
        "dbscan", [&opts, eps_auto](const Eigen::MatrixXd& M, std::uint64_t) {
            const double eps =
                eps_auto ? median_nn_distance(M) : *opts.dbscan_eps;
            const int mp = opts.dbscan_min_pts.value_or(2 * static_cast<int>(M.cols()));
            return dbscan(M, eps, mp).labels;
        }};

    // FCM argmax
    {
        BaselineRow row;
        row.method = "fcm_argmax";
        try {
            FcmConfig cfg;
            cfg.seed = seed;
            const FcmModel model = fit(X, cfg);
            const auto labels = argmax_labels(memberships_batch(model, X));
            row.silhouette = silhouette(X, labels, sil_opts);
            std::vector<int> sorted(labels);
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            row.n_clusters = static_cast<int>(sorted.size());
            row.apn = apn_stability(X, fcm_clusterer, seed, opts.apn_max_pairs).apn;
        } catch (const std::exception& e) {
            row.failed = true;
            row.note = e.what();
        }
        report.rows.push_back(row);
        report.config_echo.emplace_back("fcm.k", "6");
        report.config_echo.emplace_back("fcm.m", "1.5");
    }

    // mini-batch k-means
    {
        BaselineRow row;
        row.method = "minibatch_kmeans";
        try {
            const KMeansModel km = minibatch_kmeans(X, km_cfg);
            row.silhouette = silhouette(X, km.labels, sil_opts);
            std::vector<int> sorted(km.labels);
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            row.n_clusters = static_cast<int>(sorted.size());
            row.apn = apn_stability(X, km_clusterer, seed, opts.apn_max_pairs).apn;
        } catch (const std::exception& e) {
            row.failed = true;
            row.note = e.what();
        }
        report.rows.push_back(row);
        report.config_echo.emplace_back("kmeans.k", std::to_string(km_cfg.k));
        report.config_echo.emplace_back("kmeans.batch_size", std::to_string(km_cfg.batch_size));
        report.config_echo.emplace_back("kmeans.max_iter", std::to_string(km_cfg.max_iter));
    }

    // DBSCAN
    {
        BaselineRow row;
        row.method = "dbscan";
        try {
            const double eps = opts.dbscan_eps.value_or(median_nn_distance(X));
            const DbscanResult db = dbscan(X, eps, min_pts_full);
            row.silhouette = silhouette(X, db.labels, sil_opts);
            row.n_clusters = db.n_clusters;
            row.noise_pct = 100.0 * db.noise_fraction;
            row.apn = apn_stability(X, db_clusterer, seed, opts.apn_max_pairs).apn;
            if (!row.silhouette) row.note = "silhouette undefined (<2 clusters)";
            char eps_buf[64];
            std::snprintf(eps_buf, sizeof(eps_buf), "%.17g", eps);
            report.config_echo.emplace_back("dbscan.eps", eps_buf);
            report.config_echo.emplace_back("dbscan.min_pts", std::to_string(min_pts_full));
            report.config_echo.emplace_back("dbscan.eps_rule",
                                            eps_auto ? "median_1nn" : "explicit");
        } catch (const std::exception& e) {
            row.failed = true;
            row.note = e.what();
        }
        report.rows.push_back(row);
    }

    report.config_echo.emplace_back("seed", std::to_string(seed));
    report.config_echo.emplace_back(
        "silhouette.subsample_cap", std::to_string(sil_opts.subsample_cap));
    return report;
}

} // namespace ctlevels
