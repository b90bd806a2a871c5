#include "ctlevels/fcm.hpp"

#include <cmath>
#include <limits>

#include "ctlevels/rng.hpp"

namespace ctlevels {

namespace {

constexpr double kEffectiveMassFloor = 1e-12;

// Squared Euclidean distances from every row of X to every centroid.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& V) {
    Eigen::MatrixXd d2(X.rows(), V.rows());
    for (Eigen::Index j = 0; j < V.rows(); ++j) {
        d2.col(j) = (X.rowwise() - V.row(j)).rowwise().squaredNorm();
    }
    return d2;
}

// Membership row from squared distances; exponent = 1/(m-1). Ratios are
// normalized by the smallest distance so large ratios underflow to 0 instead
// of overflowing.
void membership_row(const Eigen::VectorXd& d2, double inv_m1, Eigen::VectorXd& u) {
    const Eigen::Index k = d2.size();
    u.resize(k);

    int zeros = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (d2(j) <= 0.0) ++zeros;
    }
    if (zeros > 0) {
        // point coincides with centroid(s): split equally among them
        for (Eigen::Index j = 0; j < k; ++j) {
            u(j) = d2(j) <= 0.0 ? 1.0 / zeros : 0.0;
        }
        return;
    }

    const double d2min = d2.minCoeff();
    double sum = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        u(j) = std::pow(d2min / d2(j), inv_m1);
        sum += u(j);
    }
    u /= sum;
}

Eigen::MatrixXd membership_matrix(const Eigen::MatrixXd& d2, double m) {
    const double inv_m1 = 1.0 / (m - 1.0);
    Eigen::MatrixXd U(d2.rows(), d2.cols());
    Eigen::VectorXd row;
    for (Eigen::Index i = 0; i < d2.rows(); ++i) {
        membership_row(d2.row(i).transpose(), inv_m1, row);
        U.row(i) = row.transpose();
    }
    return U;
}

Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Um,
                                 const Eigen::MatrixXd& fallback) {
    Eigen::MatrixXd V(Um.cols(), X.cols());
    for (Eigen::Index j = 0; j < Um.cols(); ++j) {
        const double mass = Um.col(j).sum();
        if (mass <= kEffectiveMassFloor) {
            V.row(j) = fallback.row(j);
        } else {
            V.row(j) = (Um.col(j).transpose() * X) / mass;
        }
    }
    return V;
}

} // namespace

void FcmConfig::validate() const {
    if (k < 1) throw SchemaError("k must be >= 1");
    if (!(m > 1.0)) throw SchemaError("fuzzification exponent m must be > 1");
    if (!(epsilon > 0.0)) throw SchemaError("epsilon must be > 0");
    if (max_iter < 1) throw SchemaError("max_iter must be >= 1");
}

FcmModel fit_from(const Eigen::MatrixXd& X, const FcmConfig& config,
                  Eigen::MatrixXd V) {
    config.validate();
    const auto n = X.rows();
    if (n < config.k) {
        throw InfeasibleError("cannot fit " + std::to_string(config.k) + " clusters to " +
                              std::to_string(n) + " rows");
    }
    if (V.rows() != config.k || V.cols() != X.cols()) {
        throw SchemaError("initial centroid matrix has wrong shape");
    }

    FcmModel model;
    model.config = config;
    model.objective_history.reserve(static_cast<std::size_t>(config.max_iter) + 1);

    Eigen::MatrixXd U;
    for (int it = 1; it <= config.max_iter; ++it) {
        Eigen::MatrixXd d2 = squared_distances(X, V);
        U = membership_matrix(d2, config.m);

        // empty-cluster repair: reseed dead centroids to the worst-fit point
        Eigen::MatrixXd Um = U.array().pow(config.m);
        bool repaired = false;
        for (Eigen::Index j = 0; j < Um.cols(); ++j) {
            if (Um.col(j).sum() <= kEffectiveMassFloor) {
                Eigen::Index worst = 0;
                d2.rowwise().minCoeff().maxCoeff(&worst);
                V.row(j) = X.row(worst);
                repaired = true;
            }
        }
        if (repaired) {
            d2 = squared_distances(X, V);
            U = membership_matrix(d2, config.m);
            Um = U.array().pow(config.m);
        }

        const Eigen::MatrixXd V_new = update_centroids(X, Um, V);
        const double shift = (V_new - V).cwiseAbs().maxCoeff();
        V = V_new;

        model.objective_history.push_back(
            (Um.array() * squared_distances(X, V).array()).sum());
        model.iterations_used = it;
        model.final_shift = shift;
        if (shift < config.epsilon) {
            model.converged = true;
            break;
        }
    }

    model.centroids = V;

    // one more membership pass so the stored objective matches what
    // memberships_batch reproduces for the final centroids
    {
        const Eigen::MatrixXd d2 = squared_distances(X, V);
        const Eigen::MatrixXd Uf = membership_matrix(d2, config.m);
        model.objective = (Uf.array().pow(config.m) * d2.array()).sum();
        model.objective_history.push_back(model.objective);
    }

    for (Eigen::Index a = 0; a < V.rows() && !model.degenerate; ++a) {
        for (Eigen::Index b = a + 1; b < V.rows(); ++b) {
            if ((V.row(a) - V.row(b)).norm() < 1e-9) {
                model.degenerate = true;
                break;
            }
        }
    }
    return model;
}

FcmModel fit(const Eigen::MatrixXd& X, const FcmConfig& config) {
    config.validate();
    const auto n = X.rows();
    if (n < 1) throw InfeasibleError("cannot fit on an empty dataset");
    if (n < config.k) {
        throw InfeasibleError("cannot fit " + std::to_string(config.k) + " clusters to " +
                              std::to_string(n) + " rows");
    }

    Eigen::MatrixXd V0(config.k, X.cols());
    Rng rng(substream_seed(config.seed, 0xFC));
    if (config.init == FcmInit::seeded_points) {
        const auto picks =
            rng.sample_without_replacement(static_cast<std::size_t>(n),
                                           static_cast<std::size_t>(config.k));
        for (int j = 0; j < config.k; ++j) {
            V0.row(j) = X.row(static_cast<Eigen::Index>(picks[static_cast<std::size_t>(j)]));
        }
    } else {
        Eigen::MatrixXd U0(n, config.k);
        for (Eigen::Index i = 0; i < n; ++i) {
            double sum = 0;
            for (int j = 0; j < config.k; ++j) {
                const double v = rng.uniform() + 1e-12;
                U0(i, j) = v;
                sum += v;
            }
            U0.row(i) /= sum;
        }
        const Eigen::MatrixXd Um = U0.array().pow(config.m);
        V0 = update_centroids(X, Um, Eigen::MatrixXd::Zero(config.k, X.cols()));
    }
    return fit_from(X, config, std::move(V0));
}

FcmModel fit(const Dataset& data, const FcmConfig& config) {
    if (data.empty()) throw InfeasibleError("cannot fit on an empty dataset");
    return fit(data.to_matrix(), config);
}

Eigen::VectorXd memberships(const FcmModel& model, const Eigen::VectorXd& point) {
    const Eigen::MatrixXd& V = model.centroids;
    Eigen::VectorXd d2(V.rows());
    for (Eigen::Index j = 0; j < V.rows(); ++j) {
        d2(j) = (V.row(j).transpose() - point).squaredNorm();
    }
    Eigen::VectorXd u;
    membership_row(d2, 1.0 / (model.config.m - 1.0), u);
    return u;
}

Eigen::VectorXd memberships(const FcmModel& model, const ProjectVector& point) {
    return memberships(model, point.to_real());
}

Eigen::MatrixXd memberships_batch(const FcmModel& model, const Eigen::MatrixXd& X) {
    if (X.rows() == 0) return Eigen::MatrixXd(0, model.k());
    return membership_matrix(squared_distances(X, model.centroids), model.config.m);
}

Eigen::MatrixXd memberships_batch(const FcmModel& model, const Dataset& data) {
    return memberships_batch(model, data.to_matrix());
}

GridSearchResult grid_search(const Dataset& data, const std::vector<double>& m_grid,
                             const std::vector<double>& eps_grid, int k,
                             std::uint64_t seed) {
    if (m_grid.empty() || eps_grid.empty()) {
        throw SchemaError("grid_search: empty parameter grid");
    }

    const Eigen::MatrixXd X = data.to_matrix();
    GridSearchResult result;
    result.cells.reserve(m_grid.size() * eps_grid.size());
    for (double m : m_grid) {
        for (double eps : eps_grid) {
            FcmConfig cfg;
            cfg.k = k;
            cfg.m = m;
            cfg.epsilon = eps;
            cfg.seed = seed;
            const FcmModel model = fit(X, cfg);
            const Eigen::MatrixXd U = memberships_batch(model, X);
            GridCell cell;
            cell.m = m;
            cell.epsilon = eps;
            cell.fpc = fuzzy_partition_coefficient(U);
            cell.silhouette = silhouette(X, argmax_labels(U), SilhouetteOptions{20000, seed});
            result.cells.push_back(cell);
        }
    }

    // min-max normalize both metrics, rank by their mean; undefined
    // silhouettes rank below everything
    double fpc_lo = std::numeric_limits<double>::infinity(), fpc_hi = -fpc_lo;
    double sil_lo = std::numeric_limits<double>::infinity(), sil_hi = -sil_lo;
    for (const auto& c : result.cells) {
        fpc_lo = std::min(fpc_lo, c.fpc);
        fpc_hi = std::max(fpc_hi, c.fpc);
        if (c.silhouette) {
            sil_lo = std::min(sil_lo, *c.silhouette);
            sil_hi = std::max(sil_hi, *c.silhouette);
        }
    }
    auto norm = [](double v, double lo, double hi) {
        return hi - lo > 1e-300 ? (v - lo) / (hi - lo) : 0.5;
    };
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& c = result.cells[i];
        const double sil_score =
            c.silhouette ? norm(*c.silhouette, sil_lo, sil_hi) : -1.0;
        const double score = 0.5 * (norm(c.fpc, fpc_lo, fpc_hi) + sil_score);
        const auto& s = result.cells[result.selected];
        if (score > best + 1e-12 ||
            (std::abs(score - best) <= 1e-12 &&
             (c.m < s.m || (c.m == s.m && c.epsilon < s.epsilon)))) {
            best = std::max(best, score);
            result.selected = i;
        }
    }
    return result;
}

} // namespace ctlevels
