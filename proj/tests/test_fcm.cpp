#include <doctest.h>

#include <cmath>

#include "ctlevels/dataset_io.hpp"
#include "ctlevels/fcm.hpp"
#include "ctlevels/ordering.hpp"
#include "ctlevels/reference_profiles.hpp"
#include "ctlevels/rng.hpp"

using namespace ctlevels;

namespace {

Eigen::MatrixXd one_dim(std::initializer_list<double> points) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(points.size()), 1);
    Eigen::Index i = 0;
    for (double p : points) X(i++, 0) = p;
    return X;
}

} // namespace

TEST_CASE("two 1-D points split into their own clusters") {
    FcmConfig cfg;
    cfg.k = 2;
    cfg.m = 1.5;
    const FcmModel model = fit(one_dim({0.0, 4.0}), cfg);
    double lo = model.centroids.col(0).minCoeff();
    double hi = model.centroids.col(0).maxCoeff();
    CHECK(std::abs(lo - 0.0) < 1e-3);
    CHECK(std::abs(hi - 4.0) < 1e-3);
    CHECK(model.converged);
}

TEST_CASE("identical rows with k=1 give that centroid and zero objective") {
    Eigen::MatrixXd X(5, 3);
    for (int i = 0; i < 5; ++i) X.row(i) << 2.0, 1.0, 3.0;
    FcmConfig cfg;
    cfg.k = 1;
    const FcmModel model = fit(X, cfg);
    CHECK(model.centroids(0, 0) == doctest::Approx(2.0));
    CHECK(model.centroids(0, 1) == doctest::Approx(1.0));
    CHECK(model.centroids(0, 2) == doctest::Approx(3.0));
    CHECK(model.objective == doctest::Approx(0.0));
}

TEST_CASE("identical rows with k=2 converge degenerate, not as an error") {
    Eigen::MatrixXd X(6, 2);
    for (int i = 0; i < 6; ++i) X.row(i) << 1.0, 1.0;
    FcmConfig cfg;
    cfg.k = 2;
    const FcmModel model = fit(X, cfg);
    CHECK(model.degenerate);
    CHECK((model.centroids.row(0) - model.centroids.row(1)).norm() < 1e-9);
}

TEST_CASE("fit rejects fewer rows than clusters") {
    Eigen::MatrixXd X(3, 2);
    X.setZero();
    FcmConfig cfg;
    cfg.k = 4;
    CHECK_THROWS_AS(fit(X, cfg), InfeasibleError);
}

TEST_CASE("centroid recovery on the reference-seeded synthetic corpus") {
    const Eigen::MatrixXd ref = cefr_reference_centroids();
    const SyntheticSample sample = synthesize(ref, 600, 0.6, 2026);
    FcmConfig cfg;
    cfg.seed = 2026;
    const OrderedFcmModel model = order_clusters(fit(sample.data, cfg));
    const Eigen::MatrixXd fitted = model.ordered_centroids();
    // round/clip bias plus fuzzy pull; the acceptance suite pins the
    // full-scale 0.25 bound at n=2000 per cluster
    CHECK((fitted - ref).cwiseAbs().maxCoeff() < 0.3);
}

TEST_CASE("membership at a centroid is one-hot") {
    Eigen::MatrixXd X = one_dim({0.0, 1.0, 3.0, 4.0});
    FcmConfig cfg;
    cfg.k = 2;
    FcmModel model = fit(X, cfg);
    model.centroids(0, 0) = 0.5;
    model.centroids(1, 0) = 3.5;
    Eigen::VectorXd point(1);
    point << 0.5;
    const Eigen::VectorXd u = memberships(model, point);
    CHECK(u(0) == doctest::Approx(1.0));
    CHECK(u(1) == doctest::Approx(0.0));
}

TEST_CASE("membership splits equally between coincident centroids") {
    FcmModel model;
    model.config.k = 2;
    model.config.m = 1.5;
    model.centroids = Eigen::MatrixXd(2, 1);
    model.centroids << 2.0, 2.0;
    Eigen::VectorXd point(1);
    point << 2.0;
    const Eigen::VectorXd u = memberships(model, point);
    CHECK(u(0) == doctest::Approx(0.5));
    CHECK(u(1) == doctest::Approx(0.5));
}

TEST_CASE("memberships vary continuously near a centroid") {
    FcmModel model;
    model.config.k = 2;
    model.config.m = 1.5;
    model.centroids = Eigen::MatrixXd(2, 1);
    model.centroids << 0.0, 4.0;
    Eigen::VectorXd point(1);
    point << 1e-7; // just off the coincidence singularity
    const Eigen::VectorXd u = memberships(model, point);
    CHECK(u(0) > 1.0 - 1e-9);
    CHECK(u(1) < 1e-9);
}

TEST_CASE("equidistant point gets equal memberships") {
    FcmModel model;
    model.config.k = 3;
    model.config.m = 1.5;
    model.centroids = Eigen::MatrixXd(3, 2);
    model.centroids << 0.0, 0.0, 4.0, 0.0, 100.0, 100.0;
    Eigen::VectorXd point(2);
    point << 2.0, 0.0;
    const Eigen::VectorXd u = memberships(model, point);
    CHECK(u(0) == doctest::Approx(u(1)));
    CHECK(u(2) < u(0));
}

TEST_CASE("hand-computed 1-D membership with m=2") {
    FcmModel model;
    model.config.k = 2;
    model.config.m = 2.0;
    model.centroids = Eigen::MatrixXd(2, 1);
    model.centroids << 0.0, 4.0;
    Eigen::VectorXd point(1);
    point << 1.0;
    // d0=1, d4=3, exponent 2/(m-1)=2: u0 = 1/(1+(1/3)^2) = 0.9
    const Eigen::VectorXd u = memberships(model, point);
    CHECK(u(0) == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(u(1) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("memberships_batch matches single-point calls and handles empty input") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 30, 0.6, 3);
    FcmConfig cfg;
    cfg.seed = 3;
    const FcmModel model = fit(sample.data, cfg);

    const Eigen::MatrixXd U = memberships_batch(model, sample.data);
    const Eigen::VectorXd u0 = memberships(model, sample.data[0]);
    CHECK((U.row(0).transpose() - u0).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    const Eigen::MatrixXd empty = memberships_batch(model, Eigen::MatrixXd(0, 9));
    CHECK(empty.rows() == 0);
}

TEST_CASE("stored objective matches a fresh membership evaluation") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 80, 0.6, 17);
    FcmConfig cfg;
    cfg.seed = 17;
    const FcmModel model = fit(sample.data, cfg);
    const Eigen::MatrixXd X = sample.data.to_matrix();
    const Eigen::MatrixXd U = memberships_batch(model, X);
    double j = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index c = 0; c < model.k(); ++c) {
            j += std::pow(U(i, c), model.config.m) *
                 (X.row(i) - model.centroids.row(c)).squaredNorm();
        }
    }
    CHECK(std::abs(j - model.objective) < 1e-9 * std::max(1.0, model.objective));
}

TEST_CASE("membership rows sum to one over random models and points") {
    Rng rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        FcmModel model;
        model.config.k = 2 + static_cast<int>(rng.below(5));
        model.config.m = 1.2 + rng.uniform() * 2.0;
        model.centroids = Eigen::MatrixXd(model.config.k, 4);
        for (Eigen::Index j = 0; j < model.config.k; ++j) {
            for (int d = 0; d < 4; ++d) model.centroids(j, d) = rng.uniform(0, 4);
        }
        Eigen::VectorXd point(4);
        for (int d = 0; d < 4; ++d) point(d) = rng.uniform(0, 4);
        const Eigen::VectorXd u = memberships(model, point);
        CHECK(u.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(u.minCoeff() >= 0.0);
        CHECK(u.maxCoeff() <= 1.0);
    }
}

TEST_CASE("objective history is non-increasing") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 150, 0.6, 77);
    FcmConfig cfg;
    cfg.seed = 77;
    const FcmModel model = fit(sample.data, cfg);
    REQUIRE(model.objective_history.size() >= 2);
    for (std::size_t i = 1; i < model.objective_history.size(); ++i) {
        CHECK(model.objective_history[i] <=
              model.objective_history[i - 1] + 1e-9 * model.objective_history[i - 1]);
    }
}

TEST_CASE("row permutation leaves centroids unchanged for a fixed init") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 40, 0.6, 12);
    const Eigen::MatrixXd X = sample.data.to_matrix();
    Eigen::MatrixXd reversed(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) reversed.row(i) = X.row(X.rows() - 1 - i);

    FcmConfig cfg;
    cfg.k = 6;
    const Eigen::MatrixXd init = cefr_reference_centroids();
    const FcmModel a = fit_from(X, cfg, init);
    const FcmModel b = fit_from(reversed, cfg, init);
    CHECK((a.centroids - b.centroids).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fitted centroids stay inside the per-column data range") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 100, 0.8, 8);
    const Eigen::MatrixXd X = sample.data.to_matrix();
    FcmConfig cfg;
    cfg.seed = 8;
    const FcmModel model = fit(X, cfg);
    for (Eigen::Index d = 0; d < X.cols(); ++d) {
        CHECK(model.centroids.col(d).minCoeff() >= X.col(d).minCoeff() - 1e-12);
        CHECK(model.centroids.col(d).maxCoeff() <= X.col(d).maxCoeff() + 1e-12);
    }
}

TEST_CASE("fit is bit-deterministic for a fixed seed") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 60, 0.6, 5);
    FcmConfig cfg;
    cfg.seed = 999;
    const FcmModel a = fit(sample.data, cfg);
    const FcmModel b = fit(sample.data, cfg);
    CHECK(a.centroids == b.centroids);
    CHECK(a.iterations_used == b.iterations_used);
    CHECK(a.objective == b.objective);
}

TEST_CASE("random-membership init converges on the same data") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 60, 0.6, 5);
    FcmConfig cfg;
    cfg.seed = 5;
    cfg.init = FcmInit::random_membership;
    const FcmModel model = fit(sample.data, cfg);
    CHECK(model.converged);
}

TEST_CASE("grid search over a single cell selects it") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 40, 0.5, 6);
    const GridSearchResult grid = grid_search(sample.data, {2.0}, {1e-4}, 6, 6);
    REQUIRE(grid.cells.size() == 1);
    CHECK(grid.selected == 0);
}

TEST_CASE("smaller m yields a crisper partition (higher FPC)") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 120, 0.4, 14);
    const GridSearchResult grid = grid_search(sample.data, {1.5, 2.5}, {1e-4}, 6, 14);
    REQUIRE(grid.cells.size() == 2);
    CHECK(grid.cells[0].fpc >= grid.cells[1].fpc);
}

TEST_CASE("default 3x3 grid emits nine cells") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 40, 0.5, 2);
    const GridSearchResult grid =
        grid_search(sample.data, default_m_grid(), default_eps_grid(), 6, 2);
    CHECK(grid.cells.size() == 9);
    CHECK(grid.selected < grid.cells.size());
}

TEST_CASE("grid search rejects empty grids") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 20, 0.5, 2);
    CHECK_THROWS_AS(grid_search(sample.data, {}, {1e-4}, 6, 2), SchemaError);
}

TEST_CASE("config validation") {
    FcmConfig cfg;
    cfg.m = 1.0;
    CHECK_THROWS_AS(cfg.validate(), SchemaError);
    cfg = FcmConfig{};
    cfg.epsilon = 0;
    CHECK_THROWS_AS(cfg.validate(), SchemaError);
    cfg = FcmConfig{};
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), SchemaError);
}
