#include <doctest.h>

#include <cmath>
#include <set>

#include "ctlevels/cluster_metrics.hpp"
#include "ctlevels/dataset_io.hpp"
#include "ctlevels/fcm.hpp"
#include "ctlevels/ordering.hpp"
#include "ctlevels/reference_profiles.hpp"
#include "ctlevels/rng.hpp"
#include "ctlevels/stats.hpp"
#include "support/oracles.hpp"

using namespace ctlevels;

namespace {

OrderedFcmModel rounded_reference_model() {
    Eigen::MatrixXd c = cefr_reference_centroids();
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
        for (Eigen::Index d = 0; d < c.cols(); ++d) c(j, d) = std::round(c(j, d));
    }
    FcmModel base;
    base.config.k = 6;
    base.centroids = c;
    base.converged = true;
    return order_clusters(base);
}

Dataset lattice_corpus(int per_cluster, double sd, std::uint64_t seed) {
    return synthesize(cefr_reference_centroids(), per_cluster, sd, seed).data;
}

} // namespace

TEST_CASE("membership metrics on crisp and uniform matrices") {
    Eigen::MatrixXd one_hot = Eigen::MatrixXd::Zero(4, 6);
    for (int i = 0; i < 4; ++i) one_hot(i, i % 6) = 1.0;
    CHECK(fuzzy_partition_coefficient(one_hot) == doctest::Approx(1.0));
    CHECK(partition_entropy(one_hot) == doctest::Approx(0.0));
    CHECK(average_certainty(one_hot) == doctest::Approx(1.0));

    Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(5, 6, 1.0 / 6.0);
    CHECK(fuzzy_partition_coefficient(uniform) == doctest::Approx(1.0 / 6.0));
    CHECK(partition_entropy(uniform) == doctest::Approx(std::log(6.0)));
    CHECK(average_certainty(uniform) == doctest::Approx(0.0));
}

TEST_CASE("partition quality through a model with coincident points") {
    const OrderedFcmModel model = rounded_reference_model();
    std::vector<ProjectVector> rows;
    for (int level = 0; level < 6; ++level) {
        ProjectVector p;
        for (int d = 0; d < kDims; ++d) {
            p.scores[d] = static_cast<int>(
                std::lround(model.ordered_centroids()(level, d)));
        }
        rows.push_back(p);
        rows.push_back(p);
    }
    const PartitionQuality q = partition_quality(model, Dataset(rows));
    CHECK(q.fpc == doctest::Approx(1.0));
    CHECK(q.partition_entropy == doctest::Approx(0.0));
    CHECK(q.avg_certainty == doctest::Approx(1.0));
    REQUIRE(q.silhouette.has_value());
    CHECK(*q.silhouette > 0.9);
}

TEST_CASE("silhouette on the 1-D toy pair of pairs") {
    Eigen::MatrixXd X(4, 1);
    X << 0.0, 0.1, 10.0, 10.1;
    const std::vector<int> labels{0, 0, 1, 1};
    const auto s = silhouette(X, labels);
    REQUIRE(s.has_value());
    CHECK(*s == doctest::Approx(0.990).epsilon(5e-4));
    CHECK(*s == doctest::Approx(oracles::silhouette(X, labels)).epsilon(1e-12));
}

TEST_CASE("silhouette is undefined for a single cluster and skips noise") {
    Eigen::MatrixXd X(4, 1);
    X << 0.0, 0.1, 10.0, 10.1;
    CHECK_FALSE(silhouette(X, {0, 0, 0, 0}).has_value());
    CHECK_FALSE(silhouette(X, {-1, -1, 0, 0}).has_value());
    const auto with_noise = silhouette(X, {0, -1, 1, 1});
    REQUIRE(with_noise.has_value());
}

TEST_CASE("silhouette subsampling stays close to the full value") {
    const Dataset data = lattice_corpus(150, 0.6, 42);
    FcmConfig cfg;
    cfg.seed = 42;
    const FcmModel model = fit(data, cfg);
    const auto labels = argmax_labels(memberships_batch(model, data));
    const Eigen::MatrixXd X = data.to_matrix();
    const auto full = silhouette(X, labels);
    const auto sub = silhouette(X, labels, SilhouetteOptions{500, 7});
    REQUIRE(full.has_value());
    REQUIRE(sub.has_value());
    CHECK(std::abs(*full - *sub) < 0.05);
}

TEST_CASE("sharpening memberships never lowers FPC nor raises entropy") {
    Rng rng(987);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::MatrixXd U(20, 6);
        for (Eigen::Index i = 0; i < U.rows(); ++i) {
            double sum = 0;
            for (Eigen::Index j = 0; j < U.cols(); ++j) {
                U(i, j) = rng.uniform() + 1e-9;
                sum += U(i, j);
            }
            U.row(i) /= sum;
        }
        for (double power : {1.5, 2.0, 3.0}) {
            Eigen::MatrixXd sharp = U.array().pow(power);
            for (Eigen::Index i = 0; i < sharp.rows(); ++i) {
                sharp.row(i) /= sharp.row(i).sum();
            }
            CHECK(fuzzy_partition_coefficient(sharp) >=
                  fuzzy_partition_coefficient(U) - 1e-12);
            CHECK(partition_entropy(sharp) <= partition_entropy(U) + 1e-12);
        }
    }
}

TEST_CASE("pca on a line explains everything with one component") {
    Eigen::MatrixXd X(5, kDims);
    for (int i = 0; i < 5; ++i) X.row(i).setConstant(static_cast<double>(i));
    const PcaResult pca = pca_project(X, 2);
    REQUIRE(pca.defined);
    CHECK(pca.explained_variance_ratios(0) == doctest::Approx(1.0));
    CHECK(pca.explained_variance_ratios(1) == doctest::Approx(0.0));
}

TEST_CASE("pca ratios are sorted, bounded, and reconstruction works") {
    const Dataset data = lattice_corpus(80, 0.6, 31);
    const PcaResult pca = pca_project(data, kDims);
    REQUIRE(pca.defined);
    double sum = 0;
    for (Eigen::Index c = 0; c < pca.explained_variance_ratios.size(); ++c) {
        if (c > 0) {
            CHECK(pca.explained_variance_ratios(c) <=
                  pca.explained_variance_ratios(c - 1) + 1e-12);
        }
        sum += pca.explained_variance_ratios(c);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    const Eigen::MatrixXd X = data.to_matrix();
    const Eigen::MatrixXd centered = X.rowwise() - pca.mean.transpose();
    const Eigen::MatrixXd rebuilt = pca.coordinates * pca.components.transpose();
    CHECK((rebuilt - centered).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pca sign convention puts the dominant loading positive") {
    const Dataset data = lattice_corpus(60, 0.6, 77);
    const PcaResult pca = pca_project(data, 2);
    for (Eigen::Index c = 0; c < pca.components.cols(); ++c) {
        Eigen::Index peak = 0;
        pca.components.col(c).cwiseAbs().maxCoeff(&peak);
        CHECK(pca.components(peak, c) > 0.0);
    }
}

TEST_CASE("pca on zero-variance data is undefined") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Constant(5, kDims, 2.0);
    CHECK_FALSE(pca_project(X, 2).defined);
    CHECK_THROWS_AS(pca_project(Eigen::MatrixXd::Zero(1, kDims), 2), InfeasibleError);
    CHECK_THROWS_AS(pca_project(X, 10), SchemaError);
}

TEST_CASE("pca dominant axis on the synthetic corpus") {
    const Dataset data = lattice_corpus(300, 0.6, 2025);
    const PcaResult pca = pca_project(data, 2);
    REQUIRE(pca.defined);
    CHECK(pca.explained_variance_ratios(0) > 0.5);
}

TEST_CASE("gap statistic prefers two clusters on two separated blobs") {
    Eigen::MatrixXd centers(2, kDims);
    centers.row(0).setConstant(0.2);
    centers.row(1).setConstant(3.8);
    const SyntheticSample sample = synthesize(centers, 120, 0.3, 5);
    const auto points = gap_statistic(sample.data, 1, 2, 6, 5);
    REQUIRE(points.size() == 2);
    CHECK(points[0].k == 1);
    CHECK(points[1].k == 2);
    CHECK(points[1].gap > points[0].gap);
    CHECK(points[0].s_k >= 0.0);
}

TEST_CASE("gap statistic rises without a sharp elbow on overlapping data") {
    const Dataset data = lattice_corpus(150, 0.6, 11);
    const auto pts = gap_statistic(data, 2, 8, 5, 11);
    REQUIRE(pts.size() == 7);
    for (int i = 1; i <= 4; ++i) { // strictly increasing through k=6
        CHECK(pts[static_cast<std::size_t>(i)].gap >
              pts[static_cast<std::size_t>(i - 1)].gap);
    }
    CHECK(pts.back().gap > pts.front().gap + 0.2);
    double peak = 0;
    for (const auto& p : pts) peak = std::max(peak, p.gap);
    CHECK(peak - pts.back().gap < 0.05); // plateau, not a spike
}

TEST_CASE("gap statistic on constant data collapses the spread term") {
    std::vector<ProjectVector> rows(12);
    for (auto& r : rows) r.scores.fill(2);
    const auto points = gap_statistic(Dataset(rows), 1, 1, 5, 9);
    REQUIRE(points.size() == 1);
    CHECK(points[0].s_k == doctest::Approx(0.0));
    CHECK(points[0].gap == doctest::Approx(0.0));
}

TEST_CASE("gap statistic validates its arguments") {
    const Dataset data = lattice_corpus(10, 0.5, 3);
    CHECK_THROWS_AS(gap_statistic(data, 2, 4, 3, 1), SchemaError);
    CHECK_THROWS_AS(gap_statistic(data, 3, 2, 10, 1), SchemaError);
    CHECK_THROWS_AS(gap_statistic(data, 1, 1000, 10, 1), InfeasibleError);
}

TEST_CASE("stratified folds partition the data") {
    const Dataset data = lattice_corpus(37, 0.6, 8);
    const auto folds = stratified_folds(data, 5, 5, 123);
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& f : folds) {
        total += f.size();
        for (std::size_t i : f) {
            CHECK(i < data.size());
            CHECK(seen.insert(i).second); // disjoint
        }
    }
    CHECK(total == data.size());
    const auto again = stratified_folds(data, 5, 5, 123);
    CHECK(folds == again);
}

TEST_CASE("cross_validate rejects a single fold and reports stable metrics") {
    const Dataset data = lattice_corpus(150, 0.6, 21);
    FcmConfig cfg;
    cfg.seed = 21;
    CHECK_THROWS_AS(cross_validate(data, 1, cfg), InfeasibleError);

    const CrossValidationResult cv = cross_validate(data, 5, cfg);
    REQUIRE(cv.folds.size() == 5);
    REQUIRE(cv.silhouette.has_value());
    CHECK(cv.silhouette->variance < 0.01);
    CHECK(cv.fpc.mean > 1.0 / 6.0);
    CHECK(cv.fpc.mean <= 1.0);
}

TEST_CASE("train equals test gives all-zero deltas") {
    const Dataset data = lattice_corpus(80, 0.6, 55);
    FcmConfig cfg;
    cfg.seed = 55;
    const OrderedFcmModel model = order_clusters(fit(data, cfg));
    const TrainTestReport rep = train_test_report(model, data, data);
    for (const auto& d : rep.deltas) {
        REQUIRE(d.absolute.has_value());
        CHECK(*d.absolute == doctest::Approx(0.0));
        if (d.percent) CHECK(*d.percent == doctest::Approx(0.0));
    }
}

TEST_CASE("percent deltas are computed against the train value") {
    const Dataset train = lattice_corpus(80, 0.6, 56);
    const Dataset test = lattice_corpus(80, 0.6, 57);
    FcmConfig cfg;
    cfg.seed = 56;
    const OrderedFcmModel model = order_clusters(fit(train, cfg));
    const TrainTestReport rep = train_test_report(model, train, test);
    for (const auto& d : rep.deltas) {
        if (d.percent && d.train && *d.train != 0) {
            CHECK(*d.percent == doctest::Approx(100.0 * *d.absolute / *d.train));
        }
    }
}

TEST_CASE("progression report on ordered synthetic data") {
    const Dataset data = lattice_corpus(250, 0.6, 31337);
    FcmConfig cfg;
    cfg.seed = 31337;
    const OrderedFcmModel model = order_clusters(fit(data, cfg));
    const ValidationReport rep = ordinal_progression_report(model, data);

    CHECK(rep.global_tau.statistic == doctest::Approx(1.0));
    CHECK(rep.global_rho.statistic == doctest::Approx(1.0));
    CHECK(rep.kw.defined);
    CHECK(rep.kw.p_value < 0.001);

    REQUIRE(rep.per_dimension.size() == 9);
    for (const auto& dc : rep.per_dimension) {
        REQUIRE(dc.kendall.defined);
        CHECK(dc.kendall.p_value <= 1.0);
        CHECK(dc.kendall.statistic > 0.0); // every dimension rises with level
        CHECK(dc.spearman.p_value <= 1.0);
    }
    // the flattest reference dimension separates levels worst, matching the
    // published weakest rank correlation
    double user_tau = 0;
    double min_other = 1;
    for (const auto& dc : rep.per_dimension) {
        if (dc.dimension == "user_interactivity") {
            user_tau = dc.kendall.statistic;
        } else {
            min_other = std::min(min_other, dc.kendall.statistic);
        }
    }
    CHECK(user_tau < min_other);

    REQUIRE(rep.pairwise_mw.size() == 5);
    for (const auto& pt : rep.pairwise_mw) {
        CHECK_FALSE(pt.skipped);
        CHECK(pt.result.p_value < 0.001);
        CHECK(pt.upper_ordinal == pt.lower_ordinal + 1);
    }
    CHECK(rep.pca.defined);
}

TEST_CASE("progression report marks empty level pairs as skipped") {
    // data hugging only the lowest reference profile leaves upper levels empty
    Eigen::MatrixXd low(1, kDims);
    low = cefr_reference_centroids().row(0);
    const SyntheticSample sample = synthesize(low, 60, 0.2, 4);
    const OrderedFcmModel model = rounded_reference_model();
    const ValidationReport rep = ordinal_progression_report(model, sample.data);
    bool any_skipped = false;
    for (const auto& pt : rep.pairwise_mw) any_skipped |= pt.skipped;
    CHECK(any_skipped);
}

TEST_CASE("progression report honors the all-pairs flag") {
    const Dataset data = lattice_corpus(40, 0.6, 3);
    const OrderedFcmModel model = rounded_reference_model();
    ReportOptions opts;
    opts.all_pairs = true;
    const ValidationReport rep = ordinal_progression_report(model, data, opts);
    CHECK(rep.pairwise_mw.size() == 15);
}
