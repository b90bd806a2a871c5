#include <doctest.h>

#include <cmath>

#include "ctlevels/classify.hpp"
#include "ctlevels/dataset_io.hpp"
#include "ctlevels/reference_profiles.hpp"
#include "ctlevels/rng.hpp"
#include "support/oracles.hpp"

using namespace ctlevels;

namespace {

Eigen::VectorXd u6(std::initializer_list<double> vals) {
    Eigen::VectorXd u(6);
    Eigen::Index i = 0;
    for (double v : vals) u(i++) = v;
    return u;
}

// model whose centroids are the rounded reference rows (integral, so lattice
// points can coincide with centroids exactly)
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

ProjectVector from_row(const Eigen::VectorXd& row) {
    ProjectVector p;
    for (int d = 0; d < kDims; ++d) p.scores[d] = static_cast<int>(std::lround(row(d)));
    return p;
}

} // namespace

TEST_CASE("classification type follows the three-way rule") {
    const ClassifyThresholds th;
    CHECK(classify_type(u6({0.996, 0.002, 0.001, 0.0005, 0.0004, 0.0001}), th) ==
          ClassificationType::Clear);
    CHECK(classify_type(u6({0.1, 0.12, 0.274, 0.319, 0.107, 0.08}), th) ==
          ClassificationType::Transition);
    CHECK(classify_type(u6({0.45, 0.25, 0.15, 0.10, 0.03, 0.02}), th) ==
          ClassificationType::Predominant);
}

TEST_CASE("the Clear test runs before the Transition test") {
    const ClassifyThresholds th;
    CHECK(classify_type(u6({0.50, 0.40, 0.10, 0, 0, 0}), th) == ClassificationType::Clear);
}

TEST_CASE("continuous score basics") {
    CHECK(continuous_score(u6({1, 0, 0, 0, 0, 0})) == doctest::Approx(1.0));
    CHECK(continuous_score(u6({0, 0, 0, 0, 0, 1})) == doctest::Approx(6.0));
    const double sixth = 1.0 / 6.0;
    CHECK(continuous_score(u6({sixth, sixth, sixth, sixth, sixth, sixth})) ==
          doctest::Approx(3.5));
}

TEST_CASE("continuous score is covariant under a joint permutation") {
    const Eigen::VectorXd u = u6({0.4, 0.3, 0.1, 0.1, 0.05, 0.05});
    double direct = 0;
    const int perm[6] = {2, 0, 5, 1, 3, 4};
    for (int j = 0; j < 6; ++j) direct += u(perm[j]) * (perm[j] + 1);
    CHECK(continuous_score(u) == doctest::Approx(direct));
}

TEST_CASE("certainty endpoints and the published mid case") {
    const double sixth = 1.0 / 6.0;
    CHECK(certainty(u6({sixth, sixth, sixth, sixth, sixth, sixth})) == doctest::Approx(0.0));
    CHECK(certainty(u6({0, 0, 1, 0, 0, 0})) == doctest::Approx(1.0));

    const Eigen::VectorXd u = u6({0.968, 0.0064, 0.0064, 0.0064, 0.0064, 0.0064});
    const double expected =
        oracles::certainty({0.968, 0.0064, 0.0064, 0.0064, 0.0064, 0.0064});
    CHECK(certainty(u) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(certainty(u) - 0.892) < 0.001);
}

TEST_CASE("certainty is invariant under permutation") {
    const Eigen::VectorXd u = u6({0.4, 0.3, 0.1, 0.1, 0.05, 0.05});
    const Eigen::VectorXd v = u6({0.05, 0.1, 0.4, 0.05, 0.3, 0.1});
    CHECK(certainty(u) == doctest::Approx(certainty(v)).epsilon(1e-12));
}

TEST_CASE("certainty bands sit on the documented boundaries") {
    const ClassifyThresholds th;
    CHECK(certainty_band(0.39, th) == CertaintyBand::Low);
    CHECK(certainty_band(0.4, th) == CertaintyBand::Medium);
    CHECK(certainty_band(0.7, th) == CertaintyBand::High);
    CHECK(certainty_band(0.0, th) == CertaintyBand::Low);
    CHECK(certainty_band(1.0, th) == CertaintyBand::High);
}

TEST_CASE("transition labels read primary-secondary") {
    const ClassifyThresholds th;
    const ClassificationRecord rec =
        classify_from_memberships(u6({0.0, 0.0, 0.28, 0.32, 0.2, 0.2}), th);
    CHECK(rec.ctype == ClassificationType::Transition);
    CHECK(rec.primary.code == CefrCode::B2);
    CHECK(rec.secondary.code == CefrCode::B1);
    CHECK(rec.label == "B2-B1");
}

TEST_CASE("clear and predominant records use the primary code alone") {
    const ClassifyThresholds th;
    CHECK(classify_from_memberships(u6({0.9, 0.05, 0.02, 0.01, 0.01, 0.01}), th).label ==
          "A1");
    CHECK(classify_from_memberships(u6({0.45, 0.25, 0.15, 0.10, 0.03, 0.02}), th).label ==
          "A1");
}

TEST_CASE("secondary ties prefer the adjacent level, then the lower ordinal") {
    const ClassifyThresholds th;
    {
        // primary A2; tie between adjacent A1 and non-adjacent B2
        const auto rec = classify_from_memberships(u6({0.3, 0.4, 0.0, 0.3, 0.0, 0.0}), th);
        CHECK(rec.primary.code == CefrCode::A2);
        CHECK(rec.secondary.code == CefrCode::A1);
    }
    {
        // primary B1; both neighbours tie: lower ordinal wins
        const auto rec = classify_from_memberships(u6({0.0, 0.3, 0.4, 0.3, 0.0, 0.0}), th);
        CHECK(rec.primary.code == CefrCode::B1);
        CHECK(rec.secondary.code == CefrCode::A2);
    }
}

TEST_CASE("classify at a rounded centroid is dominated by that level") {
    const OrderedFcmModel model = rounded_reference_model();
    const ClassificationRecord rec =
        classify(model, from_row(model.level_profile(cefr_from_code("B1"))));
    CHECK(rec.primary.code == CefrCode::B1);
    CHECK(rec.ctype == ClassificationType::Clear);
}

TEST_CASE("classify rejects non-six-cluster models") {
    FcmModel base;
    base.config.k = 2;
    base.centroids = Eigen::MatrixXd::Zero(2, kDims);
    base.centroids.row(1).setConstant(2.0);
    const OrderedFcmModel ordered = order_clusters(base);
    CHECK_THROWS_AS(classify(ordered, ProjectVector{}), SchemaError);
}

TEST_CASE("batch of the six centroid points yields one Clear record per level") {
    const OrderedFcmModel model = rounded_reference_model();
    std::vector<ProjectVector> rows;
    for (int level = 1; level <= 6; ++level) {
        rows.push_back(from_row(model.ordered_centroids().row(level - 1).transpose()));
    }
    const BatchResult batch = classify_batch(model, Dataset(rows));
    REQUIRE(batch.records.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(batch.records[static_cast<std::size_t>(i)].ctype == ClassificationType::Clear);
        CHECK(batch.records[static_cast<std::size_t>(i)].primary.ordinal == i + 1);
        CHECK(batch.records[static_cast<std::size_t>(i)].certainty == doctest::Approx(1.0));
    }
    CHECK(batch.summary.n == 6);
    CHECK(batch.summary.type_counts[0] == 6);
}

TEST_CASE("classify agrees exactly with a single-row batch") {
    const OrderedFcmModel model = rounded_reference_model();
    ProjectVector p;
    p.scores = {1, 2, 0, 3, 2, 2, 1, 0, 2};
    const ClassificationRecord a = classify(model, p);
    const BatchResult batch = classify_batch(model, Dataset({p}));
    const ClassificationRecord& b = batch.records[0];
    CHECK(a.label == b.label);
    CHECK(a.score == b.score);
    CHECK(a.certainty == b.certainty);
    CHECK((a.memberships - b.memberships).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("summary percentages add to one hundred") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 120, 0.6, 404);
    const OrderedFcmModel model = rounded_reference_model();
    const BatchResult batch = classify_batch(model, sample.data);
    const auto& s = batch.summary;
    CHECK(s.type_pct(ClassificationType::Clear) + s.type_pct(ClassificationType::Transition) +
              s.type_pct(ClassificationType::Predominant) ==
          doctest::Approx(100.0));
    std::size_t hist_total = 0;
    for (auto c : s.score_histogram) hist_total += c;
    CHECK(hist_total == s.n);
    std::size_t label_total = 0;
    for (const auto& [label, count] : s.label_counts) label_total += count;
    CHECK(label_total == s.n);
}

TEST_CASE("clear records stay within one ordinal of their primary level") {
    // model-generated memberships decay with distance, unlike arbitrary
    // simplex points, so the bound is checked on classified batches
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 400, 0.6, 808);
    const OrderedFcmModel model = rounded_reference_model();
    const BatchResult batch = classify_batch(model, sample.data);
    for (const auto& rec : batch.records) {
        if (rec.ctype != ClassificationType::Clear) continue;
        CHECK(std::abs(rec.score - rec.primary.ordinal) <= 1.0);
    }
}

TEST_CASE("threshold sensitivity limits") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 60, 0.6, 11);
    const OrderedFcmModel model = rounded_reference_model();

    const auto cells =
        threshold_sensitivity(model, sample.data, {0.0}, {0.15});
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].clear_pct == doctest::Approx(100.0));

    // tau_trans -> 0 with tau_clear = 1: transitions are exact top-two ties
    std::vector<ProjectVector> rows;
    ProjectVector tie{}; // all-zeros: generally no exact tie against the model
    rows.push_back(tie);
    const auto tiny = threshold_sensitivity(model, Dataset(rows), {1.0}, {1e-12});
    REQUIRE(tiny.size() == 1);
    CHECK(tiny[0].transition_pct == doctest::Approx(0.0));
    CHECK(tiny[0].clear_pct == doctest::Approx(0.0));
}

TEST_CASE("clear share is non-increasing along the tau_clear grid") {
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 150, 0.6, 123);
    const OrderedFcmModel model = rounded_reference_model();
    std::vector<double> grid;
    for (double t = 0.30; t <= 0.701; t += 0.05) grid.push_back(t);
    const auto cells = threshold_sensitivity(model, sample.data, grid, {0.15});
    REQUIRE(cells.size() == grid.size());
    for (std::size_t i = 1; i < cells.size(); ++i) {
        CHECK(cells[i].clear_pct <= cells[i - 1].clear_pct + 1e-12);
    }
}

TEST_CASE("sensitivity cells reuse one membership pass per dataset") {
    // indirect check: percentages for a repeated threshold pair are identical
    const SyntheticSample sample = synthesize(cefr_reference_centroids(), 40, 0.6, 31);
    const OrderedFcmModel model = rounded_reference_model();
    const auto cells =
        threshold_sensitivity(model, sample.data, {0.5, 0.5}, {0.15});
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].clear_pct == cells[1].clear_pct);
    CHECK(cells[0].transition_pct == cells[1].transition_pct);
}
