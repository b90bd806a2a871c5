#include <benchmark/benchmark.h>

#include "ctlevels/baselines.hpp"
#include "ctlevels/cluster_metrics.hpp"
#include "ctlevels/dataset_io.hpp"
#include "ctlevels/fcm.hpp"
#include "ctlevels/ordering.hpp"
#include "ctlevels/reference_profiles.hpp"
#include "ctlevels/stats.hpp"

using namespace ctlevels;

namespace {

Dataset corpus(int per_cluster) {
    return synthesize(cefr_reference_centroids(), per_cluster, 0.6, 7).data;
}

} // namespace

static void BM_FcmFit(benchmark::State& state) {
    const Dataset data = corpus(static_cast<int>(state.range(0)));
    const Eigen::MatrixXd X = data.to_matrix();
    FcmConfig cfg;
    cfg.seed = 7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit(X, cfg));
    }
    state.SetComplexityN(X.rows());
}
BENCHMARK(BM_FcmFit)->Arg(250)->Arg(500)->Arg(1000)->Complexity();

static void BM_MembershipsBatch(benchmark::State& state) {
    const Dataset data = corpus(500);
    const Eigen::MatrixXd X = data.to_matrix();
    FcmConfig cfg;
    cfg.seed = 7;
    const FcmModel model = fit(X, cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(memberships_batch(model, X));
    }
}
BENCHMARK(BM_MembershipsBatch);

static void BM_Classify(benchmark::State& state) {
    const Dataset data = corpus(500);
    FcmConfig cfg;
    cfg.seed = 7;
    const OrderedFcmModel model = order_clusters(fit(data, cfg));
    ProjectVector p;
    p.scores = {1, 2, 0, 3, 2, 2, 1, 0, 2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(classify(model, p));
    }
}
BENCHMARK(BM_Classify);

static void BM_Silhouette(benchmark::State& state) {
    const Dataset data = corpus(static_cast<int>(state.range(0)));
    const Eigen::MatrixXd X = data.to_matrix();
    FcmConfig cfg;
    cfg.seed = 7;
    const auto labels = argmax_labels(memberships_batch(fit(X, cfg), X));
    for (auto _ : state) {
        benchmark::DoNotOptimize(silhouette(X, labels));
    }
    state.SetComplexityN(X.rows());
}
BENCHMARK(BM_Silhouette)->Arg(100)->Arg(200)->Arg(400)->Complexity();

static void BM_RankCorrelationLattice(benchmark::State& state) {
    const Dataset data = corpus(1000);
    std::vector<double> levels(data.size()), dim(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        levels[i] = static_cast<double>(1 + data[i].total() * 6 / 37);
        dim[i] = static_cast<double>(data[i].scores[3]);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(rank_correlations(levels, dim));
    }
}
BENCHMARK(BM_RankCorrelationLattice);

static void BM_MiniBatchKMeans(benchmark::State& state) {
    const Dataset data = corpus(1000);
    const Eigen::MatrixXd X = data.to_matrix();
    KMeansConfig cfg;
    cfg.seed = 7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(minibatch_kmeans(X, cfg));
    }
}
BENCHMARK(BM_MiniBatchKMeans);

BENCHMARK_MAIN();
