// Microbenchmarks for the hot paths: single kernel evaluations, Gram
// assembly, clustering, and the SMO solver. Not wired into ctest; run the
// binary directly.

#include "riskgraph/classify.hpp"
#include "riskgraph/kernels.hpp"
#include "riskgraph/labels.hpp"
#include "riskgraph/rng.hpp"
#include "riskgraph/types.hpp"

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace {

using namespace riskgraph;

// Random valid scene graph: node 0 is the host, every later node attaches
// to an earlier one, plus a sprinkle of extra edges.
SceneGraph make_graph(Rng& rng, int nodes) {
    SceneGraph g;
    g.scene_ref = "bench";
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < nodes; ++i) {
        g.nodes.push_back({i, 1 + static_cast<int>(uniform_index(rng, 30)), i == 0});
        if (i > 0) {
            const int j = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(i)));
            edges.emplace_back(j, i);
        }
    }
    for (int extra = 0; extra < nodes / 3; ++extra) {
        const int u = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(nodes)));
        const int v = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(nodes)));
        if (u == v) continue;
        edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    return g;
}

std::vector<SceneGraph> make_corpus(int count, int nodes) {
    Rng rng(4242ull);
    std::vector<SceneGraph> graphs;
    graphs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) graphs.push_back(make_graph(rng, nodes));
    return graphs;
}

void bm_spgk_pair(benchmark::State& state) {
    Rng rng(1ull);
    const SceneGraph a = make_graph(rng, static_cast<int>(state.range(0)));
    const SceneGraph b = make_graph(rng, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::spgk(a, b));
}
BENCHMARK(bm_spgk_pair)->Arg(10)->Arg(20)->Arg(30);

void bm_nhgk_pair(benchmark::State& state) {
    Rng rng(2ull);
    const SceneGraph a = make_graph(rng, static_cast<int>(state.range(0)));
    const SceneGraph b = make_graph(rng, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::nhgk(a, b, 3, 16, 7));
}
BENCHMARK(bm_nhgk_pair)->Arg(10)->Arg(20)->Arg(30);

void bm_gram(benchmark::State& state, const char* kernel) {
    const auto graphs = make_corpus(static_cast<int>(state.range(0)), 15);
    kernels::KernelConfig cfg;
    cfg.name = kernel;
    for (auto _ : state) benchmark::DoNotOptimize(kernels::gram_matrix(graphs, cfg));
}
BENCHMARK_CAPTURE(bm_gram, spgk, "spgk")->Arg(50)->Arg(100);
BENCHMARK_CAPTURE(bm_gram, nhgk, "nhgk")->Arg(50)->Arg(100);

void bm_kmeans(benchmark::State& state) {
    Rng rng(3ull);
    const int n = static_cast<int>(state.range(0));
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) {
        const int mode = i % 3;
        pts(i, 0) = normal(rng, 4.0 * mode, 0.4);
        pts(i, 1) = normal(rng, -2.0 * mode, 0.4);
    }
    for (auto _ : state) benchmark::DoNotOptimize(labels::kmeans(pts, 3, 99ull));
}
BENCHMARK(bm_kmeans)->Arg(150)->Arg(450);

void bm_smo(benchmark::State& state) {
    Rng rng(4ull);
    const int n = static_cast<int>(state.range(0));
    Eigen::MatrixXd x(n, 2);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int side = i % 2 == 0 ? 1 : -1;
        x(i, 0) = 3.0 * side + normal(rng, 0.0, 0.5);
        x(i, 1) = normal(rng, 0.0, 0.5);
        y[static_cast<std::size_t>(i)] = side;
    }
    const Eigen::MatrixXd k = x * x.transpose();
    const Eigen::MatrixXd sym = (k + k.transpose()) / 2.0;
    for (auto _ : state) benchmark::DoNotOptimize(classify::smo_solve(sym, y, 1.0));
}
BENCHMARK(bm_smo)->Arg(50)->Arg(200);

} // namespace

BENCHMARK_MAIN();
