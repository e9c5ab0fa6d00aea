#pragma once

// Shared fixtures and brute-force reference implementations for the test
// binaries. Everything here is deliberately naive: the point is to check
// the optimized library code against implementations simple enough to be
// obviously right.

#include "riskgraph/rng.hpp"
#include "riskgraph/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

namespace testsupport {

// ---------------------------------------------------------------------
// scratch directory, wiped on destruction
class TempDir {
  public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("riskgraph_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

// ---------------------------------------------------------------------
// random labeled graphs
//
// Valid per the SceneGraph invariants: node 0 is the host, ids packed,
// edges sorted unordered pairs, no isolated non-host node. Connectivity
// is whatever falls out of attach-to-a-random-earlier-node plus extra
// random edges, so shortest-path structure varies.
inline riskgraph::SceneGraph random_graph(riskgraph::Rng& rng, int min_nodes, int max_nodes,
                                          int label_count = 30) {
    using riskgraph::uniform_index;
    riskgraph::SceneGraph g;
    const int n = min_nodes + static_cast<int>(uniform_index(
                                  rng, static_cast<std::uint64_t>(max_nodes - min_nodes + 1)));
    g.scene_ref = "random#" + std::to_string(rng() % 100000);
    for (int i = 0; i < n; ++i) {
        riskgraph::SceneGraphNode node;
        node.id = i;
        node.label = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(label_count)));
        node.host = (i == 0);
        g.nodes.push_back(node);
    }
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i < n; ++i) {
        const int j = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(i)));
        edges.emplace_back(std::min(i, j), std::max(i, j));
    }
    const int extra = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n + 1)));
    for (int e = 0; e < extra && n >= 2; ++e) {
        const int a = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        int b = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        if (a == b) continue;
        edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    return g;
}

/// Random node reindexing of `g`: same abstract graph, different ids and
/// storage order. Intentionally breaks the host-first canonical order.
inline riskgraph::SceneGraph permute_graph(riskgraph::Rng& rng, const riskgraph::SceneGraph& g) {
    const int n = static_cast<int>(g.nodes.size());
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    riskgraph::shuffle(rng, perm);

    riskgraph::SceneGraph out;
    out.scene_ref = g.scene_ref;
    out.nodes.resize(g.nodes.size());
    for (int i = 0; i < n; ++i) {
        riskgraph::SceneGraphNode node = g.nodes[static_cast<std::size_t>(i)];
        node.id = perm[static_cast<std::size_t>(i)];
        out.nodes[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = node;
    }
    for (const auto& [u, v] : g.edges) {
        const int pu = perm[static_cast<std::size_t>(u)];
        const int pv = perm[static_cast<std::size_t>(v)];
        out.edges.emplace_back(std::min(pu, pv), std::max(pu, pv));
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

// ---------------------------------------------------------------------
// graph oracles

/// Hop distances from every node by plain breadth-first search.
/// unreachable = -1.
inline std::vector<std::vector<int>> bfs_all_pairs(const riskgraph::SceneGraph& g) {
    const std::size_t n = g.nodes.size();
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : g.edges) {
        adj[static_cast<std::size_t>(u)].push_back(v);
        adj[static_cast<std::size_t>(v)].push_back(u);
    }
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<int> queue{static_cast<int>(s)};
        dist[s][s] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int u = queue[head];
            for (int v : adj[static_cast<std::size_t>(u)]) {
                if (dist[s][static_cast<std::size_t>(v)] < 0) {
                    dist[s][static_cast<std::size_t>(v)] = dist[s][static_cast<std::size_t>(u)] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return dist;
}

/// Shortest-path kernel, raw (unnormalized), as the literal double sum
/// over entry pairs: [d == d'] * [unordered endpoint labels match].
inline double spgk_raw_bruteforce(const riskgraph::SceneGraph& g1,
                                  const riskgraph::SceneGraph& g2) {
    struct Entry {
        int d, la, lb; // la <= lb
    };
    auto entries = [](const riskgraph::SceneGraph& g) {
        const auto dist = bfs_all_pairs(g);
        std::vector<Entry> out;
        const int n = static_cast<int>(g.nodes.size());
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v) {
                const int d = dist[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
                if (d < 1) continue;
                int la = g.nodes[static_cast<std::size_t>(u)].label;
                int lb = g.nodes[static_cast<std::size_t>(v)].label;
                if (la > lb) std::swap(la, lb);
                out.push_back({d, la, lb});
            }
        return out;
    };
    const auto e1 = entries(g1);
    const auto e2 = entries(g2);
    double sum = 0.0;
    for (const Entry& a : e1)
        for (const Entry& b : e2)
            if (a.d == b.d && a.la == b.la && a.lb == b.lb) sum += 1.0;
    return sum;
}

/// Step-by-step neighborhood-hash kernel reference. Independent of the
/// library: adjacency via an id->neighbors map, label histograms via
/// std::map, common-count via min of per-label counts. Shares only the
/// definition of the seeded initial hash (spelled out here in full).
inline double nhgk_reference(const riskgraph::SceneGraph& g1, const riskgraph::SceneGraph& g2,
                             int h, int bits, std::uint64_t seed) {
    const std::uint64_t mask =
        bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
    auto init_hash = [&](int label) {
        std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(label) + 1));
        // SplitMix64 finalizer, written out
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z = z ^ (z >> 31);
        return z & mask;
    };
    auto histories = [&](const riskgraph::SceneGraph& g) {
        std::map<int, std::vector<int>> adj;
        for (const auto& node : g.nodes) adj[node.id]; // ensure entry
        for (const auto& [u, v] : g.edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        std::map<int, std::uint64_t> label;
        for (const auto& node : g.nodes) label[node.id] = init_hash(node.label);
        std::vector<std::map<std::uint64_t, int>> hist;
        for (int it = 0; it < h; ++it) {
            std::map<int, std::uint64_t> next;
            for (const auto& [id, neigh] : adj) {
                const std::uint64_t own = label.at(id);
                std::uint64_t acc = ((own << 1) | (own >> (bits - 1))) & mask;
                for (int other : neigh) acc ^= label.at(other);
                next[id] = acc;
            }
            label = next;
            std::map<std::uint64_t, int> counts;
            for (const auto& [id, l] : label) counts[l] += 1;
            hist.push_back(std::move(counts));
        }
        return hist;
    };
    const auto h1 = histories(g1);
    const auto h2 = histories(g2);
    double sum = 0.0;
    for (int it = 0; it < h; ++it) {
        int common = 0;
        for (const auto& [l, c] : h1[static_cast<std::size_t>(it)]) {
            auto found = h2[static_cast<std::size_t>(it)].find(l);
            if (found != h2[static_cast<std::size_t>(it)].end())
                common += std::min(c, found->second);
        }
        const double denom =
            static_cast<double>(g1.nodes.size() + g2.nodes.size()) - static_cast<double>(common);
        sum += static_cast<double>(common) / denom;
    }
    return sum / static_cast<double>(h);
}

// ---------------------------------------------------------------------
// clustering oracles

inline double rss_bruteforce(const Eigen::MatrixXd& points, const std::vector<int>& assign,
                             const Eigen::MatrixXd& centroids) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Eigen::Index c = assign[static_cast<std::size_t>(i)];
        for (Eigen::Index d = 0; d < points.cols(); ++d) {
            const double diff = points(i, d) - centroids(c, d);
            total += diff * diff;
        }
    }
    return total;
}

/// O(n^2) silhouette straight from the definition. Returns per-point
/// values; cluster ids may be arbitrary ints.
inline std::vector<double> silhouette_bruteforce(const Eigen::MatrixXd& points,
                                                 const std::vector<int>& assign) {
    const Eigen::Index n = points.rows();
    auto dist = [&](Eigen::Index i, Eigen::Index j) {
        return (points.row(i) - points.row(j)).norm();
    };
    std::map<int, int> sizes;
    for (int a : assign) sizes[a] += 1;

    std::vector<double> s(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = assign[static_cast<std::size_t>(i)];
        if (sizes[own] == 1) {
            s[static_cast<std::size_t>(i)] = 0.0;
            continue;
        }
        std::map<int, double> sum;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) sum[assign[static_cast<std::size_t>(j)]] += dist(i, j);
        const double a = sum[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [cluster, total] : sum)
            if (cluster != own) b = std::min(b, total / static_cast<double>(sizes[cluster]));
        const double m = std::max(a, b);
        s[static_cast<std::size_t>(i)] = m > 0.0 ? (b - a) / m : 0.0;
    }
    return s;
}

/// Adjusted Rand index between two labelings of the same points.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    std::map<std::pair<int, int>, long long> cell;
    std::map<int, long long> ra, rb;
    for (std::size_t i = 0; i < n; ++i) {
        cell[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    auto choose2 = [](long long m) { return static_cast<double>(m) * static_cast<double>(m - 1) / 2.0; };
    double sum_cell = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [k, v] : cell) sum_cell += choose2(v);
    for (const auto& [k, v] : ra) sum_a += choose2(v);
    for (const auto& [k, v] : rb) sum_b += choose2(v);
    const double total = choose2(static_cast<long long>(n));
    const double expected = sum_a * sum_b / total;
    const double max_index = (sum_a + sum_b) / 2.0;
    if (max_index == expected) return 1.0; // both labelings trivial
    return (sum_cell - expected) / (max_index - expected);
}

// ---------------------------------------------------------------------
// dense QP reference for the SVM dual
//
//   min 1/2 a'Qa - e'a   s.t.  0 <= a <= C,  y'a = 0,   Q = yy' .* K
//
// Projected gradient with the exact Lipschitz step. The projection onto
// box-intersect-hyperplane clips a(lambda) = clip(z + lambda*y) and
// bisects on lambda: y' clip(z + lambda y) is nondecreasing in lambda.
struct QpReference {
    std::vector<double> alpha;
    double objective = 0.0;
};

inline QpReference qp_reference(const Eigen::MatrixXd& K, const std::vector<int>& y, double C,
                                int iterations = 400000) {
    const Eigen::Index n = K.rows();
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd Q = (yv * yv.transpose()).cwiseProduct(K);

    auto project = [&](Eigen::VectorXd z) {
        double lo = -1e12, hi = 1e12;
        auto balance = [&](double lambda) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double v = std::clamp(z(i) + lambda * yv(i), 0.0, C);
                s += yv(i) * v;
            }
            return s;
        };
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (balance(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        const double lambda = 0.5 * (lo + hi);
        for (Eigen::Index i = 0; i < n; ++i) z(i) = std::clamp(z(i) + lambda * yv(i), 0.0, C);
        return z;
    };

    // Lipschitz constant of the gradient; trace bounds the spectral radius
    double L = Q.trace();
    if (L <= 0.0) L = 1.0;
    const double step = 1.0 / L;

    Eigen::VectorXd a = project(Eigen::VectorXd::Zero(n));
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd grad = Q * a - Eigen::VectorXd::Ones(n);
        a = project(a - step * grad);
    }
    QpReference out;
    out.alpha.assign(a.data(), a.data() + n);
    out.objective = 0.5 * a.dot(Q * a) - a.sum();
    return out;
}

} // namespace testsupport
