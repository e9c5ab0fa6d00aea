#include "riskgraph/labels.hpp"

#include "riskgraph/errors.hpp"
#include "riskgraph/io.hpp"
#include "riskgraph/rng.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace riskgraph::labels {

using nlohmann::json;

NormalizeResult normalize_features(const Eigen::MatrixXd& points) {
    if (points.rows() < 2) throw ParameterError("normalize_features needs >= 2 points");
    NormalizeResult out;
    out.values.resizeLike(points);
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        const double mn = points.col(c).minCoeff();
        const double mx = points.col(c).maxCoeff();
        if (mx > mn) {
            const double mid = 0.5 * (mx + mn);
            out.values.col(c) = 2.0 * (points.col(c).array() - mid) / (mx - mn);
        } else {
            out.values.col(c).setZero();
            out.constant_columns.push_back(static_cast<int>(c));
        }
    }
    return out;
}

namespace {

double sqdist(const Eigen::MatrixXd& X, Eigen::Index i, const Eigen::RowVectorXd& c) {
    return (X.row(i) - c).squaredNorm();
}

struct LloydRun {
    std::vector<int> assign;
    Eigen::MatrixXd centroids;
    double rss = 0.0;
    std::vector<double> trace;
};

LloydRun lloyd_once(const Eigen::MatrixXd& X, int k, Rng& rng, int max_iterations) {
    const Eigen::Index n = X.rows();
    const Eigen::Index dim = X.cols();

    // k-means++ seeding
    Eigen::MatrixXd centroids(k, dim);
    centroids.row(0) = X.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n))));
    Eigen::VectorXd d2(n);
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = sqdist(X, i, centroids.row(0));
    for (int j = 1; j < k; ++j) {
        const double total = d2.sum();
        Eigen::Index pick;
        if (total > 0.0) {
            const double r = u01(rng) * total;
            double cum = 0.0;
            pick = n - 1; // guards float slop at the far end
            for (Eigen::Index i = 0; i < n; ++i) {
                cum += d2(i);
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        }
        centroids.row(j) = X.row(pick);
        for (Eigen::Index i = 0; i < n; ++i)
            d2(i) = std::min(d2(i), sqdist(X, i, centroids.row(j)));
    }

    LloydRun run;
    run.assign.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> prev = run.assign;
    for (int iter = 0; iter < max_iterations; ++iter) {
        // assignment step (nearest centroid, ties to the smaller index)
        double obj = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sqdist(X, i, centroids.row(0));
            for (int c = 1; c < k; ++c) {
                const double d = sqdist(X, i, centroids.row(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            run.assign[static_cast<std::size_t>(i)] = best;
            obj += best_d;
        }
        if (!run.trace.empty() && obj > run.trace.back() + 1e-9 * (1.0 + run.trace.back()))
            throw Error("kmeans objective increased between iterations"); // invariant breach
        run.trace.push_back(obj);
        if (run.assign == prev) break;
        prev = run.assign;

        // update step
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, dim);
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(run.assign[static_cast<std::size_t>(i)]) += X.row(i);
            ++counts[static_cast<std::size_t>(run.assign[static_cast<std::size_t>(i)])];
        }
        std::set<Eigen::Index> taken; // points already used to reseed
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            }
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            // empty cluster: reseed at the point farthest from its centroid
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (taken.count(i)) continue;
                const double d = sqdist(X, i, centroids.row(run.assign[static_cast<std::size_t>(i)]));
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            centroids.row(c) = X.row(far);
            taken.insert(far);
        }
    }
    run.centroids = std::move(centroids);
    run.rss = run.trace.empty() ? 0.0 : run.trace.back();
    return run;
}

} // namespace

ClusteringResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        const KmeansOptions& opts) {
    const Eigen::Index n = points.rows();
    if (k < 1) throw ParameterError("kmeans: k must be >= 1");
    if (n < 1 || k > n)
        throw ParameterError("kmeans: k = " + std::to_string(k) + " exceeds point count " +
                             std::to_string(n));

    LloydRun best;
    bool have = false;
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        LloydRun run = lloyd_once(points, k, rng, opts.max_iterations);
        if (opts.traces) opts.traces->push_back(run.trace);
        if (!have || run.rss < best.rss) {
            best = std::move(run);
            have = true;
        }
    }

    ClusteringResult result;
    result.k = k;
    result.assignments = std::move(best.assign);
    result.centroids = std::move(best.centroids);
    result.rss = best.rss;
    result.seed = seed;

    std::set<int> distinct(result.assignments.begin(), result.assignments.end());
    result.silhouette =
        distinct.size() >= 2 ? silhouette(points, result.assignments).mean : 0.0;
    return result;
}

double rss(const Eigen::MatrixXd& points, const ClusteringResult& result) {
    if (static_cast<std::size_t>(points.rows()) != result.assignments.size())
        throw ParameterError("rss: points/assignments size mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const int c = result.assignments[static_cast<std::size_t>(i)];
        if (c < 0 || c >= result.centroids.rows())
            throw ParameterError("rss: assignment references a missing centroid");
        sum += (points.row(i) - result.centroids.row(c)).squaredNorm();
    }
    return sum;
}

SilhouetteResult silhouette(const Eigen::MatrixXd& points, const std::vector<int>& assignments) {
    const Eigen::Index n = points.rows();
    if (static_cast<std::size_t>(n) != assignments.size())
        throw ParameterError("silhouette: points/assignments size mismatch");

    // remap present cluster ids to 0..k-1
    std::set<int> present(assignments.begin(), assignments.end());
    if (present.size() < 2)
        throw ParameterError("silhouette undefined for a single cluster");
    std::vector<int> ids(present.begin(), present.end());
    std::vector<int> cluster(assignments.size());
    std::vector<Eigen::Index> size(ids.size(), 0);
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        const auto pos = std::lower_bound(ids.begin(), ids.end(), assignments[i]) - ids.begin();
        cluster[i] = static_cast<int>(pos);
        ++size[static_cast<std::size_t>(pos)];
    }
    const std::size_t k = ids.size();

    SilhouetteResult res;
    res.values.resize(static_cast<std::size_t>(n), 0.0);
    double total = 0.0;
    std::vector<double> mean_d(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = cluster[static_cast<std::size_t>(i)];
        if (size[static_cast<std::size_t>(own)] == 1) {
            res.values[static_cast<std::size_t>(i)] = 0.0; // singleton convention
            continue;
        }
        std::fill(mean_d.begin(), mean_d.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            mean_d[static_cast<std::size_t>(cluster[static_cast<std::size_t>(j)])] +=
                (points.row(i) - points.row(j)).norm();
        }
        double a = 0.0;
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (static_cast<int>(c) == own) {
                a = mean_d[c] / static_cast<double>(size[c] - 1); // excludes self
            } else if (size[c] > 0) {
                b = std::min(b, mean_d[c] / static_cast<double>(size[c]));
            }
        }
        const double denom = std::max(a, b);
        const double s = denom > 0.0 ? (b - a) / denom : 0.0;
        res.values[static_cast<std::size_t>(i)] = s;
        total += s;
    }
    for (double s : res.values) {
        if (!(s >= -1.0 && s <= 1.0)) throw Error("silhouette value outside [-1, 1]");
    }
    total = std::accumulate(res.values.begin(), res.values.end(), 0.0);
    res.mean = total / static_cast<double>(n);
    return res;
}

KpcaResult kpca_project(const Eigen::MatrixXd& points, double gamma, int m) {
    const Eigen::Index n = points.rows();
    if (n < 2) throw ParameterError("kpca_project needs >= 2 points");
    if (!(gamma > 0.0)) throw ParameterError("kpca_project: gamma must be positive");
    if (m < 1) throw ParameterError("kpca_project: m must be >= 1");

    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = std::exp(-gamma * (points.row(i) - points.row(j)).squaredNorm());
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    // double centering
    const Eigen::VectorXd row_mean = K.rowwise().mean();
    const double grand = row_mean.mean();
    Eigen::MatrixXd Kc = K;
    Kc.colwise() -= row_mean;
    Kc.rowwise() -= row_mean.transpose();
    Kc.array() += grand;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Kc);
    if (eig.info() != Eigen::Success) throw Error("kpca eigendecomposition failed");
    const Eigen::VectorXd& evals = eig.eigenvalues(); // ascending
    const double lam_max = evals(n - 1);
    const double tol = std::max(lam_max, 0.0) * 1e-10;

    std::vector<Eigen::Index> kept_idx; // descending eigenvalue order
    double positive_mass = 0.0;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        if (evals(i) > tol && evals(i) > 0.0) {
            positive_mass += evals(i);
            if (static_cast<int>(kept_idx.size()) < m) kept_idx.push_back(i);
        }
    }

    KpcaResult out;
    out.requested = m;
    out.kept = static_cast<int>(kept_idx.size());
    out.projected.resize(n, out.kept);
    out.eigenvalues.resize(out.kept);
    double kept_mass = 0.0;
    for (int c = 0; c < out.kept; ++c) {
        const Eigen::Index i = kept_idx[static_cast<std::size_t>(c)];
        Eigen::VectorXd v = eig.eigenvectors().col(i);
        // deterministic sign: the largest-|entry| coordinate is positive,
        // later index wins ties
        Eigen::Index pin = 0;
        for (Eigen::Index r = 1; r < n; ++r)
            if (std::abs(v(r)) >= std::abs(v(pin))) pin = r;
        if (v(pin) < 0.0) v = -v;
        out.projected.col(c) = std::sqrt(evals(i)) * v;
        out.eigenvalues(c) = evals(i);
        kept_mass += evals(i);
    }
    out.retained_mass = positive_mass > 0.0 ? kept_mass / positive_mass : 0.0;
    return out;
}

double kpca_default_gamma(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    if (n < 2) throw ParameterError("kpca_default_gamma needs >= 2 points");
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d2.push_back((points.row(i) - points.row(j)).squaredNorm());
    auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
    std::nth_element(d2.begin(), mid, d2.end());
    const double median = *mid;
    return median > 0.0 ? 1.0 / (2.0 * median) : 1.0;
}

int choose_k(const std::vector<double>& sc_values, int k_min) {
    if (sc_values.empty()) throw ParameterError("choose_k: empty silhouette row");
    std::size_t best = 0;
    for (std::size_t i = 1; i < sc_values.size(); ++i)
        if (sc_values[i] > sc_values[best]) best = i; // strict: ties keep the smaller k
    return k_min + static_cast<int>(best);
}

SelectKResult select_k(const Eigen::MatrixXd& points, int k_min, int k_max, std::uint64_t seed) {
    if (k_min < 2) throw ParameterError("select_k: k_min must be >= 2");
    if (k_max < k_min) throw ParameterError("select_k: empty k range");
    k_max = std::min<int>(k_max, static_cast<int>(points.rows()));
    if (k_max < k_min) throw ParameterError("select_k: fewer points than k_min");

    SelectKResult out;
    std::vector<double> sc;
    for (int k = k_min; k <= k_max; ++k) {
        const ClusteringResult r = kmeans(points, k, seed);
        out.table.push_back({k, r.rss, r.silhouette});
        sc.push_back(r.silhouette);
    }
    out.k = choose_k(sc, k_min);
    return out;
}

RiskLabelSet to_risk_levels(const ClusteringResult& result,
                            const std::vector<double>& response_ax) {
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < response_ax.size(); ++i)
        if (response_ax[i] < 0.0) neg.push_back(i);
    if (neg.empty())
        throw ValidationError("all scenes have non-negative response ax; risk levels undefined");
    if (neg.size() != result.assignments.size())
        throw ParameterError("to_risk_levels: clustering does not cover the negative-ax scenes");

    const int k = result.k;
    std::vector<double> mean_ax(static_cast<std::size_t>(k), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < neg.size(); ++i) {
        const int c = result.assignments[i];
        if (c < 0 || c >= k) throw ParameterError("to_risk_levels: assignment out of range");
        mean_ax[static_cast<std::size_t>(c)] += response_ax[neg[i]];
        ++count[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
        if (count[static_cast<std::size_t>(c)] == 0)
            throw ValidationError("to_risk_levels: cluster " + std::to_string(c) + " is empty");
        mean_ax[static_cast<std::size_t>(c)] /= static_cast<double>(count[static_cast<std::size_t>(c)]);
    }

    // ascending mean ax: hardest braking first -> level 1
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return mean_ax[static_cast<std::size_t>(a)] < mean_ax[static_cast<std::size_t>(b)]; });
    std::vector<int> level_of(static_cast<std::size_t>(k));
    for (int rank = 0; rank < k; ++rank)
        level_of[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] = rank + 1;

    RiskLabelSet out;
    out.level_count = k + 1;
    out.levels.assign(response_ax.size(), k + 1);
    for (std::size_t i = 0; i < neg.size(); ++i)
        out.levels[neg[i]] = level_of[static_cast<std::size_t>(result.assignments[i])];
    return out;
}

std::string write_labels_json(const LabelsFile& f) {
    if (f.refs.size() != f.labels.levels.size())
        throw ParameterError("labels file: refs/levels size mismatch");
    json entries = json::array();
    for (std::size_t i = 0; i < f.refs.size(); ++i)
        entries.push_back({{"scene_ref", f.refs[i]}, {"level", f.labels.levels[i]}});
    json j{{"k", f.k},           {"level_count", f.labels.level_count},
           {"feature", f.feature}, {"seed", f.seed},
           {"digest", f.digest},   {"labels", std::move(entries)}};
    return j.dump(2) + "\n";
}

LabelsFile read_labels_json(const std::string& text) {
    LabelsFile f;
    try {
        const json j = json::parse(text);
        f.k = j.at("k").get<int>();
        f.labels.level_count = j.at("level_count").get<int>();
        f.feature = j.at("feature").get<std::string>();
        f.seed = j.at("seed").get<std::uint64_t>();
        f.digest = j.at("digest").get<std::string>();
        for (const json& e : j.at("labels")) {
            f.refs.push_back(e.at("scene_ref").get<std::string>());
            f.labels.levels.push_back(e.at("level").get<int>());
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad labels JSON: ") + e.what());
    }
    if (f.labels.level_count != f.k + 1)
        throw ValidationError("labels file: level_count must be k + 1");
    for (int lv : f.labels.levels)
        if (lv < 1 || lv > f.labels.level_count)
            throw ValidationError("labels file: level outside 1..level_count");
    if (f.labels.levels.empty()) throw EmptyInputError("labels file: no entries");
    return f;
}

std::string diag_table_csv(const std::vector<KTableRow>& table) {
    std::string out = "k,rss,silhouette\n";
    for (const KTableRow& r : table)
        out += std::to_string(r.k) + ',' + io::format_double(r.rss) + ',' +
               io::format_double(r.silhouette) + '\n';
    return out;
}

} // namespace riskgraph::labels
