#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace riskgraph::labels {

struct NormalizeResult {
    Eigen::MatrixXd values;
    std::vector<int> constant_columns; ///< mapped to all zeros (max = min)
};

/// Per-column affine map 2*(x - (max+min)/2)/(max - min): column extrema
/// land exactly on -1/+1. Constant columns become zeros and are reported.
NormalizeResult normalize_features(const Eigen::MatrixXd& points);

struct ClusteringResult {
    int k = 0;
    std::vector<int> assignments; ///< per point, 0..k-1
    Eigen::MatrixXd centroids;    ///< k x dim
    double rss = 0.0;
    double silhouette = 0.0; ///< mean silhouette; 0 when fewer than 2 clusters materialize
    std::uint64_t seed = 0;
};

struct KmeansOptions {
    int max_iterations = 300;
    int restarts = 10;
    /// When set, receives the per-iteration RSS trace of every restart
    /// (outer index = restart). Each trace is non-increasing.
    std::vector<std::vector<double>>* traces = nullptr;
};

/// Lloyd's algorithm with k-means++ seeding, run `restarts` times with
/// sub-seeds derived from `seed`; best final RSS wins. A cluster emptied
/// during iteration is reseeded at the point farthest from its centroid.
ClusteringResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        const KmeansOptions& opts = {});

/// Within-cluster sum of squared distances to the stored centroids.
double rss(const Eigen::MatrixXd& points, const ClusteringResult& result);

struct SilhouetteResult {
    std::vector<double> values;
    double mean = 0.0;
};

/// Per-point silhouette (b - a) / max(a, b): a = mean distance to own
/// cluster excluding self, b = smallest mean distance to another cluster.
/// Singleton-cluster points score 0. Requires at least two non-empty
/// clusters (ParameterError otherwise).
SilhouetteResult silhouette(const Eigen::MatrixXd& points, const std::vector<int>& assignments);

struct KpcaResult {
    Eigen::MatrixXd projected;   ///< n x kept, columns ordered by descending eigenvalue
    Eigen::VectorXd eigenvalues; ///< the kept eigenvalues
    double retained_mass = 0.0;  ///< kept eigenvalue mass / total positive mass
    int requested = 0;
    int kept = 0; ///< < requested means the centered kernel ran out of rank
};

/// RBF kernel PCA: K_ij = exp(-gamma ||xi - xj||^2), double-centered, top-m
/// eigenpairs; training projections are eigenvectors scaled by sqrt of the
/// eigenvalue. Eigenvector sign is pinned (largest-|entry| coordinate made
/// positive, later index winning ties) so projections are deterministic.
KpcaResult kpca_project(const Eigen::MatrixXd& points, double gamma, int m);

/// Median heuristic: 1 / (2 * median of pairwise squared distances).
double kpca_default_gamma(const Eigen::MatrixXd& points);

struct KTableRow {
    int k = 0;
    double rss = 0.0;
    double silhouette = 0.0;
};

struct SelectKResult {
    int k = 0;
    std::vector<KTableRow> table;
};

/// Cluster for every k in [k_min, k_max], returning the full RSS/SC table
/// (for elbow inspection) and the chosen k = argmax silhouette,
/// ties to the smaller k.
SelectKResult select_k(const Eigen::MatrixXd& points, int k_min, int k_max, std::uint64_t seed);

/// The selection rule alone, applied to a silhouette row for consecutive
/// k starting at k_min: argmax, ties to the smaller k.
int choose_k(const std::vector<double>& sc_values, int k_min = 2);

/// Discrete per-scene risk levels. Level 1 = cluster with the most
/// negative mean response ax (hardest braking); level k+1 = scenes whose
/// response ax is non-negative ("not dangerous", never clustered).
struct RiskLabelSet {
    std::vector<int> levels; ///< per scene, 1..level_count
    int level_count = 0;     ///< clustering k + 1
};

/// Map a clustering of the negative-response scenes onto all scenes.
/// `result` must come from clustering exactly the response_ax < 0 subset,
/// in order of appearance.
RiskLabelSet to_risk_levels(const ClusteringResult& result,
                            const std::vector<double>& response_ax);

/// Labels artifact: {"k", "level_count", "feature", "seed", "digest",
/// "labels": [{"scene_ref", "level"}, ...]}.
struct LabelsFile {
    RiskLabelSet labels;
    std::vector<std::string> refs; ///< scene_ref per entry, aligned with levels
    int k = 0;
    std::string feature = "one";
    std::uint64_t seed = 0;
    std::string digest;
};

std::string write_labels_json(const LabelsFile& f);
LabelsFile read_labels_json(const std::string& text);

/// Diagnostics table "k,rss,silhouette" with one row per clustered k.
std::string diag_table_csv(const std::vector<KTableRow>& table);

} // namespace riskgraph::labels
