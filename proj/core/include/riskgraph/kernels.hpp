#pragma once

#include "riskgraph/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace riskgraph::kernels {

struct SpEntry {
    int u = 0, v = 0; ///< node ids, u < v
    int d = 0;        ///< hop count, >= 1
};

/// Shortest-path transform: every unordered node pair at finite hop-count
/// distance, plus the original node labels. Unreachable pairs are omitted.
struct ShortestPathGraph {
    std::vector<int> labels; ///< node label by id
    std::vector<SpEntry> entries;
};

/// All-pairs hop distances via Floyd-Warshall on unit edge weights.
ShortestPathGraph shortest_paths(const SceneGraph& g);

struct KernelConfig {
    std::string name = "spgk"; ///< spgk | nhgk | linear (vector features)
    int h = 3;                 ///< nhgk iterations
    int bits = 16;             ///< nhgk hash width, 8..64
    std::uint64_t seed = 7;    ///< nhgk label-hash seed
    bool normalize = true;     ///< spgk unit-diagonal normalization

    /// Canonical JSON rendering, the digesting/serialization identity.
    std::string to_json() const;
    static KernelConfig from_json(const std::string& text);
};

/// Shortest-path kernel: count entry pairs agreeing in distance and in the
/// unordered endpoint-label pair; normalized to k/sqrt(k11*k22) unless
/// normalize = false. A graph with no path entries (single node) has self
/// kernel 0 and the normalized value is defined as 0.
double spgk(const SceneGraph& g1, const SceneGraph& g2, bool normalize = true);

/// Neighborhood-hash kernel: node labels are seeded D-bit hashes of the
/// cell labels, updated h times by ROL1(own) XOR (XOR of neighbors); after
/// each iteration i the label-multiset intersection size c_i contributes
/// c_i / (|V| + |V'| - c_i), averaged over iterations.
double nhgk(const SceneGraph& g1, const SceneGraph& g2, int h, int bits, std::uint64_t seed);

struct KernelMatrix {
    Eigen::MatrixXd values;
    KernelConfig config;
    std::vector<std::string> refs; ///< row identities (scene refs)
    std::string digest;            ///< config digest stamped by the producer

    int n() const { return static_cast<int>(values.rows()); }
};

struct PsdReport {
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    bool ok = false;
};

/// Symmetry (1e-12) and positive-semidefiniteness check
/// (min eigenvalue >= -1e-8 * max eigenvalue). For matrices too large for
/// a dense eigendecomposition the PSD side falls back to a shifted
/// Cholesky probe. Throws ValidationError with the offending eigenvalue
/// when `strict`.
PsdReport check_kernel_matrix(const Eigen::MatrixXd& values, bool strict = true);

/// Pairwise Gram matrix over the graphs (each unordered pair computed
/// once), PSD-checked before return. Requires >= 2 graphs.
KernelMatrix gram_matrix(const std::vector<SceneGraph>& graphs, const KernelConfig& config);

/// Gram of raw vector rows under the plain dot product (the `linear`
/// kernel used by the vector-feature classifier path). PSD by
/// construction, so only the symmetry check applies.
KernelMatrix linear_gram(const Eigen::MatrixXd& rows, std::vector<std::string> refs);

/// Binary persistence: 8-byte magic, format version, JSON header (n,
/// kernel config, digest, refs), then n*n row-major little-endian doubles.
void write_gram(const std::filesystem::path& path, const KernelMatrix& m);
KernelMatrix read_gram(const std::filesystem::path& path);

/// CSV export: header row "ref,<ref_0>,...,<ref_{n-1}>", one row per graph.
std::string gram_to_csv(const KernelMatrix& m);

} // namespace riskgraph::kernels
