#include "riskgraph/kernels.hpp"

#include "riskgraph/errors.hpp"
#include "riskgraph/io.hpp"
#include "riskgraph/rng.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace riskgraph::kernels {

using nlohmann::json;

namespace {

constexpr int kUnreachable = std::numeric_limits<int>::max() / 2;

// Dense eigendecomposition is cubic; above this size the PSD check uses
// the power-iteration + shifted-Cholesky fallback instead.
constexpr int kDenseEigLimit = 1500;

} // namespace

ShortestPathGraph shortest_paths(const SceneGraph& g) {
    const int n = static_cast<int>(g.nodes.size());
    ShortestPathGraph sp;
    sp.labels.reserve(static_cast<std::size_t>(n));
    for (const SceneGraphNode& node : g.nodes) sp.labels.push_back(node.label);

    std::vector<std::vector<int>> d(static_cast<std::size_t>(n),
                                    std::vector<int>(static_cast<std::size_t>(n), kUnreachable));
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
    for (const auto& [u, v] : g.edges) {
        d[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
        d[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            const int dik = d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            if (dik >= kUnreachable) continue;
            for (int j = 0; j < n; ++j) {
                const int cand = dik + d[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                if (cand < d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                    d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = cand;
            }
        }

    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const int dist = d[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
            if (dist < kUnreachable) sp.entries.push_back({u, v, dist});
        }
    return sp;
}

namespace {

// --- SPGK --------------------------------------------------------------
// Feature histogram over (distance, sorted endpoint labels); the kernel is
// the dot product of two histograms, which equals the exhaustive sum over
// entry pairs of [d = d'] * [sorted labels match].

using SpgkFeature = std::vector<std::pair<std::uint64_t, double>>; // sorted by key

std::uint64_t spgk_key(int d, int la, int lb) {
    const auto lmin = static_cast<std::uint64_t>(std::min(la, lb));
    const auto lmax = static_cast<std::uint64_t>(std::max(la, lb));
    return (static_cast<std::uint64_t>(d) << 42) | (lmin << 21) | lmax;
}

SpgkFeature spgk_feature(const SceneGraph& g) {
    const ShortestPathGraph sp = shortest_paths(g);
    SpgkFeature f;
    f.reserve(sp.entries.size());
    for (const SpEntry& e : sp.entries)
        f.emplace_back(spgk_key(e.d, sp.labels[static_cast<std::size_t>(e.u)],
                                sp.labels[static_cast<std::size_t>(e.v)]),
                       1.0);
    std::sort(f.begin(), f.end());
    // collapse duplicate keys into counts
    SpgkFeature out;
    for (const auto& [key, cnt] : f) {
        if (!out.empty() && out.back().first == key)
            out.back().second += cnt;
        else
            out.emplace_back(key, cnt);
    }
    return out;
}

double spgk_dot(const SpgkFeature& a, const SpgkFeature& b) {
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first)
            ++i;
        else if (b[j].first < a[i].first)
            ++j;
        else
            sum += a[i++].second * b[j++].second;
    }
    return sum;
}

double spgk_normalized(const SpgkFeature& a, const SpgkFeature& b, bool normalize) {
    const double raw = spgk_dot(a, b);
    if (!normalize) return raw;
    const double sa = spgk_dot(a, a);
    const double sb = spgk_dot(b, b);
    if (sa == 0.0 || sb == 0.0) return 0.0;
    return raw / std::sqrt(sa * sb);
}

// --- NHGK ---------------------------------------------------------------

std::uint64_t nhgk_mask(int bits) {
    return bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
}

std::uint64_t rol1(std::uint64_t x, int bits, std::uint64_t mask) {
    return ((x << 1) | (x >> (bits - 1))) & mask;
}

void nhgk_check_params(int h, int bits) {
    if (h < 1) throw ParameterError("nhgk: h must be >= 1");
    if (bits < 8 || bits > 64) throw ParameterError("nhgk: bit width must be in [8, 64]");
}

/// Per-iteration sorted node-label arrays; the per-pair kernel only needs
/// these, so Gram assembly precomputes them once per graph.
std::vector<std::vector<std::uint64_t>> nhgk_label_sets(const SceneGraph& g, int h, int bits,
                                                        std::uint64_t seed) {
    const std::size_t n = g.nodes.size();
    const std::uint64_t mask = nhgk_mask(bits);

    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [u, v] : g.edges) {
        adj[static_cast<std::size_t>(u)].push_back(static_cast<std::size_t>(v));
        adj[static_cast<std::size_t>(v)].push_back(static_cast<std::size_t>(u));
    }

    std::vector<std::uint64_t> cur(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto label = static_cast<std::uint64_t>(g.nodes[i].label);
        cur[i] = mix64(seed ^ (0x9E3779B97F4A7C15ull * (label + 1))) & mask;
    }

    std::vector<std::vector<std::uint64_t>> sets;
    sets.reserve(static_cast<std::size_t>(h));
    std::vector<std::uint64_t> next(n);
    for (int it = 0; it < h; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t acc = rol1(cur[i], bits, mask);
            for (std::size_t j : adj[i]) acc ^= cur[j];
            next[i] = acc;
        }
        cur.swap(next);
        std::vector<std::uint64_t> sorted = cur;
        std::sort(sorted.begin(), sorted.end());
        sets.push_back(std::move(sorted));
    }
    return sets;
}

std::size_t multiset_intersection(const std::vector<std::uint64_t>& a,
                                  const std::vector<std::uint64_t>& b) {
    std::size_t count = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

double nhgk_from_sets(const std::vector<std::vector<std::uint64_t>>& s1,
                      const std::vector<std::vector<std::uint64_t>>& s2, std::size_t n1,
                      std::size_t n2) {
    double sum = 0.0;
    const std::size_t h = s1.size();
    for (std::size_t i = 0; i < h; ++i) {
        const auto c = static_cast<double>(multiset_intersection(s1[i], s2[i]));
        sum += c / (static_cast<double>(n1 + n2) - c);
    }
    return sum / static_cast<double>(h);
}

} // namespace

double spgk(const SceneGraph& g1, const SceneGraph& g2, bool normalize) {
    return spgk_normalized(spgk_feature(g1), spgk_feature(g2), normalize);
}

double nhgk(const SceneGraph& g1, const SceneGraph& g2, int h, int bits, std::uint64_t seed) {
    nhgk_check_params(h, bits);
    const auto s1 = nhgk_label_sets(g1, h, bits, seed);
    const auto s2 = nhgk_label_sets(g2, h, bits, seed);
    return nhgk_from_sets(s1, s2, g1.nodes.size(), g2.nodes.size());
}

std::string KernelConfig::to_json() const {
    json j{{"name", name}, {"h", h}, {"bits", bits}, {"seed", seed}, {"normalize", normalize}};
    return j.dump();
}

KernelConfig KernelConfig::from_json(const std::string& text) {
    KernelConfig c;
    try {
        const json j = json::parse(text);
        c.name = j.at("name").get<std::string>();
        c.h = j.at("h").get<int>();
        c.bits = j.at("bits").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.normalize = j.at("normalize").get<bool>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad kernel config: ") + e.what());
    }
    return c;
}

PsdReport check_kernel_matrix(const Eigen::MatrixXd& values, bool strict) {
    const auto n = values.rows();
    if (n == 0 || values.cols() != n) throw ValidationError("kernel matrix must be square");

    const double asym = (values - values.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) {
        if (strict)
            throw ValidationError("kernel matrix asymmetric by " + io::format_double(asym));
        return {};
    }

    PsdReport rep;
    if (n <= kDenseEigLimit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(values,
                                                           Eigen::EigenvaluesOnly);
        rep.min_eigenvalue = eig.eigenvalues().minCoeff();
        rep.max_eigenvalue = eig.eigenvalues().maxCoeff();
        rep.ok = rep.min_eigenvalue >= -1e-8 * std::max(rep.max_eigenvalue, 0.0);
    } else {
        // Large matrices: estimate the top eigenvalue by power iteration,
        // then probe K + tol*I for positive definiteness via Cholesky.
        Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
        double lambda = 0.0;
        for (int it = 0; it < 50; ++it) {
            Eigen::VectorXd w = values * v;
            const double norm = w.norm();
            if (norm == 0.0) break;
            v = w / norm;
            lambda = norm;
        }
        rep.max_eigenvalue = lambda;
        const double shift = 1e-8 * std::max(lambda, 1.0);
        Eigen::LLT<Eigen::MatrixXd> llt(
            values + shift * Eigen::MatrixXd::Identity(n, n));
        rep.ok = llt.info() == Eigen::Success;
        rep.min_eigenvalue = rep.ok ? -shift : -std::numeric_limits<double>::infinity();
    }
    if (strict && !rep.ok)
        throw ValidationError("kernel matrix is not positive semidefinite: min eigenvalue " +
                              io::format_double(rep.min_eigenvalue) + " (max " +
                              io::format_double(rep.max_eigenvalue) + ")");
    return rep;
}

KernelMatrix gram_matrix(const std::vector<SceneGraph>& graphs, const KernelConfig& config) {
    const auto n = static_cast<Eigen::Index>(graphs.size());
    if (n < 2) throw ParameterError("gram_matrix needs at least 2 graphs");

    KernelMatrix m;
    m.config = config;
    m.digest = io::digest_hex(config.to_json());
    m.refs.reserve(graphs.size());
    for (const SceneGraph& g : graphs) m.refs.push_back(g.scene_ref);
    m.values.resize(n, n);

    if (config.name == "spgk") {
        std::vector<SpgkFeature> features;
        features.reserve(graphs.size());
        for (const SceneGraph& g : graphs) features.push_back(spgk_feature(g));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j) {
                const double k = spgk_normalized(features[static_cast<std::size_t>(i)],
                                                 features[static_cast<std::size_t>(j)],
                                                 config.normalize);
                m.values(i, j) = k;
                m.values(j, i) = k;
            }
    } else if (config.name == "nhgk") {
        nhgk_check_params(config.h, config.bits);
        std::vector<std::vector<std::vector<std::uint64_t>>> sets;
        sets.reserve(graphs.size());
        for (const SceneGraph& g : graphs)
            sets.push_back(nhgk_label_sets(g, config.h, config.bits, config.seed));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j) {
                const double k = nhgk_from_sets(
                    sets[static_cast<std::size_t>(i)], sets[static_cast<std::size_t>(j)],
                    graphs[static_cast<std::size_t>(i)].nodes.size(),
                    graphs[static_cast<std::size_t>(j)].nodes.size());
                m.values(i, j) = k;
                m.values(j, i) = k;
            }
    } else {
        throw ParameterError("unknown graph kernel: " + config.name);
    }

    check_kernel_matrix(m.values, true);
    return m;
}

KernelMatrix linear_gram(const Eigen::MatrixXd& rows, std::vector<std::string> refs) {
    if (rows.rows() < 2) throw ParameterError("linear_gram needs at least 2 rows");
    if (refs.size() != static_cast<std::size_t>(rows.rows()))
        throw ParameterError("linear_gram: refs/rows length mismatch");
    KernelMatrix m;
    m.config.name = "linear";
    m.config.normalize = false;
    m.digest = io::digest_hex(m.config.to_json());
    m.refs = std::move(refs);
    m.values = rows * rows.transpose();
    // Gram of real vectors: PSD by construction, enforce exact symmetry.
    m.values = ((m.values + m.values.transpose()) / 2.0).eval();
    return m;
}

namespace {

constexpr char kGramMagic[8] = {'R', 'G', 'R', 'A', 'M', 'B', 'I', 'N'};
constexpr std::uint32_t kGramVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "gram persistence assumes a little-endian host");

template <typename T>
void put_raw(std::string& out, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    out.append(p, sizeof(T));
}

} // namespace

void write_gram(const std::filesystem::path& path, const KernelMatrix& m) {
    json header{{"n", m.n()},
                {"kernel", json::parse(m.config.to_json())},
                {"digest", m.digest},
                {"refs", m.refs}};
    const std::string header_text = header.dump();

    std::string out;
    out.reserve(header_text.size() + static_cast<std::size_t>(m.n()) *
                                         static_cast<std::size_t>(m.n()) * sizeof(double) +
                64);
    out.append(kGramMagic, sizeof(kGramMagic));
    put_raw(out, kGramVersion);
    put_raw(out, static_cast<std::uint32_t>(0)); // reserved
    put_raw(out, static_cast<std::uint64_t>(header_text.size()));
    out += header_text;
    for (Eigen::Index i = 0; i < m.values.rows(); ++i)
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) put_raw(out, m.values(i, j));
    io::write_file(path, out);
}

KernelMatrix read_gram(const std::filesystem::path& path) {
    const std::string data = io::read_file(path);
    std::size_t off = 0;
    auto need = [&](std::size_t bytes) {
        if (data.size() - off < bytes) throw ValidationError("truncated gram file: " + path.string());
    };
    need(sizeof(kGramMagic));
    if (std::memcmp(data.data(), kGramMagic, sizeof(kGramMagic)) != 0)
        throw ValidationError("not a gram file: " + path.string());
    off += sizeof(kGramMagic);

    std::uint32_t version = 0, reserved = 0;
    std::uint64_t header_len = 0;
    need(sizeof(version) + sizeof(reserved) + sizeof(header_len));
    std::memcpy(&version, data.data() + off, sizeof(version));
    off += sizeof(version);
    std::memcpy(&reserved, data.data() + off, sizeof(reserved));
    off += sizeof(reserved);
    std::memcpy(&header_len, data.data() + off, sizeof(header_len));
    off += sizeof(header_len);
    if (version != kGramVersion)
        throw ValidationError("unsupported gram version " + std::to_string(version));

    need(header_len);
    KernelMatrix m;
    int n = 0;
    try {
        const json header = json::parse(data.substr(off, header_len));
        n = header.at("n").get<int>();
        m.config = KernelConfig::from_json(header.at("kernel").dump());
        m.digest = header.at("digest").get<std::string>();
        m.refs = header.at("refs").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad gram header: ") + e.what());
    }
    off += header_len;

    if (n < 1 || m.refs.size() != static_cast<std::size_t>(n))
        throw ValidationError("gram header inconsistent: n vs refs");
    const std::size_t bytes =
        static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * sizeof(double);
    need(bytes);
    m.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            double v = 0.0;
            std::memcpy(&v, data.data() + off, sizeof(double));
            off += sizeof(double);
            m.values(i, j) = v;
        }
    if (off != data.size()) throw ValidationError("trailing bytes in gram file");
    check_kernel_matrix(m.values, true);
    return m;
}

std::string gram_to_csv(const KernelMatrix& m) {
    std::string out = "ref";
    for (const std::string& r : m.refs) out += ',' + r;
    out += '\n';
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        out += m.refs[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.values.cols(); ++j)
            out += ',' + io::format_double(m.values(i, j));
        out += '\n';
    }
    return out;
}

} // namespace riskgraph::kernels
