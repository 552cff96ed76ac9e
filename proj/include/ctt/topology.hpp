#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ctt/error.hpp"
#include "ctt/rng.hpp"
#include "ctt/tensor.hpp"

namespace ctt {

/// Undirected simple graph over nodes 0..K-1.
class Topology {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    explicit Topology(std::size_t node_count) : node_count_(node_count), adjacency_(node_count) {
        if (node_count == 0) throw ConfigError("topology needs at least one node");
    }

    static Topology complete(std::size_t k) {
        Topology t(k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) t.add_edge(i, j);
        return t;
    }

    static Topology ring(std::size_t k) {
        Topology t(k);
        for (std::size_t i = 0; i < k && k > 1; ++i) {
            const std::size_t j = (i + 1) % k;
            if (!t.has_edge(i, j)) t.add_edge(i, j);
        }
        return t;
    }

    void add_edge(std::size_t i, std::size_t j) {
        if (i >= node_count_ || j >= node_count_) {
            throw ConfigError("edge (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                              ") references a node outside 1.." + std::to_string(node_count_));
        }
        if (i == j) throw ConfigError("self-loop at node " + std::to_string(i + 1));
        const Edge e = std::minmax(i, j);
        if (!edges_.insert(e).second) {
            throw ConfigError("duplicate edge (" + std::to_string(e.first + 1) + "," + std::to_string(e.second + 1) + ")");
        }
        adjacency_[i].push_back(j);
        adjacency_[j].push_back(i);
        std::sort(adjacency_[i].begin(), adjacency_[i].end());
        std::sort(adjacency_[j].begin(), adjacency_[j].end());
    }

    bool has_edge(std::size_t i, std::size_t j) const { return edges_.count(std::minmax(i, j)) > 0; }
    std::size_t node_count() const { return node_count_; }
    const std::set<Edge>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }
    std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }

    double density() const {
        if (node_count_ < 2) return 1.0;
        return static_cast<double>(edges_.size()) /
               (static_cast<double>(node_count_) * static_cast<double>(node_count_ - 1) / 2.0);
    }

    /// Connected components, each sorted, ordered by smallest member.
    std::vector<std::vector<std::size_t>> components() const {
        std::vector<int> label(node_count_, -1);
        std::vector<std::vector<std::size_t>> out;
        for (std::size_t s = 0; s < node_count_; ++s) {
            if (label[s] >= 0) continue;
            std::vector<std::size_t> comp{s}, stack{s};
            label[s] = static_cast<int>(out.size());
            while (!stack.empty()) {
                const std::size_t u = stack.back();
                stack.pop_back();
                for (std::size_t v : adjacency_[u]) {
                    if (label[v] < 0) {
                        label[v] = label[s];
                        comp.push_back(v);
                        stack.push_back(v);
                    }
                }
            }
            std::sort(comp.begin(), comp.end());
            out.push_back(std::move(comp));
        }
        return out;
    }

    bool connected() const { return components().size() == 1; }

    /// Throws naming the components (1-indexed) when the graph is disconnected.
    void require_connected() const {
        const auto comps = components();
        if (comps.size() == 1) return;
        std::ostringstream os;
        os << "topology is disconnected: " << comps.size() << " components";
        for (const auto& c : comps) {
            os << " {";
            for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i] + 1;
            os << "}";
        }
        throw ConfigError(os.str());
    }

private:
    std::size_t node_count_;
    std::set<Edge> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
};

enum class MixingSource { degree_rule, magic, user_supplied };

inline std::string to_string(MixingSource s) {
    switch (s) {
        case MixingSource::degree_rule: return "degree-rule";
        case MixingSource::magic: return "magic";
        case MixingSource::user_supplied: return "user-supplied";
    }
    return "unknown";
}

/// Symmetric doubly stochastic weight matrix driving average consensus.
struct MixingMatrix {
    Matrix weights;
    MixingSource source = MixingSource::user_supplied;

    std::size_t size() const { return static_cast<std::size_t>(weights.rows()); }

    /// Row/column sums, symmetry, and (given a topology) support on edges + diagonal.
    void validate(const Topology* support = nullptr, double tol = 1e-12) const {
        if (weights.rows() != weights.cols() || weights.rows() == 0) throw ConfigError("mixing matrix must be square");
        const Eigen::Index k = weights.rows();
        for (Eigen::Index i = 0; i < k; ++i) {
            if (std::abs(weights.row(i).sum() - 1.0) > tol) throw ConfigError("mixing matrix row " + std::to_string(i + 1) + " does not sum to 1");
            if (std::abs(weights.col(i).sum() - 1.0) > tol) throw ConfigError("mixing matrix column " + std::to_string(i + 1) + " does not sum to 1");
        }
        if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > tol) throw ConfigError("mixing matrix is not symmetric");
        if (support) {
            if (support->node_count() != static_cast<std::size_t>(k)) throw ConfigError("mixing matrix size differs from topology");
            for (Eigen::Index i = 0; i < k; ++i)
                for (Eigen::Index j = 0; j < k; ++j)
                    if (i != j && weights(i, j) != 0.0 &&
                        !support->has_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
                        throw ConfigError("mixing matrix weights a non-edge (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
        }
    }
};

/// m_ij = 1/K on edges, (K - d_i)/K on the diagonal.
inline MixingMatrix mixing_from_degree_rule(const Topology& t) {
    t.require_connected();
    const auto k = t.node_count();
    MixingMatrix m{Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)), MixingSource::degree_rule};
    const double w = 1.0 / static_cast<double>(k);
    for (const auto& [i, j] : t.edges()) {
        m.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
        m.weights(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = w;
    }
    for (std::size_t i = 0; i < k; ++i) {
        m.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
            static_cast<double>(k - t.degree(i)) / static_cast<double>(k);
    }
    return m;
}

/// Classical magic square of order n >= 3: Siamese construction for odd n,
/// diagonal complement for n divisible by 4, and Conway's LUX for n = 4m + 2.
inline Eigen::MatrixXi magic_square(std::size_t n) {
    if (n < 3) throw ConfigError("magic squares need order >= 3, got " + std::to_string(n));
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXi a(N, N);
    if (n % 2 == 1) {
        // 1 in the top-middle cell, step up-right, drop down on collision.
        for (Eigen::Index i = 0; i < N; ++i) {
            for (Eigen::Index j = 0; j < N; ++j) {
                const Eigen::Index block = (i + j + 2 + N - (N + 3) / 2) % N;
                const Eigen::Index offset = (i + 2 * j + 1) % N;
                a(i, j) = static_cast<int>(N * block + offset + 1);
            }
        }
    } else if (n % 4 == 0) {
        for (Eigen::Index i = 0; i < N; ++i) {
            for (Eigen::Index j = 0; j < N; ++j) {
                const int v = static_cast<int>(i * N + j + 1);
                const bool diag = (i % 4 == j % 4) || ((i % 4) + (j % 4) == 3);
                a(i, j) = diag ? static_cast<int>(N * N + 1) - v : v;
            }
        }
    } else {
        const Eigen::Index m = (N - 2) / 4;
        const Eigen::Index h = 2 * m + 1;
        const Eigen::MatrixXi base = magic_square(static_cast<std::size_t>(h));
        for (Eigen::Index i = 0; i < h; ++i) {
            for (Eigen::Index j = 0; j < h; ++j) {
                // Row pattern: m+1 rows of L, one row of U, m-1 rows of X; the
                // middle U trades places with the L above it.
                char kind = i <= m ? 'L' : (i == m + 1 ? 'U' : 'X');
                if (j == m && i == m) kind = 'U';
                if (j == m && i == m + 1) kind = 'L';
                const int o = 4 * (base(i, j) - 1);
                int tl = 0, tr = 0, bl = 0, br = 0;
                switch (kind) {
                    case 'L': tl = 4; tr = 1; bl = 2; br = 3; break;
                    case 'U': tl = 1; tr = 4; bl = 2; br = 3; break;
                    default: tl = 1; tr = 4; bl = 3; br = 2; break;
                }
                a(2 * i, 2 * j) = o + tl;
                a(2 * i, 2 * j + 1) = o + tr;
                a(2 * i + 1, 2 * j) = o + bl;
                a(2 * i + 1, 2 * j + 1) = o + br;
            }
        }
    }
    return a;
}

/// M = (A + A^T) / (2c) with A the order-K magic square and c = K(K^2+1)/2.
inline MixingMatrix mixing_magic(std::size_t k) {
    if (k < 3) throw ConfigError("magic mixing needs K >= 3, got " + std::to_string(k));
    const Matrix a = magic_square(k).cast<double>();
    const double c = static_cast<double>(k) * (static_cast<double>(k * k) + 1.0) / 2.0;
    return MixingMatrix{(a + a.transpose()) / (2.0 * c), MixingSource::magic};
}

/// Second-largest eigenvalue magnitude of a symmetric mixing matrix.
inline double lambda2(const MixingMatrix& m) {
    if (m.weights.rows() != m.weights.cols()) throw ConfigError("lambda2: mixing matrix must be square");
    if ((m.weights - m.weights.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ConfigError("lambda2: mixing matrix is not symmetric");
    }
    if (m.weights.rows() < 2) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m.weights, Eigen::EigenvaluesOnly);
    std::vector<double> mags;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) mags.push_back(std::abs(eig.eigenvalues()[i]));
    std::sort(mags.begin(), mags.end(), std::greater<>{});
    return std::min(1.0, mags[1]);
}

/// Random spanning tree plus uniformly drawn extra edges up to ceil(S K (K-1)/2).
inline Topology random_topology(std::size_t k, double density, std::uint64_t seed) {
    if (k < 2) throw ConfigError("random_topology needs K >= 2");
    if (!(density > 0.0 && density <= 1.0)) throw ConfigError("random_topology: density must lie in (0, 1]");
    const double pairs = static_cast<double>(k) * static_cast<double>(k - 1) / 2.0;
    const auto target = static_cast<std::size_t>(std::ceil(density * pairs - 1e-9));
    if (target < k - 1) {
        throw ConfigError("random_topology: density " + std::to_string(density) + " gives " + std::to_string(target) +
                          " edges, below the " + std::to_string(k - 1) + " a connected graph needs");
    }
    CounterRng rng(seed, 0x70706F);
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    for (std::size_t i = k - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    Topology t(k);
    for (std::size_t i = 1; i < k; ++i) t.add_edge(order[i], order[rng.below(i)]);

    std::vector<Topology::Edge> free;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (!t.has_edge(i, j)) free.emplace_back(i, j);
    for (std::size_t i = free.size(); i > 1; --i) std::swap(free[i - 1], free[rng.below(i)]);
    for (std::size_t i = 0; t.edge_count() < target; ++i) t.add_edge(free[i].first, free[i].second);
    return t;
}

/// Edge-list text: first line K, then one "i j" pair per line, 1-indexed.
inline void write_edge_list(std::ostream& os, const Topology& t) {
    os << t.node_count() << "\n";
    for (const auto& [i, j] : t.edges()) os << i + 1 << " " << j + 1 << "\n";
}

inline Topology read_edge_list(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(is, line)) {
            ++line_no;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            return true;
        }
        return false;
    };
    if (!next_line()) throw FormatError("edge list: missing node count line");
    std::istringstream head(line);
    long long k = 0;
    if (!(head >> k) || k < 1) throw FormatError("edge list: line " + std::to_string(line_no) + " is not a positive node count");
    Topology t(static_cast<std::size_t>(k));
    while (next_line()) {
        std::istringstream row(line);
        long long i = 0, j = 0;
        std::string extra;
        if (!(row >> i >> j) || (row >> extra)) {
            throw FormatError("edge list: line " + std::to_string(line_no) + " is not an 'i j' pair");
        }
        if (i < 1 || j < 1) throw FormatError("edge list: line " + std::to_string(line_no) + " uses a non-positive node id");
        t.add_edge(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
    }
    return t;
}

inline Topology load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open edge list " + path);
    return read_edge_list(in);
}

inline void save_edge_list(const std::string& path, const Topology& t) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write edge list " + path);
    write_edge_list(out, t);
}

}  // namespace ctt
