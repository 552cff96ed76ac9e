#pragma once

#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "ctt/consensus.hpp"
#include "ctt/network.hpp"
#include "ctt/svd.hpp"
#include "ctt/topology.hpp"
#include "ctt/tt.hpp"

namespace ctt {

/// One federated participant after its local step. `personal_core` never
/// leaves the client.
struct ClientState {
    std::size_t client_id = 0;
    Matrix personal_core;                               // G_1^k, I_1^k x R_1
    Matrix payload;                                     // D_1^k, R_1 x prod(I_2..I_N)
    std::optional<std::vector<DenseTensor>> feature_cores;  // G_2^k .. G_N^k
    Dims feature_extents;                               // I_2 .. I_N
    double delta = 0.0;                                 // delta_1^k
    std::size_t delta_rank = 0;                         // rank the delta_1^k rule would pick
    std::vector<std::string> warnings;

    std::size_t rank() const { return static_cast<std::size_t>(personal_core.cols()); }
};

/// Global feature cores G_2 (R_1 x I_2 x R_2) .. G_N (R_{N-1} x I_N x 1).
struct GlobalFeatures {
    std::vector<DenseTensor> cores;

    std::vector<std::size_t> ranks() const {
        std::vector<std::size_t> r;
        if (cores.empty()) return r;
        r.push_back(cores.front().extent(0));
        for (const auto& c : cores) r.push_back(c.extent(2));
        return r;
    }

    void validate() const {
        TTDecomposition{cores, {}}.validate();
        if (cores.back().extent(2) != 1) throw ConfigError("global features must end with rank 1");
    }
};

struct ProtocolParams {
    double eps1 = 0.1;
    double eps2 = 0.05;
    std::size_t r1 = 20;
    std::size_t rounds = 3;  // consensus iterations L (decentralized only)
};

/// Rank-R_1 first SVD of x's 1-unfolding; optionally completes TT-SVD on the
/// payload with delta_1^k = eps1 / sqrt(N-1) * ||x||_F to produce feature cores.
inline ClientState client_local_step(const DenseTensor& x, double eps1, std::size_t r1, bool need_cores,
                                     std::size_t client_id = 0) {
    if (x.order() < 2) throw ConfigError("client_local_step: tensor order must be at least 2");
    if (!(eps1 > 0.0)) throw ConfigError("client_local_step: eps1 must be positive");
    const std::size_t rows = x.extent(0);
    const std::size_t cols = x.size() / rows;
    if (r1 < 1 || r1 > std::min(rows, cols)) {
        throw ConfigError("client " + std::to_string(client_id) + ": R1 = " + std::to_string(r1) + " outside [1, " +
                          std::to_string(std::min(rows, cols)) + "]");
    }
    const double norm = frobenius_norm(x);
    if (!std::isfinite(norm)) throw NumericalError("client " + std::to_string(client_id) + ": non-finite data");
    if (norm == 0.0) throw NumericalError("client " + std::to_string(client_id) + ": degenerate input, zero tensor");

    ClientState st;
    st.client_id = client_id;
    st.feature_extents.assign(x.dims().begin() + 1, x.dims().end());
    st.delta = eps1 / std::sqrt(static_cast<double>(x.order() - 1)) * norm;

    SvdResult svd = truncated_svd(x.as_matrix(rows), RankRule{r1});
    st.delta_rank = detail::delta_rank(svd.spectrum, svd.numerical_rank, st.delta);
    if (svd.rank() < r1) {
        st.warnings.push_back("client " + std::to_string(client_id) + ": numerical rank " + std::to_string(svd.rank()) +
                              " below requested R1 " + std::to_string(r1));
    }
    st.personal_core = std::move(svd.left_factors);
    st.payload = std::move(svd.weighted_right);

    if (need_cores) {
        std::vector<double> carrier(st.payload.data(), st.payload.data() + st.payload.size());
        TTDecomposition rest = detail::tt_sweep(std::move(carrier), st.rank(), st.feature_extents, st.delta, std::nullopt);
        st.feature_cores = std::move(rest.cores);
    }
    return st;
}

/// Reshape an R_1 x prod(I_2..I_N) state into the order-(N-1) tensor [R_1 I_2, I_3, ..., I_N].
inline DenseTensor payload_as_w(const Matrix& payload, const Dims& feature_extents) {
    if (feature_extents.empty()) throw ConfigError("payload_as_w: no feature modes");
    Dims dims{static_cast<std::size_t>(payload.rows()) * feature_extents.front()};
    dims.insert(dims.end(), feature_extents.begin() + 1, feature_extents.end());
    return DenseTensor(std::move(dims), std::vector<double>(payload.data(), payload.data() + payload.size()));
}

/// W = (1/K) sum_k G_2^k x ... x G_N^k, accumulated in the given (ascending
/// client) order and stored with dims [R_1 I_2, I_3, ..., I_N].
inline DenseTensor server_aggregate(const std::vector<std::vector<DenseTensor>>& core_sets) {
    if (core_sets.empty()) throw ConfigError("server_aggregate: no clients");
    std::optional<DenseTensor> sum;
    for (std::size_t k = 0; k < core_sets.size(); ++k) {
        TTDecomposition{core_sets[k], {}}.validate();
        DenseTensor chain = contract_chain(core_sets[k]);
        if (chain.dims().back() != 1) throw ConfigError("server_aggregate: client " + std::to_string(k) + " chain does not end in rank 1");
        if (!sum) {
            sum = std::move(chain);
            continue;
        }
        if (chain.dims() != sum->dims()) {
            throw ConfigError("server_aggregate: client " + std::to_string(k) + " chain has dims " + to_string(chain.dims()) +
                              ", expected " + to_string(sum->dims()));
        }
        for (std::size_t i = 0; i < chain.size(); ++i) (*sum)[i] += chain[i];
    }
    const double inv = 1.0 / static_cast<double>(core_sets.size());
    for (double& v : sum->data()) v *= inv;

    const auto& d = sum->dims();  // [R_1, I_2, ..., I_N, 1]
    Dims w_dims{d[0] * d[1]};
    w_dims.insert(w_dims.end(), d.begin() + 2, d.end() - 1);
    return std::move(*sum).reshaped(std::move(w_dims));
}

/// TT-SVD(eps2) of W; the leading core [1, R_1 I_2, R_2] is relabelled as G_2 = [R_1, I_2, R_2].
inline GlobalFeatures server_extract(const DenseTensor& w, double eps2, std::size_t r1) {
    if (w.order() < 2) throw ConfigError("server_extract: N = 2 leaves no feature chain to split (W must have order >= 2)");
    if (r1 == 0 || w.extent(0) % r1 != 0) {
        throw ConfigError("server_extract: leading extent " + std::to_string(w.extent(0)) + " is not a multiple of R1 = " + std::to_string(r1));
    }
    if (frobenius_norm(w) == 0.0) throw NumericalError("server_extract: aggregated tensor is zero");
    TTDecomposition tt = tt_svd(w, eps2);
    GlobalFeatures g;
    g.cores = std::move(tt.cores);
    const std::size_t r2 = g.cores.front().extent(2);
    g.cores.front() = std::move(g.cores.front()).reshaped({r1, w.extent(0) / r1, r2});
    return g;
}

/// X^k ~ G_1^k x G_2 x ... x G_N with dims [I_1^k, I_2, ..., I_N].
inline DenseTensor reconstruct_client(const Matrix& personal_core, const GlobalFeatures& features) {
    if (features.cores.empty()) throw ConfigError("reconstruct_client: no feature cores");
    if (static_cast<std::size_t>(personal_core.cols()) != features.cores.front().extent(0)) {
        throw ConfigError("reconstruct_client: personal core has " + std::to_string(personal_core.cols()) +
                          " columns but G_2 expects " + std::to_string(features.cores.front().extent(0)));
    }
    std::vector<DenseTensor> chain;
    chain.push_back(DenseTensor::from_matrix(personal_core).reshaped(
        {1, static_cast<std::size_t>(personal_core.rows()), static_cast<std::size_t>(personal_core.cols())}));
    chain.insert(chain.end(), features.cores.begin(), features.cores.end());
    DenseTensor full = contract_chain(chain);
    Dims dims(full.dims().begin() + 1, full.dims().end() - 1);
    return std::move(full).reshaped(std::move(dims));
}

namespace detail {

inline void check_client_shapes(const std::vector<DenseTensor>& tensors, std::size_t min_order) {
    if (tensors.empty()) throw ConfigError("no client tensors");
    const auto& ref = tensors.front().dims();
    if (ref.size() < min_order) {
        throw ConfigError("client tensors must have order >= " + std::to_string(min_order) + ", got " + to_string(ref));
    }
    for (std::size_t k = 1; k < tensors.size(); ++k) {
        const auto& d = tensors[k].dims();
        if (d.size() != ref.size() || !std::equal(d.begin() + 1, d.end(), ref.begin() + 1)) {
            throw ConfigError("client " + std::to_string(k) + " has dims " + to_string(d) +
                              " but feature modes must match " + to_string(ref));
        }
    }
}

inline std::vector<ClientState> local_steps(const std::vector<DenseTensor>& tensors, double eps1, std::size_t r1, bool need_cores) {
    std::vector<std::future<ClientState>> pending;
    for (std::size_t k = 0; k < tensors.size(); ++k) {
        pending.push_back(std::async(std::launch::async, [&, k] { return client_local_step(tensors[k], eps1, r1, need_cores, k); }));
    }
    std::vector<ClientState> out;
    for (auto& f : pending) out.push_back(f.get());
    for (const auto& st : out) {
        if (st.rank() != out.front().rank()) {
            throw ConfigError("clients realised different R1 (" + std::to_string(out.front().rank()) + " vs " +
                              std::to_string(st.rank()) + " at client " + std::to_string(st.client_id) + ")");
        }
    }
    return out;
}

}  // namespace detail

struct MasterSlaveResult {
    std::vector<ClientState> clients;   // local results, ascending client id
    DenseTensor aggregated;             // W before extraction
    GlobalFeatures features;
    std::vector<std::string> warnings;

    std::vector<Matrix> personal_cores() const {
        std::vector<Matrix> out;
        for (const auto& c : clients) out.push_back(c.personal_core);
        return out;
    }
};

/// Master-slave CTT. Round 0: each client uploads G_2^k..G_N^k. The server
/// fuses what it received, extracts with eps2, and in round 1 broadcasts G_2..G_N.
inline MasterSlaveResult run_master_slave(const std::vector<DenseTensor>& tensors, const ProtocolParams& params, SimNetwork& sim) {
    detail::check_client_shapes(tensors, 3);
    MasterSlaveResult out;
    out.clients = detail::local_steps(tensors, params.eps1, params.r1, true);
    for (const auto& c : out.clients) out.warnings.insert(out.warnings.end(), c.warnings.begin(), c.warnings.end());

    const std::size_t uplink_start = sim.log().size();
    for (const auto& c : out.clients) {
        for (const auto& core : *c.feature_cores) {
            sim.send(0, static_cast<NodeId>(c.client_id), kServer, PayloadKind::feature_core, core);
        }
    }

    // The server only sees what arrived over the links.
    std::vector<std::vector<DenseTensor>> received(out.clients.size());
    for (std::size_t i = uplink_start; i < sim.log().size(); ++i) {
        const Message& m = sim.log()[i];
        if (m.to == kServer && m.kind == PayloadKind::feature_core) received[static_cast<std::size_t>(m.from)].push_back(m.payload);
    }
    out.aggregated = server_aggregate(received);
    out.features = server_extract(out.aggregated, params.eps2, out.clients.front().rank());

    for (const auto& c : out.clients) {
        for (const auto& core : out.features.cores) {
            sim.send(1, kServer, static_cast<NodeId>(c.client_id), PayloadKind::global_core, core);
        }
    }
    return out;
}

struct DecentralizedResult {
    std::vector<ClientState> clients;
    std::vector<DenseTensor> consensus_w;        // Z^k[L] reshaped, per node
    std::vector<GlobalFeatures> features;        // per node
    std::vector<TTDecomposition> trains;         // G_1^k followed by the node's features
    ConsensusResult consensus;
    double lambda2 = 0.0;
    std::vector<std::string> warnings;
};

/// Decentralized CTT: local rank-R_1 SVD, L consensus rounds on D_1^k over the
/// topology, then local TT-SVD(eps2) of each node's consensus state.
inline DecentralizedResult run_decentralized(const std::vector<DenseTensor>& tensors, const Topology& topology,
                                             const MixingMatrix& mixing, const ProtocolParams& params, SimNetwork& sim) {
    detail::check_client_shapes(tensors, 3);
    if (topology.node_count() != tensors.size()) {
        throw ConfigError("topology has " + std::to_string(topology.node_count()) + " nodes for " +
                          std::to_string(tensors.size()) + " clients");
    }
    topology.require_connected();
    mixing.validate(&topology);
    DecentralizedResult out;
    out.lambda2 = lambda2(mixing);
    if (tensors.size() > 1 && out.lambda2 >= 1.0) throw ConfigError("mixing matrix has lambda2 >= 1; consensus cannot converge");

    out.clients = detail::local_steps(tensors, params.eps1, params.r1, false);
    for (const auto& c : out.clients) out.warnings.insert(out.warnings.end(), c.warnings.begin(), c.warnings.end());

    std::vector<Matrix> initial;
    for (const auto& c : out.clients) initial.push_back(c.payload);
    out.consensus = consensus_iterate(std::move(initial), mixing, topology, params.rounds, &sim, 0);
    out.warnings.insert(out.warnings.end(), out.consensus.warnings.begin(), out.consensus.warnings.end());

    const std::size_t r1 = out.clients.front().rank();
    for (std::size_t k = 0; k < out.clients.size(); ++k) {
        DenseTensor w = payload_as_w(out.consensus.states[k], out.clients[k].feature_extents);
        GlobalFeatures g = server_extract(w, params.eps2, r1);
        TTDecomposition tt;
        const Matrix& g1 = out.clients[k].personal_core;
        tt.cores.push_back(DenseTensor::from_matrix(g1).reshaped(
            {1, static_cast<std::size_t>(g1.rows()), static_cast<std::size_t>(g1.cols())}));
        tt.cores.insert(tt.cores.end(), g.cores.begin(), g.cores.end());
        out.trains.push_back(std::move(tt));
        out.consensus_w.push_back(std::move(w));
        out.features.push_back(std::move(g));
    }
    return out;
}

}  // namespace ctt
