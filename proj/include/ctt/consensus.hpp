#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ctt/network.hpp"
#include "ctt/topology.hpp"

namespace ctt {

struct ConsensusResult {
    std::vector<Matrix> states;          // Z^k[L]
    double initial_error = 0.0;          // alpha_0
    std::vector<double> error_trace;     // alpha_1 .. alpha_L
    std::vector<std::string> warnings;
};

/// alpha^2 = sum_k ||Z^k - mean||_F^2 / reference_energy.
inline double consensus_error(const std::vector<Matrix>& states, double reference_energy) {
    if (states.empty() || reference_energy <= 0.0) return 0.0;
    Matrix mean = Matrix::Zero(states.front().rows(), states.front().cols());
    for (const auto& z : states) mean += z;
    mean /= static_cast<double>(states.size());
    double dev = 0.0;
    for (const auto& z : states) dev += (z - mean).squaredNorm();
    return std::sqrt(dev / reference_energy);
}

/// Synchronous average consensus: Z^k[l+1] = sum_j m_kj Z^j[l]. In every round
/// each node transmits its current state to each topology neighbour; messages
/// are logged on `sim` (when given) with round index `first_round + l`.
inline ConsensusResult consensus_iterate(std::vector<Matrix> states, const MixingMatrix& mixing, const Topology& topology,
                                         std::size_t rounds, SimNetwork* sim = nullptr, std::size_t first_round = 0) {
    const std::size_t k = states.size();
    if (k == 0) throw ConfigError("consensus_iterate: no states");
    if (mixing.size() != k || topology.node_count() != k) {
        throw ConfigError("consensus_iterate: " + std::to_string(k) + " states but mixing/topology sized " +
                          std::to_string(mixing.size()) + "/" + std::to_string(topology.node_count()));
    }
    for (const auto& z : states) {
        if (z.rows() != states.front().rows() || z.cols() != states.front().cols()) {
            throw ConfigError("consensus_iterate: node states differ in shape");
        }
    }
    mixing.validate(&topology);

    ConsensusResult out;
    if (lambda2(mixing) >= 1.0) out.warnings.push_back("lambda2 >= 1: consensus will not converge");

    double reference = 0.0;
    for (const auto& z : states) reference += z.squaredNorm();
    out.initial_error = consensus_error(states, reference);

    for (std::size_t l = 0; l < rounds; ++l) {
        if (sim) {
            for (std::size_t from = 0; from < k; ++from) {
                for (std::size_t to : topology.neighbors(from)) {
                    sim->send(first_round + l, static_cast<NodeId>(from), static_cast<NodeId>(to),
                              PayloadKind::consensus_state, DenseTensor::from_matrix(states[from]));
                }
            }
        }
        std::vector<Matrix> next(k);
        for (std::size_t i = 0; i < k; ++i) {
            next[i] = Matrix::Zero(states[i].rows(), states[i].cols());
            for (std::size_t j = 0; j < k; ++j) {
                const double w = mixing.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (w != 0.0) next[i] += w * states[j];
            }
        }
        states = std::move(next);
        out.error_trace.push_back(consensus_error(states, reference));
    }
    out.states = std::move(states);
    return out;
}

/// Rounds needed for consensus error alpha: ceil(log(1/alpha) / log(1/lambda2)),
/// never less than one.
inline std::size_t estimate_rounds(double lambda_2, double alpha) {
    if (!(lambda_2 > 0.0 && lambda_2 < 1.0)) throw ConfigError("estimate_rounds: lambda2 must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("estimate_rounds: alpha must lie in (0, 1)");
    const double ratio = std::log(1.0 / alpha) / std::log(1.0 / lambda_2);
    const double nearest = std::round(ratio);
    const double rounds = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest) ? nearest : std::ceil(ratio);
    return static_cast<std::size_t>(std::max(1.0, rounds));
}

}  // namespace ctt
