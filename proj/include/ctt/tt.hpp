#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ctt/svd.hpp"
#include "ctt/tensor.hpp"

namespace ctt {

/// Ordered TT-cores; core n has dims [R_{n-1}, I_n, R_n].
struct TTDecomposition {
    std::vector<DenseTensor> cores;
    std::vector<std::string> warnings;

    std::vector<std::size_t> ranks() const {
        std::vector<std::size_t> r;
        if (cores.empty()) return r;
        r.push_back(cores.front().extent(0));
        for (const auto& c : cores) r.push_back(c.extent(2));
        return r;
    }

    Dims mode_extents() const {
        Dims d;
        for (const auto& c : cores) d.push_back(c.extent(1));
        return d;
    }

    bool complete() const {
        const auto r = ranks();
        return !r.empty() && r.front() == 1 && r.back() == 1;
    }

    std::size_t element_count() const {
        std::size_t n = 0;
        for (const auto& c : cores) n += c.size();
        return n;
    }

    /// Throws unless every core is 3-way and adjacent bond ranks agree.
    void validate() const {
        if (cores.empty()) throw ConfigError("TT train has no cores");
        for (std::size_t n = 0; n < cores.size(); ++n) {
            if (cores[n].order() != 3) {
                throw ConfigError("TT core " + std::to_string(n) + " is not 3-way: " + to_string(cores[n].dims()));
            }
            if (n > 0 && cores[n - 1].extent(2) != cores[n].extent(0)) {
                throw ConfigError("TT bond mismatch between cores " + std::to_string(n - 1) + " and " +
                                  std::to_string(n));
            }
        }
    }
};

namespace detail {

/// TT-SVD sweep over a carrier whose conceptual dims are [lead_rank, extents...].
/// Every SVD uses the delta rule except the first when `first_rank` is set.
inline TTDecomposition tt_sweep(std::vector<double> carrier, std::size_t lead_rank, const Dims& extents,
                                double delta, std::optional<std::size_t> first_rank) {
    TTDecomposition tt;
    std::size_t rank = lead_rank;
    for (std::size_t n = 0; n + 1 < extents.size(); ++n) {
        const std::size_t rows = rank * extents[n];
        const std::size_t cols = carrier.size() / rows;
        const Eigen::Map<const Matrix> unfolding(carrier.data(), static_cast<Eigen::Index>(rows),
                                                 static_cast<Eigen::Index>(cols));
        TruncationRule rule = DeltaRule{delta};
        if (n == 0 && first_rank) rule = RankRule{std::min(*first_rank, std::min(rows, cols))};
        SvdResult svd = truncated_svd(unfolding, rule);
        if (svd.rank() == 0) throw NumericalError("TT-SVD: carrier became numerically zero");
        if (n == 0 && first_rank && svd.rank() < *first_rank) {
            tt.warnings.push_back("requested first rank " + std::to_string(*first_rank) +
                                  " exceeds numerical rank " + std::to_string(svd.rank()) +
                                  "; train is thinner");
        }
        const std::size_t next = svd.rank();
        DenseTensor core({rank, extents[n], next});
        core.as_matrix(rows) = svd.left_factors;
        tt.cores.push_back(std::move(core));
        carrier.assign(svd.weighted_right.data(), svd.weighted_right.data() + svd.weighted_right.size());
        rank = next;
    }
    tt.cores.emplace_back(Dims{rank, extents.back(), 1}, std::move(carrier));
    return tt;
}

}  // namespace detail

/// TT-SVD with relative accuracy `eps`: delta = eps / sqrt(N-1) * ||t||_F for
/// every truncation, except that a supplied `first_rank` fixes R_1 directly.
inline TTDecomposition tt_svd(const DenseTensor& t, double eps, std::optional<std::size_t> first_rank = std::nullopt) {
    if (!(eps > 0.0)) throw ConfigError("tt_svd: eps must be positive");
    if (t.order() < 2) throw ConfigError("tt_svd: tensor order must be at least 2");
    const std::size_t rest = t.size() / t.extent(0);
    if (first_rank && (*first_rank < 1 || *first_rank > std::min(t.extent(0), rest))) {
        throw ConfigError("tt_svd: first rank " + std::to_string(*first_rank) + " outside [1, " +
                          std::to_string(std::min(t.extent(0), rest)) + "]");
    }
    const double norm = frobenius_norm(t);
    if (!std::isfinite(norm)) throw NumericalError("tt_svd: tensor contains non-finite entries");
    if (norm == 0.0) throw NumericalError("tt_svd: zero tensor has no truncation scale");
    const double delta = eps / std::sqrt(static_cast<double>(t.order() - 1)) * norm;
    return detail::tt_sweep(t.values(), 1, t.dims(), delta, first_rank);
}

/// Left-to-right contraction of a (possibly partial) train. The result keeps
/// the boundary bond extents: dims [R_0, I_1, ..., I_N, R_N].
inline DenseTensor contract_chain(const std::vector<DenseTensor>& cores) {
    if (cores.empty()) throw ConfigError("contract_chain: no cores");
    DenseTensor acc = cores.front();
    for (std::size_t n = 1; n < cores.size(); ++n) {
        if (acc.dims().back() != cores[n].extent(0)) {
            throw ConfigError("contract_chain: bond mismatch at core " + std::to_string(n));
        }
        acc = contract(acc, cores[n], 1);
    }
    return acc;
}

inline DenseTensor tt_reconstruct(const TTDecomposition& tt) {
    tt.validate();
    if (!tt.complete()) throw ConfigError("tt_reconstruct: train must start and end with rank 1");
    DenseTensor full = contract_chain(tt.cores);
    Dims dims(full.dims().begin() + 1, full.dims().end() - 1);
    return std::move(full).reshaped(std::move(dims));
}

}  // namespace ctt
