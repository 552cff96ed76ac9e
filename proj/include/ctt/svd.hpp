#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <variant>

#include <Eigen/SVD>

#include "ctt/error.hpp"
#include "ctt/tensor.hpp"

namespace ctt {

/// Keep the fewest singular triplets whose discarded energy is at most delta^2.
struct DeltaRule {
    double delta = 0.0;
};

/// Keep exactly min(rank, numerical rank) triplets.
struct RankRule {
    std::size_t rank = 1;
};

using TruncationRule = std::variant<DeltaRule, RankRule>;

struct SvdResult {
    Matrix left_factors;               // U, column-orthonormal, rows x r
    Matrix weighted_right;             // D = S * V^T, r x cols
    Eigen::VectorXd singular_values;   // nonincreasing, strictly positive
    double discarded_energy = 0.0;     // sum of squared dropped singular values
    std::size_t numerical_rank = 0;
    Eigen::VectorXd spectrum;          // every computed singular value

    std::size_t rank() const { return static_cast<std::size_t>(singular_values.size()); }
};

namespace detail {

/// Smallest r in [1, available] whose tail energy fits under delta^2.
inline std::size_t delta_rank(const Eigen::VectorXd& s, std::size_t available, double delta) {
    const double budget = delta * delta;
    // tail[r] = sum_{i >= r} s_i^2 over every computed value, so numerically
    // zero values still count toward the discarded energy.
    double tail = 0.0;
    for (Eigen::Index i = s.size(); i-- > static_cast<Eigen::Index>(available);) tail += s[i] * s[i];
    std::size_t r = available;
    while (r > 1) {
        const double next_tail = tail + s[static_cast<Eigen::Index>(r - 1)] * s[static_cast<Eigen::Index>(r - 1)];
        if (next_tail > budget) break;
        tail = next_tail;
        --r;
    }
    return r;
}

}  // namespace detail

/// Truncated SVD of `m` under `rule`. Singular values below
/// max(rows, cols) * machine-epsilon * s_max count as zero and are never kept.
/// Each kept left vector is flipped so its largest-magnitude entry is positive.
inline SvdResult truncated_svd(const Matrix& m, const TruncationRule& rule) {
    if (!all_finite(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())))) {
        throw NumericalError("truncated_svd: matrix contains non-finite entries");
    }
    const auto min_dim = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
    if (min_dim == 0) throw ConfigError("truncated_svd: empty matrix");
    if (const auto* d = std::get_if<DeltaRule>(&rule); d && !(d->delta >= 0.0)) {
        throw ConfigError("truncated_svd: delta must be nonnegative");
    }
    if (const auto* r = std::get_if<RankRule>(&rule); r && (r->rank < 1 || r->rank > min_dim)) {
        throw ConfigError("truncated_svd: rank " + std::to_string(r->rank) + " outside [1, " +
                          std::to_string(min_dim) + "]");
    }

    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();

    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                       std::numeric_limits<double>::epsilon() * (s.size() ? s[0] : 0.0);
    std::size_t numerical = 0;
    while (numerical < static_cast<std::size_t>(s.size()) && s[static_cast<Eigen::Index>(numerical)] > tol) {
        ++numerical;
    }

    SvdResult out;
    out.numerical_rank = numerical;
    out.spectrum = s;
    std::size_t keep = 0;
    if (numerical > 0) {
        keep = std::visit(
            [&](const auto& r) -> std::size_t {
                if constexpr (std::is_same_v<std::decay_t<decltype(r)>, RankRule>) {
                    return std::min(r.rank, numerical);
                } else {
                    return detail::delta_rank(s, numerical, r.delta);
                }
            },
            rule);
    }

    const auto k = static_cast<Eigen::Index>(keep);
    out.singular_values = s.head(k);
    out.left_factors = svd.matrixU().leftCols(k);
    Matrix v = svd.matrixV().leftCols(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index pivot = 0;
        out.left_factors.col(j).cwiseAbs().maxCoeff(&pivot);
        if (out.left_factors(pivot, j) < 0.0) {
            out.left_factors.col(j) *= -1.0;
            v.col(j) *= -1.0;
        }
    }
    out.weighted_right = out.singular_values.asDiagonal() * v.transpose();
    double tail = 0.0;
    for (Eigen::Index i = s.size(); i-- > k;) tail += s[i] * s[i];
    out.discarded_energy = tail;
    return out;
}

}  // namespace ctt
