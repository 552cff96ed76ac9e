#pragma once

// Reference implementations kept deliberately naive. None of these call the
// library kernels they are used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;   // row-major, grid[i][j]

inline Grid zeros(std::size_t rows, std::size_t cols) { return Grid(rows, std::vector<double>(cols, 0.0)); }

/// Singular values of a (small) matrix by one-sided Jacobi rotations, descending.
inline std::vector<double> jacobi_singular_values(Grid a, int sweeps = 60) {
    const std::size_t m = a.size();
    const std::size_t n = m ? a[0].size() : 0;
    if (n > m) {  // work on the transpose so columns <= rows
        Grid t = zeros(n, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) t[j][i] = a[i][j];
        return jacobi_singular_values(t, sweeps);
    }
    for (int s = 0; s < sweeps; ++s) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0, beta = 0, gamma = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += a[i][p] * a[i][p];
                    beta += a[i][q] * a[i][q];
                    gamma += a[i][p] * a[i][q];
                }
                if (std::abs(gamma) <= 1e-300) continue;
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double ap = a[i][p], aq = a[i][q];
                    a[i][p] = c * ap - sn * aq;
                    a[i][q] = sn * ap + c * aq;
                }
            }
        }
        if (off < 1e-15) break;
    }
    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i) s += a[i][j] * a[i][j];
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

/// Colexicographic linear index of `idx` in `dims`.
inline std::size_t colex(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& dims) {
    std::size_t lin = 0, stride = 1;
    for (std::size_t n = 0; n < dims.size(); ++n) {
        lin += idx[n] * stride;
        stride *= dims[n];
    }
    return lin;
}

/// Enumerate every multi-index of `dims` in colexicographic order.
template <class F>
void for_each_index(const std::vector<std::size_t>& dims, F&& f) {
    std::size_t total = 1;
    for (auto d : dims) total *= d;
    std::vector<std::size_t> idx(dims.size(), 0);
    for (std::size_t c = 0; c < total; ++c) {
        f(idx);
        for (std::size_t n = 0; n < dims.size(); ++n) {
            if (++idx[n] < dims[n]) break;
            idx[n] = 0;
        }
    }
}

/// Contraction over the last `shared` modes of a and the first of b, entry by entry.
inline std::vector<double> contract(const std::vector<double>& a, const std::vector<std::size_t>& adims, const std::vector<double>& b,
                                    const std::vector<std::size_t>& bdims, std::size_t shared, std::vector<std::size_t>& out_dims) {
    std::vector<std::size_t> lead(adims.begin(), adims.end() - static_cast<long>(shared));
    std::vector<std::size_t> mid(adims.end() - static_cast<long>(shared), adims.end());
    std::vector<std::size_t> tail(bdims.begin() + static_cast<long>(shared), bdims.end());
    out_dims = lead;
    out_dims.insert(out_dims.end(), tail.begin(), tail.end());
    if (out_dims.empty()) out_dims = {1};
    std::size_t total = 1;
    for (auto d : out_dims) total *= d;
    std::vector<double> out(total, 0.0);
    std::vector<std::size_t> od = lead;
    od.insert(od.end(), tail.begin(), tail.end());
    for_each_index(od, [&](const std::vector<std::size_t>& o) {
        double s = 0.0;
        for_each_index(mid, [&](const std::vector<std::size_t>& k) {
            std::vector<std::size_t> ia(o.begin(), o.begin() + static_cast<long>(lead.size()));
            ia.insert(ia.end(), k.begin(), k.end());
            std::vector<std::size_t> ib(k);
            ib.insert(ib.end(), o.begin() + static_cast<long>(lead.size()), o.end());
            s += a[colex(ia, adims)] * b[colex(ib, bdims)];
        });
        out[od.empty() ? 0 : colex(o, od)] = s;
    });
    return out;
}

/// One entry of a tensor train: product of the core slices G_n(:, i_n, :).
/// Cores are colexicographic R_{n-1} x I_n x R_n buffers with their dims.
inline double tt_entry(const std::vector<std::vector<double>>& cores, const std::vector<std::vector<std::size_t>>& dims,
                       const std::vector<std::size_t>& idx) {
    std::vector<double> row(dims[0][0], 0.0);
    row[0] = 1.0;  // R_0 = 1
    for (std::size_t n = 0; n < cores.size(); ++n) {
        const auto r0 = dims[n][0], in = dims[n][1], r1 = dims[n][2];
        std::vector<double> next(r1, 0.0);
        for (std::size_t b = 0; b < r1; ++b)
            for (std::size_t a = 0; a < r0; ++a) next[b] += row[a] * cores[n][a + r0 * (idx[n] + in * b)];
        row = std::move(next);
    }
    return row[0];
}

inline double two_pass_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size());
}

/// kNN by sorting all (distance, index) pairs; vote ties go to the smallest label.
inline std::vector<int> knn(const Grid& train, const std::vector<int>& labels, const Grid& test, std::size_t k) {
    std::vector<int> out;
    for (const auto& t : test) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t i = 0; i < train.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < t.size(); ++j) s += (t[j] - train[i][j]) * (t[j] - train[i][j]);
            d.emplace_back(s, i);
        }
        std::sort(d.begin(), d.end());
        std::map<int, int> votes;
        for (std::size_t i = 0; i < k; ++i) ++votes[labels[d[i].second]];
        int best = votes.begin()->first, count = -1;
        for (const auto& [label, c] : votes) {
            if (c > count) {
                best = label;
                count = c;
            }
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace oracle
