#pragma once

#include <cstdint>
#include <vector>

#include "ctt.hpp"

namespace testutil {

inline ctt::DenseTensor random_tensor(const ctt::Dims& dims, std::uint64_t stream, std::uint64_t seed = 0) {
    ctt::DenseTensor t(dims);
    ctt::CounterRng rng(seed, stream);
    for (double& v : t.data()) v = rng.normal();
    return t;
}

inline ctt::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t stream, std::uint64_t seed = 0) {
    ctt::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    ctt::CounterRng rng(seed, stream);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
    return m;
}

/// Random cores with bond ranks `ranks` (length = extents.size() + 1).
inline std::vector<ctt::DenseTensor> random_cores(const ctt::Dims& extents, const std::vector<std::size_t>& ranks, std::uint64_t stream) {
    std::vector<ctt::DenseTensor> cores;
    for (std::size_t n = 0; n < extents.size(); ++n) {
        cores.push_back(random_tensor({ranks[n], extents[n], ranks[n + 1]}, stream * 97 + n));
    }
    return cores;
}

inline double rel_error(const ctt::DenseTensor& a, const ctt::DenseTensor& b) {
    return ctt::frobenius_norm(a - b) / ctt::frobenius_norm(a);
}

inline std::vector<double> to_vec(const ctt::DenseTensor& t) { return t.values(); }

}  // namespace testutil
