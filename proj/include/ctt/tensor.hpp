#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ctt/error.hpp"

namespace ctt {

using Dims = std::vector<std::size_t>;
using Matrix = Eigen::MatrixXd;

inline std::size_t product(std::span<const std::size_t> extents) {
    return std::accumulate(extents.begin(), extents.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string to_string(const Dims& dims) {
    std::ostringstream os;
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
    return os.str();
}

/// N-way array of doubles stored colexicographically (first index fastest).
///
/// The buffer layout coincides with Eigen's column-major storage, so the
/// 1-unfolding of any tensor is a zero-copy matrix view and a reshape never
/// touches the data.
class DenseTensor {
public:
    DenseTensor() : dims_{1}, data_(1, 0.0) {}

    explicit DenseTensor(Dims dims) : dims_(std::move(dims)) {
        validate_dims(dims_);
        data_.assign(product(dims_), 0.0);
    }

    DenseTensor(Dims dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data)) {
        validate_dims(dims_);
        if (data_.size() != product(dims_)) {
            throw ConfigError("tensor buffer holds " + std::to_string(data_.size()) +
                              " values but dims " + to_string(dims_) + " need " +
                              std::to_string(product(dims_)));
        }
    }

    static DenseTensor from_matrix(const Matrix& m) {
        DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
        Eigen::Map<Matrix>(t.data_.data(), m.rows(), m.cols()) = m;
        return t;
    }

    const Dims& dims() const { return dims_; }
    std::size_t order() const { return dims_.size(); }
    std::size_t extent(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const { return data_.size(); }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](std::size_t linear) const { return data_[linear]; }
    double& operator[](std::size_t linear) { return data_[linear]; }

    std::size_t linear_index(std::span<const std::size_t> index) const {
        if (index.size() != dims_.size()) throw ConfigError("index arity does not match tensor order");
        std::size_t linear = 0;
        for (std::size_t n = dims_.size(); n-- > 0;) {
            if (index[n] >= dims_[n]) throw ConfigError("index out of range");
            linear = linear * dims_[n] + index[n];
        }
        return linear;
    }

    double at(std::initializer_list<std::size_t> index) const {
        return data_[linear_index(std::span<const std::size_t>(index.begin(), index.size()))];
    }
    double& at(std::initializer_list<std::size_t> index) {
        return data_[linear_index(std::span<const std::size_t>(index.begin(), index.size()))];
    }

    /// Relabel the extents; the buffer is unchanged.
    DenseTensor reshaped(Dims dims) const& { return DenseTensor(std::move(dims), data_); }
    DenseTensor reshaped(Dims dims) && { return DenseTensor(std::move(dims), std::move(data_)); }

    /// Column-major view with `rows` rows; `rows` must divide the element count.
    Eigen::Map<const Matrix> as_matrix(std::size_t rows) const {
        check_rows(rows);
        return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(data_.size() / rows)};
    }
    Eigen::Map<Matrix> as_matrix(std::size_t rows) {
        check_rows(rows);
        return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(data_.size() / rows)};
    }

    bool operator==(const DenseTensor&) const = default;

private:
    static void validate_dims(const Dims& dims) {
        if (dims.empty()) throw ConfigError("tensor order must be at least 1");
        for (auto d : dims) {
            if (d == 0) throw ConfigError("tensor extents must be positive, got " + to_string(dims));
        }
    }

    void check_rows(std::size_t rows) const {
        if (rows == 0 || data_.size() % rows != 0) {
            throw ConfigError("cannot view " + to_string(dims_) + " as a matrix with " +
                              std::to_string(rows) + " rows");
        }
    }

    Dims dims_;
    std::vector<double> data_;
};

/// Mode-`mode` unfolding (0-based mode). Columns run colexicographically over
/// the remaining modes in increasing mode order.
inline Matrix unfold(const DenseTensor& t, std::size_t mode) {
    if (mode >= t.order()) {
        throw ConfigError("unfold: mode " + std::to_string(mode) + " out of range for order " +
                          std::to_string(t.order()));
    }
    const auto& dims = t.dims();
    const std::size_t before = product(std::span(dims).first(mode));
    const std::size_t extent = dims[mode];
    const std::size_t after = product(std::span(dims).subspan(mode + 1));
    Matrix out(static_cast<Eigen::Index>(extent), static_cast<Eigen::Index>(before * after));
    const auto src = t.data();
    for (std::size_t b = 0; b < after; ++b) {
        for (std::size_t i = 0; i < extent; ++i) {
            const std::size_t base = before * (i + extent * b);
            for (std::size_t a = 0; a < before; ++a) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + before * b)) = src[base + a];
            }
        }
    }
    return out;
}

/// Inverse of `unfold` for the given target dims.
inline DenseTensor refold(const Matrix& m, std::size_t mode, const Dims& dims) {
    DenseTensor t(dims);
    if (mode >= dims.size()) throw ConfigError("refold: mode out of range");
    const std::size_t before = product(std::span(dims).first(mode));
    const std::size_t extent = dims[mode];
    const std::size_t after = product(std::span(dims).subspan(mode + 1));
    if (static_cast<std::size_t>(m.rows()) != extent || static_cast<std::size_t>(m.cols()) != before * after) {
        throw ConfigError("refold: matrix shape does not match dims " + to_string(dims));
    }
    auto dst = t.data();
    for (std::size_t b = 0; b < after; ++b) {
        for (std::size_t i = 0; i < extent; ++i) {
            const std::size_t base = before * (i + extent * b);
            for (std::size_t a = 0; a < before; ++a) {
                dst[base + a] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + before * b));
            }
        }
    }
    return t;
}

/// Contraction over the last `shared` modes of `a` and the first `shared` modes of `b`.
/// Output dims are a's leading dims followed by b's trailing dims; a full
/// contraction yields a 1-element tensor.
inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b, std::size_t shared) {
    if (shared == 0 || shared > a.order() || shared > b.order()) {
        throw ConfigError("contract: cannot share " + std::to_string(shared) + " modes between " +
                          to_string(a.dims()) + " and " + to_string(b.dims()));
    }
    const auto& ad = a.dims();
    const auto& bd = b.dims();
    for (std::size_t i = 0; i < shared; ++i) {
        if (ad[ad.size() - shared + i] != bd[i]) {
            throw ConfigError("contract: shared modes differ between " + to_string(ad) + " and " +
                              to_string(bd));
        }
    }
    Dims out_dims(ad.begin(), ad.end() - static_cast<std::ptrdiff_t>(shared));
    out_dims.insert(out_dims.end(), bd.begin() + static_cast<std::ptrdiff_t>(shared), bd.end());
    if (out_dims.empty()) out_dims.push_back(1);

    const std::size_t rows = product(std::span(ad).first(ad.size() - shared));
    const std::size_t inner = product(std::span(bd).first(shared));
    DenseTensor out(out_dims);
    out.as_matrix(rows).noalias() = a.as_matrix(rows) * b.as_matrix(inner);
    return out;
}

inline double frobenius_norm(const DenseTensor& t) {
    double sum = 0.0;
    for (double v : t.data()) sum += v * v;
    return std::sqrt(sum);
}

inline double squared_norm(const DenseTensor& t) {
    double sum = 0.0;
    for (double v : t.data()) sum += v * v;
    return sum;
}

inline bool all_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

inline DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
    if (a.dims() != b.dims()) throw ConfigError("tensor difference needs equal dims");
    DenseTensor out(a.dims());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline DenseTensor scaled(const DenseTensor& t, double factor) {
    DenseTensor out = t;
    for (double& v : out.data()) v *= factor;
    return out;
}

}  // namespace ctt
