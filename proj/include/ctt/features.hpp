#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ctt/engine.hpp"
#include "ctt/error.hpp"
#include "ctt/rng.hpp"
#include "ctt/tensor.hpp"

namespace ctt {

/// Population variance (divisor = length) of each lateral slice G_n(:, j, :),
/// one vector per feature mode n = 2..N.
inline std::vector<std::vector<double>> feature_variance(const GlobalFeatures& features) {
    features.validate();
    std::vector<std::vector<double>> out;
    for (const auto& core : features.cores) {
        const std::size_t left = core.extent(0), extent = core.extent(1), right = core.extent(2);
        std::vector<double> var(extent, 0.0);
        for (std::size_t j = 0; j < extent; ++j) {
            // Welford over the slice entries.
            double mean = 0.0, m2 = 0.0;
            std::size_t count = 0;
            for (std::size_t b = 0; b < right; ++b) {
                for (std::size_t a = 0; a < left; ++a) {
                    const double v = core[a + left * (j + extent * b)];
                    ++count;
                    const double delta = v - mean;
                    mean += delta / static_cast<double>(count);
                    m2 += delta * (v - mean);
                }
            }
            var[j] = m2 / static_cast<double>(count);
        }
        out.push_back(std::move(var));
    }
    return out;
}

/// Per feature mode: the m indices (0-based, ascending) with the largest
/// variance; ties go to the smaller index.
struct FeatureSelection {
    std::vector<std::vector<double>> variances;
    std::vector<std::vector<std::size_t>> selected;
};

inline FeatureSelection select_top_m(const std::vector<std::vector<double>>& variances, std::size_t m) {
    FeatureSelection sel{variances, {}};
    for (std::size_t n = 0; n < variances.size(); ++n) {
        const auto& v = variances[n];
        if (m < 1 || m > v.size()) {
            throw ConfigError("select_top_m: m = " + std::to_string(m) + " outside [1, " + std::to_string(v.size()) +
                              "] for feature mode " + std::to_string(n + 2));
        }
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
        idx.resize(m);
        std::sort(idx.begin(), idx.end());
        sel.selected.push_back(std::move(idx));
    }
    return sel;
}

/// Row i holds x(i, J_2, ..., J_N) over the Cartesian product of the selected
/// index sets, colexicographic (J_2 fastest).
inline Matrix build_embeddings(const DenseTensor& x, const FeatureSelection& sel) {
    if (sel.selected.size() + 1 != x.order()) {
        throw ConfigError("build_embeddings: selection covers " + std::to_string(sel.selected.size()) +
                          " modes, tensor has " + std::to_string(x.order() - 1) + " feature modes");
    }
    std::size_t width = 1;
    for (std::size_t n = 0; n < sel.selected.size(); ++n) {
        for (std::size_t j : sel.selected[n]) {
            if (j >= x.extent(n + 1)) throw ConfigError("build_embeddings: index " + std::to_string(j + 1) + " out of range");
        }
        width *= sel.selected[n].size();
    }
    const std::size_t rows = x.extent(0);
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
    std::vector<std::size_t> pos(sel.selected.size(), 0);
    for (std::size_t col = 0; col < width; ++col) {
        // Linear offset of (., J_2[pos_2], ..., J_N[pos_N]).
        std::size_t offset = 0, stride = rows;
        for (std::size_t n = 0; n < pos.size(); ++n) {
            offset += sel.selected[n][pos[n]] * stride;
            stride *= x.extent(n + 1);
        }
        for (std::size_t i = 0; i < rows; ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = x[offset + i];
        for (std::size_t n = 0; n < pos.size(); ++n) {
            if (++pos[n] < sel.selected[n].size()) break;
            pos[n] = 0;
        }
    }
    return out;
}

struct KnnResult {
    std::vector<int> predictions;
    double accuracy = 0.0;   // only meaningful when test labels were given
};

/// Euclidean kNN with majority vote. Distance ties keep the smaller train
/// index; vote ties go to the smallest label.
inline std::vector<int> knn_predict(const Matrix& train, const std::vector<int>& train_labels, const Matrix& test, std::size_t k) {
    if (train.rows() == 0) throw ConfigError("knn: empty training set");
    if (static_cast<std::size_t>(train.rows()) != train_labels.size()) throw ConfigError("knn: label count differs from training rows");
    if (k < 1 || k > static_cast<std::size_t>(train.rows())) {
        throw ConfigError("knn: k = " + std::to_string(k) + " outside [1, " + std::to_string(train.rows()) + "]");
    }
    if (test.cols() != train.cols()) throw ConfigError("knn: train and test embeddings differ in width");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(test.rows()));
    std::vector<std::pair<double, std::size_t>> dist(static_cast<std::size_t>(train.rows()));
    for (Eigen::Index t = 0; t < test.rows(); ++t) {
        for (Eigen::Index i = 0; i < train.rows(); ++i) {
            dist[static_cast<std::size_t>(i)] = {(train.row(i) - test.row(t)).squaredNorm(), static_cast<std::size_t>(i)};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        std::map<int, std::size_t> votes;
        for (std::size_t j = 0; j < k; ++j) ++votes[train_labels[dist[j].second]];
        int best = votes.begin()->first;
        std::size_t best_votes = 0;
        for (const auto& [label, count] : votes) {
            if (count > best_votes) {
                best = label;
                best_votes = count;
            }
        }
        out.push_back(best);
    }
    return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || truth.empty()) throw ConfigError("accuracy: size mismatch");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

inline KnnResult knn_classify(const Matrix& train, const std::vector<int>& train_labels, const Matrix& test,
                              const std::vector<int>& test_labels, std::size_t k) {
    KnnResult r;
    r.predictions = knn_predict(train, train_labels, test, k);
    if (!test_labels.empty()) r.accuracy = accuracy(r.predictions, test_labels);
    return r;
}

struct CrossValidation {
    std::vector<double> train_accuracy;
    std::vector<double> test_accuracy;
    double mean_train = 0.0;
    double mean_test = 0.0;
    std::vector<std::string> warnings;
};

/// Repeated random train/test splits of the samples (mode-1 rows). Split r
/// shuffles with stream r of `seed`; if a class is missing from the training
/// part, the split is redrawn once from a second stream.
inline CrossValidation cross_validate(const Matrix& embeddings, const std::vector<int>& labels, std::size_t k, std::size_t repeats = 10,
                                      double train_ratio = 0.7, std::uint64_t seed = 0) {
    const auto n = static_cast<std::size_t>(embeddings.rows());
    if (labels.size() != n) throw ConfigError("cross_validate: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " samples");
    if (repeats == 0) throw ConfigError("cross_validate: repeats must be positive");
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw ConfigError("cross_validate: train ratio must lie in (0, 1)");
    const auto n_train = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(n)));
    if (n_train < k || n_train >= n) throw ConfigError("cross_validate: split leaves too few train or test samples");

    std::vector<int> classes(labels);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    auto draw = [&](std::uint64_t stream) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        CounterRng rng(seed, stream);
        for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        return perm;
    };
    auto covers_all = [&](const std::vector<std::size_t>& perm) {
        std::vector<int> seen;
        for (std::size_t i = 0; i < n_train; ++i) seen.push_back(labels[perm[i]]);
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        return seen.size() == classes.size();
    };

    CrossValidation cv;
    for (std::size_t r = 0; r < repeats; ++r) {
        auto perm = draw(r);
        if (!covers_all(perm)) {
            cv.warnings.push_back("split " + std::to_string(r) + ": class missing from training part, resampled");
            perm = draw(r + 0x10000);
        }
        Matrix train(static_cast<Eigen::Index>(n_train), embeddings.cols());
        Matrix test(static_cast<Eigen::Index>(n - n_train), embeddings.cols());
        std::vector<int> y_train, y_test;
        for (std::size_t i = 0; i < n; ++i) {
            if (i < n_train) {
                train.row(static_cast<Eigen::Index>(i)) = embeddings.row(static_cast<Eigen::Index>(perm[i]));
                y_train.push_back(labels[perm[i]]);
            } else {
                test.row(static_cast<Eigen::Index>(i - n_train)) = embeddings.row(static_cast<Eigen::Index>(perm[i]));
                y_test.push_back(labels[perm[i]]);
            }
        }
        cv.train_accuracy.push_back(accuracy(knn_predict(train, y_train, train, k), y_train));
        cv.test_accuracy.push_back(accuracy(knn_predict(train, y_train, test, k), y_test));
    }
    cv.mean_train = std::accumulate(cv.train_accuracy.begin(), cv.train_accuracy.end(), 0.0) / static_cast<double>(repeats);
    cv.mean_test = std::accumulate(cv.test_accuracy.begin(), cv.test_accuracy.end(), 0.0) / static_cast<double>(repeats);
    return cv;
}

inline CrossValidation cross_validate(const DenseTensor& x, const std::vector<int>& labels, const FeatureSelection& sel, std::size_t k,
                                      std::size_t repeats = 10, double train_ratio = 0.7, std::uint64_t seed = 0) {
    return cross_validate(build_embeddings(x, sel), labels, k, repeats, train_ratio, seed);
}

/// Labelled classification fixture: a weak low-rank background plus, on a few
/// informative indices per feature mode, a class prototype with Gaussian noise.
struct LabeledFixture {
    DenseTensor tensor;
    std::vector<int> labels;
    std::vector<std::vector<std::size_t>> informative;  // per feature mode, ascending
};

struct FixtureSpec {
    Dims dims{1000, 20, 24};
    std::size_t classes = 3;
    std::size_t informative = 5;
    double signal = 3.0;
    double noise = 1.0;
    double background = 0.3;
    std::uint64_t seed = 1;
};

inline LabeledFixture make_labeled_fixture(const FixtureSpec& spec) {
    if (spec.dims.size() < 2 || spec.classes < 1) throw ConfigError("fixture needs order >= 2 and at least one class");
    for (std::size_t n = 1; n < spec.dims.size(); ++n) {
        if (spec.informative > spec.dims[n]) throw ConfigError("fixture: more informative indices than mode extent");
    }
    CounterRng rng(spec.seed, 0x66697874);
    LabeledFixture fx{DenseTensor(spec.dims), {}, {}};
    const std::size_t samples = spec.dims[0];
    const std::size_t n_modes = spec.dims.size();

    for (std::size_t n = 1; n < n_modes; ++n) {
        std::vector<std::size_t> idx(spec.dims[n]);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
        idx.resize(spec.informative);
        std::sort(idx.begin(), idx.end());
        fx.informative.push_back(std::move(idx));
    }
    const std::size_t cell = static_cast<std::size_t>(std::pow(static_cast<double>(spec.informative), static_cast<double>(n_modes - 1)));
    std::vector<std::vector<double>> prototypes(spec.classes, std::vector<double>(cell));
    for (auto& p : prototypes) for (double& v : p) v = spec.signal * rng.normal();

    // Rank-2 background over the full feature space.
    const std::size_t feat = fx.tensor.size() / samples;
    std::vector<std::vector<double>> patterns(2, std::vector<double>(feat));
    for (auto& p : patterns) for (double& v : p) v = spec.background * rng.normal();

    for (std::size_t i = 0; i < samples; ++i) fx.labels.push_back(static_cast<int>(i % spec.classes));
    for (std::size_t i = samples - 1; i > 0; --i) std::swap(fx.labels[i], fx.labels[rng.below(i + 1)]);

    for (std::size_t i = 0; i < samples; ++i) {
        const double a = rng.normal(), b = rng.normal();
        for (std::size_t f = 0; f < feat; ++f) {
            fx.tensor[i + samples * f] = a * patterns[0][f] + b * patterns[1][f] + 0.1 * spec.noise * rng.normal();
        }
        const auto& proto = prototypes[static_cast<std::size_t>(fx.labels[i])];
        std::vector<std::size_t> pos(n_modes - 1, 0);
        for (std::size_t c = 0; c < cell; ++c) {
            std::size_t offset = 0, stride = samples;
            for (std::size_t n = 0; n + 1 < n_modes; ++n) {
                offset += fx.informative[n][pos[n]] * stride;
                stride *= spec.dims[n + 1];
            }
            fx.tensor[i + offset] += proto[c] + spec.noise * rng.normal();
            for (std::size_t n = 0; n < pos.size(); ++n) {
                if (++pos[n] < spec.informative) break;
                pos[n] = 0;
            }
        }
    }
    return fx;
}

}  // namespace ctt
