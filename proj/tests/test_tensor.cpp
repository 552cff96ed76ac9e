#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace ctt;

TEST(DenseTensor, RejectsBadShapes) {
    EXPECT_THROW(DenseTensor(Dims{}), ConfigError);
    EXPECT_THROW(DenseTensor(Dims{2, 0}), ConfigError);
    EXPECT_THROW(DenseTensor(Dims{2, 2}, std::vector<double>(3)), ConfigError);
}

TEST(DenseTensor, ColexicographicIndexing) {
    std::vector<double> v(24);
    std::iota(v.begin(), v.end(), 0.0);
    DenseTensor t({2, 3, 4}, v);
    EXPECT_EQ(t.at({1, 0, 0}), 1.0);
    EXPECT_EQ(t.at({0, 1, 0}), 2.0);
    EXPECT_EQ(t.at({0, 0, 1}), 6.0);
    EXPECT_EQ(t.at({1, 2, 3}), 23.0);
}

TEST(DenseTensor, ReshapeKeepsBuffer) {
    DenseTensor t = testutil::random_tensor({2, 3, 4}, 1);
    DenseTensor r = t.reshaped({6, 4});
    EXPECT_EQ(r.values(), t.values());
    EXPECT_EQ(r.dims(), (Dims{6, 4}));
    EXPECT_THROW(t.reshaped({5, 5}), ConfigError);
}

TEST(Unfold, EightEntryExample) {
    DenseTensor t({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
    Matrix m = unfold(t, 0);
    Matrix expected(2, 4);
    expected << 1, 3, 5, 7, 2, 4, 6, 8;
    EXPECT_EQ(m, expected);
}

TEST(Unfold, OrderOne) {
    DenseTensor t({3}, {1, 2, 3});
    Matrix m = unfold(t, 0);
    EXPECT_EQ(m.rows(), 3);
    EXPECT_EQ(m.cols(), 1);
    EXPECT_EQ(m(2, 0), 3.0);
}

TEST(Unfold, MatchesIndexArithmetic) {
    const Dims dims{3, 4, 2, 5};
    DenseTensor t = testutil::random_tensor(dims, 2);
    for (std::size_t n = 0; n < dims.size(); ++n) {
        Matrix m = unfold(t, n);
        ASSERT_EQ(static_cast<std::size_t>(m.rows()), dims[n]);
        oracle::for_each_index(dims, [&](const std::vector<std::size_t>& idx) {
            Dims rest, rest_idx;
            for (std::size_t i = 0; i < dims.size(); ++i) {
                if (i == n) continue;
                rest.push_back(dims[i]);
                rest_idx.push_back(idx[i]);
            }
            EXPECT_EQ(m(static_cast<Eigen::Index>(idx[n]), static_cast<Eigen::Index>(oracle::colex(rest_idx, rest))),
                      t[oracle::colex(idx, dims)]);
        });
    }
}

TEST(Unfold, RoundTripBitwiseAndNormInvariant) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        CounterRng rng(0, 500 + s);
        const std::size_t order = 1 + rng.below(4);
        Dims dims;
        for (std::size_t i = 0; i < order; ++i) dims.push_back(1 + rng.below(5));
        DenseTensor t = testutil::random_tensor(dims, 600 + s);
        const double norm2 = squared_norm(t);
        for (std::size_t n = 0; n < order; ++n) {
            Matrix m = unfold(t, n);
            EXPECT_EQ(refold(m, n, dims), t);
            EXPECT_NEAR(m.squaredNorm(), norm2, 1e-12 * norm2);
        }
    }
}

TEST(Unfold, ModeOutOfRange) {
    DenseTensor t({2, 2});
    EXPECT_THROW(unfold(t, 2), ConfigError);
    EXPECT_THROW(refold(Matrix::Zero(3, 2), 0, {2, 2}), ConfigError);
}

TEST(Contract, MatrixProduct) {
    Matrix a = testutil::random_matrix(2, 3, 3);
    Matrix b = testutil::random_matrix(3, 2, 4);
    DenseTensor c = contract(DenseTensor::from_matrix(a), DenseTensor::from_matrix(b), 1);
    EXPECT_EQ(c.dims(), (Dims{2, 2}));
    Matrix ab = a * b;
    for (Eigen::Index j = 0; j < 2; ++j)
        for (Eigen::Index i = 0; i < 2; ++i) EXPECT_EQ(c.at({static_cast<std::size_t>(i), static_cast<std::size_t>(j)}), ab(i, j));
}

TEST(Contract, OnesGiveSharedExtent) {
    DenseTensor a({2, 3}, std::vector<double>(6, 1.0));
    DenseTensor b({3, 4}, std::vector<double>(12, 1.0));
    DenseTensor c = contract(a, b, 1);
    EXPECT_EQ(c.dims(), (Dims{2, 4}));
    for (double v : c.data()) EXPECT_EQ(v, 3.0);
}

TEST(Contract, TwoSharedModesMatchesLoopOracle) {
    DenseTensor a = testutil::random_tensor({2, 3, 4}, 5);
    DenseTensor b = testutil::random_tensor({3, 4, 5}, 6);
    DenseTensor c = contract(a, b, 2);
    Dims od;
    auto ref = oracle::contract(a.values(), a.dims(), b.values(), b.dims(), 2, od);
    ASSERT_EQ(c.dims(), od);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-12);
}

TEST(Contract, Associative) {
    DenseTensor a = testutil::random_tensor({3, 4}, 7);
    DenseTensor b = testutil::random_tensor({4, 2, 5}, 8);
    DenseTensor c = testutil::random_tensor({5, 3}, 9);
    DenseTensor left = contract(contract(a, b, 1), c, 1);
    DenseTensor right = contract(a, contract(b, c, 1), 1);
    EXPECT_LE(testutil::rel_error(left, right), 1e-10);
}

TEST(Contract, ShapeMismatch) {
    EXPECT_THROW(contract(DenseTensor({2, 3}), DenseTensor({4, 2}), 1), ConfigError);
    EXPECT_THROW(contract(DenseTensor({2, 3}), DenseTensor({3, 2}), 3), ConfigError);
}

TEST(Norm, Examples) {
    EXPECT_EQ(frobenius_norm(DenseTensor({3, 3})), 0.0);
    EXPECT_DOUBLE_EQ(frobenius_norm(DenseTensor({2, 2}, {1, 0, 0, 1})), std::sqrt(2.0));
    DenseTensor t = testutil::random_tensor({3, 4, 5}, 10);
    double s = 0.0;
    for (double v : t.values()) s += v * v;
    EXPECT_NEAR(frobenius_norm(t), std::sqrt(s), 1e-13);
}
