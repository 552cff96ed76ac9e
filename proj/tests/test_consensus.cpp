#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"

using namespace ctt;

namespace {

Topology eight_node() {
    Topology t(8);
    for (auto [i, j] : std::vector<std::pair<int, int>>{{4, 3}, {3, 1}, {1, 2}, {2, 4}, {4, 5}, {5, 6}, {6, 8}, {8, 7}, {7, 6}}) {
        t.add_edge(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
    }
    return t;
}

std::vector<Matrix> random_states(std::size_t k, std::uint64_t stream) {
    std::vector<Matrix> s;
    for (std::size_t i = 0; i < k; ++i) s.push_back(testutil::random_matrix(3, 4, stream + i));
    return s;
}

}  // namespace

TEST(Topology, EdgeRules) {
    Topology t(3);
    t.add_edge(0, 1);
    EXPECT_THROW(t.add_edge(1, 0), ConfigError);
    EXPECT_THROW(t.add_edge(2, 2), ConfigError);
    EXPECT_THROW(t.add_edge(0, 3), ConfigError);
    EXPECT_FALSE(t.connected());
    t.add_edge(1, 2);
    EXPECT_TRUE(t.connected());
    EXPECT_DOUBLE_EQ(t.density(), 2.0 / 3.0);
    EXPECT_EQ(t.neighbors(1), (std::vector<std::size_t>{0, 2}));
}

TEST(Topology, DisconnectedErrorNamesComponents) {
    Topology t(5);
    t.add_edge(0, 1);
    t.add_edge(2, 3);
    try {
        t.require_connected();
        FAIL();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("{1,2}"), std::string::npos);
        EXPECT_NE(msg.find("{3,4}"), std::string::npos);
        EXPECT_NE(msg.find("{5}"), std::string::npos);
    }
}

TEST(DegreeRule, TwoNodes) {
    Topology t(2);
    t.add_edge(0, 1);
    MixingMatrix m = mixing_from_degree_rule(t);
    EXPECT_TRUE(m.weights.isApprox(Matrix::Constant(2, 2, 0.5)));
}

TEST(DegreeRule, EightNodeExampleLambda2) {
    EXPECT_NEAR(lambda2(mixing_from_degree_rule(eight_node())), 0.972, 1e-3);
}

TEST(DegreeRule, RingInvariants) {
    Topology t = Topology::ring(4);
    MixingMatrix m = mixing_from_degree_rule(t);
    EXPECT_NO_THROW(m.validate(&t));
    EXPECT_LE((m.weights - m.weights.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((m.weights.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(DegreeRule, RejectsDisconnected) {
    Topology t(3);
    t.add_edge(0, 1);
    EXPECT_THROW(mixing_from_degree_rule(t), ConfigError);
}

TEST(Magic, ThreeByThree) {
    Eigen::MatrixXi a = magic_square(3);
    Eigen::MatrixXi expected(3, 3);
    expected << 8, 1, 6, 3, 5, 7, 4, 9, 2;
    EXPECT_EQ(a, expected);
    MixingMatrix m = mixing_magic(3);
    Matrix ref = (expected + expected.transpose()).cast<double>() / 30.0;
    EXPECT_LE((m.weights - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Magic, SquaresAreMagicAndMixingValid) {
    for (std::size_t k = 3; k <= 12; ++k) {
        Eigen::MatrixXi a = magic_square(k);
        const int c = static_cast<int>(k * (k * k + 1) / 2);
        std::vector<int> seen(a.data(), a.data() + a.size());
        std::sort(seen.begin(), seen.end());
        for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], static_cast<int>(i + 1)) << "K=" << k;
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            EXPECT_EQ(a.row(i).sum(), c) << "K=" << k;
            EXPECT_EQ(a.col(i).sum(), c) << "K=" << k;
        }
        EXPECT_EQ(a.diagonal().sum(), c) << "K=" << k;
        EXPECT_EQ(a.rowwise().reverse().diagonal().sum(), c) << "K=" << k;
        MixingMatrix m = mixing_magic(k);
        EXPECT_NO_THROW(m.validate(nullptr));
        EXPECT_LE((m.weights * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k)) - Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k)))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-12);
        EXPECT_LT(lambda2(m), 1.0);
    }
    EXPECT_THROW(mixing_magic(2), ConfigError);
}

TEST(Lambda2, Examples) {
    MixingMatrix uniform{Matrix::Constant(5, 5, 0.2), MixingSource::user_supplied};
    EXPECT_NEAR(lambda2(uniform), 0.0, 1e-12);
    MixingMatrix identity{Matrix::Identity(4, 4), MixingSource::user_supplied};
    EXPECT_NEAR(lambda2(identity), 1.0, 1e-12);
    Matrix asym = Matrix::Constant(3, 3, 1.0 / 3.0);
    asym(0, 1) += 0.1;
    asym(0, 2) -= 0.1;
    EXPECT_THROW(lambda2(MixingMatrix{asym, MixingSource::user_supplied}), ConfigError);
    EXPECT_NEAR(lambda2(mixing_from_degree_rule(Topology::complete(4))), 0.0, 1e-12);
}

TEST(Consensus, IdenticalStatesAreFixed) {
    std::vector<Matrix> s(4, testutil::random_matrix(3, 4, 1));
    Topology t = Topology::ring(4);
    auto r = consensus_iterate(s, mixing_from_degree_rule(t), t, 5);
    for (double a : r.error_trace) EXPECT_LE(a, 1e-15);
    for (const auto& z : r.states) EXPECT_LE((z - s[0]).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Consensus, UniformOneRoundIsExactMean) {
    auto s = random_states(4, 10);
    Topology t = Topology::complete(4);
    auto r = consensus_iterate(s, mixing_from_degree_rule(t), t, 1);
    Matrix mean = (s[0] + s[1] + s[2] + s[3]) / 4.0;
    for (const auto& z : r.states) EXPECT_LE((z - mean).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Consensus, SpectralDecayOnEightNodeExample) {
    Topology t = eight_node();
    MixingMatrix m = mixing_from_degree_rule(t);
    const double l2 = lambda2(m);
    auto r = consensus_iterate(random_states(8, 20), m, t, 50);
    ASSERT_EQ(r.error_trace.size(), 50u);
    double prev = r.initial_error;
    for (std::size_t l = 0; l < 50; ++l) {
        EXPECT_LE(r.error_trace[l], r.initial_error * std::pow(l2, static_cast<double>(l + 1)) * (1 + 1e-9));
        EXPECT_LE(r.error_trace[l], l2 * prev + 1e-12);
        prev = r.error_trace[l];
    }
}

TEST(Consensus, MeanPreservedAndMessagesCounted) {
    Topology t = random_topology(7, 0.5, 3);
    auto s = random_states(7, 30);
    Matrix mean0 = Matrix::Zero(3, 4);
    for (const auto& z : s) mean0 += z / 7.0;
    SimNetwork sim;
    auto r = consensus_iterate(s, mixing_from_degree_rule(t), t, 6, &sim);
    Matrix mean = Matrix::Zero(3, 4);
    for (const auto& z : r.states) mean += z / 7.0;
    EXPECT_LE((mean - mean0).norm(), 1e-10 * mean0.norm());
    for (std::size_t l = 0; l < 6; ++l) EXPECT_EQ(sim.messages_in_round(l), 2 * t.edge_count());
    for (const auto& msg : sim.log()) {
        EXPECT_EQ(msg.kind, PayloadKind::consensus_state);
        EXPECT_TRUE(t.has_edge(static_cast<std::size_t>(msg.from), static_cast<std::size_t>(msg.to)));
    }
}

TEST(Consensus, ShapeMismatchAndStalledMixing) {
    Topology t = Topology::ring(3);
    std::vector<Matrix> s{Matrix::Ones(2, 2), Matrix::Ones(2, 3), Matrix::Ones(2, 2)};
    EXPECT_THROW(consensus_iterate(s, mixing_from_degree_rule(t), t, 1), ConfigError);
    auto ok = random_states(3, 40);
    auto r = consensus_iterate(ok, MixingMatrix{Matrix::Identity(3, 3), MixingSource::user_supplied}, t, 2);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(EstimateRounds, Examples) {
    EXPECT_EQ(estimate_rounds(0.5, 0.25), 2u);
    EXPECT_EQ(estimate_rounds(0.972, 0.01), 163u);
    EXPECT_EQ(estimate_rounds(1e-12, 0.5), 1u);
    EXPECT_EQ(estimate_rounds(1e-300, 1e-6), 1u);
    EXPECT_THROW(estimate_rounds(0.0, 0.1), ConfigError);
    EXPECT_THROW(estimate_rounds(1.0, 0.1), ConfigError);
    EXPECT_THROW(estimate_rounds(0.5, 1.0), ConfigError);
}

TEST(RandomTopology, Examples) {
    EXPECT_EQ(random_topology(6, 1.0, 1).edge_count(), 15u);
    for (double s : {0.1, 0.5, 1.0}) EXPECT_EQ(random_topology(2, s, 2).edge_count(), 1u);
    Topology t = random_topology(8, 0.5, 3);
    EXPECT_EQ(t.edge_count(), 14u);
    EXPECT_TRUE(t.connected());
    EXPECT_THROW(random_topology(8, 0.1, 3), ConfigError);
    EXPECT_THROW(random_topology(1, 1.0, 3), ConfigError);
}

TEST(RandomTopology, DeterministicAndConnected) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Topology a = random_topology(10, 0.3, seed);
        Topology b = random_topology(10, 0.3, seed);
        EXPECT_EQ(a.edges(), b.edges());
        EXPECT_TRUE(a.connected());
        EXPECT_EQ(a.edge_count(), 14u);
    }
}

TEST(EdgeList, RoundTripAndErrors) {
    Topology t = eight_node();
    std::stringstream ss;
    write_edge_list(ss, t);
    Topology back = read_edge_list(ss);
    EXPECT_EQ(back.node_count(), 8u);
    EXPECT_EQ(back.edges(), t.edges());

    std::stringstream comments("# header\n3\n\n1 2\n# mid\n2 3\n");
    EXPECT_EQ(read_edge_list(comments).edge_count(), 2u);
    std::stringstream bad_pair("3\n1 x\n");
    EXPECT_THROW(read_edge_list(bad_pair), FormatError);
    std::stringstream zero("3\n0 1\n");
    EXPECT_THROW(read_edge_list(zero), FormatError);
    std::stringstream out_of_range("3\n1 4\n");
    EXPECT_THROW(read_edge_list(out_of_range), ConfigError);
    std::stringstream empty("");
    EXPECT_THROW(read_edge_list(empty), FormatError);
}
