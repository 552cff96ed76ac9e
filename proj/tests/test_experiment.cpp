#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"

using namespace ctt;

namespace {

ExperimentConfig small_config(Protocol mode) {
    ExperimentConfig c;
    c.mode = mode;
    c.dataset.synthetic.dims = {40, 10, 8};
    c.dataset.synthetic.ranks = {5, 3};
    c.r1 = 5;
    c.seed = 0;
    return c;
}

json strip_time(json j) {
    j.erase("wall_time");
    return j;
}

}  // namespace

TEST(Config, ValidateRules) {
    ExperimentConfig c;
    EXPECT_NO_THROW(c.validate());
    c.eps1 = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.eps2 = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.topology.kind = TopologyKind::random;
    EXPECT_THROW(c.validate(), ConfigError);
    c.mode = Protocol::decentralized;
    EXPECT_NO_THROW(c.validate());
    c.missing = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, JsonRoundTripAndOverlay) {
    ExperimentConfig c = small_config(Protocol::decentralized);
    c.grid_r1 = {2, 3};
    c.topology.kind = TopologyKind::random;
    c.topology.density = 0.6;
    ExperimentConfig back;
    merge_json(back, to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));

    ExperimentConfig partial;
    merge_json(partial, json{{"eps1", 0.2}, {"dataset", {{"dims", {8, 4, 4}}}}});
    EXPECT_EQ(partial.eps1, 0.2);
    EXPECT_EQ(partial.eps2, 0.05);
    EXPECT_EQ(partial.rounds, 3u);
    EXPECT_EQ(partial.dataset.synthetic.dims, (Dims{8, 4, 4}));
    EXPECT_THROW(merge_json(partial, json{{"mode", "ring"}}), ConfigError);
    EXPECT_THROW(merge_json(partial, json{{"K", "four"}}), ConfigError);
}

TEST(Config, LoadFromFile) {
    const auto path = (std::filesystem::temp_directory_path() / "ctt_config_test.json").string();
    {
        std::ofstream out(path);
        out << R"({"mode": "decentralized", "L": 5, "topology": {"kind": "random", "density": 0.7}})";
    }
    ExperimentConfig c = load_config(path);
    EXPECT_EQ(c.mode, Protocol::decentralized);
    EXPECT_EQ(c.rounds, 5u);
    EXPECT_EQ(c.topology.kind, TopologyKind::random);
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    EXPECT_THROW(load_config(path), ConfigError);
    std::filesystem::remove(path);
}

TEST(RunExperiment, MasterSlaveReport) {
    RunOutcome o = run_experiment(small_config(Protocol::master_slave));
    const RunReport& r = o.report;
    EXPECT_EQ(r.rounds, 2u);
    EXPECT_TRUE(r.privacy_audit);
    EXPECT_EQ(r.rse_per_client.size(), 4u);
    EXPECT_EQ(r.links.size(), 8u);
    for (const auto& l : r.links) EXPECT_EQ(l.measured, l.predicted);
    EXPECT_EQ(r.comm_measured_total, r.comm_predicted_total);
    EXPECT_FALSE(r.lambda2.has_value());
    json j = to_json(r);
    EXPECT_EQ(j["config"]["mode"], "master-slave");
    EXPECT_EQ(j["privacy_audit"], "pass");
    EXPECT_EQ(j["comm_measured_bytes"], 8 * r.comm_measured_total);
}

TEST(RunExperiment, DecentralizedTraceLength) {
    ExperimentConfig c = small_config(Protocol::decentralized);
    RunOutcome o = run_experiment(c);
    EXPECT_EQ(o.report.consensus_error_trace.size(), 3u);
    EXPECT_EQ(o.report.rounds, 3u);
    ASSERT_TRUE(o.report.lambda2.has_value());
    for (const auto& l : o.report.links) EXPECT_EQ(l.measured, l.predicted);
    EXPECT_EQ(o.report.links.size(), 12u);
}

TEST(RunExperiment, CentralizedHasNoTraffic) {
    RunOutcome o = run_experiment(small_config(Protocol::centralized));
    EXPECT_EQ(o.report.comm_measured_total, 0u);
    EXPECT_EQ(o.report.comm_predicted_total, 0u);
    EXPECT_EQ(o.report.rounds, 0u);
    EXPECT_TRUE(o.report.links.empty());
}

TEST(RunExperiment, DeterministicApartFromWallTime) {
    for (Protocol p : {Protocol::master_slave, Protocol::decentralized}) {
        ExperimentConfig c = small_config(p);
        EXPECT_EQ(strip_time(to_json(run_experiment(c).report)), strip_time(to_json(run_experiment(c).report)));
    }
}

TEST(RunExperiment, GlobalRseCombinesClients) {
    ExperimentConfig c = small_config(Protocol::master_slave);
    PreparedData d = prepare_data(c);
    RunOutcome o = run_experiment(c);
    double num = 0, den = 0;
    for (std::size_t k = 0; k < d.reference.size(); ++k) {
        num += o.report.rse_per_client[k] * squared_norm(d.reference[k]);
        den += squared_norm(d.reference[k]);
    }
    EXPECT_NEAR(o.report.rse_global, num / den, 1e-12);
}

TEST(RunExperiment, MissingDataMeasuredAgainstCompleteTensor) {
    ExperimentConfig c = small_config(Protocol::master_slave);
    c.missing = 0.5;
    PreparedData d = prepare_data(c);
    std::size_t zeros = 0;
    for (double v : d.observed[0].data()) zeros += v == 0.0;
    EXPECT_GT(zeros, d.observed[0].size() / 3);
    RunOutcome o = run_experiment(c);
    EXPECT_GT(o.report.rse_global, run_experiment(small_config(Protocol::master_slave)).report.rse_global);
}

TEST(RunExperiment, TopologyOptions) {
    ExperimentConfig c = small_config(Protocol::decentralized);
    c.topology.kind = TopologyKind::random;
    c.topology.density = 0.5;
    c.topology.seed = 4;
    EXPECT_EQ(run_experiment(c).report.links.size(), 2 * random_topology(4, 0.5, 4).edge_count());
    c.topology.mixing = "magic";
    EXPECT_THROW(run_experiment(c), ConfigError);
    c.topology.kind = TopologyKind::edge_list;
    c.topology.path = "/nonexistent/edges.txt";
    EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(RunExperiment, TensorFileDataset) {
    const auto dir = std::filesystem::temp_directory_path() / "ctt_experiment_files";
    std::filesystem::create_directories(dir);
    SyntheticSpec s;
    s.dims = {40, 10, 8};
    s.ranks = {5, 3};
    s.seed = 0;
    DenseTensor whole = concat_mode1(gen_synthetic(s).clients);
    save_tensor(whole, (dir / "all.ten").string());
    ExperimentConfig c = small_config(Protocol::master_slave);
    ExperimentConfig f = c;
    f.dataset.kind = DatasetKind::tensor_files;
    f.dataset.tensor_files = {(dir / "all.ten").string()};
    EXPECT_NEAR(run_experiment(f).report.rse_global, run_experiment(c).report.rse_global, 1e-12);
    f.dataset.tensor_files.push_back((dir / "all.ten").string());
    EXPECT_THROW(run_experiment(f), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST(Sweep, GridExpansionAndRows) {
    ExperimentConfig c = small_config(Protocol::master_slave);
    EXPECT_THROW(expand_grid(c), ConfigError);
    c.grid_r1 = {2, 3, 4};
    c.grid_eps1 = {0.1, 0.2};
    auto configs = expand_grid(c);
    ASSERT_EQ(configs.size(), 6u);
    EXPECT_EQ(configs[0].r1, 2u);
    EXPECT_EQ(configs[1].eps1, 0.2);
    c.grid_eps1.clear();
    c.repeats = 2;
    auto rows = run_sweep(c);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].reports.size(), 2u);
    const std::string line = csv_row(rows[0]);
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), static_cast<long>(csv_columns().size() - 1));
}

TEST(Sweep, DecentralizedCostLinearInRounds) {
    ExperimentConfig c = small_config(Protocol::decentralized);
    c.grid_rounds = {1, 2, 3, 4};
    auto rows = run_sweep(c);
    ASSERT_EQ(rows.size(), 4u);
    const auto base = rows[0].reports[0].comm_predicted_total;
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(rows[i].reports[0].comm_predicted_total, (i + 1) * base);
}

TEST(Classification, SeparableFixture) {
    const auto dir = std::filesystem::temp_directory_path() / "ctt_classify";
    std::filesystem::create_directories(dir);
    FixtureSpec fs;
    fs.dims = {120, 8, 9};
    fs.informative = 3;
    fs.signal = 6.0;
    fs.noise = 0.2;
    fs.seed = 0;
    LabeledFixture fx = make_labeled_fixture(fs);
    save_tensor(fx.tensor, (dir / "x.ten").string());
    ExperimentConfig c;
    c.dataset.kind = DatasetKind::tensor_files;
    c.dataset.tensor_files = {(dir / "x.ten").string()};
    c.r1 = 10;
    c.seed = 0;
    auto rows = run_classification(c, fx.labels, {1, 3, 5}, 5);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rows[1].cv.mean_test, 1.0);
    EXPECT_THROW(run_classification(c, std::vector<int>(5, 0), {3}, 5), ConfigError);
    EXPECT_THROW(run_classification(c, fx.labels, {}, 5), ConfigError);
    std::filesystem::remove_all(dir);
}
