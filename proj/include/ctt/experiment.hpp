#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctt/consensus.hpp"
#include "ctt/data.hpp"
#include "ctt/engine.hpp"
#include "ctt/features.hpp"
#include "ctt/metrics.hpp"
#include "ctt/privacy.hpp"
#include "ctt/topology.hpp"

namespace ctt {

using json = nlohmann::json;

enum class DatasetKind { synthetic, tensor_files, csv };
enum class TopologyKind { full, edge_list, random };

struct DatasetSpec {
    DatasetKind kind = DatasetKind::synthetic;
    SyntheticSpec synthetic;                 // `clients` and `seed` are taken from the experiment
    std::vector<std::string> tensor_files;   // one file (split over K) or K files
    std::string csv_path;
    std::string id_column;
    std::vector<std::string> feature_columns;
    Dims mode_split;
};

struct TopologySpec {
    TopologyKind kind = TopologyKind::full;
    std::string path;
    double density = 1.0;
    std::uint64_t seed = 0;
    std::string mixing = "auto";   // auto | degree | magic
};

/// One fully resolved experiment. Defaults: eps1 = 0.1, eps2 = 0.05, L = 3, K = 4.
struct ExperimentConfig {
    Protocol mode = Protocol::master_slave;
    DatasetSpec dataset;
    std::size_t clients = 4;
    std::size_t r1 = 20;
    double eps1 = 0.1;
    double eps2 = 0.05;
    std::size_t rounds = 3;
    TopologySpec topology;
    double missing = 0.0;
    std::uint64_t seed = 1;
    std::string output_dir = ".";

    std::vector<std::size_t> grid_r1;
    std::vector<std::size_t> grid_rounds;
    std::vector<std::size_t> grid_clients;
    std::vector<double> grid_eps1;
    std::vector<double> grid_missing;
    std::size_t repeats = 1;

    void validate() const {
        if (!(eps1 > 0.0 && eps1 < 1.0)) throw ConfigError("eps1 must lie in (0, 1)");
        if (!(eps2 > 0.0 && eps2 < 1.0)) throw ConfigError("eps2 must lie in (0, 1)");
        if (clients == 0) throw ConfigError("K must be positive");
        if (r1 == 0) throw ConfigError("R1 must be positive");
        if (!(missing >= 0.0 && missing < 1.0)) throw ConfigError("missing fraction must lie in [0, 1)");
        if (repeats == 0) throw ConfigError("repeats must be positive");
        if (mode != Protocol::decentralized && topology.kind != TopologyKind::full) {
            throw ConfigError("a topology is only meaningful for decentralized mode");
        }
        if (topology.mixing != "auto" && topology.mixing != "degree" && topology.mixing != "magic") {
            throw ConfigError("mixing must be auto | degree | magic");
        }
        switch (dataset.kind) {
            case DatasetKind::synthetic: {
                SyntheticSpec s = dataset.synthetic;
                s.clients = clients;
                s.validate();
                break;
            }
            case DatasetKind::tensor_files:
                if (dataset.tensor_files.empty()) throw ConfigError("tensor dataset needs at least one file");
                break;
            case DatasetKind::csv:
                if (dataset.csv_path.empty()) throw ConfigError("csv dataset needs a path");
                if (dataset.mode_split.empty()) throw ConfigError("csv dataset needs a mode split");
                break;
        }
    }
};

inline std::string to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::synthetic: return "synthetic";
        case DatasetKind::tensor_files: return "tensor";
        case DatasetKind::csv: return "csv";
    }
    return "unknown";
}

inline std::string to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::full: return "full";
        case TopologyKind::edge_list: return "edge-list";
        case TopologyKind::random: return "random";
    }
    return "unknown";
}

inline std::string describe(const TopologySpec& t) {
    switch (t.kind) {
        case TopologyKind::full: return "full";
        case TopologyKind::edge_list: return "edges:" + t.path;
        case TopologyKind::random: {
            std::ostringstream os;
            os << "random(S=" << t.density << ",seed=" << t.seed << ")";
            return os.str();
        }
    }
    return "unknown";
}

inline json to_json(const ExperimentConfig& c) {
    json d;
    d["kind"] = to_string(c.dataset.kind);
    d["dims"] = c.dataset.synthetic.dims;
    d["ranks"] = c.dataset.synthetic.ranks;
    d["density"] = c.dataset.synthetic.density;
    d["personal"] = c.dataset.synthetic.personal == PersonalDistribution::uniform ? "uniform" : "gaussian";
    d["tensor_files"] = c.dataset.tensor_files;
    d["csv_path"] = c.dataset.csv_path;
    d["id_column"] = c.dataset.id_column;
    d["feature_columns"] = c.dataset.feature_columns;
    d["mode_split"] = c.dataset.mode_split;
    json t;
    t["kind"] = to_string(c.topology.kind);
    t["path"] = c.topology.path;
    t["density"] = c.topology.density;
    t["seed"] = c.topology.seed;
    t["mixing"] = c.topology.mixing;
    json grid;
    grid["r1"] = c.grid_r1;
    grid["L"] = c.grid_rounds;
    grid["K"] = c.grid_clients;
    grid["eps1"] = c.grid_eps1;
    grid["missing"] = c.grid_missing;
    return json{{"mode", to_string(c.mode)}, {"dataset", d}, {"K", c.clients}, {"R1", c.r1}, {"eps1", c.eps1},
                {"eps2", c.eps2}, {"L", c.rounds}, {"topology", t}, {"missing", c.missing}, {"seed", c.seed},
                {"output_dir", c.output_dir}, {"grid", grid}, {"repeats", c.repeats}};
}

/// Overlay the fields present in `j` onto `c`.
inline void merge_json(ExperimentConfig& c, const json& j) {
    try {
        if (j.contains("mode")) c.mode = parse_protocol(j["mode"].get<std::string>());
        if (j.contains("K")) c.clients = j["K"].get<std::size_t>();
        if (j.contains("R1")) c.r1 = j["R1"].get<std::size_t>();
        if (j.contains("eps1")) c.eps1 = j["eps1"].get<double>();
        if (j.contains("eps2")) c.eps2 = j["eps2"].get<double>();
        if (j.contains("L")) c.rounds = j["L"].get<std::size_t>();
        if (j.contains("missing")) c.missing = j["missing"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("repeats")) c.repeats = j["repeats"].get<std::size_t>();
        if (j.contains("dataset")) {
            const json& d = j["dataset"];
            if (d.contains("kind")) {
                const auto k = d["kind"].get<std::string>();
                if (k == "synthetic") c.dataset.kind = DatasetKind::synthetic;
                else if (k == "tensor") c.dataset.kind = DatasetKind::tensor_files;
                else if (k == "csv") c.dataset.kind = DatasetKind::csv;
                else throw ConfigError("unknown dataset kind '" + k + "'");
            }
            if (d.contains("dims")) c.dataset.synthetic.dims = d["dims"].get<Dims>();
            if (d.contains("ranks")) c.dataset.synthetic.ranks = d["ranks"].get<std::vector<std::size_t>>();
            if (d.contains("density")) c.dataset.synthetic.density = d["density"].get<double>();
            if (d.contains("personal")) {
                const auto p = d["personal"].get<std::string>();
                if (p != "uniform" && p != "gaussian") throw ConfigError("personal must be uniform | gaussian");
                c.dataset.synthetic.personal = p == "uniform" ? PersonalDistribution::uniform : PersonalDistribution::gaussian;
            }
            if (d.contains("tensor_files")) c.dataset.tensor_files = d["tensor_files"].get<std::vector<std::string>>();
            if (d.contains("csv_path")) c.dataset.csv_path = d["csv_path"].get<std::string>();
            if (d.contains("id_column")) c.dataset.id_column = d["id_column"].get<std::string>();
            if (d.contains("feature_columns")) c.dataset.feature_columns = d["feature_columns"].get<std::vector<std::string>>();
            if (d.contains("mode_split")) c.dataset.mode_split = d["mode_split"].get<Dims>();
        }
        if (j.contains("topology")) {
            const json& t = j["topology"];
            if (t.contains("kind")) {
                const auto k = t["kind"].get<std::string>();
                if (k == "full") c.topology.kind = TopologyKind::full;
                else if (k == "edge-list") c.topology.kind = TopologyKind::edge_list;
                else if (k == "random") c.topology.kind = TopologyKind::random;
                else throw ConfigError("unknown topology kind '" + k + "'");
            }
            if (t.contains("path")) c.topology.path = t["path"].get<std::string>();
            if (t.contains("density")) c.topology.density = t["density"].get<double>();
            if (t.contains("seed")) c.topology.seed = t["seed"].get<std::uint64_t>();
            if (t.contains("mixing")) c.topology.mixing = t["mixing"].get<std::string>();
        }
        if (j.contains("grid")) {
            const json& g = j["grid"];
            if (g.contains("r1")) c.grid_r1 = g["r1"].get<std::vector<std::size_t>>();
            if (g.contains("L")) c.grid_rounds = g["L"].get<std::vector<std::size_t>>();
            if (g.contains("K")) c.grid_clients = g["K"].get<std::vector<std::size_t>>();
            if (g.contains("eps1")) c.grid_eps1 = g["eps1"].get<std::vector<double>>();
            if (g.contains("missing")) c.grid_missing = g["missing"].get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    ExperimentConfig c;
    merge_json(c, j);
    return c;
}

struct LinkCount {
    NodeId from = 0;
    NodeId to = 0;
    std::uint64_t measured = 0;
    std::uint64_t predicted = 0;
};

/// Per-run record. Communication is counted in real-number elements (8 bytes each).
struct RunReport {
    json config;
    double rse_global = 0.0;
    std::vector<double> rse_per_client;
    std::vector<LinkCount> links;
    std::uint64_t comm_measured_total = 0;
    std::uint64_t comm_predicted_total = 0;
    std::size_t rounds = 0;
    std::optional<double> lambda2;
    double consensus_initial_error = 0.0;
    std::vector<double> consensus_error_trace;
    std::vector<std::size_t> global_ranks;
    std::vector<std::vector<std::size_t>> client_ranks;
    std::vector<std::size_t> delta_ranks;
    CostModel cost_model;
    double wall_time = 0.0;
    bool privacy_audit = true;
    std::vector<std::string> privacy_findings;
    std::vector<std::string> warnings;

    std::uint64_t comm_measured_per_link_max() const {
        std::uint64_t m = 0;
        for (const auto& l : links) m = std::max(m, l.measured);
        return m;
    }
};

inline json to_json(const RunReport& r) {
    json links = json::array();
    for (const auto& l : r.links) links.push_back({{"from", l.from}, {"to", l.to}, {"measured", l.measured}, {"predicted", l.predicted}});
    json cost = json::array();
    for (const auto& t : r.cost_model.terms) cost.push_back({{"term", t.name}, {"value", t.value}});
    return json{{"config", r.config},
                {"rse_global", r.rse_global},
                {"rse_per_client", r.rse_per_client},
                {"comm_unit", "real-number elements (bytes = 8 x elements)"},
                {"comm_measured_per_link", links},
                {"comm_measured_total", r.comm_measured_total},
                {"comm_predicted_total", r.comm_predicted_total},
                {"comm_measured_bytes", r.comm_measured_total * 8},
                {"rounds", r.rounds},
                {"lambda2", r.lambda2 ? json(*r.lambda2) : json(nullptr)},
                {"consensus_initial_error", r.consensus_initial_error},
                {"consensus_error_trace", r.consensus_error_trace},
                {"global_ranks", r.global_ranks},
                {"client_ranks", r.client_ranks},
                {"delta_implied_r1", r.delta_ranks},
                {"cost_model", {{"terms", cost}, {"total", r.cost_model.total}, {"simplified", r.cost_model.simplified}}},
                {"wall_time", r.wall_time},
                {"privacy_audit", r.privacy_audit ? "pass" : "fail"},
                {"privacy_findings", r.privacy_findings},
                {"warnings", r.warnings}};
}

struct PreparedData {
    std::vector<DenseTensor> reference;  // complete client tensors, RSE is measured against these
    std::vector<DenseTensor> observed;   // after masking missing entries
};

/// Load or generate the client tensors for `c` and apply the missing-data mask.
inline PreparedData prepare_data(const ExperimentConfig& c) {
    PreparedData p;
    switch (c.dataset.kind) {
        case DatasetKind::synthetic: {
            SyntheticSpec s = c.dataset.synthetic;
            s.clients = c.clients;
            s.seed = c.seed;
            p.reference = gen_synthetic(s).clients;
            break;
        }
        case DatasetKind::tensor_files: {
            if (c.dataset.tensor_files.size() == 1) {
                p.reference = partition_mode1(load_tensor(c.dataset.tensor_files.front()), c.clients);
            } else {
                if (c.dataset.tensor_files.size() != c.clients) {
                    throw ConfigError(std::to_string(c.dataset.tensor_files.size()) + " tensor files for K = " + std::to_string(c.clients));
                }
                for (const auto& f : c.dataset.tensor_files) p.reference.push_back(load_tensor(f));
            }
            break;
        }
        case DatasetKind::csv: {
            auto table = load_table_csv(c.dataset.csv_path, c.dataset.id_column, c.dataset.feature_columns, c.dataset.mode_split);
            p.reference = partition_mode1(table.tensor, c.clients);
            break;
        }
    }
    for (std::size_t k = 0; k < p.reference.size(); ++k) {
        if (c.missing > 0.0) p.observed.push_back(apply_missing(p.reference[k], c.missing, c.seed * 1000003ULL + k).tensor);
        else p.observed.push_back(p.reference[k]);
    }
    return p;
}

/// Complete graph with magic mixing (K >= 3) unless a topology/mixing is given.
inline std::pair<Topology, MixingMatrix> resolve_network(const ExperimentConfig& c) {
    Topology t = [&] {
        switch (c.topology.kind) {
            case TopologyKind::edge_list: return load_edge_list(c.topology.path);
            case TopologyKind::random: return random_topology(c.clients, c.topology.density, c.topology.seed);
            case TopologyKind::full: break;
        }
        return Topology::complete(c.clients);
    }();
    if (t.node_count() != c.clients) {
        throw ConfigError("topology has " + std::to_string(t.node_count()) + " nodes but K = " + std::to_string(c.clients));
    }
    t.require_connected();
    const bool complete = t.edge_count() == c.clients * (c.clients - 1) / 2;
    std::string rule = c.topology.mixing;
    if (rule == "auto") rule = complete && c.clients >= 3 ? "magic" : "degree";
    if (rule == "magic" && !complete) throw ConfigError("magic mixing needs a fully connected topology");
    MixingMatrix m = rule == "magic" ? mixing_magic(c.clients) : mixing_from_degree_rule(t);
    return {std::move(t), std::move(m)};
}

namespace detail {

inline std::vector<std::size_t> train_ranks(std::size_t r1, const std::vector<DenseTensor>& cores) {
    std::vector<std::size_t> r{1, r1};
    for (const auto& core : cores) r.push_back(core.extent(2));
    return r;
}

inline std::vector<std::size_t> full_ranks(const GlobalFeatures& g) {
    std::vector<std::size_t> r{1};
    const auto f = g.ranks();
    r.insert(r.end(), f.begin(), f.end());
    return r;
}

}  // namespace detail

struct RunOutcome {
    RunReport report;
    SimNetwork network;
    std::vector<Matrix> personal_cores;
    std::vector<GlobalFeatures> features;   // one entry (global) or one per node
};

/// Execute one configuration end to end and audit the message log.
inline RunOutcome run_experiment(const ExperimentConfig& c) {
    c.validate();
    const auto start = std::chrono::steady_clock::now();
    PreparedData data = prepare_data(c);
    const Dims full_dims = [&] {
        Dims d = data.reference.front().dims();
        d[0] = 0;
        for (const auto& t : data.reference) d[0] += t.extent(0);
        return d;
    }();
    ProtocolParams params{c.eps1, c.eps2, c.r1, c.rounds};

    RunOutcome out;
    RunReport& rep = out.report;
    rep.config = to_json(c);
    std::vector<DenseTensor> recon;

    switch (c.mode) {
        case Protocol::centralized: {
            SimNetwork scratch;
            auto ms = run_master_slave({concat_mode1(data.observed)}, params, scratch);
            const DenseTensor whole = reconstruct_client(ms.clients.front().personal_core, ms.features);
            std::size_t offset = 0;
            const auto m = whole.as_matrix(whole.extent(0));
            for (const auto& ref : data.reference) {
                DenseTensor part(ref.dims());
                part.as_matrix(ref.extent(0)) = m.middleRows(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(ref.extent(0)));
                offset += ref.extent(0);
                recon.push_back(std::move(part));
            }
            rep.global_ranks = detail::full_ranks(ms.features);
            rep.client_ranks.push_back(detail::train_ranks(ms.clients.front().rank(), *ms.clients.front().feature_cores));
            rep.delta_ranks.push_back(ms.clients.front().delta_rank);
            rep.warnings = ms.warnings;
            out.personal_cores = ms.personal_cores();
            out.features.push_back(std::move(ms.features));
            rep.cost_model = compute_cost_model(full_dims, rep.global_ranks, 1, 0, Protocol::centralized);
            break;
        }
        case Protocol::master_slave: {
            auto ms = run_master_slave(data.observed, params, out.network);
            for (const auto& cl : ms.clients) {
                recon.push_back(reconstruct_client(cl.personal_core, ms.features));
                rep.client_ranks.push_back(detail::train_ranks(cl.rank(), *cl.feature_cores));
                rep.delta_ranks.push_back(cl.delta_rank);
            }
            rep.global_ranks = detail::full_ranks(ms.features);
            const auto counts = out.network.per_link();
            for (const auto& cl : ms.clients) {
                const auto id = static_cast<NodeId>(cl.client_id);
                const Dims& dims = data.observed[cl.client_id].dims();
                rep.links.push_back({id, kServer, counts.count({id, kServer}) ? counts.at({id, kServer}) : 0,
                                     comm_predicted_ms(rep.client_ranks[cl.client_id], dims)});
            }
            for (const auto& cl : ms.clients) {
                const auto id = static_cast<NodeId>(cl.client_id);
                rep.links.push_back({kServer, id, counts.count({kServer, id}) ? counts.at({kServer, id}) : 0,
                                     comm_predicted_ms(rep.global_ranks, data.observed[cl.client_id].dims())});
            }
            rep.warnings = ms.warnings;
            out.personal_cores = ms.personal_cores();
            out.features.push_back(std::move(ms.features));
            rep.cost_model = compute_cost_model(full_dims, rep.client_ranks.front(), c.clients, 0, Protocol::master_slave);
            break;
        }
        case Protocol::decentralized: {
            auto [topology, mixing] = resolve_network(c);
            auto dec = run_decentralized(data.observed, topology, mixing, params, out.network);
            for (std::size_t k = 0; k < dec.clients.size(); ++k) {
                recon.push_back(reconstruct_client(dec.clients[k].personal_core, dec.features[k]));
                rep.client_ranks.push_back(dec.trains[k].ranks());
                rep.delta_ranks.push_back(dec.clients[k].delta_rank);
            }
            rep.lambda2 = dec.lambda2;
            rep.consensus_initial_error = dec.consensus.initial_error;
            rep.consensus_error_trace = dec.consensus.error_trace;
            const std::size_t r1 = dec.clients.front().rank();
            for (const auto& [link, measured] : out.network.per_link()) {
                rep.links.push_back({link.first, link.second, measured, comm_predicted_dec(c.rounds, r1, full_dims)});
            }
            rep.global_ranks = dec.features.empty() ? std::vector<std::size_t>{} : detail::full_ranks(dec.features.front());
            rep.warnings = dec.warnings;
            for (const auto& cl : dec.clients) out.personal_cores.push_back(cl.personal_core);
            out.features = std::move(dec.features);
            rep.cost_model = compute_cost_model(full_dims, rep.client_ranks.front(), c.clients, c.rounds, Protocol::decentralized);
            break;
        }
    }

    for (std::size_t k = 0; k < recon.size(); ++k) rep.rse_per_client.push_back(rse(data.reference[k], recon[k]));
    rep.rse_global = rse_global(data.reference, recon);
    rep.rounds = out.network.rounds();
    rep.comm_measured_total = out.network.total_elements();
    for (const auto& l : rep.links) rep.comm_predicted_total += l.predicted;

    const PrivacyAudit audit = audit_privacy(out.network.log(), out.personal_cores);
    rep.privacy_audit = audit.pass;
    for (const auto& f : audit.findings) rep.privacy_findings.push_back(f.reason);
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps.

/// Columns of the sweep / run CSV, in order.
inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "mode", "dims", "K", "R1", "eps1", "eps2", "L", "topology", "missing", "seed", "repeats",
        "rse_global_mean", "rse_global_std", "comm_measured_total", "comm_predicted_total", "comm_per_link_max",
        "rounds", "lambda2", "consensus_error_final", "privacy_audit"};
    return cols;
}

inline std::string csv_header() {
    std::string s;
    for (std::size_t i = 0; i < csv_columns().size(); ++i) s += (i ? "," : "") + csv_columns()[i];
    return s;
}

struct SweepRow {
    ExperimentConfig config;
    std::vector<RunReport> reports;   // one per repeat, seed = config.seed + repeat

    double rse_mean() const {
        double s = 0.0;
        for (const auto& r : reports) s += r.rse_global;
        return s / static_cast<double>(reports.size());
    }
    double rse_std() const {
        const double m = rse_mean();
        double s = 0.0;
        for (const auto& r : reports) s += (r.rse_global - m) * (r.rse_global - m);
        return std::sqrt(s / static_cast<double>(reports.size()));
    }
};

inline std::string csv_row(const SweepRow& row) {
    const ExperimentConfig& c = row.config;
    const RunReport& first = row.reports.front();
    std::ostringstream os;
    os.precision(10);
    const Dims dims = c.dataset.kind == DatasetKind::synthetic ? c.dataset.synthetic.dims : Dims{};
    bool audit = true;
    for (const auto& r : row.reports) audit = audit && r.privacy_audit;
    os << to_string(c.mode) << "," << (dims.empty() ? to_string(c.dataset.kind) : to_string(dims)) << "," << c.clients << "," << c.r1
       << "," << c.eps1 << "," << c.eps2 << "," << c.rounds << "," << describe(c.topology) << "," << c.missing << "," << c.seed
       << "," << row.reports.size() << "," << row.rse_mean() << "," << row.rse_std() << "," << first.comm_measured_total << ","
       << first.comm_predicted_total << "," << first.comm_measured_per_link_max() << "," << first.rounds << ","
       << (first.lambda2 ? std::to_string(*first.lambda2) : std::string{}) << ","
       << (first.consensus_error_trace.empty() ? std::string{} : std::to_string(first.consensus_error_trace.back())) << ","
       << (audit ? "pass" : "fail");
    return os.str();
}

/// Cartesian product of the non-empty grids (R1, L, eps1, K, missing), in that
/// nesting order; empty grids keep the base value. At least one grid is required.
inline std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base) {
    if (base.grid_r1.empty() && base.grid_rounds.empty() && base.grid_eps1.empty() && base.grid_clients.empty() &&
        base.grid_missing.empty()) {
        throw ConfigError("sweep: every grid is empty");
    }
    auto or_base = [](const auto& grid, auto value) {
        using T = std::decay_t<decltype(value)>;
        return grid.empty() ? std::vector<T>{value} : std::vector<T>(grid.begin(), grid.end());
    };
    std::vector<ExperimentConfig> out;
    for (auto r1 : or_base(base.grid_r1, base.r1))
        for (auto l : or_base(base.grid_rounds, base.rounds))
            for (auto e1 : or_base(base.grid_eps1, base.eps1))
                for (auto k : or_base(base.grid_clients, base.clients))
                    for (auto miss : or_base(base.grid_missing, base.missing)) {
                        ExperimentConfig c = base;
                        c.r1 = r1;
                        c.rounds = l;
                        c.eps1 = e1;
                        c.clients = k;
                        c.missing = miss;
                        out.push_back(std::move(c));
                    }
    return out;
}

inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base) {
    std::vector<SweepRow> rows;
    for (auto& c : expand_grid(base)) {
        SweepRow row{c, {}};
        for (std::size_t r = 0; r < base.repeats; ++r) {
            ExperimentConfig rc = c;
            rc.seed = c.seed + r;
            RunOutcome o = run_experiment(rc);
            if (!o.report.privacy_audit) throw PrivacyError("sweep: privacy audit failed at R1=" + std::to_string(rc.r1));
            row.reports.push_back(std::move(o.report));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Classification.

struct ClassificationRow {
    std::size_t m = 0;
    FeatureSelection selection;
    CrossValidation cv;
};

/// Extract features with the configured protocol (node 0's features for the
/// decentralized mode), then for each m select the top-m variance indices
/// per mode and cross-validate kNN on the raw-data embeddings.
inline std::vector<ClassificationRow> run_classification(const ExperimentConfig& c, const std::vector<int>& labels,
                                                         const std::vector<std::size_t>& m_grid, std::size_t k,
                                                         std::size_t repeats = 10, double train_ratio = 0.7) {
    if (m_grid.empty()) throw ConfigError("classify: m grid is empty");
    RunOutcome run = run_experiment(c);
    if (!run.report.privacy_audit) throw PrivacyError("classify: privacy audit failed");
    const DenseTensor x = concat_mode1(prepare_data(c).observed);
    if (labels.size() != x.extent(0)) {
        throw ConfigError("classify: " + std::to_string(labels.size()) + " labels for " + std::to_string(x.extent(0)) + " samples");
    }
    const auto variances = feature_variance(run.features.front());
    std::vector<ClassificationRow> rows;
    for (std::size_t m : m_grid) {
        ClassificationRow row;
        row.m = m;
        row.selection = select_top_m(variances, m);
        row.cv = cross_validate(x, labels, row.selection, k, repeats, train_ratio, c.seed);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ctt
