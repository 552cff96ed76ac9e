#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctt.hpp"

namespace fs = std::filesystem;
using namespace ctt;

namespace {

// Flags shared by run / sweep / classify. Anything left unset falls back to
// the config file, then to the built-in defaults.
struct ConfigFlags {
    std::string config_path;
    std::optional<std::string> mode;
    std::optional<std::size_t> clients, r1, rounds, repeats;
    std::optional<double> eps1, eps2, missing;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::vector<std::size_t> dims, ranks;
    std::optional<double> density;
    std::optional<std::string> personal;
    std::vector<std::string> tensors;
    std::optional<std::string> csv, id_column;
    std::vector<std::string> feature_columns;
    std::vector<std::size_t> mode_split;
    std::optional<std::string> edges;
    std::optional<double> topo_density;
    std::optional<std::uint64_t> topo_seed;
    std::optional<std::string> mixing;
    std::vector<std::size_t> grid_r1, grid_l, grid_k;
    std::vector<double> grid_eps1, grid_missing;

    void attach(CLI::App* app, bool with_grids) {
        app->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        app->add_option("--mode", mode, "centralized | master-slave | decentralized");
        app->add_option("-K,--clients", clients, "number of clients");
        app->add_option("--r1", r1, "first TT rank R1");
        app->add_option("--eps1", eps1, "client accuracy");
        app->add_option("--eps2", eps2, "feature extraction accuracy");
        app->add_option("-L,--rounds", rounds, "consensus rounds");
        app->add_option("--missing", missing, "fraction of entries zeroed as missing");
        app->add_option("--seed", seed, "data seed");
        app->add_option("--out", output_dir, "output directory");
        app->add_option("--dims", dims, "synthetic dims, e.g. 200,30,30")->delimiter(',');
        app->add_option("--ranks", ranks, "synthetic generating ranks R1..R_{N-1}")->delimiter(',');
        app->add_option("--density", density, "synthetic feature core density");
        app->add_option("--personal", personal, "uniform | gaussian personal cores");
        app->add_option("--tensor", tensors, "tensor file(s): one to split over K, or K files")->delimiter(',');
        app->add_option("--csv", csv, "CSV table");
        app->add_option("--id-column", id_column, "CSV id column");
        app->add_option("--columns", feature_columns, "CSV feature columns")->delimiter(',');
        app->add_option("--split", mode_split, "feature mode split of the CSV columns, e.g. 20,24")->delimiter(',');
        app->add_option("--edges", edges, "edge list file (decentralized)");
        app->add_option("--topo-density", topo_density, "random topology density S (decentralized)");
        app->add_option("--topo-seed", topo_seed, "random topology seed");
        app->add_option("--mixing", mixing, "auto | degree | magic");
        if (with_grids) {
            app->add_option("--repeats", repeats, "seeds per configuration (seed + i)");
            app->add_option("--grid-r1", grid_r1, "R1 grid")->delimiter(',');
            app->add_option("--grid-L", grid_l, "L grid")->delimiter(',');
            app->add_option("--grid-K", grid_k, "K grid")->delimiter(',');
            app->add_option("--grid-eps1", grid_eps1, "eps1 grid")->delimiter(',');
            app->add_option("--grid-missing", grid_missing, "missing-fraction grid")->delimiter(',');
        }
    }

    ExperimentConfig resolve() const {
        ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (mode) c.mode = parse_protocol(*mode);
        if (clients) c.clients = *clients;
        if (r1) c.r1 = *r1;
        if (eps1) c.eps1 = *eps1;
        if (eps2) c.eps2 = *eps2;
        if (rounds) c.rounds = *rounds;
        if (missing) c.missing = *missing;
        if (seed) c.seed = *seed;
        if (output_dir) c.output_dir = *output_dir;
        if (repeats) c.repeats = *repeats;
        if (!dims.empty()) c.dataset.synthetic.dims = dims;
        if (!ranks.empty()) c.dataset.synthetic.ranks = ranks;
        if (density) c.dataset.synthetic.density = *density;
        if (personal) {
            if (*personal != "uniform" && *personal != "gaussian") throw ConfigError("--personal must be uniform | gaussian");
            c.dataset.synthetic.personal = *personal == "uniform" ? PersonalDistribution::uniform : PersonalDistribution::gaussian;
        }
        if (!tensors.empty()) {
            c.dataset.kind = DatasetKind::tensor_files;
            c.dataset.tensor_files = tensors;
        }
        if (csv) {
            c.dataset.kind = DatasetKind::csv;
            c.dataset.csv_path = *csv;
        }
        if (id_column) c.dataset.id_column = *id_column;
        if (!feature_columns.empty()) c.dataset.feature_columns = feature_columns;
        if (!mode_split.empty()) c.dataset.mode_split = mode_split;
        if (edges) {
            c.topology.kind = TopologyKind::edge_list;
            c.topology.path = *edges;
        }
        if (topo_density) {
            c.topology.kind = TopologyKind::random;
            c.topology.density = *topo_density;
        }
        if (topo_seed) c.topology.seed = *topo_seed;
        if (mixing) c.topology.mixing = *mixing;
        if (!grid_r1.empty()) c.grid_r1 = grid_r1;
        if (!grid_l.empty()) c.grid_rounds = grid_l;
        if (!grid_k.empty()) c.grid_clients = grid_k;
        if (!grid_eps1.empty()) c.grid_eps1 = grid_eps1;
        if (!grid_missing.empty()) c.grid_missing = grid_missing;
        c.validate();
        return c;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

fs::path ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create " + dir + ": " + ec.message());
    return fs::path(dir);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::string client_file(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "client_%03zu.ten", k);
    return buf;
}

struct GenFlags {
    std::string out = "data";
    std::vector<std::size_t> dims{200, 30, 30};
    std::vector<std::size_t> ranks{20, 15};
    std::size_t clients = 4;
    double density = 0.4;
    std::uint64_t seed = 1;
    std::string personal = "uniform";
    bool labeled = false;
    std::size_t classes = 3;
    std::size_t informative = 5;
};

int cmd_gen(const GenFlags& g) {
    const fs::path dir = ensure_dir(g.out);
    json manifest;
    std::vector<DenseTensor> parts;
    if (g.labeled) {
        FixtureSpec fs_spec;
        fs_spec.dims = g.dims;
        fs_spec.classes = g.classes;
        fs_spec.informative = g.informative;
        fs_spec.seed = g.seed;
        if (g.clients == 0 || g.dims.empty() || g.dims[0] % g.clients != 0) {
            throw ConfigError("K = " + std::to_string(g.clients) + " does not divide I1");
        }
        LabeledFixture fx = make_labeled_fixture(fs_spec);
        parts = partition_mode1(fx.tensor, g.clients);
        save_labels((dir / "labels.txt").string(), fx.labels);
        manifest["kind"] = "labeled";
        manifest["classes"] = g.classes;
        manifest["informative"] = fx.informative;
        manifest["labels"] = "labels.txt";
    } else {
        SyntheticSpec s;
        s.dims = g.dims;
        s.ranks = g.ranks;
        s.clients = g.clients;
        s.density = g.density;
        s.seed = g.seed;
        if (g.personal != "uniform" && g.personal != "gaussian") throw ConfigError("--personal must be uniform | gaussian");
        s.personal = g.personal == "uniform" ? PersonalDistribution::uniform : PersonalDistribution::gaussian;
        SyntheticData data = gen_synthetic(s);
        parts = data.clients;
        json truth = json::array();
        for (std::size_t n = 0; n < data.feature_cores.cores.size(); ++n) {
            const std::string name = "truth_core_" + std::to_string(n + 2) + ".ten";
            save_tensor(data.feature_cores.cores[n], (dir / name).string());
            truth.push_back(name);
        }
        json personal = json::array();
        for (std::size_t k = 0; k < data.personal_cores.size(); ++k) {
            const std::string name = "truth_personal_" + std::to_string(k) + ".ten";
            save_tensor(DenseTensor::from_matrix(data.personal_cores[k]), (dir / name).string());
            personal.push_back(name);
        }
        manifest["kind"] = "synthetic";
        manifest["ranks"] = g.ranks;
        manifest["density"] = g.density;
        manifest["personal"] = g.personal;
        manifest["truth_feature_cores"] = truth;
        manifest["truth_personal_cores"] = personal;
    }
    json files = json::array();
    for (std::size_t k = 0; k < parts.size(); ++k) {
        save_tensor(parts[k], (dir / client_file(k)).string());
        files.push_back(client_file(k));
    }
    manifest["dims"] = g.dims;
    manifest["K"] = g.clients;
    manifest["seed"] = g.seed;
    manifest["clients"] = files;
    manifest["client_dims"] = parts.front().dims();
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << parts.size() << " client tensors of " << to_string(parts.front().dims()) << " to " << dir.string() << "\n";
    return 0;
}

int cmd_run(const ExperimentConfig& c) {
    RunOutcome out = run_experiment(c);
    print_warnings(out.report.warnings);
    if (!out.report.privacy_audit) {
        for (const auto& f : out.report.privacy_findings) std::cerr << "privacy: " << f << "\n";
        throw PrivacyError("privacy audit failed, report withheld");
    }
    const fs::path dir = ensure_dir(c.output_dir);
    write_text(dir / "report.json", to_json(out.report).dump(2) + "\n");
    SweepRow row{c, {out.report}};
    write_text(dir / "report.csv", csv_header() + "\n" + csv_row(row) + "\n");
    std::printf("mode=%s rse=%.6g rounds=%zu comm=%llu audit=pass\n", to_string(c.mode).c_str(), out.report.rse_global,
                out.report.rounds, static_cast<unsigned long long>(out.report.comm_measured_total));
    return 0;
}

int cmd_sweep(const ExperimentConfig& c) {
    const auto rows = run_sweep(c);
    const fs::path dir = ensure_dir(c.output_dir);
    std::string csv = csv_header() + "\n";
    for (const auto& r : rows) csv += csv_row(r) + "\n";
    write_text(dir / "sweep.csv", csv);
    std::cout << csv;
    return 0;
}

int cmd_classify(const ExperimentConfig& c, const std::string& labels_path, const std::vector<std::size_t>& m_grid, std::size_t k,
                 std::size_t repeats) {
    if (!fs::exists(labels_path)) throw ConfigError("labels file not found: " + labels_path);
    const auto labels = load_labels(labels_path);
    std::vector<ExperimentConfig> modes{c};
    if (c.mode != Protocol::centralized) {
        ExperimentConfig central = c;
        central.mode = Protocol::centralized;
        central.topology = TopologySpec{};
        modes.push_back(central);
    }
    std::string csv = "mode,m,k,mean_train_accuracy,mean_test_accuracy\n";
    for (const auto& mc : modes) {
        for (const auto& row : run_classification(mc, labels, m_grid, k, repeats)) {
            print_warnings(row.cv.warnings);
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.4f,%.4f\n", to_string(mc.mode).c_str(), row.m, k, row.cv.mean_train,
                          row.cv.mean_test);
            csv += buf;
        }
    }
    write_text(ensure_dir(c.output_dir) / "classification.csv", csv);
    std::cout << csv;
    return 0;
}

struct TopologyFlags {
    std::optional<std::string> edges;
    std::optional<std::size_t> complete, ring, random_k;
    double density = 0.5;
    std::uint64_t seed = 0;
    std::string mixing = "degree";
    std::vector<double> alphas{0.1, 0.01, 0.001, 1e-6};
    std::optional<std::string> save;
};

int cmd_topology(const TopologyFlags& f) {
    const int given = (f.edges ? 1 : 0) + (f.complete ? 1 : 0) + (f.ring ? 1 : 0) + (f.random_k ? 1 : 0);
    if (given != 1) throw ConfigError("topology: give exactly one of --edges, --complete, --ring, --random");
    Topology t = f.edges ? load_edge_list(*f.edges)
                 : f.complete ? Topology::complete(*f.complete)
                 : f.ring     ? Topology::ring(*f.ring)
                              : random_topology(*f.random_k, f.density, f.seed);
    t.require_connected();
    if (f.save) save_edge_list(*f.save, t);
    MixingMatrix m;
    if (f.mixing == "degree") m = mixing_from_degree_rule(t);
    else if (f.mixing == "magic") {
        if (t.edge_count() != t.node_count() * (t.node_count() - 1) / 2) throw ConfigError("magic mixing needs a complete graph");
        m = mixing_magic(t.node_count());
    } else throw ConfigError("--mixing must be degree | magic");
    m.validate(&t);
    const double l2 = lambda2(m);
    std::size_t dmin = t.node_count(), dmax = 0, dsum = 0;
    for (std::size_t i = 0; i < t.node_count(); ++i) {
        dmin = std::min(dmin, t.degree(i));
        dmax = std::max(dmax, t.degree(i));
        dsum += t.degree(i);
    }
    std::printf("nodes %zu\nedges %zu\ndensity %.4f\n", t.node_count(), t.edge_count(), t.density());
    std::printf("degree min %zu mean %.3f max %zu\n", dmin, static_cast<double>(dsum) / static_cast<double>(t.node_count()), dmax);
    std::printf("mixing %s\nlambda2 %.6f\n", to_string(m.source).c_str(), l2);
    for (double a : f.alphas) {
        if (l2 >= 1.0 - 1e-12) {
            std::printf("alpha %g rounds inf\n", a);
        } else {
            const std::size_t rounds = l2 < 1e-12 ? 1 : estimate_rounds(l2, a);
            std::printf("alpha %g rounds %zu\n", a, rounds);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled tensor-train decomposition for federated data"};
    app.require_subcommand(1);

    GenFlags gen_flags;
    auto* gen = app.add_subcommand("gen", "generate synthetic client tensors");
    gen->add_option("--out", gen_flags.out, "output directory");
    gen->add_option("--dims", gen_flags.dims, "dims, e.g. 200,30,30")->delimiter(',');
    gen->add_option("--ranks", gen_flags.ranks, "generating ranks R1..R_{N-1}")->delimiter(',');
    gen->add_option("-K,--clients", gen_flags.clients, "number of clients");
    gen->add_option("--density", gen_flags.density, "feature core density");
    gen->add_option("--seed", gen_flags.seed, "seed");
    gen->add_option("--personal", gen_flags.personal, "uniform | gaussian");
    gen->add_flag("--labeled", gen_flags.labeled, "write the labelled classification fixture instead");
    gen->add_option("--classes", gen_flags.classes, "classes of the labelled fixture");
    gen->add_option("--informative", gen_flags.informative, "informative indices per feature mode");

    ConfigFlags run_flags, sweep_flags, cls_flags;
    auto* run = app.add_subcommand("run", "run one protocol end to end");
    run_flags.attach(run, false);
    auto* sweep = app.add_subcommand("sweep", "run a parameter grid");
    sweep_flags.attach(sweep, true);

    auto* classify = app.add_subcommand("classify", "variance feature selection + kNN");
    cls_flags.attach(classify, false);
    std::string labels_path;
    std::vector<std::size_t> m_grid{5};
    std::size_t knn_k = 5, cv_repeats = 10;
    classify->add_option("--labels", labels_path, "labels file, one integer per line")->required();
    classify->add_option("-m", m_grid, "features per mode (grid)")->delimiter(',');
    classify->add_option("--knn", knn_k, "k of the kNN classifier");
    classify->add_option("--splits", cv_repeats, "random train/test splits");

    TopologyFlags topo_flags;
    auto* topo = app.add_subcommand("topology", "spectral analysis of a network");
    topo->add_option("--edges", topo_flags.edges, "edge list file");
    topo->add_option("--complete", topo_flags.complete, "complete graph on K nodes");
    topo->add_option("--ring", topo_flags.ring, "ring on K nodes");
    topo->add_option("--random", topo_flags.random_k, "random connected graph on K nodes");
    topo->add_option("--density", topo_flags.density, "density S of the random graph");
    topo->add_option("--seed", topo_flags.seed, "seed of the random graph");
    topo->add_option("--mixing", topo_flags.mixing, "degree | magic");
    topo->add_option("--alpha", topo_flags.alphas, "target consensus errors")->delimiter(',');
    topo->add_option("--save", topo_flags.save, "write the edge list here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) return cmd_gen(gen_flags);
        if (*run) return cmd_run(run_flags.resolve());
        if (*sweep) return cmd_sweep(sweep_flags.resolve());
        if (*classify) return cmd_classify(cls_flags.resolve(), labels_path, m_grid, knn_k, cv_repeats);
        if (*topo) return cmd_topology(topo_flags);
    } catch (const PrivacyError& e) {
        std::cerr << "privacy error: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
