#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctt/engine.hpp"
#include "ctt/error.hpp"
#include "ctt/rng.hpp"
#include "ctt/tensor.hpp"

namespace ctt {

enum class PersonalDistribution { uniform, gaussian };

/// Coupled synthetic data: K clients share sparsified Gaussian feature cores
/// G_2..G_N; each owns a dense personal core of shape (I_1/K) x R_1.
struct SyntheticSpec {
    Dims dims{200, 30, 30};
    std::size_t clients = 4;
    std::vector<std::size_t> ranks{20, 15};   // R_1 .. R_{N-1}
    double density = 0.4;
    std::uint64_t seed = 1;
    PersonalDistribution personal = PersonalDistribution::uniform;

    void validate() const {
        if (dims.size() < 2) throw ConfigError("synthetic dims need order >= 2");
        for (auto d : dims) if (d == 0) throw ConfigError("synthetic extents must be positive");
        if (ranks.size() != dims.size() - 1) {
            throw ConfigError("synthetic spec needs " + std::to_string(dims.size() - 1) + " generating ranks, got " +
                              std::to_string(ranks.size()));
        }
        for (auto r : ranks) if (r == 0) throw ConfigError("generating ranks must be positive");
        if (clients == 0 || dims[0] % clients != 0) {
            throw ConfigError("K = " + std::to_string(clients) + " does not divide I1 = " + std::to_string(dims[0]));
        }
        if (!(density > 0.0 && density <= 1.0)) throw ConfigError("density must lie in (0, 1]");
    }
};

struct SyntheticData {
    std::vector<DenseTensor> clients;
    std::vector<Matrix> personal_cores;   // ground-truth G_1^k
    GlobalFeatures feature_cores;         // ground-truth G_2..G_N
};

/// Streams: feature core n draws values from stream 100+n and its keep-mask
/// from stream 200+n; client k's personal core uses stream 1000+k.
inline SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t n_modes = spec.dims.size();
    SyntheticData out;
    for (std::size_t n = 1; n < n_modes; ++n) {
        const std::size_t left = spec.ranks[n - 1];
        const std::size_t right = n + 1 < n_modes ? spec.ranks[n] : 1;
        DenseTensor core({left, spec.dims[n], right});
        CounterRng values(spec.seed, 100 + n);
        CounterRng mask(spec.seed, 200 + n);
        for (double& v : core.data()) {
            const double g = values.normal();
            v = mask.bernoulli(spec.density) ? g : 0.0;
        }
        out.feature_cores.cores.push_back(std::move(core));
    }
    const std::size_t rows = spec.dims[0] / spec.clients;
    for (std::size_t k = 0; k < spec.clients; ++k) {
        CounterRng rng(spec.seed, 1000 + k);
        Matrix g1(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(spec.ranks[0]));
        for (Eigen::Index j = 0; j < g1.cols(); ++j)
            for (Eigen::Index i = 0; i < g1.rows(); ++i)
                g1(i, j) = spec.personal == PersonalDistribution::uniform ? rng.uniform() : rng.normal();
        out.clients.push_back(reconstruct_client(g1, out.feature_cores));
        out.personal_cores.push_back(std::move(g1));
    }
    return out;
}

struct MaskedTensor {
    DenseTensor tensor;
    std::vector<std::uint8_t> observed;   // 1 = kept, 0 = zeroed
    std::size_t observed_count = 0;
};

/// Zero each entry independently with probability `fraction`.
inline MaskedTensor apply_missing(const DenseTensor& t, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("missing fraction must lie in [0, 1)");
    MaskedTensor out{t, std::vector<std::uint8_t>(t.size(), 1), t.size()};
    if (fraction == 0.0) return out;
    CounterRng rng(seed, 0x6D697373);
    out.observed_count = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const bool drop = rng.bernoulli(fraction);
        out.observed[i] = drop ? 0 : 1;
        if (drop) out.tensor[i] = 0.0;
        else ++out.observed_count;
    }
    return out;
}

/// Contiguous mode-1 blocks of I_1/K slices each.
inline std::vector<DenseTensor> partition_mode1(const DenseTensor& t, std::size_t k) {
    if (k == 0 || t.extent(0) % k != 0) {
        throw ConfigError("partition_mode1: K = " + std::to_string(k) + " does not divide I1 = " + std::to_string(t.extent(0)));
    }
    const std::size_t rows = t.extent(0) / k;
    const auto whole = t.as_matrix(t.extent(0));
    std::vector<DenseTensor> out;
    for (std::size_t b = 0; b < k; ++b) {
        Dims dims = t.dims();
        dims[0] = rows;
        DenseTensor part(dims);
        part.as_matrix(rows) = whole.middleRows(static_cast<Eigen::Index>(b * rows), static_cast<Eigen::Index>(rows));
        out.push_back(std::move(part));
    }
    return out;
}

/// Stack tensors along mode 1; inverse of partition_mode1.
inline DenseTensor concat_mode1(const std::vector<DenseTensor>& parts) {
    if (parts.empty()) throw ConfigError("concat_mode1: nothing to stack");
    Dims dims = parts.front().dims();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.order() != dims.size() || !std::equal(p.dims().begin() + 1, p.dims().end(), dims.begin() + 1)) {
            throw ConfigError("concat_mode1: trailing extents differ");
        }
        rows += p.extent(0);
    }
    dims[0] = rows;
    DenseTensor out(dims);
    auto whole = out.as_matrix(rows);
    std::size_t offset = 0;
    for (const auto& p : parts) {
        whole.middleRows(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(p.extent(0))) = p.as_matrix(p.extent(0));
        offset += p.extent(0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// TensorFile: "TEN v1", order, extents, then one value per line (colexicographic).

inline void write_tensor(std::ostream& os, const DenseTensor& t) {
    os << "TEN v1\n" << t.order() << "\n";
    for (std::size_t i = 0; i < t.order(); ++i) os << (i ? " " : "") << t.extent(i);
    os << "\n";
    char buf[32];
    for (double v : t.data()) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << "\n";
    }
}

namespace detail {

inline bool parse_double(std::string_view text, double& out) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace detail

inline DenseTensor read_tensor(std::istream& is, const std::string& source = "<stream>") {
    std::string line;
    if (!std::getline(is, line) || (line != "TEN v1" && line != "TEN v1\r")) {
        throw FormatError(source + ": header mismatch, expected 'TEN v1'");
    }
    std::size_t order = 0;
    if (!std::getline(is, line) || !(std::istringstream(line) >> order) || order == 0) {
        throw FormatError(source + ": line 2 must hold a positive order");
    }
    Dims dims;
    if (!std::getline(is, line)) throw FormatError(source + ": missing extents line");
    {
        std::istringstream ext(line);
        long long d = 0;
        while (ext >> d) {
            if (d <= 0) throw FormatError(source + ": extents must be positive");
            dims.push_back(static_cast<std::size_t>(d));
        }
    }
    if (dims.size() != order) {
        throw FormatError(source + ": header declares order " + std::to_string(order) + " but lists " +
                          std::to_string(dims.size()) + " extents");
    }
    const std::size_t expected = product(dims);
    std::vector<double> values;
    values.reserve(expected);
    std::size_t line_no = 3;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        double v = 0.0;
        if (!detail::parse_double(line, v)) {
            throw FormatError(source + ": line " + std::to_string(line_no) + " is not a number: '" + line + "'");
        }
        values.push_back(v);
    }
    if (values.size() != expected) {
        throw FormatError(source + ": count mismatch, expected " + std::to_string(expected) + " values, found " +
                          std::to_string(values.size()));
    }
    return DenseTensor(std::move(dims), std::move(values));
}

inline void save_tensor(const DenseTensor& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write tensor file " + path);
    write_tensor(out, t);
    if (!out) throw FormatError("write failed for " + path);
}

inline DenseTensor load_tensor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open tensor file " + path);
    return read_tensor(in, path);
}

// ---------------------------------------------------------------------------
// CSV ingestion.

struct CsvTensor {
    DenseTensor tensor;
    std::size_t missing_cells = 0;
    std::vector<std::string> ids;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    if (quoted) throw FormatError("unterminated quote in CSV line");
    cells.push_back(std::move(cell));
    for (auto& s : cells) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    }
    return cells;
}

inline bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "?";
}

}  // namespace detail

/// Rows become mode 1; the selected feature columns (all non-id columns when
/// `feature_columns` is empty) are laid out colexicographically over `mode_split`.
/// Missing cells read as 0 and are counted.
inline CsvTensor read_table_csv(std::istream& is, const std::string& id_column, const std::vector<std::string>& feature_columns,
                                const Dims& mode_split, const std::string& source = "<csv>") {
    std::string line;
    if (!std::getline(is, line)) throw FormatError(source + ": empty file, expected a header row");
    const auto header = detail::split_csv_line(line);

    auto column_of = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) if (header[i] == name) return i;
        throw ConfigError(source + ": no column named '" + name + "'");
    };
    std::optional<std::size_t> id_col;
    if (!id_column.empty()) id_col = column_of(id_column);
    std::vector<std::size_t> cols;
    if (feature_columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) if (!id_col || i != *id_col) cols.push_back(i);
    } else {
        for (const auto& name : feature_columns) cols.push_back(column_of(name));
    }
    if (mode_split.empty() || product(mode_split) != cols.size()) {
        throw ConfigError(source + ": " + std::to_string(cols.size()) + " feature columns cannot be split as " +
                          to_string(mode_split));
    }

    std::vector<std::vector<double>> rows;
    CsvTensor out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw FormatError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " cells, header has " + std::to_string(header.size()));
        }
        std::vector<double> row;
        row.reserve(cols.size());
        for (std::size_t c : cols) {
            double v = 0.0;
            if (detail::is_missing_token(cells[c])) {
                ++out.missing_cells;
            } else if (!detail::parse_double(cells[c], v) || !std::isfinite(v)) {
                throw FormatError(source + ": line " + std::to_string(line_no) + " column '" + header[c] +
                                  "' is not numeric: '" + cells[c] + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
        out.ids.push_back(id_col ? cells[*id_col] : std::to_string(rows.size()));
    }
    if (rows.empty()) throw FormatError(source + ": no data rows");

    Dims dims{rows.size()};
    dims.insert(dims.end(), mode_split.begin(), mode_split.end());
    out.tensor = DenseTensor(dims);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out.tensor[r + rows.size() * c] = rows[r][c];
    return out;
}

inline CsvTensor load_table_csv(const std::string& path, const std::string& id_column, const std::vector<std::string>& feature_columns,
                                const Dims& mode_split) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open CSV " + path);
    return read_table_csv(in, id_column, feature_columns, mode_split, path);
}

/// One integer label per line.
inline std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open labels file " + path);
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream is(line);
        int v = 0;
        std::string extra;
        if (!(is >> v) || (is >> extra)) throw FormatError(path + ": line " + std::to_string(line_no) + " is not an integer label");
        labels.push_back(v);
    }
    return labels;
}

inline void save_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write labels file " + path);
    for (int v : labels) out << v << "\n";
}

}  // namespace ctt
