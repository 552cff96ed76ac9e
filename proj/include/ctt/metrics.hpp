#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ctt/error.hpp"
#include "ctt/tensor.hpp"

namespace ctt {

/// Relative squared error ||x - x_hat||^2 / ||x||^2.
inline double rse(const DenseTensor& x, const DenseTensor& x_hat) {
    if (x.dims() != x_hat.dims()) throw ConfigError("rse: dims differ " + to_string(x.dims()) + " vs " + to_string(x_hat.dims()));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_hat[i];
        num += d * d;
        den += x[i] * x[i];
    }
    if (den == 0.0) throw NumericalError("rse: reference tensor has zero norm");
    return num / den;
}

/// Energy-weighted RSE over all clients: sum ||X^k - X_hat^k||^2 / sum ||X^k||^2.
inline double rse_global(const std::vector<DenseTensor>& x, const std::vector<DenseTensor>& x_hat) {
    if (x.size() != x_hat.size() || x.empty()) throw ConfigError("rse_global: client counts differ");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k].dims() != x_hat[k].dims()) throw ConfigError("rse_global: dims differ at client " + std::to_string(k));
        for (std::size_t i = 0; i < x[k].size(); ++i) {
            const double d = x[k][i] - x_hat[k][i];
            num += d * d;
            den += x[k][i] * x[k][i];
        }
    }
    if (den == 0.0) throw NumericalError("rse_global: reference tensors have zero norm");
    return num / den;
}

/// Elements one decentralized node sends over one link in L rounds: L * R_1 * prod(I_2..I_N).
inline std::uint64_t comm_predicted_dec(std::size_t rounds, std::size_t r1, const Dims& dims) {
    std::uint64_t n = static_cast<std::uint64_t>(rounds) * r1;
    for (std::size_t i = 1; i < dims.size(); ++i) n *= dims[i];
    return n;
}

/// Elements carried by one master-slave link in one direction:
/// sum_{n=1}^{N-1} R_n R_{n+1} I_{n+1}, with ranks [R_0, ..., R_N] and dims [I_1, ..., I_N].
inline std::uint64_t comm_predicted_ms(const std::vector<std::size_t>& ranks, const Dims& dims) {
    if (ranks.size() != dims.size() + 1) {
        throw ConfigError("comm_predicted_ms: need N+1 ranks for N dims, got " + std::to_string(ranks.size()) + " and " +
                          std::to_string(dims.size()));
    }
    std::uint64_t n = 0;
    for (std::size_t i = 1; i < dims.size(); ++i) n += static_cast<std::uint64_t>(ranks[i]) * ranks[i + 1] * dims[i];
    return n;
}

enum class Protocol { centralized, master_slave, decentralized };

inline std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::centralized: return "centralized";
        case Protocol::master_slave: return "master-slave";
        case Protocol::decentralized: return "decentralized";
    }
    return "unknown";
}

inline Protocol parse_protocol(const std::string& s) {
    if (s == "centralized") return Protocol::centralized;
    if (s == "master-slave" || s == "ms") return Protocol::master_slave;
    if (s == "decentralized" || s == "dec") return Protocol::decentralized;
    throw ConfigError("unknown mode '" + s + "' (expected centralized | master-slave | decentralized)");
}

struct CostTerm {
    std::string name;
    double value = 0.0;
};

/// Operation-count model with unit constants. Trend lines only.
struct CostModel {
    std::vector<CostTerm> terms;
    double total = 0.0;
    double simplified = 0.0;   // equal-size closed form
};

/// Closed forms with all extents I and ranks R equal and I_1^k = I/K:
/// master-slave I^N [R^2 (1 + 1/K) + 1/K^2]; decentralized I^{N+1}/K^2 + R^2 I^N + R L K I^{N-1}.
inline double simplified_cost(double extent, double rank, std::size_t order, std::size_t k, std::size_t rounds, Protocol mode) {
    const double n = static_cast<double>(order);
    const double kk = static_cast<double>(k);
    switch (mode) {
        case Protocol::master_slave:
            return std::pow(extent, n) * (rank * rank * (1.0 + 1.0 / kk) + 1.0 / (kk * kk));
        case Protocol::decentralized:
            return std::pow(extent, n + 1.0) / (kk * kk) + rank * rank * std::pow(extent, n) +
                   rank * static_cast<double>(rounds) * kk * std::pow(extent, n - 1.0);
        case Protocol::centralized:
            return std::pow(extent, n) * rank * rank;
    }
    return 0.0;
}

/// Per-line operation counts evaluated with the given dims (I_1 = total rows,
/// split evenly over K) and ranks [R_0, ..., R_N]. `simplified` uses the
/// geometric means of the dims and of the interior ranks.
inline CostModel compute_cost_model(const Dims& dims, const std::vector<std::size_t>& ranks, std::size_t k, std::size_t rounds,
                                    Protocol mode) {
    if (dims.size() < 2 || ranks.size() != dims.size() + 1 || k == 0) throw ConfigError("compute_cost_model: inconsistent inputs");
    const std::size_t order = dims.size();
    std::vector<double> in(dims.begin(), dims.end());
    std::vector<double> r(ranks.begin(), ranks.end());
    const double kk = static_cast<double>(k);
    auto tail_product = [&](std::size_t from) {  // prod_{i >= from} I_i, 0-based
        double p = 1.0;
        for (std::size_t i = from; i < order; ++i) p *= in[i];
        return p;
    };
    auto sweep_cost = [&](std::size_t first, double lead_extent) {  // sum (R_{n-1} I_n)^2 prod_{i>n} I_i
        double c = 0.0;
        for (std::size_t n = first; n + 1 < order; ++n) {
            const double extent = n == 0 ? lead_extent : in[n];
            c += std::pow(r[n] * extent, 2.0) * tail_product(n + 1);
        }
        return c;
    };
    const double rows_per_client = in[0] / kk;
    CostModel out;
    switch (mode) {
        case Protocol::master_slave: {
            out.terms.push_back({"client_tt_svd", kk * sweep_cost(0, rows_per_client)});
            double fusion = 0.0;
            for (std::size_t n = 2; n + 1 <= order; ++n) {  // 1-based n = 2..N-1
                double p = 1.0;
                for (std::size_t i = 1; i <= n; ++i) p *= in[i];
                fusion += r[n] * r[n + 1] * p;
            }
            out.terms.push_back({"fusion_contractions", kk * r[1] * fusion});
            out.terms.push_back({"fusion_average", kk * r[1] * tail_product(1)});
            out.terms.push_back({"server_tt_svd", sweep_cost(1, 0.0)});
            break;
        }
        case Protocol::decentralized:
            out.terms.push_back({"personal_svd", rows_per_client * rows_per_client * tail_product(1)});
            out.terms.push_back({"consensus", static_cast<double>(rounds) * kk * r[1] * tail_product(1)});
            out.terms.push_back({"feature_tt_svd", sweep_cost(1, 0.0)});
            break;
        case Protocol::centralized:
            out.terms.push_back({"tt_svd", sweep_cost(0, in[0])});
            break;
    }
    for (const auto& t : out.terms) out.total += t.value;

    double log_i = 0.0, log_r = 0.0;
    for (double d : in) log_i += std::log(d);
    for (std::size_t i = 1; i + 1 < r.size(); ++i) log_r += std::log(r[i]);
    const double mean_i = std::exp(log_i / static_cast<double>(order));
    const double mean_r = r.size() > 2 ? std::exp(log_r / static_cast<double>(r.size() - 2)) : 1.0;
    out.simplified = simplified_cost(mean_i, mean_r, order, k, rounds, mode);
    return out;
}

}  // namespace ctt
