#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctt/tensor.hpp"

namespace ctt {

enum class PayloadKind { feature_core, global_core, consensus_state, personal_core };

inline std::string to_string(PayloadKind kind) {
    switch (kind) {
        case PayloadKind::feature_core: return "feature_core";
        case PayloadKind::global_core: return "global_core";
        case PayloadKind::consensus_state: return "consensus_state";
        case PayloadKind::personal_core: return "personal_core";
    }
    return "unknown";
}

using NodeId = int;
inline constexpr NodeId kServer = -1;

struct Message {
    std::size_t round = 0;
    NodeId from = 0;
    NodeId to = 0;
    PayloadKind kind = PayloadKind::feature_core;
    DenseTensor payload;

    std::size_t elements() const { return payload.size(); }
};

/// In-memory message bus. Every transmission is recorded with a copy of its
/// payload so that cost accounting and the privacy audit read the same log.
class SimNetwork {
public:
    void send(std::size_t round, NodeId from, NodeId to, PayloadKind kind, DenseTensor payload) {
        log_.push_back(Message{round, from, to, kind, std::move(payload)});
    }

    const std::vector<Message>& log() const { return log_; }

    std::uint64_t total_elements() const {
        std::uint64_t n = 0;
        for (const auto& m : log_) n += m.elements();
        return n;
    }

    /// Elements carried by each directed link (from, to).
    std::map<std::pair<NodeId, NodeId>, std::uint64_t> per_link() const {
        std::map<std::pair<NodeId, NodeId>, std::uint64_t> out;
        for (const auto& m : log_) out[{m.from, m.to}] += m.elements();
        return out;
    }

    std::size_t rounds() const {
        std::set<std::size_t> distinct;
        for (const auto& m : log_) distinct.insert(m.round);
        return distinct.size();
    }

    std::size_t messages_in_round(std::size_t round) const {
        std::size_t n = 0;
        for (const auto& m : log_) n += (m.round == round);
        return n;
    }

    void clear() { log_.clear(); }

    /// Test hook for fault injection.
    void inject(Message m) { log_.push_back(std::move(m)); }

private:
    std::vector<Message> log_;
};

}  // namespace ctt
