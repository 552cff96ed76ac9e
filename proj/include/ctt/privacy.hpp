#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ctt/network.hpp"
#include "ctt/tensor.hpp"

namespace ctt {

struct PrivacyFinding {
    std::size_t message_index = 0;
    std::string reason;
};

struct PrivacyAudit {
    bool pass = true;
    std::vector<PrivacyFinding> findings;
};

/// Fails iff a message is tagged personal_core or its flat payload matches some
/// client's G_1^k entrywise within `tol`.
inline PrivacyAudit audit_privacy(const std::vector<Message>& log, const std::vector<Matrix>& personal_cores, double tol = 1e-12) {
    PrivacyAudit audit;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const Message& m = log[i];
        const std::string where = "message " + std::to_string(i) + " (round " + std::to_string(m.round) + ", " +
                                  std::to_string(m.from) + " -> " + std::to_string(m.to) + ")";
        if (m.kind == PayloadKind::personal_core) {
            audit.findings.push_back({i, where + " is tagged personal_core"});
            continue;
        }
        for (std::size_t k = 0; k < personal_cores.size(); ++k) {
            const Matrix& g = personal_cores[k];
            if (static_cast<std::size_t>(g.size()) != m.payload.size() || g.size() == 0) continue;
            double worst = 0.0;
            for (std::size_t e = 0; e < m.payload.size() && worst <= tol; ++e) {
                worst = std::max(worst, std::abs(m.payload[e] - g.data()[e]));
            }
            if (worst <= tol) {
                audit.findings.push_back({i, where + " carries client " + std::to_string(k) + "'s personal core"});
                break;
            }
        }
    }
    audit.pass = audit.findings.empty();
    return audit;
}

}  // namespace ctt
