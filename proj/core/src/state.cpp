#include "agesched/state.hpp"

#include <string>

#include "agesched/errors.hpp"

namespace agesched {

void check_feasible(const SystemConfig& config, const SystemState& state,
                    const ScheduleDecision& decision) {
    const UserLayout layout(config);
    std::vector<int> per_network(config.num_networks(), 0);
    std::vector<char> seen(layout.total, 0);
    for (const auto& [i, j] : decision.served) {
        if (i < 0 || i >= config.num_networks() || j < 0 || j >= config.users_in(i)) {
            throw InfeasibleDecisionError("decision references unknown user (" +
                                          std::to_string(i) + ", " + std::to_string(j) + ")");
        }
        const int ord = layout.ordinal(i, j);
        if (seen[ord]) {
            throw InfeasibleDecisionError("decision serves user (" + std::to_string(i) + ", " +
                                          std::to_string(j) + ") twice");
        }
        seen[ord] = 1;
        if (state.users[ord].empty()) {
            throw InfeasibleDecisionError("decision serves user (" + std::to_string(i) + ", " +
                                          std::to_string(j) + ") with an empty buffer");
        }
        ++per_network[i];
    }
    int total = 0;
    for (int i = 0; i < config.num_networks(); ++i) {
        if (per_network[i] > config.networks[i].capacity) {
            throw InfeasibleDecisionError("network " + std::to_string(i + 1) +
                                          " over capacity: " + std::to_string(per_network[i]) +
                                          " > " + std::to_string(config.networks[i].capacity));
        }
        total += per_network[i];
    }
    if (total > config.server_capacity) {
        throw InfeasibleDecisionError("server over capacity: " + std::to_string(total) + " > " +
                                      std::to_string(config.server_capacity));
    }
}

void check_state_invariants(const SystemConfig& config, const SystemState& state) {
    const UserLayout layout(config);
    for (int i = 0; i < config.num_networks(); ++i) {
        const auto& service = config.service(i);
        for (int j = 0; j < config.users_in(i); ++j) {
            const UserState& s = state.users[layout.ordinal(i, j)];
            const std::string who = "user (" + std::to_string(i) + ", " + std::to_string(j) + ")";
            if (s.empty()) {
                if (s.delta != 0) {
                    throw ConfigError(who + ": empty buffer must have delta 0");
                }
                continue;
            }
            if (s.delta < 0 || s.progress < 0) {
                throw ConfigError(who + ": negative state component");
            }
            if (s.progress > s.delta) {
                throw ConfigError(who + ": progress exceeds age");
            }
            if (!service.is_geometric() && s.progress > service.k_max() - 1) {
                throw ConfigError(who + ": progress exhausted the service support");
            }
        }
    }
}

} // namespace agesched
