#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "agesched/system_config.hpp"

namespace agesched {

/// State of one user's unit buffer: age of the buffered job (delta) and its
/// accumulated processing time (progress). progress == kEmptyProgress marks
/// an empty buffer, in which case delta is 0.
struct UserState {
    static constexpr int kEmptyProgress = -1;

    int delta = 0;
    int progress = kEmptyProgress;

    bool empty() const { return progress == kEmptyProgress; }

    static UserState empty_buffer() { return UserState{}; }
    static UserState occupied(int delta, int progress) { return UserState{delta, progress}; }

    bool operator==(const UserState&) const = default;
};

/// Decision-epoch state of the whole system, flat by user ordinal.
struct SystemState {
    std::vector<UserState> users;
    std::int64_t slot = 0;

    static SystemState initial(const SystemConfig& config) {
        SystemState s;
        s.users.assign(UserLayout(config).total, UserState::empty_buffer());
        s.slot = 1;
        return s;
    }
};

/// The set of (network, user) pairs served in one slot.
struct ScheduleDecision {
    std::vector<std::pair<int, int>> served;

    bool serves(int network, int j) const {
        for (const auto& [i, u] : served) {
            if (i == network && u == j) {
                return true;
            }
        }
        return false;
    }
};

/// Throws InfeasibleDecisionError unless `decision` respects per-network and
/// server capacities, references valid non-empty buffers, and has no
/// duplicates.
void check_feasible(const SystemConfig& config, const SystemState& state,
                    const ScheduleDecision& decision);

/// Throws ConfigError if any per-user state violates its invariants
/// (empty => delta 0; progress <= delta; pmf progress within support).
void check_state_invariants(const SystemConfig& config, const SystemState& state);

} // namespace agesched
