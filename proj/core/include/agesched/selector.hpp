#pragma once

#include <span>

#include "agesched/state.hpp"

namespace agesched {

/// A schedulable user (non-empty buffer) with its policy-assigned priority.
struct Candidate {
    int network = 0;
    int user = 0;
    double priority = 0.0;
};

/// Picks a feasible set of candidates maximizing total priority subject to
/// per-network capacities and the server capacity. Greedy in descending
/// priority; exact because the feasible sets form a laminar matroid
/// (per-network caps nested under the global cap). Candidates with
/// priority <= 0 are never scheduled. Ties break on (priority, smaller
/// network, smaller user), so decisions are fully deterministic.
ScheduleDecision select_jobs(std::span<const Candidate> candidates, const SystemConfig& config);

/// Exhaustive-search oracle for select_jobs: enumerates every feasible subset
/// and applies the same tie-break. Throws TooLargeError above 20 candidates.
ScheduleDecision brute_force_select(std::span<const Candidate> candidates,
                                    const SystemConfig& config);

/// Total priority of a decision under the given candidate list.
double decision_value(const ScheduleDecision& decision, std::span<const Candidate> candidates);

} // namespace agesched
