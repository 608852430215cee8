#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "agesched/rng.hpp"
#include "agesched/state.hpp"
#include "agesched/system_config.hpp"

namespace agesched {

/// Randomness of one slot, flat by user ordinal. Completion draws are
/// reserved for every user whether or not it is served, so the stream is
/// policy-independent.
struct SlotDraws {
    std::vector<std::uint8_t> arrivals;
    std::vector<double> completion_draws;
};

/// Bernoulli(p) arrival bits and uniform completion draws for slot t.
/// Pure function of (config shape, seed, t).
SlotDraws draw_slot(const SystemConfig& config, std::uint64_t seed, std::int64_t t);

/// Fills empty buffers from arrival bits (age 0, no progress); arrivals into
/// occupied buffers are dropped.
void apply_arrivals(const SystemConfig& config, SystemState& state,
                    const std::vector<std::uint8_t>& arrivals);

struct StepResult {
    SystemState state;                    // decision-epoch state of the next slot
    double slot_cost = 0.0;               // sum_ij w * delta at this decision epoch
    std::vector<std::uint8_t> completed;  // per-user completion indicator
};

/// Advances one slot: accrues cost on the input (decision-epoch) state,
/// applies preemptive-resume service to the served set, resolves end-of-slot
/// completions, then lands the boundary arrivals. `draws.completion_draws`
/// belong to this slot; `draws.arrivals` are the bits landing at the boundary
/// to the next slot (a completed buffer refills to age 0 when its bit is 1).
/// Throws InfeasibleDecisionError on a capacity or occupancy violation.
StepResult step(const SystemConfig& config, const SystemState& state,
                const ScheduleDecision& decision, const SlotDraws& draws);

/// Scheduling policy plugged into the simulator. Receives the decision-epoch
/// state plus the raw arrival bits of the slot. Implementations must be safe
/// to call concurrently from different runs.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual ScheduleDecision decide(const SystemConfig& config, const SystemState& state,
                                    const std::vector<std::uint8_t>& arrivals) = 0;
};

/// Serves every occupied buffer, filling capacities in (network, user) order.
class ServeAllPolicy final : public Policy {
public:
    std::string name() const override { return "serve-all"; }
    ScheduleDecision decide(const SystemConfig& config, const SystemState& state,
                            const std::vector<std::uint8_t>& arrivals) override;
};

/// Long-run simulation metrics. avg_weighted_age == total_weighted_age / T.
struct RunMetrics {
    std::int64_t horizon = 0;
    double total_weighted_age = 0.0;
    double avg_weighted_age = 0.0;
    std::vector<double> per_user_avg_age;
    std::vector<double> per_user_activation_frequency;
    std::vector<double> per_user_completions_per_slot;
};

/// Simulates T slots from the all-empty state. Identical
/// (config, policy, T, seed) yields bit-identical metrics. When `trace` is
/// non-null, one CSV record per (slot, network, user) is written with header
/// t,i,j,a,c,d,delta,progress.
RunMetrics run(const SystemConfig& config, Policy& policy, std::int64_t horizon,
               std::uint64_t seed, std::ostream* trace = nullptr);

/// Brute-force oracle for simulator validation: exact stationary average
/// weighted age of a single user under the always-serve rule, computed on the
/// truncated chain (delta capped at `cap`). The cap must be generous enough
/// that the stationary mass at the truncation boundary is < 1e-9.
double exact_single_user_average_age(double p, double w, const ServiceDistribution& dist,
                                     int cap);

} // namespace agesched
