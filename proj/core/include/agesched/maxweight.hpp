#pragma once

#include "agesched/selector.hpp"
#include "agesched/simulator.hpp"

namespace agesched {

/// Drift-minimizing max-weight priority: w * (delta + 1) * (1 - alpha),
/// where alpha is the probability the job needs two or more further served
/// slots given its progress.
inline double mwl_index(double w, int delta, double alpha_value) {
    return w * (delta + 1) * (1.0 - alpha_value);
}

/// Heuristic max-weight priority: w * delta.
inline double mwh_index(double w, int delta) {
    return w * static_cast<double>(delta);
}

/// Lyapunov-drift max-weight policy ("mwl").
class MwlPolicy final : public Policy {
public:
    std::string name() const override { return "mwl"; }
    ScheduleDecision decide(const SystemConfig& config, const SystemState& state,
                            const std::vector<std::uint8_t>& arrivals) override;
};

/// Heuristic max-weight policy ("mwh").
class MwhPolicy final : public Policy {
public:
    std::string name() const override { return "mwh"; }
    ScheduleDecision decide(const SystemConfig& config, const SystemState& state,
                            const std::vector<std::uint8_t>& arrivals) override;
};

} // namespace agesched
