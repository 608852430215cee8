#include "agesched/maxweight.hpp"

namespace agesched {

namespace {

template <typename PriorityFn>
ScheduleDecision decide_by_index(const SystemConfig& config, const SystemState& state,
                                 PriorityFn&& priority) {
    const UserLayout layout(config);
    std::vector<Candidate> candidates;
    for (int i = 0; i < config.num_networks(); ++i) {
        for (int j = 0; j < config.users_in(i); ++j) {
            const UserState& s = state.users[layout.ordinal(i, j)];
            if (s.empty()) {
                continue;
            }
            candidates.push_back(Candidate{i, j, priority(i, j, s)});
        }
    }
    return select_jobs(candidates, config);
}

} // namespace

ScheduleDecision MwlPolicy::decide(const SystemConfig& config, const SystemState& state,
                                   const std::vector<std::uint8_t>& arrivals) {
    (void)arrivals;
    return decide_by_index(config, state, [&config](int i, int j, const UserState& s) {
        return mwl_index(config.user(i, j).w, s.delta, config.service(i).alpha(s.progress));
    });
}

ScheduleDecision MwhPolicy::decide(const SystemConfig& config, const SystemState& state,
                                   const std::vector<std::uint8_t>& arrivals) {
    (void)arrivals;
    return decide_by_index(config, state, [&config](int i, int j, const UserState& s) {
        return mwh_index(config.user(i, j).w, s.delta);
    });
}

} // namespace agesched
