#include "agesched/selector.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "agesched/errors.hpp"

namespace agesched {

namespace {

// Descending priority, then smaller network, then smaller user.
bool greedy_before(const Candidate& a, const Candidate& b) {
    if (a.priority != b.priority) {
        return a.priority > b.priority;
    }
    if (a.network != b.network) {
        return a.network < b.network;
    }
    return a.user < b.user;
}

void check_candidates(std::span<const Candidate> candidates, const SystemConfig& config) {
    std::vector<char> seen(UserLayout(config).total, 0);
    const UserLayout layout(config);
    for (const auto& c : candidates) {
        if (c.network < 0 || c.network >= config.num_networks() || c.user < 0 ||
            c.user >= config.users_in(c.network)) {
            throw InfeasibleDecisionError("candidate references unknown user (" +
                                          std::to_string(c.network) + ", " +
                                          std::to_string(c.user) + ")");
        }
        char& flag = seen[layout.ordinal(c.network, c.user)];
        if (flag) {
            throw InfeasibleDecisionError("duplicate candidate for user (" +
                                          std::to_string(c.network) + ", " +
                                          std::to_string(c.user) + ")");
        }
        flag = 1;
    }
}

void sort_decision(ScheduleDecision& decision) {
    std::sort(decision.served.begin(), decision.served.end());
}

} // namespace

ScheduleDecision select_jobs(std::span<const Candidate> candidates, const SystemConfig& config) {
    check_candidates(candidates, config);

    std::vector<Candidate> order(candidates.begin(), candidates.end());
    std::sort(order.begin(), order.end(), greedy_before);

    std::vector<int> network_left;
    network_left.reserve(config.networks.size());
    for (const auto& net : config.networks) {
        network_left.push_back(net.capacity);
    }
    int server_left = config.server_capacity;

    ScheduleDecision decision;
    for (const auto& c : order) {
        if (!(c.priority > 0.0)) {
            break; // sorted: everything after is also non-positive
        }
        if (server_left == 0) {
            break;
        }
        if (network_left[c.network] == 0) {
            continue;
        }
        --network_left[c.network];
        --server_left;
        decision.served.emplace_back(c.network, c.user);
    }
    sort_decision(decision);
    return decision;
}

ScheduleDecision brute_force_select(std::span<const Candidate> candidates,
                                    const SystemConfig& config) {
    if (candidates.size() > 20) {
        throw TooLargeError("brute_force_select limited to 20 candidates, got " +
                            std::to_string(candidates.size()));
    }
    check_candidates(candidates, config);

    // Same candidate order as the greedy, so "lexicographically earliest
    // subset of ranks" is the matching tie-break.
    std::vector<Candidate> order(candidates.begin(), candidates.end());
    std::sort(order.begin(), order.end(), greedy_before);

    std::vector<Candidate> eligible;
    for (const auto& c : order) {
        if (c.priority > 0.0) {
            eligible.push_back(c);
        }
    }

    const int n = static_cast<int>(eligible.size());
    double best_value = 0.0;
    std::vector<int> best_ranks; // empty set is always feasible with value 0
    std::vector<int> ranks;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> per_network(config.networks.size(), 0);
        int total = 0;
        double value = 0.0;
        bool feasible = true;
        ranks.clear();
        for (int r = 0; r < n && feasible; ++r) {
            if (!(mask & (1u << r))) {
                continue;
            }
            const auto& c = eligible[r];
            if (++per_network[c.network] > config.networks[c.network].capacity ||
                ++total > config.server_capacity) {
                feasible = false;
                break;
            }
            value += c.priority;
            ranks.push_back(r);
        }
        if (!feasible) {
            continue;
        }
        if (value > best_value ||
            (value == best_value && std::lexicographical_compare(
                                        ranks.begin(), ranks.end(), best_ranks.begin(),
                                        best_ranks.end()))) {
            best_value = value;
            best_ranks = ranks;
        }
    }

    ScheduleDecision decision;
    for (int r : best_ranks) {
        decision.served.emplace_back(eligible[r].network, eligible[r].user);
    }
    sort_decision(decision);
    return decision;
}

double decision_value(const ScheduleDecision& decision, std::span<const Candidate> candidates) {
    double value = 0.0;
    for (const auto& c : candidates) {
        for (const auto& [i, j] : decision.served) {
            if (i == c.network && j == c.user) {
                value += c.priority;
                break;
            }
        }
    }
    return value;
}

} // namespace agesched
