#include "agesched/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>

#include "agesched/errors.hpp"

namespace agesched {

SlotDraws draw_slot(const SystemConfig& config, std::uint64_t seed, std::int64_t t) {
    const UserLayout layout(config);
    SlotDraws draws;
    draws.arrivals.resize(layout.total);
    draws.completion_draws.resize(layout.total);
    int ord = 0;
    for (int i = 0; i < config.num_networks(); ++i) {
        for (int j = 0; j < config.users_in(i); ++j, ++ord) {
            const double u = slot_uniform(seed, t, ord, DrawKind::Arrival);
            draws.arrivals[ord] = u < config.user(i, j).p ? 1 : 0;
            draws.completion_draws[ord] = slot_uniform(seed, t, ord, DrawKind::Completion);
        }
    }
    return draws;
}

void apply_arrivals(const SystemConfig& config, SystemState& state,
                    const std::vector<std::uint8_t>& arrivals) {
    (void)config;
    for (std::size_t ord = 0; ord < state.users.size(); ++ord) {
        if (state.users[ord].empty() && arrivals[ord]) {
            state.users[ord] = UserState::occupied(0, 0);
        }
    }
}

StepResult step(const SystemConfig& config, const SystemState& state,
                const ScheduleDecision& decision, const SlotDraws& draws) {
    check_feasible(config, state, decision);
    const UserLayout layout(config);

    StepResult result;
    result.state = state;
    result.completed.assign(layout.total, 0);

    int ord = 0;
    for (int i = 0; i < config.num_networks(); ++i) {
        for (int j = 0; j < config.users_in(i); ++j, ++ord) {
            const UserState& s = state.users[ord];
            if (s.empty()) {
                continue;
            }
            result.slot_cost += config.user(i, j).w * s.delta;
        }
    }

    // Aging of unserved occupied buffers.
    for (std::size_t k = 0; k < result.state.users.size(); ++k) {
        UserState& s = result.state.users[k];
        if (!s.empty()) {
            ++s.delta;
        }
    }

    // Preemptive-resume service of the scheduled set; completions land at the
    // end of the slot.
    for (const auto& [i, j] : decision.served) {
        const int served_ord = layout.ordinal(i, j);
        const UserState before = state.users[served_ord];
        const double h = config.service(i).hazard(before.progress);
        if (draws.completion_draws[served_ord] < h) {
            result.state.users[served_ord] = UserState::empty_buffer();
            result.completed[served_ord] = 1;
        } else {
            result.state.users[served_ord] =
                UserState::occupied(before.delta + 1, before.progress + 1);
        }
    }

    // Boundary arrivals fill whatever is empty now (fresh buffers and buffers
    // vacated by completion); occupied buffers drop theirs.
    apply_arrivals(config, result.state, draws.arrivals);
    result.state.slot = state.slot + 1;
    return result;
}

ScheduleDecision ServeAllPolicy::decide(const SystemConfig& config, const SystemState& state,
                                        const std::vector<std::uint8_t>& arrivals) {
    (void)arrivals;
    const UserLayout layout(config);
    ScheduleDecision decision;
    int server_left = config.server_capacity;
    for (int i = 0; i < config.num_networks() && server_left > 0; ++i) {
        int network_left = config.networks[i].capacity;
        for (int j = 0; j < config.users_in(i) && network_left > 0 && server_left > 0; ++j) {
            if (!state.users[layout.ordinal(i, j)].empty()) {
                decision.served.emplace_back(i, j);
                --network_left;
                --server_left;
            }
        }
    }
    return decision;
}

RunMetrics run(const SystemConfig& config, Policy& policy, std::int64_t horizon,
               std::uint64_t seed, std::ostream* trace) {
    if (horizon < 1) {
        throw ConfigError("horizon must be >= 1");
    }
    const UserLayout layout(config);

    SystemState state = SystemState::initial(config);
    SlotDraws draws = draw_slot(config, seed, 1);
    apply_arrivals(config, state, draws.arrivals);

    std::vector<double> age_sum(layout.total, 0.0);
    std::vector<std::int64_t> served_count(layout.total, 0);
    std::vector<std::int64_t> completion_count(layout.total, 0);
    double total_cost = 0.0;

    if (trace != nullptr) {
        *trace << "t,i,j,a,c,d,delta,progress\n";
    }

    for (std::int64_t t = 1; t <= horizon; ++t) {
        const ScheduleDecision decision = policy.decide(config, state, draws.arrivals);

        const SlotDraws next_draws = draw_slot(config, seed, t + 1);
        SlotDraws boundary;
        boundary.arrivals = next_draws.arrivals;
        boundary.completion_draws = draws.completion_draws;
        StepResult advanced = step(config, state, decision, boundary);

        total_cost += advanced.slot_cost;
        for (int ord = 0; ord < layout.total; ++ord) {
            age_sum[ord] += state.users[ord].delta;
            completion_count[ord] += advanced.completed[ord];
        }
        for (const auto& [i, j] : decision.served) {
            ++served_count[layout.ordinal(i, j)];
        }

        if (trace != nullptr) {
            int ord = 0;
            for (int i = 0; i < config.num_networks(); ++i) {
                for (int j = 0; j < config.users_in(i); ++j, ++ord) {
                    *trace << t << ',' << i << ',' << j << ',' << int(draws.arrivals[ord]) << ','
                           << (decision.serves(i, j) ? 1 : 0) << ','
                           << int(advanced.completed[ord]) << ',' << state.users[ord].delta << ','
                           << state.users[ord].progress << '\n';
                }
            }
        }

        state = std::move(advanced.state);
        draws = std::move(next_draws);
    }

    RunMetrics metrics;
    metrics.horizon = horizon;
    metrics.total_weighted_age = total_cost;
    metrics.avg_weighted_age = total_cost / static_cast<double>(horizon);
    metrics.per_user_avg_age.resize(layout.total);
    metrics.per_user_activation_frequency.resize(layout.total);
    metrics.per_user_completions_per_slot.resize(layout.total);
    for (int ord = 0; ord < layout.total; ++ord) {
        metrics.per_user_avg_age[ord] = age_sum[ord] / static_cast<double>(horizon);
        metrics.per_user_activation_frequency[ord] =
            static_cast<double>(served_count[ord]) / static_cast<double>(horizon);
        metrics.per_user_completions_per_slot[ord] =
            static_cast<double>(completion_count[ord]) / static_cast<double>(horizon);
    }
    return metrics;
}

double exact_single_user_average_age(double p, double w, const ServiceDistribution& dist,
                                     int cap) {
    if (cap < 1) {
        throw ConfigError("oracle cap must be >= 1");
    }
    // Decision-epoch chain under always-serve. States are (delta, progress)
    // pairs plus the empty buffer; only states reachable from empty are
    // materialized (the diagonal, for this service rule).
    const int progress_cap = dist.is_geometric() ? cap : dist.k_max() - 1;
    struct Key {
        int delta;
        int progress; // -1 == empty
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, int> ids;
    std::vector<Key> states;
    auto intern = [&](Key k) {
        auto [it, fresh] = ids.try_emplace(k, static_cast<int>(states.size()));
        if (fresh) {
            states.push_back(k);
        }
        return it->second;
    };
    const Key empty_key{0, -1};
    intern(empty_key);

    std::vector<std::vector<std::pair<int, double>>> rows;
    for (std::size_t s = 0; s < states.size(); ++s) {
        const Key k = states[s];
        std::vector<std::pair<int, double>> row;
        if (k.progress < 0) {
            row.emplace_back(intern(empty_key), 1.0 - p);
            row.emplace_back(intern(Key{0, 0}), p);
        } else {
            double h = 1.0;
            if (dist.tail_sum(k.progress) > 0.0) {
                h = dist.hazard(k.progress);
            }
            const Key next{std::min(k.delta + 1, cap), std::min(k.progress + 1, progress_cap)};
            if (p * h > 0.0) {
                row.emplace_back(intern(Key{0, 0}), p * h);
            }
            if ((1.0 - p) * h > 0.0) {
                row.emplace_back(intern(empty_key), (1.0 - p) * h);
            }
            if (1.0 - h > 0.0) {
                row.emplace_back(intern(next), 1.0 - h);
            }
        }
        rows.push_back(std::move(row));
    }

    const int n = static_cast<int>(states.size());
    std::vector<double> pi(n, 1.0 / n);
    std::vector<double> next(n, 0.0);
    const int max_iters = 5000000;
    bool converged = false;
    for (int iter = 0; iter < max_iters; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            for (const auto& [dst, prob] : rows[s]) {
                next[dst] += pi[s] * prob;
            }
        }
        // Lazy mixing step sidesteps periodic chains (e.g. deterministic
        // service with p = 1) without changing the stationary distribution.
        double l1 = 0.0;
        for (int s = 0; s < n; ++s) {
            next[s] = 0.5 * pi[s] + 0.5 * next[s];
            l1 += std::abs(next[s] - pi[s]);
        }
        pi.swap(next);
        if (l1 < 1e-15) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NoConvergenceError("stationary-distribution power iteration did not converge",
                                 max_iters, 0.0);
    }

    double boundary_mass = 0.0;
    double mean = 0.0;
    for (int s = 0; s < n; ++s) {
        if (states[s].delta >= cap) {
            boundary_mass += pi[s];
        }
        mean += pi[s] * states[s].delta;
    }
    if (boundary_mass > 1e-9) {
        throw ConfigError("oracle truncation cap too small: boundary mass " +
                          std::to_string(boundary_mass));
    }
    return w * mean;
}

} // namespace agesched
