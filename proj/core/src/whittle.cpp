#include "agesched/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "agesched/errors.hpp"

namespace agesched {

double whittle_index(double w, double p, double q, int delta) {
    const double d = static_cast<double>(delta);
    return w * (q * d * d / 2.0 + (1.0 - q / 2.0 + q / p) * d + 1.0 / p);
}

namespace {

double round_significant(double x, int digits) {
    if (x == 0.0) {
        return 0.0;
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, x);
    return std::strtod(buf, nullptr);
}

// phi evaluations for one (user, state): memoized on the activation cost
// (rounded to 12 significant digits) and warm-started from the previous
// probe, since bisection re-probes nearby points.
class PhiEvaluator {
public:
    PhiEvaluator(const UserSpec& user, const ServiceDistribution& dist, UserState state,
                 int y_max)
        : user_(user), dist_(dist), space_(StateSpace::natural(dist, y_max)) {
        if (state.empty()) {
            throw ConfigError("phi is undefined at the empty state");
        }
        const int progress = dist.is_geometric() ? 0 : state.progress;
        if (!space_.contains(state.delta, progress)) {
            throw ConfigError("state outside the truncated space");
        }
        state_index_ = space_.index(state.delta, progress);
    }

    double eval(double lambda_bar) {
        const double key = round_significant(lambda_bar, 12);
        if (auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
        const Kernel kernel(user_.p, user_.w, dist_, lambda_bar, space_);
        RviOptions options;
        if (has_warm_) {
            options.warm_start = &iterate_;
        }
        const ValueFunction vf = rvi_solve(kernel, options, &iterate_);
        has_warm_ = true;
        const double gap = q_gap(kernel, vf, state_index_);
        memo_.emplace(key, gap);
        return gap;
    }

private:
    UserSpec user_;
    ServiceDistribution dist_;
    StateSpace space_;
    int state_index_ = 0;
    std::map<double, double> memo_;
    std::vector<double> iterate_;
    bool has_warm_ = false;
};

double fallback_weight(const UserSpec& user, const ServiceDistribution& dist,
                       const UserState& state) {
    return user.w * (state.delta + 1) * dist.hazard(state.progress);
}

} // namespace

double phi(const UserSpec& user, const ServiceDistribution& dist, UserState state,
           double lambda_bar, int y_max) {
    PhiEvaluator evaluator(user, dist, state, y_max);
    return evaluator.eval(lambda_bar);
}

WimwfResult wimwf_index(const UserSpec& user, const ServiceDistribution& dist, UserState state,
                        int y_max, double bisect_tol, int doubling_cap) {
    if (state.empty()) {
        throw ConfigError("wimwf index is undefined at the empty state");
    }
    try {
        PhiEvaluator evaluator(user, dist, state, y_max);
        if (evaluator.eval(0.0) <= 0.0) {
            return WimwfResult{0.0, IndexTag::BisectionRoot};
        }
        double lower = 0.0;
        double upper = std::max(1.0, user.w * (state.delta - 1));
        double phi_upper = evaluator.eval(upper);
        for (int doublings = 0; phi_upper > 0.0 && doublings < doubling_cap; ++doublings) {
            lower = upper;
            upper *= 2.0;
            phi_upper = evaluator.eval(upper);
        }
        if (phi_upper > 0.0) {
            return WimwfResult{fallback_weight(user, dist, state), IndexTag::Fallback};
        }
        while (upper - lower >= bisect_tol) {
            const double mid = 0.5 * (lower + upper);
            if (evaluator.eval(mid) > 0.0) {
                lower = mid;
            } else {
                upper = mid;
            }
        }
        return WimwfResult{0.5 * (lower + upper), IndexTag::BisectionRoot};
    } catch (const NoConvergenceError& e) {
        emit_warning(std::string("wimwf bisection solve did not converge (") + e.what() +
                     "); using drift fallback weight");
        return WimwfResult{fallback_weight(user, dist, state), IndexTag::Fallback};
    }
}

IndexabilityReport verify_indexability(const UserSpec& user, double q,
                                       std::span<const double> lambda_grid, int y_max) {
    const ServiceDistribution dist = ServiceDistribution::geometric(q);
    const StateSpace space = StateSpace::natural(dist, y_max);

    IndexabilityReport report;
    std::vector<char> prev_passive;
    double prev_lambda = 0.0;
    std::vector<double> warm;
    bool has_warm = false;

    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
        const double lambda_bar = lambda_grid[g];
        if (g > 0 && lambda_bar < prev_lambda) {
            throw ConfigError("lambda grid must be ascending");
        }
        const Kernel kernel(user.p, user.w, dist, lambda_bar, space);
        RviOptions options;
        if (has_warm) {
            options.warm_start = &warm;
        }
        const ValueFunction vf = rvi_solve(kernel, options, &warm);
        has_warm = true;

        std::vector<char> passive(space.size(), 0);
        std::size_t count = 0;
        for (int s = 0; s < space.size(); ++s) {
            if (greedy_action(kernel, vf, s) == 0) {
                passive[s] = 1;
                ++count;
            }
        }
        report.passive_set_sizes.push_back(count);

        if (g > 0) {
            for (int s = 0; s < space.size(); ++s) {
                if (prev_passive[s] && !passive[s]) {
                    report.pass = false;
                    if (!report.violating_pair) {
                        report.violating_pair = {prev_lambda, lambda_bar};
                        report.violating_state = space.state_of(s);
                    }
                }
            }
        }
        prev_passive = std::move(passive);
        prev_lambda = lambda_bar;
    }
    return report;
}

WimwfIndexCache::WimwfIndexCache(SystemConfig base, int y_max, double bisect_tol,
                                 int doubling_cap)
    : base_(std::move(base)), layout_(base_), y_max_(y_max), bisect_tol_(bisect_tol),
      doubling_cap_(doubling_cap) {
    per_user_.reserve(layout_.total);
    for (int k = 0; k < layout_.total; ++k) {
        per_user_.push_back(std::make_unique<PerUser>());
    }
}

WimwfResult WimwfIndexCache::lookup(int base_network, int base_user, const UserState& state) {
    const UserSpec& user = base_.user(base_network, base_user);
    const ServiceDistribution& dist = base_.service(base_network);
    if (state.delta > y_max_ || state.progress > y_max_) {
        // Out-of-space states use the drift weight directly; no solve.
        return WimwfResult{fallback_weight(user, dist, state), IndexTag::Fallback};
    }
    PerUser& slot = *per_user_[layout_.ordinal(base_network, base_user)];
    const std::uint64_t key = (static_cast<std::uint64_t>(state.delta) << 32) |
                              static_cast<std::uint32_t>(state.progress);
    {
        std::lock_guard<std::mutex> lock(slot.mutex);
        if (auto it = slot.entries.find(key); it != slot.entries.end()) {
            return it->second;
        }
    }
    // Computed outside the lock; duplicate concurrent computation is
    // idempotent, first insert wins.
    const WimwfResult result = wimwf_index(user, dist, state, y_max_, bisect_tol_, doubling_cap_);
    std::lock_guard<std::mutex> lock(slot.mutex);
    return slot.entries.try_emplace(key, result).first->second;
}

WiPolicy::WiPolicy(const SystemConfig& config) {
    for (const auto& net : config.networks) {
        if (!net.service.is_geometric()) {
            throw NotGeometricError("the Whittle index policy requires geometric service in "
                                    "every network");
        }
    }
}

ScheduleDecision WiPolicy::decide(const SystemConfig& config, const SystemState& state,
                                  const std::vector<std::uint8_t>& arrivals) {
    (void)arrivals;
    const UserLayout layout(config);
    std::vector<Candidate> candidates;
    for (int i = 0; i < config.num_networks(); ++i) {
        if (!config.service(i).is_geometric()) {
            throw NotGeometricError("network " + std::to_string(i) + " is not geometric");
        }
        for (int j = 0; j < config.users_in(i); ++j) {
            const UserState& s = state.users[layout.ordinal(i, j)];
            if (s.empty()) {
                continue;
            }
            const UserSpec& u = config.user(i, j);
            candidates.push_back(
                Candidate{i, j, whittle_index(u.w, u.p, config.service(i).q(), s.delta)});
        }
    }
    return select_jobs(candidates, config);
}

WimwfPolicy::WimwfPolicy(std::shared_ptr<WimwfIndexCache> cache, int base_networks)
    : cache_(std::move(cache)), base_networks_(base_networks) {}

ScheduleDecision WimwfPolicy::decide(const SystemConfig& config, const SystemState& state,
                                     const std::vector<std::uint8_t>& arrivals) {
    (void)arrivals;
    const UserLayout layout(config);
    std::vector<Candidate> candidates;
    for (int i = 0; i < config.num_networks(); ++i) {
        for (int j = 0; j < config.users_in(i); ++j) {
            const UserState& s = state.users[layout.ordinal(i, j)];
            if (s.empty()) {
                continue;
            }
            candidates.push_back(
                Candidate{i, j, cache_->lookup(i % base_networks_, j, s).index});
        }
    }
    return select_jobs(candidates, config);
}

} // namespace agesched
