#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "agesched/mdp.hpp"
#include "agesched/selector.hpp"
#include "agesched/simulator.hpp"

namespace agesched {

/// Closed-form Whittle index for geometric service at state (delta, 0):
/// w * (q delta^2 / 2 + (1 - q/2 + q/p) delta + 1/p).
double whittle_index(double w, double p, double q, int delta);

/// Numerical indexability check for a geometric-service user: the passive
/// set (greedy action 0, plus the empty state) must grow monotonically along
/// an ascending activation-cost grid.
struct IndexabilityReport {
    bool pass = true;
    std::vector<std::size_t> passive_set_sizes; // one per grid point
    // First nesting violation, if any.
    std::optional<std::pair<double, double>> violating_pair;
    std::optional<UserState> violating_state;
};
IndexabilityReport verify_indexability(const UserSpec& user, double q,
                                       std::span<const double> lambda_grid, int y_max);

/// Net gain of serving at `state` under activation cost lambda_bar,
/// evaluated with converged relative values on the truncated space.
double phi(const UserSpec& user, const ServiceDistribution& dist, UserState state,
           double lambda_bar, int y_max);

enum class IndexTag : std::uint8_t { BisectionRoot, Fallback };

struct WimwfResult {
    double index = 0.0;
    IndexTag tag = IndexTag::BisectionRoot;
};

/// Whittle-like index for general service: bisection for the activation cost
/// at which serving and idling break even, bracketed by doubling from
/// max{1, w (delta - 1)}. Falls back to the drift weight
/// w * (delta + 1) * hazard(progress) when no sign change is found (or an
/// inner solve fails to converge).
WimwfResult wimwf_index(const UserSpec& user, const ServiceDistribution& dist, UserState state,
                        int y_max, double bisect_tol = 1e-6, int doubling_cap = 60);

/// Lazily-filled store of WIMWF indices, shared by all replicas of a base
/// user and safe for concurrent lookups across simulation runs.
class WimwfIndexCache {
public:
    WimwfIndexCache(SystemConfig base, int y_max, double bisect_tol = 1e-6,
                    int doubling_cap = 60);

    /// Index for a base user's state. Computes and memoizes on first visit
    /// inside the truncated space; outside it, returns the drift fallback
    /// weight without solving.
    WimwfResult lookup(int base_network, int base_user, const UserState& state);

    int y_max() const { return y_max_; }
    const SystemConfig& base() const { return base_; }

private:
    SystemConfig base_;
    UserLayout layout_;
    int y_max_;
    double bisect_tol_;
    int doubling_cap_;
    struct PerUser {
        std::mutex mutex;
        std::unordered_map<std::uint64_t, WimwfResult> entries;
    };
    std::vector<std::unique_ptr<PerUser>> per_user_;
};

/// Whittle index policy ("wi"); geometric service only.
class WiPolicy final : public Policy {
public:
    explicit WiPolicy(const SystemConfig& config);
    std::string name() const override { return "wi"; }
    ScheduleDecision decide(const SystemConfig& config, const SystemState& state,
                            const std::vector<std::uint8_t>& arrivals) override;
};

/// WIMWF policy ("wimwf") for general service, backed by a shared index cache.
/// `base_networks` is the network count of the cache's base system; replicas
/// map onto base users by network index modulo that count.
class WimwfPolicy final : public Policy {
public:
    WimwfPolicy(std::shared_ptr<WimwfIndexCache> cache, int base_networks);
    std::string name() const override { return "wimwf"; }
    ScheduleDecision decide(const SystemConfig& config, const SystemState& state,
                            const std::vector<std::uint8_t>& arrivals) override;

private:
    std::shared_ptr<WimwfIndexCache> cache_;
    int base_networks_;
};

} // namespace agesched
