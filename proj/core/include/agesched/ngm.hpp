#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "agesched/mdp.hpp"
#include "agesched/simulator.hpp"

namespace agesched {

/// Lagrange multipliers of the relaxed scheduling problem: one global
/// (server capacity) and one per network. All components stay >= 0.
struct Multipliers {
    double lambda = 0.0;
    std::vector<double> mu;

    double lambda_bar(int network) const { return lambda + mu[network]; }
};

struct DualIterate {
    int k = 0;
    double lambda = 0.0;
    std::vector<double> mu;
    double dual_value = 0.0;
    double total_activation = 0.0;
    std::vector<double> per_network_activation;
};

struct DualResult {
    Multipliers multipliers;
    std::vector<DualIterate> trace;
};

struct DualOptions {
    double rvi_tol = 1e-9;
    int rvi_max_iters = 100000;
    int threads = 1;
};

/// Projected subgradient ascent on the dual of the relaxed problem, starting
/// from zero multipliers with diminishing steps h / sqrt(k) (per-network
/// scales h_bar, defaulting to h). Each iteration solves every single-user
/// MDP at the current activation costs and evaluates its long-run activation
/// frequency.
DualResult dual_ascent(const SystemConfig& config, int y_max, int iters, double h,
                       std::vector<double> h_bar = {}, const DualOptions& options = {});

/// Net-gain values of one user over its truncated space (progress axis
/// reduced as in StateSpace::natural).
struct UserGainTable {
    int y_max = 0;
    int dbar_max = 0;
    double lambda_bar = 0.0;
    std::vector<double> beta; // index delta * (dbar_max + 1) + progress

    double at(int delta, int progress) const {
        return beta[delta * (dbar_max + 1) + std::min(progress, dbar_max)];
    }
};

/// Solves one user's MDP at a fixed activation cost and tabulates the
/// net gain q_gap(s) for every non-empty state.
UserGainTable solve_user_gain_table(const UserSpec& user, const ServiceDistribution& dist,
                                    double lambda_bar, int y_max,
                                    const DualOptions& options = {});

/// Net-gain tables for every user of a base system at fixed multipliers.
struct NetGainTable {
    Multipliers multipliers;
    int y_max = 0;
    std::vector<UserGainTable> users; // by base user ordinal
};

NetGainTable build_net_gain_table(const SystemConfig& config, const Multipliers& multipliers,
                                  int y_max, const DualOptions& options = {});

/// Re-solves one user's MDP at the same multipliers on an enlarged space and
/// returns the refreshed table. y_max_prime must be at least twice the
/// largest coordinate of the out-of-space state that triggered the escape.
UserGainTable escape_resolve(const UserSpec& user, const ServiceDistribution& dist,
                             double lambda_bar, const UserState& state, int y_max_prime);

/// Net-gain maximization policy ("ngm"). Replicated systems share the base
/// system's per-user tables; an out-of-table state triggers an escape
/// re-solve that doubles the truncation bound and swaps the user's table.
class NgmPolicy final : public Policy {
public:
    NgmPolicy(const SystemConfig& base, std::shared_ptr<NetGainTable> table, int base_networks);
    std::string name() const override { return "ngm"; }
    ScheduleDecision decide(const SystemConfig& config, const SystemState& state,
                            const std::vector<std::uint8_t>& arrivals) override;

    /// Priority of one base user's state (escaping if out of space).
    double priority(int base_network, int base_user, const UserState& state);

private:
    SystemConfig base_;
    UserLayout layout_;
    std::shared_ptr<NetGainTable> table_;
    int base_networks_;
    std::unique_ptr<std::mutex[]> escape_mutexes_;
};

/// Precomputed NGM artifact: multipliers, dual trace and per-user tables,
/// keyed by a digest of (config, y_max, iters, h, h_bar).
struct NgmArtifact {
    int y_max = 0;
    int iters = 0;
    double h = 1.0;
    std::vector<double> h_bar;
    DualResult dual;
    NetGainTable table;
};

void save_ngm_artifact(const std::string& path, const SystemConfig& config,
                       const NgmArtifact& artifact);
/// Throws MissingArtifactError when absent or keyed to a different config.
NgmArtifact load_ngm_artifact(const std::string& path, const SystemConfig& config);

} // namespace agesched
