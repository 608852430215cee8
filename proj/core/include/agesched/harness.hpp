#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "agesched/ngm.hpp"
#include "agesched/simulator.hpp"
#include "agesched/whittle.hpp"

namespace agesched {

/// r independent copies of a base system: every base network is replicated
/// (same users, weights, service law and per-network capacity) and the
/// server capacity scales to r times the base one.
SystemConfig scale(const SystemConfig& base, int r);

/// One (policy, r, seed) simulation cell.
struct ExperimentResult {
    std::string policy;
    int r = 1;
    std::uint64_t seed = 0;
    std::int64_t horizon = 0;
    double avg_weighted_age = 0.0;
    double normalized_age = 0.0; // avg_weighted_age / r
    double wall_time_s = 0.0;
};

/// Shared precomputed inputs for policy construction.
struct PolicyResources {
    std::shared_ptr<WimwfIndexCache> wimwf_cache; // for "wimwf"
    std::shared_ptr<NetGainTable> ngm_table;      // for "ngm"
    int base_networks = 0;                        // network count of the base system
};

/// Builds one of mwl | mwh | ngm | wi | wimwf for a (possibly scaled) config.
/// Throws MissingArtifactError ("ngm" without tables) or NotGeometricError
/// ("wi" on non-geometric service).
std::unique_ptr<Policy> make_policy(const std::string& name, const SystemConfig& config,
                                    const PolicyResources& resources);

struct SweepOptions {
    std::int64_t horizon = 200000;
    int threads = 1;
    int wimwf_y_max = 50;
    double wimwf_bisect_tol = 1e-6;
    int wimwf_doubling_cap = 60;
    std::shared_ptr<NetGainTable> ngm_table; // required when "ngm" is swept
};

/// Runs every (policy, r, seed) combination for `horizon` slots with common
/// random numbers per (r, seed), returning results sorted by
/// (policy, r, seed). Cells execute on a bounded worker pool; results do not
/// depend on the execution order.
std::vector<ExperimentResult> sweep(const SystemConfig& base,
                                    const std::vector<std::string>& policies,
                                    const std::vector<int>& r_values,
                                    const std::vector<std::uint64_t>& seeds,
                                    const SweepOptions& options);

/// CSV with header policy,r,seed,T,avg_weighted_age,normalized_age,wall_time_s
/// and floats at 10 significant digits.
void emit_csv(std::span<const ExperimentResult> results, const std::string& path);
std::string to_csv(std::span<const ExperimentResult> results);

} // namespace agesched
