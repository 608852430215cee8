#include "agesched/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <tuple>

#include "agesched/errors.hpp"
#include "agesched/maxweight.hpp"
#include "agesched/parallel.hpp"

namespace agesched {

SystemConfig scale(const SystemConfig& base, int r) {
    if (r < 1) {
        throw ConfigError("scaling factor must be >= 1");
    }
    SystemConfig scaled;
    scaled.server_capacity = r * base.server_capacity;
    scaled.networks.reserve(static_cast<std::size_t>(r) * base.networks.size());
    for (int copy = 0; copy < r; ++copy) {
        for (const auto& net : base.networks) {
            scaled.networks.push_back(net);
        }
    }
    return scaled;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const SystemConfig& config,
                                    const PolicyResources& resources) {
    if (name == "mwl") {
        return std::make_unique<MwlPolicy>();
    }
    if (name == "mwh") {
        return std::make_unique<MwhPolicy>();
    }
    if (name == "wi") {
        return std::make_unique<WiPolicy>(config);
    }
    if (name == "wimwf") {
        if (resources.wimwf_cache == nullptr || resources.base_networks < 1) {
            throw ConfigError("wimwf policy needs an index cache over the base system");
        }
        return std::make_unique<WimwfPolicy>(resources.wimwf_cache, resources.base_networks);
    }
    if (name == "ngm") {
        if (resources.ngm_table == nullptr) {
            throw MissingArtifactError("ngm policy needs precomputed net-gain tables "
                                       "(run solve-ngm first)");
        }
        if (resources.base_networks < 1) {
            throw ConfigError("ngm policy needs the base network count");
        }
        // The tables are keyed by base user ordinals; the first base_networks
        // networks of a replicated config are exactly the base system.
        SystemConfig base;
        base.server_capacity = config.server_capacity;
        base.networks.assign(config.networks.begin(),
                             config.networks.begin() + resources.base_networks);
        return std::make_unique<NgmPolicy>(base, resources.ngm_table, resources.base_networks);
    }
    throw ConfigError("unknown policy '" + name + "' (expected mwl|mwh|ngm|wi|wimwf)");
}

std::vector<ExperimentResult> sweep(const SystemConfig& base,
                                    const std::vector<std::string>& policies,
                                    const std::vector<int>& r_values,
                                    const std::vector<std::uint64_t>& seeds,
                                    const SweepOptions& options) {
    for (const auto& name : policies) {
        if (name == "ngm" && options.ngm_table == nullptr) {
            throw MissingArtifactError("sweep requested ngm without precomputed tables");
        }
        if (name == "wi") {
            for (const auto& net : base.networks) {
                if (!net.service.is_geometric()) {
                    throw NotGeometricError("sweep requested wi on non-geometric service");
                }
            }
        }
    }

    PolicyResources resources;
    resources.ngm_table = options.ngm_table;
    resources.base_networks = base.num_networks();
    for (const auto& name : policies) {
        if (name == "wimwf") {
            resources.wimwf_cache = std::make_shared<WimwfIndexCache>(
                base, options.wimwf_y_max, options.wimwf_bisect_tol,
                options.wimwf_doubling_cap);
            break;
        }
    }

    struct Cell {
        std::string policy;
        int r;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const auto& name : policies) {
        for (int r : r_values) {
            for (std::uint64_t seed : seeds) {
                cells.push_back(Cell{name, r, seed});
            }
        }
    }

    std::vector<SystemConfig> scaled_by_r;
    std::vector<int> r_index(cells.size());
    {
        std::vector<int> distinct;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            auto it = std::find(distinct.begin(), distinct.end(), cells[c].r);
            if (it == distinct.end()) {
                distinct.push_back(cells[c].r);
                scaled_by_r.push_back(scale(base, cells[c].r));
                it = std::prev(distinct.end());
            }
            r_index[c] = static_cast<int>(it - distinct.begin());
        }
    }

    std::vector<ExperimentResult> results(cells.size());
    parallel_for(static_cast<int>(cells.size()), options.threads, [&](int c) {
        const Cell& cell = cells[c];
        const SystemConfig& config = scaled_by_r[r_index[c]];
        auto policy = make_policy(cell.policy, config, resources);

        const auto start = std::chrono::steady_clock::now();
        const RunMetrics metrics = run(config, *policy, options.horizon, cell.seed);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

        ExperimentResult& r = results[c];
        r.policy = cell.policy;
        r.r = cell.r;
        r.seed = cell.seed;
        r.horizon = options.horizon;
        r.avg_weighted_age = metrics.avg_weighted_age;
        r.normalized_age = metrics.avg_weighted_age / cell.r;
        r.wall_time_s = elapsed.count();
    });

    std::sort(results.begin(), results.end(),
              [](const ExperimentResult& a, const ExperimentResult& b) {
                  return std::tie(a.policy, a.r, a.seed) < std::tie(b.policy, b.r, b.seed);
              });
    return results;
}

std::string to_csv(std::span<const ExperimentResult> results) {
    std::string out = "policy,r,seed,T,avg_weighted_age,normalized_age,wall_time_s\n";
    char buf[160];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%llu,%lld,%.10g,%.10g,%.10g\n", r.policy.c_str(),
                      r.r, static_cast<unsigned long long>(r.seed),
                      static_cast<long long>(r.horizon), r.avg_weighted_age, r.normalized_age,
                      r.wall_time_s);
        out += buf;
    }
    return out;
}

void emit_csv(std::span<const ExperimentResult> results, const std::string& path) {
    if (results.empty()) {
        throw ConfigError("refusing to emit an empty result CSV");
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write results CSV: " + path);
    }
    out << to_csv(results);
    if (!out) {
        throw ConfigError("failed while writing results CSV: " + path);
    }
}

} // namespace agesched
