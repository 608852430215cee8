#include "agesched/ngm.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "agesched/errors.hpp"
#include "agesched/parallel.hpp"
#include "agesched/selector.hpp"

namespace agesched {

DualResult dual_ascent(const SystemConfig& config, int y_max, int iters, double h,
                       std::vector<double> h_bar, const DualOptions& options) {
    if (iters < 1) {
        throw ConfigError("dual ascent needs at least one iteration");
    }
    if (!(h > 0.0)) {
        throw ConfigError("dual step scale h must be > 0");
    }
    const int n_networks = config.num_networks();
    if (h_bar.empty()) {
        h_bar.assign(n_networks, h);
    }
    if (static_cast<int>(h_bar.size()) != n_networks) {
        throw ConfigError("h_bar must have one entry per network");
    }
    for (double hb : h_bar) {
        if (!(hb > 0.0)) {
            throw ConfigError("dual step scales must be > 0");
        }
    }

    const UserLayout layout(config);
    DualResult result;
    result.multipliers.mu.assign(n_networks, 0.0);

    // Warm-start storage: consecutive iterations solve nearby MDPs.
    std::vector<std::vector<double>> value_warm(layout.total);
    std::vector<std::vector<double>> eval_warm(layout.total);
    std::vector<double> freq(layout.total, 0.0);
    std::vector<double> gain(layout.total, 0.0);

    double lambda = 0.0;
    std::vector<double> mu(n_networks, 0.0);

    for (int k = 1; k <= iters; ++k) {
        parallel_for(layout.total, options.threads, [&](int ord) {
            const auto [i, j] = layout.locate(ord);
            const UserSpec& user = config.user(i, j);
            const ServiceDistribution& dist = config.service(i);
            const Kernel kernel(user.p, user.w, dist, lambda + mu[i],
                                StateSpace::natural(dist, y_max));

            RviOptions rvi;
            rvi.tol = options.rvi_tol;
            rvi.max_iters = options.rvi_max_iters;
            if (!value_warm[ord].empty()) {
                rvi.warm_start = &value_warm[ord];
            }
            const ValueFunction vf = rvi_solve(kernel, rvi, &value_warm[ord]);
            gain[ord] = vf.gain;

            const std::vector<int> policy = extract_policy(kernel, vf);
            EvalOptions eval;
            eval.tol = options.rvi_tol;
            eval.max_iters = options.rvi_max_iters;
            if (!eval_warm[ord].empty()) {
                eval.warm_start = &eval_warm[ord];
            }
            freq[ord] = activation_frequency(kernel, policy, eval, &eval_warm[ord]);
        });

        DualIterate iterate;
        iterate.k = k;
        iterate.lambda = lambda;
        iterate.mu = mu;
        iterate.per_network_activation.assign(n_networks, 0.0);
        double gain_sum = 0.0;
        for (int ord = 0; ord < layout.total; ++ord) {
            const auto [i, j] = layout.locate(ord);
            iterate.per_network_activation[i] += freq[ord];
            iterate.total_activation += freq[ord];
            gain_sum += gain[ord];
        }
        iterate.dual_value = gain_sum - lambda * config.server_capacity;
        for (int i = 0; i < n_networks; ++i) {
            iterate.dual_value -= mu[i] * config.networks[i].capacity;
        }
        result.trace.push_back(iterate);

        const double step = h / std::sqrt(static_cast<double>(k));
        lambda = std::max(0.0, lambda + step * (iterate.total_activation -
                                                config.server_capacity));
        for (int i = 0; i < n_networks; ++i) {
            const double step_i = h_bar[i] / std::sqrt(static_cast<double>(k));
            mu[i] = std::max(0.0, mu[i] + step_i * (iterate.per_network_activation[i] -
                                                    config.networks[i].capacity));
        }
    }

    result.multipliers.lambda = lambda;
    result.multipliers.mu = std::move(mu);
    return result;
}

UserGainTable solve_user_gain_table(const UserSpec& user, const ServiceDistribution& dist,
                                    double lambda_bar, int y_max, const DualOptions& options) {
    const StateSpace space = StateSpace::natural(dist, y_max);
    const Kernel kernel(user.p, user.w, dist, lambda_bar, space);
    RviOptions rvi;
    rvi.tol = options.rvi_tol;
    rvi.max_iters = options.rvi_max_iters;
    const ValueFunction vf = rvi_solve(kernel, rvi);

    UserGainTable table;
    table.y_max = y_max;
    table.dbar_max = space.dbar_max;
    table.lambda_bar = lambda_bar;
    table.beta.resize((y_max + 1) * (space.dbar_max + 1));
    for (int delta = 0; delta <= y_max; ++delta) {
        for (int progress = 0; progress <= space.dbar_max; ++progress) {
            table.beta[delta * (space.dbar_max + 1) + progress] =
                q_gap(kernel, vf, space.index(delta, progress));
        }
    }
    return table;
}

NetGainTable build_net_gain_table(const SystemConfig& config, const Multipliers& multipliers,
                                  int y_max, const DualOptions& options) {
    if (static_cast<int>(multipliers.mu.size()) != config.num_networks()) {
        throw ConfigError("multipliers have wrong network count");
    }
    const UserLayout layout(config);
    NetGainTable table;
    table.multipliers = multipliers;
    table.y_max = y_max;
    table.users.resize(layout.total);
    parallel_for(layout.total, options.threads, [&](int ord) {
        const auto [i, j] = layout.locate(ord);
        table.users[ord] = solve_user_gain_table(config.user(i, j), config.service(i),
                                                 multipliers.lambda_bar(i), y_max, options);
    });
    return table;
}

UserGainTable escape_resolve(const UserSpec& user, const ServiceDistribution& dist,
                             double lambda_bar, const UserState& state, int y_max_prime) {
    const int largest = std::max(state.delta, std::max(state.progress, 1));
    if (y_max_prime < 2 * largest) {
        throw ConfigError("escape truncation bound must be at least twice the largest state "
                          "coordinate");
    }
    return solve_user_gain_table(user, dist, lambda_bar, y_max_prime);
}

NgmPolicy::NgmPolicy(const SystemConfig& base, std::shared_ptr<NetGainTable> table,
                     int base_networks)
    : base_(base), layout_(base_), table_(std::move(table)), base_networks_(base_networks),
      escape_mutexes_(std::make_unique<std::mutex[]>(layout_.total)) {
    if (table_ == nullptr) {
        throw MissingArtifactError("NGM policy requires a precomputed net-gain table");
    }
    if (static_cast<int>(table_->users.size()) != layout_.total) {
        throw MissingArtifactError("net-gain table does not match the base system layout");
    }
}

double NgmPolicy::priority(int base_network, int base_user, const UserState& state) {
    const int ord = layout_.ordinal(base_network, base_user);
    {
        const UserGainTable& table = table_->users[ord];
        if (state.delta <= table.y_max && state.progress <= table.y_max) {
            return table.at(state.delta, state.progress);
        }
    }
    // Out-of-space state: re-solve at the same multipliers on a doubled
    // space and swap in the enlarged table for this user.
    std::lock_guard<std::mutex> lock(escape_mutexes_[ord]);
    UserGainTable& table = table_->users[ord];
    if (state.delta <= table.y_max && state.progress <= table.y_max) {
        return table.at(state.delta, state.progress); // another thread escaped already
    }
    const int largest = std::max({state.delta, state.progress, table.y_max, 1});
    const UserSpec& user = base_.user(base_network, base_user);
    table = escape_resolve(user, base_.service(base_network),
                           table_->multipliers.lambda_bar(base_network), state, 2 * largest);
    return table.at(state.delta, state.progress);
}

ScheduleDecision NgmPolicy::decide(const SystemConfig& config, const SystemState& state,
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
            candidates.push_back(Candidate{i, j, priority(i % base_networks_, j, s)});
        }
    }
    return select_jobs(candidates, config);
}

namespace {

std::string digest_hex(const SystemConfig& config, const NgmArtifact& artifact) {
    char salt[160];
    std::string h_bar_text;
    for (double hb : artifact.h_bar) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g,", hb);
        h_bar_text += buf;
    }
    std::snprintf(salt, sizeof(salt), "ngm|y_max=%d|iters=%d|h=%.17g|h_bar=%s", artifact.y_max,
                  artifact.iters, artifact.h, h_bar_text.c_str());
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016" PRIx64, config_digest(config, salt));
    return hex;
}

nlohmann::json iterate_to_json(const DualIterate& it) {
    return {{"k", it.k},
            {"lambda", it.lambda},
            {"mu", it.mu},
            {"dual_value", it.dual_value},
            {"total_activation", it.total_activation},
            {"per_network_activation", it.per_network_activation}};
}

} // namespace

void save_ngm_artifact(const std::string& path, const SystemConfig& config,
                       const NgmArtifact& artifact) {
    nlohmann::json j;
    j["format"] = "agesched-ngm";
    j["version"] = 1;
    j["key"] = digest_hex(config, artifact);
    j["y_max"] = artifact.y_max;
    j["iters"] = artifact.iters;
    j["h"] = artifact.h;
    j["h_bar"] = artifact.h_bar;
    j["multipliers"] = {{"lambda", artifact.table.multipliers.lambda},
                        {"mu", artifact.table.multipliers.mu}};
    j["dual_trace"] = nlohmann::json::array();
    for (const auto& it : artifact.dual.trace) {
        j["dual_trace"].push_back(iterate_to_json(it));
    }
    j["tables"] = nlohmann::json::array();
    for (std::size_t ord = 0; ord < artifact.table.users.size(); ++ord) {
        const UserGainTable& t = artifact.table.users[ord];
        j["tables"].push_back({{"ordinal", ord},
                               {"y_max", t.y_max},
                               {"dbar_max", t.dbar_max},
                               {"lambda_bar", t.lambda_bar},
                               {"beta", t.beta}});
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write NGM artifact: " + path);
    }
    out << j.dump() << '\n';
}

NgmArtifact load_ngm_artifact(const std::string& path, const SystemConfig& config) {
    std::ifstream in(path);
    if (!in) {
        throw MissingArtifactError("NGM artifact not found: " + path +
                                   " (run solve-ngm first)");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MissingArtifactError("NGM artifact unreadable: " + path + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "agesched-ngm" ||
            j.at("version").get<int>() != 1) {
            throw MissingArtifactError("NGM artifact has unknown format/version: " + path);
        }
        NgmArtifact artifact;
        artifact.y_max = j.at("y_max").get<int>();
        artifact.iters = j.at("iters").get<int>();
        artifact.h = j.at("h").get<double>();
        artifact.h_bar = j.at("h_bar").get<std::vector<double>>();
        if (j.at("key").get<std::string>() != digest_hex(config, artifact)) {
            throw MissingArtifactError(
                "NGM artifact was built for a different (config, y_max, iters, h): " + path);
        }
        artifact.table.multipliers.lambda = j.at("multipliers").at("lambda").get<double>();
        artifact.table.multipliers.mu =
            j.at("multipliers").at("mu").get<std::vector<double>>();
        artifact.table.y_max = artifact.y_max;
        artifact.dual.multipliers = artifact.table.multipliers;
        for (const auto& ji : j.at("dual_trace")) {
            DualIterate it;
            it.k = ji.at("k").get<int>();
            it.lambda = ji.at("lambda").get<double>();
            it.mu = ji.at("mu").get<std::vector<double>>();
            it.dual_value = ji.at("dual_value").get<double>();
            it.total_activation = ji.at("total_activation").get<double>();
            it.per_network_activation =
                ji.at("per_network_activation").get<std::vector<double>>();
            artifact.dual.trace.push_back(std::move(it));
        }
        artifact.table.users.resize(j.at("tables").size());
        for (const auto& jt : j.at("tables")) {
            UserGainTable t;
            t.y_max = jt.at("y_max").get<int>();
            t.dbar_max = jt.at("dbar_max").get<int>();
            t.lambda_bar = jt.at("lambda_bar").get<double>();
            t.beta = jt.at("beta").get<std::vector<double>>();
            artifact.table.users.at(jt.at("ordinal").get<std::size_t>()) = std::move(t);
        }
        return artifact;
    } catch (const nlohmann::json::exception& e) {
        throw MissingArtifactError("NGM artifact schema error: " + path + ": " + e.what());
    }
}

} // namespace agesched
