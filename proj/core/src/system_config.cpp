#include "agesched/system_config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "agesched/errors.hpp"

namespace agesched {

int SystemConfig::total_users() const {
    int n = 0;
    for (const auto& net : networks) {
        n += static_cast<int>(net.users.size());
    }
    return n;
}

UserLayout::UserLayout(const SystemConfig& config) {
    offsets.reserve(config.networks.size());
    for (const auto& net : config.networks) {
        offsets.push_back(total);
        total += static_cast<int>(net.users.size());
    }
}

std::pair<int, int> UserLayout::locate(int ordinal) const {
    int network = static_cast<int>(offsets.size()) - 1;
    while (network > 0 && offsets[network] > ordinal) {
        --network;
    }
    return {network, ordinal - offsets[network]};
}

std::vector<std::string> validate_config(const SystemConfig& config) {
    if (config.networks.empty()) {
        throw ConfigError("config must define at least one network");
    }
    if (config.server_capacity < 1) {
        throw ConfigError("server_capacity must be >= 1");
    }
    for (int i = 0; i < config.num_networks(); ++i) {
        const auto& net = config.networks[i];
        const std::string where = "network " + std::to_string(i + 1);
        if (net.users.empty()) {
            throw ConfigError(where + ": must have at least one user");
        }
        if (net.capacity < 1) {
            throw ConfigError(where + ": capacity must be >= 1");
        }
        for (int j = 0; j < static_cast<int>(net.users.size()); ++j) {
            const auto& u = net.users[j];
            if (!(u.p > 0.0) || u.p > 1.0) {
                throw ConfigError(where + ", user " + std::to_string(j + 1) +
                                  ": arrival probability must be in (0, 1]");
            }
            if (!(u.w > 0.0)) {
                throw ConfigError(where + ", user " + std::to_string(j + 1) +
                                  ": weight must be > 0");
            }
        }
    }

    std::vector<std::string> warnings;
    int cap_sum = 0;
    bool server_dominates = true;
    for (const auto& net : config.networks) {
        cap_sum += net.capacity;
        if (config.server_capacity <= net.capacity) {
            server_dominates = false;
        }
    }
    if (cap_sum <= config.server_capacity || !server_dominates) {
        warnings.push_back(
            "non-triviality assumption does not hold (want sum_i cap_i > server_capacity "
            "and server_capacity > cap_i for every network); simulation remains well-defined");
    }
    return warnings;
}

SystemConfig base_config(BaseKind kind) {
    const double p[3][3] = {{0.3, 0.4, 0.5}, {0.4, 0.2, 0.6}, {0.1, 0.3, 0.2}};
    const double w[3][3] = {{2, 3, 1}, {1, 2, 3}, {4, 1, 2}};
    const std::vector<std::vector<double>> f = {
        {0.1, 0.2, 0.1, 0.1, 0.4, 0.1},
        {0.2, 0.3, 0.5},
        {0.1, 0.5, 0.3, 0.1},
    };
    const double q[3] = {0.3, 0.5, 0.7};

    SystemConfig config;
    config.server_capacity = 2;
    for (int i = 0; i < 3; ++i) {
        NetworkSpec net;
        net.capacity = 2;
        net.service = kind == BaseKind::General ? ServiceDistribution::finite_pmf(f[i])
                                                : ServiceDistribution::geometric(q[i]);
        for (int j = 0; j < 3; ++j) {
            net.users.push_back(UserSpec{p[i][j], w[i][j]});
        }
        config.networks.push_back(std::move(net));
    }
    return config;
}

namespace {

nlohmann::json service_to_json(const ServiceDistribution& service) {
    if (service.is_geometric()) {
        return {{"type", "geometric"}, {"q", service.q()}};
    }
    return {{"type", "pmf"}, {"probs", service.probs()}};
}

ServiceDistribution service_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "geometric") {
        return ServiceDistribution::geometric(j.at("q").get<double>());
    }
    if (type == "pmf") {
        return ServiceDistribution::finite_pmf(j.at("probs").get<std::vector<double>>());
    }
    throw ConfigError("unknown service type '" + type + "' (expected \"pmf\" or \"geometric\")");
}

} // namespace

std::string config_to_json_text(const SystemConfig& config) {
    nlohmann::json j;
    j["server_capacity"] = config.server_capacity;
    j["networks"] = nlohmann::json::array();
    for (const auto& net : config.networks) {
        nlohmann::json jn;
        jn["capacity"] = net.capacity;
        jn["service"] = service_to_json(net.service);
        jn["users"] = nlohmann::json::array();
        for (const auto& u : net.users) {
            jn["users"].push_back({{"p", u.p}, {"w", u.w}});
        }
        j["networks"].push_back(std::move(jn));
    }
    return j.dump(2) + "\n";
}

SystemConfig config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        SystemConfig config;
        config.server_capacity = j.at("server_capacity").get<int>();
        for (const auto& jn : j.at("networks")) {
            NetworkSpec net;
            net.capacity = jn.at("capacity").get<int>();
            net.service = service_from_json(jn.at("service"));
            for (const auto& ju : jn.at("users")) {
                net.users.push_back(UserSpec{ju.at("p").get<double>(), ju.at("w").get<double>()});
            }
            config.networks.push_back(std::move(net));
        }
        validate_config(config);
        return config;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config schema error: ") + e.what());
    }
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str());
}

void save_config(const SystemConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write config file: " + path);
    }
    out << config_to_json_text(config);
}

std::uint64_t config_digest(const SystemConfig& config, const std::string& salt) {
    // FNV-1a over the canonical JSON text plus salt.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto absorb = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    absorb(config_to_json_text(config));
    absorb(salt);
    return h;
}

} // namespace agesched
