#pragma once

#include <string>
#include <vector>

#include "agesched/service_distribution.hpp"

namespace agesched {

/// One user slot: per-slot arrival probability and age weight.
struct UserSpec {
    double p = 0.0;
    double w = 0.0;

    bool operator==(const UserSpec&) const = default;
};

/// One task-specific machine network: its users, concurrent-job capacity and
/// service-time law.
struct NetworkSpec {
    std::vector<UserSpec> users;
    int capacity = 1;
    ServiceDistribution service;

    bool operator==(const NetworkSpec&) const = default;
};

/// Full instance description: networks plus the central server's capacity.
struct SystemConfig {
    std::vector<NetworkSpec> networks;
    int server_capacity = 1;

    int num_networks() const { return static_cast<int>(networks.size()); }
    int users_in(int network) const {
        return static_cast<int>(networks[network].users.size());
    }
    int total_users() const;

    const UserSpec& user(int network, int j) const { return networks[network].users[j]; }
    const ServiceDistribution& service(int network) const { return networks[network].service; }

    bool operator==(const SystemConfig&) const = default;
};

/// Flat user indexing shared by the simulator, metrics and draw streams.
/// Ordinals run over networks in order, users within each network in order.
struct UserLayout {
    explicit UserLayout(const SystemConfig& config);
    int ordinal(int network, int j) const { return offsets[network] + j; }
    std::pair<int, int> locate(int ordinal) const;
    int total = 0;
    std::vector<int> offsets;
};

/// Checks hard invariants (throws ConfigError) and returns advisory warnings
/// for soft ones, e.g. the non-triviality capacity assumption
/// sum_i cap_i > server_capacity > cap_i, which the simulator tolerates.
std::vector<std::string> validate_config(const SystemConfig& config);

enum class BaseKind { General, Geometric };

/// The bundled 3-network, 9-user reference instance used throughout the
/// experiment harness, in its general-service and geometric-service variants.
SystemConfig base_config(BaseKind kind);

SystemConfig load_config(const std::string& path);
void save_config(const SystemConfig& config, const std::string& path);
SystemConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const SystemConfig& config);

/// Stable content digest of (config, salt); keys precomputed artifacts.
std::uint64_t config_digest(const SystemConfig& config, const std::string& salt = "");

} // namespace agesched
