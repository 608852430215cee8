#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include <agesched/errors.hpp>
#include <agesched/whittle.hpp>

using namespace agesched;

namespace {

std::uint64_t next_u64(std::uint64_t& s) {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 0x2545f4914f6cdd1dULL;
}

double next_unit(std::uint64_t& s) {
    return static_cast<double>(next_u64(s) >> 11) * 0x1.0p-53;
}

} // namespace

TEST_SUITE("whittle") {

TEST_CASE("closed-form index values") {
    CHECK(whittle_index(1.0, 1.0, 1.0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(whittle_index(2.0, 0.5, 0.5, 3) == doctest::Approx(19.0).epsilon(1e-12));
    CHECK(whittle_index(4.0, 0.1, 0.3, 1) == doctest::Approx(56.0).epsilon(1e-12));
}

TEST_CASE("index grows strictly with age and scales linearly with weight") {
    std::uint64_t s = 0xabcdef;
    for (int trial = 0; trial < 40; ++trial) {
        const double w = 0.2 + 5.0 * next_unit(s);
        const double p = 0.05 + 0.95 * next_unit(s);
        const double q = 0.05 + 0.95 * next_unit(s);
        double prev = -1.0;
        for (int delta = 0; delta <= 100; ++delta) {
            const double index = whittle_index(w, p, q, delta);
            CHECK(index > prev);
            prev = index;
            const double gamma = 1.0 + 4.0 * next_unit(s);
            CHECK(whittle_index(gamma * w, p, q, delta) ==
                  doctest::Approx(gamma * index).epsilon(1e-12));
        }
    }
}

TEST_CASE("wi policy prioritizes by the closed form") {
    SystemConfig config = base_config(BaseKind::Geometric);
    config.server_capacity = 1; // force a head-to-head choice
    const UserLayout layout(config);
    SystemState state = SystemState::initial(config);
    state.users[layout.ordinal(2, 0)] = UserState::occupied(1, 0); // index 56
    state.users[layout.ordinal(0, 0)] = UserState::occupied(1, 0); // index ~10.67

    WiPolicy policy(config);
    const auto decision = policy.decide(config, state, std::vector<std::uint8_t>(9, 0));
    CHECK(decision.served == std::vector<std::pair<int, int>>{{2, 0}});

    // A lone buffered user is served whenever capacity permits.
    SystemState lone = SystemState::initial(config);
    lone.users[layout.ordinal(1, 1)] = UserState::occupied(0, 0);
    CHECK(policy.decide(config, lone, std::vector<std::uint8_t>(9, 0)).served ==
          std::vector<std::pair<int, int>>{{1, 1}});
}

TEST_CASE("wi policy rejects non-geometric service") {
    CHECK_THROWS_AS(WiPolicy(base_config(BaseKind::General)), NotGeometricError);
}

TEST_CASE("weight scaling does not change wi decisions") {
    SystemConfig config = base_config(BaseKind::Geometric);
    const UserLayout layout(config);
    SystemState state = SystemState::initial(config);
    state.users[layout.ordinal(0, 1)] = UserState::occupied(4, 2);
    state.users[layout.ordinal(1, 2)] = UserState::occupied(3, 1);
    state.users[layout.ordinal(2, 1)] = UserState::occupied(6, 0);

    WiPolicy policy(config);
    const auto before = policy.decide(config, state, std::vector<std::uint8_t>(9, 0));
    for (auto& net : config.networks) {
        for (auto& u : net.users) {
            u.w *= 7.5;
        }
    }
    CHECK(policy.decide(config, state, std::vector<std::uint8_t>(9, 0)).served == before.served);
}

TEST_CASE("indexability holds numerically for sample users") {
    const SystemConfig config = base_config(BaseKind::Geometric);
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) {
        grid.push_back(static_cast<double>(k));
    }
    // One user per network keeps this suite quick; the acceptance suite
    // covers all nine on the full grid.
    for (int i = 0; i < 3; ++i) {
        const auto report = verify_indexability(config.user(i, i), config.service(i).q(),
                                                grid, 60);
        CHECK(report.pass);
        CHECK(report.passive_set_sizes.front() == 1); // only the empty state at zero cost
        for (std::size_t g = 1; g < report.passive_set_sizes.size(); ++g) {
            CHECK(report.passive_set_sizes[g] >= report.passive_set_sizes[g - 1]);
        }
    }
}

TEST_CASE("a charge above the top index idles the whole truncated space") {
    const UserSpec user{0.4, 2.0};
    const double q = 0.5;
    const int y_max = 30;
    const std::vector<double> grid = {0.0, whittle_index(user.w, user.p, q, y_max) + 5.0};
    const auto report = verify_indexability(user, q, grid, y_max);
    CHECK(report.pass);
    CHECK(report.passive_set_sizes.back() ==
          static_cast<std::size_t>(StateSpace::natural(ServiceDistribution::geometric(q), y_max)
                                       .size()));
}

TEST_CASE("phi is non-negative at zero activation cost") {
    const UserSpec user{0.4, 1.0};
    const auto pmf = ServiceDistribution::finite_pmf({0.2, 0.3, 0.5});
    CHECK(phi(user, pmf, UserState::occupied(3, 1), 0.0, 40) >= -1e-9);
    const auto geo = ServiceDistribution::geometric(0.3);
    CHECK(phi(user, geo, UserState::occupied(0, 0), 0.0, 40) >= -1e-9);
}

TEST_CASE("phi crosses zero at the closed-form index") {
    const UserSpec user{0.5, 2.0};
    const auto geo = ServiceDistribution::geometric(0.5);
    for (int delta : {0, 2, 5}) {
        const double index = whittle_index(user.w, user.p, 0.5, delta);
        const double gap = phi(user, geo, UserState::occupied(delta, 0), index, 200);
        CHECK(std::abs(gap) <= 0.02 * std::max(1.0, index));
    }
}

TEST_CASE("phi is midpoint-concave on sampled probes") {
    const UserSpec user{0.4, 3.0};
    const auto pmf = ServiceDistribution::finite_pmf({0.1, 0.5, 0.3, 0.1});
    std::uint64_t s = 0x5eed;
    for (int probe = 0; probe < 6; ++probe) {
        const int delta = static_cast<int>(next_u64(s) % 10);
        const int progress = std::min(delta, static_cast<int>(next_u64(s) % 4));
        const UserState state = UserState::occupied(delta, progress);
        const double a = 10.0 * next_unit(s);
        const double b = a + 10.0 * next_unit(s);
        const double phi_a = phi(user, pmf, state, a, 50);
        const double phi_b = phi(user, pmf, state, b, 50);
        const double phi_mid = phi(user, pmf, state, 0.5 * (a + b), 50);
        CHECK(phi_mid >= 0.5 * (phi_a + phi_b) - 1e-6);
    }
}

TEST_CASE("wimwf bisection reproduces the geometric closed form") {
    const UserSpec user{0.5, 2.0};
    const auto geo = ServiceDistribution::geometric(0.5);
    const auto result = wimwf_index(user, geo, UserState::occupied(3, 0), 200);
    CHECK(result.tag == IndexTag::BisectionRoot);
    CHECK(result.index == doctest::Approx(19.0).epsilon(0.02));
}

TEST_CASE("wimwf falls back to the drift weight when bracketing is disabled") {
    const UserSpec user{0.5, 1.0};
    const auto pmf = ServiceDistribution::finite_pmf({0.2, 0.3, 0.5});
    const auto result = wimwf_index(user, pmf, UserState::occupied(4, 2), 30, 1e-6, 0);
    CHECK(result.tag == IndexTag::Fallback);
    CHECK(result.index == 5.0); // w * (delta + 1) * hazard(2) with hazard exactly 1
}

TEST_CASE("wimwf cache memoizes and handles out-of-space states") {
    WimwfIndexCache cache(base_config(BaseKind::General), 20);
    const UserState inside = UserState::occupied(4, 1);
    const auto first = cache.lookup(1, 2, inside);
    const auto second = cache.lookup(1, 2, inside);
    CHECK(first.index == second.index);
    CHECK(first.tag == second.tag);

    const UserState outside = UserState::occupied(25, 2);
    const auto escape = cache.lookup(1, 2, outside);
    CHECK(escape.tag == IndexTag::Fallback);
    const auto& dist = base_config(BaseKind::General).service(1);
    CHECK(escape.index == 3.0 * 26 * dist.hazard(2));
}

TEST_CASE("wimwf policy is deterministic and maps replicas onto base users") {
    const SystemConfig base = base_config(BaseKind::General);
    auto cache = std::make_shared<WimwfIndexCache>(base, 25);
    WimwfPolicy policy(cache, base.num_networks());

    SystemConfig scaled;
    scaled.server_capacity = 2 * base.server_capacity;
    for (int copy = 0; copy < 2; ++copy) {
        for (const auto& net : base.networks) {
            scaled.networks.push_back(net);
        }
    }
    const UserLayout layout(scaled);
    SystemState state = SystemState::initial(scaled);
    state.users[layout.ordinal(0, 0)] = UserState::occupied(5, 2);
    state.users[layout.ordinal(3, 0)] = UserState::occupied(5, 2); // same base user, copy 2
    state.users[layout.ordinal(2, 1)] = UserState::occupied(2, 0);

    const auto a = policy.decide(scaled, state, std::vector<std::uint8_t>(layout.total, 0));
    const auto b = policy.decide(scaled, state, std::vector<std::uint8_t>(layout.total, 0));
    CHECK(a.served == b.served);
    // Identical replicas tie on priority; the deterministic tie-break keeps
    // the lower network index.
    CHECK(cache->lookup(0, 0, UserState::occupied(5, 2)).index ==
          cache->lookup(0, 0, UserState::occupied(5, 2)).index);
}

} // TEST_SUITE
