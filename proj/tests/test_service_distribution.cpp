#include <doctest.h>

#include <cstdint>
#include <vector>

#include <agesched/errors.hpp>
#include <agesched/service_distribution.hpp>

using agesched::ServiceDistribution;

namespace {

// Deterministic little generator for property tests.
std::uint64_t next_u64(std::uint64_t& s) {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 0x2545f4914f6cdd1dULL;
}

double next_unit(std::uint64_t& s) {
    return static_cast<double>(next_u64(s) >> 11) * 0x1.0p-53;
}

ServiceDistribution random_pmf(std::uint64_t& s, int max_support) {
    const int k = 1 + static_cast<int>(next_u64(s) % max_support);
    std::vector<double> raw(k);
    double total = 0.0;
    for (double& x : raw) {
        x = 0.05 + next_unit(s);
        total += x;
    }
    for (double& x : raw) {
        x /= total;
    }
    return ServiceDistribution::finite_pmf(raw);
}

} // namespace

TEST_SUITE("service_distribution") {

TEST_CASE("tail_sum on a finite pmf") {
    const auto d = ServiceDistribution::finite_pmf({0.2, 0.3, 0.5});
    CHECK(d.tail_sum(1) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(d.tail_sum(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.tail_sum(3) == 0.0);
    CHECK(d.tail_sum(7) == 0.0);
}

TEST_CASE("tail_sum for geometric service") {
    const auto d = ServiceDistribution::geometric(0.7);
    CHECK(d.tail_sum(0) == 1.0);
    CHECK(d.tail_sum(2) == doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("hazard on a finite pmf") {
    const auto d = ServiceDistribution::finite_pmf({0.2, 0.3, 0.5});
    CHECK(d.hazard(1) == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(d.hazard(2) == 1.0); // forced completion at the end of the support
    CHECK_THROWS_AS(d.hazard(3), agesched::ZeroTailError);
}

TEST_CASE("hazard is memoryless for geometric service") {
    const auto d = ServiceDistribution::geometric(0.3);
    for (int x = 0; x <= 100; ++x) {
        CHECK(d.hazard(x) == 0.3);
    }
}

TEST_CASE("alpha examples") {
    const auto pmf = ServiceDistribution::finite_pmf({0.2, 0.3, 0.5});
    CHECK(pmf.alpha(1) == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(pmf.alpha(2) == 0.0);
    const auto geo = ServiceDistribution::geometric(0.5);
    CHECK(geo.alpha(0) == 0.5);
    CHECK(geo.alpha(17) == 0.5);
}

TEST_CASE("alpha + hazard is exactly one and tails decrease") {
    std::uint64_t s = 0x12345;
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = trial % 2 == 0 ? random_pmf(s, 8)
                                      : ServiceDistribution::geometric(0.05 + 0.9 * next_unit(s));
        const int upper = d.is_geometric() ? 40 : d.k_max() - 1;
        double prev_tail = d.tail_sum(0);
        CHECK(prev_tail == doctest::Approx(1.0).epsilon(1e-12));
        for (int x = 0; x <= upper; ++x) {
            CHECK(d.hazard(x) + d.alpha(x) == doctest::Approx(1.0).epsilon(1e-12));
            const double tail = d.tail_sum(x);
            CHECK(tail <= prev_tail + 1e-15);
            prev_tail = tail;
        }
        if (!d.is_geometric()) {
            CHECK(d.hazard(d.k_max() - 1) == 1.0);
        }
    }
}

TEST_CASE("geometric q=1 completes in one served slot") {
    const auto d = ServiceDistribution::geometric(1.0);
    CHECK(d.hazard(0) == 1.0);
    CHECK(d.tail_sum(1) == 0.0);
    CHECK_THROWS_AS(d.hazard(1), agesched::ZeroTailError);
}

TEST_CASE("construction rejects invalid inputs") {
    CHECK_THROWS_AS(ServiceDistribution::finite_pmf({}), agesched::ConfigError);
    CHECK_THROWS_AS(ServiceDistribution::finite_pmf({0.5, 0.4}), agesched::ConfigError);
    CHECK_THROWS_AS(ServiceDistribution::finite_pmf({-0.1, 1.1}), agesched::ConfigError);
    CHECK_THROWS_AS(ServiceDistribution::geometric(0.0), agesched::ConfigError);
    CHECK_THROWS_AS(ServiceDistribution::geometric(1.5), agesched::ConfigError);
}

} // TEST_SUITE
