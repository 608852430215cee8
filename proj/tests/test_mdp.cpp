#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include <agesched/errors.hpp>
#include <agesched/mdp.hpp>
#include <agesched/simulator.hpp>

using namespace agesched;

namespace {

double row_probability(const Kernel& kernel, int state, int action, const UserState& to) {
    const auto row = kernel.successors(state, action);
    const int target = kernel.space().index_of(to);
    for (int k = 0; k < row.count; ++k) {
        if (row.entries[k].state == target) {
            return row.entries[k].prob;
        }
    }
    return 0.0;
}

SystemConfig single_user(double p, double w, ServiceDistribution dist) {
    SystemConfig config;
    config.server_capacity = 1;
    NetworkSpec net;
    net.capacity = 1;
    net.service = std::move(dist);
    net.users.push_back(UserSpec{p, w});
    config.networks.push_back(std::move(net));
    return config;
}

// Simulator-side adapter for a solved single-user policy (saturated lookup).
class TablePolicy final : public Policy {
public:
    TablePolicy(StateSpace space, std::vector<int> actions)
        : space_(space), actions_(std::move(actions)) {}
    std::string name() const override { return "mdp-table"; }
    ScheduleDecision decide(const SystemConfig&, const SystemState& state,
                            const std::vector<std::uint8_t>&) override {
        ScheduleDecision decision;
        const UserState& s = state.users[0];
        if (!s.empty()) {
            const int delta = std::min(s.delta, space_.y_max);
            const int progress = std::min(s.progress, space_.dbar_max);
            if (actions_[space_.index(delta, progress)] == 1) {
                decision.served.emplace_back(0, 0);
            }
        }
        return decision;
    }

private:
    StateSpace space_;
    std::vector<int> actions_;
};

} // namespace

TEST_SUITE("mdp") {

TEST_CASE("state space enumeration is deterministic with one empty state") {
    const StateSpace space = StateSpace::square(3);
    CHECK(space.size() == 17);
    CHECK(space.state_of(StateSpace::kEmpty).empty());
    int empties = 0;
    for (int s = 0; s < space.size(); ++s) {
        if (space.state_of(s).empty()) {
            ++empties;
        }
        CHECK(space.index_of(space.state_of(s)) == s);
    }
    CHECK(empties == 1);
}

TEST_CASE("natural spaces shrink the progress axis") {
    CHECK(StateSpace::natural(ServiceDistribution::geometric(0.5), 100).dbar_max == 0);
    CHECK(StateSpace::natural(ServiceDistribution::finite_pmf({0.2, 0.3, 0.5}), 100).dbar_max ==
          2);
    CHECK(StateSpace::natural(ServiceDistribution::finite_pmf({1.0}), 100).dbar_max == 0);
}

TEST_CASE("kernel rows match the transition law") {
    const UserSpec user{0.4, 1.0};
    const auto dist = ServiceDistribution::finite_pmf({0.2, 0.3, 0.5});
    const Kernel kernel = build_kernel(user, dist, 0.0, 6);

    SUBCASE("empty state stays or fills") {
        CHECK(row_probability(kernel, StateSpace::kEmpty, 0, UserState::empty_buffer()) ==
              doctest::Approx(0.6).epsilon(1e-12));
        CHECK(row_probability(kernel, StateSpace::kEmpty, 0, UserState::occupied(0, 0)) ==
              doctest::Approx(0.4).epsilon(1e-12));
        CHECK_THROWS(kernel.successors(StateSpace::kEmpty, 1));
    }
    SUBCASE("passive action ages deterministically") {
        const int s = kernel.space().index(3, 1);
        CHECK(row_probability(kernel, s, 0, UserState::occupied(4, 1)) == 1.0);
    }
    SUBCASE("serve action splits on hazard and refill") {
        const UserSpec half{0.5, 1.0};
        const Kernel k2 = build_kernel(half, dist, 0.0, 6);
        const int s = k2.space().index(3, 1);
        CHECK(row_probability(k2, s, 1, UserState::occupied(0, 0)) ==
              doctest::Approx(0.1875).epsilon(1e-12));
        CHECK(row_probability(k2, s, 1, UserState::empty_buffer()) ==
              doctest::Approx(0.1875).epsilon(1e-12));
        CHECK(row_probability(k2, s, 1, UserState::occupied(4, 2)) ==
              doctest::Approx(0.625).epsilon(1e-12));
    }
}

TEST_CASE("kernel rows are stochastic, including saturated ones") {
    const std::vector<ServiceDistribution> dists = {
        ServiceDistribution::finite_pmf({0.1, 0.2, 0.1, 0.1, 0.4, 0.1}),
        ServiceDistribution::geometric(0.3),
        ServiceDistribution::geometric(1.0),
        ServiceDistribution::finite_pmf({1.0}),
    };
    for (const auto& dist : dists) {
        for (const StateSpace space : {StateSpace::square(8), StateSpace::natural(dist, 8)}) {
            const Kernel kernel(0.35, 2.0, dist, 1.25, space);
            for (int s = 0; s < space.size(); ++s) {
                for (int a = 0; a <= (s == StateSpace::kEmpty ? 0 : 1); ++a) {
                    const auto row = kernel.successors(s, a);
                    double total = 0.0;
                    for (int k = 0; k < row.count; ++k) {
                        CHECK(row.entries[k].prob > 0.0);
                        total += row.entries[k].prob;
                    }
                    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("square pmf kernels guard exhausted-support rows") {
    const auto dist = ServiceDistribution::finite_pmf({0.2, 0.8});
    const Kernel square(0.5, 1.0, dist, 0.0, StateSpace::square(5));
    CHECK(square.hazard_guard_active());
    CHECK(square.hazard_at(4) == 1.0);
    const Kernel natural(0.5, 1.0, dist, 0.0, StateSpace::natural(dist, 5));
    CHECK_FALSE(natural.hazard_guard_active());
}

TEST_CASE("free activation makes serving optimal everywhere") {
    const UserSpec user{0.6, 2.0};
    for (const auto& dist : {ServiceDistribution::finite_pmf({0.2, 0.3, 0.5}),
                             ServiceDistribution::geometric(0.5)}) {
        const Kernel kernel(user.p, user.w, dist, 0.0, StateSpace::natural(dist, 30));
        const ValueFunction vf = rvi_solve(kernel);
        for (int s = 1; s < kernel.space().size(); ++s) {
            CHECK(greedy_action(kernel, vf, s) == 1);
            CHECK(q_gap(kernel, vf, s) >= -1e-9);
        }
        CHECK(greedy_action(kernel, vf, StateSpace::kEmpty) == 0);
    }
}

TEST_CASE("deterministic saturated instance has known gains") {
    const UserSpec user{1.0, 1.0};
    const auto dist = ServiceDistribution::geometric(1.0);
    SUBCASE("free activation: zero average cost") {
        const Kernel kernel(user.p, user.w, dist, 0.0, StateSpace::natural(dist, 20));
        CHECK(rvi_solve(kernel).gain == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("activation charge is paid every slot") {
        const Kernel kernel(user.p, user.w, dist, 0.5, StateSpace::natural(dist, 20));
        CHECK(rvi_solve(kernel).gain == doctest::Approx(0.5).epsilon(1e-8));
    }
}

TEST_CASE("greedy actions at extreme activation costs") {
    const UserSpec user{0.5, 1.0};
    const auto dist = ServiceDistribution::geometric(0.5);
    SUBCASE("free activation serves an aged job") {
        const Kernel kernel(user.p, user.w, dist, 0.0, StateSpace::natural(dist, 60));
        const ValueFunction vf = rvi_solve(kernel);
        CHECK(greedy_action(kernel, vf, kernel.space().index(5, 0)) == 1);
    }
    SUBCASE("an exorbitant charge idles a young job") {
        const Kernel kernel(user.p, user.w, dist, 1e6, StateSpace::natural(dist, 60));
        const ValueFunction vf = rvi_solve(kernel);
        CHECK(greedy_action(kernel, vf, kernel.space().index(1, 0)) == 0);
        CHECK(q_gap(kernel, vf, kernel.space().index(1, 0)) < 0.0);
    }
}

TEST_CASE("gain is insensitive to the reference state") {
    const UserSpec user{0.4, 2.0};
    const auto dist = ServiceDistribution::finite_pmf({0.2, 0.3, 0.5});
    const StateSpace space = StateSpace::natural(dist, 40);
    const Kernel kernel(user.p, user.w, dist, 1.0, space);
    RviOptions options;
    options.ref_state = space.index(0, 0);
    const double g1 = rvi_solve(kernel, options).gain;
    options.ref_state = StateSpace::kEmpty;
    const double g2 = rvi_solve(kernel, options).gain;
    options.ref_state = space.index(7, 2);
    const double g3 = rvi_solve(kernel, options).gain;
    CHECK(g1 == doctest::Approx(g2).epsilon(1e-8));
    CHECK(g1 == doctest::Approx(g3).epsilon(1e-8));
}

TEST_CASE("geometric greedy actions do not depend on progress") {
    const UserSpec user{0.3, 2.0};
    const auto dist = ServiceDistribution::geometric(0.5);
    const int y_max = 30;
    const Kernel square(user.p, user.w, dist, 8.0, StateSpace::square(y_max));
    const ValueFunction vf = rvi_solve(square);
    for (int delta = 0; delta <= y_max; ++delta) {
        const int reference = greedy_action(square, vf, square.space().index(delta, 0));
        for (int progress = 0; progress <= y_max - 1; ++progress) {
            CHECK(greedy_action(square, vf, square.space().index(delta, progress)) == reference);
        }
    }
}

TEST_CASE("reduced spaces reproduce square-space values at valid states") {
    SUBCASE("geometric lumping is exact") {
        const UserSpec user{0.3, 2.0};
        const auto dist = ServiceDistribution::geometric(0.5);
        const Kernel square(user.p, user.w, dist, 3.0, StateSpace::square(25));
        const Kernel lumped(user.p, user.w, dist, 3.0, StateSpace::natural(dist, 25));
        const ValueFunction vs = rvi_solve(square);
        const ValueFunction vl = rvi_solve(lumped);
        CHECK(vs.gain == doctest::Approx(vl.gain).epsilon(1e-10));
        for (int delta = 0; delta <= 25; ++delta) {
            for (int progress = 0; progress <= 25; ++progress) {
                CHECK(vs.value[square.space().index(delta, progress)] ==
                      doctest::Approx(vl.value[lumped.space().index(delta, 0)])
                          .epsilon(1e-9));
            }
        }
        CHECK(vl.value[StateSpace::kEmpty] ==
              doctest::Approx(vs.value[StateSpace::kEmpty]).epsilon(1e-9));
    }
    SUBCASE("pmf support sub-grid is closed") {
        const UserSpec user{0.45, 1.5};
        const auto dist = ServiceDistribution::finite_pmf({0.2, 0.3, 0.5});
        const Kernel square(user.p, user.w, dist, 2.0, StateSpace::square(20));
        const Kernel natural(user.p, user.w, dist, 2.0, StateSpace::natural(dist, 20));
        const ValueFunction vs = rvi_solve(square);
        const ValueFunction vn = rvi_solve(natural);
        CHECK(vs.gain == doctest::Approx(vn.gain).epsilon(1e-10));
        for (int delta = 0; delta <= 20; ++delta) {
            for (int progress = 0; progress <= 2; ++progress) {
                CHECK(vs.value[square.space().index(delta, progress)] ==
                      doctest::Approx(vn.value[natural.space().index(delta, progress)])
                          .epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("activation frequency of simple policies") {
    const auto dist = ServiceDistribution::geometric(1.0);
    const UserSpec user{1.0, 1.0};
    const Kernel kernel(user.p, user.w, dist, 0.0, StateSpace::natural(dist, 10));
    const int n = kernel.space().size();

    std::vector<int> always(n, 1);
    always[StateSpace::kEmpty] = 0;
    CHECK(activation_frequency(kernel, always) == doctest::Approx(1.0).epsilon(1e-9));

    const std::vector<int> never(n, 0);
    CHECK(activation_frequency(kernel, never) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("activation frequency matches a long simulation") {
    const UserSpec user{0.5, 1.0};
    const auto dist = ServiceDistribution::geometric(0.5);
    const StateSpace space = StateSpace::natural(dist, 400);
    const Kernel kernel(user.p, user.w, dist, 0.0, space);
    std::vector<int> serve_when_job(space.size(), 1);
    serve_when_job[StateSpace::kEmpty] = 0;
    const double frequency = activation_frequency(kernel, serve_when_job);

    const auto config = single_user(user.p, user.w, dist);
    ServeAllPolicy policy;
    const auto metrics = run(config, policy, 1000000, 31);
    CHECK(metrics.per_user_activation_frequency[0] ==
          doctest::Approx(frequency).epsilon(0.01));
}

TEST_CASE("monotone activation in the activation charge") {
    const UserSpec user{0.4, 3.0};
    const auto dist = ServiceDistribution::geometric(0.5);
    const StateSpace space = StateSpace::natural(dist, 100);
    double prev = 1.0;
    for (double lambda_bar = 0.0; lambda_bar <= 50.0; lambda_bar += 0.5) {
        const Kernel kernel(user.p, user.w, dist, lambda_bar, space);
        const ValueFunction vf = rvi_solve(kernel);
        const double freq = activation_frequency(kernel, extract_policy(kernel, vf));
        CHECK(freq <= prev + 1e-8);
        prev = freq;
    }
}

TEST_CASE("solver gain matches a simulation of the extracted policy") {
    const UserSpec user{0.4, 2.0};
    const auto dist = ServiceDistribution::finite_pmf({0.2, 0.3, 0.5});
    const double lambda_bar = 1.5;
    const StateSpace space = StateSpace::natural(dist, 300);
    const Kernel kernel(user.p, user.w, dist, lambda_bar, space);
    const ValueFunction vf = rvi_solve(kernel);
    const std::vector<int> policy_table = extract_policy(kernel, vf);

    const auto config = single_user(user.p, user.w, dist);
    TablePolicy policy(space, policy_table);
    const auto metrics = run(config, policy, 1000000, 8);
    const double simulated_cost =
        metrics.avg_weighted_age + lambda_bar * metrics.per_user_activation_frequency[0];
    CHECK(simulated_cost == doctest::Approx(vf.gain).epsilon(0.01));
}

TEST_CASE("non-convergence surfaces as an error") {
    const UserSpec user{0.5, 1.0};
    const auto dist = ServiceDistribution::geometric(0.5);
    const Kernel kernel(user.p, user.w, dist, 0.0, StateSpace::natural(dist, 50));
    RviOptions options;
    options.max_iters = 3;
    CHECK_THROWS_AS(rvi_solve(kernel, options), NoConvergenceError);
}

} // TEST_SUITE
