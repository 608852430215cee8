#pragma once

#include <array>
#include <vector>

#include "agesched/service_distribution.hpp"
#include "agesched/state.hpp"
#include "agesched/system_config.hpp"

namespace agesched {

/// Truncated single-user state space: {(delta, progress) in
/// [0, y_max] x [0, dbar_max]} plus the empty-buffer state at index 0.
/// Enumeration order is deterministic (empty first, then row-major by delta).
///
/// The square space (dbar_max == y_max) is the reference semantics. The
/// `natural` factory shrinks the progress axis without changing any value a
/// valid state can see: a finite pmf cannot be processed past k_max - 1
/// without completing (the sub-grid is closed), and geometric hazards do not
/// depend on progress at all, so progress lumps to a single row.
struct StateSpace {
    int y_max = 1;
    int dbar_max = 1;

    static constexpr int kEmpty = 0;

    static StateSpace square(int y_max) { return StateSpace{y_max, y_max}; }
    static StateSpace natural(const ServiceDistribution& dist, int y_max);

    int size() const { return (y_max + 1) * (dbar_max + 1) + 1; }
    bool contains(int delta, int progress) const {
        return delta >= 0 && delta <= y_max && progress >= 0 && progress <= dbar_max;
    }
    int index(int delta, int progress) const {
        return 1 + delta * (dbar_max + 1) + progress;
    }
    int index_of(const UserState& s) const {
        return s.empty() ? kEmpty : index(s.delta, s.progress);
    }
    UserState state_of(int index) const;

    bool operator==(const StateSpace&) const = default;
};

/// Transition kernel and stage costs of the per-user average-cost MDP with
/// activation charge lambda_bar. Rows are generated on the fly from
/// (p, hazard); at most three successors per (state, action).
class Kernel {
public:
    Kernel(double p, double w, const ServiceDistribution& dist, double lambda_bar,
           StateSpace space);

    const StateSpace& space() const { return space_; }
    double p() const { return p_; }
    double w() const { return w_; }
    double lambda_bar() const { return lambda_bar_; }

    /// Hazard at a progress row, saturated to 1 where the service support is
    /// exhausted (reachable only through states valid dynamics never visit).
    double hazard_at(int progress) const { return hazard_[progress]; }
    bool hazard_guard_active() const { return hazard_guarded_; }

    bool action_valid(int state, int action) const {
        return action == 0 || (action == 1 && state != StateSpace::kEmpty);
    }

    /// w * delta + lambda_bar * action.
    double cost(int state, int action) const;

    struct Successor {
        int state;
        double prob;
    };
    struct Row {
        std::array<Successor, 3> entries;
        int count = 0;
    };
    /// Non-zero successors of (state, action). Throws on the invalid
    /// (empty, serve) pair.
    Row successors(int state, int action) const;

private:
    StateSpace space_;
    double p_;
    double w_;
    double lambda_bar_;
    std::vector<double> hazard_;
    bool hazard_guarded_ = false;
};

/// Square-space kernel, the reference construction.
Kernel build_kernel(const UserSpec& user, const ServiceDistribution& dist, double lambda_bar,
                    int y_max);
/// Kernel over an explicit (possibly reduced) space.
Kernel build_kernel(const UserSpec& user, const ServiceDistribution& dist, double lambda_bar,
                    StateSpace space);

struct ValueFunction {
    std::vector<double> value; // relative values, value[ref_state] == 0
    double gain = 0.0;         // long-run average cost
    int ref_state = 0;
    int iterations = 0;
    double final_span = 0.0;
};

struct RviOptions {
    double tol = 1e-9;
    int max_iters = 100000;
    int ref_state = -1;                          // default: (0, 0)
    const std::vector<double>* warm_start = nullptr; // raw iterate to resume from
};

/// Relative value iteration from V = 0 until the span seminorm of successive
/// differences drops below tol. Throws NoConvergenceError past max_iters.
ValueFunction rvi_solve(const Kernel& kernel, const RviOptions& options = {});

/// Q(s, a) under converged relative values.
double q_value(const Kernel& kernel, const ValueFunction& values, int state, int action);

/// Q(s, 0) - Q(s, 1); positive means serving is preferred.
double q_gap(const Kernel& kernel, const ValueFunction& values, int state);

/// argmin_a Q(s, a); ties go to the passive action.
int greedy_action(const Kernel& kernel, const ValueFunction& values, int state);

/// Greedy action for every state in enumeration order.
std::vector<int> extract_policy(const Kernel& kernel, const ValueFunction& values);

struct EvalOptions {
    double tol = 1e-9;
    int max_iters = 100000;
    int ref_state = -1;
    const std::vector<double>* warm_start = nullptr;
};

/// Long-run expected activation rate of a fixed stationary policy, computed
/// by policy-evaluation RVI with indicator cost 1{action == 1}.
double activation_frequency(const Kernel& kernel, const std::vector<int>& policy,
                            const EvalOptions& options = {});

/// activation_frequency variant that also exposes the evaluation iterate for
/// warm-starting consecutive solves.
double activation_frequency(const Kernel& kernel, const std::vector<int>& policy,
                            const EvalOptions& options, std::vector<double>* iterate_out);

/// Raw (unnormalized) solver iterate for warm starts.
ValueFunction rvi_solve(const Kernel& kernel, const RviOptions& options,
                        std::vector<double>* iterate_out);

} // namespace agesched
