#include "agesched/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "agesched/errors.hpp"

namespace agesched {

StateSpace StateSpace::natural(const ServiceDistribution& dist, int y_max) {
    if (dist.is_geometric()) {
        return StateSpace{y_max, 0};
    }
    return StateSpace{y_max, std::min(y_max, dist.k_max() - 1)};
}

UserState StateSpace::state_of(int index) const {
    if (index == kEmpty) {
        return UserState::empty_buffer();
    }
    const int flat = index - 1;
    return UserState::occupied(flat / (dbar_max + 1), flat % (dbar_max + 1));
}

Kernel::Kernel(double p, double w, const ServiceDistribution& dist, double lambda_bar,
               StateSpace space)
    : space_(space), p_(p), w_(w), lambda_bar_(lambda_bar) {
    if (space_.y_max < 1) {
        throw ConfigError("kernel truncation y_max must be >= 1");
    }
    if (!(p > 0.0) || p > 1.0) {
        throw ConfigError("kernel arrival probability must be in (0, 1]");
    }
    if (!dist.is_geometric() && space_.dbar_max == space_.y_max &&
        space_.y_max < dist.k_max()) {
        emit_warning("kernel truncation y_max=" + std::to_string(space_.y_max) +
                     " below service support k_max=" + std::to_string(dist.k_max()));
    }
    hazard_.resize(space_.dbar_max + 1);
    for (int x = 0; x <= space_.dbar_max; ++x) {
        if (dist.tail_sum(x) > 0.0) {
            hazard_[x] = dist.hazard(x);
        } else {
            hazard_[x] = 1.0; // absorbing-hazard guard
            hazard_guarded_ = true;
        }
    }
    if (hazard_guarded_) {
        emit_warning("kernel hazard saturated to 1 for progress rows past the service support "
                     "(unreachable under valid dynamics)");
    }
}

double Kernel::cost(int state, int action) const {
    const double activation = action == 1 ? lambda_bar_ : 0.0;
    if (state == StateSpace::kEmpty) {
        return activation;
    }
    return w_ * space_.state_of(state).delta + activation;
}

Kernel::Row Kernel::successors(int state, int action) const {
    if (!action_valid(state, action)) {
        throw ConfigError("serve action invalid at the empty state");
    }
    Row row;
    auto push = [&row](int s, double prob) {
        if (prob > 0.0) {
            row.entries[row.count++] = Successor{s, prob};
        }
    };
    if (state == StateSpace::kEmpty) {
        push(StateSpace::kEmpty, 1.0 - p_);
        push(space_.index(0, 0), p_);
        return row;
    }
    const UserState s = space_.state_of(state);
    const int delta_next = std::min(s.delta + 1, space_.y_max);
    if (action == 0) {
        push(space_.index(delta_next, s.progress), 1.0);
        return row;
    }
    const double h = hazard_[s.progress];
    const int progress_next = std::min(s.progress + 1, space_.dbar_max);
    push(space_.index(0, 0), p_ * h);
    push(StateSpace::kEmpty, (1.0 - p_) * h);
    push(space_.index(delta_next, progress_next), 1.0 - h);
    return row;
}

Kernel build_kernel(const UserSpec& user, const ServiceDistribution& dist, double lambda_bar,
                    int y_max) {
    return Kernel(user.p, user.w, dist, lambda_bar, StateSpace::square(y_max));
}

Kernel build_kernel(const UserSpec& user, const ServiceDistribution& dist, double lambda_bar,
                    StateSpace space) {
    return Kernel(user.p, user.w, dist, lambda_bar, space);
}

namespace {

struct SweepResult {
    double span;
    double ref_value;
};

// One Bellman sweep V_next = T(V_prev) - V_prev[ref] over the flat layout.
// Mirrors Kernel::successors exactly; kept allocation-free for the hot path.
SweepResult optimal_sweep(const Kernel& kernel, const std::vector<double>& prev,
                          std::vector<double>& next, int ref) {
    const StateSpace& sp = kernel.space();
    const double p = kernel.p();
    const double w = kernel.w();
    const double lb = kernel.lambda_bar();
    const int stride = sp.dbar_max + 1;

    const double v_empty = prev[StateSpace::kEmpty];
    const double v00 = prev[sp.index(0, 0)];
    const double ref_prev = prev[ref];
    const double refill = p * v00 + (1.0 - p) * v_empty;

    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -dmin;
    auto store = [&](int idx, double value) {
        next[idx] = value;
        const double diff = value - prev[idx];
        dmin = std::min(dmin, diff);
        dmax = std::max(dmax, diff);
    };

    store(StateSpace::kEmpty, refill - ref_prev);
    for (int delta = 0; delta <= sp.y_max; ++delta) {
        const int delta_next = std::min(delta + 1, sp.y_max);
        const double* next_row = prev.data() + sp.index(delta_next, 0);
        const double age_cost = w * delta;
        const int base = sp.index(delta, 0);
        for (int dbar = 0; dbar < stride; ++dbar) {
            const double q0 = age_cost + next_row[dbar];
            const double h = kernel.hazard_at(dbar);
            const int dbar_next = std::min(dbar + 1, sp.dbar_max);
            const double q1 = age_cost + lb + h * refill + (1.0 - h) * next_row[dbar_next];
            store(base + dbar, std::min(q0, q1) - ref_prev);
        }
    }
    return SweepResult{dmax - dmin, next[ref]};
}

// Policy-evaluation sweep with indicator cost 1{action == 1}.
SweepResult eval_sweep(const Kernel& kernel, const std::vector<int>& policy,
                       const std::vector<double>& prev, std::vector<double>& next, int ref) {
    const StateSpace& sp = kernel.space();
    const double p = kernel.p();
    const int stride = sp.dbar_max + 1;

    const double v_empty = prev[StateSpace::kEmpty];
    const double v00 = prev[sp.index(0, 0)];
    const double ref_prev = prev[ref];
    const double refill = p * v00 + (1.0 - p) * v_empty;

    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -dmin;
    auto store = [&](int idx, double value) {
        next[idx] = value;
        const double diff = value - prev[idx];
        dmin = std::min(dmin, diff);
        dmax = std::max(dmax, diff);
    };

    store(StateSpace::kEmpty, refill - ref_prev);
    for (int delta = 0; delta <= sp.y_max; ++delta) {
        const int delta_next = std::min(delta + 1, sp.y_max);
        const double* next_row = prev.data() + sp.index(delta_next, 0);
        const int base = sp.index(delta, 0);
        for (int dbar = 0; dbar < stride; ++dbar) {
            double value;
            if (policy[base + dbar] == 0) {
                value = next_row[dbar];
            } else {
                const double h = kernel.hazard_at(dbar);
                const int dbar_next = std::min(dbar + 1, sp.dbar_max);
                value = 1.0 + h * refill + (1.0 - h) * next_row[dbar_next];
            }
            store(base + dbar, value - ref_prev);
        }
    }
    return SweepResult{dmax - dmin, next[ref]};
}

int resolve_ref(const Kernel& kernel, int ref_state) {
    if (ref_state < 0) {
        return kernel.space().index(0, 0);
    }
    if (ref_state >= kernel.space().size()) {
        throw ConfigError("reference state outside the truncated space");
    }
    return ref_state;
}

std::vector<double> initial_iterate(const Kernel& kernel, const std::vector<double>* warm) {
    if (warm != nullptr) {
        if (static_cast<int>(warm->size()) != kernel.space().size()) {
            throw ConfigError("warm-start iterate size does not match the state space");
        }
        return *warm;
    }
    return std::vector<double>(kernel.space().size(), 0.0);
}

} // namespace

ValueFunction rvi_solve(const Kernel& kernel, const RviOptions& options,
                        std::vector<double>* iterate_out) {
    const int ref = resolve_ref(kernel, options.ref_state);
    std::vector<double> prev = initial_iterate(kernel, options.warm_start);
    std::vector<double> next(prev.size(), 0.0);

    double span = std::numeric_limits<double>::infinity();
    double ref_value = 0.0;
    int iterations = 0;
    for (; iterations < options.max_iters; ) {
        const SweepResult sweep = optimal_sweep(kernel, prev, next, ref);
        prev.swap(next);
        ++iterations;
        span = sweep.span;
        ref_value = sweep.ref_value;
        if (span < options.tol) {
            break;
        }
    }
    if (span >= options.tol) {
        throw NoConvergenceError("relative value iteration did not converge: span " +
                                     std::to_string(span) + " after " +
                                     std::to_string(iterations) + " iterations",
                                 iterations, span);
    }
    if (iterate_out != nullptr) {
        *iterate_out = prev;
    }

    ValueFunction vf;
    vf.gain = ref_value;
    vf.ref_state = ref;
    vf.iterations = iterations;
    vf.final_span = span;
    vf.value = std::move(prev);
    for (double& v : vf.value) {
        v -= ref_value;
    }
    vf.value[ref] = 0.0;
    return vf;
}

ValueFunction rvi_solve(const Kernel& kernel, const RviOptions& options) {
    return rvi_solve(kernel, options, nullptr);
}

double q_value(const Kernel& kernel, const ValueFunction& values, int state, int action) {
    const Kernel::Row row = kernel.successors(state, action);
    double q = kernel.cost(state, action);
    for (int k = 0; k < row.count; ++k) {
        q += row.entries[k].prob * values.value[row.entries[k].state];
    }
    return q;
}

double q_gap(const Kernel& kernel, const ValueFunction& values, int state) {
    return q_value(kernel, values, state, 0) - q_value(kernel, values, state, 1);
}

int greedy_action(const Kernel& kernel, const ValueFunction& values, int state) {
    if (state == StateSpace::kEmpty) {
        return 0;
    }
    return q_value(kernel, values, state, 1) < q_value(kernel, values, state, 0) ? 1 : 0;
}

std::vector<int> extract_policy(const Kernel& kernel, const ValueFunction& values) {
    std::vector<int> policy(kernel.space().size(), 0);
    for (int s = 0; s < kernel.space().size(); ++s) {
        policy[s] = greedy_action(kernel, values, s);
    }
    return policy;
}

double activation_frequency(const Kernel& kernel, const std::vector<int>& policy,
                            const EvalOptions& options, std::vector<double>* iterate_out) {
    if (static_cast<int>(policy.size()) != kernel.space().size()) {
        throw ConfigError("policy table size does not match the state space");
    }
    if (policy[StateSpace::kEmpty] != 0) {
        throw ConfigError("policy must be passive at the empty state");
    }
    const int ref = resolve_ref(kernel, options.ref_state);
    std::vector<double> prev = initial_iterate(kernel, options.warm_start);
    std::vector<double> next(prev.size(), 0.0);

    double span = std::numeric_limits<double>::infinity();
    double ref_value = 0.0;
    int iterations = 0;
    for (; iterations < options.max_iters; ) {
        const SweepResult sweep = eval_sweep(kernel, policy, prev, next, ref);
        prev.swap(next);
        ++iterations;
        span = sweep.span;
        ref_value = sweep.ref_value;
        if (span < options.tol) {
            break;
        }
    }
    if (span >= options.tol) {
        throw NoConvergenceError("policy-evaluation RVI did not converge: span " +
                                     std::to_string(span) + " after " +
                                     std::to_string(iterations) + " iterations",
                                 iterations, span);
    }
    if (iterate_out != nullptr) {
        *iterate_out = std::move(prev);
    }
    return ref_value;
}

double activation_frequency(const Kernel& kernel, const std::vector<int>& policy,
                            const EvalOptions& options) {
    return activation_frequency(kernel, policy, options, nullptr);
}

} // namespace agesched
