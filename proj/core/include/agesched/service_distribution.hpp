#pragma once

#include <vector>

namespace agesched {

/// Per-network job-completion-time law. Either a finite-support pmf
/// f(1)..f(K) over whole slots, or a geometric law with per-slot success
/// probability q. Geometric laws are kept symbolic (never truncated into a
/// pmf) so memorylessness is exact.
///
/// Immutable after construction; safe to share across threads.
class ServiceDistribution {
public:
    /// Deterministic single-slot service, f(1) = 1.
    ServiceDistribution() : probs_{1.0}, tail_{1.0, 0.0} {}

    /// probs[k-1] = f(k) for k = 1..K. Entries must be >= 0 and sum to 1
    /// within 1e-12; completing any job takes at least one slot (K >= 1).
    static ServiceDistribution finite_pmf(std::vector<double> probs);

    /// Geometric with success probability q in (0, 1].
    static ServiceDistribution geometric(double q);

    bool is_geometric() const { return geometric_; }

    /// Geometric success probability. Only valid for geometric laws.
    double q() const { return q_; }

    /// Largest k with f(k) > 0 allowed by the support. Only valid for pmf laws.
    int k_max() const { return static_cast<int>(probs_.size()); }

    const std::vector<double>& probs() const { return probs_; }

    /// f(k), one-based duration. Zero outside the support.
    double pmf(int k) const;

    /// P(Y > x) = sum_{k >= x+1} f(k). (1-q)^x for geometric.
    /// Zero once a finite support is exhausted.
    double tail_sum(int processed) const;

    /// Completion probability at the end of the next served slot given
    /// `processed` prior slots of service: f(x+1) / tail_sum(x).
    /// Throws ZeroTailError when tail_sum(processed) == 0.
    double hazard(int processed) const;

    /// Probability the job needs two or more further served slots:
    /// alpha = 1 - hazard, computed via that identity so it holds exactly.
    double alpha(int processed) const;

    bool operator==(const ServiceDistribution& other) const;

private:
    std::vector<double> probs_; // empty for geometric
    std::vector<double> tail_;  // tail_[x] = sum_{k >= x+1} f(k), size K+1
    double q_ = 0.0;
    bool geometric_ = false;
};

} // namespace agesched
