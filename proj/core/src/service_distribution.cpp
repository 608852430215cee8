#include "agesched/service_distribution.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "agesched/errors.hpp"

namespace agesched {

namespace {
constexpr double kProbTol = 1e-12;
}

ServiceDistribution ServiceDistribution::finite_pmf(std::vector<double> probs) {
    if (probs.empty()) {
        throw ConfigError("service pmf must have at least one entry (jobs take >= 1 slot)");
    }
    double total = 0.0;
    for (double f : probs) {
        if (f < 0.0) {
            throw ConfigError("service pmf entries must be non-negative");
        }
        total += f;
    }
    if (std::abs(total - 1.0) > kProbTol) {
        throw ConfigError("service pmf must sum to 1 within 1e-12, got " + std::to_string(total));
    }
    ServiceDistribution d;
    d.probs_ = std::move(probs);
    // Backward accumulation keeps tails exact at the support boundary:
    // tail_[K] == 0 and tail_[K-1] == f(K) with no cancellation.
    d.tail_.assign(d.probs_.size() + 1, 0.0);
    for (int x = static_cast<int>(d.probs_.size()) - 1; x >= 0; --x) {
        d.tail_[x] = d.tail_[x + 1] + d.probs_[x];
    }
    return d;
}

ServiceDistribution ServiceDistribution::geometric(double q) {
    if (!(q > 0.0) || q > 1.0) {
        throw ConfigError("geometric service requires q in (0, 1], got " + std::to_string(q));
    }
    ServiceDistribution d;
    d.probs_.clear();
    d.tail_.clear();
    d.geometric_ = true;
    d.q_ = q;
    return d;
}

double ServiceDistribution::pmf(int k) const {
    if (k < 1) {
        return 0.0;
    }
    if (geometric_) {
        return q_ * std::pow(1.0 - q_, k - 1);
    }
    if (k > k_max()) {
        return 0.0;
    }
    return probs_[k - 1];
}

double ServiceDistribution::tail_sum(int processed) const {
    if (processed <= 0) {
        return geometric_ ? 1.0 : tail_[0];
    }
    if (geometric_) {
        return std::pow(1.0 - q_, processed);
    }
    if (processed >= k_max()) {
        return 0.0;
    }
    return tail_[processed];
}

double ServiceDistribution::hazard(int processed) const {
    if (geometric_) {
        if (q_ < 1.0 || processed == 0) {
            return q_;
        }
        throw ZeroTailError("hazard undefined: geometric q=1 job cannot survive a served slot");
    }
    const double tail = tail_sum(processed);
    if (tail <= 0.0) {
        throw ZeroTailError("hazard undefined at processed=" + std::to_string(processed) +
                            ": service support exhausted");
    }
    return pmf(processed + 1) / tail;
}

double ServiceDistribution::alpha(int processed) const {
    return 1.0 - hazard(processed);
}

bool ServiceDistribution::operator==(const ServiceDistribution& other) const {
    if (geometric_ != other.geometric_) {
        return false;
    }
    return geometric_ ? q_ == other.q_ : probs_ == other.probs_;
}

} // namespace agesched
