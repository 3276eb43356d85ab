#pragma once

// Binary relative entropy and the Karp-Pearl search constant alpha*.
//
// In a binary tree whose branches cost 1 with probability p and 0 otherwise,
// G(alpha, p) = (p/alpha)^alpha ((1-p)/(1-alpha))^(1-alpha) = exp(-K(alpha, p)),
// with K the relative entropy between Bernoulli(alpha) and Bernoulli(p).
// For p > 1/2 the constant alpha* solves G(alpha*, p) = 1/2, which is the same
// as K(alpha*, p) = log 2: exactly one bit.

#include "mrekit/error.hpp"
#include "mrekit/information.hpp"

#include <cmath>
#include <numbers>

namespace mrekit {

struct SearchConstant {
    double p = 0.0;
    double alpha_star = 0.0;
    double divergence_at_root = 0.0;  ///< nats
};

[[nodiscard]] inline double bernoulli_kl(double alpha, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("bernoulli_kl: p must lie in (0, 1)");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("bernoulli_kl: alpha must lie in [0, 1]");
    return detail::xlogxy(alpha, p) + detail::xlogxy(1.0 - alpha, 1.0 - p);
}

/// G(alpha, p), evaluated as exp(-K) rather than through the two powers.
[[nodiscard]] inline double g_function(double alpha, double p) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("g_function: alpha must lie in (0, 1)");
    return std::exp(-bernoulli_kl(alpha, p));
}

/// Root of K(alpha, p) = log 2 for p in (1/2, 1).
///
/// K(., p) falls monotonically from log(1/(1-p)) > log 2 at alpha = 0 to 0 at
/// alpha = p, so the root is unique and lies in (0, p). Bisection runs until
/// the bracket is narrower than 1e-14; the result is bit-reproducible.
[[nodiscard]] inline SearchConstant alpha_star(double p) {
    if (!(p > 0.5 && p < 1.0)) throw DomainError("alpha_star: p must lie in (1/2, 1)");
    const double target = std::numbers::ln2;
    double lo = 0.0;  // K > log 2
    double hi = p;    // K = 0
    while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (bernoulli_kl(mid, p) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double root = 0.5 * (lo + hi);
    return {p, root, bernoulli_kl(root, p)};
}

} // namespace mrekit
