// Jaynes' die: the faces of a six-sided die average 4.5 instead of 3.5.
// What probabilities should we assign to each face?

#include "mrekit/mrekit.hpp"

#include <cstdio>

int main() {
    mrekit::ConstraintSet cs;
    cs.equal({1, 2, 3, 4, 5, 6}, 4.5);

    const auto sol = mrekit::solve_maxent(6, cs);
    for (std::size_t i = 0; i < sol.posterior.size(); ++i) {
        std::printf("face %zu: %.6f\n", i + 1, sol.posterior[i]);
    }
    std::printf("beta = %.6f, lambda = %.6f, %d Newton steps\n", sol.multipliers[0], sol.log_normalizer, sol.iterations);
    std::printf("information in the constraint: %.6f bits\n",
                mrekit::relative_entropy(sol.posterior, mrekit::Distribution::uniform(6), mrekit::LogBase::bits));

    const auto sc = mrekit::alpha_star(0.75);
    std::printf("alpha*(0.75) = %.12f, divergence = %.12f bits\n", sc.alpha_star, sc.divergence_at_root * mrekit::bits_per_nat);
}
