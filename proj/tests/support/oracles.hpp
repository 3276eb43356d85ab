#pragma once

// Independent reference computations. None of these call into the solver or
// the library's measures; they exist to check them.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace mrekit::test_support::oracle {

// Plain left-to-right sum of q_i ln(q_i / p_i).
inline double kl_naive(const std::vector<double>& q, const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) s += q[i] * std::log(q[i] / p[i]);
    }
    return s;
}

// Maximum-entropy die: q_i proportional to r^i on faces 1..faces, with r found
// by bisection so that the mean equals `mean`.
inline std::vector<double> geometric_die(int faces, double mean) {
    auto mean_of = [faces](double r) {
        double num = 0.0;
        double den = 0.0;
        double w = 1.0;
        for (int i = 1; i <= faces; ++i) {
            w *= r;
            num += i * w;
            den += w;
        }
        return num / den;
    };
    double lo = 1e-6;
    double hi = 1e6;
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        (mean_of(mid) < mean ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi);
    std::vector<double> q(static_cast<std::size_t>(faces));
    double w = 1.0;
    double den = 0.0;
    for (int i = 0; i < faces; ++i) {
        w *= r;
        q[static_cast<std::size_t>(i)] = w;
        den += w;
    }
    for (double& x : q) x /= den;
    return q;
}

// G(alpha, p) through the two powers as written, no logarithms.
inline double g_powers(double alpha, double p) {
    return std::pow(p / alpha, alpha) * std::pow((1.0 - p) / (1.0 - alpha), 1.0 - alpha);
}

// Root of G = 1/2 below p, bisected to 1e-12 width.
inline double alpha_star_bisect(double p) {
    double lo = 1e-300;
    double hi = p;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (g_powers(mid, p) < 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Minimum of KL(q, prior) over simplex grid points with spacing `step` whose
// constraint value f.q lies within `tol` of `target`. n is 3 or 4. For n = 4
// the last free coordinate is enumerated only over its feasible index range,
// which visits exactly the grid points a full enumeration would accept.
inline double grid_min_kl(const std::vector<double>& prior, const std::vector<double>& f, double target,
                          double step, double tol) {
    const std::size_t n = prior.size();
    const long grid = std::lround(1.0 / step);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> q(n);
    auto visit = [&] {
        double fq = 0.0;
        for (std::size_t i = 0; i < n; ++i) fq += f[i] * q[i];
        if (std::abs(fq - target) > tol) return;
        const double h = kl_naive(q, prior);
        if (h < best) best = h;
    };
    if (n == 3) {
        for (long a = 0; a <= grid; ++a) {
            for (long b = 0; a + b <= grid; ++b) {
                q = {a * step, b * step, (grid - a - b) * step};
                visit();
            }
        }
        return best;
    }
    for (long a = 0; a <= grid; ++a) {
        for (long b = 0; a + b <= grid; ++b) {
            const long rest = grid - a - b;
            // f.q = base + slope * c * step with c the third coordinate index.
            const double base = f[0] * a * step + f[1] * b * step + f[3] * rest * step;
            const double slope = f[2] - f[3];
            long c_lo = 0;
            long c_hi = rest;
            if (std::abs(slope) > 1e-15) {
                double lo = (target - tol - base) / (slope * step);
                double hi = (target + tol - base) / (slope * step);
                if (lo > hi) std::swap(lo, hi);
                c_lo = std::max<long>(0, static_cast<long>(std::floor(lo)) - 1);
                c_hi = std::min<long>(rest, static_cast<long>(std::ceil(hi)) + 1);
            }
            for (long c = c_lo; c <= c_hi; ++c) {
                q = {a * step, b * step, c * step, (rest - c) * step};
                visit();
            }
        }
    }
    return best;
}

// Central differences of a scalar function of a vector.
inline std::vector<double> central_gradient(const std::function<double(const std::vector<double>&)>& fn,
                                            std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double keep = x[k];
        x[k] = keep + h;
        const double up = fn(x);
        x[k] = keep - h;
        const double down = fn(x);
        x[k] = keep;
        g[k] = (up - down) / (2.0 * h);
    }
    return g;
}

} // namespace mrekit::test_support::oracle
