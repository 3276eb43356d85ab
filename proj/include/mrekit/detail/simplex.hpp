#pragma once

// Dense two-phase tableau simplex for the small feasibility programs built by
// check_feasibility. Bland's rule keeps it cycle-free; sizes here are a few
// dozen rows at most.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace mrekit::detail {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
};

/// minimize cost . x  subject to  rows . x = rhs,  x >= 0.
class DenseSimplex {
public:
    DenseSimplex(std::vector<std::vector<double>> rows, std::vector<double> rhs, std::vector<double> cost)
        : a_(std::move(rows)), b_(std::move(rhs)), c_(std::move(cost)) {}

    LpResult solve() {
        const std::size_t m = a_.size();
        const std::size_t n = c_.size();
        const std::size_t width = n + m + 1;  // structural, artificial, rhs
        tab_.assign(m + 1, std::vector<double>(width, 0.0));
        basis_.assign(m, 0);

        for (std::size_t r = 0; r < m; ++r) {
            const double sign = b_[r] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n; ++j) tab_[r][j] = sign * a_[r][j];
            tab_[r][n + r] = 1.0;
            tab_[r][width - 1] = sign * b_[r];
            basis_[r] = n + r;
        }

        // Phase 1: minimize the sum of artificials.
        std::vector<double> phase1(n + m, 0.0);
        for (std::size_t r = 0; r < m; ++r) phase1[n + r] = 1.0;
        set_objective(phase1);
        if (!iterate(n + m)) return {LpStatus::unbounded, {}, 0.0};

        double scale = 1.0;
        for (double v : b_) scale = std::max(scale, std::abs(v));
        if (-tab_[m][width - 1] > 1e-9 * scale) return {LpStatus::infeasible, {}, 0.0};

        // Pivot surviving artificials out; rows with no structural entry are redundant.
        for (std::size_t r = 0; r < m; ++r) {
            if (basis_[r] < n) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (std::abs(tab_[r][j]) > pivot_eps) {
                    pivot(r, j);
                    break;
                }
            }
        }

        // Phase 2 over structural columns only; artificial columns are barred.
        std::vector<double> phase2(n + m, 0.0);
        for (std::size_t j = 0; j < n; ++j) phase2[j] = c_[j];
        set_objective(phase2);
        if (!iterate(n)) return {LpStatus::unbounded, {}, 0.0};

        LpResult out;
        out.status = LpStatus::optimal;
        out.x.assign(n, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            if (basis_[r] < n) out.x[basis_[r]] = std::max(0.0, tab_[r][width - 1]);
        }
        out.objective = 0.0;
        for (std::size_t j = 0; j < n; ++j) out.objective += c_[j] * out.x[j];
        return out;
    }

private:
    static constexpr double pivot_eps = 1e-11;

    // Objective row holds reduced costs; last entry is -(objective value).
    void set_objective(const std::vector<double>& cost) {
        const std::size_t m = a_.size();
        auto& obj = tab_[m];
        std::fill(obj.begin(), obj.end(), 0.0);
        for (std::size_t j = 0; j < cost.size(); ++j) obj[j] = cost[j];
        for (std::size_t r = 0; r < m; ++r) {
            const double cb = cost[basis_[r]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < obj.size(); ++j) obj[j] -= cb * tab_[r][j];
        }
    }

    // Returns false when unbounded. Columns >= allowed never enter.
    bool iterate(std::size_t allowed) {
        const std::size_t m = a_.size();
        const std::size_t rhs = tab_[0].size() - 1;
        for (std::size_t guard = 0; guard < 50000; ++guard) {
            std::size_t enter = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                if (tab_[m][j] < -pivot_eps) {
                    enter = j;
                    break;
                }
            }
            if (enter == allowed) return true;

            std::size_t leave = m;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m; ++r) {
                if (tab_[r][enter] > pivot_eps) {
                    const double ratio = tab_[r][rhs] / tab_[r][enter];
                    if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave < m && basis_[r] < basis_[leave])) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave == m) return false;
            pivot(leave, enter);
        }
        return true;
    }

    void pivot(std::size_t row, std::size_t col) {
        auto& pr = tab_[row];
        const double inv = 1.0 / pr[col];
        for (double& v : pr) v *= inv;
        for (std::size_t r = 0; r < tab_.size(); ++r) {
            if (r == row) continue;
            const double f = tab_[r][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < pr.size(); ++j) tab_[r][j] -= f * pr[j];
        }
        basis_[row] = col;
    }

    std::vector<std::vector<double>> a_;
    std::vector<double> b_;
    std::vector<double> c_;
    std::vector<std::vector<double>> tab_;
    std::vector<std::size_t> basis_;
};

} // namespace mrekit::detail
