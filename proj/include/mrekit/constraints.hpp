#pragma once

// Linear expected-value constraints on a discrete distribution and the
// feasibility test run before any solve.
//
// Every constraint is linear in q, so the set of distributions satisfying a
// ConstraintSet is always convex.

#include "mrekit/detail/simplex.hpp"
#include "mrekit/error.hpp"
#include "mrekit/information.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mrekit {

/// One value f_k(i) per state i.
class FeatureFunction {
public:
    explicit FeatureFunction(std::vector<double> values) : values_(std::move(values)) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw DomainError("FeatureFunction: entry " + std::to_string(i) + " is not finite");
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const FeatureFunction&, const FeatureFunction&) = default;

private:
    std::vector<double> values_;
};

enum class ConstraintKind { equality, lower_bound, upper_bound };

[[nodiscard]] constexpr std::string_view to_string(ConstraintKind k) noexcept {
    switch (k) {
    case ConstraintKind::equality: return "equality";
    case ConstraintKind::lower_bound: return "lower_bound";
    case ConstraintKind::upper_bound: return "upper_bound";
    }
    return "equality";
}

/// E_q[feature] = target, >= target or <= target.
struct MomentConstraint {
    FeatureFunction feature;
    ConstraintKind kind = ConstraintKind::equality;
    double target = 0.0;

    MomentConstraint(FeatureFunction f, ConstraintKind k, double t) : feature(std::move(f)), kind(k), target(t) {
        if (!std::isfinite(target)) throw DomainError("MomentConstraint: target is not finite");
    }

    [[nodiscard]] bool is_bound() const noexcept { return kind != ConstraintKind::equality; }
};

class ConstraintSet {
public:
    ConstraintSet() = default;

    explicit ConstraintSet(std::vector<MomentConstraint> constraints) {
        for (auto& c : constraints) add(std::move(c));
    }

    ConstraintSet& add(MomentConstraint c) {
        if (!constraints_.empty() && c.feature.size() != constraints_.front().feature.size()) {
            throw ShapeError("ConstraintSet: feature length " + std::to_string(c.feature.size()) +
                             " differs from " + std::to_string(constraints_.front().feature.size()));
        }
        constraints_.push_back(std::move(c));
        return *this;
    }

    ConstraintSet& equal(std::vector<double> feature, double target) {
        return add({FeatureFunction(std::move(feature)), ConstraintKind::equality, target});
    }
    ConstraintSet& at_least(std::vector<double> feature, double target) {
        return add({FeatureFunction(std::move(feature)), ConstraintKind::lower_bound, target});
    }
    ConstraintSet& at_most(std::vector<double> feature, double target) {
        return add({FeatureFunction(std::move(feature)), ConstraintKind::upper_bound, target});
    }

    [[nodiscard]] std::size_t size() const noexcept { return constraints_.size(); }
    [[nodiscard]] bool empty() const noexcept { return constraints_.empty(); }
    [[nodiscard]] const MomentConstraint& operator[](std::size_t k) const noexcept { return constraints_[k]; }
    [[nodiscard]] auto begin() const noexcept { return constraints_.begin(); }
    [[nodiscard]] auto end() const noexcept { return constraints_.end(); }

    /// Number of states the features are defined on; nullopt for an empty set.
    [[nodiscard]] std::optional<std::size_t> state_count() const noexcept {
        if (constraints_.empty()) return std::nullopt;
        return constraints_.front().feature.size();
    }

    void require_states(std::size_t n, std::string_view who) const {
        if (auto s = state_count(); s && *s != n) {
            throw ShapeError(std::string(who) + ": features have length " + std::to_string(*s) +
                             " but the distribution has " + std::to_string(n) + " states");
        }
    }

private:
    std::vector<MomentConstraint> constraints_;
};

[[nodiscard]] inline double expectation(const FeatureFunction& f, const Distribution& q) {
    if (f.size() != q.size()) throw ShapeError("expectation: feature and distribution lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * f[i];
    return s;
}

/// Signed violation for equalities, positive part of the violation for bounds.
[[nodiscard]] inline std::vector<double> residuals(const ConstraintSet& cs, const Distribution& q) {
    cs.require_states(q.size(), "residuals");
    std::vector<double> out;
    out.reserve(cs.size());
    for (const auto& c : cs) {
        const double diff = expectation(c.feature, q) - c.target;
        switch (c.kind) {
        case ConstraintKind::equality: out.push_back(diff); break;
        case ConstraintKind::lower_bound: out.push_back(std::max(0.0, -diff)); break;
        case ConstraintKind::upper_bound: out.push_back(std::max(0.0, diff)); break;
        }
    }
    return out;
}

enum class FeasibilityStatus { strictly_feasible, boundary, infeasible };

/// Where a target sits relative to the feature's range over the prior support.
enum class TargetPlacement { interior, boundary, exterior };

[[nodiscard]] constexpr std::string_view to_string(FeasibilityStatus s) noexcept {
    switch (s) {
    case FeasibilityStatus::strictly_feasible: return "strictly_feasible";
    case FeasibilityStatus::boundary: return "boundary";
    case FeasibilityStatus::infeasible: return "infeasible";
    }
    return "infeasible";
}

[[nodiscard]] constexpr std::string_view to_string(TargetPlacement p) noexcept {
    switch (p) {
    case TargetPlacement::interior: return "interior";
    case TargetPlacement::boundary: return "boundary";
    case TargetPlacement::exterior: return "exterior";
    }
    return "exterior";
}

struct FeasibilityReport {
    FeasibilityStatus status = FeasibilityStatus::infeasible;
    std::optional<Distribution> witness;
    std::vector<TargetPlacement> detail;
    /// Largest t such that some feasible q has q_i >= t on the prior support
    /// (0 when infeasible or not computed by the LP).
    double interior_margin = 0.0;
};

namespace detail {

inline constexpr double strict_margin = 1e-10;

inline double extremum_tolerance(double lo, double hi) {
    return 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
}

inline TargetPlacement place_target(const MomentConstraint& c, double lo, double hi) {
    const double tol = extremum_tolerance(lo, hi);
    const bool constant = hi - lo <= tol;
    const double t = c.target;
    switch (c.kind) {
    case ConstraintKind::equality:
        if (constant) return std::abs(t - lo) <= tol ? TargetPlacement::interior : TargetPlacement::exterior;
        if (t < lo - tol || t > hi + tol) return TargetPlacement::exterior;
        if (std::abs(t - lo) <= tol || std::abs(t - hi) <= tol) return TargetPlacement::boundary;
        return TargetPlacement::interior;
    case ConstraintKind::lower_bound:
        if (t > hi + tol) return TargetPlacement::exterior;
        if (!constant && std::abs(t - hi) <= tol) return TargetPlacement::boundary;
        return TargetPlacement::interior;
    case ConstraintKind::upper_bound:
        if (t < lo - tol) return TargetPlacement::exterior;
        if (!constant && std::abs(t - lo) <= tol) return TargetPlacement::boundary;
        return TargetPlacement::interior;
    }
    return TargetPlacement::exterior;
}

// Single equality: mix the uniform distribution on the support with the
// extreme state on the target's side.
inline Distribution mix_witness(const MomentConstraint& c, const std::vector<std::size_t>& support, std::size_t n) {
    std::vector<double> u(n, 0.0);
    for (std::size_t i : support) u[i] = 1.0 / static_cast<double>(support.size());
    double mean = 0.0;
    std::size_t lo_i = support.front();
    std::size_t hi_i = support.front();
    for (std::size_t i : support) {
        mean += u[i] * c.feature[i];
        if (c.feature[i] < c.feature[lo_i]) lo_i = i;
        if (c.feature[i] > c.feature[hi_i]) hi_i = i;
    }
    const std::size_t extreme = c.target >= mean ? hi_i : lo_i;
    const double span = c.feature[extreme] - mean;
    const double s = span == 0.0 ? 0.0 : (c.target - mean) / span;
    for (double& v : u) v *= (1.0 - s);
    u[extreme] += s;
    return Distribution(std::move(u));
}

// maximize t  s.t.  q_i = s_i + t on the support, sum q = 1, constraints hold.
inline std::optional<std::pair<Distribution, double>> max_margin_witness(const ConstraintSet& cs,
                                                                         const std::vector<std::size_t>& support,
                                                                         std::size_t n) {
    const std::size_t ns = support.size();
    std::size_t bounds = 0;
    for (const auto& c : cs) bounds += c.is_bound() ? 1 : 0;
    const std::size_t vars = ns + 1 + bounds;
    const std::size_t t_col = ns;

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<double> mass(vars, 0.0);
    for (std::size_t j = 0; j < ns; ++j) mass[j] = 1.0;
    mass[t_col] = static_cast<double>(ns);
    rows.push_back(std::move(mass));
    rhs.push_back(1.0);

    std::size_t slack = ns + 1;
    for (const auto& c : cs) {
        std::vector<double> row(vars, 0.0);
        double total = 0.0;
        for (std::size_t j = 0; j < ns; ++j) {
            row[j] = c.feature[support[j]];
            total += row[j];
        }
        row[t_col] = total;
        if (c.kind == ConstraintKind::lower_bound) row[slack++] = -1.0;
        if (c.kind == ConstraintKind::upper_bound) row[slack++] = 1.0;
        rows.push_back(std::move(row));
        rhs.push_back(c.target);
    }

    std::vector<double> cost(vars, 0.0);
    cost[t_col] = -1.0;
    auto lp = DenseSimplex(std::move(rows), std::move(rhs), std::move(cost)).solve();
    if (lp.status != LpStatus::optimal) return std::nullopt;

    const double t = lp.x[t_col];
    std::vector<double> q(n, 0.0);
    double sum = 0.0;
    for (std::size_t j = 0; j < ns; ++j) {
        q[support[j]] = lp.x[j] + t;
        sum += q[support[j]];
    }
    for (double& v : q) v /= sum;
    return std::pair{Distribution(std::move(q)), t};
}

} // namespace detail

/// Classifies whether an MRE update of `prior` under `cs` can be solved.
///
/// Each target is first placed against the range of its feature over the
/// prior's support (states the prior excludes can never gain mass). A
/// phase-1 linear program then looks for a feasible point that stays
/// strictly inside the support, which also catches jointly inconsistent
/// constraints. Overall status is the worse of the two verdicts.
[[nodiscard]] inline FeasibilityReport check_feasibility(const ConstraintSet& cs, const Distribution& prior) {
    cs.require_states(prior.size(), "check_feasibility");
    const std::size_t n = prior.size();

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i) {
        if (prior[i] > 0.0) support.push_back(i);
    }

    FeasibilityReport report;
    report.detail.reserve(cs.size());
    for (const auto& c : cs) {
        double lo = c.feature[support.front()];
        double hi = lo;
        for (std::size_t i : support) {
            lo = std::min(lo, c.feature[i]);
            hi = std::max(hi, c.feature[i]);
        }
        report.detail.push_back(detail::place_target(c, lo, hi));
    }

    const auto worst = [&] {
        auto w = TargetPlacement::interior;
        for (auto p : report.detail) w = std::max(w, p);
        return w;
    }();

    if (worst == TargetPlacement::exterior) {
        report.status = FeasibilityStatus::infeasible;
        return report;
    }
    if (cs.empty()) {
        report.status = FeasibilityStatus::strictly_feasible;
        report.witness = prior;
        report.interior_margin = 1.0 / static_cast<double>(support.size());
        return report;
    }
    if (cs.size() == 1 && cs[0].kind == ConstraintKind::equality && worst == TargetPlacement::interior) {
        report.status = FeasibilityStatus::strictly_feasible;
        report.witness = detail::mix_witness(cs[0], support, n);
        report.interior_margin = 1.0;
        for (std::size_t i : support) {
            report.interior_margin = std::min(report.interior_margin, (*report.witness)[i]);
        }
        return report;
    }

    auto found = detail::max_margin_witness(cs, support, n);
    if (!found) {
        report.status = FeasibilityStatus::infeasible;
        return report;
    }
    report.witness = std::move(found->first);
    report.interior_margin = found->second;
    report.status = (worst == TargetPlacement::boundary || found->second <= detail::strict_margin)
                        ? FeasibilityStatus::boundary
                        : FeasibilityStatus::strictly_feasible;
    return report;
}

} // namespace mrekit
