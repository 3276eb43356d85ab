#pragma once

// Minimum-relative-entropy updating under linear moment constraints.
//
// The posterior is the exponential tilt
//
//     q_i = p_i exp(-lambda - sum_k beta_k f_k(i)),   lambda = log Z(beta),
//
// and beta minimizes the convex dual  D(beta) = log Z(beta) + beta . target.
// D has gradient target - E_q[f] and Hessian Cov_q(f), so a damped Newton
// iteration on D drives the constraint residuals to zero. Bounds are handled
// by an active set wrapped around the equality solver.

#include "mrekit/constraints.hpp"
#include "mrekit/error.hpp"
#include "mrekit/information.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mrekit {

struct SolverConfig {
    double tolerance = 1e-10;  ///< max absolute constraint residual
    int max_iterations = 100;  ///< Newton steps per active-set pass
    double damping = 0.0;      ///< initial Levenberg parameter
    double ridge = 1e-12;      ///< Hessian regularization floor

    void validate() const {
        if (!(tolerance > 0.0)) throw DomainError("SolverConfig: tolerance must be > 0");
        if (max_iterations < 1) throw DomainError("SolverConfig: max_iterations must be >= 1");
        if (!(damping >= 0.0)) throw DomainError("SolverConfig: damping must be >= 0");
        if (!(ridge >= 0.0)) throw DomainError("SolverConfig: ridge must be >= 0");
    }
};

struct MreSolution {
    Distribution posterior;
    /// One multiplier per constraint, in constraint order; inactive bounds hold 0.
    std::vector<double> multipliers;
    double log_normalizer = 0.0;
    int iterations = 0;
    double max_residual = 0.0;
    std::vector<std::size_t> active_bounds;
    /// Hessian was rank deficient; multipliers are the minimum-norm choice.
    bool ridge_engaged = false;
    /// Dual objective at every accepted iterate of the final active-set pass.
    std::vector<double> dual_trace;
};

class FeasibilityError : public Error {
public:
    explicit FeasibilityError(FeasibilityReport report, std::optional<std::size_t> stage = std::nullopt)
        : Error(message(report, stage)), report_(std::move(report)), stage_(stage) {}

    [[nodiscard]] const FeasibilityReport& report() const noexcept { return report_; }
    [[nodiscard]] std::optional<std::size_t> stage() const noexcept { return stage_; }
    [[nodiscard]] FeasibilityError at_stage(std::size_t s) const { return FeasibilityError(report_, s); }

private:
    static std::string message(const FeasibilityReport& r, std::optional<std::size_t> stage) {
        std::string m = stage ? "stage " + std::to_string(*stage) + ": " : std::string();
        return m + "constraint set is not strictly feasible (" + std::string(to_string(r.status)) + ")";
    }

    FeasibilityReport report_;
    std::optional<std::size_t> stage_;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(MreSolution best, std::vector<double> residuals, std::optional<std::size_t> stage = std::nullopt)
        : Error(message(best, stage)), best_(std::move(best)), residuals_(std::move(residuals)), stage_(stage) {}

    [[nodiscard]] const MreSolution& best_iterate() const noexcept { return best_; }
    [[nodiscard]] const std::vector<double>& residuals() const noexcept { return residuals_; }
    [[nodiscard]] std::optional<std::size_t> stage() const noexcept { return stage_; }
    [[nodiscard]] NonConvergenceError at_stage(std::size_t s) const { return {best_, residuals_, s}; }

private:
    static std::string message(const MreSolution& b, std::optional<std::size_t> stage) {
        std::string m = stage ? "stage " + std::to_string(*stage) + ": " : std::string();
        return m + "solver did not converge after " + std::to_string(b.iterations) +
               " iterations (max residual " + std::to_string(b.max_residual) + ")";
    }

    MreSolution best_;
    std::vector<double> residuals_;
    std::optional<std::size_t> stage_;
};

class DegenerateConstraintsError : public Error {
public:
    explicit DegenerateConstraintsError(std::vector<std::size_t> dependent,
                                        std::optional<std::size_t> stage = std::nullopt)
        : Error(message(dependent, stage)), dependent_(std::move(dependent)), stage_(stage) {}

    /// Constraint indices taking part in a linear dependency.
    [[nodiscard]] const std::vector<std::size_t>& dependent_subset() const noexcept { return dependent_; }
    [[nodiscard]] std::optional<std::size_t> stage() const noexcept { return stage_; }
    [[nodiscard]] DegenerateConstraintsError at_stage(std::size_t s) const { return DegenerateConstraintsError(dependent_, s); }

private:
    static std::string message(const std::vector<std::size_t>& d, std::optional<std::size_t> stage) {
        std::string m = stage ? "stage " + std::to_string(*stage) + ": " : std::string();
        m += "linearly dependent constraints {";
        for (std::size_t i = 0; i < d.size(); ++i) m += (i ? ", " : "") + std::to_string(d[i]);
        return m + "} with inconsistent targets";
    }

    std::vector<std::size_t> dependent_;
    std::optional<std::size_t> stage_;
};

struct DualEvaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

namespace detail {

// Equality rows seen by the Newton solver.
struct EqualityRows {
    std::vector<std::span<const double>> features;
    Eigen::VectorXd targets;
    std::vector<std::size_t> origin;  // index into the caller's ConstraintSet
};

inline EqualityRows all_rows(const ConstraintSet& cs) {
    EqualityRows rows;
    rows.targets.resize(static_cast<Eigen::Index>(cs.size()));
    for (std::size_t k = 0; k < cs.size(); ++k) {
        rows.features.push_back(cs[k].feature.values());
        rows.targets[static_cast<Eigen::Index>(k)] = cs[k].target;
        rows.origin.push_back(k);
    }
    return rows;
}

struct Tilt {
    std::vector<double> q;
    double log_normalizer = 0.0;
};

// q(beta) with a max shift on the log weights.
inline Tilt tilt(const Distribution& prior, const EqualityRows& rows, const Eigen::VectorXd& beta) {
    const std::size_t n = prior.size();
    Tilt out;
    if (beta.size() == 0 || beta.isZero(0.0)) {
        out.q = prior.vector();
        return out;
    }
    std::vector<double> logw(n, -std::numeric_limits<double>::infinity());
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (prior[i] == 0.0) continue;
        double e = 0.0;
        for (std::size_t k = 0; k < rows.features.size(); ++k) e += beta[static_cast<Eigen::Index>(k)] * rows.features[k][i];
        logw[i] = std::log(prior[i]) - e;
        shift = std::max(shift, logw[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (prior[i] != 0.0) z += std::exp(logw[i] - shift);
    }
    out.log_normalizer = shift + std::log(z);
    if (!std::isfinite(out.log_normalizer)) throw NumericOverflowError("tilt: log normalizer is not finite");
    out.q.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (prior[i] != 0.0) out.q[i] = std::exp(logw[i] - out.log_normalizer);
    }
    return out;
}

inline Eigen::VectorXd feature_means(const EqualityRows& rows, const std::vector<double>& q) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.features.size()));
    for (std::size_t k = 0; k < rows.features.size(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * rows.features[k][i];
        mean[static_cast<Eigen::Index>(k)] = s;
    }
    return mean;
}

inline DualEvaluation evaluate_dual(const Distribution& prior, const EqualityRows& rows, const Eigen::VectorXd& beta,
                                    Tilt* tilt_out = nullptr) {
    Tilt t = tilt(prior, rows, beta);
    const auto m = static_cast<Eigen::Index>(rows.features.size());
    const Eigen::VectorXd mean = feature_means(rows, t.q);

    DualEvaluation ev;
    ev.value = t.log_normalizer + beta.dot(rows.targets);
    ev.gradient = rows.targets - mean;
    ev.hessian = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd centered(m);
    for (std::size_t i = 0; i < t.q.size(); ++i) {
        if (t.q[i] == 0.0) continue;
        for (Eigen::Index k = 0; k < m; ++k) centered[k] = rows.features[static_cast<std::size_t>(k)][i] - mean[k];
        ev.hessian.noalias() += t.q[i] * centered * centered.transpose();
    }
    if (!std::isfinite(ev.value) || !ev.gradient.allFinite() || !ev.hessian.allFinite()) {
        throw NumericOverflowError("dual_objective: non-finite value");
    }
    if (tilt_out) *tilt_out = std::move(t);
    return ev;
}

inline double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Orthonormal basis of the numerical null space of a PSD matrix.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& h) {
    if (h.rows() == 0) return Eigen::MatrixXd(0, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cutoff = 1e-11 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < ev.size(); ++j) {
        if (ev[j] <= cutoff) cols.push_back(j);
    }
    Eigen::MatrixXd basis(h.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(cols[c]);
    return basis;
}

struct NewtonResult {
    Eigen::VectorXd beta;
    Tilt tilt;
    int iterations = 0;
    double max_residual = 0.0;
    bool converged = false;
    bool ridge_engaged = false;
    std::vector<double> trace;
    Eigen::MatrixXd hessian;
};

inline constexpr double max_ridge = 1e-2;
inline constexpr double armijo_c1 = 1e-4;
inline constexpr int max_halvings = 60;
// Once within tolerance, up to this many extra full Newton steps are taken
// while each at least halves the residual, stopping at tolerance * 1e-3. On
// ill-conditioned problems this is what pins q down beyond the residual.
inline constexpr int max_polish = 3;
inline constexpr double polish_floor = 1e-3;

// Damped Newton on the dual for equality rows only.
inline NewtonResult newton_solve(const Distribution& prior, const EqualityRows& rows, Eigen::VectorXd beta,
                                 const SolverConfig& cfg) {
    NewtonResult res;
    const auto m = static_cast<Eigen::Index>(rows.features.size());
    double levenberg = cfg.damping;
    int polish = 0;

    Tilt cur_tilt;
    DualEvaluation cur = evaluate_dual(prior, rows, beta, &cur_tilt);
    res.trace.push_back(cur.value);

    for (;;) {
        const double resid = max_abs(cur.gradient);
        if (resid <= cfg.tolerance) res.converged = true;
        if (res.converged && (resid <= polish_floor * cfg.tolerance || polish >= max_polish)) break;
        if (res.iterations >= cfg.max_iterations) break;
        ++res.iterations;
        if (res.converged) ++polish;

        // Newton direction with ridge escalation, then steepest descent.
        Eigen::VectorXd dir;
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
        for (double ridge = std::max(cfg.ridge, 0.0);; ridge = ridge == 0.0 ? 1e-12 : ridge * 10.0) {
            if (ridge > max_ridge) {
                dir = cur.gradient * -1.0;
                res.ridge_engaged = true;
                break;
            }
            Eigen::LLT<Eigen::MatrixXd> llt(cur.hessian + (ridge + levenberg) * eye);
            if (llt.info() == Eigen::Success) {
                dir = llt.solve(-cur.gradient);
                if (dir.allFinite()) {
                    if (ridge > cfg.ridge) res.ridge_engaged = true;
                    break;
                }
            }
        }

        // Armijo backtracking; the directional derivative is g . dir < 0.
        const double slope = cur.gradient.dot(dir);
        const double noise = 16.0 * std::numeric_limits<double>::epsilon() *
                             (1.0 + std::abs(cur_tilt.log_normalizer) + beta.cwiseAbs().dot(rows.targets.cwiseAbs()));
        double step = 1.0;
        bool accepted = false;
        Tilt trial_tilt;
        DualEvaluation trial;
        for (int h = 0; h <= (res.converged ? 0 : max_halvings); ++h, step *= 0.5) {
            const Eigen::VectorXd cand = beta + step * dir;
            try {
                trial = evaluate_dual(prior, rows, cand, &trial_tilt);
            } catch (const NumericOverflowError&) {
                continue;
            }
            const bool sufficient = trial.value <= cur.value + armijo_c1 * step * slope;
            // Near the optimum the dual decrease is below the rounding error of
            // log Z + beta.t, which grows with the size of its terms; accept a
            // step that reduces the residual without raising D beyond that.
            const bool rounding_tie = trial.value <= cur.value + noise && max_abs(trial.gradient) < resid;
            if (res.converged) {
                accepted = max_abs(trial.gradient) <= 0.5 * resid && trial.value <= cur.value + noise;
                if (accepted) beta = cand;
                break;
            }
            if (sufficient || rounding_tie) {
                beta = cand;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (res.converged) --res.iterations;  // a rejected polishing step is not an iteration
            break;
        }

        levenberg = step == 1.0 ? levenberg * 0.1 : std::max(levenberg * 10.0, cfg.damping);
        cur = std::move(trial);
        cur_tilt = std::move(trial_tilt);
        res.trace.push_back(cur.value);
    }

    res.max_residual = max_abs(cur.gradient);
    res.hessian = cur.hessian;

    // Dependent features leave beta determined only up to the Hessian's null
    // space, along which q does not move. Report the minimum-norm choice.
    if (res.converged && m > 0) {
        const Eigen::MatrixXd null = null_space(cur.hessian);
        if (null.cols() > 0) {
            res.ridge_engaged = true;
            beta -= null * (null.transpose() * beta);
            if (beta.cwiseAbs().maxCoeff() <= 1e-15) beta.setZero();
            cur = evaluate_dual(prior, rows, beta, &cur_tilt);
            res.max_residual = max_abs(cur.gradient);
        }
    }
    res.beta = std::move(beta);
    res.tilt = std::move(cur_tilt);
    return res;
}

inline bool kkt_sign_ok(ConstraintKind kind, double beta) {
    constexpr double slack = 1e-12;
    if (kind == ConstraintKind::upper_bound) return beta >= -slack;
    if (kind == ConstraintKind::lower_bound) return beta <= slack;
    return true;
}

} // namespace detail

/// Dual objective, gradient and Hessian at `beta`, treating every constraint
/// in `cs` as an equality.
[[nodiscard]] inline DualEvaluation dual_objective(std::span<const double> beta, const Distribution& prior,
                                                   const ConstraintSet& cs) {
    cs.require_states(prior.size(), "dual_objective");
    if (beta.size() != cs.size()) throw ShapeError("dual_objective: one multiplier per constraint is required");
    const auto rows = detail::all_rows(cs);
    Eigen::VectorXd b(static_cast<Eigen::Index>(beta.size()));
    for (std::size_t k = 0; k < beta.size(); ++k) b[static_cast<Eigen::Index>(k)] = beta[k];
    return detail::evaluate_dual(prior, rows, b);
}

/// Posterior closest in relative entropy to `prior` among the distributions
/// satisfying `cs`.
///
/// `initial_multipliers`, when given, has one entry per constraint and seeds
/// the Newton iteration; the default start is beta = 0, i.e. q = prior.
[[nodiscard]] inline MreSolution solve_mre(const Distribution& prior, const ConstraintSet& cs,
                                           const SolverConfig& cfg = {},
                                           std::span<const double> initial_multipliers = {}) {
    cfg.validate();
    cs.require_states(prior.size(), "solve_mre");
    if (!initial_multipliers.empty() && initial_multipliers.size() != cs.size()) {
        throw ShapeError("solve_mre: initial multipliers need one entry per constraint");
    }

    auto report = check_feasibility(cs, prior);
    if (report.status != FeasibilityStatus::strictly_feasible) throw FeasibilityError(std::move(report));

    const std::size_t total = cs.size();
    std::vector<double> beta_all(total, 0.0);
    if (!initial_multipliers.empty()) std::copy(initial_multipliers.begin(), initial_multipliers.end(), beta_all.begin());

    std::vector<bool> active(total, false);
    for (std::size_t k = 0; k < total; ++k) active[k] = !cs[k].is_bound();

    int iterations = 0;
    constexpr int max_outer = 100;
    for (int outer = 0; outer < max_outer; ++outer) {
        detail::EqualityRows rows;
        std::vector<double> targets;
        for (std::size_t k = 0; k < total; ++k) {
            if (!active[k]) continue;
            rows.features.push_back(cs[k].feature.values());
            rows.origin.push_back(k);
            targets.push_back(cs[k].target);
        }
        rows.targets = Eigen::Map<Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
        Eigen::VectorXd beta0(static_cast<Eigen::Index>(rows.origin.size()));
        for (std::size_t r = 0; r < rows.origin.size(); ++r) beta0[static_cast<Eigen::Index>(r)] = beta_all[rows.origin[r]];

        auto nr = detail::newton_solve(prior, rows, beta0, cfg);
        iterations += nr.iterations;

        std::fill(beta_all.begin(), beta_all.end(), 0.0);
        for (std::size_t r = 0; r < rows.origin.size(); ++r) beta_all[rows.origin[r]] = nr.beta[static_cast<Eigen::Index>(r)];

        MreSolution sol{Distribution(nr.tilt.q), beta_all, nr.tilt.log_normalizer, iterations, 0.0, {}, nr.ridge_engaged,
                        std::move(nr.trace)};
        for (std::size_t k = 0; k < total; ++k) {
            if (active[k] && cs[k].is_bound()) sol.active_bounds.push_back(k);
        }
        auto resid = residuals(cs, sol.posterior);
        sol.max_residual = resid.empty() ? 0.0 : std::abs(*std::max_element(resid.begin(), resid.end(), [](double a, double b) {
            return std::abs(a) < std::abs(b);
        }));

        if (!nr.converged) {
            // A dependency among the active features whose targets disagree
            // shows up as gradient that the Hessian cannot reach.
            const auto null = detail::null_space(nr.hessian);
            Eigen::VectorXd grad(static_cast<Eigen::Index>(rows.origin.size()));
            for (std::size_t r = 0; r < rows.origin.size(); ++r) {
                grad[static_cast<Eigen::Index>(r)] = -resid[rows.origin[r]];
            }
            if (null.cols() > 0 && detail::max_abs(null.transpose() * grad) > 0.1 * cfg.tolerance) {
                std::vector<std::size_t> dependent;
                for (Eigen::Index r = 0; r < null.rows(); ++r) {
                    if (null.row(r).cwiseAbs().maxCoeff() > 1e-8) dependent.push_back(rows.origin[static_cast<std::size_t>(r)]);
                }
                throw DegenerateConstraintsError(std::move(dependent));
            }
            throw NonConvergenceError(std::move(sol), std::move(resid));
        }

        // Drop the active bound whose multiplier has the most wrong sign.
        std::optional<std::size_t> drop;
        double worst_sign = 0.0;
        for (std::size_t k : sol.active_bounds) {
            if (!detail::kkt_sign_ok(cs[k].kind, beta_all[k])) {
                const double wrong = std::abs(beta_all[k]);
                if (wrong > worst_sign) {
                    worst_sign = wrong;
                    drop = k;
                }
            }
        }
        if (drop) {
            active[*drop] = false;
            beta_all[*drop] = 0.0;
            continue;
        }

        // Otherwise activate the most violated inactive bound.
        std::optional<std::size_t> add;
        double worst_violation = cfg.tolerance;
        for (std::size_t k = 0; k < total; ++k) {
            if (active[k] || !cs[k].is_bound()) continue;
            if (resid[k] > worst_violation) {
                worst_violation = resid[k];
                add = k;
            }
        }
        if (add) {
            active[*add] = true;
            continue;
        }
        return sol;
    }
    throw NonConvergenceError(MreSolution{prior, beta_all, 0.0, iterations, std::numeric_limits<double>::infinity(), {}, false, {}},
                              residuals(cs, prior));
}

/// Maximum-entropy estimate: MRE from the uniform distribution on n states.
[[nodiscard]] inline MreSolution solve_maxent(std::size_t n, const ConstraintSet& cs, const SolverConfig& cfg = {}) {
    return solve_mre(Distribution::uniform(n), cs, cfg);
}

/// Applies the stages in order, each starting from the previous posterior.
[[nodiscard]] inline std::vector<MreSolution> chain_update(const Distribution& prior, const std::vector<ConstraintSet>& stages,
                                                           const SolverConfig& cfg = {}) {
    std::vector<MreSolution> out;
    out.reserve(stages.size());
    const Distribution* current = &prior;
    for (std::size_t t = 0; t < stages.size(); ++t) {
        try {
            out.push_back(solve_mre(*current, stages[t], cfg));
        } catch (const FeasibilityError& e) {
            throw e.at_stage(t);
        } catch (const NonConvergenceError& e) {
            throw e.at_stage(t);
        } catch (const DegenerateConstraintsError& e) {
            throw e.at_stage(t);
        }
        current = &out.back().posterior;
    }
    return out;
}

struct PythagoreanAudit {
    double lhs = 0.0;  ///< H(q_dagger, prior)
    double rhs = 0.0;  ///< H(q_dagger, posterior) + H(posterior, prior)
    double gap = 0.0;
};

/// Checks H(q', p) = H(q', p o I) + H(p o I, p) for a distribution q' that
/// satisfies the equality constraints.
[[nodiscard]] inline PythagoreanAudit pythagorean_check(const Distribution& q_dagger, const Distribution& prior,
                                                        const ConstraintSet& cs, const SolverConfig& cfg = {}) {
    if (q_dagger.size() != prior.size()) throw ShapeError("pythagorean_check: distributions have different lengths");
    cs.require_states(prior.size(), "pythagorean_check");
    for (const auto& c : cs) {
        if (c.is_bound()) throw PreconditionError("pythagorean_check: only equality constraints are supported");
    }
    const auto r = residuals(cs, q_dagger);
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (std::abs(r[k]) > 1e-9) {
            throw PreconditionError("pythagorean_check: q_dagger violates constraint " + std::to_string(k));
        }
    }

    const auto sol = solve_mre(prior, cs, cfg);
    PythagoreanAudit audit;
    audit.lhs = relative_entropy(q_dagger, prior);
    audit.rhs = relative_entropy(q_dagger, sol.posterior) + relative_entropy(sol.posterior, prior);
    audit.gap = std::isinf(audit.lhs) && std::isinf(audit.rhs) ? 0.0 : audit.lhs - audit.rhs;
    return audit;
}

/// Information supplied by the constraints beyond what the prior already
/// holds: H(p o I, p).
[[nodiscard]] inline double information_in_constraints(const Distribution& prior, const ConstraintSet& cs,
                                                       const SolverConfig& cfg = {}, LogBase base = LogBase::natural) {
    return relative_entropy(solve_mre(prior, cs, cfg).posterior, prior, base);
}

} // namespace mrekit
