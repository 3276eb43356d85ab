#pragma once

// Discrete distributions and the information measures defined over them.
// Every measure is computed in nats and converted to the requested base at
// the very end.

#include "mrekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mrekit {

enum class LogBase { natural, bits };

/// Multiply a value in nats by this to get bits.
inline constexpr double bits_per_nat = 1.0 / std::numbers::ln2;

[[nodiscard]] constexpr double in_base(double nats, LogBase base) noexcept {
    return base == LogBase::bits ? nats * bits_per_nat : nats;
}

namespace detail {

inline constexpr double normalization_tolerance = 1e-9;
inline constexpr double negative_dust = 1e-12;

// Sum that does not depend on the order of the terms: terms are sorted by
// magnitude first, so permuting states reproduces the same bits.
inline double order_free_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end(), [](double a, double b) {
        const double aa = std::abs(a);
        const double ab = std::abs(b);
        return aa < ab || (aa == ab && a < b);
    });
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

// Validates, clamps dust and renormalizes in place.
inline void normalize_probabilities(std::vector<double>& probs, const char* what) {
    if (probs.empty()) {
        throw ShapeError(std::string(what) + ": needs at least one entry");
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double& v = probs[i];
        if (!std::isfinite(v)) {
            throw DomainError(std::string(what) + ": entry " + std::to_string(i) + " is not finite");
        }
        if (v < -negative_dust) {
            throw DomainError(std::string(what) + ": entry " + std::to_string(i) + " is negative");
        }
        if (v < 0.0) v = 0.0;
    }
    const double sum = order_free_sum(probs);
    if (std::abs(sum - 1.0) > normalization_tolerance) {
        throw DomainError(std::string(what) + ": entries sum to " + std::to_string(sum) + ", not 1");
    }
    for (double& v : probs) v /= sum;
}

// x log(x / y) with the 0 log(0/y) = 0 convention; +inf when x > 0 = y.
inline double xlogxy(double x, double y) noexcept {
    if (x == 0.0) return 0.0;
    if (y == 0.0) return std::numeric_limits<double>::infinity();
    return x * std::log(x / y);
}

} // namespace detail

/// A finite probability vector. Construction enforces non-negativity and
/// normalization (within 1e-9, then divided by the sum).
class Distribution {
public:
    explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
        detail::normalize_probabilities(probs_, "Distribution");
    }

    static Distribution uniform(std::size_t n) {
        if (n == 0) throw ShapeError("Distribution::uniform: n must be >= 1");
        return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    static Distribution point_mass(std::size_t n, std::size_t at) {
        if (at >= n) throw ShapeError("Distribution::point_mass: index out of range");
        std::vector<double> v(n, 0.0);
        v[at] = 1.0;
        return Distribution(std::move(v));
    }

    [[nodiscard]] std::size_t size() const noexcept { return probs_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return probs_[i]; }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
    [[nodiscard]] const std::vector<double>& vector() const noexcept { return probs_; }
    [[nodiscard]] auto begin() const noexcept { return probs_.begin(); }
    [[nodiscard]] auto end() const noexcept { return probs_.end(); }

    friend bool operator==(const Distribution&, const Distribution&) = default;

private:
    std::vector<double> probs_;
};

/// Probability matrix p(x_i, y_j), stored row-major.
class JointDistribution {
public:
    JointDistribution(std::size_t rows, std::size_t cols, std::vector<double> probs)
        : rows_(rows), cols_(cols), probs_(std::move(probs)) {
        if (rows_ == 0 || cols_ == 0 || probs_.size() != rows_ * cols_) {
            throw ShapeError("JointDistribution: data size does not match rows x cols");
        }
        detail::normalize_probabilities(probs_, "JointDistribution");
    }

    explicit JointDistribution(const std::vector<std::vector<double>>& matrix)
        : JointDistribution(matrix.size(), matrix.empty() ? 0 : matrix.front().size(), flatten_rows(matrix)) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return probs_[i * cols_ + j]; }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }

private:
    static std::vector<double> flatten_rows(const std::vector<std::vector<double>>& matrix) {
        std::vector<double> flat;
        for (const auto& row : matrix) {
            if (row.size() != matrix.front().size()) {
                throw ShapeError("JointDistribution: ragged matrix");
            }
            flat.insert(flat.end(), row.begin(), row.end());
        }
        return flat;
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> probs_;
};

/// Row sums and column sums.
[[nodiscard]] inline std::pair<Distribution, Distribution> marginals(const JointDistribution& j) {
    std::vector<double> row(j.rows(), 0.0);
    std::vector<double> col(j.cols(), 0.0);
    for (std::size_t r = 0; r < j.rows(); ++r) {
        for (std::size_t c = 0; c < j.cols(); ++c) {
            row[r] += j(r, c);
            col[c] += j(r, c);
        }
    }
    return {Distribution(std::move(row)), Distribution(std::move(col))};
}

/// Independent joint p(x_i) q(y_j).
[[nodiscard]] inline JointDistribution outer(const Distribution& a, const Distribution& b) {
    std::vector<double> v;
    v.reserve(a.size() * b.size());
    for (double x : a) {
        for (double y : b) v.push_back(x * y);
    }
    return JointDistribution(a.size(), b.size(), std::move(v));
}

[[nodiscard]] inline Distribution flatten(const JointDistribution& j) {
    return Distribution(std::vector<double>(j.probs().begin(), j.probs().end()));
}

/// Flattened outer product, the distribution of two independent systems.
[[nodiscard]] inline Distribution product(const Distribution& a, const Distribution& b) {
    return flatten(outer(a, b));
}

/// -log p in the requested base.
[[nodiscard]] inline double self_information(double p, LogBase base = LogBase::natural) {
    if (p == 0.0) throw InfiniteInformationError("self_information: proposition has probability 0");
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("self_information: probability outside (0, 1]");
    return in_base(-std::log(p), base);
}

[[nodiscard]] inline double entropy(const Distribution& d, LogBase base = LogBase::natural) {
    std::vector<double> terms;
    terms.reserve(d.size());
    for (double p : d) {
        if (p > 0.0) terms.push_back(-p * std::log(p));
    }
    return in_base(detail::order_free_sum(std::move(terms)), base);
}

/// log(posterior / prior) for a single proposition. Negative when the
/// evidence lowers its probability.
[[nodiscard]] inline double information_gain(double prior, double posterior, LogBase base = LogBase::natural) {
    if (!(prior > 0.0 && prior <= 1.0) || !(posterior > 0.0 && posterior <= 1.0)) {
        throw DomainError("information_gain: probabilities must lie in (0, 1]");
    }
    return in_base(std::log(posterior / prior), base);
}

/// Sum q_i log(q_i / p_i). Returns +inf when q puts mass where p has none.
[[nodiscard]] inline double relative_entropy(const Distribution& q, const Distribution& p,
                                             LogBase base = LogBase::natural) {
    if (q.size() != p.size()) {
        throw ShapeError("relative_entropy: distributions have different lengths");
    }
    std::vector<double> terms(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        terms[i] = detail::xlogxy(q[i], p[i]);
    }
    double h = detail::order_free_sum(std::move(terms));
    // Rounding can leave a tiny negative value for q ~ p.
    if (h < 0.0) h = 0.0;
    return in_base(h, base);
}

/// Expected information that the evidence behind `posterior` carries about
/// the propositions; the same quantity as relative_entropy(posterior, prior).
[[nodiscard]] inline double expected_information_gain(const Distribution& posterior, const Distribution& prior,
                                                      LogBase base = LogBase::natural) {
    return relative_entropy(posterior, prior, base);
}

[[nodiscard]] inline double mutual_information(const JointDistribution& j, LogBase base = LogBase::natural) {
    const auto [row, col] = marginals(j);
    std::vector<double> terms;
    terms.reserve(j.rows() * j.cols());
    for (std::size_t r = 0; r < j.rows(); ++r) {
        for (std::size_t c = 0; c < j.cols(); ++c) {
            terms.push_back(detail::xlogxy(j(r, c), row[r] * col[c]));
        }
    }
    double h = detail::order_free_sum(std::move(terms));
    if (h < 0.0) h = 0.0;
    return in_base(h, base);
}

} // namespace mrekit
