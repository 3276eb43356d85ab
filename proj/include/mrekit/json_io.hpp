#pragma once

// JSON schema for constraint sets, problem files and result documents.
// Documents use ordered_json so field order, and therefore the printed bytes,
// depend only on the values.

#include "mrekit/constraints.hpp"
#include "mrekit/error.hpp"
#include "mrekit/information.hpp"
#include "mrekit/solver.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mrekit::io {

using Json = nlohmann::ordered_json;

/// Malformed or schema-violating input; `where` is a JSON pointer.
class ParseError : public Error {
public:
    ParseError(const std::string& where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what), where_(where) {}

    [[nodiscard]] const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

namespace detail {

inline const Json& require(const Json& obj, const std::string& key, const std::string& at) {
    if (!obj.is_object()) throw ParseError(at, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(at + "/" + key, "missing field");
    return *it;
}

inline double number(const Json& v, const std::string& at) {
    if (!v.is_number()) throw ParseError(at, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(at, "number is not finite");
    return d;
}

} // namespace detail

[[nodiscard]] inline std::vector<double> parse_vector(const Json& v, const std::string& at) {
    if (!v.is_array()) throw ParseError(at, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(detail::number(v[i], at + "/" + std::to_string(i)));
    return out;
}

[[nodiscard]] inline std::vector<std::vector<double>> parse_matrix(const Json& v, const std::string& at) {
    if (!v.is_array() || v.empty()) throw ParseError(at, "expected a non-empty array of rows");
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < v.size(); ++r) out.push_back(parse_vector(v[r], at + "/" + std::to_string(r)));
    return out;
}

[[nodiscard]] inline Distribution parse_distribution(const Json& v, const std::string& at) {
    auto values = parse_vector(v, at);
    try {
        return Distribution(std::move(values));
    } catch (const Error& e) {
        throw ParseError(at, e.what());
    }
}

[[nodiscard]] inline ConstraintKind parse_kind(const Json& v, const std::string& at) {
    if (v == "equality") return ConstraintKind::equality;
    if (v == "lower_bound") return ConstraintKind::lower_bound;
    if (v == "upper_bound") return ConstraintKind::upper_bound;
    throw ParseError(at, "kind must be \"equality\", \"lower_bound\" or \"upper_bound\"");
}

/// Parses the array held under "constraints".
[[nodiscard]] inline ConstraintSet parse_constraint_list(const Json& list, const std::string& at) {
    if (!list.is_array()) throw ParseError(at, "expected an array of constraints");
    ConstraintSet cs;
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string here = at + "/" + std::to_string(k);
        const auto& item = list[k];
        auto feature = parse_vector(detail::require(item, "feature", here), here + "/feature");
        const auto kind = item.contains("kind") ? parse_kind(item["kind"], here + "/kind") : ConstraintKind::equality;
        const double target = detail::number(detail::require(item, "target", here), here + "/target");
        try {
            cs.add({FeatureFunction(std::move(feature)), kind, target});
        } catch (const Error& e) {
            throw ParseError(here, e.what());
        }
    }
    return cs;
}

/// `{"constraints": [{"feature": [...], "kind": ..., "target": x}, ...]}`
[[nodiscard]] inline ConstraintSet parse_constraint_set(const Json& doc, const std::string& at = "") {
    return parse_constraint_list(detail::require(doc, "constraints", at), at + "/constraints");
}

[[nodiscard]] inline Json constraint_set_to_json(const ConstraintSet& cs) {
    Json list = Json::array();
    for (const auto& c : cs) {
        list.push_back(Json{{"feature", std::vector<double>(c.feature.values().begin(), c.feature.values().end())},
                            {"kind", std::string(to_string(c.kind))},
                            {"target", c.target}});
    }
    return Json{{"constraints", std::move(list)}};
}

[[nodiscard]] inline LogBase parse_base(const std::string& s, const std::string& at) {
    if (s == "nats") return LogBase::natural;
    if (s == "bits") return LogBase::bits;
    throw ParseError(at, "base must be \"nats\" or \"bits\"");
}

[[nodiscard]] constexpr const char* base_name(LogBase b) noexcept { return b == LogBase::bits ? "bits" : "nats"; }

/// Input to `fit`. Exactly one of prior / n is present.
struct ProblemFile {
    std::optional<Distribution> prior;
    std::optional<std::size_t> n;
    ConstraintSet constraints;
    std::vector<ConstraintSet> stages;  ///< non-empty for a chained update
    std::optional<LogBase> base;
    SolverConfig solver;
};

[[nodiscard]] inline ProblemFile parse_problem(const Json& doc) {
    if (!doc.is_object()) throw ParseError("", "problem file must be a JSON object");
    ProblemFile pf;
    const bool has_prior = doc.contains("prior");
    const bool has_n = doc.contains("n");
    if (has_prior == has_n) throw ParseError("", "exactly one of \"prior\" and \"n\" must be present");
    if (has_prior) pf.prior = parse_distribution(doc["prior"], "/prior");
    if (has_n) {
        const auto& n = doc["n"];
        if (!n.is_number_integer() || n.get<long long>() < 1) throw ParseError("/n", "expected a positive integer");
        pf.n = n.get<std::size_t>();
    }

    if (doc.contains("stages")) {
        if (doc.contains("constraints")) throw ParseError("", "give either \"constraints\" or \"stages\", not both");
        const auto& stages = doc["stages"];
        if (!stages.is_array() || stages.empty()) throw ParseError("/stages", "expected a non-empty array");
        for (std::size_t t = 0; t < stages.size(); ++t) {
            pf.stages.push_back(parse_constraint_set(stages[t], "/stages/" + std::to_string(t)));
        }
    } else if (doc.contains("constraints")) {
        pf.constraints = parse_constraint_list(doc["constraints"], "/constraints");
    }

    if (doc.contains("base")) {
        if (!doc["base"].is_string()) throw ParseError("/base", "expected a string");
        pf.base = parse_base(doc["base"].get<std::string>(), "/base");
    }

    if (doc.contains("solver")) {
        const auto& s = doc["solver"];
        if (!s.is_object()) throw ParseError("/solver", "expected an object");
        for (const auto& [key, value] : s.items()) {
            const std::string at = "/solver/" + key;
            if (key == "tolerance") {
                pf.solver.tolerance = detail::number(value, at);
            } else if (key == "max_iterations") {
                if (!value.is_number_integer()) throw ParseError(at, "expected an integer");
                pf.solver.max_iterations = value.get<int>();
            } else if (key == "damping") {
                pf.solver.damping = detail::number(value, at);
            } else if (key == "ridge") {
                pf.solver.ridge = detail::number(value, at);
            } else {
                throw ParseError(at, "unknown solver setting");
            }
        }
    }
    return pf;
}

[[nodiscard]] inline Json to_json(const FeasibilityReport& r) {
    Json detail_list = Json::array();
    for (auto p : r.detail) detail_list.push_back(std::string(to_string(p)));
    Json doc;
    doc["status"] = std::string(to_string(r.status));
    doc["detail"] = std::move(detail_list);
    doc["witness"] = r.witness ? Json(r.witness->vector()) : Json(nullptr);
    doc["interior_margin"] = r.interior_margin;
    return doc;
}

/// posterior, multipliers, log_normalizer and diagnostics.
[[nodiscard]] inline Json to_json(const MreSolution& s) {
    Json doc;
    doc["posterior"] = s.posterior.vector();
    doc["multipliers"] = s.multipliers;
    doc["log_normalizer"] = s.log_normalizer;
    doc["diagnostics"] = Json{{"iterations", s.iterations},
                              {"max_residual", s.max_residual},
                              {"active_bounds", s.active_bounds},
                              {"ridge_engaged", s.ridge_engaged}};
    return doc;
}

/// Reads a prior from a distribution array, {"prior": [...]} or a previous
/// result document's "posterior".
[[nodiscard]] inline Distribution parse_prior_source(const Json& doc) {
    if (doc.is_array()) return parse_distribution(doc, "");
    if (doc.is_object() && doc.contains("posterior")) return parse_distribution(doc["posterior"], "/posterior");
    if (doc.is_object() && doc.contains("prior")) return parse_distribution(doc["prior"], "/prior");
    throw ParseError("", "expected a probability array, a \"prior\" field or a \"posterior\" field");
}

} // namespace mrekit::io
