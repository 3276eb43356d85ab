// mrekit command-line front end.
//
//   mrekit measure {entropy|relent|mutinfo|infogain} [input] [--base bits]
//   mrekit fit [problem] [--maxent --n N] [--prior-from-file path] [--tol x] [--max-iter k]
//   mrekit alpha-star --p 0.75
//
// stdout carries only the result document; diagnostics go to stderr.
// Exit codes: 0 ok, 2 parse, 3 measure domain, 4 infeasible, 5 non-convergence.

#include "mrekit/json_io.hpp"
#include "mrekit/mrekit.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

namespace {

using mrekit::io::Json;

enum ExitCode : int { ok = 0, parse_failure = 2, measure_domain = 3, infeasible = 4, no_convergence = 5 };

struct Outcome {
    Json doc;
    int code = ok;
};

void configure_logging() {
    auto logger = spdlog::stderr_logger_st("mrekit");
    logger->set_pattern("mrekit: %l: %v");
    const char* env = std::getenv("MREKIT_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug") {
        logger->set_level(spdlog::level::debug);
    } else if (level == "info") {
        logger->set_level(spdlog::level::info);
    } else {
        logger->set_level(spdlog::level::err);
    }
    spdlog::set_default_logger(logger);
}

Json read_json(const std::string& path) {
    std::string text;
    if (path == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), {});
    } else {
        std::ifstream in(path);
        if (!in) throw mrekit::io::ParseError("", "cannot open " + path);
        text.assign(std::istreambuf_iterator<char>(in), {});
    }
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw mrekit::io::ParseError("", (path == "-" ? std::string("<stdin>") : path) + ": " + e.what());
    }
}

// A measure value, with the distinguished +inf spelled "inf".
Json measure_value(double v) { return std::isinf(v) ? Json("inf") : Json(v); }

Outcome run_measure(const std::string& which, const std::string& input, mrekit::LogBase base) {
    const Json doc = read_json(input);
    Json measures;
    double value = 0.0;
    if (which == "entropy") {
        value = mrekit::entropy(mrekit::io::parse_distribution(mrekit::io::detail::require(doc, "distribution", ""), "/distribution"), base);
    } else if (which == "relent") {
        const auto q = mrekit::io::parse_distribution(mrekit::io::detail::require(doc, "q", ""), "/q");
        const auto p = mrekit::io::parse_distribution(mrekit::io::detail::require(doc, "p", ""), "/p");
        if (q.size() != p.size()) throw mrekit::io::ParseError("/p", "length differs from /q");
        value = mrekit::relative_entropy(q, p, base);
    } else if (which == "mutinfo") {
        const auto rows = mrekit::io::parse_matrix(mrekit::io::detail::require(doc, "joint", ""), "/joint");
        std::optional<mrekit::JointDistribution> joint;
        try {
            joint.emplace(rows);
        } catch (const mrekit::Error& e) {
            throw mrekit::io::ParseError("/joint", e.what());
        }
        value = mrekit::mutual_information(*joint, base);
    } else {
        const auto& prior = mrekit::io::detail::require(doc, "prior", "");
        const auto& posterior = mrekit::io::detail::require(doc, "posterior", "");
        if (prior.is_array() && posterior.is_array()) {
            const auto pr = mrekit::io::parse_distribution(prior, "/prior");
            const auto po = mrekit::io::parse_distribution(posterior, "/posterior");
            if (pr.size() != po.size()) throw mrekit::io::ParseError("/posterior", "length differs from /prior");
            value = mrekit::expected_information_gain(po, pr, base);
        } else {
            if (!prior.is_number()) throw mrekit::io::ParseError("/prior", "expected a number or an array");
            if (!posterior.is_number()) throw mrekit::io::ParseError("/posterior", "expected a number or an array");
            value = mrekit::information_gain(prior.get<double>(), posterior.get<double>(), base);
        }
    }
    measures[which] = measure_value(value);
    Outcome out{Json{{"base", mrekit::io::base_name(base)}, {"measures", std::move(measures)}}, ok};
    if (std::isinf(value)) {
        spdlog::error("{} is infinite: the first distribution puts mass where the second has none", which);
        out.code = measure_domain;
    }
    return out;
}

struct FitOptions {
    std::string input = "-";
    bool maxent = false;
    std::optional<std::size_t> n;
    std::optional<std::string> prior_file;
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<std::string> base;
};

Json solution_document(const mrekit::MreSolution& s, const mrekit::Distribution& prior, mrekit::LogBase base) {
    Json doc = mrekit::io::to_json(s);
    doc["measures"] = Json{{"base", mrekit::io::base_name(base)},
                           {"information", mrekit::relative_entropy(s.posterior, prior, base)},
                           {"entropy", mrekit::entropy(s.posterior, base)}};
    return doc;
}

Outcome run_fit(const FitOptions& opt) {
    auto problem = mrekit::io::parse_problem(read_json(opt.input));
    if (opt.tol) problem.solver.tolerance = *opt.tol;
    if (opt.max_iter) problem.solver.max_iterations = *opt.max_iter;
    const mrekit::LogBase base =
        opt.base ? mrekit::io::parse_base(*opt.base, "--base") : problem.base.value_or(mrekit::LogBase::natural);

    std::optional<mrekit::Distribution> prior = problem.prior;
    if (opt.prior_file) {
        prior = mrekit::io::parse_prior_source(read_json(*opt.prior_file));
    } else if (opt.maxent || problem.n) {
        const auto n = opt.n ? opt.n : problem.n;
        if (!n) throw mrekit::io::ParseError("--n", "--maxent needs a state count");
        prior = mrekit::Distribution::uniform(*n);
    }

    try {
        problem.solver.validate();
    } catch (const mrekit::Error& e) {
        throw mrekit::io::ParseError("/solver", e.what());
    }

    if (problem.stages.empty()) {
        spdlog::info("solving {} constraints over {} states", problem.constraints.size(), prior->size());
        problem.constraints.require_states(prior->size(), "fit");
        const auto sol = mrekit::solve_mre(*prior, problem.constraints, problem.solver);
        spdlog::debug("converged in {} iterations, max residual {}", sol.iterations, sol.max_residual);
        return {solution_document(sol, *prior, base), ok};
    }

    for (const auto& stage : problem.stages) stage.require_states(prior->size(), "fit");
    spdlog::info("chaining {} stages over {} states", problem.stages.size(), prior->size());
    const auto trajectory = mrekit::chain_update(*prior, problem.stages, problem.solver);
    Json doc = solution_document(trajectory.back(), *prior, base);
    Json stages = Json::array();
    for (const auto& s : trajectory) stages.push_back(mrekit::io::to_json(s));
    doc["stages"] = std::move(stages);
    return {std::move(doc), ok};
}

Outcome run_alpha_star(double p) {
    const auto sc = mrekit::alpha_star(p);
    return {Json{{"p", sc.p},
                 {"alpha_star", sc.alpha_star},
                 {"g", mrekit::g_function(sc.alpha_star, sc.p)},
                 {"divergence_nats", sc.divergence_at_root},
                 {"divergence_bits", sc.divergence_at_root * mrekit::bits_per_nat}},
            ok};
}

Json stage_field(std::optional<std::size_t> stage) { return stage ? Json(*stage) : Json(nullptr); }

} // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Minimum relative entropy inference and information measures"};
    app.require_subcommand(1);
    std::optional<std::string> output;

    auto* measure = app.add_subcommand("measure", "Evaluate an information measure");
    std::string which;
    std::string measure_input = "-";
    std::string measure_base = "nats";
    measure->add_option("which", which, "entropy | relent | mutinfo | infogain")
        ->required()
        ->check(CLI::IsMember({"entropy", "relent", "mutinfo", "infogain"}));
    measure->add_option("input", measure_input, "JSON input file ('-' for stdin)");
    measure->add_option("--base", measure_base, "nats | bits")->check(CLI::IsMember({"nats", "bits"}));
    measure->add_option("--output", output, "Write the result here instead of stdout");

    auto* fit = app.add_subcommand("fit", "Solve a minimum relative entropy problem");
    FitOptions fit_opt;
    fit->add_option("input", fit_opt.input, "Problem file ('-' for stdin)");
    fit->add_flag("--maxent", fit_opt.maxent, "Use the uniform prior on --n states");
    fit->add_option("--n", fit_opt.n, "State count for --maxent");
    fit->add_option("--prior-from-file", fit_opt.prior_file, "Read the prior from this JSON file");
    fit->add_option("--tol", fit_opt.tol, "Max constraint residual");
    fit->add_option("--max-iter", fit_opt.max_iter, "Newton iterations per active-set pass");
    fit->add_option("--base", fit_opt.base, "nats | bits")->check(CLI::IsMember({"nats", "bits"}));
    fit->add_option("--output", output, "Write the result here instead of stdout");

    auto* alpha = app.add_subcommand("alpha-star", "Karp-Pearl constant for branch-cost probability p");
    double p = 0.0;
    alpha->add_option("--p", p, "Probability in (1/2, 1)")->required();
    alpha->add_option("--output", output, "Write the result here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return parse_failure;
    }

    Outcome out;
    try {
        if (*measure) {
            out = run_measure(which, measure_input, mrekit::io::parse_base(measure_base, "--base"));
        } else if (*fit) {
            out = run_fit(fit_opt);
        } else {
            out = run_alpha_star(p);
        }
    } catch (const mrekit::io::ParseError& e) {
        spdlog::error("parse error: {}", e.what());
        return parse_failure;
    } catch (const mrekit::FeasibilityError& e) {
        spdlog::error("{}", e.what());
        out = {Json{{"error", "infeasible"}, {"stage", stage_field(e.stage())}, {"feasibility", mrekit::io::to_json(e.report())}},
               infeasible};
    } catch (const mrekit::NonConvergenceError& e) {
        spdlog::error("{}", e.what());
        out = {Json{{"error", "non_convergence"},
                    {"stage", stage_field(e.stage())},
                    {"best_iterate", mrekit::io::to_json(e.best_iterate())},
                    {"residuals", e.residuals()}},
               no_convergence};
    } catch (const mrekit::DegenerateConstraintsError& e) {
        spdlog::error("{}", e.what());
        out = {Json{{"error", "degenerate_constraints"},
                    {"stage", stage_field(e.stage())},
                    {"dependent_subset", e.dependent_subset()}},
               no_convergence};
    } catch (const mrekit::DomainError& e) {
        spdlog::error("{}", e.what());
        if (*alpha) return parse_failure;
        if (*measure) return measure_domain;
        return parse_failure;
    } catch (const mrekit::Error& e) {
        spdlog::error("invalid input: {}", e.what());
        return parse_failure;
    }

    const std::string text = out.doc.dump(2) + "\n";
    if (output) {
        std::ofstream file(*output, std::ios::binary);
        if (!file) {
            spdlog::error("cannot write {}", *output);
            return parse_failure;
        }
        file << text;
    } else {
        std::cout << text;
    }
    return out.code;
}
