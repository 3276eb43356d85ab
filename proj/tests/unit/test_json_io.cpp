#include "mrekit/json_io.hpp"

#include "support/random_instances.hpp"

#include <gtest/gtest.h>

using namespace mrekit;
using io::Json;
namespace ts = mrekit::test_support;

namespace {

TEST(ConstraintJson, ParsesAllKinds) {
    const auto doc = Json::parse(R"({"constraints":[
        {"feature":[1,2,3],"kind":"equality","target":2.5},
        {"feature":[0,1,0],"kind":"lower_bound","target":0.1},
        {"feature":[0,0,1],"kind":"upper_bound","target":0.9},
        {"feature":[1,1,0],"target":0.4}]})");
    const auto cs = io::parse_constraint_set(doc);
    ASSERT_EQ(cs.size(), 4u);
    EXPECT_EQ(cs[0].kind, ConstraintKind::equality);
    EXPECT_EQ(cs[1].kind, ConstraintKind::lower_bound);
    EXPECT_EQ(cs[2].kind, ConstraintKind::upper_bound);
    EXPECT_EQ(cs[3].kind, ConstraintKind::equality);
    EXPECT_EQ(cs[0].target, 2.5);
}

TEST(ConstraintJson, ErrorsCarryJsonPointer) {
    const auto expect_at = [](const char* text, const std::string& where) {
        try {
            (void)io::parse_constraint_set(Json::parse(text));
            FAIL() << "expected ParseError for " << text;
        } catch (const io::ParseError& e) {
            EXPECT_EQ(e.where(), where) << e.what();
        }
    };
    expect_at(R"({})", "/constraints");
    expect_at(R"({"constraints":[{"feature":[1,2],"target":"x"}]})", "/constraints/0/target");
    expect_at(R"({"constraints":[{"feature":[1,"a"],"target":1}]})", "/constraints/0/feature/1");
    expect_at(R"({"constraints":[{"feature":[1,2],"kind":"between","target":1}]})", "/constraints/0/kind");
    expect_at(R"({"constraints":[{"feature":[1,2],"target":1},{"feature":[1],"target":1}]})", "/constraints/1");
}

TEST(ConstraintJson, RoundTrip) {
    ts::Rng rng(41);
    for (int t = 0; t < 20; ++t) {
        const auto inst = ts::random_equality_instance(rng, 5, 3);
        auto cs = inst.constraints;
        cs.at_most(ts::random_feature(rng, 5), ts::uniform(rng, -1, 1));
        const auto back = io::parse_constraint_set(Json::parse(io::constraint_set_to_json(cs).dump()));
        ASSERT_EQ(back.size(), cs.size());
        for (std::size_t k = 0; k < cs.size(); ++k) {
            EXPECT_EQ(back[k].feature, cs[k].feature);
            EXPECT_EQ(back[k].kind, cs[k].kind);
            EXPECT_EQ(back[k].target, cs[k].target);
        }
    }
}

TEST(ProblemFile, PriorOrN) {
    EXPECT_THROW((void)io::parse_problem(Json::parse(R"({"constraints":[]})")), io::ParseError);
    EXPECT_THROW((void)io::parse_problem(Json::parse(R"({"n":3,"prior":[1,0,0]})")), io::ParseError);
    EXPECT_THROW((void)io::parse_problem(Json::parse(R"({"n":0})")), io::ParseError);
    EXPECT_THROW((void)io::parse_problem(Json::parse(R"({"prior":[0.5,0.6]})")), io::ParseError);

    const auto pf = io::parse_problem(Json::parse(
        R"({"n":6,"constraints":[{"feature":[1,2,3,4,5,6],"target":4.5}],"base":"bits",
            "solver":{"tolerance":1e-12,"max_iterations":7,"damping":0.5,"ridge":1e-10}})"));
    EXPECT_EQ(pf.n, std::optional<std::size_t>{6});
    EXPECT_EQ(pf.constraints.size(), 1u);
    EXPECT_EQ(pf.base, std::optional{LogBase::bits});
    EXPECT_EQ(pf.solver.tolerance, 1e-12);
    EXPECT_EQ(pf.solver.max_iterations, 7);
    EXPECT_EQ(pf.solver.damping, 0.5);
    EXPECT_EQ(pf.solver.ridge, 1e-10);
}

TEST(ProblemFile, Stages) {
    const auto pf = io::parse_problem(Json::parse(
        R"({"prior":[0.25,0.25,0.25,0.25],"stages":[{"constraints":[{"feature":[0,1,2,3],"target":2}]},
                                                     {"constraints":[]}]})"));
    ASSERT_EQ(pf.stages.size(), 2u);
    EXPECT_EQ(pf.stages[0].size(), 1u);
    EXPECT_TRUE(pf.stages[1].empty());
    EXPECT_THROW((void)io::parse_problem(Json::parse(R"({"n":2,"stages":[],"constraints":[]})")), io::ParseError);
    try {
        (void)io::parse_problem(Json::parse(R"({"n":2,"solver":{"tolerence":1}})"));
        FAIL();
    } catch (const io::ParseError& e) {
        EXPECT_EQ(e.where(), "/solver/tolerence");
    }
}

TEST(ResultJson, SolutionRoundTripsLosslessly) {
    ConstraintSet cs;
    cs.equal({1, 2, 3, 4, 5, 6}, 4.5);
    const auto sol = solve_maxent(6, cs);
    const auto text = io::to_json(sol).dump();
    const auto back = Json::parse(text);
    EXPECT_EQ(back["posterior"].get<std::vector<double>>(), sol.posterior.vector());
    EXPECT_EQ(back["multipliers"].get<std::vector<double>>(), sol.multipliers);
    EXPECT_EQ(back["log_normalizer"].get<double>(), sol.log_normalizer);
    EXPECT_EQ(io::parse_prior_source(back), sol.posterior);
    // Field order is fixed.
    EXPECT_EQ(text.find("\"posterior\""), 1u);
}

TEST(ResultJson, FeasibilityReport) {
    ConstraintSet cs;
    cs.equal({1, 2, 3}, 5.0);
    const auto doc = io::to_json(check_feasibility(cs, Distribution::uniform(3)));
    EXPECT_EQ(doc["status"], "infeasible");
    EXPECT_TRUE(doc["witness"].is_null());
    EXPECT_EQ(doc["detail"][0], "exterior");
}

} // namespace
