#include "adeqsim/lp.hpp"
#include "lp_oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace adeqsim::lp;
using namespace lp_oracle;

namespace
{

double
dual_objective(const LpProblem& lp, const LpSolution& s)
{
    double z = 0.0;
    for (int i = 0; i < lp.num_rows(); ++i)
    {
        const double y = s.row_duals[i];
        if (y > 1e-9)
        {
            z += y * lp.row(i).lower;
        }
        else if (y < -1e-9)
        {
            z += y * lp.row(i).upper;
        }
    }
    for (int j = 0; j < lp.num_variables(); ++j)
    {
        const double d = s.reduced_costs[j];
        if (d > 1e-9)
        {
            z += d * lp.lower(j);
        }
        else if (d < -1e-9)
        {
            z += d * lp.upper(j);
        }
    }
    return z;
}

} // namespace

TEST(Lp, ThreeBoundStub)
{
    LpProblem lp;
    const int x = lp.add_variable(0.0, kInf, 1.0);
    lp.add_ge({{x, 1.0}}, 3.0);
    const LpSolution s = solve_lp(lp);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.x[0], 3.0, 1e-9);
    EXPECT_NEAR(s.objective, 3.0, 1e-9);
    EXPECT_NEAR(s.row_duals[0], 1.0, 1e-9);
}

TEST(Lp, InfeasibleReported)
{
    LpProblem lp;
    const int x = lp.add_variable(0.0, 1.0, 1.0);
    lp.add_ge({{x, 1.0}}, 2.0);
    EXPECT_EQ(solve_lp(lp).status, LpStatus::kInfeasible);
}

TEST(Lp, UnboundedReported)
{
    LpProblem lp;
    const int x = lp.add_variable(0.0, kInf, -1.0);
    const int y = lp.add_variable(0.0, kInf, 0.0);
    lp.add_le({{x, 1.0}, {y, -1.0}}, 1.0);
    EXPECT_EQ(solve_lp(lp).status, LpStatus::kUnbounded);
}

TEST(Lp, FreeVariablesAndEquality)
{
    // min x + 2y, x + y = 4, x - y in [-1, 1], x, y free
    LpProblem lp;
    const int x = lp.add_variable(-kInf, kInf, 1.0);
    const int y = lp.add_variable(-kInf, kInf, 2.0);
    lp.add_eq({{x, 1.0}, {y, 1.0}}, 4.0);
    lp.add_row({{x, 1.0}, {y, -1.0}}, -1.0, 1.0);
    const LpSolution s = solve_lp(lp);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.x[0], 2.5, 1e-9);
    EXPECT_NEAR(s.x[1], 1.5, 1e-9);
    EXPECT_NEAR(s.objective, 5.5, 1e-9);
}

TEST(Lp, BadlyScaledRows)
{
    LpProblem lp;
    const int x = lp.add_variable(0.0, 1e6, -1.0);
    const int y = lp.add_variable(0.0, 1e-3, -1e3);
    lp.add_le({{x, 1e-4}, {y, 1e3}}, 50.0);
    const LpSolution s = solve_lp(lp);
    ASSERT_TRUE(s.optimal());
    EXPECT_LT(lp.max_violation(s.x), 1e-7);
    // Row capacity is worth more through x: 1e4 objective per unit versus 1.
    EXPECT_NEAR(s.x[0], 500000.0, 1e-4);
    EXPECT_NEAR(s.x[1], 0.0, 1e-12);
}

TEST(Lp, DumpIsStable)
{
    LpProblem lp;
    const int x = lp.add_variable(0.0, 2.0, 1.5, "g0");
    lp.add_le({{x, 2.0}}, 3.0);
    std::ostringstream a;
    std::ostringstream b;
    dump_lp(lp, a);
    dump_lp(lp, b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str(), "MIN 1.5*x0\nR0 -inf <= 2*x0 <= 3\nB x0 0 2 g0\n");
}

TEST(Lp, MatchesVertexEnumeration)
{
    std::mt19937_64 rng(20240611);
    int feasible = 0;
    for (int trial = 0; trial < 200; ++trial)
    {
        RandomLp r = random_lp(rng);
        double oracle = 0.0;
        const bool has = vertex_optimum(r.hs, r.c, oracle);
        const LpSolution s = solve_lp(r.lp);
        if (!has)
        {
            EXPECT_EQ(s.status, LpStatus::kInfeasible) << "trial " << trial;
            continue;
        }
        ++feasible;
        ASSERT_TRUE(s.optimal()) << "trial " << trial << " " << to_string(s.status);
        EXPECT_NEAR(s.objective, oracle, 1e-6 * (1.0 + std::abs(oracle))) << "trial " << trial;
        EXPECT_LT(r.lp.max_violation(s.x), 1e-7) << "trial " << trial;
        EXPECT_NEAR(dual_objective(r.lp, s), s.objective, 1e-6 * (1.0 + std::abs(oracle)))
            << "trial " << trial;
    }
    EXPECT_GT(feasible, 100);
}

TEST(Lp, Deterministic)
{
    std::mt19937_64 rng(7);
    RandomLp r = random_lp(rng);
    const LpSolution a = solve_lp(r.lp);
    const LpSolution b = solve_lp(r.lp);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Lp, RepeatedTermsAreSummed)
{
    // x - y + x = 2x - y; the split terms must act like one coefficient
    LpProblem p;
    const int x = p.add_variable(0.0, 10.0, -1.0);
    const int y = p.add_variable(0.0, 3.0, 0.0);
    p.add_le({{x, 1.0}, {y, -1.0}, {x, 1.0}}, 4.0);
    ASSERT_EQ(p.row(0).terms.size(), 2u);
    EXPECT_EQ(p.row(0).terms[0].coef, 2.0);
    const LpSolution s = solve_lp(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.x[x], 3.5, 1e-9);
    EXPECT_NEAR(s.x[y], 3.0, 1e-9);
    EXPECT_LT(p.max_violation(s.x), 1e-9);
}
