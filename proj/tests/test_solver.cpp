#include <gtest/gtest.h>

#include <random>

#include "glab/cli/dsl.hpp"
#include "glab/solver.hpp"
#include "test_helpers.hpp"

using namespace glab;
using namespace glab::solver;
using glab::testing::poly;

namespace {

ProblemSpec spec(const std::string &text) { return cli::parse_problem(text).spec; }

const char *kEje3 = "dim 2; unknowns 1; order 2\n"
                    "P = x1*x2\n"
                    "L 2 : (2,0) -> x1^2 ; (0,2) -> x2^2 ; (1,1) -> 2\n"
                    "F 1 = 2*y1 + 2*x1*x2\n";

const char *kEps = "dim 2; unknowns 1; order 1\n"
                   "P = x1*x2\n"
                   "L 1 : (1,0) -> x1\n"
                   "F 1 = y1 - x1 - x2\n";

std::vector<Integer> a_sequence(int n_max) {
    std::vector<Integer> a{0, 1, 1};
    for (int n = 3; n <= n_max; ++n) a.push_back(Integer((n - 1) * (n - 1)) * a[n - 1] + Integer((n - 2) * (n - 3)) * a[n - 2]);
    return a;
}

Series diagonal_series(const std::vector<Integer> &a, int n_max, int trunc, int sign) {
    Series s(2, trunc);
    for (int n = 0; n <= n_max; ++n) s.add_to(MultiIndex{n, n}, Rational(sign * a[n]));
    return s;
}

} // namespace

// ---- implicit solve ----

TEST(SolveImplicit, ZeroForcingGivesZero) {
    auto p = spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> x1\nF 1 = -y1 + y1^2 + x1*y1^3\n");
    auto y = solve_implicit(p, 8);
    EXPECT_TRUE(y[0].is_zero());
    EXPECT_EQ(y[0].trunc(), 8);
}

TEST(SolveImplicit, Linear) {
    auto p = spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> x1\nF 1 = -y1 + x1\n");
    EXPECT_TRUE(solve_implicit(p, 5)[0].agrees_with(Series::variable(1, 5, 0)));
}

TEST(SolveImplicit, Quadratic) {
    auto p = spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> x1\nF 1 = -y1 + x1 + y1^2\n");
    auto y = solve_implicit(p, 3);
    EXPECT_EQ(y[0], poly(1, 3, {{{1}, 1}, {{2}, 1}, {{3}, 2}}));
}

TEST(SolveImplicit, SingularLinearPart) {
    auto p = spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> x1\nF 1 = x1*y1 + x1\n");
    EXPECT_THROW(solve_implicit(p, 4), SingularLinearPart);
}

// ---- reduction ----

TEST(Reduce, ZeroForcing) {
    auto p = spec("dim 2; unknowns 1; order 2\nP = x1*x2\nL 2 : (2,0) -> x1^2 ; (0,2) -> x2^2 ; (1,1) -> 2\nF 1 = 2*y1\n");
    auto red = reduce(p, 10);
    ASSERT_EQ(red.y.size(), 2u);
    for (const auto &ym : red.y) EXPECT_TRUE(all_zero(ym));
    EXPECT_TRUE(all_zero(red.h));
}

TEST(Reduce, EjeThreeCoefficients) {
    // y_0 solves 2 y + 2 P = 0; then 2P + 2 y_1 = 0 once L_2(P) = 2 is divided out.
    auto red = reduce(spec(kEje3), 12);
    const Series minus_p = poly(2, 12, {{{1, 1}, -1}});
    EXPECT_TRUE(red.y[0][0].agrees_with(minus_p));
    EXPECT_TRUE(red.y[1][0].agrees_with(minus_p));
    ASSERT_EQ(red.phi.size(), 2u);
    EXPECT_TRUE(red.phi[0].is_zero());
    EXPECT_TRUE(red.phi[1].agrees_with(poly(2, 12, {{{0, 0}, 2}, {{1, 1}, 2}})));
}

TEST(Reduce, OrderOneForcingIsMinusL1OfY0) {
    // g_0 = -P L_1(y_0), so h = g_0 / P = -L_1(y_0).
    auto p = spec(kEps);
    auto red = reduce(p, 12);
    Series l1y0 = diffops::apply(p.op(1).as_polynomial(12), red.y[0][0]);
    EXPECT_TRUE(red.h[0].agrees_with(-l1y0));
    EXPECT_FALSE(red.h[0].is_zero());
}

TEST(Reduce, DivisibilityFailureNamesOrderAndMonomial) {
    auto p = spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> 1\nF 1 = -y1 + x1\n");
    try {
        reduce(p, 6);
        FAIL() << "expected DivisibilityViolation";
    } catch (const DivisibilityViolation &e) {
        EXPECT_NE(std::string(e.what()).find("L_1"), std::string::npos);
        EXPECT_EQ(e.witness(), std::vector<int>{0});
    }
}

TEST(Reduce, SingularLinearPart) {
    auto p = spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> x1\nF 1 = x1 + y1^2\n");
    EXPECT_THROW(reduce(p, 6), SingularLinearPart);
}

// ---- lifted equation ----

TEST(BuildLifted, OrderOneMatchesHandDerivation) {
    // B_0 W = L_1(y_0) t + (t L_1 + phi t^2 d_t) W - H_0(x, W)
    auto p = spec("dim 2; unknowns 1; order 1\nP = x1*x2\nL 1 : (1,0) -> x1 ; (0,1) -> 3*x2^2\nF 1 = y1 - x1 + x2*y1^2\n");
    const int t = 14;
    auto red = reduce(p, t);
    auto eq = build_lifted(p, red);
    EXPECT_EQ(eq.k, 1);
    ASSERT_EQ(eq.forcing.size(), 1u);
    EXPECT_TRUE(eq.forcing[0].agrees_with(diffops::apply(p.op(1).as_polynomial(t), red.y[0][0])));

    std::map<std::tuple<int, int, std::vector<int>>, Series> want;
    want[{1, 0, {1, 0}}] = poly(2, t, {{{1, 0}, 1}});
    want[{1, 0, {0, 1}}] = poly(2, t, {{{0, 2}, 3}});
    want[{1, 1, {0, 0}}] = red.phi[0];
    // L_1*(P) = x1 x2 + 3 x1 x2^2, so phi = 1 + 3 x2
    EXPECT_TRUE(red.phi[0].agrees_with(poly(2, t, {{{0, 0}, 1}, {{0, 1}, 3}})));
    ASSERT_EQ(eq.linear.size(), want.size());
    for (const auto &lt : eq.linear) {
        auto it = want.find({lt.j, lt.b, lt.alpha.values()});
        ASSERT_NE(it, want.end()) << lt.j << " " << lt.b << " " << lt.alpha.to_string();
        EXPECT_TRUE(lt.coef.agrees_with(it->second));
    }
    // -H_0: H(x, y_0 + w) = x2 (y_0 + w)^2 has w^2 coefficient x2.
    ASSERT_EQ(eq.nonlinear.size(), 1u);
    EXPECT_EQ(eq.nonlinear[0].gamma, MultiIndex{2});
    EXPECT_TRUE(eq.nonlinear[0].coef.agrees_with(poly(2, t, {{{0, 1}, -1}})));
}

TEST(BuildLifted, EjeThreeTerms) {
    const int t = 12;
    auto p = spec(kEje3);
    auto eq = build_lifted(p, reduce(p, t));
    std::map<std::tuple<int, int, std::vector<int>>, Series> want;
    want[{2, 0, {2, 0}}] = poly(2, t, {{{2, 0}, 1}});
    want[{2, 0, {0, 2}}] = poly(2, t, {{{0, 2}, 1}});
    want[{2, 0, {1, 1}}] = poly(2, t, {{{0, 0}, 2}});
    // phi_2 t^3 d_t^2 with phi_2 = L_2*(P)/P = 2 + 2 x1 x2
    want[{1, 2, {0, 0}}] = poly(2, t, {{{0, 0}, 2}, {{1, 1}, 2}});
    // binomial(alpha, beta) a_alpha d_beta P for |beta| = 1, plus the d_1 d_2 P term
    want[{1, 1, {1, 0}}] = poly(2, t, {{{1, 0}, 2}, {{2, 1}, 2}});
    want[{1, 1, {0, 1}}] = poly(2, t, {{{0, 1}, 2}, {{1, 2}, 2}});
    want[{1, 1, {0, 0}}] = poly(2, t, {{{0, 0}, 2}});
    ASSERT_EQ(eq.linear.size(), want.size());
    for (const auto &lt : eq.linear) {
        auto it = want.find({lt.j, lt.b, lt.alpha.values()});
        ASSERT_NE(it, want.end()) << lt.j << " " << lt.b << " " << lt.alpha.to_string();
        EXPECT_TRUE(lt.coef.agrees_with(it->second)) << lt.coef.to_string();
    }
    EXPECT_TRUE(eq.nonlinear.empty());
}

TEST(SolveLifted, NoForcingNoNonlinearityGivesZero) {
    auto p = spec("dim 2; unknowns 1; order 2\nP = x1*x2\nL 2 : (2,0) -> x1^2 ; (0,2) -> x2^2 ; (1,1) -> 2\nF 1 = 2*y1\n");
    auto sol = solve_lifted(build_lifted(p, reduce(p, 20)), 6, 20, 2);
    for (const auto &u : sol.u) EXPECT_TRUE(all_zero(u));
}

TEST(SolveLifted, StartsAtK) {
    auto p = spec("dim 1; unknowns 1; order 2\nP = x1^2\nL 2 : (2) -> 1 + x1\nL 1 : (1) -> x1^2\nF 1 = (2 + x1)*y1 + x1^2 + x1^3\n");
    const int D = 16;
    auto eq = build_lifted(p, reduce(p, D));
    auto sol = solve_lifted(eq, 4, D, 2);
    EXPECT_TRUE(all_zero(sol.u[0]));
    EXPECT_TRUE(all_zero(sol.u[1]));
    // u_k = c0^{-1} forcing
    const SeriesMatrix inv = invert_series_matrix(eq.c0);
    const Series want = (inv * eq.forcing)[0];
    EXPECT_FALSE(want.is_zero());
    EXPECT_TRUE(sol.u[2][0].agrees_with(want));
}

TEST(SolveLifted, TimeOdeReproducesRecurrence) {
    // u_n = [n = 1] + (n-1)(n-2) u_{n-1} + (n-1) u_{n-1} + (n-2)(n-3) u_{n-2}
    // from t^3 d_t^2 W + t^2 d_t W + t^4 d_t^2 W + t.
    LiftedEquation eq;
    eq.dim = 1;
    eq.unknowns = 1;
    eq.k = 1;
    eq.c0 = SeriesMatrix::identity(1, 1, 0);
    eq.forcing = {Series::constant(1, 0, 1)};
    eq.linear = {{1, 2, MultiIndex(1), Series::constant(1, 0, 1)},
                 {1, 1, MultiIndex(1), Series::constant(1, 0, 1)},
                 {2, 2, MultiIndex(1), Series::constant(1, 0, 1)}};
    auto sol = solve_lifted(eq, 40, 0);
    const auto a = a_sequence(40);
    for (int n = 0; n <= 40; ++n) EXPECT_EQ(sol.u[n][0].constant_term(), Rational(a[n])) << n;
    EXPECT_EQ(a[3], 4);
    EXPECT_EQ(a[4], 38);
    EXPECT_EQ(a[5], 632);
}

TEST(SolveLifted, SingularLeadingMatrix) {
    LiftedEquation eq;
    eq.dim = 1;
    eq.unknowns = 1;
    eq.k = 1;
    eq.c0 = SeriesMatrix(1, 1, 1, 4);
    eq.forcing = {Series::constant(1, 4, 1)};
    try {
        solve_lifted(eq, 3, 4);
        FAIL();
    } catch (const PoincareViolation &e) {
        EXPECT_EQ(e.order(), 1);
    }
}

TEST(SolveLifted, TruncationTooSmall) {
    auto p = spec(kEps);
    auto eq = build_lifted(p, reduce(p, 6));
    EXPECT_THROW(solve_lifted(eq, 10, 6, 2), TruncationTooSmall);
}

// ---- P-expansion and direct solver ----

TEST(PExpansion, ZeroForcing) {
    auto p = spec("dim 2; unknowns 1; order 2\nP = x1*x2\nL 2 : (2,0) -> x1^2 ; (0,2) -> x2^2 ; (1,1) -> 2\nF 1 = 2*y1\n");
    auto pe = solve_p_expansion(p, 5, 10);
    for (const auto &yn : pe.y) EXPECT_TRUE(all_zero(yn));
    EXPECT_TRUE(all_zero(evaluate(pe, 10).y));
    EXPECT_TRUE(all_zero(solve_direct(p, 10)));
}

TEST(PExpansion, EjeThreeEvaluation) {
    // The equation forces a_1 = -1; the solution is -sum a_n (x1 x2)^n.
    auto p = spec(kEje3);
    auto pe = solve_p_expansion(p, 5, 10);
    auto ev = evaluate(pe, 10);
    EXPECT_EQ(ev.certified, 10);
    const auto a = a_sequence(5);
    EXPECT_TRUE(ev.y[0].agrees_with(diagonal_series(a, 5, 10, -1)));
}

TEST(PExpansion, EjeThreeDirectToDegreeEighty) {
    auto p = spec(kEje3);
    auto pe = solve_p_expansion(p, 40, 80);
    auto ev = evaluate(pe, 80);
    EXPECT_EQ(ev.certified, 80);
    auto direct = solve_direct(p, 80);
    const auto a = a_sequence(40);
    EXPECT_EQ(direct[0], diagonal_series(a, 40, 80, -1));
    EXPECT_EQ(ev.y[0], direct[0]);
}

TEST(PExpansion, EpsilonExampleAgreesWithDirect) {
    auto p = spec(kEps);
    auto pe = solve_p_expansion(p, 12, 24);
    auto ev = evaluate(pe, 24);
    EXPECT_EQ(ev.certified, 24);
    EXPECT_EQ(ev.y[0], solve_direct(p, 24)[0]);
    // x2 + x1 sum n! (x1 x2)^n
    Integer f = 1;
    for (int n = 0; n <= 11; ++n) {
        if (n) f *= n;
        EXPECT_EQ(ev.y[0].coeff(MultiIndex{n + 1, n}), Rational(f));
    }
    EXPECT_EQ(ev.y[0].coeff(MultiIndex{0, 1}), 1);
}

TEST(PExpansion, SingleTermEvaluatesToItself) {
    PExpansion pe;
    pe.p = poly(1, 4, {{{1}, 1}});
    pe.y = {{poly(1, 6, {{{1}, 2}, {{3}, 1}})}};
    auto ev = evaluate(pe, 6);
    EXPECT_EQ(ev.certified, 0); // (N+1) o(P) - 1 with N = 0
    EXPECT_TRUE(ev.y[0].agrees_with(pe.y[0][0]));
}

TEST(PExpansion, JsonRoundTrip) {
    auto pe = solve_p_expansion(spec(kEps), 4, 8);
    nlohmann::json j = pe;
    auto back = pexpansion_from_json(j);
    EXPECT_EQ(back.p, pe.p);
    EXPECT_EQ(back.y, pe.y);
    EXPECT_EQ(back.order, 4);
    EXPECT_EQ(j.at("coefficients").at(2).at("certified_degree"), pe.certified(2));
}

TEST(SolveDirect, LinearConvergent) {
    auto p = spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> 1\nF 1 = -y1 + x1\n");
    auto y = solve_direct(p, 10);
    EXPECT_EQ(y[0], poly(1, 10, {{{1}, Rational(1, 2)}}));
}

TEST(SolveDirect, SingularDegreeReportsOrder) {
    auto p = spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> 1\nF 1 = y1 + x1^2\n");
    try {
        solve_direct(p, 5);
        FAIL();
    } catch (const PoincareViolation &e) {
        EXPECT_EQ(e.order(), 1);
    }
}

TEST(Residual, UniquenessProbe) {
    auto p = spec(kEps);
    auto y = solve_direct(p, 14);
    ASSERT_TRUE(all_zero(residual(p, y)));
    std::mt19937 rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 12);
        auto monos = monomials_of_degree(2, n);
        const MultiIndex beta = monos[rng() % monos.size()];
        auto z = y;
        z[0].add_to(beta, Rational(1, 3));
        EXPECT_FALSE(all_zero(residual(p, z))) << beta.to_string();
    }
}

class OracleEquivalence : public ::testing::TestWithParam<int> {};

TEST_P(OracleEquivalence, ExpansionMatchesDirect) {
    std::mt19937 rng(GetParam());
    ProblemSpec p = glab::testing::random_admissible(rng);
    const int D = 8;
    const int o = mps::order(p.p).value();
    auto pe = solve_p_expansion(p, D / o, D);
    auto ev = evaluate(pe, D);
    auto direct = solve_direct(p, D);
    EXPECT_EQ(ev.certified, D);
    for (std::size_t i = 0; i < p.unknowns; ++i) EXPECT_EQ(ev.y[i].truncated(D), direct[i].truncated(D));
    EXPECT_TRUE(all_zero(residual(p, direct)));
    EXPECT_TRUE(all_zero(residual(p, ev.y)));
}

INSTANTIATE_TEST_SUITE_P(Random, OracleEquivalence, ::testing::Range(0, 60));

// ---- Poincare ----

TEST(CheckPoincare, LinearConvergentPasses) {
    auto v = check_poincare(spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> 1\nF 1 = -y1 + x1\n"));
    EXPECT_TRUE(v.pass);
    EXPECT_FALSE(v.partial);
    EXPECT_EQ(v.symbols, std::vector<Rational>{1});
    // m* = floor(1/1) + 1 = 2, n* = k - 1 + m*
    EXPECT_EQ(v.n_star, 2);
}

TEST(CheckPoincare, ConstructedFailureAtOne) {
    auto p = spec("dim 1; unknowns 1; order 1\nP = x1\nL 1 : (1) -> 1\nF 1 = y1 + x1^2\n");
    auto v = check_poincare(p);
    EXPECT_FALSE(v.pass);
    EXPECT_EQ(v.failing, std::vector<long>{1});
}

TEST(CheckPoincare, DiagonalSystemPasses) {
    // 2n in {1, 3} has no integer solution
    auto p = spec("dim 1; unknowns 2; order 1\nP = x1\nL 1 : (1) -> 2\nF 1 = y1 + x1\nF 2 = 3*y2 - x1\n");
    auto v = check_poincare(p);
    EXPECT_TRUE(v.pass);
    for (long n = 0; n <= v.n_star + 10; ++n)
        EXPECT_NE(poincare_matrix(v.symbols, p.linear_part_at_zero(), n).determinant(), 0) << n;
}

TEST(CheckPoincare, HigherOrderSpotCheck) {
    auto p = spec("dim 1; unknowns 1; order 2\nP = x1\nL 2 : (2) -> 1\nL 1 : (1) -> -3\nF 1 = 5*y1 + x1\n");
    auto v = check_poincare(p);
    // n(n-1) - 3n - 5 = n^2 - 4n - 5 = (n-5)(n+1): singular at n = 5
    EXPECT_FALSE(v.pass);
    EXPECT_EQ(v.failing, std::vector<long>{5});
    EXPECT_GE(v.n_star, 5);
}

TEST(CheckPoincare, InconclusiveWithoutTopSymbol) {
    auto p = spec(kEje3);
    EXPECT_THROW(check_poincare(p), InconclusiveBound);
    auto v = check_poincare(p, 12);
    EXPECT_TRUE(v.partial);
    EXPECT_EQ(v.checked_up_to, 12);
    EXPECT_TRUE(v.pass);
}
