#pragma once

// Peeling off y_0, ..., y_{k-1}: after these reductions the remaining unknown
// W = sum_{n>=k} y_n P^n solves  sum_j P^j L_j(W) = h P^k + B W + H'(x, W).

#include <string>
#include <vector>

#include "glab/diffops.hpp"
#include "glab/problem.hpp"
#include "glab/solver/implicit.hpp"

namespace glab::solver {

struct Reduction {
    std::vector<SeriesVector> y;  // y_0 .. y_{k-1}
    SeriesMatrix b;               // linear part of the reduced right-hand side
    SeriesVector h;               // reduced forcing divided by P^k
    std::vector<YPoly> h_prime;   // w-degree >= 2 part of the reduced right-hand side
    std::vector<Series> phi;      // phi_j = L_j*(P) / P, j = 1..k
    int degree = 0;               // working truncation
};

namespace detail {

/// sum_j P^j L_j(v) with order-aware truncation.
inline SeriesVector lhs_operator(const ProblemSpec &prob, const SeriesVector &v, int t) {
    const int big = t + prob.order * std::max(1, prob.p.max_degree()) + 1;
    const Series p = prob.p.as_polynomial(big);
    SeriesVector out;
    for (const auto &vi : v) {
        Series acc(prob.dim, t);
        Series pj = Series::constant(prob.dim, big, 1);
        for (int j = 1; j <= prob.order; ++j) {
            pj = mps::mul(pj, p);
            const DiffOperator &l = prob.op(j);
            if (l.is_zero()) continue;
            acc += mps::mul_sharp(pj, diffops::apply(l.as_polynomial(big), vi));
        }
        out.push_back(std::move(acc));
    }
    return out;
}

inline SeriesVector divide_all(const SeriesVector &a, const Series &b) {
    SeriesVector out;
    for (const auto &s : a) out.push_back(mps::divide_exact(s, b));
    return out;
}

} // namespace detail

/// Checks the hypotheses for a unique formal solution, throwing the
/// matching error. Returns the divisibility quotients phi_j.
inline std::vector<Series> check_formal_hypotheses(const ProblemSpec &prob) {
    prob.validate_shape();
    if (prob.p.is_zero() || sgn(prob.p.constant_term()) != 0) throw DomainError("P must be nonzero with P(0) = 0");
    for (const auto &s : prob.forcing(0))
        if (sgn(s.constant_term()) != 0) throw DomainError("F(0,0) must vanish");
    if (!prob.linear_part_at_zero().inverse()) throw SingularLinearPart("D_yF(0,0) is singular");
    if (prob.op(prob.order).is_zero()) throw DomainError("the top-order operator L_k must be nonzero");
    auto report = diffops::check_divisibility(prob.p, prob.ops);
    std::vector<Series> phi;
    for (const auto &v : report.per_order) {
        if (!v.divisible)
            throw DivisibilityViolation("P does not divide L_" + std::to_string(v.j) + "*(P)", v.witness);
        phi.push_back(*v.quotient);
    }
    return phi;
}

/// Step-1 reductions at working truncation t.
inline Reduction reduce(const ProblemSpec &prob, int t) {
    Reduction red;
    red.phi = check_formal_hypotheses(prob);
    red.degree = t;
    const int k = prob.order;
    const int big = t + k * std::max(1, prob.p.max_degree()) + 1;
    const Series p = prob.p.as_polynomial(big);

    // y_0 from the implicit equation.
    SeriesVector y0 = solve_implicit(prob, t);
    ShiftedMap sh = shift_ypoly(prob.nonlinear_part(t), y0, prob.dim, t);
    SeriesMatrix b = prob.linear_part(t) + sh.linear;
    std::vector<YPoly> h = sh.higher;
    SeriesVector g = detail::lhs_operator(prob, y0, t);
    for (auto &s : g) s = -s;
    red.y.push_back(std::move(y0));

    Series pm = Series::constant(prob.dim, big, 1);
    for (int m = 1; m < k; ++m) {
        pm = mps::mul(pm, p);
        SeriesVector c = detail::divide_all(g, pm);
        // H_{m-1}(x, y P^m) / P^m
        std::vector<YPoly> q(prob.unknowns);
        for (std::size_t i = 0; i < prob.unknowns; ++i)
            for (const auto &[gamma, coef] : h[i])
                q[i].emplace(gamma, mps::mul_sharp(coef, mps::pow(pm, gamma.total() - 1)));
        SeriesVector ym = solve_graded(c, b, q, t);
        SeriesVector v;
        for (const auto &s : ym) v.push_back(mps::mul_sharp(s, pm).truncated(t));
        ShiftedMap shm = shift_ypoly(h, v, prob.dim, t);
        b = b + shm.linear;
        h = shm.higher;
        g = detail::lhs_operator(prob, v, t);
        for (auto &s : g) s = -s;
        red.y.push_back(std::move(ym));
    }
    red.b = b;
    red.h = detail::divide_all(g, mps::mul(pm, p));
    red.h_prime = std::move(h);
    return red;
}

} // namespace glab::solver
