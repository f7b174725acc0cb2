#pragma once

// Degree-by-degree solution of  c(x) + B(x) y + Q(x, y) = 0.

#include <stdexcept>
#include <vector>

#include "glab/problem.hpp"

namespace glab::solver {

/// Solves c + B y + Q(x, y) = 0 for y, one homogeneous degree at a time:
///   y_n = -B(0)^{-1} [c + B y_{<n} + Q(x, y_{<n})]_n.
/// Valid when the degree-n part of Q never involves y_n, i.e. either every
/// coefficient of Q vanishes at 0 or y(0) = 0 and Q has y-degree >= 2.
/// The result is exact to min(trunc, certified degree of the data).
inline SeriesVector solve_graded(const SeriesVector &c, const SeriesMatrix &b, const std::vector<YPoly> &q,
                                 int trunc) {
    const std::size_t n = c.size();
    const std::size_t dim = c.front().dim();
    int t = std::min({trunc, min_trunc(c), b.trunc()});
    bool q_vanishes_at_zero = true;
    for (const auto &comp : q)
        for (const auto &[g, coef] : comp) {
            t = std::min(t, coef.trunc());
            if (sgn(coef.constant_term()) != 0) q_vanishes_at_zero = false;
        }
    if (t < 0) throw TruncationTooSmall("implicit equation data is not certified at degree 0");
    auto b0inv = b.at_zero().inverse();
    if (!b0inv) throw SingularLinearPart("linear part is singular at the origin");

    SeriesVector y(n, Series(dim, 0));
    for (int deg = 0; deg <= t; ++deg) {
        SeriesVector yy;
        for (const auto &s : y) yy.push_back(s.as_polynomial(deg));
        SeriesVector r = b.truncated(deg) * yy;
        SeriesVector qv = evaluate_ypoly(q, yy, dim, deg);
        std::vector<Series> comps(n, Series(dim, deg));
        for (std::size_t i = 0; i < n; ++i) comps[i] = (r[i] + qv[i] + c[i].truncated(deg)).component(deg);
        for (std::size_t i = 0; i < n; ++i) {
            Series z(dim, deg);
            for (std::size_t l = 0; l < n; ++l) z -= (*b0inv)(i, l) * comps[l];
            y[i] = yy[i] + z;
        }
        if (deg == 0 && !q_vanishes_at_zero)
            for (const auto &s : y)
                if (sgn(s.constant_term()) != 0)
                    throw DomainError("implicit solve needs y(0) = 0 when Q does not vanish at the origin");
    }
    return y;
}

/// y_0 with f + A y_0 + H(x, y_0) = 0 and y_0(0) = 0, exact to degree d.
inline SeriesVector solve_implicit(const ProblemSpec &prob, int d) {
    if (d < 0) throw TruncationTooSmall("negative degree");
    for (const auto &s : prob.forcing(0))
        if (sgn(s.constant_term()) != 0) throw DomainError("F(0,0) must vanish");
    SeriesVector y = solve_graded(prob.forcing(d), prob.linear_part(d), prob.nonlinear_part(d), d);
    SeriesVector check = evaluate_ypoly(prob.full_map(d), y, prob.dim, d);
    if (!all_zero(check)) throw std::logic_error("implicit solution failed its residual check");
    return y;
}

} // namespace glab::solver
