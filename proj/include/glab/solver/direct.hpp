#pragma once

// Independent oracle: solve the original equation for the homogeneous
// components of y one total degree at a time.

#include <vector>

#include "glab/diffops.hpp"
#include "glab/problem.hpp"

namespace glab::solver {

namespace detail {

/// Degree-preserving part of sum_j P^j L_j on degree-n polynomials. It is
/// nonzero only when P has a linear part: then it is
/// sum_j P_1^j sum_alpha a_alpha(0) d_alpha.
inline Series degree_preserving_image(const ProblemSpec &prob, const Series &p1, const MultiIndex &beta) {
    const int n = beta.total();
    Series out(prob.dim, n);
    if (p1.is_zero()) return out;
    const Series xb = Series::monomial(prob.dim, n, beta);
    Series p1j = Series::constant(prob.dim, n, 1);
    for (int j = 1; j <= prob.order; ++j) {
        p1j = mps::mul(p1j, p1.as_polynomial(n));
        Series acc(prob.dim, n);
        for (const auto &[alpha, a] : prob.op(j).terms()) {
            const Rational a0 = a.constant_term();
            if (sgn(a0) == 0 || !(alpha <= beta)) continue;
            acc += a0 * mps::diff(xb, alpha).as_polynomial(n);
        }
        out += mps::mul(p1j, acc);
    }
    return out.component(n);
}

} // namespace detail

/// Truncated solution exact to degree D. Degree n solves
/// (T_n - A(0)) z = -r_n where r_n is the degree-n residual of the lower
/// degrees and T_n the degree-preserving part of the operator side.
inline SeriesVector solve_direct(const ProblemSpec &prob, int degree) {
    prob.validate_shape();
    if (degree < 0) throw DomainError("degree must be non-negative");
    if (prob.p.is_zero() || sgn(prob.p.constant_term()) != 0) throw DomainError("P must be nonzero with P(0) = 0");
    for (const auto &s : prob.forcing(0))
        if (sgn(s.constant_term()) != 0) throw DomainError("F(0,0) must vanish");
    const QMatrix a0 = prob.linear_part_at_zero();
    const auto a0inv = a0.inverse();
    if (!a0inv) throw SingularLinearPart("D_yF(0,0) is singular");

    const std::size_t n_unk = prob.unknowns, d = prob.dim;
    const Series p1 = mps::order(prob.p).value() == 1 ? prob.p.component(1) : Series(d, 0);
    SeriesVector y(n_unk, Series(d, 0));
    for (int n = 0; n <= degree; ++n) {
        SeriesVector padded;
        for (const auto &s : y) padded.push_back(s.as_polynomial(n + prob.order));
        SeriesVector r = residual(prob, padded);
        const auto monos = monomials_of_degree(d, n);
        const std::size_t m = monos.size();

        std::vector<Series> images;
        bool preserving = false;
        for (const auto &beta : monos) {
            images.push_back(detail::degree_preserving_image(prob, p1, beta));
            preserving = preserving || !images.back().is_zero();
        }

        std::vector<Rational> rhs(n_unk * m);
        for (std::size_t i = 0; i < n_unk; ++i)
            for (std::size_t c = 0; c < m; ++c) rhs[i * m + c] = -r[i].coeff(monos[c]);

        std::vector<Rational> z(n_unk * m);
        if (!preserving) {
            // -A(0) z = -r
            for (std::size_t c = 0; c < m; ++c)
                for (std::size_t i = 0; i < n_unk; ++i) {
                    Rational s = 0;
                    for (std::size_t l = 0; l < n_unk; ++l) s -= (*a0inv)(i, l) * rhs[l * m + c];
                    z[i * m + c] = s;
                }
        } else {
            QMatrix sys(n_unk * m, n_unk * m);
            for (std::size_t i = 0; i < n_unk; ++i)
                for (std::size_t c = 0; c < m; ++c) {
                    const std::size_t col = i * m + c;
                    for (std::size_t r2 = 0; r2 < m; ++r2) sys(i * m + r2, col) += images[c].coeff(monos[r2]);
                    for (std::size_t l = 0; l < n_unk; ++l) sys(l * m + c, col) -= a0(l, i);
                }
            auto sol = solve_linear(sys, rhs);
            if (!sol) throw PoincareViolation("degree-" + std::to_string(n) + " linear system is singular", n);
            z = std::move(*sol);
        }
        for (std::size_t i = 0; i < n_unk; ++i) {
            Series next = y[i].as_polynomial(n);
            for (std::size_t c = 0; c < m; ++c) next.add_to(monos[c], z[i * m + c]);
            y[i] = std::move(next);
        }
    }
    return y;
}

} // namespace glab::solver
