#pragma once

// Solvability of the order-n systems
//   [ sum_j n!/(n-j)! L_j*(P)(0) ] I - D_yF(0,0),   n = 0, 1, 2, ...

#include <optional>
#include <vector>

#include "glab/diffops.hpp"
#include "glab/problem.hpp"

namespace glab::solver {

struct PoincareVerdict {
    bool pass = false;
    bool partial = false;      // only checked up to a user bound
    long n_star = 0;           // every n > n_star is nonsingular by the norm bound
    long checked_up_to = 0;
    std::vector<long> failing; // orders with a singular matrix
    std::vector<Rational> symbols; // L_j*(P)(0), j = 1..k
};

/// s_j = L_j*(P)(0)
inline std::vector<Rational> star_symbols_at_zero(const ProblemSpec &prob) {
    std::vector<Rational> s;
    const Series p = prob.p.as_polynomial(std::max(1, prob.p.max_degree()) + 1);
    for (int j = 1; j <= prob.order; ++j) s.push_back(diffops::star(prob.op(j).as_polynomial(p.trunc()), p).constant_term());
    return s;
}

inline QMatrix poincare_matrix(const std::vector<Rational> &s, const QMatrix &a0, long n) {
    Rational lambda = 0;
    for (std::size_t j = 1; j <= s.size(); ++j) lambda += Rational(diffops::falling_factorial(n, static_cast<long>(j))) * s[j - 1];
    return QMatrix::identity(a0.rows()).scaled(lambda) - a0;
}

/// For n >= n_star, |lambda_n| >= m |s_k| - S > ||A0|| with m = n - k + 1 and
/// S = sum_{j<k} |s_j|, so the matrix is invertible; orders 0..n_star are
/// checked by exact determinants. Without a nonzero s_k only a finite check
/// up to `user_bound` is possible and the verdict is partial.
inline PoincareVerdict check_poincare(const ProblemSpec &prob, std::optional<long> user_bound = std::nullopt) {
    prob.validate_shape();
    PoincareVerdict v;
    v.symbols = star_symbols_at_zero(prob);
    const QMatrix a0 = prob.linear_part_at_zero();
    const Rational sk = abs(v.symbols.back());
    long bound;
    if (sgn(sk) == 0) {
        if (!user_bound) throw InconclusiveBound("L_k*(P)(0) = 0: no finite bound certifies all orders");
        v.partial = true;
        bound = *user_bound;
        v.n_star = -1;
    } else {
        Rational s_low = 0;
        for (std::size_t j = 0; j + 1 < v.symbols.size(); ++j) s_low += abs(v.symbols[j]);
        Rational q = (s_low + a0.row_sum_norm()) / sk;
        Integer fl;
        mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
        v.n_star = prob.order - 1 + fl.get_si() + 1;
        bound = v.n_star;
    }
    v.checked_up_to = bound;
    for (long n = 0; n <= bound; ++n)
        if (sgn(poincare_matrix(v.symbols, a0, n).determinant()) == 0) v.failing.push_back(n);
    v.pass = v.failing.empty();
    return v;
}

} // namespace glab::solver
