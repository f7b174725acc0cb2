#pragma once

// The lifted equation in the time variable t, with W(t,x) = sum_n u_n(x) t^n:
//
//   c0(x) W = forcing(x) t^k + sum coef(x) t^{j+b} d_t^b d_alpha W
//                            + sum coef(x) t^j W^gamma
//
// and its order-by-order recurrence. Linear terms always carry j >= 1, so
// u_n only depends on u_l with l < n.

#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "glab/diffops.hpp"
#include "glab/problem.hpp"
#include "glab/solver/reduce.hpp"

namespace glab::solver {

struct LinearTerm {
    int j = 1;  // t-power beyond the derivative
    int b = 0;  // order in d_t
    MultiIndex alpha;
    Series coef;
    bool operator==(const LinearTerm &) const = default;
};

struct NonlinearTerm {
    int j = 0;
    std::size_t component = 0;
    MultiIndex gamma; // |gamma| >= 2
    Series coef;
    bool operator==(const NonlinearTerm &) const = default;
};

struct LiftedEquation {
    std::size_t dim = 1;
    std::size_t unknowns = 1;
    int k = 1;               // forcing t-power; u_0 .. u_{k-1} vanish
    SeriesMatrix c0;         // invertible at 0
    SeriesVector forcing;    // coefficient of t^k on the right
    std::vector<LinearTerm> linear;
    std::vector<NonlinearTerm> nonlinear;

    /// Highest b + |alpha| over linear terms.
    int derivative_order() const {
        int m = 0;
        for (const auto &t : linear) m = std::max(m, t.b + t.alpha.total());
        return m;
    }
};

/// Accumulates linear terms keyed by (j, b, alpha), dropping zero sums.
class LinearTermSet {
public:
    void add(int j, int b, const MultiIndex &alpha, const Series &coef) {
        if (j < 1) throw DomainError("linear terms need a positive t-power");
        if (coef.is_zero()) return;
        auto key = std::make_tuple(j, b, alpha.values());
        auto it = terms_.find(key);
        if (it == terms_.end())
            terms_.emplace(key, LinearTerm{j, b, alpha, coef});
        else
            it->second.coef += coef;
    }

    std::vector<LinearTerm> terms() const {
        std::vector<LinearTerm> out;
        for (const auto &[k, t] : terms_)
            if (!t.coef.is_zero()) out.push_back(t);
        return out;
    }

private:
    std::map<std::tuple<int, int, std::vector<int>>, LinearTerm> terms_;
};

/// Lifted form of the reduced problem:
///   B W = -h t^k + sum_j [ t^j L_j + phi_j t^{j+1} d_t^j + mixed terms ] W - H'(x, W).
/// Mixed terms come from d_alpha(y_n P^n) = sum_{beta<=alpha} C(alpha,beta)
/// d_{alpha-beta} y_n sum_l n!/(n-l)! P^{n-l} A_{beta,l}.
inline LiftedEquation build_lifted(const ProblemSpec &prob, const Reduction &red) {
    const int t = red.degree;
    const std::size_t d = prob.dim;
    LiftedEquation eq;
    eq.dim = d;
    eq.unknowns = prob.unknowns;
    eq.k = prob.order;
    eq.c0 = red.b;
    for (const auto &s : red.h) eq.forcing.push_back(-s);

    const Series p = prob.p.as_polynomial(t + prob.order * std::max(1, prob.p.max_degree()) + 1);
    diffops::FaaDiBrunoCache tables;
    LinearTermSet lin;
    for (int j = 1; j <= prob.order; ++j) {
        const DiffOperator &l = prob.op(j);
        for (const auto &[alpha, a_raw] : l.terms()) {
            const Series a = a_raw.as_polynomial(t);
            lin.add(j, 0, alpha, a);
            for (const auto &beta : alpha.lower_set()) {
                if (beta.total() == 0) continue;
                auto tab = tables.get(p, beta);
                const Rational binom(alpha.binomial(beta));
                for (int s = 1; s <= beta.total(); ++s) {
                    if (beta == alpha && s == j) continue; // collected into phi_j
                    lin.add(j - s, s, alpha - beta, (binom * mps::mul(a, tab->at(s))).truncated(t));
                }
            }
        }
        lin.add(1, j, MultiIndex(d), red.phi[j - 1].as_polynomial(t));
    }
    eq.linear = lin.terms();
    for (std::size_t i = 0; i < prob.unknowns; ++i)
        for (const auto &[gamma, coef] : red.h_prime[i])
            if (!coef.is_zero()) eq.nonlinear.push_back({0, i, gamma, -coef});
    return eq;
}

struct LiftedSolution {
    std::vector<SeriesVector> u; // u_0 .. u_N
    std::vector<int> certified;  // certified degree of each u_n
};

namespace detail {

/// [t^m] of products W_{f_1} ... W_{f_r}, memoised over factor prefixes.
class PowerChains {
public:
    PowerChains(const std::vector<SeriesVector> &u, int k, std::size_t dim) : u_(u), k_(k), dim_(dim) {}

    Series coefficient(const std::vector<std::size_t> &factors, int m) {
        const int r = static_cast<int>(factors.size());
        if (m < r * k_) return Series(dim_, 0);
        if (r == 1) return u_.at(m)[factors[0]];
        auto &memo = memo_[factors];
        auto it = memo.find(m);
        if (it != memo.end()) return it->second;
        std::vector<std::size_t> prefix(factors.begin(), factors.end() - 1);
        const std::size_t last = factors.back();
        std::optional<Series> acc;
        for (int l = (r - 1) * k_; l <= m - k_; ++l) {
            Series term = mps::mul_sharp(coefficient(prefix, l), u_.at(m - l)[last]);
            acc = acc ? *acc + term : term;
        }
        return memo.emplace(m, *acc).first->second;
    }

private:
    const std::vector<SeriesVector> &u_;
    int k_;
    std::size_t dim_;
    std::map<std::vector<std::size_t>, std::map<int, Series>> memo_;
};

} // namespace detail

/// Solves the lifted recurrence for n = k..N. Coefficient u_n is computed to
/// degree D - n*slope (the degrees that matter once multiplied by P^n of
/// order `slope`), or less when the data certify less.
inline LiftedSolution solve_lifted(const LiftedEquation &eq, int order_n, int degree, int slope = 0) {
    if (eq.k < 1) throw DomainError("lifted equation needs k >= 1");
    if (slope < 0) throw DomainError("slope must be non-negative");
    const std::size_t n_unk = eq.unknowns, d = eq.dim;
    auto c00 = eq.c0.at_zero().inverse();
    if (!c00) throw PoincareViolation("order-" + std::to_string(eq.k) + " matrix is singular", eq.k);

    LiftedSolution sol;
    for (int n = 0; n < std::min(eq.k, order_n + 1); ++n) {
        sol.u.emplace_back(n_unk, Series(d, std::max(degree, 0)));
        sol.certified.push_back(std::max(degree, 0));
    }
    if (order_n < eq.k) return sol;
    const int top_target = degree - eq.k * slope;
    if (top_target < 0) throw TruncationTooSmall("degree too small for the first lifted coefficient");
    const SeriesMatrix c0inv = invert_series_matrix(eq.c0.truncated(std::min(eq.c0.trunc(), degree)));

    // group nonlinear terms by factor list
    std::vector<std::vector<std::size_t>> factor_lists;
    for (const auto &nt : eq.nonlinear) {
        std::vector<std::size_t> f;
        for (std::size_t i = 0; i < nt.gamma.dim(); ++i)
            for (int r = 0; r < nt.gamma[i]; ++r) f.push_back(i);
        factor_lists.push_back(std::move(f));
    }
    detail::PowerChains chains(sol.u, eq.k, d);

    for (int n = eq.k; n <= order_n; ++n) {
        const int target = degree - n * slope;
        if (target < 0)
            throw TruncationTooSmall("degree " + std::to_string(degree) + " cannot certify u_" + std::to_string(n));
        SeriesVector rhs(n_unk, Series(d, target));
        if (n == eq.k)
            for (std::size_t i = 0; i < n_unk; ++i) rhs[i] += eq.forcing[i];
        for (const auto &lt : eq.linear) {
            const int src = n - lt.j;
            if (src < eq.k) continue;
            const Integer ff = diffops::falling_factorial(src, lt.b);
            if (ff == 0) continue;
            const Series scaled = Rational(ff) * lt.coef;
            for (std::size_t i = 0; i < n_unk; ++i)
                rhs[i] += mps::mul_sharp(scaled, mps::diff(sol.u[src][i], lt.alpha));
        }
        for (std::size_t t = 0; t < eq.nonlinear.size(); ++t) {
            const auto &nt = eq.nonlinear[t];
            const int m = n - nt.j;
            if (m < static_cast<int>(factor_lists[t].size()) * eq.k) continue;
            rhs[nt.component] += mps::mul_sharp(nt.coef, chains.coefficient(factor_lists[t], m));
        }
        SeriesVector un = c0inv * rhs;
        const int cert = min_trunc(un);
        if (cert < 0) throw TruncationTooSmall("u_" + std::to_string(n) + " has no certified degree");
        for (auto &s : un) s = s.truncated(std::min(cert, target));
        sol.certified.push_back(min_trunc(un));
        sol.u.push_back(std::move(un));
    }
    return sol;
}

inline void to_json(nlohmann::json &j, const LinearTerm &t) {
    j = {{"j", t.j}, {"b", t.b}, {"alpha", t.alpha.values()}, {"coef", t.coef}};
}

} // namespace glab::solver
