#pragma once

// Problem data for  P^k L_k(y) + ... + P L_1(y) = F(x, y)  and helpers for
// maps that are polynomial in y with series coefficients in x.

#include <algorithm>
#include <map>
#include <vector>

#include "glab/diffops.hpp"
#include "glab/errors.hpp"
#include "glab/multi_index.hpp"
#include "glab/rational.hpp"
#include "glab/series.hpp"
#include "glab/series_matrix.hpp"

namespace glab {

/// One component of a map polynomial in y: y-exponent gamma -> coefficient(x).
using YPoly = std::map<MultiIndex, Series, GradedLex>;

inline void ypoly_add(YPoly &p, const MultiIndex &gamma, const Series &c) {
    if (c.is_zero()) return;
    auto it = p.find(gamma);
    if (it == p.end()) {
        p.emplace(gamma, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) p.erase(it);
}

/// Products y^gamma with memoised prefixes; factors use mul_sharp so that
/// high-order unknowns certify more degrees.
class YPowerCache {
public:
    explicit YPowerCache(const SeriesVector &y) : y_(y) {}

    const Series &power(const MultiIndex &gamma) {
        auto it = cache_.find(gamma);
        if (it != cache_.end()) return it->second;
        if (gamma.total() == 0) throw DomainError("y^0 is not cached");
        std::size_t i = 0;
        while (gamma[i] == 0) ++i;
        MultiIndex rest = gamma - MultiIndex::unit(gamma.dim(), i);
        Series value = rest.total() == 0 ? y_.at(i) : mps::mul_sharp(power(rest), y_.at(i));
        return cache_.emplace(gamma, std::move(value)).first->second;
    }

private:
    const SeriesVector &y_;
    std::map<MultiIndex, Series, GradedLex> cache_;
};

/// sum_gamma c_gamma(x) y^gamma for each component. Terms with gamma = 0
/// contribute their coefficient. The result is truncated at `trunc`.
inline SeriesVector evaluate_ypoly(const std::vector<YPoly> &sys, const SeriesVector &y, std::size_t dim,
                                   int trunc) {
    YPowerCache cache(y);
    SeriesVector out;
    for (const auto &comp : sys) {
        Series acc(dim, trunc);
        for (const auto &[gamma, c] : comp) {
            if (gamma.total() == 0)
                acc += c;
            else
                acc += mps::mul_sharp(c, cache.power(gamma));
        }
        out.push_back(std::move(acc));
    }
    return out;
}

/// Splits H(x, v + w) - H(x, v) = A_v(x) w + H_v(x, w) where H_v has only
/// terms of w-degree >= 2. Returns the N x N linear part and H_v.
struct ShiftedMap {
    SeriesMatrix linear;
    std::vector<YPoly> higher;
};

inline ShiftedMap shift_ypoly(const std::vector<YPoly> &h, const SeriesVector &v, std::size_t dim, int trunc) {
    const std::size_t n = v.size();
    ShiftedMap out{SeriesMatrix(h.size(), n, dim, trunc), std::vector<YPoly>(h.size())};
    YPowerCache vp(v);
    for (std::size_t i = 0; i < h.size(); ++i)
        for (const auto &[gamma, c] : h[i])
            for (const auto &j : gamma.lower_set()) {
                if (j.total() == 0) continue;
                const MultiIndex rest = gamma - j;
                Series coef = Rational(gamma.binomial(j)) * c;
                if (rest.total() > 0) coef = mps::mul_sharp(coef, vp.power(rest));
                coef = coef.truncated(trunc);
                if (j.total() == 1) {
                    std::size_t l = 0;
                    while (j[l] == 0) ++l;
                    out.linear(i, l) += coef;
                } else {
                    ypoly_add(out.higher[i], j, coef);
                }
            }
    return out;
}

/// Full datum (d, N, k, P, L_1..L_k, F). Polynomial inputs are stored with
/// trunc equal to their degree and re-materialised at any needed degree.
struct ProblemSpec {
    std::size_t dim = 1;
    std::size_t unknowns = 1;
    int order = 1;
    Series p;
    std::vector<DiffOperator> ops; // ops[j-1] has order j
    std::vector<YPoly> f;          // F_i as polynomials in y

    bool operator==(const ProblemSpec &) const = default;

    /// Highest x-degree among all polynomial data.
    int data_degree() const {
        int d = std::max(0, p.max_degree());
        for (const auto &l : ops) d = std::max(d, l.coefficient_degree());
        for (const auto &comp : f)
            for (const auto &[g, c] : comp) d = std::max(d, c.max_degree());
        return d;
    }

    /// f(x) = F(x, 0) at truncation t.
    SeriesVector forcing(int t) const {
        SeriesVector out;
        const MultiIndex zero(unknowns);
        for (const auto &comp : f) {
            auto it = comp.find(zero);
            out.push_back(it == comp.end() ? Series(dim, t) : it->second.as_polynomial(t));
        }
        return out;
    }

    /// A(x): coefficients of the y-linear terms.
    SeriesMatrix linear_part(int t) const {
        SeriesMatrix a(unknowns, unknowns, dim, t);
        for (std::size_t i = 0; i < unknowns; ++i)
            for (std::size_t l = 0; l < unknowns; ++l) {
                auto it = f[i].find(MultiIndex::unit(unknowns, l));
                if (it != f[i].end()) a(i, l) = it->second.as_polynomial(t);
            }
        return a;
    }

    /// D_yF(0,0)
    QMatrix linear_part_at_zero() const { return linear_part(0).at_zero(); }

    /// H(x, y): terms of y-degree >= 2.
    std::vector<YPoly> nonlinear_part(int t) const {
        std::vector<YPoly> h(unknowns);
        for (std::size_t i = 0; i < unknowns; ++i)
            for (const auto &[g, c] : f[i])
                if (g.total() >= 2) h[i].emplace(g, c.as_polynomial(t));
        return h;
    }

    /// F with every coefficient materialised at truncation t.
    std::vector<YPoly> full_map(int t) const {
        std::vector<YPoly> out(unknowns);
        for (std::size_t i = 0; i < unknowns; ++i)
            for (const auto &[g, c] : f[i]) out[i].emplace(g, c.as_polynomial(t));
        return out;
    }

    const DiffOperator &op(int j) const { return ops.at(j - 1); }

    /// Structural checks shared by every route.
    void validate_shape() const {
        if (dim == 0 || unknowns == 0 || order < 1) throw DomainError("dim, unknowns and order must be positive");
        if (p.dim() != dim) throw DimensionMismatch("P has the wrong dimension");
        if (ops.size() != static_cast<std::size_t>(order)) throw DomainError("expected one operator per order");
        for (int j = 1; j <= order; ++j) {
            if (op(j).order() != j) throw DomainError("operator list is out of order");
            if (op(j).dim() != dim) throw DimensionMismatch("operator has the wrong dimension");
        }
        if (f.size() != unknowns) throw DomainError("expected one F component per unknown");
        for (const auto &comp : f)
            for (const auto &[g, c] : comp) {
                if (g.dim() != unknowns) throw DimensionMismatch("F term has the wrong number of unknowns");
                if (c.dim() != dim) throw DimensionMismatch("F coefficient has the wrong dimension");
            }
    }
};

/// sum_j P^j L_j(y) - F(x, y), certified up to min over y of its truncation.
inline SeriesVector residual(const ProblemSpec &prob, const SeriesVector &y) {
    if (y.size() != prob.unknowns) throw DimensionMismatch("solution has the wrong number of components");
    int t = y.front().trunc();
    for (const auto &s : y) t = std::min(t, s.trunc());
    const int big = t + prob.order * std::max(1, prob.p.max_degree()) + 1;
    const Series p = prob.p.as_polynomial(big);
    std::vector<Series> ppow{Series::constant(prob.dim, big, 1)};
    for (int j = 1; j <= prob.order; ++j) ppow.push_back(mps::mul(ppow.back(), p));
    SeriesVector fy = evaluate_ypoly(prob.full_map(t), y, prob.dim, t);
    SeriesVector out;
    for (std::size_t i = 0; i < prob.unknowns; ++i) {
        Series acc = -fy[i];
        for (int j = 1; j <= prob.order; ++j) {
            const DiffOperator &l = prob.op(j);
            if (l.is_zero()) continue;
            acc += mps::mul_sharp(ppow[j], diffops::apply(l.as_polynomial(t), y[i]));
        }
        out.push_back(acc.truncated(t));
    }
    return out;
}

inline bool all_zero(const SeriesVector &v) {
    return std::all_of(v.begin(), v.end(), [](const Series &s) { return s.is_zero(); });
}

inline int min_trunc(const SeriesVector &v) {
    int t = v.empty() ? 0 : v.front().trunc();
    for (const auto &s : v) t = std::min(t, s.trunc());
    return t;
}

} // namespace glab
