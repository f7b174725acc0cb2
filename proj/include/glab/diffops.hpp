#pragma once

// Homogeneous differential operators L = sum_{|alpha|=j} a_alpha(x) d_alpha,
// their star symbols, Faa di Bruno tables and the combinatorics behind them.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "glab/errors.hpp"
#include "glab/multi_index.hpp"
#include "glab/rational.hpp"
#include "glab/series.hpp"

namespace glab {

class DiffOperator {
public:
    using Terms = std::map<MultiIndex, Series, GradedLex>;

    DiffOperator() = default;
    DiffOperator(std::size_t dim, int order) : dim_(dim), order_(order) {
        if (order < 1) throw DomainError("operator order must be at least 1");
    }

    std::size_t dim() const { return dim_; }
    int order() const { return order_; }
    const Terms &terms() const { return terms_; }

    /// Adds coef * d_alpha. Zero coefficients are dropped.
    void add_term(const MultiIndex &alpha, const Series &coef) {
        if (alpha.dim() != dim_ || coef.dim() != dim_)
            throw DimensionMismatch("operator term dimension mismatch");
        if (alpha.total() != order_)
            throw DomainError("operator term " + alpha.to_string() + " does not have order " +
                              std::to_string(order_));
        auto it = terms_.find(alpha);
        if (it == terms_.end()) {
            if (!coef.is_zero()) terms_.emplace(alpha, coef);
            return;
        }
        it->second += coef;
        if (it->second.is_zero()) terms_.erase(it);
    }

    bool is_zero() const { return terms_.empty(); }

    /// Highest degree among the (polynomial) coefficients, -1 if zero.
    int coefficient_degree() const {
        int d = -1;
        for (const auto &[a, c] : terms_) d = std::max(d, c.max_degree());
        return d;
    }

    /// Re-declares polynomial coefficients at truncation t.
    DiffOperator as_polynomial(int t) const {
        DiffOperator out(dim_, order_);
        for (const auto &[a, c] : terms_) out.terms_.emplace(a, c.as_polynomial(t));
        return out;
    }

    bool operator==(const DiffOperator &) const = default;

private:
    std::size_t dim_ = 1;
    int order_ = 1;
    Terms terms_;
};

namespace diffops {

/// sum_alpha a_alpha * d_alpha f
inline Series apply(const DiffOperator &l, const Series &f) {
    if (l.dim() != f.dim()) throw DimensionMismatch("operator and series dimensions differ");
    Series out(f.dim(), std::max(f.trunc() - l.order(), 0));
    for (const auto &[alpha, a] : l.terms()) out += mps::mul(a, mps::diff(f, alpha));
    return out;
}

/// (d_1 P)^alpha_1 ... (d_d P)^alpha_d
inline Series partial_star(const MultiIndex &alpha, const Series &p) {
    if (alpha.dim() != p.dim()) throw DimensionMismatch("multi-index and series dimensions differ");
    if (alpha.total() < 1) throw DomainError("partial_star needs |alpha| >= 1");
    Series out = Series::constant(p.dim(), std::max(p.trunc() - 1, 0), 1);
    for (std::size_t i = 0; i < alpha.dim(); ++i) {
        if (alpha[i] == 0) continue;
        const Series dp = mps::diff(p, MultiIndex::unit(p.dim(), i));
        for (int r = 0; r < alpha[i]; ++r) out = mps::mul(out, dp);
    }
    return out;
}

/// L*(P) = sum_alpha a_alpha * partial_star(alpha, P)
inline Series star(const DiffOperator &l, const Series &p) {
    if (l.dim() != p.dim()) throw DimensionMismatch("operator and series dimensions differ");
    Series out(p.dim(), std::max(p.trunc() - 1, 0));
    for (const auto &[alpha, a] : l.terms()) out += mps::mul(a, partial_star(alpha, p));
    return out;
}

/// n (n-1) ... (n-j+1); 1 for j = 0 and 0 for j > n.
inline Integer falling_factorial(long n, long j) {
    if (n < 0 || j < 0) throw DomainError("falling_factorial needs non-negative arguments");
    if (j > n) return 0;
    Integer r = 1;
    for (long i = 0; i < j; ++i) r *= n - i;
    return r;
}

/// Signed Stirling numbers of the first kind s(j, l), 1 <= l <= j, so that
/// t^j d_t^j = sum_l s(j,l) (t d_t)^l.
inline Integer stirling_first(int j, int l) {
    if (j < 1 || l < 1 || l > j) throw DomainError("stirling_first needs 1 <= l <= j");
    // row[l] = s(r, l); s(r+1, l) = s(r, l-1) - r s(r, l)
    std::vector<Integer> row(j + 1, 0);
    row[0] = 1;
    for (int r = 0; r < j; ++r) {
        std::vector<Integer> next(j + 1, 0);
        for (int c = 1; c <= r + 1; ++c) next[c] = row[c - 1] - Integer(r) * (c <= r ? row[c] : Integer(0));
        row = std::move(next);
    }
    return row[l];
}

/// A_{alpha,j}, 1 <= j <= |alpha|, with d_alpha(P^n) = sum_j n!/(n-j)! P^{n-j} A_{alpha,j}.
struct FaaDiBrunoTable {
    Series p;
    MultiIndex alpha;
    std::vector<Series> a; // a[j-1] = A_{alpha,j}

    const Series &at(int j) const {
        if (j < 1 || j > static_cast<int>(a.size())) throw DomainError("table index out of range");
        return a[j - 1];
    }
};

enum class Path { LeftToRight, RightToLeft };

/// Builds the table by the recurrence
///   A_{e_l,1} = d_l P,  A_{b+e_l,j} = d_l A_{b,j} + d_l P * A_{b,j-1}
/// walking from e_l to alpha one coordinate step at a time.
inline FaaDiBrunoTable faadibruno(const Series &p, const MultiIndex &alpha, Path path = Path::LeftToRight) {
    if (alpha.dim() != p.dim()) throw DimensionMismatch("multi-index and series dimensions differ");
    if (alpha.total() < 1) throw DomainError("faadibruno needs |alpha| >= 1");
    std::vector<std::size_t> steps;
    for (std::size_t i = 0; i < alpha.dim(); ++i)
        for (int r = 0; r < alpha[i]; ++r) steps.push_back(i);
    if (path == Path::RightToLeft) std::reverse(steps.begin(), steps.end());

    std::vector<Series> dp;
    for (std::size_t i = 0; i < p.dim(); ++i) dp.push_back(mps::diff(p, MultiIndex::unit(p.dim(), i)));

    std::vector<Series> a{dp[steps.front()]};
    for (std::size_t s = 1; s < steps.size(); ++s) {
        const std::size_t l = steps[s];
        const MultiIndex el = MultiIndex::unit(p.dim(), l);
        std::vector<Series> next;
        for (std::size_t j = 1; j <= a.size() + 1; ++j) {
            Series term = j <= a.size() ? mps::diff(a[j - 1], el) : Series(p.dim(), 0);
            if (j >= 2) {
                Series prod = mps::mul(dp[l], a[j - 2]);
                term = j <= a.size() ? term + prod : prod;
            }
            next.push_back(std::move(term));
        }
        a = std::move(next);
    }
    return {p, alpha, std::move(a)};
}

/// Read-mostly memo for Faa di Bruno tables keyed by (P, alpha). Concurrent
/// lookups share the lock; insertion takes it exclusively.
class FaaDiBrunoCache {
public:
    std::shared_ptr<const FaaDiBrunoTable> get(const Series &p, const MultiIndex &alpha) {
        const std::string key = key_of(p, alpha);
        {
            std::shared_lock lock(mutex_);
            auto it = tables_.find(key);
            if (it != tables_.end()) return it->second;
        }
        auto table = std::make_shared<const FaaDiBrunoTable>(faadibruno(p, alpha));
        std::unique_lock lock(mutex_);
        return tables_.try_emplace(key, std::move(table)).first->second;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return tables_.size();
    }

private:
    static std::string key_of(const Series &p, const MultiIndex &alpha) {
        nlohmann::json j = p;
        return alpha.to_string() + j.dump();
    }

    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<const FaaDiBrunoTable>> tables_;
};

struct DivisibilityVerdict {
    int j = 0;
    bool divisible = false;
    bool zero_operator = false;
    std::optional<Series> quotient; // phi_j with L_j*(P) = phi_j P
    std::vector<int> witness;       // failing monomial when not divisible
};

struct DivisibilityReport {
    bool ok = true;
    std::vector<DivisibilityVerdict> per_order;
};

/// Degree large enough to hold L*(P) exactly for polynomial data.
inline int star_degree_bound(const DiffOperator &l, const Series &p) {
    return std::max(0, l.coefficient_degree()) + l.order() * std::max(0, p.max_degree() - 1);
}

/// Exact L_j*(P) / P for polynomial P and coefficients, or the failing monomial.
inline DivisibilityVerdict divide_star(const DiffOperator &l, const Series &p) {
    DivisibilityVerdict v;
    v.j = l.order();
    const int t = star_degree_bound(l, p) + p.max_degree() + 1;
    const Series pp = p.as_polynomial(t + 1);
    const Series s = star(l.as_polynomial(t + 1), pp);
    if (l.is_zero() || s.is_zero()) {
        v.zero_operator = l.is_zero();
        v.divisible = true;
        v.quotient = Series(p.dim(), t - mps::order(p).value());
        return v;
    }
    try {
        v.quotient = mps::divide_exact(s, pp);
        v.divisible = true;
    } catch (const DivisibilityViolation &e) {
        v.witness = e.witness();
    }
    return v;
}

/// Checks that P divides L_j*(P) for each operator. Zero operators pass.
inline DivisibilityReport check_divisibility(const Series &p, const std::vector<DiffOperator> &ls) {
    if (p.is_zero()) throw DomainError("P must be nonzero");
    DivisibilityReport r;
    for (const auto &l : ls) {
        r.per_order.push_back(divide_star(l, p));
        r.ok = r.ok && r.per_order.back().divisible;
    }
    return r;
}

} // namespace diffops

// JSON: {"order":j,"terms":[{"alpha":[..],"coef":<Series>},...]}
inline void to_json(nlohmann::json &j, const DiffOperator &l) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &[a, c] : l.terms()) terms.push_back({{"alpha", a.values()}, {"coef", c}});
    j = {{"order", l.order()}, {"terms", std::move(terms)}};
}

inline DiffOperator diff_operator_from_json(const nlohmann::json &j, std::size_t dim) {
    DiffOperator l(dim, j.at("order").get<int>());
    for (const auto &t : j.at("terms"))
        l.add_term(MultiIndex(t.at("alpha").get<std::vector<int>>()), t.at("coef").get<Series>());
    return l;
}

} // namespace glab
