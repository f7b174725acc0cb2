#pragma once

// Truncated multivariate formal power series over the rationals.
//
// A Series stores the coefficients of every monomial of total degree
// <= trunc() and nothing else. Everything up to trunc() is exact; degrees
// beyond it are unknown. Zero coefficients are never stored, so two series
// compare equal iff dim, trunc and terms coincide.

#include <algorithm>
#include <climits>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "glab/errors.hpp"
#include "glab/multi_index.hpp"
#include "glab/rational.hpp"

namespace glab {

/// Order of a series: least total degree with a nonzero coefficient, or
/// infinite for the zero series.
class Order {
public:
    static Order infinite() { return Order(); }
    static Order finite(int v) { return Order(v); }

    bool is_infinite() const { return infinite_; }
    int value() const {
        if (infinite_) throw DomainError("order of the zero series is infinite");
        return value_;
    }
    bool operator==(const Order &) const = default;

private:
    Order() = default;
    explicit Order(int v) : infinite_(false), value_(v) {}
    bool infinite_ = true;
    int value_ = 0;
};

class Series {
public:
    using Terms = std::map<MultiIndex, Rational, GradedLex>;

    Series() = default;
    Series(std::size_t dim, int trunc) : dim_(dim), trunc_(trunc) {
        if (dim == 0) throw DomainError("series dimension must be positive");
        if (trunc < 0) throw DomainError("series truncation must be non-negative");
    }

    static Series zero(std::size_t dim, int trunc) { return Series(dim, trunc); }

    static Series constant(std::size_t dim, int trunc, const Rational &c) {
        Series s(dim, trunc);
        s.set(MultiIndex(dim), c);
        return s;
    }

    /// x_i (zero-based i).
    static Series variable(std::size_t dim, int trunc, std::size_t i) {
        Series s(dim, trunc);
        s.set(MultiIndex::unit(dim, i), 1);
        return s;
    }

    static Series monomial(std::size_t dim, int trunc, const MultiIndex &alpha, const Rational &c = 1) {
        Series s(dim, trunc);
        s.set(alpha, c);
        return s;
    }

    /// Builds a canonical series: zeros and terms above `trunc` are dropped.
    static Series from_terms(std::size_t dim, int trunc, const Terms &terms) {
        Series s(dim, trunc);
        for (const auto &[k, v] : terms) s.set(k, v);
        return s;
    }

    std::size_t dim() const { return dim_; }
    int trunc() const { return trunc_; }
    const Terms &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    Rational coeff(const MultiIndex &alpha) const {
        auto it = terms_.find(alpha);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    Rational constant_term() const { return coeff(MultiIndex(dim_)); }

    /// Highest stored total degree, -1 for the zero series.
    int max_degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.total(); }

    /// Sets one coefficient (removing it when zero). Ignored above trunc.
    void set(const MultiIndex &alpha, const Rational &c) {
        if (alpha.dim() != dim_) throw DimensionMismatch("monomial dimension does not match series");
        if (alpha.total() > trunc_) return;
        if (sgn(c) == 0) {
            terms_.erase(alpha);
        } else {
            Rational v(c);
            v.canonicalize();
            terms_[alpha] = std::move(v);
        }
    }

    void add_to(const MultiIndex &alpha, const Rational &c) {
        if (alpha.dim() != dim_) throw DimensionMismatch("monomial dimension does not match series");
        if (alpha.total() > trunc_ || sgn(c) == 0) return;
        auto [it, inserted] = terms_.try_emplace(alpha, c);
        if (inserted) {
            it->second.canonicalize();
        } else {
            it->second += c;
            if (sgn(it->second) == 0) terms_.erase(it);
        }
    }

    /// Lowers the truncation bound to min(trunc, d).
    Series truncated(int d) const {
        if (d >= trunc_) return *this;
        Series s(dim_, std::max(d, 0));
        for (const auto &[k, v] : terms_) {
            if (k.total() > s.trunc_) break;
            s.terms_.emplace_hint(s.terms_.end(), k, v);
        }
        return s;
    }

    /// Re-declares the truncation bound of polynomial data. Only valid when the
    /// stored terms are the complete polynomial (true for all parsed input data).
    Series as_polynomial(int d) const {
        if (d < max_degree()) return truncated(d);
        Series s(dim_, d);
        s.terms_ = terms_;
        return s;
    }

    /// Homogeneous component of degree n (same dim and trunc).
    Series component(int n) const {
        Series s(dim_, trunc_);
        for (const auto &[k, v] : terms_) {
            int t = k.total();
            if (t < n) continue;
            if (t > n) break;
            s.terms_.emplace_hint(s.terms_.end(), k, v);
        }
        return s;
    }

    Series operator-() const {
        Series s(*this);
        for (auto &[k, v] : s.terms_) v = -v;
        return s;
    }

    Series &operator+=(const Series &o) {
        check_dim(o);
        if (o.trunc_ < trunc_) *this = truncated(o.trunc_);
        for (const auto &[k, v] : o.terms_) add_to(k, v);
        return *this;
    }

    Series &operator-=(const Series &o) {
        check_dim(o);
        if (o.trunc_ < trunc_) *this = truncated(o.trunc_);
        for (const auto &[k, v] : o.terms_) add_to(k, -v);
        return *this;
    }

    friend Series operator+(Series a, const Series &b) { return a += b; }
    friend Series operator-(Series a, const Series &b) { return a -= b; }

    friend Series operator*(const Rational &c, const Series &s) {
        Series r(s.dim_, s.trunc_);
        if (sgn(c) == 0) return r;
        for (const auto &[k, v] : s.terms_) r.terms_.emplace_hint(r.terms_.end(), k, c * v);
        return r;
    }

    bool operator==(const Series &o) const {
        return dim_ == o.dim_ && trunc_ == o.trunc_ && terms_ == o.terms_;
    }

    /// Equality of the data both series certify: degrees <= min(trunc).
    bool agrees_with(const Series &o) const {
        if (dim_ != o.dim_) return false;
        int t = std::min(trunc_, o.trunc_);
        return truncated(t).terms_ == o.truncated(t).terms_;
    }

    void check_dim(const Series &o) const {
        if (o.dim_ != dim_) throw DimensionMismatch("series dimension mismatch");
    }

    std::string to_string() const;

private:
    std::size_t dim_ = 1;
    int trunc_ = 0;
    Terms terms_;
};

namespace mps {

namespace detail {

/// Product of term maps keeping total degrees <= max_deg.
inline void accumulate_product(const Series::Terms &a, const Series::Terms &b, int max_deg, Series &out) {
    for (const auto &[ka, va] : a) {
        const int da = ka.total();
        if (da > max_deg) break;
        for (const auto &[kb, vb] : b) {
            if (da + kb.total() > max_deg) break;
            out.add_to(ka + kb, va * vb);
        }
    }
}

inline int order_or_beyond(const Series &s) {
    return s.is_zero() ? s.trunc() + 1 : s.terms().begin()->first.total();
}

} // namespace detail

/// Product truncated at min(a.trunc, b.trunc).
inline Series mul(const Series &a, const Series &b) {
    a.check_dim(b);
    Series out(a.dim(), std::min(a.trunc(), b.trunc()));
    detail::accumulate_product(a.terms(), b.terms(), out.trunc(), out);
    return out;
}

/// Product with the order-aware bound min(a.trunc + o(b), b.trunc + o(a)):
/// a factor of high order certifies more degrees of the product.
inline Series mul_sharp(const Series &a, const Series &b) {
    a.check_dim(b);
    const long ta = a.trunc(), tb = b.trunc();
    long t = std::min(ta + detail::order_or_beyond(b), tb + detail::order_or_beyond(a));
    t = std::min<long>(t, INT_MAX / 4);
    Series out(a.dim(), static_cast<int>(t));
    detail::accumulate_product(a.terms(), b.terms(), out.trunc(), out);
    return out;
}

inline Series pow(const Series &a, unsigned n) {
    Series r = Series::constant(a.dim(), a.trunc(), 1);
    for (unsigned i = 0; i < n; ++i) r = mul(r, a);
    return r;
}

inline Series pow_sharp(const Series &a, unsigned n) {
    Series r = Series::constant(a.dim(), a.trunc(), 1);
    for (unsigned i = 0; i < n; ++i) r = mul_sharp(r, a);
    return r;
}

/// Iterated partial derivative d^|alpha| / dx^alpha. trunc drops by |alpha|.
inline Series diff(const Series &f, const MultiIndex &alpha) {
    if (alpha.dim() != f.dim()) throw DimensionMismatch("derivative index dimension mismatch");
    Series out(f.dim(), std::max(f.trunc() - alpha.total(), 0));
    for (const auto &[beta, c] : f.terms()) {
        if (!(alpha <= beta)) continue;
        Integer factor = 1;
        for (std::size_t i = 0; i < alpha.dim(); ++i)
            for (int r = 0; r < alpha[i]; ++r) factor *= beta[i] - r;
        out.add_to(beta - alpha, c * Rational(factor));
    }
    return out;
}

inline Order order(const Series &f) {
    if (f.is_zero()) return Order::infinite();
    return Order::finite(f.terms().begin()->first.total());
}

/// f(images_1, ..., images_d). Every image must vanish at the origin.
inline Series substitute(const Series &f, const std::vector<Series> &images) {
    if (images.size() != f.dim())
        throw DimensionMismatch("substitute needs one image per variable");
    if (images.empty()) throw DimensionMismatch("substitute needs at least one image");
    const std::size_t target_dim = images.front().dim();
    int t = f.trunc();
    for (const auto &img : images) {
        if (img.dim() != target_dim) throw DimensionMismatch("substitution images disagree in dimension");
        if (sgn(img.constant_term()) != 0)
            throw NonNilpotentSubstitution("substitution image has a nonzero constant term");
        t = std::min(t, img.trunc());
    }
    std::vector<std::vector<Series>> powers(images.size());
    for (std::size_t i = 0; i < images.size(); ++i)
        powers[i].push_back(Series::constant(target_dim, t, 1));
    auto power_of = [&](std::size_t i, int e) -> const Series & {
        while (static_cast<int>(powers[i].size()) <= e)
            powers[i].push_back(mul(powers[i].back(), images[i].truncated(t)));
        return powers[i][e];
    };
    Series out(target_dim, t);
    for (const auto &[beta, c] : f.terms()) {
        if (beta.total() > t) break;
        Series term = Series::constant(target_dim, t, c);
        for (std::size_t i = 0; i < beta.dim(); ++i)
            if (beta[i] > 0) term = mul(term, power_of(i, beta[i]));
        out += term;
    }
    return out;
}

/// Multiplicative inverse of a unit u (u(0) != 0), same truncation.
inline Series invert_unit(const Series &u) {
    const Rational u0 = u.constant_term();
    if (sgn(u0) == 0) throw NotAUnit("series has zero constant term");
    const int t = u.trunc();
    std::vector<Series> uc, vc;
    for (int n = 0; n <= t; ++n) uc.push_back(u.component(n));
    const Rational inv0 = 1 / u0;
    Series out(u.dim(), t);
    vc.push_back(Series::constant(u.dim(), t, inv0));
    for (int n = 1; n <= t; ++n) {
        Series acc(u.dim(), t);
        for (int i = 1; i <= n; ++i) {
            if (uc[i].is_zero() || vc[n - i].is_zero()) continue;
            detail::accumulate_product(uc[i].terms(), vc[n - i].terms(), n, acc);
        }
        vc.push_back(-inv0 * acc);
    }
    for (const auto &c : vc) out += c;
    return out;
}

namespace detail {

/// Exact division of homogeneous r by homogeneous g (same dim) using the
/// graded-lex leading term of g. Returns the quotient or, on failure, sets
/// `witness` to the first monomial left in the remainder.
inline bool divide_homogeneous(const Series::Terms &r_in, const Series::Terms &g, std::size_t dim,
                               Series::Terms &q, MultiIndex &witness) {
    Series::Terms r = r_in;
    const auto &[lt_exp, lt_coef] = *g.begin();
    Series::Terms remainder;
    while (!r.empty()) {
        auto [exp, coef] = *r.begin();
        if (lt_exp <= exp) {
            MultiIndex qexp = exp - lt_exp;
            Rational qc = coef / lt_coef;
            q[qexp] += qc;
            for (const auto &[ge, gc] : g) {
                MultiIndex k = qexp + ge;
                auto it = r.find(k);
                Rational v = (it == r.end() ? Rational(0) : it->second) - qc * gc;
                if (sgn(v) == 0) {
                    if (it != r.end()) r.erase(it);
                } else if (it == r.end()) {
                    r.emplace(k, v);
                } else {
                    it->second = v;
                }
            }
        } else {
            remainder.emplace(exp, coef);
            r.erase(r.begin());
        }
    }
    (void)dim;
    if (!remainder.empty()) {
        witness = remainder.begin()->first;
        return false;
    }
    return true;
}

} // namespace detail

/// q with a = b * q as power series, computed degree by degree against the
/// lowest homogeneous component of b. The quotient is exact up to degree
/// min(a.trunc, b.trunc) - o(b). Throws DivisibilityViolation with the
/// lowest-degree failing monomial.
inline Series divide_exact(const Series &a, const Series &b) {
    a.check_dim(b);
    if (b.is_zero()) throw DomainError("division by the zero series");
    const int o = b.terms().begin()->first.total();
    const int tq = std::min(a.trunc(), b.trunc()) - o;
    if (tq < 0) throw TruncationTooSmall("truncation too small to certify any quotient degree");
    for (const auto &[k, v] : a.terms()) {
        if (k.total() >= o) break;
        throw DivisibilityViolation("dividend has terms below the divisor's order", k.values());
    }
    std::vector<Series::Terms> bc(tq + 1);
    for (const auto &[k, v] : b.terms()) {
        int t = k.total() - o;
        if (t > tq) break;
        bc[t].emplace(k, v);
    }
    std::vector<Series::Terms> ac(tq + 1);
    for (const auto &[k, v] : a.terms()) {
        int t = k.total() - o;
        if (t < 0) continue;
        if (t > tq) break;
        ac[t].emplace(k, v);
    }
    std::vector<Series::Terms> qc;
    Series out(a.dim(), tq);
    for (int n = 0; n <= tq; ++n) {
        Series rhs = Series::from_terms(a.dim(), n + o, ac[n]);
        for (int i = 1; i <= n; ++i) {
            if (bc[i].empty() || qc[n - i].empty()) continue;
            Series prod(a.dim(), n + o);
            detail::accumulate_product(bc[i], qc[n - i], n + o, prod);
            rhs -= prod;
        }
        Series::Terms q;
        MultiIndex witness;
        if (!rhs.is_zero() && !detail::divide_homogeneous(rhs.terms(), bc[0], a.dim(), q, witness))
            throw DivisibilityViolation("not divisible: remainder at degree " + std::to_string(n + o),
                                        witness.values());
        for (const auto &[k, v] : q) out.add_to(k, v);
        qc.push_back(std::move(q));
    }
    return out;
}

/// sum_beta |a_beta| rho^|beta|.
inline Rational majorant_norm(const Series &f, const Rational &rho) {
    if (sgn(rho) <= 0) throw DomainError("majorant radius must be positive");
    Rational s = 0;
    for (const auto &[k, v] : f.terms()) s += abs(v) * glab::pow(rho, static_cast<unsigned long>(k.total()));
    return s;
}

/// f(M x) for an invertible rational d x d matrix M.
inline Series linear_change(const Series &f, const QMatrix &m) {
    const std::size_t d = f.dim();
    if (m.rows() != d || m.cols() != d) throw DimensionMismatch("linear change needs a d x d matrix");
    if (sgn(m.determinant()) == 0) throw SingularMatrix("linear change matrix is singular");
    std::vector<Series> images;
    for (std::size_t i = 0; i < d; ++i) {
        Series img(d, f.trunc());
        for (std::size_t j = 0; j < d; ++j) img.add_to(MultiIndex::unit(d, j), m(i, j));
        images.push_back(std::move(img));
    }
    return substitute(f, images);
}

} // namespace mps

inline std::string Series::to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto &[k, v] : terms_) {
        Rational c = v;
        bool neg = sgn(c) < 0;
        if (neg) c = -c;
        if (first)
            s += neg ? "-" : "";
        else
            s += neg ? " - " : " + ";
        first = false;
        std::string mono;
        for (std::size_t i = 0; i < k.dim(); ++i) {
            if (k[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += "x" + std::to_string(i + 1);
            if (k[i] > 1) mono += "^" + std::to_string(k[i]);
        }
        if (mono.empty())
            s += glab::to_string(c);
        else if (c == 1)
            s += mono;
        else
            s += glab::to_string(c) + "*" + mono;
    }
    return s;
}

// JSON: {"dim":d,"trunc":D,"terms":[{"exp":[..],"coef":"p/q"},...]}
inline void to_json(nlohmann::json &j, const Series &s) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &[k, v] : s.terms()) terms.push_back({{"exp", k.values()}, {"coef", to_string(v)}});
    j = {{"dim", s.dim()}, {"trunc", s.trunc()}, {"terms", std::move(terms)}};
}

inline void from_json(const nlohmann::json &j, Series &s) {
    const auto dim = j.at("dim").get<std::size_t>();
    const auto trunc = j.at("trunc").get<int>();
    Series out(dim, trunc);
    for (const auto &t : j.at("terms")) {
        MultiIndex e(t.at("exp").get<std::vector<int>>());
        auto c = parse_rational(t.at("coef").get<std::string>());
        if (!c) throw DomainError("malformed rational coefficient in series JSON");
        if (e.dim() != dim) throw DimensionMismatch("series JSON exponent has wrong length");
        out.add_to(e, *c);
    }
    s = std::move(out);
}

} // namespace glab
