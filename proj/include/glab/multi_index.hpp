#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "glab/errors.hpp"
#include "glab/rational.hpp"

namespace glab {

/// Exponent vector alpha in N^d.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::size_t dim) : e_(dim, 0) {}
    MultiIndex(std::initializer_list<int> values) : e_(values) { validate(); }
    explicit MultiIndex(std::vector<int> values) : e_(std::move(values)) { validate(); }

    /// e_i in dimension `dim`.
    static MultiIndex unit(std::size_t dim, std::size_t i) {
        MultiIndex m(dim);
        m.e_.at(i) = 1;
        return m;
    }

    std::size_t dim() const { return e_.size(); }
    int operator[](std::size_t i) const { return e_[i]; }
    int &operator[](std::size_t i) { return e_[i]; }
    const std::vector<int> &values() const { return e_; }

    int total() const { return std::accumulate(e_.begin(), e_.end(), 0); }
    bool is_zero() const {
        return std::all_of(e_.begin(), e_.end(), [](int v) { return v == 0; });
    }

    MultiIndex operator+(const MultiIndex &o) const {
        check_dim(o);
        MultiIndex r(*this);
        for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
        return r;
    }

    /// Componentwise difference; requires o <= *this.
    MultiIndex operator-(const MultiIndex &o) const {
        check_dim(o);
        if (!(o <= *this)) throw DomainError("MultiIndex subtraction would go negative");
        MultiIndex r(*this);
        for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] -= o.e_[i];
        return r;
    }

    /// Componentwise partial order.
    bool operator<=(const MultiIndex &o) const {
        check_dim(o);
        for (std::size_t i = 0; i < e_.size(); ++i)
            if (e_[i] > o.e_[i]) return false;
        return true;
    }

    bool operator==(const MultiIndex &) const = default;

    /// binom(alpha, beta) = prod binom(alpha_i, beta_i); zero unless beta <= alpha.
    Integer binomial(const MultiIndex &beta) const {
        check_dim(beta);
        Integer r = 1;
        for (std::size_t i = 0; i < e_.size(); ++i) {
            if (beta.e_[i] > e_[i]) return 0;
            Integer b;
            mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(e_[i]),
                         static_cast<unsigned long>(beta.e_[i]));
            r *= b;
        }
        return r;
    }

    /// Every beta with beta <= *this.
    std::vector<MultiIndex> lower_set() const {
        std::vector<MultiIndex> out{MultiIndex(dim())};
        for (std::size_t i = 0; i < e_.size(); ++i) {
            std::vector<MultiIndex> next;
            for (const auto &m : out)
                for (int v = 0; v <= e_[i]; ++v) {
                    MultiIndex c(m);
                    c.e_[i] = v;
                    next.push_back(std::move(c));
                }
            out = std::move(next);
        }
        return out;
    }

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < e_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(e_[i]);
        }
        return s + ")";
    }

private:
    void validate() const {
        for (int v : e_)
            if (v < 0) throw DomainError("MultiIndex entries must be non-negative");
    }
    void check_dim(const MultiIndex &o) const {
        if (o.dim() != dim()) throw DimensionMismatch("MultiIndex dimension mismatch");
    }

    std::vector<int> e_;
};

/// Graded lexicographic order: lower total degree first, then larger
/// leading exponents first (x1^2 < x1*x2 < x2^2 in degree two).
struct GradedLex {
    bool operator()(const MultiIndex &a, const MultiIndex &b) const {
        const int ta = a.total(), tb = b.total();
        if (ta != tb) return ta < tb;
        return a.values() > b.values();
    }
};

/// All exponent vectors of total degree exactly n in dimension d, in graded-lex order.
inline std::vector<MultiIndex> monomials_of_degree(std::size_t d, int n) {
    std::vector<MultiIndex> out;
    if (d == 0) return out;
    std::vector<int> cur(d, 0);
    auto rec = [&](auto &&self, std::size_t i, int left) -> void {
        if (i + 1 == d) {
            cur[i] = left;
            out.emplace_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[i] = v;
            self(self, i + 1, left - v);
        }
    };
    rec(rec, 0, n);
    return out;
}

} // namespace glab
