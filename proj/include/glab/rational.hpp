#pragma once

// Exact integer/rational scalars (GMP) and small dense rational matrices.

#include <gmpxx.h>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glab/errors.hpp"

namespace glab {

using Integer = mpz_class;
using Rational = mpq_class;

/// Canonical text form: "p" for integers, "p/q" otherwise (q > 0, gcd 1).
inline std::string to_string(const Rational &q) {
    Rational c(q);
    c.canonicalize();
    return c.get_str();
}

inline std::string to_string(const Integer &z) { return z.get_str(); }

/// Parses "p" or "p/q" with optional sign. Returns nullopt on malformed input
/// or a zero denominator.
inline std::optional<Rational> parse_rational(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::string s(text);
    auto slash = s.find('/');
    auto valid_int = [](const std::string &t, bool allow_sign) {
        if (t.empty()) return false;
        std::size_t i = 0;
        if (allow_sign && (t[0] == '-' || t[0] == '+')) i = 1;
        if (i == t.size()) return false;
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') return false;
        return true;
    };
    std::string num = s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    if (!valid_int(num, true) || !valid_int(den, false)) return std::nullopt;
    if (num[0] == '+') num.erase(0, 1);
    Integer p(num, 10), q(den, 10);
    if (q == 0) return std::nullopt;
    Rational r(p, q);
    r.canonicalize();
    return r;
}

inline Rational abs(const Rational &q) { return ::abs(q); }

inline Rational pow(const Rational &base, unsigned long e) {
    Integer num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
    Rational r(num, den);
    r.canonicalize();
    return r;
}

/// Natural log of |z| for arbitrarily large integers (z != 0).
inline double log_abs(const Integer &z) {
    long exp = 0;
    double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log(std::fabs(mant)) + static_cast<double>(exp) * std::log(2.0);
}

/// Natural log of |q| without overflowing doubles (q != 0).
inline double log_abs(const Rational &q) {
    return log_abs(Integer(q.get_num())) - log_abs(Integer(q.get_den()));
}

inline double to_double(const Rational &q) { return q.get_d(); }

/// Dense rational matrix, row-major.
class QMatrix {
public:
    QMatrix() = default;
    QMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static QMatrix identity(std::size_t n) {
        QMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Rational &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    bool operator==(const QMatrix &) const = default;

    QMatrix operator*(const QMatrix &o) const {
        if (cols_ != o.rows_) throw DimensionMismatch("QMatrix product shape mismatch");
        QMatrix out(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                if (sgn((*this)(i, k)) == 0) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) out(i, j) += (*this)(i, k) * o(k, j);
            }
        return out;
    }

    QMatrix operator-(const QMatrix &o) const {
        QMatrix out(*this);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= o.data_[i];
        return out;
    }

    QMatrix operator+(const QMatrix &o) const {
        QMatrix out(*this);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += o.data_[i];
        return out;
    }

    QMatrix scaled(const Rational &s) const {
        QMatrix out(*this);
        for (auto &v : out.data_) v *= s;
        return out;
    }

    /// Determinant by Bareiss fraction-free elimination.
    Rational determinant() const {
        if (rows_ != cols_) throw DimensionMismatch("determinant of non-square matrix");
        const std::size_t n = rows_;
        if (n == 0) return 1;
        QMatrix m(*this);
        Rational prev = 1;
        int sign = 1;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (sgn(m(k, k)) == 0) {
                std::size_t p = k + 1;
                while (p < n && sgn(m(p, k)) == 0) ++p;
                if (p == n) return 0;
                for (std::size_t c = 0; c < n; ++c) std::swap(m(k, c), m(p, c));
                sign = -sign;
            }
            for (std::size_t i = k + 1; i < n; ++i)
                for (std::size_t j = k + 1; j < n; ++j) {
                    m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
                }
            prev = m(k, k);
        }
        return sign * m(n - 1, n - 1);
    }

    /// Exact inverse by Gauss-Jordan elimination; nullopt when singular.
    std::optional<QMatrix> inverse() const {
        if (rows_ != cols_) throw DimensionMismatch("inverse of non-square matrix");
        const std::size_t n = rows_;
        QMatrix a(*this), inv = identity(n);
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            while (piv < n && sgn(a(piv, col)) == 0) ++piv;
            if (piv == n) return std::nullopt;
            if (piv != col)
                for (std::size_t c = 0; c < n; ++c) {
                    std::swap(a(col, c), a(piv, c));
                    std::swap(inv(col, c), inv(piv, c));
                }
            Rational scale = 1 / a(col, col);
            for (std::size_t c = 0; c < n; ++c) {
                a(col, c) *= scale;
                inv(col, c) *= scale;
            }
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col || sgn(a(r, col)) == 0) continue;
                Rational f = a(r, col);
                for (std::size_t c = 0; c < n; ++c) {
                    a(r, c) -= f * a(col, c);
                    inv(r, c) -= f * inv(col, c);
                }
            }
        }
        return inv;
    }

    /// max_i sum_j |m_ij|
    Rational row_sum_norm() const {
        Rational best = 0;
        for (std::size_t i = 0; i < rows_; ++i) {
            Rational s = 0;
            for (std::size_t j = 0; j < cols_; ++j) s += abs((*this)(i, j));
            if (s > best) best = s;
        }
        return best;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Rational> data_;
};

/// Solves a * x = b exactly (a square). nullopt when a is singular.
inline std::optional<std::vector<Rational>> solve_linear(const QMatrix &a, const std::vector<Rational> &b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw DimensionMismatch("solve_linear shape mismatch");
    QMatrix m(n, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = a(i, j);
        m(i, n) = b[i];
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && sgn(m(piv, col)) == 0) ++piv;
        if (piv == n) return std::nullopt;
        if (piv != col)
            for (std::size_t c = 0; c <= n; ++c) std::swap(m(col, c), m(piv, c));
        for (std::size_t r = col + 1; r < n; ++r) {
            if (sgn(m(r, col)) == 0) continue;
            Rational f = m(r, col) / m(col, col);
            for (std::size_t c = col; c <= n; ++c) m(r, c) -= f * m(col, c);
        }
    }
    std::vector<Rational> x(n);
    for (std::size_t i = n; i-- > 0;) {
        Rational s = m(i, n);
        for (std::size_t j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
        x[i] = s / m(i, i);
    }
    return x;
}

} // namespace glab
