#pragma once

// Dense matrices and vectors of Series sharing dim and trunc.

#include <cstddef>
#include <vector>

#include "glab/errors.hpp"
#include "glab/rational.hpp"
#include "glab/series.hpp"

namespace glab {

using SeriesVector = std::vector<Series>;

class SeriesMatrix {
public:
    SeriesMatrix() = default;
    SeriesMatrix(std::size_t rows, std::size_t cols, std::size_t dim, int trunc)
        : rows_(rows), cols_(cols), data_(rows * cols, Series(dim, trunc)) {
        if (rows == 0 || cols == 0) throw DimensionMismatch("series matrix must be non-empty");
    }

    static SeriesMatrix identity(std::size_t n, std::size_t dim, int trunc) {
        SeriesMatrix m(n, n, dim, trunc);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = Series::constant(dim, trunc, 1);
        return m;
    }

    static SeriesMatrix from_constant(const QMatrix &q, std::size_t dim, int trunc) {
        SeriesMatrix m(q.rows(), q.cols(), dim, trunc);
        for (std::size_t i = 0; i < q.rows(); ++i)
            for (std::size_t j = 0; j < q.cols(); ++j) m(i, j) = Series::constant(dim, trunc, q(i, j));
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t dim() const { return data_.front().dim(); }
    int trunc() const {
        int t = data_.front().trunc();
        for (const auto &s : data_) t = std::min(t, s.trunc());
        return t;
    }

    Series &operator()(std::size_t r, std::size_t c) { return data_.at(r * cols_ + c); }
    const Series &operator()(std::size_t r, std::size_t c) const { return data_.at(r * cols_ + c); }

    bool operator==(const SeriesMatrix &) const = default;

    /// Constant terms as a rational matrix.
    QMatrix at_zero() const {
        QMatrix q(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) q(i, j) = (*this)(i, j).constant_term();
        return q;
    }

    SeriesMatrix truncated(int d) const {
        SeriesMatrix m(*this);
        for (auto &s : m.data_) s = s.truncated(d);
        return m;
    }

    SeriesMatrix as_polynomial(int d) const {
        SeriesMatrix m(*this);
        for (auto &s : m.data_) s = s.as_polynomial(d);
        return m;
    }

    SeriesMatrix operator+(const SeriesMatrix &o) const {
        check_shape(o);
        SeriesMatrix m(*this);
        for (std::size_t i = 0; i < data_.size(); ++i) m.data_[i] += o.data_[i];
        return m;
    }

    SeriesMatrix operator-(const SeriesMatrix &o) const {
        check_shape(o);
        SeriesMatrix m(*this);
        for (std::size_t i = 0; i < data_.size(); ++i) m.data_[i] -= o.data_[i];
        return m;
    }

    SeriesMatrix operator*(const SeriesMatrix &o) const {
        if (cols_ != o.rows_) throw DimensionMismatch("series matrix product shape mismatch");
        SeriesMatrix m(rows_, o.cols_, dim(), std::min(trunc(), o.trunc()));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < o.cols_; ++j)
                for (std::size_t k = 0; k < cols_; ++k) m(i, j) += mps::mul((*this)(i, k), o(k, j));
        return m;
    }

    SeriesVector operator*(const SeriesVector &v) const {
        if (v.size() != cols_) throw DimensionMismatch("series matrix-vector shape mismatch");
        int t = trunc();
        for (const auto &s : v) t = std::min(t, s.trunc());
        SeriesVector out(rows_, Series(dim(), t));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) out[i] += mps::mul((*this)(i, k), v[k]);
        return out;
    }

private:
    void check_shape(const SeriesMatrix &o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("series matrix shape mismatch");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Series> data_;
};

/// Inverse of a square series matrix with M(0) invertible, same truncation.
/// Degree-n component: V_n = -M_0^{-1} sum_{i>=1} M_i V_{n-i}.
inline SeriesMatrix invert_series_matrix(const SeriesMatrix &m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("only square series matrices can be inverted");
    const std::size_t n = m.rows(), d = m.dim();
    const int t = m.trunc();
    auto m0inv = m.at_zero().inverse();
    if (!m0inv) throw SingularLinearPart("matrix is singular at the origin");

    // comps[deg] = homogeneous component of M as a SeriesMatrix.
    std::vector<SeriesMatrix> mc, vc;
    for (int deg = 0; deg <= t; ++deg) {
        SeriesMatrix c(n, n, d, t);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) c(i, j) = m(i, j).truncated(t).component(deg);
        mc.push_back(std::move(c));
    }
    const SeriesMatrix neg_inv = SeriesMatrix::from_constant(m0inv->scaled(-1), d, t);
    vc.push_back(SeriesMatrix::from_constant(*m0inv, d, t));
    for (int deg = 1; deg <= t; ++deg) {
        SeriesMatrix acc(n, n, d, t);
        for (int i = 1; i <= deg; ++i) acc = acc + mc[i] * vc[deg - i];
        vc.push_back(neg_inv * acc);
    }
    SeriesMatrix out(n, n, d, t);
    for (const auto &c : vc) out = out + c;
    return out;
}

} // namespace glab
