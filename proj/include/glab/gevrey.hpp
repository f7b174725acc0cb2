#pragma once

// Gevrey orders: the prediction read off a lifted equation's terms, and
// empirical fits of coefficient growth  ||y_n|| ~ C A^n n!^s.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "glab/errors.hpp"
#include "glab/rational.hpp"
#include "glab/series.hpp"
#include "glab/solver/lifted.hpp"
#include "glab/solver/pexpansion.hpp"

namespace glab::gevrey {

struct TermSignature {
    int j = 1; // t-power beyond the derivative
    int b = 0; // d_t order
    int alpha = 0; // |alpha|
    int p = 0; // (t d_t)-order of the left side
};

/// max{0, (b + |alpha| - p) / j}
inline Rational term_order(const TermSignature &sig) {
    if (sig.j < 1) throw DomainError("term_order needs j >= 1");
    Rational v(sig.b + sig.alpha - sig.p, sig.j);
    v.canonicalize();
    return sgn(v) > 0 ? v : Rational(0);
}

struct TheoreticalOrder {
    Rational order;
    bool truncation_sensitive = false; // some stored term had no certified nonzero coefficient
};

/// Largest term_order over linear terms with a nonzero coefficient.
inline TheoreticalOrder theoretical_order(const solver::LiftedEquation &eq, int p = 0) {
    if (eq.linear.empty()) throw EmptyTermSet("lifted equation has no linear terms");
    TheoreticalOrder out{0, false};
    for (const auto &t : eq.linear) {
        if (t.coef.is_zero()) {
            out.truncation_sensitive = true;
            continue;
        }
        out.order = std::max(out.order, term_order({t.j, t.b, t.alpha.total(), p}));
    }
    return out;
}

struct NormRow {
    long n = 0;
    Rational norm;
    int certified = 0;
};

/// max_i majorant_norm(y_n[i], rho) for every coefficient of the expansion.
inline std::vector<NormRow> expansion_norms(const solver::PExpansion &pe, const Rational &rho) {
    std::vector<NormRow> rows;
    for (std::size_t n = 0; n < pe.y.size(); ++n) {
        Rational m = 0;
        for (const auto &s : pe.y[n]) m = std::max(m, mps::majorant_norm(s, rho));
        rows.push_back({static_cast<long>(n), m, pe.certified(n)});
    }
    return rows;
}

/// Norms of the homogeneous components of an x-series solution; used when
/// there is no P-expansion.
inline std::vector<NormRow> component_norms(const SeriesVector &y, const Rational &rho) {
    std::vector<NormRow> rows;
    const int t = min_trunc(y);
    for (int n = 0; n <= t; ++n) {
        Rational m = 0;
        for (const auto &s : y) m = std::max(m, mps::majorant_norm(s.component(n), rho));
        rows.push_back({n, m, t});
    }
    return rows;
}

/// Each y_n is a series in x whose norm only settles once enough of its tail
/// is present. Computing the expansion to this degree leaves every y_n with
/// at least (N + 4) o(P) certified degrees.
inline int norm_degree(int order_n, int p_order, int degree) {
    return std::max(degree, 2 * (order_n + 2) * p_order);
}

struct GevreyEstimate {
    double fitted_order = 0;
    std::pair<long, long> window{0, 0};
    std::vector<double> slopes;  // per-step slopes over the window
    double raw_order = 0;        // first-pass mean of raw slopes
    double log_a = 0;            // fitted ln A
    Rational rho{1, 2};
};

/// Fits s in ||y_n|| ~ C A^n n!^s.
///
/// Pass 1 takes raw slopes (ln y_n - ln y_{n-1}) / ln n. Pass 2 fits
/// ln C + n ln A by least squares to ln y_n - s ln n! and recomputes the
/// slopes with ln A removed; the two passes are iterated to their common
/// fixed point, which has the closed form used below. The window is the top
/// `window_fraction` of orders n >= 2 whose predecessor is also present.
inline GevreyEstimate estimate_order(const std::vector<std::pair<long, Rational>> &norms,
                                     double window_fraction = 0.5, const Rational &rho = Rational(1, 2)) {
    if (!(window_fraction > 0 && window_fraction <= 1)) throw DomainError("window fraction must be in (0, 1]");
    std::map<long, Rational> by_n;
    for (const auto &[n, v] : norms) {
        if (n < 0) throw DomainError("orders must be non-negative");
        by_n[n] = v;
    }
    std::vector<long> avail;
    for (const auto &[n, v] : by_n)
        if (n >= 2 && by_n.count(n - 1)) avail.push_back(n);
    const std::size_t take =
        static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(avail.size()) - 1e-12));
    if (take < 5) throw InsufficientData("need at least five consecutive orders in the estimation window");
    std::vector<long> win(avail.end() - static_cast<std::ptrdiff_t>(take), avail.end());
    for (long n : win)
        if (sgn(by_n[n]) <= 0 || sgn(by_n[n - 1]) <= 0)
            throw NonPositiveNorm("norm at order " + std::to_string(sgn(by_n[n]) <= 0 ? n : n - 1) +
                                  " is not positive");

    using real = long double;
    const std::size_t m = win.size();
    std::vector<real> ln_n(m), delta(m), ly(m), lfact(m), nn(m);
    for (std::size_t i = 0; i < m; ++i) {
        const long n = win[i];
        ln_n[i] = std::log(static_cast<real>(n));
        ly[i] = log_abs(by_n[n]);
        delta[i] = ly[i] - static_cast<real>(log_abs(by_n[n - 1]));
        lfact[i] = std::lgamma(static_cast<real>(n) + 1);
        nn[i] = static_cast<real>(n);
    }
    auto mean = [&](const std::vector<real> &v) {
        real s = 0;
        for (real x : v) s += x;
        return s / static_cast<real>(v.size());
    };
    auto ls_slope = [&](const std::vector<real> &yv) {
        const real mx = mean(nn), my = mean(yv);
        real sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < m; ++i) {
            sxy += (nn[i] - mx) * (yv[i] - my);
            sxx += (nn[i] - mx) * (nn[i] - mx);
        }
        return sxy / sxx;
    };

    GevreyEstimate est;
    est.rho = rho;
    est.window = {win.front(), win.back()};
    std::vector<real> raw(m), inv_ln(m);
    for (std::size_t i = 0; i < m; ++i) {
        raw[i] = delta[i] / ln_n[i];
        inv_ln[i] = 1 / ln_n[i];
    }
    est.raw_order = static_cast<double>(mean(raw));

    const real a0 = ls_slope(ly), b0 = ls_slope(lfact);
    const real m1 = mean(raw), m2 = mean(inv_ln);
    const real s = (m1 - a0 * m2) / (1 - b0 * m2);
    const real log_a = a0 - s * b0;
    real total = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const real slope = (delta[i] - log_a) / ln_n[i];
        est.slopes.push_back(static_cast<double>(slope));
        total += slope;
    }
    est.fitted_order = static_cast<double>(total / static_cast<real>(m));
    est.log_a = static_cast<double>(log_a);
    return est;
}

inline void to_json(nlohmann::json &j, const GevreyEstimate &e) {
    j = {{"fitted_order", e.fitted_order},
         {"window", {e.window.first, e.window.second}},
         {"slopes", e.slopes},
         {"rho", to_string(e.rho)}};
}

struct MonomialFit {
    bool feasible = false;
    double log_c = 0;
    double log_a = 0;
    double cap = 0;
    MultiIndex violator;   // maximal violator at the cap when infeasible
    double excess = 0;     // its margin over the best low-degree term
};

/// Tests |a_beta| <= C A^|beta| min_{alpha_j != 0} beta_j!^(s/alpha_j) on the
/// stored terms. For a candidate ln A the tightest ln C is the maximum of
/// r_beta - |beta| ln A with r_beta = ln|a_beta| - s min_j ln(beta_j!)/alpha_j.
/// The bound is accepted once that maximum is attained outside the top
/// `top_fraction` of degrees, i.e. the highest orders no longer drive C. The
/// smallest such ln A in [-cap, cap] is found by bisection; if even ln A =
/// cap leaves the maximum in the top window, the maximiser is reported.
inline MonomialFit monomial_gevrey_fit(const Series &f, const MultiIndex &alpha, const Rational &s,
                                       double cap = 2.0, double top_fraction = 0.25) {
    if (alpha.dim() != f.dim()) throw DimensionMismatch("alpha dimension differs from the series");
    if (alpha.is_zero()) throw DomainError("alpha must be nonzero");
    const double sd = to_double(s);
    struct Item {
        MultiIndex beta;
        int deg;
        double r;
    };
    std::vector<Item> items;
    std::set<int> degrees;
    for (const auto &[beta, c] : f.terms()) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < alpha.dim(); ++j)
            if (alpha[j] != 0) best = std::min(best, std::lgamma(beta[j] + 1.0) / alpha[j]);
        items.push_back({beta, beta.total(), log_abs(c) - sd * best});
        degrees.insert(beta.total());
    }
    MonomialFit fit;
    fit.cap = cap;
    if (items.empty()) {
        fit.feasible = true;
        fit.log_c = -std::numeric_limits<double>::infinity();
        return fit;
    }
    std::vector<int> degs(degrees.begin(), degrees.end());
    const std::size_t top = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(top_fraction * degs.size())));
    const int top_start = degs[degs.size() - top];

    auto argmax = [&](double la) {
        std::size_t best = 0;
        double bv = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < items.size(); ++i) {
            const double v = items[i].r - items[i].deg * la;
            if (v > bv + 1e-9) {
                bv = v;
                best = i;
            }
        }
        return std::make_pair(best, bv);
    };
    auto accepted = [&](double la) { return degs.size() == 1 || items[argmax(la).first].deg < top_start; };

    if (!accepted(cap)) {
        auto [i, v] = argmax(cap);
        fit.feasible = false;
        fit.log_a = cap;
        fit.violator = items[i].beta;
        double low = -std::numeric_limits<double>::infinity();
        for (const auto &it : items)
            if (it.deg < top_start) low = std::max(low, it.r - it.deg * cap);
        fit.excess = v - low;
        return fit;
    }
    double lo = -cap, hi = cap;
    if (accepted(lo)) {
        hi = lo;
    } else {
        while (hi - lo > 1e-9) {
            const double mid = 0.5 * (lo + hi);
            (accepted(mid) ? hi : lo) = mid;
        }
    }
    fit.feasible = true;
    fit.log_a = hi;
    fit.log_c = argmax(hi).second;
    return fit;
}

} // namespace glab::gevrey
