#pragma once

// y = sum_n y_n(x) P(x)^n: the full reduce -> lift -> recurrence pipeline.

#include <algorithm>
#include <climits>
#include <vector>

#include "json.hpp"

#include "glab/problem.hpp"
#include "glab/solver/lifted.hpp"
#include "glab/solver/reduce.hpp"

namespace glab::solver {

struct PExpansion {
    Series p;
    std::vector<SeriesVector> y; // y_0 .. y_N
    int degree = 0;              // requested x-degree D
    int order = 0;               // N

    int certified(std::size_t n) const { return min_trunc(y.at(n)); }
};

/// Coefficient targets: y_n matters up to degree D - n o(P).
inline PExpansion solve_p_expansion(const ProblemSpec &prob, int order_n, int degree) {
    if (order_n < 0 || degree < 0) throw DomainError("order and degree must be non-negative");
    Reduction red = reduce(prob, degree);
    const int o = mps::order(prob.p).value();
    LiftedEquation eq = build_lifted(prob, red);
    PExpansion pe;
    pe.p = prob.p;
    pe.degree = degree;
    pe.order = order_n;
    for (int n = 0; n < prob.order && n <= order_n; ++n) {
        const int target = degree - n * o;
        if (target < 0) throw TruncationTooSmall("degree too small for y_" + std::to_string(n));
        SeriesVector yn;
        for (const auto &s : red.y[n]) yn.push_back(s.truncated(target));
        pe.y.push_back(std::move(yn));
    }
    if (order_n >= prob.order) {
        LiftedSolution tail = solve_lifted(eq, order_n, degree, o);
        for (int n = prob.order; n <= order_n; ++n) pe.y.push_back(tail.u[n]);
    }
    return pe;
}

struct Evaluation {
    SeriesVector y;
    int certified = 0;
};

/// sum_{n<=N} y_n P^n truncated at D. Certified to
/// min(D, (N+1) o(P) - 1, min_n(cert(y_n) + n o(P))).
inline Evaluation evaluate(const PExpansion &pe, int degree) {
    const std::size_t d = pe.p.dim();
    const std::size_t n_unk = pe.y.empty() ? 1 : pe.y.front().size();
    const int o = mps::order(pe.p).value();
    long cert = std::min<long>(degree, static_cast<long>(pe.y.size()) * o - 1);
    for (std::size_t n = 0; n < pe.y.size(); ++n) cert = std::min<long>(cert, pe.certified(n) + static_cast<long>(n) * o);
    if (cert < 0) throw TruncationTooSmall("expansion certifies no degree");
    const int c = static_cast<int>(cert);
    const Series p = pe.p.as_polynomial(c + std::max(1, pe.p.max_degree()));
    Evaluation ev{SeriesVector(n_unk, Series(d, c)), c};
    Series pn = Series::constant(d, p.trunc(), 1);
    for (std::size_t n = 0; n < pe.y.size(); ++n) {
        if (static_cast<long>(n) * o > c) break;
        for (std::size_t i = 0; i < n_unk; ++i) ev.y[i] += mps::mul_sharp(pe.y[n][i], pn).truncated(c);
        pn = mps::mul(pn, p);
    }
    return ev;
}

inline void to_json(nlohmann::json &j, const PExpansion &pe) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (std::size_t n = 0; n < pe.y.size(); ++n)
        coeffs.push_back({{"n", n}, {"certified_degree", pe.certified(n)}, {"y", pe.y[n]}});
    j = {{"P", pe.p}, {"degree", pe.degree}, {"order", pe.order}, {"coefficients", std::move(coeffs)}};
}

inline PExpansion pexpansion_from_json(const nlohmann::json &j) {
    PExpansion pe;
    pe.p = j.at("P").get<Series>();
    pe.degree = j.at("degree").get<int>();
    pe.order = j.at("order").get<int>();
    for (const auto &c : j.at("coefficients")) pe.y.push_back(c.at("y").get<SeriesVector>());
    return pe;
}

} // namespace glab::solver
