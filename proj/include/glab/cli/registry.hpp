#pragma once

// Worked examples with independently computed expected values. Every entry
// is a DSL document plus the numbers a run must reproduce.

#include <functional>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "glab/cli/pipeline.hpp"

namespace glab::cli {

using Params = std::map<std::string, std::string>;

struct MonomialExpectation {
    MultiIndex alpha;
    Rational s;
    bool witness = true;
};

struct Expected {
    Route route = Route::Divergent;
    std::vector<long> failing;                // Poincare orders that must fail
    std::function<Rational(const MultiIndex &)> coefficient; // of y1, when known in closed form
    std::optional<Rational> theoretical;
    std::optional<std::pair<double, double>> fitted; // target, tolerance
    std::optional<MonomialExpectation> monomial;
    bool golden_bounds = false; // (n-1)!^2 <= |c_n| <= phi^n (n-1)!^2 on the diagonal
};

struct Example {
    std::string name;
    std::string summary;
    Params params;
    std::string document;
    Expected expected;
};

namespace registry_detail {

inline std::string rational_text(const Rational &q) {
    Rational c = q;
    c.canonicalize();
    return c.get_den() == 1 ? c.get_num().get_str() : "(" + to_string(c) + ")";
}

inline long int_param(const Params &p, const std::string &key, long fallback) {
    auto it = p.find(key);
    if (it == p.end()) return fallback;
    try {
        std::size_t used = 0;
        long v = std::stol(it->second, &used);
        if (used == it->second.size()) return v;
    } catch (const std::logic_error &) {
    }
    throw DomainError("parameter " + key + " must be an integer");
}

/// "1,2" or "(1,2)" as rationals.
inline std::vector<Rational> list_param(const Params &p, const std::string &key, std::vector<Rational> fallback) {
    auto it = p.find(key);
    if (it == p.end()) return fallback;
    std::string s = it->second;
    std::erase(s, '(');
    std::erase(s, ')');
    std::vector<Rational> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        auto q = parse_rational(cell);
        if (!q) throw DomainError("parameter " + key + " has a bad entry '" + cell + "'");
        out.push_back(*q);
    }
    if (out.empty()) throw DomainError("parameter " + key + " is empty");
    return out;
}

inline void allow_only(const Params &p, std::initializer_list<const char *> keys) {
    for (const auto &[k, v] : p) {
        bool ok = false;
        for (const char *a : keys) ok = ok || k == a;
        if (!ok) throw DomainError("unknown parameter '" + k + "'");
    }
}

inline std::string options_text(int degree, int order) {
    return "option degree = " + std::to_string(degree) + "\noption order = " + std::to_string(order) + "\n";
}

} // namespace registry_detail

/// x^((m+1)k) y^(k) = y - 1 - x^k/k!, solved for v = y - 1. The recurrence
/// v_n = [n = k]/k! + (n-mk)!/(n-mk-k)! v_{n-mk} forces v_k = 1/k! and
/// v_{k+jmk} = prod_{l=1}^{j-1} (lmk+k)!/(lmk)! for j >= 1.
inline Example make_eje1(long m, long k) {
    using namespace registry_detail;
    if (m < 1 || k < 2) throw DomainError("eje1 needs m >= 1 and k >= 2 (P must divide L_k*(P))");
    if (m * k < m + 1) throw DomainError("eje1 needs m k >= m + 1");
    if (k > 8) throw DomainError("eje1 supports k <= 8");
    Example ex;
    ex.name = "eje1";
    ex.params = {{"m", std::to_string(m)}, {"k", std::to_string(k)}};
    ex.summary = "x^((m+1)k) d^k y = y - 1 - x^k/k!, shifted by y = 1 + v";
    const long o = m + 1;
    const long degree = std::max<long>(30, k + 6 * m * k);
    std::ostringstream doc;
    doc << "# x^" << (m + 1) * k << " d^" << k << " y = y - 1 - x^" << k << "/" << k << "!  with y = 1 + v\n";
    doc << "dim 1; unknowns 1; order " << k << "\n";
    doc << "P = x1^" << o << "\n";
    doc << "L " << k << " : (" << k << ") -> 1\n";
    Rational inv_fact(1, 1);
    for (long i = 2; i <= k; ++i) inv_fact /= i;
    doc << "F 1 = y1 - " << rational_text(inv_fact) << "*x1^" << k << "\n";
    doc << options_text(static_cast<int>(degree), static_cast<int>(degree / o));
    ex.document = doc.str();
    ex.expected.route = Route::Divergent;
    ex.expected.theoretical = Rational(k);
    if (m == 1 && k == 2) ex.expected.fitted = {2.0, 0.15};
    ex.expected.coefficient = [m, k, inv_fact](const MultiIndex &b) -> Rational {
        const long n = b[0];
        if (n < k || (n - k) % (m * k) != 0) return 0;
        const long j = (n - k) / (m * k);
        Rational v = inv_fact;
        for (long l = 0; l < j; ++l) v *= Rational(diffops::falling_factorial(l * m * k + k, k));
        return v;
    };
    return ex;
}

/// x1^2 x2^2 (x1^2 d1^2 + x2^2 d2^2 + 2 d1 d2) u - 2u = 2 x1 x2. The solution
/// is -sum a_n (x1 x2)^n with a_0 = 0, a_1 = a_2 = 1 and
/// a_n = (n-1)^2 a_{n-1} + (n-2)(n-3) a_{n-2}.
inline std::vector<Integer> eje3_sequence(long n_max) {
    std::vector<Integer> a{0, 1, 1};
    for (long n = 3; n <= n_max; ++n)
        a.push_back(Integer((n - 1) * (n - 1)) * a[n - 1] + Integer((n - 2) * (n - 3)) * a[n - 2]);
    a.resize(static_cast<std::size_t>(n_max + 1));
    return a;
}

inline Example make_eje3() {
    Example ex;
    ex.name = "eje3";
    ex.summary = "x1^2 x2^2 (x1^2 d1^2 + x2^2 d2^2 + 2 d1 d2) u = 2u + 2 x1 x2";
    ex.document = "# x1^2 x2^2 (x1^2 d1^2 u + x2^2 d2^2 u + 2 d1 d2 u) - 2u = 2 x1 x2\n"
                  "dim 2; unknowns 1; order 2\n"
                  "P = x1*x2\n"
                  "L 2 : (2,0) -> x1^2 ; (0,2) -> x2^2 ; (1,1) -> 2\n"
                  "F 1 = 2*y1 + 2*x1*x2\n" +
                  registry_detail::options_text(80, 40);
    ex.expected.route = Route::Divergent;
    ex.expected.theoretical = Rational(2);
    ex.expected.fitted = {2.0, 0.15};
    ex.expected.golden_bounds = true;
    ex.expected.monomial = MonomialExpectation{MultiIndex({1, 1}), Rational(2), true};
    const auto a = eje3_sequence(60);
    ex.expected.coefficient = [a](const MultiIndex &b) -> Rational {
        if (b[0] != b[1] || b[0] >= static_cast<int>(a.size())) return 0;
        return Rational(-a[static_cast<std::size_t>(b[0])]);
    };
    return ex;
}

/// Singular perturbation in (x, eps) = (x1, x2):
/// eps^k x^(k+1) d^k y + sum_j eps^j x^(j+1) a_j d^j y = y - x - eps,
/// i.e. P = x1 x2, L_k = x1 d1^k, L_j = a_j x1 d1^j with constant a_j.
/// For k = 1 the solution is x2 + x1 sum_n n! (x1 x2)^n.
inline Example make_ejeLast(long k, const std::vector<Rational> &a) {
    using namespace registry_detail;
    if (k < 1 || k > 4) throw DomainError("ejeLast supports 1 <= k <= 4");
    if (static_cast<long>(a.size()) != k - 1)
        throw DomainError("ejeLast needs k - 1 coefficients a (got " + std::to_string(a.size()) + ")");
    Example ex;
    ex.name = "ejeLast";
    ex.params = {{"k", std::to_string(k)}};
    if (!a.empty()) {
        std::string s;
        for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + to_string(a[i]);
        ex.params["a"] = s;
    }
    ex.summary = "eps^k x^(k+1) d^k y + sum_j eps^j x^(j+1) a_j d^j y = y - x - eps";
    std::ostringstream doc;
    doc << "# (x, eps) = (x1, x2)\n";
    doc << "dim 2; unknowns 1; order " << k << "\n";
    doc << "P = x1*x2\n";
    doc << "L " << k << " : (" << k << ",0) -> x1\n";
    for (long j = 1; j < k; ++j)
        if (sgn(a[static_cast<std::size_t>(j - 1)]) != 0)
            doc << "L " << j << " : (" << j << ",0) -> "
                << dsl_detail::poly_text({{{1, 0}, a[static_cast<std::size_t>(j - 1)]}}, {"x1", "x2"}) << "\n";
    doc << "F 1 = y1 - x1 - x2\n";
    const int order = k == 1 ? 40 : 30;
    doc << options_text(2 * order, order);
    ex.document = doc.str();
    ex.expected.route = Route::Divergent;
    ex.expected.theoretical = Rational(k);
    const bool shipped = (k == 1) || (k == 2 && a.size() == 1 && a[0] == 1);
    if (shipped) ex.expected.fitted = {static_cast<double>(k), 0.15};
    if (k == 1)
        ex.expected.coefficient = [](const MultiIndex &b) -> Rational {
            if (b[0] == 0 && b[1] == 1) return 1;
            if (b[0] != b[1] + 1) return 0;
            Integer f = 1;
            for (int i = 2; i <= b[1]; ++i) f *= i;
            return Rational(f);
        };
    return ex;
}

/// (x^alpha)^k L_k y + ... + x^alpha L_1 y = y - x1 with
/// L_j = b_j sum_{|beta| = j} x^beta d_beta.
inline Example make_eje4(const MultiIndex &alpha, long k, const std::vector<Rational> &b) {
    using namespace registry_detail;
    if (alpha.dim() < 1 || alpha.dim() > 3) throw DomainError("eje4 supports 1 to 3 variables");
    if (alpha.is_zero()) throw DomainError("eje4 needs alpha != 0");
    if (k < 1 || k > 3) throw DomainError("eje4 supports 1 <= k <= 3");
    if (static_cast<long>(b.size()) != k) throw DomainError("eje4 needs k coefficients b");
    if (sgn(b.back()) == 0) throw DomainError("eje4 needs b_k != 0");
    const std::size_t d = alpha.dim();
    Example ex;
    ex.name = "eje4";
    std::string at, bt;
    for (std::size_t i = 0; i < d; ++i) at += (i ? "," : "") + std::to_string(alpha[i]);
    for (std::size_t i = 0; i < b.size(); ++i) bt += (i ? "," : "") + to_string(b[i]);
    ex.params = {{"alpha", at}, {"k", std::to_string(k)}, {"b", bt}};
    ex.summary = "(x^alpha)^k L_k y + ... + x^alpha L_1 y = y - x1, L_j = b_j sum x^beta d_beta";
    std::ostringstream doc;
    doc << "dim " << d << "; unknowns 1; order " << k << "\n";
    const auto names = dsl_detail::var_names(d, 0);
    doc << "P = " << dsl_detail::monomial_text(alpha.values(), names) << "\n";
    for (long j = 1; j <= k; ++j) {
        const Rational &c = b[static_cast<std::size_t>(j - 1)];
        if (sgn(c) == 0) continue;
        doc << "L " << j << " :";
        bool first = true;
        for (const auto &beta : monomials_of_degree(d, static_cast<int>(j))) {
            doc << (first ? " " : " ; ") << beta.to_string() << " -> " << dsl_detail::poly_text({{beta.values(), c}}, names);
            first = false;
        }
        doc << "\n";
    }
    doc << "F 1 = y1 - x1\n";
    const int o = alpha.total();
    const int order = 60 / o;
    doc << options_text(o * order, order);
    ex.document = doc.str();
    ex.expected.route = Route::Divergent;
    ex.expected.theoretical = Rational(k);
    ex.expected.monomial = MonomialExpectation{alpha, Rational(k), true};
    if (d == 2 && alpha[0] == 1 && alpha[1] == 1 && k == 1 && b[0] == 1)
        ex.expected.coefficient = [](const MultiIndex &beta) -> Rational {
            // beta = (n+1, n): (2n-1)!!
            if (beta[0] != beta[1] + 1) return 0;
            Integer v = 1;
            for (int i = 1; i <= beta[1]; ++i) v *= 2 * i - 1;
            return Rational(v);
        };
    return ex;
}

/// x y' = -y + x + y^2: nonzero L_1*(P)(0) = 1 and n + 1 != 0, analytic.
inline Example make_convergent() {
    Example ex;
    ex.name = "convergent";
    ex.summary = "x y' = -y + x + y^2 (analytic solution)";
    ex.document = "dim 1; unknowns 1; order 1\n"
                  "P = x1\n"
                  "L 1 : (1) -> 1\n"
                  "F 1 = -y1 + x1 + y1^2\n" +
                  registry_detail::options_text(60, 60);
    ex.expected.route = Route::Convergent;
    ex.expected.fitted = {0.0, 0.1};
    ex.expected.coefficient = [](const MultiIndex &b) -> Rational {
        // (n+1) c_n = [n = 1] + sum_{i=1}^{n-1} c_i c_{n-i}
        std::vector<Rational> c(static_cast<std::size_t>(b[0]) + 1, Rational(0));
        for (int n = 1; n <= b[0]; ++n) {
            Rational s = n == 1 ? 1 : 0;
            for (int i = 1; i < n; ++i) s += c[i] * c[n - i];
            c[n] = s / (n + 1);
        }
        return c.back();
    };
    return ex;
}

/// x y' = y + x^2: n - 1 = 0 at n = 1, and P does not divide L_1*(P) = 1.
inline Example make_poincare_failure() {
    Example ex;
    ex.name = "poincare-fail";
    ex.summary = "x y' = y + x^2 (order-1 system singular)";
    ex.document = "dim 1; unknowns 1; order 1\n"
                  "P = x1\n"
                  "L 1 : (1) -> 1\n"
                  "F 1 = y1 + x1^2\n";
    ex.expected.route = Route::Neither;
    ex.expected.failing = {1};
    return ex;
}

inline std::vector<std::string> example_names() {
    return {"eje1", "eje3", "ejeLast", "eje4", "convergent", "poincare-fail"};
}

/// Builds an entry from its name and `key=value` parameters.
inline Example make_example(const std::string &name, const Params &p = {}) {
    using namespace registry_detail;
    if (name == "eje1") {
        allow_only(p, {"m", "k"});
        return make_eje1(int_param(p, "m", 1), int_param(p, "k", 2));
    }
    if (name == "eje3") {
        allow_only(p, {});
        return make_eje3();
    }
    if (name == "ejeLast") {
        allow_only(p, {"k", "a"});
        const long k = int_param(p, "k", 1);
        std::vector<Rational> a = list_param(p, "a", std::vector<Rational>(static_cast<std::size_t>(std::max(0L, k - 1)), Rational(1)));
        return make_ejeLast(k, a);
    }
    if (name == "eje4") {
        allow_only(p, {"alpha", "k", "b"});
        const long k = int_param(p, "k", 1);
        std::vector<int> al;
        for (const auto &q : list_param(p, "alpha", {1, 1})) {
            if (q.get_den() != 1 || sgn(q) < 0) throw DomainError("alpha entries must be non-negative integers");
            al.push_back(static_cast<int>(q.get_num().get_si()));
        }
        std::vector<Rational> def(static_cast<std::size_t>(std::max(0L, k)), Rational(0));
        if (!def.empty()) def.back() = 1;
        return make_eje4(MultiIndex(al), k, list_param(p, "b", def));
    }
    if (name == "convergent") {
        allow_only(p, {});
        return make_convergent();
    }
    if (name == "poincare-fail") {
        allow_only(p, {});
        return make_poincare_failure();
    }
    throw DomainError("unknown example '" + name + "'");
}

/// Default instances, in listing order.
inline std::vector<Example> registry() {
    return {make_eje1(1, 2), make_eje3(), make_ejeLast(1, {}), make_ejeLast(2, {Rational(1)}),
            make_eje4(MultiIndex({1, 1}), 1, {Rational(1)}), make_convergent(), make_poincare_failure()};
}

/// Rational bracket lo <= phi <= hi from consecutive Fibonacci ratios,
/// verified exactly against x^2 = x + 1.
inline std::pair<Rational, Rational> golden_bracket(int steps = 40) {
    Integer f0 = 1, f1 = 1;
    std::vector<Rational> r;
    for (int i = 0; i < steps; ++i) {
        Integer f2 = f0 + f1;
        f0 = f1;
        f1 = f2;
        r.emplace_back(f1, f0);
    }
    for (auto &q : r) q.canonicalize();
    Rational lo = std::min(r[r.size() - 1], r[r.size() - 2]);
    Rational hi = std::max(r[r.size() - 1], r[r.size() - 2]);
    if (!(lo * lo - lo - 1 <= 0) || !(hi * hi - hi - 1 >= 0)) throw std::logic_error("golden bracket failed");
    return {lo, hi};
}

/// Checks (n-1)!^2 <= a_n <= phi^n (n-1)!^2 for 3 <= n <= n_max with phi
/// replaced by its lower bracket end, which only makes the check stricter.
/// Returns the first failing n.
inline std::optional<long> check_golden_bounds(const std::vector<Integer> &a, long n_max) {
    const Rational lo = golden_bracket().first;
    Integer fact = 1; // (n-1)!
    Rational pw = 1;
    for (long n = 1; n <= n_max; ++n) {
        if (n >= 2) fact *= n - 1;
        pw *= lo;
        if (n < 3) continue;
        const Integer f2 = fact * fact;
        if (a[static_cast<std::size_t>(n)] < f2 || Rational(a[static_cast<std::size_t>(n)]) > pw * Rational(f2)) return n;
    }
    return std::nullopt;
}

struct ExampleReport {
    std::string name;
    bool pass = false;
    std::vector<std::string> lines;
    std::string failure; // first mismatch
};

/// check + solve + estimate, compared against the entry's expectations.
/// Throws RegressionMismatch at the first disagreement.
inline ExampleReport run_example(const Example &ex) {
    ExampleReport rep;
    rep.name = ex.name;
    auto fail = [&](const std::string &what) { throw RegressionMismatch(ex.name + ": " + what); };
    auto note = [&](const std::string &s) { rep.lines.push_back(s); };

    const ProblemDocument doc = parse_problem(ex.document);
    if (!(parse_problem(serialize_problem(doc)).spec == doc.spec)) fail("document does not round-trip");
    const CheckResult check = run_check(doc.spec);
    note("route " + route_name(check.route));
    if (check.route != ex.expected.route)
        fail("route " + route_name(check.route) + ", expected " + route_name(ex.expected.route));
    if (!ex.expected.failing.empty()) {
        if (!check.poincare || check.poincare->failing != ex.expected.failing) fail("Poincare failing orders differ");
        note("Poincare fails exactly at the expected orders");
    }
    if (check.route == Route::Neither) {
        rep.pass = true;
        return rep;
    }
    if (ex.expected.theoretical) {
        if (!check.predicted || check.predicted->order != *ex.expected.theoretical)
            fail("theoretical order differs from " + to_string(*ex.expected.theoretical));
        note("theoretical order " + to_string(check.predicted->order));
    }

    const Settings s = resolve_settings(doc.spec, doc.options);
    const SolveResult sol = run_solve(doc.spec, check.route, s);
    const Series &y = sol.evaluation ? sol.evaluation->y[0] : sol.direct[0];
    const int cert = sol.evaluation ? sol.evaluation->certified : min_trunc(sol.direct);
    note("residual vanishes to degree " + std::to_string(sol.residual_degree));
    if (sol.agree_degree) note("expansion agrees with the direct solution to degree " + std::to_string(*sol.agree_degree));

    if (ex.expected.coefficient) {
        for (int n = 0; n <= cert; ++n)
            for (const auto &beta : monomials_of_degree(doc.spec.dim, n)) {
                const Rational want = ex.expected.coefficient(beta);
                if (y.coeff(beta) != want)
                    fail("coefficient of x^" + beta.to_string() + " is " + to_string(y.coeff(beta)) + ", expected " +
                         to_string(want));
            }
        note("coefficient table matches to degree " + std::to_string(cert));
    }
    if (ex.expected.golden_bounds) {
        const long n_max = cert / 2;
        std::vector<Integer> a;
        for (long n = 0; n <= n_max; ++n) a.push_back(Integer(-y.coeff(MultiIndex({static_cast<int>(n), static_cast<int>(n)})).get_num()));
        if (auto bad = check_golden_bounds(a, n_max)) fail("growth bounds fail at n = " + std::to_string(*bad));
        note("(n-1)!^2 <= a_n <= phi^n (n-1)!^2 for 3 <= n <= " + std::to_string(n_max));
    }
    if (ex.expected.monomial) {
        const auto &m = *ex.expected.monomial;
        const auto fit = gevrey::monomial_gevrey_fit(y.truncated(cert), m.alpha, m.s);
        if (fit.feasible != m.witness)
            fail(std::string("monomial bound ") + (fit.feasible ? "holds" : "fails") + " unexpectedly");
        std::ostringstream os;
        os << "monomial bound x^" << m.alpha.to_string() << " s=" << to_string(m.s) << ": "
           << (fit.feasible ? "witness" : "refuted") << ", ln A = " << fit.log_a;
        note(os.str());
    }
    std::optional<gevrey::GevreyEstimate> fitted;
    try {
        fitted = gevrey::estimate_order(norm_pairs(sol.norms), s.window, s.rho);
    } catch (const Error &e) {
        if (ex.expected.fitted) fail(std::string("no fitted order: ") + e.what());
        note(std::string("fitted order unavailable: ") + e.what());
        rep.pass = true;
        return rep;
    }
    const auto &est = *fitted;
    std::ostringstream os;
    os << "fitted order " << est.fitted_order << " on n in [" << est.window.first << ", " << est.window.second << "]";
    note(os.str());
    if (ex.expected.fitted && std::abs(est.fitted_order - ex.expected.fitted->first) > ex.expected.fitted->second)
        fail("fitted order " + std::to_string(est.fitted_order) + " is not within " +
             std::to_string(ex.expected.fitted->second) + " of " + std::to_string(ex.expected.fitted->first));
    rep.pass = true;
    return rep;
}

/// Runs entries concurrently; reports come back in input order.
inline std::vector<ExampleReport> run_examples(const std::vector<Example> &entries, bool parallel = true) {
    auto one = [](const Example &ex) {
        try {
            return run_example(ex);
        } catch (const std::exception &e) {
            ExampleReport r;
            r.name = ex.name;
            r.failure = e.what();
            return r;
        }
    };
    std::vector<ExampleReport> out;
    if (!parallel) {
        for (const auto &ex : entries) out.push_back(one(ex));
        return out;
    }
    std::vector<std::future<ExampleReport>> jobs;
    for (const auto &ex : entries) jobs.push_back(std::async(std::launch::async, one, std::cref(ex)));
    for (auto &j : jobs) out.push_back(j.get());
    return out;
}

} // namespace glab::cli
