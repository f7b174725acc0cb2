#pragma once

// Shared check / solve / estimate steps behind the command surface and the
// example registry.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "glab/cli/dsl.hpp"
#include "glab/gevrey.hpp"
#include "glab/solver.hpp"

namespace glab::cli {

enum class Route { Divergent, Convergent, Neither };

inline std::string route_name(Route r) {
    switch (r) {
    case Route::Divergent: return "divergent";
    case Route::Convergent: return "convergent";
    default: return "neither";
    }
}

/// Resolved numeric settings: document options, then command-line overrides.
struct Settings {
    int degree = 20;
    int order = 10;
    Rational rho{1, 2};
    double window = 0.5;
};

inline Settings resolve_settings(const ProblemSpec &spec, const Options &doc, const Options &flags = {}) {
    auto pick = [](const auto &a, const auto &b) { return a ? a : b; };
    const auto degree = pick(flags.degree, doc.degree);
    const auto order = pick(flags.order, doc.order);
    const auto rho = pick(flags.rho, doc.rho);
    const auto window = pick(flags.window, doc.window);
    const int o = spec.p.is_zero() ? 1 : mps::order(spec.p).value();
    Settings s;
    if (degree && order) {
        s.degree = *degree;
        s.order = *order;
    } else if (degree) {
        s.degree = *degree;
        s.order = std::max(1, *degree / o);
    } else if (order) {
        s.order = *order;
        s.degree = *order * o;
    } else {
        s.order = std::max(1, s.degree / o);
    }
    if (rho) s.rho = *rho;
    if (window) s.window = to_double(*window);
    if (s.degree < 0 || s.order < 0) throw DomainError("degree and order must be non-negative");
    if (sgn(s.rho) <= 0) throw DomainError("rho must be positive");
    if (!(s.window > 0 && s.window <= 1)) throw DomainError("window must be in (0, 1]");
    return s;
}

struct CheckResult {
    Route route = Route::Neither;
    bool linear_part_invertible = false;
    diffops::DivisibilityReport divisibility;
    std::optional<solver::PoincareVerdict> poincare;
    std::string poincare_note;
    std::optional<gevrey::TheoreticalOrder> predicted; // divergent route only
    std::vector<std::string> lines;
};

inline std::string witness_text(const std::vector<int> &e) {
    const std::string m = dsl_detail::monomial_text(e, dsl_detail::var_names(e.size(), 0));
    return m.empty() ? "1" : m;
}

/// Decides which existence result applies. Divisibility of every L_j*(P)
/// by P gives a formal P-k-Gevrey solution; a nonzero L_k*(P)(0) together
/// with the Poincare condition gives a convergent one.
inline CheckResult run_check(const ProblemSpec &prob) {
    prob.validate_shape();
    CheckResult r;
    const QMatrix a0 = prob.linear_part_at_zero();
    r.linear_part_invertible = a0.inverse().has_value();
    r.lines.push_back(std::string("D_yF(0,0) ") + (r.linear_part_invertible ? "invertible" : "singular"));

    r.divisibility = diffops::check_divisibility(prob.p, prob.ops);
    for (const auto &v : r.divisibility.per_order) {
        std::string line = "L_" + std::to_string(v.j) + ": ";
        if (v.zero_operator)
            line += "zero operator";
        else if (v.divisible)
            line += "P divides L*(P), quotient " + v.quotient->truncated(std::max(0, v.quotient->max_degree())).to_string();
        else
            line += "P does not divide L*(P), witness monomial " + witness_text(v.witness);
        r.lines.push_back(line);
    }
    const bool top_nonzero = !prob.op(prob.order).is_zero();

    try {
        r.poincare = solver::check_poincare(prob);
        std::string line = "Poincare condition: n* = " + std::to_string(r.poincare->n_star);
        if (r.poincare->pass)
            line += ", nonsingular for all n";
        else {
            line += ", singular at n =";
            for (long n : r.poincare->failing) line += " " + std::to_string(n);
        }
        r.lines.push_back(line);
    } catch (const InconclusiveBound &e) {
        r.poincare_note = e.what();
        r.lines.push_back(std::string("Poincare condition: inconclusive (") + e.what() + ")");
    }

    if (r.linear_part_invertible && top_nonzero && r.divisibility.ok) {
        r.route = Route::Divergent;
        const int pdeg = std::max(1, prob.p.max_degree());
        const solver::Reduction red = solver::reduce(prob, 2 * (prob.data_degree() + prob.order * pdeg) + 4);
        r.predicted = gevrey::theoretical_order(solver::build_lifted(prob, red));
        r.lines.push_back("route: divergent, unique formal solution, predicted P-" + to_string(r.predicted->order) +
                          "-Gevrey" + (r.predicted->truncation_sensitive ? " (truncation-sensitive)" : ""));
    } else if (r.linear_part_invertible && r.poincare && r.poincare->pass) {
        r.route = Route::Convergent;
        r.lines.push_back("route: convergent, unique analytic solution");
    } else {
        r.route = Route::Neither;
        r.lines.push_back("route: neither");
    }
    return r;
}

struct SolveResult {
    Route route = Route::Neither;
    Settings settings;
    std::optional<solver::PExpansion> expansion;
    std::optional<solver::Evaluation> evaluation;
    SeriesVector direct;
    int residual_degree = -1;       // residual of the direct solution vanishes to here
    std::optional<int> agree_degree; // expansion matches the direct solution to here
    std::vector<gevrey::NormRow> norms;
};

/// First monomial (graded-lex) where two series differ below `degree`.
inline std::optional<MultiIndex> first_difference(const Series &a, const Series &b, int degree) {
    const Series d = (a.truncated(degree) - b.truncated(degree));
    if (d.is_zero()) return std::nullopt;
    return d.terms().begin()->first;
}

inline SolveResult run_solve(const ProblemSpec &prob, Route route, const Settings &s) {
    SolveResult out;
    out.route = route;
    out.settings = s;
    if (route == Route::Neither) throw DomainError("no existence result applies to this problem");
    out.direct = solver::solve_direct(prob, s.degree);
    const SeriesVector res = residual(prob, out.direct);
    if (!all_zero(res)) throw std::logic_error("direct solution does not satisfy the equation");
    out.residual_degree = min_trunc(res);

    if (route == Route::Divergent) {
        const int o = mps::order(prob.p).value();
        out.expansion = solver::solve_p_expansion(prob, s.order, gevrey::norm_degree(s.order, o, s.degree));
        out.evaluation = solver::evaluate(*out.expansion, s.degree);
        const int c = out.evaluation->certified;
        for (std::size_t i = 0; i < prob.unknowns; ++i)
            if (auto diff = first_difference(out.evaluation->y[i], out.direct[i], c))
                throw std::logic_error("expansion and direct solution differ at " + diff->to_string());
        out.agree_degree = c;
        out.norms = gevrey::expansion_norms(*out.expansion, s.rho);
    } else {
        out.norms = gevrey::component_norms(out.direct, s.rho);
    }
    return out;
}

inline std::vector<std::pair<long, Rational>> norm_pairs(const std::vector<gevrey::NormRow> &rows) {
    std::vector<std::pair<long, Rational>> v;
    for (const auto &r : rows) v.emplace_back(r.n, r.norm);
    return v;
}

// ---- file formats ----

inline std::string norms_csv(const std::vector<gevrey::NormRow> &rows) {
    std::string s = "n,norm,certified_degree\n";
    for (const auto &r : rows)
        s += std::to_string(r.n) + ",\"" + to_string(r.norm) + "\"," + std::to_string(r.certified) + "\n";
    return s;
}

/// Reads `n,norm[,certified_degree]` rows; the norm may be quoted.
inline std::vector<gevrey::NormRow> parse_norms_csv(const std::string &text) {
    std::vector<gevrey::NormRow> rows;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("n,", 0) == 0) continue;
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (char c : line) {
            if (c == '"')
                quoted = !quoted;
            else if (c == ',' && !quoted) {
                cells.push_back(cell);
                cell.clear();
            } else
                cell += c;
        }
        cells.push_back(cell);
        auto fail = [&](const std::string &what) { throw ParseError(line_no, 1, what, {}); };
        if (cells.size() < 2) fail("expected n,norm");
        gevrey::NormRow r;
        try {
            std::size_t used = 0;
            r.n = std::stol(cells[0], &used);
            if (used != cells[0].size()) fail("bad order '" + cells[0] + "'");
        } catch (const std::logic_error &) {
            fail("bad order '" + cells[0] + "'");
        }
        auto q = parse_rational(cells[1]);
        if (!q) fail("bad rational '" + cells[1] + "'");
        r.norm = *q;
        if (cells.size() > 2 && !cells[2].empty()) {
            try {
                r.certified = std::stoi(cells[2]);
            } catch (const std::logic_error &) {
                fail("bad certified degree '" + cells[2] + "'");
            }
        }
        rows.push_back(r);
    }
    return rows;
}

inline nlohmann::json direct_json(const SeriesVector &y, int degree) {
    return {{"degree", degree}, {"certified_degree", min_trunc(y)}, {"y", y}};
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot write " + path.string());
    f << text;
}

/// solution.json (expansion, divergent route only), solution_x.json, norms.csv.
inline std::vector<std::filesystem::path> write_outputs(const SolveResult &r, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;
    if (r.expansion) {
        files.push_back(dir / "solution.json");
        write_text(files.back(), nlohmann::json(*r.expansion).dump(1) + "\n");
    }
    files.push_back(dir / "solution_x.json");
    write_text(files.back(), direct_json(r.direct, r.settings.degree).dump(1) + "\n");
    files.push_back(dir / "norms.csv");
    write_text(files.back(), norms_csv(r.norms));
    return files;
}

} // namespace glab::cli
