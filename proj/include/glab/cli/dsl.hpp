#pragma once

// Line-oriented problem description language.
//
//   # comment
//   dim 2; unknowns 1; order 2
//   P = x1*x2
//   L 2 : (2,0) -> x1^2 ; (0,2) -> x2^2 ; (1,1) -> 2
//   F 1 = 2*y1 + 2*x1*x2
//   option degree = 40
//
// Expressions are polynomials over the rationals in x1..xd and (in F only)
// y1..yN, built from integer literals, + - * ^ and parentheses. Division is
// allowed only by nonzero constants, which is how p/q literals are written.

#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "glab/errors.hpp"
#include "glab/problem.hpp"

namespace glab::cli {

/// Syntax error with a 1-based position and the set of tokens that would
/// have been accepted there.
class ParseError : public Error {
public:
    ParseError(int line, int col, const std::string &what, std::set<std::string> expected)
        : Error("parse_error", format(line, col, what, expected)), line_(line), col_(col),
          expected_(std::move(expected)) {}
    int line() const { return line_; }
    int column() const { return col_; }
    const std::set<std::string> &expected() const { return expected_; }

private:
    static std::string format(int line, int col, const std::string &what, const std::set<std::string> &exp) {
        std::string s = std::to_string(line) + ":" + std::to_string(col) + ": " + what;
        if (!exp.empty()) {
            s += " (expected one of:";
            for (const auto &e : exp) s += " " + e;
            s += ")";
        }
        return s;
    }
    int line_, col_;
    std::set<std::string> expected_;
};

/// Well-formed input that violates a mathematical requirement.
class SemanticError : public Error {
public:
    SemanticError(int line, int col, const std::string &what)
        : Error("semantic_error", std::to_string(line) + ":" + std::to_string(col) + ": " + what), line_(line),
          col_(col) {}
    int line() const { return line_; }
    int column() const { return col_; }

private:
    int line_, col_;
};

struct Options {
    std::optional<int> degree;       // x-truncation D
    std::optional<int> order;        // expansion order N
    std::optional<Rational> rho;     // norm radius
    std::optional<Rational> window;  // estimator window fraction
    bool operator==(const Options &) const = default;
};

struct ProblemDocument {
    std::string text;
    ProblemSpec spec;
    Options options;
};

namespace dsl_detail {

/// Sparse polynomial in (x1..xd, y1..yN).
using Poly = std::map<std::vector<int>, Rational>;

inline void poly_add(Poly &p, const std::vector<int> &e, const Rational &c) {
    if (sgn(c) == 0) return;
    auto [it, ins] = p.try_emplace(e, c);
    if (!ins) {
        it->second += c;
        if (sgn(it->second) == 0) p.erase(it);
    }
}

inline Poly poly_mul(const Poly &a, const Poly &b) {
    Poly out;
    for (const auto &[ea, ca] : a)
        for (const auto &[eb, cb] : b) {
            std::vector<int> e(ea);
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
            poly_add(out, e, ca * cb);
        }
    return out;
}

inline std::optional<Rational> as_constant(const Poly &p, std::size_t nvars) {
    if (p.empty()) return Rational(0);
    if (p.size() == 1 && p.begin()->first == std::vector<int>(nvars, 0)) return p.begin()->second;
    return std::nullopt;
}

enum class Tok { Int, Ident, Sym, End };

struct Token {
    Tok kind;
    std::string text;
    int col;
};

inline std::vector<Token> tokenize(std::string_view line, int line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char ch = line[i];
        const int col = static_cast<int>(i) + 1;
        if (ch == '#') break;
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            std::size_t j = i;
            while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
            out.push_back({Tok::Int, std::string(line.substr(i, j - i)), col});
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t j = i;
            while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) ++j;
            out.push_back({Tok::Ident, std::string(line.substr(i, j - i)), col});
            i = j;
            continue;
        }
        if (ch == '-' && i + 1 < line.size() && line[i + 1] == '>') {
            out.push_back({Tok::Sym, "->", col});
            i += 2;
            continue;
        }
        if (std::string_view("+-*/^(),;:=").find(ch) != std::string_view::npos) {
            out.push_back({Tok::Sym, std::string(1, ch), col});
            ++i;
            continue;
        }
        throw ParseError(line_no, col, std::string("unexpected character '") + ch + "'", {});
    }
    out.push_back({Tok::End, "", static_cast<int>(line.size()) + 1});
    return out;
}

class LineParser {
public:
    LineParser(std::vector<Token> toks, int line_no) : toks_(std::move(toks)), line_(line_no) {}

    const Token &peek() const { return toks_[pos_]; }
    bool at_end() const { return peek().kind == Tok::End; }
    bool is_sym(const std::string &s) const { return peek().kind == Tok::Sym && peek().text == s; }
    int line() const { return line_; }

    [[noreturn]] void fail(const std::set<std::string> &expected) const {
        const Token &t = peek();
        std::string got = t.kind == Tok::End ? "end of line" : "'" + t.text + "'";
        throw ParseError(line_, t.col, "unexpected " + got, expected);
    }

    void expect_sym(const std::string &s) {
        if (!is_sym(s)) fail({"'" + s + "'"});
        ++pos_;
    }

    void expect_keyword(const std::string &kw) {
        if (peek().kind != Tok::Ident || peek().text != kw) fail({"'" + kw + "'"});
        ++pos_;
    }

    void expect_end() {
        if (!at_end()) fail({"end of line"});
    }

    long expect_int() {
        if (peek().kind != Tok::Int) fail({"integer"});
        const Token &t = toks_[pos_++];
        if (t.text.size() > 9) throw SemanticError(line_, t.col, "integer " + t.text + " is too large here");
        return std::stol(t.text);
    }

    Token take() { return toks_[pos_++]; }

    /// Variable resolver: name -> index in the combined variable list.
    using Resolver = std::function<std::optional<std::size_t>(const std::string &)>;

    Poly parse_expr(std::size_t nvars, const Resolver &resolve) {
        nvars_ = nvars;
        resolve_ = &resolve;
        Poly p = expr();
        return p;
    }

private:
    Poly expr() {
        Poly acc = term();
        while (is_sym("+") || is_sym("-")) {
            const bool minus = take().text == "-";
            Poly t = term();
            for (const auto &[e, c] : t) poly_add(acc, e, minus ? Rational(-c) : c);
        }
        return acc;
    }

    Poly term() {
        Poly acc = unary();
        while (is_sym("*") || is_sym("/")) {
            const Token op = take();
            const int col = peek().col;
            Poly rhs = unary();
            if (op.text == "*") {
                acc = poly_mul(acc, rhs);
            } else {
                auto c = as_constant(rhs, nvars_);
                if (!c) throw SemanticError(line_, col, "division by a non-constant is not polynomial");
                if (sgn(*c) == 0) throw SemanticError(line_, col, "division by zero");
                for (auto &[e, v] : acc) v /= *c;
            }
        }
        return acc;
    }

    Poly unary() {
        if (is_sym("-") || is_sym("+")) {
            const bool minus = take().text == "-";
            Poly p = unary();
            if (minus)
                for (auto &[e, c] : p) c = -c;
            return p;
        }
        return power();
    }

    Poly power() {
        Poly base = atom();
        if (!is_sym("^")) return base;
        ++pos_;
        if (is_sym("-")) throw SemanticError(line_, peek().col, "negative exponents are not polynomial");
        const int col = peek().col;
        const long e = expect_int();
        if (e > 200) throw SemanticError(line_, col, "exponent is too large");
        Poly out;
        poly_add(out, std::vector<int>(nvars_, 0), 1);
        for (long i = 0; i < e; ++i) out = poly_mul(out, base);
        return out;
    }

    Poly atom() {
        const Token &t = peek();
        if (t.kind == Tok::Int) {
            ++pos_;
            Poly p;
            poly_add(p, std::vector<int>(nvars_, 0), Rational(Integer(t.text, 10)));
            return p;
        }
        if (t.kind == Tok::Ident) {
            ++pos_;
            auto idx = (*resolve_)(t.text);
            if (!idx) throw SemanticError(line_, t.col, "unknown variable '" + t.text + "'");
            Poly p;
            std::vector<int> e(nvars_, 0);
            e[*idx] = 1;
            poly_add(p, e, 1);
            return p;
        }
        if (is_sym("(")) {
            ++pos_;
            Poly p = expr();
            expect_sym(")");
            return p;
        }
        fail({"integer", "variable", "'('", "'-'"});
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int line_;
    std::size_t nvars_ = 0;
    const Resolver *resolve_ = nullptr;
};

/// Index parser for names like x3 or y1 (1-based), with bare x / y as
/// aliases when there is a single variable of that kind.
inline std::optional<std::size_t> indexed_name(const std::string &name, char prefix, std::size_t count) {
    if (name.empty() || name[0] != prefix) return std::nullopt;
    if (name.size() == 1) return count == 1 ? std::optional<std::size_t>(0) : std::nullopt;
    for (std::size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) return std::nullopt;
    if (name.size() > 6 || name[1] == '0') return std::nullopt;
    const std::size_t v = std::stoul(name.substr(1));
    if (v < 1 || v > count) return std::nullopt;
    return v - 1;
}

inline Series x_series(const Poly &p, std::size_t d) {
    int deg = 0;
    for (const auto &[e, c] : p) {
        int t = 0;
        for (std::size_t i = 0; i < d; ++i) t += e[i];
        deg = std::max(deg, t);
    }
    Series s(d, deg);
    for (const auto &[e, c] : p) s.add_to(MultiIndex(std::vector<int>(e.begin(), e.begin() + d)), c);
    return s;
}

} // namespace dsl_detail

/// Parses a problem document. Throws ParseError or SemanticError.
inline ProblemDocument parse_problem(const std::string &text) {
    using namespace dsl_detail;
    ProblemDocument doc;
    doc.text = text;
    std::optional<long> dim, unknowns, order;
    std::optional<Poly> p_poly;
    int p_line = 0, p_col = 0;
    std::map<int, std::map<std::vector<int>, Poly>> l_terms; // j -> alpha -> coefficient
    std::map<int, std::pair<Poly, std::pair<int, int>>> f_polys;
    std::set<std::string> seen_options;

    auto need_header = [&](const LineParser &lp, int col) {
        if (!dim || !unknowns || !order)
            throw SemanticError(lp.line(), col, "dim, unknowns and order must be declared first");
    };
    auto x_resolver = [&](const std::string &n) { return indexed_name(n, 'x', static_cast<std::size_t>(*dim)); };

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        LineParser lp(tokenize(raw, line_no), line_no);
        if (lp.at_end()) continue;
        const Token head = lp.peek();
        const std::set<std::string> statements{"'dim'", "'unknowns'", "'order'", "'P'", "'L'", "'F'", "'option'"};
        if (head.kind != Tok::Ident) lp.fail(statements);

        if (head.text == "dim" || head.text == "unknowns" || head.text == "order") {
            while (true) {
                const Token kw = lp.peek();
                if (kw.kind != Tok::Ident || (kw.text != "dim" && kw.text != "unknowns" && kw.text != "order"))
                    lp.fail({"'dim'", "'unknowns'", "'order'"});
                lp.take();
                const int vcol = lp.peek().col;
                const long v = lp.expect_int();
                if (v < 1) throw SemanticError(line_no, vcol, kw.text + " must be positive");
                if (kw.text == "dim" && v > 8) throw SemanticError(line_no, vcol, "dim is limited to 8");
                if (kw.text == "unknowns" && v > 8) throw SemanticError(line_no, vcol, "unknowns is limited to 8");
                if (kw.text == "order" && v > 8) throw SemanticError(line_no, vcol, "order is limited to 8");
                auto &slot = kw.text == "dim" ? dim : kw.text == "unknowns" ? unknowns : order;
                if (slot) throw SemanticError(line_no, kw.col, kw.text + " declared twice");
                slot = v;
                if (lp.at_end()) break;
                lp.expect_sym(";");
                if (lp.at_end()) break;
            }
        } else if (head.text == "P") {
            lp.take();
            need_header(lp, head.col);
            if (p_poly) throw SemanticError(line_no, head.col, "P declared twice");
            lp.expect_sym("=");
            p_line = line_no;
            p_col = lp.peek().col;
            p_poly = lp.parse_expr(static_cast<std::size_t>(*dim), x_resolver);
            lp.expect_end();
        } else if (head.text == "L") {
            lp.take();
            need_header(lp, head.col);
            const int jcol = lp.peek().col;
            const long j = lp.expect_int();
            if (j < 1 || j > *order)
                throw SemanticError(line_no, jcol, "operator index must be between 1 and " + std::to_string(*order));
            lp.expect_sym(":");
            while (true) {
                const int tcol = lp.peek().col;
                lp.expect_sym("(");
                std::vector<int> alpha;
                while (true) {
                    alpha.push_back(static_cast<int>(lp.expect_int()));
                    if (lp.is_sym(",")) {
                        lp.take();
                        continue;
                    }
                    if (lp.is_sym(")")) break;
                    lp.fail({"','", "')'"});
                }
                lp.expect_sym(")");
                if (alpha.size() != static_cast<std::size_t>(*dim))
                    throw SemanticError(line_no, tcol,
                                        "multi-index has " + std::to_string(alpha.size()) + " entries, expected " +
                                            std::to_string(*dim));
                long total = 0;
                for (int a : alpha) total += a;
                if (total != j)
                    throw SemanticError(line_no, tcol,
                                        "|alpha| = " + std::to_string(total) + " does not match operator order " +
                                            std::to_string(j));
                lp.expect_sym("->");
                Poly c = lp.parse_expr(static_cast<std::size_t>(*dim), x_resolver);
                auto &slot = l_terms[static_cast<int>(j)][alpha];
                for (const auto &[e, v] : c) poly_add(slot, e, v);
                if (lp.at_end()) break;
                if (!lp.is_sym(";")) lp.fail({"';'", "end of line"});
                lp.take();
                if (lp.at_end()) break;
            }
        } else if (head.text == "F") {
            lp.take();
            need_header(lp, head.col);
            const int icol = lp.peek().col;
            const long i = lp.expect_int();
            if (i < 1 || i > *unknowns)
                throw SemanticError(line_no, icol, "component index must be between 1 and " + std::to_string(*unknowns));
            if (f_polys.count(static_cast<int>(i))) throw SemanticError(line_no, head.col, "F " + std::to_string(i) + " declared twice");
            lp.expect_sym("=");
            const int ecol = lp.peek().col;
            const std::size_t d = static_cast<std::size_t>(*dim), n = static_cast<std::size_t>(*unknowns);
            auto resolver = [&](const std::string &name) -> std::optional<std::size_t> {
                if (auto xi = indexed_name(name, 'x', d)) return xi;
                if (auto yi = indexed_name(name, 'y', n)) return d + *yi;
                return std::nullopt;
            };
            Poly fp = lp.parse_expr(d + n, resolver);
            lp.expect_end();
            f_polys[static_cast<int>(i)] = {std::move(fp), {line_no, ecol}};
        } else if (head.text == "option") {
            lp.take();
            const Token name = lp.peek();
            if (name.kind != Tok::Ident) lp.fail({"option name"});
            lp.take();
            lp.expect_sym("=");
            bool neg = false;
            if (lp.is_sym("-")) {
                neg = true;
                lp.take();
            }
            const int vcol = lp.peek().col;
            long num = lp.expect_int();
            long den = 1;
            if (lp.is_sym("/")) {
                lp.take();
                den = lp.expect_int();
                if (den == 0) throw SemanticError(line_no, vcol, "zero denominator");
            }
            lp.expect_end();
            if (seen_options.count(name.text)) throw SemanticError(line_no, name.col, "option " + name.text + " set twice");
            seen_options.insert(name.text);
            Rational v(neg ? -num : num, den);
            v.canonicalize();
            if (name.text == "degree" || name.text == "order") {
                if (den != 1 || neg) throw SemanticError(line_no, vcol, name.text + " must be a non-negative integer");
                (name.text == "degree" ? doc.options.degree : doc.options.order) = static_cast<int>(num);
            } else if (name.text == "rho") {
                if (sgn(v) <= 0) throw SemanticError(line_no, vcol, "rho must be positive");
                doc.options.rho = v;
            } else if (name.text == "window") {
                if (sgn(v) <= 0 || v > 1) throw SemanticError(line_no, vcol, "window must be in (0, 1]");
                doc.options.window = v;
            } else {
                throw SemanticError(line_no, name.col, "unknown option '" + name.text + "'");
            }
        } else {
            lp.fail(statements);
        }
    }

    const int end_line = std::max(line_no, 1);
    if (!dim || !unknowns || !order) throw SemanticError(end_line, 1, "missing dim/unknowns/order declaration");
    if (!p_poly) throw SemanticError(end_line, 1, "missing P");
    const std::size_t d = static_cast<std::size_t>(*dim), n = static_cast<std::size_t>(*unknowns);
    ProblemSpec &spec = doc.spec;
    spec.dim = d;
    spec.unknowns = n;
    spec.order = static_cast<int>(*order);
    spec.p = x_series(*p_poly, d);
    if (spec.p.is_zero()) throw SemanticError(p_line, p_col, "P must not be identically zero");
    if (sgn(spec.p.constant_term()) != 0) throw SemanticError(p_line, p_col, "P(0) must vanish");
    for (int j = 1; j <= spec.order; ++j) {
        DiffOperator l(d, j);
        for (const auto &[alpha, c] : l_terms[j]) l.add_term(MultiIndex(alpha), x_series(c, d));
        spec.ops.push_back(std::move(l));
    }
    spec.f.assign(n, YPoly{});
    for (std::size_t i = 1; i <= n; ++i) {
        auto it = f_polys.find(static_cast<int>(i));
        if (it == f_polys.end()) throw SemanticError(end_line, 1, "missing F " + std::to_string(i));
        const auto &[fp, pos] = it->second;
        std::map<std::vector<int>, Poly> by_gamma;
        for (const auto &[e, c] : fp) {
            std::vector<int> gamma(e.begin() + d, e.end());
            by_gamma[gamma][std::vector<int>(e.begin(), e.begin() + d)] = c;
        }
        for (const auto &[gamma, coef] : by_gamma) spec.f[i - 1].emplace(MultiIndex(gamma), x_series(coef, d));
        auto z = spec.f[i - 1].find(MultiIndex(n));
        if (z != spec.f[i - 1].end() && sgn(z->second.constant_term()) != 0)
            throw SemanticError(pos.first, pos.second, "F(0,0) must vanish");
    }
    return doc;
}

namespace dsl_detail {

inline std::string monomial_text(const std::vector<int> &e, const std::vector<std::string> &names) {
    std::string s;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (!s.empty()) s += "*";
        s += names[i];
        if (e[i] > 1) s += "^" + std::to_string(e[i]);
    }
    return s;
}

/// Canonical text of sum c_e * monomial(e); terms in the given order.
inline std::string poly_text(const std::vector<std::pair<std::vector<int>, Rational>> &terms,
                             const std::vector<std::string> &names) {
    if (terms.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto &[e, c0] : terms) {
        Rational c = c0;
        const bool neg = sgn(c) < 0;
        if (neg) c = -c;
        s += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
        first = false;
        const std::string m = monomial_text(e, names);
        if (m.empty())
            s += to_string(c);
        else if (c == 1)
            s += m;
        else
            s += to_string(c) + "*" + m;
    }
    return s;
}

inline std::vector<std::string> var_names(std::size_t d, std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= d; ++i) names.push_back("x" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) names.push_back("y" + std::to_string(i));
    return names;
}

inline std::string series_text(const Series &s) {
    std::vector<std::pair<std::vector<int>, Rational>> terms;
    for (const auto &[e, c] : s.terms()) terms.emplace_back(e.values(), c);
    return poly_text(terms, var_names(s.dim(), 0));
}

} // namespace dsl_detail

/// Canonical document text; parse_problem(serialize_problem(doc)) reproduces doc.spec and doc.options.
inline std::string serialize_problem(const ProblemSpec &spec, const Options &opt = {}) {
    using namespace dsl_detail;
    std::string out = "dim " + std::to_string(spec.dim) + "; unknowns " + std::to_string(spec.unknowns) +
                      "; order " + std::to_string(spec.order) + "\n";
    out += "P = " + series_text(spec.p) + "\n";
    for (const auto &l : spec.ops) {
        if (l.is_zero()) continue;
        out += "L " + std::to_string(l.order()) + " :";
        bool first = true;
        for (const auto &[alpha, c] : l.terms()) {
            out += first ? " " : " ; ";
            first = false;
            std::string tuple = "(";
            for (std::size_t i = 0; i < alpha.dim(); ++i) tuple += (i ? "," : "") + std::to_string(alpha[i]);
            out += tuple + ") -> " + series_text(c);
        }
        out += "\n";
    }
    const auto names = var_names(spec.dim, spec.unknowns);
    for (std::size_t i = 0; i < spec.f.size(); ++i) {
        std::vector<std::pair<std::vector<int>, Rational>> terms;
        for (const auto &[gamma, c] : spec.f[i])
            for (const auto &[e, v] : c.terms()) {
                std::vector<int> full = e.values();
                full.insert(full.end(), gamma.values().begin(), gamma.values().end());
                terms.emplace_back(std::move(full), v);
            }
        out += "F " + std::to_string(i + 1) + " = " + poly_text(terms, names) + "\n";
    }
    if (opt.degree) out += "option degree = " + std::to_string(*opt.degree) + "\n";
    if (opt.order) out += "option order = " + std::to_string(*opt.order) + "\n";
    if (opt.rho) out += "option rho = " + to_string(*opt.rho) + "\n";
    if (opt.window) out += "option window = " + to_string(*opt.window) + "\n";
    return out;
}

inline std::string serialize_problem(const ProblemDocument &doc) { return serialize_problem(doc.spec, doc.options); }

} // namespace glab::cli
