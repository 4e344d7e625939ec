#pragma once

// Text form of an IdentitySpec: line-oriented key = value pairs grouped in
// [sections], with a small arithmetic grammar for values.
//
//   id = rmt-power
//   convention = ramanujan
//   closed_form = Γ(1/2)
//   [g]
//   preset = constant
//   value = 1
//   [transform]
//   entry = power
//   s = 0.5
//
// Positions are 1-based; columns count code points.

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "genseries.hpp"
#include "specfun.hpp"
#include "verify.hpp"

namespace opcalc::spec {

// ------------------------------------------------------------------ lexing

struct Token {
    enum Kind { number, name, symbol, end } kind = end;
    std::string text;
    int column = 0;
};

namespace detail {

inline std::string quoted(const Token& t) { return t.kind == Token::end ? "end of value" : "'" + t.text + "'"; }

/// UTF-8 spellings folded into the ASCII grammar.
struct Alias {
    std::string_view utf8;
    Token::Kind kind;
    std::string_view ascii;
};

inline constexpr Alias aliases[] = {
    {"−", Token::symbol, "-"},   {"×", Token::symbol, "*"},  {"·", Token::symbol, "*"},
    {"÷", Token::symbol, "/"},   {"Γ", Token::name, "Gamma"}, {"ψ", Token::name, "psi"},
    {"ζ", Token::name, "zeta"},  {"π", Token::name, "pi"},    {"γ", Token::name, "gamma"},
};

inline bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace detail

/// Tokens of one value; column0 is the column of text[0].
inline std::vector<Token> tokenize(std::string_view text, int line, int column0) {
    std::vector<Token> out;
    std::size_t i = 0;
    int col = column0;
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t') {
            ++i;
            ++col;
            continue;
        }
        Token t;
        t.column = col;
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j < text.size() && text[j] == '.') {
                ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
                if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
                    while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
                    j = k;
                }
            }
            t.kind = Token::number;
            t.text = std::string(text.substr(i, j - i));
            col += static_cast<int>(j - i);
            i = j;
        } else if (detail::name_start(c)) {
            std::size_t j = i;
            while (j < text.size() && detail::name_char(text[j])) ++j;
            t.kind = Token::name;
            t.text = std::string(text.substr(i, j - i));
            col += static_cast<int>(j - i);
            i = j;
        } else if (std::string_view("+-*/^(),[]").find(c) != std::string_view::npos) {
            t.kind = Token::symbol;
            t.text = std::string(1, c);
            ++i;
            ++col;
        } else {
            bool found = false;
            for (const auto& a : detail::aliases) {
                if (text.substr(i, a.utf8.size()) == a.utf8) {
                    t.kind = a.kind;
                    t.text = std::string(a.ascii);
                    i += a.utf8.size();
                    ++col;
                    found = true;
                    break;
                }
            }
            if (!found)
                throw SyntaxError("unexpected character; expected a number, a name, an operator or a bracket", line, col);
        }
        out.push_back(std::move(t));
    }
    out.push_back(Token{Token::end, "", col});
    return out;
}

// -------------------------------------------------------------- expressions

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum Kind { number, constant, variable, negate, add, sub, mul, div, pow, call, tuple } kind = number;
    double value = 0.0;             // number, constant
    std::optional<Rational> exact;  // integer literals
    std::string name;               // constant, variable, call
    int slot = 0;                   // variable index
    std::vector<ExprPtr> args;
    int column = 0;
};

namespace detail {

struct FunctionDef {
    std::string_view name;
    int arity;
};

// Names resolved here first; the rest of specfun's table is reachable by name.
inline constexpr FunctionDef builtins[] = {
    {"Gamma", 1}, {"psi", 1}, {"zeta", 1}, {"exp", 1}, {"log", 1}, {"sqrt", 1},
    {"sin", 1},   {"cos", 1}, {"tan", 1},  {"B", 2},   {"abs", 1},
};

inline std::optional<int> function_arity(const std::string& name) {
    for (const auto& f : builtins)
        if (f.name == name) return f.arity;
    for (const auto& f : specfun::function_table)
        if (f.name == name) return f.arity;
    return std::nullopt;
}

inline std::optional<double> constant_value(const std::string& name) {
    if (name == "pi") return std::numbers::pi;
    if (name == "e") return std::numbers::e;
    if (name == "gamma") return std::numbers::egamma;
    return std::nullopt;
}

}  // namespace detail

/// Recursive descent over tokens of one value. Grammar:
///   value   = sum
///   sum     = product { (+|-) product }
///   product = unary { [*|/] unary }
///   unary   = (+|-) unary | power
///   power   = primary [ ^ unary ]
///   primary = number | name | name ( args ) | ( value {, value} ) | [ value {, value} ]
class Parser {
public:
    Parser(std::vector<Token> tokens, int line, std::vector<std::string> variables = {})
        : toks_(std::move(tokens)), line_(line), vars_(std::move(variables)) {}

    ExprPtr parse() {
        ExprPtr e = sum();
        if (peek().kind != Token::end) fail("expected an operator or end of value; found " + detail::quoted(peek()));
        return e;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int line_;
    std::vector<std::string> vars_;

    const Token& peek() const { return toks_[pos_]; }
    bool at(std::string_view sym) const { return peek().kind == Token::symbol && peek().text == sym; }
    Token take() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

    [[noreturn]] void fail(const std::string& what) const { fail_at(what, peek().column); }
    [[noreturn]] void fail_at(const std::string& what, int column) const { throw SyntaxError(what, line_, column); }

    bool starts_primary() const { return peek().kind == Token::number || peek().kind == Token::name || at("("); }

    void expect(std::string_view sym) {
        if (!at(sym)) fail("expected '" + std::string(sym) + "'; found " + detail::quoted(peek()));
        take();
    }

    static ExprPtr node(Expr::Kind k, std::vector<ExprPtr> args, int column) {
        auto e = std::make_shared<Expr>();
        e->kind = k;
        e->args = std::move(args);
        e->column = column;
        return e;
    }

    ExprPtr sum() {
        ExprPtr left = product();
        while (at("+") || at("-")) {
            Token op = take();
            left = node(op.text == "+" ? Expr::add : Expr::sub, {left, product()}, op.column);
        }
        return left;
    }

    ExprPtr product() {
        ExprPtr left = unary();
        while (at("*") || at("/") || starts_primary()) {
            // Juxtaposition, as in "Gamma(a) Gamma(b)", multiplies.
            Token op = starts_primary() ? Token{Token::symbol, "*", peek().column} : take();
            ExprPtr right = unary();
            if (op.text == "/" && right->kind == Expr::number && right->value == 0.0)
                fail_at("division by a zero literal", right->column);
            left = node(op.text == "*" ? Expr::mul : Expr::div, {left, right}, op.column);
        }
        return left;
    }

    ExprPtr unary() {
        if (at("-") || at("+")) {
            Token op = take();
            ExprPtr inner = unary();
            return op.text == "-" ? node(Expr::negate, {inner}, op.column) : inner;
        }
        return power();
    }

    ExprPtr power() {
        ExprPtr base = primary();
        if (at("^")) {
            Token op = take();
            return node(Expr::pow, {base, unary()}, op.column);
        }
        return base;
    }

    ExprPtr group(std::string_view close) {
        int column = take().column;
        std::vector<ExprPtr> items{sum()};
        bool comma = false;
        while (at(",")) {
            take();
            comma = true;
            items.push_back(sum());
        }
        if (!at(close)) fail("expected ',' or '" + std::string(close) + "'; found " + detail::quoted(peek()));
        take();
        if (!comma && close == ")") return items.front();
        return node(Expr::tuple, std::move(items), column);
    }

    ExprPtr primary() {
        const Token& t = peek();
        if (t.kind == Token::number) {
            auto e = std::make_shared<Expr>();
            e->kind = Expr::number;
            e->column = t.column;
            e->value = std::strtod(t.text.c_str(), nullptr);
            if (t.text.find_first_of(".eE") == std::string::npos && t.text.size() <= 18)
                e->exact = Rational(std::stoll(t.text));
            take();
            return e;
        }
        if (at("(")) return group(")");
        if (at("[")) return group("]");
        if (t.kind == Token::name) {
            Token name = take();
            if (at("(")) {
                auto arity = detail::function_arity(name.text);
                if (!arity) fail_at("unknown function '" + name.text + "'; expected one of Gamma, psi, zeta, erf, exp, log, sqrt, sin, cos, tan, B or a special-function name", name.column);
                take();
                std::vector<ExprPtr> args;
                if (!at(")")) {
                    args.push_back(sum());
                    while (at(",")) {
                        take();
                        args.push_back(sum());
                    }
                }
                expect(")");
                if (static_cast<int>(args.size()) != *arity)
                    fail_at(name.text + " takes " + std::to_string(*arity) + " argument(s)", name.column);
                auto e = node(Expr::call, std::move(args), name.column);
                std::const_pointer_cast<Expr>(e)->name = name.text;
                return e;
            }
            auto e = std::make_shared<Expr>();
            e->column = name.column;
            e->name = name.text;
            for (std::size_t j = 0; j < vars_.size(); ++j) {
                if (vars_[j] == name.text) {
                    e->kind = Expr::variable;
                    e->slot = static_cast<int>(j);
                    return e;
                }
            }
            if (auto c = detail::constant_value(name.text)) {
                e->kind = Expr::constant;
                e->value = *c;
                return e;
            }
            std::string allowed = "pi, e, gamma";
            for (const auto& v : vars_) allowed += ", " + v;
            fail_at("unknown name '" + name.text + "'; expected one of " + allowed, name.column);
        }
        fail("expected a number, a name, '(' or '['; found " + detail::quoted(t));
    }
};

inline ExprPtr parse_expression(std::string_view text, int line, int column0, std::vector<std::string> variables = {}) {
    return Parser(tokenize(text, line, column0), line, std::move(variables)).parse();
}

/// Exact value of an expression built from integer literals, + - * / and
/// integer powers; nullopt otherwise.
inline std::optional<Rational> exact_value(const Expr& e) {
    try {
        switch (e.kind) {
            case Expr::number: return e.exact;
            case Expr::negate: {
                auto a = exact_value(*e.args[0]);
                if (!a) return std::nullopt;
                return -*a;
            }
            case Expr::add:
            case Expr::sub:
            case Expr::mul:
            case Expr::div: {
                auto a = exact_value(*e.args[0]);
                auto b = exact_value(*e.args[1]);
                if (!a || !b) return std::nullopt;
                if (e.kind == Expr::add) return *a + *b;
                if (e.kind == Expr::sub) return *a - *b;
                if (e.kind == Expr::mul) return *a * *b;
                return *a / *b;
            }
            case Expr::pow: {
                auto a = exact_value(*e.args[0]);
                auto b = exact_value(*e.args[1]);
                if (!a || !b || !b->is_integer() || std::abs(b->num()) > 64) return std::nullopt;
                Rational r(1);
                for (std::int64_t i = 0; i < std::abs(b->num()); ++i) r = r * *a;
                return b->num() < 0 ? Rational(1) / r : r;
            }
            default: return std::nullopt;
        }
    } catch (const Error&) {
        return std::nullopt;  // overflow or an exact zero divisor
    }
}

inline double evaluate(const Expr& e, std::span<const double> vars = {}) {
    auto arg = [&](std::size_t i) { return evaluate(*e.args[i], vars); };
    switch (e.kind) {
        case Expr::number:
        case Expr::constant: return e.value;
        case Expr::variable:
            if (e.slot >= static_cast<int>(vars.size())) throw DomainError("'" + e.name + "' has no value here");
            return vars[e.slot];
        case Expr::negate: return -arg(0);
        case Expr::add: return arg(0) + arg(1);
        case Expr::sub: return arg(0) - arg(1);
        case Expr::mul: return arg(0) * arg(1);
        case Expr::div: return arg(0) / arg(1);
        case Expr::pow: {
            if (auto n = exact_value(*e.args[1]); n && n->is_integer() && std::abs(n->num()) <= 64) {
                double b = arg(0), r = 1.0;
                for (std::int64_t i = 0; i < std::abs(n->num()); ++i) r *= b;
                return n->num() < 0 ? 1.0 / r : r;
            }
            return std::pow(arg(0), arg(1));
        }
        case Expr::call: {
            const std::string& f = e.name;
            if (f == "Gamma") return specfun::gamma(arg(0));
            if (f == "psi") return specfun::digamma(arg(0));
            if (f == "zeta") return specfun::zeta(arg(0));
            if (f == "exp") return std::exp(arg(0));
            if (f == "log") return std::log(arg(0));
            if (f == "sqrt") return std::sqrt(arg(0));
            if (f == "sin") return std::sin(arg(0));
            if (f == "cos") return std::cos(arg(0));
            if (f == "tan") return std::tan(arg(0));
            if (f == "abs") return std::abs(arg(0));
            if (f == "B") return specfun::beta(arg(0), arg(1));
            std::vector<double> a;
            for (std::size_t i = 0; i < e.args.size(); ++i) a.push_back(arg(i));
            return specfun::evaluate(f, a);
        }
        case Expr::tuple: throw DomainError("a tuple cannot be used as a number");
    }
    return 0.0;
}

// ----------------------------------------------------------------- document

/// Per-axis LHS hints; unset fields keep the quadrature defaults.
struct AxisHint {
    double endpoint = 0.0;
    std::optional<double> phase;
    std::optional<double> pole;
    std::optional<double> decay;

    friend bool operator==(const AxisHint&, const AxisHint&) = default;
};

struct GDoc {
    std::string preset = "constant";  // constant | geometric | gamma-product | weighted
    std::string base = "constant";    // weighted: the preset carrying the parameters below
    Weight weight = Weight::gamma;
    double value = 1.0;               // constant
    double ratio = 1.0;               // geometric
    GammaProduct product;             // gamma-product

    friend bool operator==(const GDoc&, const GDoc&) = default;
};

struct TransformDoc {
    std::string entry;               // catalog name; empty for an inline term list
    Params params;
    TransformKind kind = TransformKind::laplace;
    std::vector<SeriesTerm> terms;  // inline H

    friend bool operator==(const TransformDoc&, const TransformDoc&) = default;
};

struct SpecDocument {
    std::string id = "spec";
    Convention convention = Convention::ramanujan;
    Mode mode = Mode::standard;
    std::optional<Status> expect;
    std::string closed_form;  // expression text; empty when absent
    std::string f;            // expression in x, y, z; empty when absent
    GDoc g;
    TransformDoc transform;
    Tolerances tol;
    TruncationPolicy policy;
    PsiOptions psi;
    std::vector<AxisHint> hints;

    /// "section.key" -> line, for diagnostics raised after parsing.
    std::map<std::string, int> lines;

    friend bool operator==(const SpecDocument& a, const SpecDocument& b) {
        return a.id == b.id && a.convention == b.convention && a.mode == b.mode && a.expect == b.expect &&
               a.closed_form == b.closed_form && a.f == b.f && a.g == b.g && a.transform == b.transform &&
               a.tol == b.tol && a.policy == b.policy && a.psi == b.psi && a.hints == b.hints;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline int code_points(std::string_view s) {
    int n = 0;
    for (char c : s)
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    return n;
}

/// One "key = value" line with positions.
struct Entry {
    std::string key;
    std::string value;
    int line = 0;
    int key_column = 0;
    int value_column = 0;
};

[[noreturn]] inline void fail(const Entry& e, const std::string& what) {
    throw SyntaxError(what, e.line, e.value_column);
}

inline ExprPtr expr(const Entry& e, std::vector<std::string> vars = {}) {
    if (e.value.empty()) fail(e, "expected a value after '='");
    return parse_expression(e.value, e.line, e.value_column, std::move(vars));
}

inline double number_of(const Entry& e, const Expr& x) {
    if (x.kind == Expr::tuple) throw SyntaxError("expected a number, found a tuple", e.line, x.column);
    double v;
    try {
        v = evaluate(x);
    } catch (const Error& err) {
        throw SyntaxError(std::string("cannot evaluate: ") + err.what(), e.line, x.column);
    }
    if (!std::isfinite(v)) throw SyntaxError("value is not finite", e.line, x.column);
    return v;
}

inline double number(const Entry& e) { return number_of(e, *expr(e)); }

inline Exponent exponent_of_expr(const Entry& e, const Expr& x) {
    if (auto r = exact_value(x)) return *r;
    return opcalc::detail::exponent_of(number_of(e, x));
}

inline std::size_t count(const Entry& e, double lo = 0.0) {
    double v = number(e);
    if (v != std::floor(v) || v < lo || v > 1e9) fail(e, "expected an integer of at least " + format_double(lo));
    return static_cast<std::size_t>(v);
}

inline std::string word(const Entry& e) {
    if (e.value.empty()) fail(e, "expected a value after '='");
    for (char c : e.value)
        if (!name_char(c) && c != '-' && c != '.')
            fail(e, "expected a single word; found '" + e.value + "'");
    return e.value;
}

inline bool boolean(const Entry& e) {
    std::string w = word(e);
    if (w == "true" || w == "1" || w == "yes") return true;
    if (w == "false" || w == "0" || w == "no") return false;
    fail(e, "expected true or false; found '" + w + "'");
}

/// Elements of a tuple, or the value itself when scalar.
inline std::vector<ExprPtr> items(const ExprPtr& x) {
    if (x->kind == Expr::tuple) return x->args;
    return {x};
}

inline std::vector<double> numbers(const Entry& e, const ExprPtr& x) {
    std::vector<double> out;
    for (const auto& it : items(x)) out.push_back(number_of(e, *it));
    return out;
}

inline std::vector<Exponent> exponents(const Entry& e, const ExprPtr& x) {
    std::vector<Exponent> out;
    for (const auto& it : items(x)) out.push_back(exponent_of_expr(e, *it));
    return out;
}

/// (c, alpha, beta) with alpha and beta scalar for k = 1.
inline SeriesTerm term(const Entry& e, const ExprPtr& x) {
    if (x->kind != Expr::tuple || x->args.size() != 3)
        throw SyntaxError("expected a term (c, alpha, beta)", e.line, x->column);
    SeriesTerm t;
    t.c = number_of(e, *x->args[0]);
    t.alpha = exponents(e, x->args[1]);
    for (const auto& b : items(x->args[2])) {
        double v = number_of(e, *b);
        if (v != std::floor(v) || v < 0.0 || v > 2.0)
            throw SyntaxError("log power beta must be 0, 1 or 2", e.line, b->column);
        t.beta.push_back(static_cast<int>(v));
    }
    if (t.alpha.size() != t.beta.size())
        throw SyntaxError("alpha and beta need the same number of components", e.line, x->column);
    return t;
}

/// (a, b, power): Gamma(<a, t> + b)^power with power = +1 or -1.
inline GammaFactor factor(const Entry& e, const ExprPtr& x) {
    if (x->kind != Expr::tuple || x->args.size() != 3)
        throw SyntaxError("expected a factor (a, b, power)", e.line, x->column);
    GammaFactor f;
    f.a = numbers(e, x->args[0]);
    f.b = number_of(e, *x->args[1]);
    double p = number_of(e, *x->args[2]);
    if (p != 1.0 && p != -1.0) throw SyntaxError("factor power must be 1 or -1", e.line, x->args[2]->column);
    f.power = static_cast<int>(p);
    return f;
}

/// Per-axis optional numbers; the word none leaves an axis unset.
inline std::vector<std::optional<double>> optional_numbers(const Entry& e, const ExprPtr& x) {
    std::vector<std::optional<double>> out;
    for (const auto& it : items(x)) {
        if (it->kind == Expr::variable && it->name == "none") {
            out.push_back(std::nullopt);
            continue;
        }
        out.push_back(number_of(e, *it));
    }
    return out;
}

inline const std::vector<std::string>& section_keys(const std::string& section) {
    static const std::map<std::string, std::vector<std::string>> keys{
        {"", {"id", "convention", "mode", "expect", "closed_form", "f"}},
        {"g", {"preset", "base", "weight", "value", "ratio", "c", "z", "w", "factor"}},
        {"transform", {"entry", "kind", "term", "terms"}},
        {"tolerances", {"lhs", "match"}},
        {"policy",
         {"max_terms", "tail_threshold", "tail_run", "divergence_ratio", "divergence_window", "divergence_warmup"}},
        {"psi", {"case", "s", "lifted", "form"}},
        {"lhs", {"endpoint", "phase", "pole", "decay"}},
        {"term", {"c", "alpha", "beta"}},
    };
    return keys.at(section);
}

inline std::string joined(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
}

inline std::string psi_form_name(PsiForm f) { return f == PsiForm::direct ? "direct" : "functional-equation"; }

}  // namespace detail

inline Exponent parse_exponent(std::string_view text) {
    detail::Entry e{"value", std::string(text), 1, 1, 1};
    return detail::exponent_of_expr(e, *detail::expr(e));
}

/// Parses the text form; every key is checked against its section.
inline SpecDocument parse_document(std::string_view text) {
    using namespace detail;
    SpecDocument doc;
    std::string section;
    std::set<std::string> seen;
    std::set<std::string> repeatable{"g.factor", "transform.term"};
    bool have_transform_terms = false;
    std::vector<std::pair<std::string, Entry>> hint_entries;

    // A [term] section holds c (default 1), alpha and beta (default 0 per axis).
    struct PendingTerm {
        int line = 0;
        cplx c = 1.0;
        std::optional<std::vector<Exponent>> alpha;
        std::optional<std::vector<int>> beta;
        int beta_line = 0, beta_column = 0;
    };
    std::optional<PendingTerm> pending;
    auto close_term = [&] {
        if (!pending) return;
        if (!pending->alpha) throw SyntaxError("[term] needs an alpha", pending->line, 1);
        SeriesTerm t{pending->c, *pending->alpha, pending->beta.value_or(std::vector<int>(pending->alpha->size(), 0))};
        if (t.alpha.size() != t.beta.size())
            throw SyntaxError("alpha and beta need the same number of components", pending->beta_line,
                              pending->beta_column);
        doc.transform.terms.push_back(std::move(t));
        have_transform_terms = true;
        pending.reset();
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::string body = trim(line);
        if (body.empty()) continue;
        int lead = code_points(line.substr(0, line.find_first_not_of(" \t")));

        if (body.front() == '[') {
            if (body.back() != ']') throw SyntaxError("expected ']' to close the section name", line_no, lead + code_points(body) + 1);
            std::string name = trim(std::string_view(body).substr(1, body.size() - 2));
            static const std::vector<std::string> sections{"g", "transform", "term", "tolerances", "policy", "psi", "lhs"};
            if (std::find(sections.begin(), sections.end(), name) == sections.end())
                throw SyntaxError("unknown section '" + name + "'; expected one of " + joined(sections), line_no, lead + 2);
            if (name != "term" && seen.count("[" + name + "]"))
                throw SyntaxError("section [" + name + "] repeated", line_no, lead + 1);
            close_term();
            seen.insert("[" + name + "]");
            section = name;
            doc.lines.emplace(section, line_no);
            if (name == "term") {
                for (const char* k : {"term.c", "term.alpha", "term.beta"}) seen.erase(k);
                pending = PendingTerm{};
                pending->line = line_no;
            }
            continue;
        }

        std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw SyntaxError("expected '=' after the key", line_no, lead + code_points(body) + 1);
        Entry e;
        e.line = line_no;
        e.key = trim(std::string_view(body).substr(0, eq));
        e.key_column = lead + 1;
        std::string_view rest = std::string_view(body).substr(eq + 1);
        std::size_t skip = rest.find_first_not_of(" \t");
        e.value = trim(rest);
        e.value_column = lead + code_points(std::string_view(body).substr(0, eq + 1)) + 1 +
                         (skip == std::string_view::npos ? 0 : code_points(rest.substr(0, skip)));
        if (e.key.empty()) throw SyntaxError("expected a key before '='", line_no, lead + 1);

        const std::string full = section.empty() ? e.key : section + "." + e.key;
        const auto& allowed = section_keys(section);
        const bool known = std::find(allowed.begin(), allowed.end(), e.key) != allowed.end();
        if (!known && section != "transform")
            throw SyntaxError("unknown key '" + e.key + "'" + (section.empty() ? "" : " in [" + section + "]") +
                                  "; expected one of " + joined(allowed),
                              line_no, e.key_column);
        if (seen.count(full) && !repeatable.count(full))
            throw SyntaxError("key '" + e.key + "' repeated", line_no, e.key_column);
        seen.insert(full);
        doc.lines.emplace(full, line_no);

        if (section.empty()) {
            if (e.key == "id") {
                if (e.value.empty()) fail(e, "expected an id");
                doc.id = e.value;
            } else if (e.key == "convention") {
                auto c = parse_convention(word(e));
                if (!c) fail(e, "unknown convention '" + e.value + "'; expected one of ramanujan, hardy, carr, even-cosine");
                doc.convention = *c;
            } else if (e.key == "mode") {
                auto m = parse_mode(word(e));
                if (!m)
                    fail(e, "unknown mode '" + e.value +
                                "'; expected one of standard, hardy, carr, cosine, dirichlet-lift, psi-kernel");
                doc.mode = *m;
            } else if (e.key == "expect") {
                auto s = parse_status(word(e));
                if (!s || *s == Status::failed || *s == Status::inconclusive)
                    fail(e, "expected verified or formal-only");
                doc.expect = *s;
            } else if (e.key == "closed_form") {
                number(e);
                doc.closed_form = e.value;
            } else {
                auto x = expr(e, {"x", "y", "z"});
                if (x->kind == Expr::tuple) fail(e, "f must be a single expression");
                doc.f = e.value;
            }
        } else if (section == "g") {
            auto& g = doc.g;
            if (e.key == "preset" || e.key == "base") {
                std::string p = word(e);
                static const std::vector<std::string> presets{"constant", "geometric", "gamma-product", "weighted"};
                if (std::find(presets.begin(), presets.end(), p) == presets.end() || (e.key == "base" && p == "weighted"))
                    throw UnknownPreset("line " + std::to_string(e.line) + ", column " + std::to_string(e.value_column) +
                                        ": unknown g " + e.key + " '" + p + "'; expected one of constant, geometric, gamma-product" +
                                        (e.key == "preset" ? ", weighted" : ""));
                (e.key == "preset" ? g.preset : g.base) = p;
            } else if (e.key == "weight") {
                std::string w = word(e);
                if (w == "gamma") g.weight = Weight::gamma;
                else if (w == "gamma-cos") g.weight = Weight::gamma_cos;
                else fail(e, "unknown weight '" + w + "'; expected gamma or gamma-cos");
            } else if (e.key == "value") {
                g.value = number(e);
            } else if (e.key == "ratio") {
                g.ratio = number(e);
            } else if (e.key == "c") {
                g.product.c = number(e);
            } else if (e.key == "z") {
                g.product.z = number(e);
            } else if (e.key == "w") {
                g.product.w = numbers(e, expr(e));
            } else {
                g.product.factors.push_back(factor(e, expr(e)));
            }
        } else if (section == "transform") {
            auto& t = doc.transform;
            if (e.key == "entry") {
                t.entry = word(e);
            } else if (e.key == "kind") {
                std::string k = word(e);
                if (k == "laplace") t.kind = TransformKind::laplace;
                else if (k == "cosine") t.kind = TransformKind::cosine;
                else fail(e, "unknown kind '" + k + "'; expected laplace or cosine");
            } else if (e.key == "term") {
                t.terms.push_back(term(e, expr(e)));
                have_transform_terms = true;
            } else if (e.key == "terms") {
                auto x = expr(e);
                if (x->kind != Expr::tuple) fail(e, "expected a list [(c, alpha, beta), ...]");
                // A single term written without the outer list.
                if (x->args.size() == 3 && x->args[0]->kind != Expr::tuple) t.terms.push_back(term(e, x));
                else
                    for (const auto& it : x->args) t.terms.push_back(term(e, it));
                have_transform_terms = true;
            } else {
                t.params[e.key] = number(e);
            }
        } else if (section == "tolerances") {
            double v = number(e);
            if (!(v > 0.0)) fail(e, "tolerances must be positive");
            (e.key == "lhs" ? doc.tol.lhs : doc.tol.match) = v;
        } else if (section == "policy") {
            auto& p = doc.policy;
            if (e.key == "max_terms") p.max_terms = count(e, 1);
            else if (e.key == "tail_threshold") p.tail_threshold = number(e);
            else if (e.key == "tail_run") p.tail_run = static_cast<int>(count(e, 1));
            else if (e.key == "divergence_ratio") p.divergence_ratio = number(e);
            else if (e.key == "divergence_window") p.divergence_window = static_cast<int>(count(e, 1));
            else p.divergence_warmup = count(e, 0);
        } else if (section == "psi") {
            if (e.key == "case") {
                auto c = parse_psi_case(word(e));
                if (!c) fail(e, "unknown psi case '" + e.value + "'; expected one of one, cosine-half, sine-half, hankel-J0");
                doc.psi.weight = *c;
            } else if (e.key == "s") {
                doc.psi.s = number(e);
            } else if (e.key == "lifted") {
                doc.psi.lifted = boolean(e);
            } else {
                std::string f = word(e);
                if (f == "direct") doc.psi.form = PsiForm::direct;
                else if (f == "functional-equation") doc.psi.form = PsiForm::functional_equation;
                else fail(e, "unknown form '" + f + "'; expected direct or functional-equation");
            }
        } else if (section == "term") {
            auto x = expr(e);
            if (e.key == "c") {
                pending->c = number_of(e, *x);
            } else if (e.key == "alpha") {
                pending->alpha = exponents(e, x);
            } else {
                std::vector<int> b;
                for (const auto& it : items(x)) {
                    double v = number_of(e, *it);
                    if (v != std::floor(v) || v < 0.0 || v > 2.0)
                        throw SyntaxError("log power beta must be 0, 1 or 2", e.line, it->column);
                    b.push_back(static_cast<int>(v));
                }
                pending->beta = b;
                pending->beta_line = e.line;
                pending->beta_column = e.value_column;
            }
        } else {
            hint_entries.emplace_back(e.key, e);
        }
    }
    close_term();

    if (!doc.transform.entry.empty() && have_transform_terms)
        throw SyntaxError("[transform] takes either entry or terms, not both", doc.lines.at("transform.entry"), 1);
    if (doc.transform.entry.empty() && !doc.transform.params.empty())
        throw SyntaxError("transform parameters need an entry", doc.lines.at("transform." + doc.transform.params.begin()->first), 1);
    if (doc.transform.entry.empty() && !have_transform_terms)
        throw SyntaxError("missing [transform] entry or [term] sections",
                          doc.lines.count("transform") ? doc.lines.at("transform") : line_no + 1, 1);

    for (const auto& [key, e] : hint_entries) {
        auto vals = optional_numbers(e, expr(e, {"none"}));
        if (doc.hints.empty()) doc.hints.resize(vals.size());
        if (vals.size() != doc.hints.size()) fail(e, "expected one value per axis (" + std::to_string(doc.hints.size()) + ")");
        for (std::size_t j = 0; j < vals.size(); ++j) {
            auto& h = doc.hints[j];
            if (key == "endpoint") h.endpoint = vals[j].value_or(0.0);
            else if (key == "phase") h.phase = vals[j];
            else if (key == "pole") h.pole = vals[j];
            else h.decay = vals[j];
        }
    }
    return doc;
}

// ------------------------------------------------------------ serialization

namespace detail {

inline std::string tuple_text(const std::vector<std::string>& parts) {
    if (parts.size() == 1) return parts.front();
    return "(" + joined(parts) + ")";
}

inline std::string real_text(cplx c) {
    if (c.imag() != 0.0) throw DomainError("complex parameters have no text form");
    return format_double(c.real());
}

inline std::string term_text(const SeriesTerm& t) {
    std::vector<std::string> a, b;
    for (const auto& x : t.alpha) {
        if (!x.is_exact() && x.value().imag() != 0.0) throw DomainError("complex exponents have no text form");
        a.push_back(x.is_exact() ? x.exact().to_string() : format_double(x.value().real()));
    }
    for (int x : t.beta) b.push_back(std::to_string(x));
    return "(" + real_text(t.c) + ", " + tuple_text(a) + ", " + tuple_text(b) + ")";
}

inline std::string numbers_text(const std::vector<double>& v) {
    std::vector<std::string> s;
    for (double x : v) s.push_back(format_double(x));
    return v.size() == 1 ? s.front() : "(" + joined(s) + ")";
}

}  // namespace detail

/// Canonical text; parse_document(serialize(d)) == d.
inline std::string serialize(const SpecDocument& d) {
    using namespace detail;
    std::ostringstream o;
    o << "id = " << d.id << "\n";
    o << "convention = " << to_string(d.convention) << "\n";
    o << "mode = " << to_string(d.mode) << "\n";
    if (d.expect) o << "expect = " << to_string(*d.expect) << "\n";
    if (!d.closed_form.empty()) o << "closed_form = " << d.closed_form << "\n";
    if (!d.f.empty()) o << "f = " << d.f << "\n";

    o << "\n[g]\npreset = " << d.g.preset << "\n";
    std::string carrier = d.g.preset;
    if (d.g.preset == "weighted") {
        o << "base = " << d.g.base << "\nweight = " << to_string(d.g.weight) << "\n";
        carrier = d.g.base;
    }
    if (carrier == "constant") o << "value = " << format_double(d.g.value) << "\n";
    if (carrier == "geometric") o << "ratio = " << format_double(d.g.ratio) << "\n";
    if (carrier == "gamma-product") {
        const auto& gp = d.g.product;
        o << "c = " << real_text(gp.c) << "\nz = " << real_text(gp.z) << "\n";
        if (!gp.w.empty()) o << "w = " << numbers_text(gp.w) << "\n";
        for (const auto& f : gp.factors)
            o << "factor = (" << numbers_text(f.a) << ", " << format_double(f.b) << ", " << f.power << ")\n";
    }

    o << "\n[transform]\n";
    if (!d.transform.entry.empty()) {
        o << "entry = " << d.transform.entry << "\n";
        for (const auto& [k, v] : d.transform.params) o << k << " = " << format_double(v) << "\n";
    } else {
        o << "kind = " << to_string(d.transform.kind) << "\n";
        for (const auto& t : d.transform.terms) o << "term = " << term_text(t) << "\n";
    }

    o << "\n[tolerances]\nlhs = " << format_double(d.tol.lhs) << "\nmatch = " << format_double(d.tol.match) << "\n";
    const auto& p = d.policy;
    o << "\n[policy]\nmax_terms = " << p.max_terms << "\ntail_threshold = " << format_double(p.tail_threshold)
      << "\ntail_run = " << p.tail_run << "\ndivergence_ratio = " << format_double(p.divergence_ratio)
      << "\ndivergence_window = " << p.divergence_window << "\ndivergence_warmup = " << p.divergence_warmup << "\n";
    if (d.mode == Mode::psi_kernel || !(d.psi == PsiOptions{}))
        o << "\n[psi]\ncase = " << to_string(d.psi.weight) << "\ns = " << format_double(d.psi.s)
          << "\nlifted = " << (d.psi.lifted ? "true" : "false") << "\nform = " << psi_form_name(d.psi.form) << "\n";
    if (!d.hints.empty()) {
        auto axis = [&](auto get) {
            std::vector<std::string> s;
            for (const auto& h : d.hints) {
                std::optional<double> v = get(h);
                s.push_back(v ? format_double(*v) : "none");
            }
            return tuple_text(s);
        };
        o << "\n[lhs]\n";
        o << "endpoint = " << axis([](const AxisHint& h) { return std::optional<double>(h.endpoint); }) << "\n";
        o << "phase = " << axis([](const AxisHint& h) { return h.phase; }) << "\n";
        o << "pole = " << axis([](const AxisHint& h) { return h.pole; }) << "\n";
        o << "decay = " << axis([](const AxisHint& h) { return h.decay; }) << "\n";
    }
    return o.str();
}

// ------------------------------------------------------------- to a spec

namespace detail {

inline std::string at_line(const SpecDocument& d, const std::string& key) {
    auto it = d.lines.find(key);
    return it == d.lines.end() ? std::string() : "line " + std::to_string(it->second) + ": ";
}

inline CoefficientFunction build_g(const SpecDocument& d, const std::string& preset, int k) {
    const std::string where = at_line(d, "g.preset");
    if (preset == "constant") return constant(d.g.value, k);
    if (preset == "geometric") return geometric(d.g.ratio, k);
    if (preset == "gamma-product") {
        const auto& gp = d.g.product;
        if (!gp.w.empty() && static_cast<int>(gp.w.size()) != k)
            throw ParamError(at_line(d, "g.w") + "w needs " + std::to_string(k) + " component(s)");
        for (const auto& f : gp.factors)
            if (static_cast<int>(f.a.size()) != k)
                throw ParamError(at_line(d, "g.factor") + "factor vector a needs " + std::to_string(k) + " component(s)");
        return gamma_product(gp, k);
    }
    throw UnknownPreset(where + "unknown g preset '" + preset + "'");
}

}  // namespace detail

/// Builds and validates the IdentitySpec a document describes.
inline IdentitySpec to_identity(const SpecDocument& d) {
    using detail::at_line;
    IdentitySpec s;
    s.id = d.id;
    s.convention = d.convention;
    s.mode = d.mode;
    s.tol = d.tol;
    s.policy = d.policy;
    s.psi = d.psi;

    if (!d.transform.entry.empty()) {
        const std::string where = at_line(d, "transform.entry");
        try {
            s.transform = catalog_lookup(d.transform.entry, d.transform.params);
        } catch (const UnknownEntry& e) {
            throw UnknownEntry(where + e.what() + "; expected one of " + detail::joined(catalog_names()));
        } catch (const Error& e) {
            throw ParamError(where + e.what());
        }
    } else {
        const auto& terms = d.transform.terms;
        TransformEntry e;
        e.name = "inline";
        e.kind = d.transform.kind;
        e.dimension = static_cast<int>(terms.front().alpha.size());
        for (const auto& t : terms)
            if (static_cast<int>(t.alpha.size()) != e.dimension)
                throw ParamError(at_line(d, "transform.term") + at_line(d, "transform.terms") +
                                 "all terms need the same number of components");
        e.H = finite_generalized(e.dimension, terms);
        s.transform = std::move(e);
    }
    const int k = s.transform.dimension;
    s.dimension = k;

    try {
        if (d.g.preset == "weighted") {
            if (k != 1) throw ParamError(at_line(d, "g.preset") + "weighted coefficients require k = 1");
            s.g = weighted(detail::build_g(d, d.g.base, 1), d.g.weight);
        } else {
            s.g = detail::build_g(d, d.g.preset, k);
        }
    } catch (const ParamError&) {
        throw;
    } catch (const UnknownPreset&) {
        throw;
    } catch (const Error& e) {
        throw ParamError(at_line(d, "g.preset") + e.what());
    }

    if (!d.closed_form.empty()) {
        s.closed_form = evaluate(*parse_expression(d.closed_form, 1, 1));
        s.closed_form_text = d.closed_form;
    }
    if (!d.f.empty()) {
        std::vector<std::string> vars{"x", "y", "z"};
        vars.resize(static_cast<std::size_t>(k));
        ExprPtr fx;
        try {
            fx = parse_expression(d.f, 1, 1, vars);
        } catch (const SyntaxError& e) {
            throw ParamError(at_line(d, "f") + "f uses a variable beyond dimension " + std::to_string(k) + ": " + e.what());
        }
        s.direct_f = FEvaluator([fx](std::span<const double> x) { return cplx(evaluate(*fx, x)); });
    }
    if (!d.hints.empty()) {
        if (static_cast<int>(d.hints.size()) != k)
            throw ParamError(at_line(d, "lhs") + "[lhs] needs one value per axis (" + std::to_string(k) + ")");
        for (const auto& h : d.hints) {
            quad::IntegrandHints q;
            q.endpoint_exponent = h.endpoint;
            q.phase_scale = h.phase;
            q.pole = h.pole;
            q.decay_scale = h.decay;
            s.lhs_hints.push_back(q);
        }
    }

    try {
        s.validate();
    } catch (const Error& e) {
        throw ParamError(at_line(d, "mode") + e.what());
    }
    return s;
}

inline IdentitySpec parse_spec(std::string_view text) { return to_identity(parse_document(text)); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read '" + path + "'");
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

// -------------------------------------------------------- spec equality

namespace detail {

/// Bitwise agreement of two callables on a fixed probe set; both throwing counts as agreement.
template <class F, class Arg>
bool same_on(const F& a, const F& b, const std::vector<Arg>& probes) {
    if (static_cast<bool>(a) != static_cast<bool>(b)) return false;
    if (!a) return true;
    for (const auto& p : probes) {
        std::optional<cplx> va, vb;
        try {
            va = a(p);
        } catch (const std::exception&) {
        }
        try {
            vb = b(p);
        } catch (const std::exception&) {
        }
        if (va.has_value() != vb.has_value()) return false;
        if (va && !(*va == *vb || (std::isnan(va->real()) && std::isnan(vb->real())))) return false;
    }
    return true;
}

inline bool same_hints(const std::vector<quad::IntegrandHints>& a, const std::vector<quad::IntegrandHints>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j].endpoint_exponent != b[j].endpoint_exponent || a[j].phase_scale != b[j].phase_scale ||
            a[j].pole != b[j].pole || a[j].decay_scale != b[j].decay_scale)
            return false;
    return true;
}

}  // namespace detail

/// Same identity: convention, mode, coefficient function, transform and psi
/// options. Coefficient functions compare by preset, product and values on a
/// probe grid; series compare on their first terms.
inline bool same_identity(const IdentitySpec& a, const IdentitySpec& b) {
    if (a.convention != b.convention || a.mode != b.mode || a.dimension != b.dimension || !(a.psi == b.psi))
        return false;
    if (a.g.dimension != b.g.dimension || a.g.preset != b.g.preset || a.g.product != b.g.product) return false;
    std::vector<Point> tp;
    std::vector<std::vector<double>> xp;
    for (double base : {0.37, 1.21, 2.5, -0.43}) {
        Point t;
        std::vector<double> x;
        for (int j = 0; j < a.dimension; ++j) {
            t.push_back(base + 0.1 * j);
            x.push_back(std::abs(base) + 0.1 * j);
        }
        tp.push_back(t);
        xp.push_back(x);
    }
    auto g_at = [](const CoefficientFunction& g) {
        return std::function<cplx(const Point&)>([g](const Point& t) { return eval_coefficient(g, t); });
    };
    if (!detail::same_on(g_at(a.g), g_at(b.g), tp)) return false;
    const auto& ta = a.transform;
    const auto& tb = b.transform;
    if (ta.name != tb.name || ta.params != tb.params || ta.dimension != tb.dimension || ta.kind != tb.kind ||
        ta.prefactor != tb.prefactor || ta.H.has_value() != tb.H.has_value() ||
        ta.schwinger.has_value() != tb.schwinger.has_value())
        return false;
    if (ta.H && take_terms(*ta.H, 8) != take_terms(*tb.H, 8)) return false;
    auto wrap = [](const PointFunction& f) {
        return std::function<cplx(const std::vector<double>&)>(
            f ? std::function<cplx(const std::vector<double>&)>([f](const std::vector<double>& x) { return f(x); })
              : nullptr);
    };
    return detail::same_on(wrap(ta.h), wrap(tb.h), xp);
}

/// same_identity plus id, tolerances, policy, closed form, direct f and hints.
inline bool structurally_equal(const IdentitySpec& a, const IdentitySpec& b) {
    if (!same_identity(a, b)) return false;
    if (a.id != b.id || !(a.tol == b.tol) || !(a.policy == b.policy) || a.closed_form != b.closed_form ||
        !detail::same_hints(a.lhs_hints, b.lhs_hints))
        return false;
    std::vector<std::vector<double>> xp;
    for (double base : {0.3, 1.7, 4.1}) xp.push_back(std::vector<double>(static_cast<std::size_t>(a.dimension), base));
    auto wrap = [](const std::optional<FEvaluator>& f) {
        return std::function<cplx(const std::vector<double>&)>(
            f ? std::function<cplx(const std::vector<double>&)>([f = *f](const std::vector<double>& x) { return f(x); })
              : nullptr);
    };
    return detail::same_on(wrap(a.direct_f), wrap(b.direct_f), xp);
}

}  // namespace opcalc::spec
