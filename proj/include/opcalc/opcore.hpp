#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "accel.hpp"
#include "errors.hpp"
#include "rational.hpp"
#include "specfun.hpp"

namespace opcalc {

using Point = std::vector<cplx>;

// ------------------------------------------------------------ series policy

enum class Classification { converged, formal_divergent, inconclusive };

inline std::string_view to_string(Classification c) {
    switch (c) {
        case Classification::converged: return "converged";
        case Classification::formal_divergent: return "formal-divergent";
        case Classification::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct TruncationPolicy {
    std::size_t max_terms = 10000;
    double tail_threshold = 1e-14;   // |t_n| <= threshold * |S_n| ...
    int tail_run = 5;                // ... for this many consecutive terms
    double divergence_ratio = 1.05;  // |t_{n+1} / t_n| above this ...
    int divergence_window = 20;      // ... for this many consecutive terms ...
    std::size_t divergence_warmup = 50;  // ... with n beyond this

    void validate() const {
        if (max_terms < 1) throw DomainError("max_terms must be at least 1");
        if (!(tail_threshold > 0.0)) throw DomainError("tail threshold must be positive");
        if (tail_run < 1 || divergence_window < 1) throw DomainError("policy windows must be positive");
        if (!(divergence_ratio > 0.0)) throw DomainError("divergence ratio must be positive");
    }

    friend bool operator==(const TruncationPolicy&, const TruncationPolicy&) = default;
};

struct SeriesSum {
    cplx value{};
    Classification classification = Classification::inconclusive;
    std::size_t terms_used = 0;
    double last_term = 0.0;  // magnitude of the last term added
    double magnitude = 0.0;  // sum of term magnitudes, for cancellation checks
    bool accelerated = false;  // value taken from the epsilon algorithm
};

/// Term n of a series; nullopt ends a finite series.
using TermGenerator = std::function<std::optional<cplx>(std::size_t)>;

namespace detail {

inline constexpr std::size_t wynn_window = 40;
inline constexpr int leibniz_run = 20;

inline cplx wynn_tail(const std::deque<cplx>& partial) {
    std::vector<cplx> v(partial.begin(), partial.end());
    return wynn_epsilon<cplx>(v);
}

}  // namespace detail

/// Ordered partial sums under a truncation policy.
///  - converged: the tail criterion held, or the series is finite, or the
///    terms alternate with decreasing magnitude (Leibniz) and the epsilon
///    extrapolation of the partial sums has settled;
///  - formal-divergent: sustained term growth after the warm-up; the value is
///    the epsilon-regularized limit of the last partial sums;
///  - inconclusive: max_terms reached, value is the last partial sum.
inline SeriesSum sum_series(const TermGenerator& term, const TruncationPolicy& policy = {}) {
    policy.validate();
    SeriesSum out;
    KahanSum<cplx> acc;
    std::deque<cplx> partial;
    double abs_total = 0.0;
    double prev_mag = -1.0;
    cplx prev_term{};
    int tail_hits = 0, grow_run = 0, alt_run = 0, wynn_hits = 0;
    std::deque<double> alt_mags;  // magnitudes across the current alternating run
    std::optional<cplx> wynn_prev;

    for (std::size_t n = 0; n < policy.max_terms; ++n) {
        auto t = term(n);
        if (!t) {
            out.value = acc.value();
            out.classification = Classification::converged;
            out.terms_used = n;
            out.magnitude = abs_total;
            return out;
        }
        double mag = std::abs(*t);
        if (!std::isfinite(mag)) {
            // Terms left the representable range: unbounded growth.
            out.value = partial.empty() ? cplx{} : detail::wynn_tail(partial);
            out.classification = grow_run > 0 ? Classification::formal_divergent : Classification::inconclusive;
            out.terms_used = n;
            out.last_term = mag;
            out.magnitude = abs_total;
            out.accelerated = true;
            return out;
        }
        acc.add(*t);
        abs_total += mag;
        cplx s = acc.value();
        partial.push_back(s);
        if (partial.size() > detail::wynn_window) partial.pop_front();
        out.terms_used = n + 1;
        out.last_term = mag;
        out.magnitude = abs_total;

        if (mag <= policy.tail_threshold * std::abs(s)) {
            if (++tail_hits >= policy.tail_run) {
                out.value = s;
                out.classification = Classification::converged;
                return out;
            }
        } else {
            tail_hits = 0;
        }

        if (prev_mag > 0.0 && mag > policy.divergence_ratio * prev_mag)
            ++grow_run;
        else
            grow_run = 0;
        if (n > policy.divergence_warmup && grow_run >= policy.divergence_window) {
            out.value = detail::wynn_tail(partial);
            out.classification = Classification::formal_divergent;
            out.accelerated = true;
            return out;
        }

        // Leibniz: sign alternation with strictly decreasing magnitude.
        bool alternating = prev_mag > 0.0 && mag < prev_mag && (*t * std::conj(prev_term)).real() < 0.0 &&
                           std::abs((*t * std::conj(prev_term)).imag()) <= 1e-12 * mag * prev_mag;
        if (alternating) {
            ++alt_run;
            alt_mags.push_back(mag);
            if (alt_mags.size() > static_cast<std::size_t>(detail::leibniz_run)) alt_mags.pop_front();
        } else {
            alt_run = 0;
            alt_mags.clear();
            wynn_hits = 0;
            wynn_prev.reset();
        }
        // The magnitude must also be visibly shrinking across the run, which
        // excludes alternating terms that level off at a nonzero size.
        if (alt_run >= detail::leibniz_run && alt_mags.back() <= 0.9 * alt_mags.front()) {
            cplx w = detail::wynn_tail(partial);
            if (wynn_prev && std::abs(w - *wynn_prev) <= 10.0 * policy.tail_threshold * std::abs(w)) {
                if (++wynn_hits >= policy.tail_run) {
                    out.value = w;
                    out.classification = Classification::converged;
                    out.accelerated = true;
                    return out;
                }
            } else {
                wynn_hits = 0;
            }
            wynn_prev = w;
        }
        prev_mag = mag;
        prev_term = *t;
    }
    out.value = acc.value();
    out.classification = Classification::inconclusive;
    return out;
}

// ------------------------------------------------------ coefficient functions

enum class Preset { constant, geometric, gamma_product, weighted, custom };

inline std::string_view to_string(Preset p) {
    switch (p) {
        case Preset::constant: return "constant";
        case Preset::geometric: return "geometric";
        case Preset::gamma_product: return "gamma-product";
        case Preset::weighted: return "weighted";
        case Preset::custom: return "custom";
    }
    return "custom";
}

/// g is undefined where <a, t> + b is a nonpositive integer.
struct PoleCondition {
    std::vector<double> a;
    cplx b;
    std::string label;

    cplx argument(std::span<const cplx> t) const {
        cplx u = b;
        for (std::size_t j = 0; j < a.size(); ++j) u += a[j] * t[j];
        return u;
    }
};

/// Gamma(<a, t> + b)^power with power = +1 or -1.
struct GammaFactor {
    std::vector<double> a;
    double b = 0.0;
    int power = 1;

    friend bool operator==(const GammaFactor&, const GammaFactor&) = default;
};

/// g(t) = c * z^<w, t> * prod Gamma(<a_i, t> + b_i)^(power_i).
struct GammaProduct {
    cplx c = 1.0;
    cplx z = 1.0;
    std::vector<double> w;  // empty means zero
    std::vector<GammaFactor> factors;

    friend bool operator==(const GammaProduct&, const GammaProduct&) = default;
};

struct CoefficientFunction {
    using Evaluator = std::function<cplx(std::span<const cplx>)>;
    /// Mixed partial of order beta; only called with |beta| <= analytic_order.
    /// Returns nullopt to request the numeric fallback at that point.
    using Derivative = std::function<std::optional<cplx>(std::span<const int>, std::span<const cplx>)>;

    int dimension = 1;
    Evaluator evaluator;
    Derivative derivative;
    int analytic_order = 0;
    std::vector<PoleCondition> poles;
    std::string decay;
    Preset preset = Preset::custom;
    /// Set by the constant, geometric and gamma-product presets, which are
    /// all gamma products; lets callers derive closed forms of f.
    std::optional<GammaProduct> product;
};

namespace detail {

inline void check_dimension(const CoefficientFunction& g, std::size_t n) {
    if (static_cast<int>(n) != g.dimension)
        throw DimensionError("coefficient function has dimension " + std::to_string(g.dimension) +
                             ", point has " + std::to_string(n));
}

inline void check_poles(const CoefficientFunction& g, std::span<const cplx> t) {
    for (const auto& p : g.poles) {
        cplx u = p.argument(t);
        if (specfun::detail::near_nonpositive_integer(u))
            throw PoleError("pole of " + p.label + ": argument " + Exponent(u).to_string() +
                            " is a nonpositive integer");
    }
}

inline std::string affine_label(const std::vector<double>& a, cplx b) {
    std::string s;
    const char* names = "mnlpqr";
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] == 0.0) continue;
        if (!s.empty()) s += "+";
        if (a[j] != 1.0) s += format_double(a[j]) + "*";
        s += j < 6 ? std::string(1, names[j]) : "t" + std::to_string(j);
    }
    if (b != cplx{} || s.empty()) s += (s.empty() ? "" : "+") + Exponent(b).to_string();
    return s;
}

}  // namespace detail

inline CoefficientFunction constant(cplx c, int k = 1) {
    if (k < 1) throw DimensionError("dimension must be positive");
    CoefficientFunction g;
    g.dimension = k;
    g.preset = Preset::constant;
    g.evaluator = [c](std::span<const cplx>) { return c; };
    g.analytic_order = std::numeric_limits<int>::max();
    g.derivative = [c](std::span<const int> beta, std::span<const cplx>) -> std::optional<cplx> {
        for (int b : beta)
            if (b != 0) return cplx{};
        return c;
    };
    g.decay = "constant";
    g.product = GammaProduct{c, 1.0, {}, {}};
    return g;
}

/// g(t) = r^(t_1 + ... + t_k).
inline CoefficientFunction geometric(cplx r, int k = 1) {
    if (k < 1) throw DimensionError("dimension must be positive");
    if (r == cplx{}) throw DomainError("geometric ratio must be nonzero");
    CoefficientFunction g;
    g.dimension = k;
    g.preset = Preset::geometric;
    const bool real = r.imag() == 0.0 && r.real() > 0.0;
    auto power = [r, real](std::span<const cplx> t) -> cplx {
        cplx s{};
        for (cplx x : t) s += x;
        if (real && s.imag() == 0.0) return std::pow(r.real(), s.real());
        return std::exp(s * std::log(r));
    };
    g.evaluator = power;
    const cplx lr = std::log(r);
    g.analytic_order = std::numeric_limits<int>::max();
    g.derivative = [power, lr](std::span<const int> beta, std::span<const cplx> t) -> std::optional<cplx> {
        int m = 0;
        for (int b : beta) m += b;
        return power(t) * std::pow(lr, m);
    };
    g.decay = "geometric";
    g.product = GammaProduct{1.0, r, std::vector<double>(k, 1.0), {}};
    return g;
}

namespace detail {

inline cplx dot_plus(const std::vector<double>& a, std::span<const cplx> t, double b) {
    cplx u = b;
    for (std::size_t j = 0; j < a.size(); ++j) u += a[j] * t[j];
    return u;
}

inline cplx eval_gamma_product(const GammaProduct& gp, std::span<const cplx> t) {
    cplx wt{};
    for (std::size_t j = 0; j < gp.w.size(); ++j) wt += gp.w[j] * t[j];
    cplx zpow = 1.0;
    if (gp.z != cplx(1.0) && wt != cplx{}) {
        if (gp.z.imag() == 0.0 && gp.z.real() > 0.0 && wt.imag() == 0.0)
            zpow = std::pow(gp.z.real(), wt.real());
        else
            zpow = std::exp(wt * std::log(gp.z));
    }
    try {
        cplx v = gp.c * zpow;
        for (const auto& f : gp.factors) {
            cplx u = dot_plus(f.a, t, f.b);
            v *= f.power > 0 ? specfun::gamma(u) : specfun::rgamma(u);
        }
        if (std::isfinite(std::abs(v))) return v;
    } catch (const OverflowError&) {
    }
    // Individual factors overflow while the product may not: log route.
    cplx lg = std::log(gp.c * zpow);
    for (const auto& f : gp.factors) {
        cplx u = dot_plus(f.a, t, f.b);
        if (f.power < 0 && specfun::detail::near_nonpositive_integer(u)) return 0.0;
        lg += static_cast<double>(f.power) * specfun::log_gamma(u);
    }
    return std::exp(lg);
}

}  // namespace detail

/// Analytic partials up to order 2 through digamma and trigamma. Where a
/// denominator gamma sits on a pole the value vanishes and the numeric
/// fallback is requested.
inline CoefficientFunction gamma_product(const GammaProduct& gp, int k) {
    if (k < 1) throw DimensionError("dimension must be positive");
    if (!gp.w.empty() && static_cast<int>(gp.w.size()) != k) throw DimensionError("weight vector length must equal k");
    for (const auto& f : gp.factors) {
        if (static_cast<int>(f.a.size()) != k) throw DimensionError("gamma factor length must equal k");
        if (f.power != 1 && f.power != -1) throw DomainError("gamma factor power must be +1 or -1");
    }
    CoefficientFunction g;
    g.dimension = k;
    g.preset = Preset::gamma_product;
    for (const auto& f : gp.factors)
        if (f.power > 0) g.poles.push_back({f.a, f.b, "Gamma(" + detail::affine_label(f.a, f.b) + ")"});
    g.evaluator = [gp](std::span<const cplx> t) { return detail::eval_gamma_product(gp, t); };
    g.analytic_order = 2;
    g.derivative = [gp, k](std::span<const int> beta, std::span<const cplx> t) -> std::optional<cplx> {
        cplx v = detail::eval_gamma_product(gp, t);
        if (v == cplx{}) return std::nullopt;
        for (const auto& f : gp.factors)
            if (f.power < 0 && specfun::detail::near_nonpositive_integer(detail::dot_plus(f.a, t, f.b)))
                return std::nullopt;
        const cplx lz = gp.z == cplx(1.0) ? cplx{} : std::log(gp.z);
        // dL/dt_j and d2L/dt_i dt_j of L = log g.
        auto d1 = [&](int j) {
            cplx s = gp.w.empty() ? cplx{} : gp.w[j] * lz;
            for (const auto& f : gp.factors)
                if (f.a[j] != 0.0) s += static_cast<double>(f.power) * f.a[j] * specfun::digamma(detail::dot_plus(f.a, t, f.b));
            return s;
        };
        auto d2 = [&](int i, int j) {
            cplx s{};
            for (const auto& f : gp.factors)
                if (f.a[i] != 0.0 && f.a[j] != 0.0)
                    s += static_cast<double>(f.power) * f.a[i] * f.a[j] * specfun::trigamma(detail::dot_plus(f.a, t, f.b));
            return s;
        };
        std::vector<int> axes;
        for (int j = 0; j < k; ++j)
            for (int r = 0; r < beta[j]; ++r) axes.push_back(j);
        if (axes.empty()) return v;
        if (axes.size() == 1) return v * d1(axes[0]);
        int i = axes[0], j = axes[1];
        return v * (d1(i) * d1(j) + d2(i, j));
    };
    g.decay = "gamma-product";
    g.product = gp;
    return g;
}

enum class Weight { gamma, gamma_cos };

inline std::string_view to_string(Weight w) { return w == Weight::gamma ? "gamma" : "gamma-cos"; }

/// g(t) = Gamma(t + 1) * base(t), optionally times cos(pi t); k = 1.
inline CoefficientFunction weighted(const CoefficientFunction& base, Weight weight) {
    if (base.dimension != 1) throw DimensionError("weighted coefficients require k = 1");
    CoefficientFunction g;
    g.dimension = 1;
    g.preset = Preset::weighted;
    g.poles = base.poles;
    g.poles.push_back({{1.0}, 1.0, "Gamma(n+1)"});
    auto inner = base.evaluator;
    g.evaluator = [inner, weight](std::span<const cplx> t) {
        cplx v = specfun::gamma(t[0] + 1.0) * inner(t);
        if (weight == Weight::gamma_cos) v *= specfun::cos_pi(t[0]);
        return v;
    };
    g.decay = "weighted " + std::string(to_string(weight));
    return g;
}

inline CoefficientFunction custom(int k, CoefficientFunction::Evaluator f, std::vector<PoleCondition> poles = {},
                                  CoefficientFunction::Derivative derivative = {}, int analytic_order = 0) {
    if (k < 1) throw DimensionError("dimension must be positive");
    CoefficientFunction g;
    g.dimension = k;
    g.preset = Preset::custom;
    g.evaluator = std::move(f);
    g.poles = std::move(poles);
    g.derivative = std::move(derivative);
    g.analytic_order = g.derivative ? analytic_order : 0;
    return g;
}

/// t -> g(t + shift); poles and analytic derivatives move along.
inline CoefficientFunction shifted(const CoefficientFunction& g, const Point& shift) {
    detail::check_dimension(g, shift.size());
    CoefficientFunction s = g;
    s.preset = Preset::custom;
    auto move = [shift](std::span<const cplx> t) {
        Point u(t.begin(), t.end());
        for (std::size_t j = 0; j < u.size(); ++j) u[j] += shift[j];
        return u;
    };
    auto f = g.evaluator;
    s.evaluator = [f, move](std::span<const cplx> t) { return f(move(t)); };
    if (g.derivative) {
        auto d = g.derivative;
        s.derivative = [d, move](std::span<const int> b, std::span<const cplx> t) { return d(b, move(t)); };
    }
    for (auto& p : s.poles) p.b = p.argument(shift);
    return s;
}

inline cplx eval_coefficient(const CoefficientFunction& g, std::span<const cplx> t) {
    detail::check_dimension(g, t.size());
    detail::check_poles(g, t);
    return g.evaluator(t);
}

inline cplx eval_coefficient(const CoefficientFunction& g, const Point& t) {
    return eval_coefficient(g, std::span<const cplx>(t));
}

/// Tensor central differences with shared step, Richardson in h^2 over four
/// levels. Initial step 1e-3 (1 + |t|), widened 4x per extra derivative order
/// so that rounding noise stays below the stabilization threshold.
inline cplx numeric_derivative(const CoefficientFunction& g, std::span<const int> beta, std::span<const cplx> t) {
    detail::check_dimension(g, t.size());
    if (beta.size() != t.size()) throw DimensionError("derivative order length must equal k");
    int total = 0;
    double tmax = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (beta[j] < 0) throw DomainError("derivative orders must be nonnegative");
        total += beta[j];
        tmax = std::max(tmax, std::abs(t[j]));
    }
    cplx center = eval_coefficient(g, t);
    if (total == 0) return center;

    const double h0 = 1e-3 * (1.0 + tmax) * std::pow(4.0, total - 1);
    auto difference = [&](double h) {
        // Stencil per axis: sum_j (-1)^j C(m, j) g(t + (m/2 - j) h).
        std::vector<int> idx(beta.size(), 0);
        KahanSum<cplx> sum;
        Point p(t.begin(), t.end());
        for (;;) {
            double coef = 1.0;
            for (std::size_t a = 0; a < beta.size(); ++a) {
                int m = beta[a], j = idx[a];
                coef *= (j % 2 ? -1.0 : 1.0) * std::round(std::exp(specfun::log_gamma(m + 1.0) -
                                                                   specfun::log_gamma(j + 1.0) -
                                                                   specfun::log_gamma(m - j + 1.0)));
                p[a] = t[a] + (0.5 * m - j) * h;
            }
            sum.add(coef * eval_coefficient(g, p));
            std::size_t a = 0;
            while (a < beta.size() && ++idx[a] > beta[a]) idx[a++] = 0;
            if (a == beta.size()) break;
        }
        return sum.value() / std::pow(h, total);
    };

    constexpr int levels = 4;
    cplx R[levels][levels];
    for (int i = 0; i < levels; ++i) {
        R[i][0] = difference(h0 / std::ldexp(1.0, i));
        for (int j = 1; j <= i; ++j) {
            double f = std::ldexp(1.0, 2 * j) - 1.0;
            R[i][j] = R[i][j - 1] + (R[i][j - 1] - R[i - 1][j - 1]) / f;
        }
    }
    cplx best = R[levels - 1][levels - 1];
    double change = std::abs(best - R[levels - 2][levels - 2]);
    if (!(change <= 1e-8 * std::max(std::abs(best), std::abs(center))))
        throw NumericDerivativeError("Richardson extrapolation did not stabilize (change " + format_double(change) +
                                     ")");
    return best;
}

inline cplx diff_coefficient(const CoefficientFunction& g, std::span<const int> beta, std::span<const cplx> t) {
    detail::check_dimension(g, t.size());
    if (beta.size() != t.size()) throw DimensionError("derivative order length must equal k");
    int total = 0;
    for (int b : beta) {
        if (b < 0) throw DomainError("derivative orders must be nonnegative");
        total += b;
    }
    if (total == 0) return eval_coefficient(g, t);
    detail::check_poles(g, t);
    if (g.derivative && total <= g.analytic_order)
        if (auto v = g.derivative(beta, t)) return *v;
    return numeric_derivative(g, beta, t);
}

inline cplx diff_coefficient(const CoefficientFunction& g, const std::vector<int>& beta, const Point& t) {
    return diff_coefficient(g, std::span<const int>(beta), std::span<const cplx>(t));
}

// ------------------------------------------------------------------ operators

/// c * d^beta e^{alpha . d}; applied to g it yields c * g^(beta)(alpha).
struct OperatorTerm {
    cplx c;
    std::vector<Exponent> alpha;
    std::vector<int> beta;

    friend bool operator==(const OperatorTerm&, const OperatorTerm&) = default;
};

struct OperatorSeries {
    int dimension = 1;
    std::function<std::optional<OperatorTerm>(std::size_t)> term;  // nullopt past the end
    std::optional<std::size_t> length;                              // set for finite series
    std::string note;
};

inline OperatorSeries finite_series(int k, std::vector<OperatorTerm> terms, std::string note = {}) {
    OperatorSeries s;
    s.dimension = k;
    s.length = terms.size();
    s.note = std::move(note);
    s.term = [terms = std::move(terms)](std::size_t n) -> std::optional<OperatorTerm> {
        if (n >= terms.size()) return std::nullopt;
        return terms[n];
    };
    return s;
}

inline Point shift_point(const std::vector<Exponent>& alpha) {
    Point p;
    p.reserve(alpha.size());
    for (const auto& a : alpha) p.push_back(a.value());
    return p;
}

/// A zero coefficient contributes exactly zero without touching g.
inline cplx apply_operator_term(const OperatorTerm& term, const CoefficientFunction& g) {
    if (term.alpha.size() != term.beta.size()) throw DimensionError("operator term shift/order length mismatch");
    detail::check_dimension(g, term.alpha.size());
    if (term.c == cplx{}) return 0.0;
    Point p = shift_point(term.alpha);
    return term.c * diff_coefficient(g, std::span<const int>(term.beta), std::span<const cplx>(p));
}

/// Exhausting max_terms is reported as classification inconclusive rather than thrown.
inline SeriesSum apply_operator_series(const OperatorSeries& series, const CoefficientFunction& g,
                                       const TruncationPolicy& policy = {}) {
    if (series.dimension != g.dimension)
        throw DimensionError("operator series has dimension " + std::to_string(series.dimension) +
                             ", coefficient function " + std::to_string(g.dimension));
    TermGenerator gen = [&](std::size_t n) -> std::optional<cplx> {
        auto t = series.term(n);
        if (!t) return std::nullopt;
        try {
            return apply_operator_term(*t, g);
        } catch (const PoleError& e) {
            throw PoleError("term " + std::to_string(n) + ": " + e.what());
        }
    };
    return sum_series(gen, policy);
}

// --------------------------------------------------------- series conventions

enum class Convention { ramanujan, hardy, carr, even_cosine };

inline std::string_view to_string(Convention c) {
    switch (c) {
        case Convention::ramanujan: return "ramanujan";
        case Convention::hardy: return "hardy";
        case Convention::carr: return "carr";
        case Convention::even_cosine: return "even-cosine";
    }
    return "ramanujan";
}

inline std::optional<Convention> parse_convention(std::string_view s) {
    for (auto c : {Convention::ramanujan, Convention::hardy, Convention::carr, Convention::even_cosine})
        if (s == to_string(c)) return c;
    return std::nullopt;
}

/// Coefficient of x^n: ramanujan (-1)^n/n!, hardy (-1)^n, carr 1, even-cosine
/// (-1)^(n/2)/n! for even n and 0 for odd n.
inline double convention_coefficient(Convention c, std::size_t n) {
    const double sign = n % 2 ? -1.0 : 1.0;
    switch (c) {
        case Convention::ramanujan: return sign * specfun::rgamma(static_cast<double>(n) + 1.0);
        case Convention::hardy: return sign;
        case Convention::carr: return 1.0;
        case Convention::even_cosine:
            if (n % 2) return 0.0;
            return ((n / 2) % 2 ? -1.0 : 1.0) * specfun::rgamma(static_cast<double>(n) + 1.0);
    }
    return 0.0;
}

namespace detail {

/// Sum over multi-indices of total degree d (lexicographic order) of
/// prod phi_{n_i} x_i^{n_i} g(n).
inline std::pair<cplx, double> shell(Convention conv, const CoefficientFunction& g, const std::vector<double>& x,
                                     std::size_t d) {
    const std::size_t k = x.size();
    std::vector<std::size_t> n(k, 0);
    KahanSum<cplx> sum;
    double mag = 0.0;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t axis, std::size_t left) {
        if (axis + 1 == k) {
            n[axis] = left;
            double w = 1.0;
            for (std::size_t j = 0; j < k; ++j) {
                w *= convention_coefficient(conv, n[j]);
                if (w == 0.0) return;
                w *= n[j] == 0 ? 1.0 : std::pow(x[j], static_cast<double>(n[j]));
                if (w == 0.0) return;
            }
            Point p(n.begin(), n.end());
            cplx v = w * eval_coefficient(g, p);
            sum.add(v);
            mag += std::abs(v);
            return;
        }
        for (std::size_t m = 0; m <= left; ++m) {
            n[axis] = m;
            rec(axis + 1, left - m);
        }
    };
    rec(0, d);
    return {sum.value(), mag};
}

}  // namespace detail

/// Radius along the ray t * x: from shell magnitudes S_d at d1 < d2 near the
/// probe depth, (S_d1 / S_d2)^(1/(d2 - d1)). Infinite when the shells vanish.
inline double estimate_radius(Convention conv, const CoefficientFunction& g, const std::vector<double>& x,
                              std::size_t probe = 0) {
    detail::check_dimension(g, x.size());
    bool zero = std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
    if (zero) return std::numeric_limits<double>::infinity();
    if (probe == 0) probe = x.size() >= 3 ? 60 : 200;
    std::vector<double> mags(probe + 1, 0.0);
    for (std::size_t d = 0; d <= probe; ++d) mags[d] = detail::shell(conv, g, x, d).second;
    std::optional<std::size_t> d2;
    for (std::size_t d = probe; d > probe / 2; --d)
        if (mags[d] > 0.0 && std::isfinite(mags[d])) {
            d2 = d;
            break;
        }
    if (!d2) {
        for (std::size_t d = probe / 2 + 1; d <= probe; ++d)
            if (!std::isfinite(mags[d])) return 0.0;
        return std::numeric_limits<double>::infinity();
    }
    std::size_t d1 = *d2 / 2;
    while (d1 < *d2 && !(mags[d1] > 0.0)) ++d1;
    if (d1 == *d2) return std::numeric_limits<double>::infinity();
    return std::pow(mags[d1] / mags[*d2], 1.0 / static_cast<double>(*d2 - d1));
}

/// f(x) = sum_n prod phi_{n_i} g(n) x^n by total-degree shells. Throws
/// PolicyExhausted unless the sum converges, and ConvergenceError when the
/// sum is dominated by cancellation.
inline SeriesSum series_function_eval(Convention conv, const CoefficientFunction& g, const std::vector<double>& x,
                                      const TruncationPolicy& policy = {}) {
    detail::check_dimension(g, x.size());
    for (double v : x)
        if (!(v >= 0.0)) throw DomainError("series_function_eval requires x >= 0");
    double cancel = 0.0;
    TermGenerator gen = [&](std::size_t d) -> std::optional<cplx> {
        auto [v, m] = detail::shell(conv, g, x, d);
        cancel += m;
        return v;
    };
    SeriesSum s = sum_series(gen, policy);
    if (s.classification != Classification::converged)
        throw PolicyExhausted("series for f is " + std::string(to_string(s.classification)) + " after " +
                              std::to_string(s.terms_used) + " terms");
    if (cancel * 1e-16 > 1e-10 * std::abs(s.value) && cancel > 0.0)
        throw ConvergenceError("series for f lost significance to cancellation");
    return s;
}

// ---------------------------------------------------------- closed forms of f

using FEvaluator = std::function<cplx(std::span<const double>)>;

/// n -> g(c_1 n_1, ..., c_k n_k).
inline GammaProduct rescaled(const GammaProduct& gp, const std::vector<double>& c) {
    GammaProduct r = gp;
    for (std::size_t j = 0; j < r.w.size(); ++j) r.w[j] *= c.at(j);
    for (auto& f : r.factors)
        for (std::size_t j = 0; j < f.a.size(); ++j) f.a[j] *= c.at(j);
    return r;
}

namespace detail {

/// Splits a gamma product into a constant, per-axis ratios z^{w_j}, and the
/// factors that depend on n.
struct ProductShape {
    cplx constant;
    std::vector<cplx> zeta;
    std::vector<GammaFactor> varying;
};

inline ProductShape shape_of(const GammaProduct& gp, int k) {
    ProductShape s{gp.c, std::vector<cplx>(k, 1.0), {}};
    for (int j = 0; j < k && !gp.w.empty(); ++j)
        if (gp.w[j] != 0.0) s.zeta[j] = std::pow(gp.z, gp.w[j]);
    for (const auto& f : gp.factors) {
        bool flat = std::all_of(f.a.begin(), f.a.end(), [](double a) { return a == 0.0; });
        if (flat)
            s.constant *= f.power > 0 ? specfun::gamma(f.b) : specfun::rgamma(f.b);
        else
            s.varying.push_back(f);
    }
    return s;
}

}  // namespace detail

/// Closed form of f(x) = sum phi_n g(n) x^n for the shapes the presets produce:
///   ramanujan, no varying factor:      C exp(-sum zeta_j x_j)
///   ramanujan, Gamma(n_1+..+n_k + b):  C Gamma(b) (1 + sum zeta_j x_j)^(-b)
///   hardy / carr / even-cosine (k=1):  C/(1 + zeta x), C/(1 - zeta x), C cos(zeta x)
inline std::optional<FEvaluator> closed_form_f(Convention conv, const GammaProduct& gp, int k) {
    auto sh = detail::shape_of(gp, k);
    auto lin = [zeta = sh.zeta](std::span<const double> x) {
        cplx s{};
        for (std::size_t j = 0; j < x.size(); ++j) s += zeta[j] * x[j];
        return s;
    };
    const cplx C = sh.constant;
    if (conv == Convention::ramanujan) {
        if (sh.varying.empty()) return FEvaluator([C, lin](std::span<const double> x) { return C * std::exp(-lin(x)); });
        if (sh.varying.size() == 1 && sh.varying[0].power > 0 &&
            std::all_of(sh.varying[0].a.begin(), sh.varying[0].a.end(), [](double a) { return a == 1.0; })) {
            double b = sh.varying[0].b;
            cplx Cb = C * specfun::gamma(b);
            return FEvaluator([Cb, b, lin](std::span<const double> x) { return Cb * std::pow(1.0 + lin(x), -b); });
        }
        return std::nullopt;
    }
    if (k != 1 || !sh.varying.empty()) return std::nullopt;
    const cplx z = sh.zeta[0];
    switch (conv) {
        case Convention::hardy: return FEvaluator([C, z](std::span<const double> x) { return C / (1.0 + z * x[0]); });
        case Convention::carr: return FEvaluator([C, z](std::span<const double> x) { return C / (1.0 - z * x[0]); });
        case Convention::even_cosine:
            return FEvaluator([C, z](std::span<const double> x) { return C * std::cos(z * x[0]); });
        default: return std::nullopt;
    }
}

inline std::optional<FEvaluator> closed_form_f(Convention conv, const CoefficientFunction& g) {
    if (!g.product) return std::nullopt;
    return closed_form_f(conv, *g.product, g.dimension);
}

/// Closed form of F(x) = sum_{m>=1} f(m x) (ramanujan, k = 1) when f is
/// C exp(-zeta x): F = C / (e^{zeta x} - 1).
inline std::optional<FEvaluator> closed_form_lifted_f(const CoefficientFunction& g) {
    if (!g.product || g.dimension != 1) return std::nullopt;
    auto sh = detail::shape_of(*g.product, 1);
    if (!sh.varying.empty()) return std::nullopt;
    const cplx C = sh.constant, z = sh.zeta[0];
    if (z.imag() == 0.0)
        return FEvaluator([C, zr = z.real()](std::span<const double> x) { return C / std::expm1(zr * x[0]); });
    return FEvaluator([C, z](std::span<const double> x) { return C / (std::exp(z * x[0]) - 1.0); });
}

}  // namespace opcalc
