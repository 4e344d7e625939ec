#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "opcore.hpp"
#include "quad.hpp"
#include "rational.hpp"
#include "specfun.hpp"

namespace opcalc {

// ------------------------------------------------------- generalized series

/// c * prod p_i^{alpha_i} (ln p_i)^{beta_i}
struct SeriesTerm {
    cplx c;
    std::vector<Exponent> alpha;
    std::vector<int> beta;

    friend bool operator==(const SeriesTerm&, const SeriesTerm&) = default;
};

struct GeneralizedSeries {
    int dimension = 1;
    std::function<std::optional<SeriesTerm>(std::size_t)> term;  // nullopt past the end
    std::optional<std::size_t> length;                             // set for finite series
    std::string region;
};

inline GeneralizedSeries finite_generalized(int k, std::vector<SeriesTerm> terms, std::string region = {}) {
    for (const auto& t : terms)
        if (static_cast<int>(t.alpha.size()) != k || static_cast<int>(t.beta.size()) != k)
            throw DimensionError("series term length does not match dimension " + std::to_string(k));
    GeneralizedSeries s;
    s.dimension = k;
    s.length = terms.size();
    s.region = std::move(region);
    s.term = [terms = std::move(terms)](std::size_t n) -> std::optional<SeriesTerm> {
        if (n >= terms.size()) return std::nullopt;
        return terms[n];
    };
    return s;
}

inline GeneralizedSeries countable_series(int k, std::function<SeriesTerm(std::size_t)> gen, std::string region = {}) {
    GeneralizedSeries s;
    s.dimension = k;
    s.region = std::move(region);
    s.term = [gen = std::move(gen)](std::size_t n) -> std::optional<SeriesTerm> { return gen(n); };
    return s;
}

/// First n terms (fewer if the series is finite and shorter).
inline std::vector<SeriesTerm> take_terms(const GeneralizedSeries& H, std::size_t n) {
    std::vector<SeriesTerm> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto t = H.term(i);
        if (!t) break;
        out.push_back(std::move(*t));
    }
    return out;
}

inline cplx evaluate_term(const SeriesTerm& t, std::span<const double> p) {
    if (t.alpha.size() != p.size()) throw DimensionError("series term evaluated at a point of the wrong dimension");
    cplx v = t.c;
    if (v == cplx{}) return v;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (!(p[j] > 0.0)) throw DomainError("generalized series requires p > 0");
        double lp = std::log(p[j]);
        v *= std::exp(t.alpha[j].value() * lp);
        for (int b = 0; b < t.beta[j]; ++b) v *= lp;
    }
    return v;
}

/// Numeric value of H(p) by summation under the policy.
inline SeriesSum evaluate_series(const GeneralizedSeries& H, std::span<const double> p,
                                 const TruncationPolicy& policy = {}) {
    if (static_cast<int>(p.size()) != H.dimension) throw DimensionError("evaluation point has the wrong dimension");
    TermGenerator gen = [&](std::size_t n) -> std::optional<cplx> {
        auto t = H.term(n);
        if (!t) return std::nullopt;
        return evaluate_term(*t, p);
    };
    return sum_series(gen, policy);
}

namespace detail {

/// Thread-safe memo of a sequence defined by a forward recurrence.
template <class T>
class LazySequence {
public:
    using Next = std::function<T(const std::vector<T>&)>;
    explicit LazySequence(Next next) : state_(std::make_shared<State>()) { state_->next = std::move(next); }

    T operator()(std::size_t n) const {
        std::lock_guard lock(state_->mutex);
        while (state_->values.size() <= n) state_->values.push_back(state_->next(state_->values));
        return state_->values[n];
    }

private:
    struct State {
        std::mutex mutex;
        std::vector<T> values;
        Next next;
    };
    std::shared_ptr<State> state_;
};

/// Small-denominator rationals stay exact so shifts like (n-1)/2 compare
/// exactly. Values within a few ulps of p/q (e.g. 1.2 + 1.1 - 1.5) snap to it.
inline Exponent exponent_of(double x) {
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
    for (std::int64_t q = 1; q <= 64; ++q) {
        double nq = std::round(x * static_cast<double>(q));
        if (std::abs(nq) > 1e15) break;
        Rational r(static_cast<std::int64_t>(nq), q);
        if (std::abs(r.to_double() - x) <= slack) return r;
    }
    return Exponent(x);
}

/// a^n / n! without intermediate overflow; exact sign for real a.
inline cplx power_over_factorial(cplx a, std::size_t n) {
    if (n == 0) return 1.0;
    if (a == cplx{}) return 0.0;
    const double nn = static_cast<double>(n);
    if (a.imag() == 0.0) {
        double mag = std::exp(nn * std::log(std::abs(a.real())) - specfun::log_gamma(nn + 1.0));
        return (a.real() < 0.0 && n % 2) ? -mag : mag;
    }
    return std::exp(nn * std::log(a) - specfun::log_gamma(nn + 1.0));
}

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace detail

// ----------------------------------------------------------- transform entry

enum class TransformKind { laplace, cosine };

inline std::string_view to_string(TransformKind k) { return k == TransformKind::laplace ? "laplace" : "cosine"; }

using Params = std::map<std::string, double>;
using PointFunction = std::function<cplx(std::span<const double>)>;

/// H(p) = C * int_0^inf w(t) exp(-t sum p_i^{c_i}) dt.
struct SchwingerRep {
    cplx prefactor = 1.0;
    std::function<double(double)> weight;
    std::vector<double> exponents;
    double weight_exponent = 0.0;  // w(t) ~ t^weight_exponent at 0

    /// c_i > 0 and w finite on a probe grid spanning 1e-3..1e3.
    void validate() const {
        if (exponents.empty()) throw DomainError("Schwinger representation needs at least one variable");
        for (double c : exponents)
            if (!(c > 0.0)) throw DomainError("Schwinger exponents must be positive");
        if (!(weight_exponent > -1.0)) throw DomainError("Schwinger weight is not integrable at 0");
        if (!weight) throw DomainError("Schwinger weight missing");
        for (double t : {1e-3, 0.1, 1.0, 10.0, 1e3})
            if (!std::isfinite(weight(t))) throw DomainError("Schwinger weight is not finite on the probe grid");
    }
};

struct TransformEntry {
    std::string name;
    Params params;
    int dimension = 1;
    PointFunction h;
    std::optional<GeneralizedSeries> H;
    std::optional<SchwingerRep> schwinger;
    PointFunction H_closed;  // empty when no closed form is known
    TransformKind kind = TransformKind::laplace;
    std::vector<quad::IntegrandHints> hints;  // behaviour of h per axis
    std::string validity;
    std::string citation;
    cplx prefactor = 1.0;                  // multiplies both sides of the identity
    std::optional<double> phase_exponent;  // Minkowski phase (-1)^e; metadata only
};

// ---------------------------------------------------------------- operations

/// h = prod x_i^{s_i - 1}, H = prod Gamma(s_i) p_i^{-s_i}.
inline TransformEntry power_kernel(const std::vector<double>& s) {
    if (s.empty()) throw DimensionError("power kernel needs at least one exponent");
    for (double v : s)
        if (!(v > 0.0)) throw DomainError("power kernel requires Re s > 0, got s = " + format_double(v));
    const int k = static_cast<int>(s.size());
    TransformEntry e;
    e.name = "power";
    e.dimension = k;
    if (k == 1)
        e.params["s"] = s[0];
    else
        for (int j = 0; j < k; ++j) e.params["s" + std::to_string(j + 1)] = s[j];
    cplx c = 1.0;
    SeriesTerm t{1.0, {}, std::vector<int>(k, 0)};
    for (double v : s) {
        c *= specfun::gamma(v);
        t.alpha.push_back(detail::exponent_of(-v));
    }
    t.c = c;
    e.H = finite_generalized(k, {t}, "p > 0");
    e.h = [s](std::span<const double> x) {
        cplx v = 1.0;
        for (std::size_t j = 0; j < s.size(); ++j) v *= std::pow(x[j], s[j] - 1.0);
        return v;
    };
    e.H_closed = [s, c](std::span<const double> p) {
        cplx v = c;
        for (std::size_t j = 0; j < s.size(); ++j) v *= std::pow(p[j], -s[j]);
        return v;
    };
    for (double v : s) {
        quad::IntegrandHints hint;
        hint.endpoint_exponent = v - 1.0;
        e.hints.push_back(hint);
    }
    e.validity = "s_i > 0";
    e.citation = "Ramanujan's master theorem";
    return e;
}

/// c * prod p^{alpha0} * exp(a prod p^{w}) = sum_n (c a^n / n!) prod p^{alpha0 + n w}.
inline GeneralizedSeries expand_exp_of_powers(const SeriesTerm& prefactor, cplx a, const std::vector<Rational>& w) {
    const int k = static_cast<int>(prefactor.alpha.size());
    if (static_cast<int>(w.size()) != k || static_cast<int>(prefactor.beta.size()) != k)
        throw DimensionError("exponent vector length does not match the prefactor");
    for (int b : prefactor.beta)
        if (b != 0) throw DomainError("log prefactors cannot be composed with an exponential");
    if (a == cplx{}) return finite_generalized(k, {prefactor}, "entire");
    return countable_series(
        k,
        [prefactor, a, w, k](std::size_t n) {
            SeriesTerm t{prefactor.c * detail::power_over_factorial(a, n), prefactor.alpha, std::vector<int>(k, 0)};
            for (int j = 0; j < k; ++j) t.alpha[j] = t.alpha[j] + Exponent(w[j]) * static_cast<std::int64_t>(n);
            return t;
        },
        "entire in prod p^w");
}

/// c (base + prod p^w)^(-sigma) expanded in powers of prod p^w / base.
inline GeneralizedSeries expand_binomial(cplx c, cplx base, cplx sigma, const std::vector<int>& w) {
    if (base == cplx{}) throw DomainError("binomial expansion requires base != 0");
    if (specfun::detail::near_nonpositive_integer(sigma))
        throw PoleError("binomial exponent sigma = " + format_double(sigma.real()) + " is a nonpositive integer");
    const int k = static_cast<int>(w.size());
    const bool real = base.imag() == 0.0 && base.real() > 0.0 && sigma.imag() == 0.0 && c.imag() == 0.0;
    auto coeff = [c, base, sigma, real](std::size_t n) -> cplx {
        const double nn = static_cast<double>(n);
        const double alt = n % 2 ? -1.0 : 1.0;
        if (real) {
            // (sigma)_n / n! = Gamma(sigma + n) / (Gamma(n + 1) Gamma(sigma)); sign from the negative factors.
            double s = sigma.real();
            double log_mag = -(s + nn) * std::log(base.real()) + std::lgamma(s + nn) - std::lgamma(nn + 1.0) -
                             std::lgamma(s);
            double sign = alt;
            if (s < 0.0) {
                auto neg = static_cast<std::size_t>(std::ceil(-s));
                if (std::min(n, neg) % 2) sign = -sign;
            }
            return c.real() * sign * std::exp(log_mag);
        }
        return c * alt *
               std::exp(-(sigma + nn) * std::log(base) + specfun::log_gamma(sigma + nn) -
                        specfun::log_gamma(cplx(nn + 1.0)) - specfun::log_gamma(sigma));
    };
    return countable_series(
        k,
        [coeff, w, k](std::size_t n) {
            SeriesTerm t{coeff(n), {}, std::vector<int>(k, 0)};
            for (int j = 0; j < k; ++j) t.alpha.push_back(Exponent(static_cast<std::int64_t>(w[j] * n)));
            return t;
        },
        "|prod p^w / base| < 1");
}

/// h = 2 gamma + log(xy), H = -log(pq)/(pq).
inline TransformEntry log_power_kernel() {
    TransformEntry e;
    e.name = "power-log-2d";
    e.dimension = 2;
    std::vector<Exponent> shift{Exponent(-1), Exponent(-1)};
    e.H = finite_generalized(2, {SeriesTerm{-1.0, shift, {1, 0}}, SeriesTerm{-1.0, shift, {0, 1}}}, "p, q > 0");
    e.h = [](std::span<const double> x) { return cplx(2.0 * specfun::euler_gamma + std::log(x[0]) + std::log(x[1])); };
    e.H_closed = [](std::span<const double> p) { return cplx(-std::log(p[0] * p[1]) / (p[0] * p[1])); };
    e.hints.resize(2);
    e.validity = "none";
    e.citation = "Prudnikov, Brychkov, Marichev, Integrals and Series vol. 1, 3.1.6.1";
    return e;
}

/// Term-by-term image under p^alpha -> e^{alpha d}, (ln p)^beta -> d^beta.
inline OperatorSeries substitute_shift(const GeneralizedSeries& H) {
    OperatorSeries s;
    s.dimension = H.dimension;
    s.length = H.length;
    s.note = H.region;
    s.term = [term = H.term](std::size_t n) -> std::optional<OperatorTerm> {
        auto t = term(n);
        if (!t) return std::nullopt;
        return OperatorTerm{t->c, t->alpha, t->beta};
    };
    return s;
}

namespace detail {

/// Terms (c C(beta,j) (-1)^{beta-j} zeta^{(beta-j)}(-alpha), alpha, j), j = beta..0.
inline std::vector<SeriesTerm> lift_term(const SeriesTerm& t) {
    if (t.alpha.size() != 1) throw DimensionError("Dirichlet lift is defined for k = 1 only");
    const cplx a = t.alpha[0].value();
    const int beta = t.beta[0];
    if (!(a.real() < -1.0))
        throw ConvergenceError("Dirichlet lift needs Re alpha < -1 for the m-sum, got alpha = " + t.alpha[0].to_string());
    if (beta < 0 || beta > 2) throw DomainError("Dirichlet lift supports log powers 0..2");
    std::vector<SeriesTerm> out;
    for (int j = beta; j >= 0; --j) {
        int order = beta - j;
        cplx z;
        if (order == 0) {
            z = specfun::zeta(-a);
        } else {
            if (a.imag() != 0.0) throw DomainError("zeta derivatives are available for real arguments only");
            z = specfun::zeta_deriv(order, -a.real());
        }
        double sign = order % 2 ? -1.0 : 1.0;
        out.push_back(SeriesTerm{t.c * detail::binomial(beta, j) * sign * z, t.alpha, {j}});
    }
    return out;
}

}  // namespace detail

/// H(p) -> sum_m H(m p) for k = 1, using sum_m m^alpha ln^b m = (-1)^b zeta^(b)(-alpha).
/// Finite series are checked eagerly; countable ones as terms are enumerated.
inline GeneralizedSeries dirichlet_lift(const GeneralizedSeries& H) {
    if (H.dimension != 1) throw DimensionError("Dirichlet lift is defined for k = 1 only");
    GeneralizedSeries out;
    out.dimension = 1;
    out.region = H.region.empty() ? "lifted" : H.region + "; lifted";
    if (H.length) {
        std::vector<SeriesTerm> all;
        for (const auto& t : take_terms(H, *H.length))
            for (auto& l : detail::lift_term(t)) all.push_back(std::move(l));
        return finite_generalized(1, std::move(all), out.region);
    }
    struct State {
        std::mutex mutex;
        std::vector<SeriesTerm> flat;
        std::size_t next_source = 0;
        bool done = false;
    };
    auto state = std::make_shared<State>();
    out.term = [state, source = H.term](std::size_t n) -> std::optional<SeriesTerm> {
        std::lock_guard lock(state->mutex);
        while (state->flat.size() <= n && !state->done) {
            auto t = source(state->next_source++);
            if (!t) {
                state->done = true;
                break;
            }
            for (auto& l : detail::lift_term(*t)) state->flat.push_back(std::move(l));
        }
        if (n >= state->flat.size()) return std::nullopt;
        return state->flat[n];
    };
    return out;
}

// ------------------------------------------------------------------ psi kernels

enum class PsiCase { one, cosine_half, sine_half, hankel_j0 };

inline std::string_view to_string(PsiCase c) {
    switch (c) {
        case PsiCase::one: return "one";
        case PsiCase::cosine_half: return "cosine-half";
        case PsiCase::sine_half: return "sine-half";
        case PsiCase::hankel_j0: return "hankel-J0";
    }
    return "?";
}

inline std::optional<PsiCase> parse_psi_case(std::string_view s) {
    for (auto c : {PsiCase::one, PsiCase::cosine_half, PsiCase::sine_half, PsiCase::hankel_j0})
        if (to_string(c) == s) return c;
    return std::nullopt;
}

struct PsiWeight {
    PsiCase tag = PsiCase::one;
    std::function<cplx(cplx)> psi;
    /// F(s) with sum_m H_psi(m e^d) g(0) = F(s) g(-s), continued through
    /// the functional equation of zeta; valid for 0 < Re s < 1.
    std::function<cplx(cplx)> lifted_fe;
};

namespace detail {

inline cplx sin_half_pi(cplx s) {
    return s.imag() == 0.0 ? cplx(specfun::sin_pi(0.5 * s.real())) : std::sin(0.5 * std::numbers::pi * s);
}
inline cplx cos_half_pi(cplx s) {
    return s.imag() == 0.0 ? cplx(specfun::cos_pi(0.5 * s.real())) : std::cos(0.5 * std::numbers::pi * s);
}

/// (2 pi)^s zeta(1 - s).
inline cplx fe_core(cplx s) { return std::pow(2.0 * std::numbers::pi, s) * specfun::zeta(1.0 - s); }

}  // namespace detail

inline PsiWeight psi_weight(PsiCase c) {
    PsiWeight w;
    w.tag = c;
    const double rpi = 1.0 / std::sqrt(std::numbers::pi);
    switch (c) {
        case PsiCase::one:
            w.psi = [](cplx) { return cplx(1.0); };
            w.lifted_fe = [](cplx s) { return detail::fe_core(s) / (2.0 * detail::cos_half_pi(s)); };
            break;
        case PsiCase::cosine_half:
            w.psi = [](cplx s) { return detail::cos_half_pi(s); };
            w.lifted_fe = [](cplx s) { return detail::fe_core(s) / 2.0; };
            break;
        case PsiCase::sine_half:
            w.psi = [](cplx s) { return detail::sin_half_pi(s); };
            w.lifted_fe = [](cplx s) {
                return -detail::fe_core(s) * detail::sin_half_pi(s) / (2.0 * detail::cos_half_pi(s));
            };
            break;
        case PsiCase::hankel_j0:
            // psi(s) = -(2/sqrt(pi)) sin(pi s/2) Gamma(1 + s/2) / Gamma(1/2 + s/2); zero at even integers.
            w.psi = [rpi](cplx s) {
                cplx sn = detail::sin_half_pi(s);
                if (sn == cplx{}) return cplx{};
                return -2.0 * rpi * sn * specfun::gamma(1.0 + 0.5 * s) * specfun::rgamma(0.5 + 0.5 * s);
            };
            w.lifted_fe = [rpi](cplx s) {
                cplx tan = detail::sin_half_pi(s) / detail::cos_half_pi(s);
                return detail::fe_core(s) * tan * specfun::gamma(1.0 - 0.5 * s) * specfun::rgamma(0.5 - 0.5 * s) * rpi;
            };
            break;
    }
    return w;
}

/// K_psi(x, y) = sum_n phi_n psi(n) (xy)^n. Throws PolicyExhausted unless the
/// series converges.
inline SeriesSum psi_kernel_eval(const PsiWeight& w, double x, double y, const TruncationPolicy& policy = {}) {
    if (!(x >= 0.0) || !(y >= 0.0)) throw DomainError("psi kernel requires x, y >= 0");
    const double u = x * y;
    TermGenerator gen = [&](std::size_t n) -> std::optional<cplx> {
        cplx p = w.psi(cplx(static_cast<double>(n)));
        if (p == cplx{}) return cplx{};
        return convention_coefficient(Convention::ramanujan, n) * p * std::pow(u, static_cast<double>(n));
    };
    SeriesSum s = sum_series(gen, policy);
    if (s.classification != Classification::converged)
        throw PolicyExhausted("psi kernel series is " + std::string(to_string(s.classification)));
    return s;
}

enum class PsiForm { direct, functional_equation };

/// Value of int x^{s-1} f_psi (or its lift F_psi) for h = x^{s-1}:
/// psi(-s) Gamma(s) g(-s), times zeta(s) when lifted. The functional-equation
/// form continues the lifted value to 0 < Re s < 1.
inline cplx psi_power_result(const PsiWeight& w, cplx s, const CoefficientFunction& g, bool lifted,
                             PsiForm form = PsiForm::direct) {
    if (!(s.real() > 0.0)) throw DomainError("psi-kernel power result requires Re s > 0");
    if (g.dimension != 1) throw DimensionError("psi kernels act on k = 1 coefficient functions");
    Point t{-s};
    cplx gv = eval_coefficient(g, t);
    if (form == PsiForm::functional_equation) {
        if (!lifted) throw DomainError("the functional-equation form applies to the lifted result only");
        return w.lifted_fe(s) * gv;
    }
    if (lifted && !(s.real() > 1.0))
        throw ConvergenceError("lifted psi-kernel result needs Re s > 1 in direct form; use the functional equation");
    cplx v = w.psi(-s) * specfun::gamma(s) * gv;
    if (lifted) v *= specfun::zeta(s);
    return v;
}

// -------------------------------------------------------------- Schwinger

struct ReducedIdentity {
    std::function<cplx(double)> weight;
    std::function<cplx(double)> fbar;
    cplx prefactor = 1.0;
    quad::IntegrandHints hints;

    cplx integrand(double t) const { return weight(t) * fbar(t); }
};

/// H(p) by quadrature of the representation (used for round-trip checks).
inline quad::QuadratureResult schwinger_H(const SchwingerRep& rep, std::span<const double> p, double tol = 1e-12) {
    rep.validate();
    if (p.size() != rep.exponents.size()) throw DimensionError("Schwinger point has the wrong dimension");
    double sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) sum += std::pow(p[j], rep.exponents[j]);
    quad::IntegrandHints hints;
    hints.endpoint_exponent = rep.weight_exponent;
    hints.decay_scale = 1.0 / sum;
    auto r = quad::integrate_halfline([&](double t) { return cplx(rep.weight(t) * std::exp(-t * sum)); }, tol, hints);
    r.value *= rep.prefactor;
    r.error *= std::abs(rep.prefactor);
    return r;
}

/// int h f = C int w(t) fbar(t, ..., t) dt, with fbar built from
/// gbar(n) = g(c_1 n_1, ..., c_k n_k) under the ramanujan convention.
inline ReducedIdentity schwinger_reduce(const SchwingerRep& rep, const CoefficientFunction& g) {
    rep.validate();
    const int k = static_cast<int>(rep.exponents.size());
    if (g.dimension != k) throw DimensionError("Schwinger representation and g differ in dimension");
    CoefficientFunction gbar;
    if (g.product) {
        gbar = gamma_product(rescaled(*g.product, rep.exponents), k);
    } else {
        auto inner = g.evaluator;
        auto c = rep.exponents;
        gbar = custom(k, [inner, c](std::span<const cplx> t) {
            Point u(t.begin(), t.end());
            for (std::size_t j = 0; j < u.size(); ++j) u[j] *= c[j];
            return inner(u);
        });
    }
    eval_coefficient(gbar, Point(k, cplx{}));  // surfaces poles of g at the origin

    ReducedIdentity r;
    r.prefactor = rep.prefactor;
    r.weight = [w = rep.weight](double t) { return cplx(w(t)); };
    if (auto closed = closed_form_f(Convention::ramanujan, gbar)) {
        r.fbar = [f = *closed, k](double t) {
            std::vector<double> x(k, t);
            return f(x);
        };
    } else {
        r.fbar = [gbar, k](double t) {
            std::vector<double> x(k, t);
            return series_function_eval(Convention::ramanujan, gbar, x).value;
        };
    }
    r.hints.endpoint_exponent = rep.weight_exponent;
    return r;
}

// -------------------------------------------------------------------- catalog

namespace detail {

/// Reads named parameters; every key must be consumed.
class ParamReader {
public:
    ParamReader(std::string entry, const Params& p) : entry_(std::move(entry)), params_(p) {}

    double need(const std::string& key) {
        used_.push_back(key);
        auto it = params_.find(key);
        if (it == params_.end()) throw ParamError(entry_ + ": missing parameter '" + key + "'");
        if (!std::isfinite(it->second)) throw ParamError(entry_ + ": parameter '" + key + "' must be finite");
        return it->second;
    }

    bool has(const std::string& key) const { return params_.count(key) != 0; }

    void require(bool ok, const std::string& constraint) const {
        if (!ok) throw ParamError(entry_ + ": constraint violated: " + constraint);
    }

    void finish() const {
        for (const auto& [k, v] : params_)
            if (std::find(used_.begin(), used_.end(), k) == used_.end())
                throw ParamError(entry_ + ": unknown parameter '" + k + "'");
    }

private:
    std::string entry_;
    const Params& params_;
    std::vector<std::string> used_;
};

inline double central_binomial_sq(const std::vector<double>& prev, double q) {
    // C(2n, n)^2 q^{2n} from its predecessor.
    if (prev.empty()) return 1.0;
    double n = static_cast<double>(prev.size() - 1);
    double r = (2.0 * n + 1.0) * (2.0 * n + 2.0) / ((n + 1.0) * (n + 1.0));
    return prev.back() * r * r * q * q;
}

/// (E_m(5/6) - E_m(1/6)) beta^m / m!, beta = 2 sqrt(3 pi), m odd. Exact for
/// m <= 60; above that the Fourier series with beta^m folded into each term.
inline double eta_euler_difference(int m) {
    const double beta = 2.0 * std::sqrt(3.0 * std::numbers::pi);
    if (m <= 60)
        return (specfun::euler_poly_scaled(m, 5.0 / 6.0) - specfun::euler_poly_scaled(m, 1.0 / 6.0)) *
               std::pow(beta, m);
    double sum = 0.0;
    const double ratio = beta / std::numbers::pi;
    for (int k = 0; k < 1000; ++k) {
        double odd = 2.0 * k + 1.0;
        double d = specfun::sin_pi(odd * 5.0 / 6.0 - 0.5 * m) - specfun::sin_pi(odd / 6.0 - 0.5 * m);
        double term = d / odd * std::pow(ratio / odd, m);
        sum += term;
        if (std::pow(ratio / (odd + 2.0), m) < 1e-18 * std::abs(sum)) break;
    }
    return 4.0 / std::numbers::pi * sum;
}

inline quad::IntegrandHints endpoint(double sigma) {
    quad::IntegrandHints h;
    h.endpoint_exponent = sigma;
    return h;
}

}  // namespace detail

/// Entry names accepted by catalog_lookup.
inline const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names{
        "power",        "power-log-2d", "exp-of-powers-2d", "cos-sqrt-2d", "triple-nu", "gauss-hermite",
        "bessel-I0sq",  "bessel-I0I1",  "dedekind-eta",     "bubble-2d",   "cosine-power", "exp-decay"};
    return names;
}

inline TransformEntry catalog_lookup(const std::string& name, const Params& params) {
    using detail::ParamReader;
    constexpr double pi = std::numbers::pi;
    ParamReader rd(name, params);
    TransformEntry e;

    if (name == "power") {
        std::vector<double> s;
        if (rd.has("s")) {
            s.push_back(rd.need("s"));
        } else {
            for (int j = 1; rd.has("s" + std::to_string(j)); ++j) s.push_back(rd.need("s" + std::to_string(j)));
            if (s.empty()) rd.need("s");
        }
        for (double v : s) rd.require(v > 0.0, "s > 0");
        rd.finish();
        return power_kernel(s);
    }

    if (name == "power-log-2d") {
        rd.finish();
        return log_power_kernel();
    }

    if (name == "exp-of-powers-2d") {
        rd.finish();
        e.name = name;
        e.dimension = 2;
        SeriesTerm pre{pi * std::sqrt(2.0), {Rational(-1, 2), Rational(-1, 2)}, {0, 0}};
        e.H = expand_exp_of_powers(pre, -2.0, {Rational(1, 2), Rational(1, 4)});
        // The transform of (xy)^{-1/2} exp(-1/(x^2 y)) is pi/sqrt(pq) exp(-2 sqrt(2) p^{1/2} q^{1/4});
        // this h is the one whose transform is the H above.
        e.h = [](std::span<const double> x) {
            double w = std::exp(-0.25 / (x[0] * x[0] * x[1]));
            return w == 0.0 ? cplx{} : cplx(std::sqrt(2.0) * w / (std::sqrt(x[0]) * std::sqrt(x[1])));
        };
        e.H_closed = [](std::span<const double> p) {
            return cplx(pi * std::sqrt(2.0 / (p[0] * p[1])) * std::exp(-2.0 * std::sqrt(p[0]) * std::pow(p[1], 0.25)));
        };
        e.hints.resize(2);
        e.validity = "none";
        e.citation = "Prudnikov, Brychkov, Marichev, Integrals and Series vol. 1, 3.1.3.5";
        return e;
    }

    if (name == "cos-sqrt-2d") {
        double a = rd.need("a");
        rd.require(a > 0.0, "a > 0");
        rd.finish();
        e.name = name;
        e.params = params;
        e.dimension = 2;
        e.H = expand_binomial(pi, a, 0.5, {1, 1});
        e.h = [a](std::span<const double> x) {
            // Square roots taken per axis so x y cannot underflow to 0 near the corner.
            double rx = std::sqrt(x[0]), ry = std::sqrt(x[1]);
            return cplx(std::cos(2.0 * std::sqrt(a) * rx * ry) / (rx * ry));
        };
        e.H_closed = [a](std::span<const double> p) { return cplx(pi / std::sqrt(a + p[0] * p[1])); };
        e.hints = {detail::endpoint(-0.5), detail::endpoint(-0.5)};
        e.validity = "a > 0; series in p q converges for p q < a";
        e.citation = "Prudnikov, Brychkov, Marichev, Integrals and Series vol. 1, 3.1.3.61";
        return e;
    }

    if (name == "triple-nu") {
        double nu = rd.need("nu");
        rd.require(nu > 2.0, "nu > 2");
        rd.finish();
        e.name = name;
        e.params = params;
        e.dimension = 3;
        const cplx C = 8.0 * pi * specfun::gamma(0.5 * nu + 1.0) / specfun::gamma(nu + 1.0);
        SchwingerRep rep;
        rep.prefactor = C;
        rep.weight = [nu](double t) { return std::pow(t, nu - 3.0); };
        rep.exponents = {0.5, 0.5, 0.5};
        rep.weight_exponent = nu - 3.0;
        rep.validate();
        e.schwinger = rep;
        e.h = [nu](std::span<const double> x) {
            double xy = x[0] * x[1], xz = x[0] * x[2], yz = x[1] * x[2];
            return cplx(std::pow(x[0] * x[1] * x[2], 0.5 * (nu - 2.0)) / std::pow(xy + xz + yz, 0.5 * (nu + 1.0)));
        };
        const cplx Hc = C * specfun::gamma(nu - 2.0);
        e.H_closed = [Hc, nu](std::span<const double> p) {
            return Hc * std::pow(std::sqrt(p[0]) + std::sqrt(p[1]) + std::sqrt(p[2]), 2.0 - nu);
        };
        e.hints = {detail::endpoint(0.5 * (nu - 2.0)), detail::endpoint(0.5 * (nu - 2.0)),
                   detail::endpoint(0.5 * (nu - 2.0))};
        e.validity = "nu > 2";
        e.citation = "Prudnikov, Brychkov, Marichev, Integrals and Series vol. 1, 3.2.3.2 (Schwinger form)";
        return e;
    }

    if (name == "gauss-hermite") {
        double x = rd.need("x");
        rd.finish();
        e.name = name;
        e.params = params;
        detail::LazySequence<double> hermite([x](const std::vector<double>& v) {
            std::size_t n = v.size();
            if (n == 0) return 1.0;
            if (n == 1) return 2.0 * x;
            return 2.0 * x * v[n - 1] - 2.0 * static_cast<double>(n - 1) * v[n - 2];
        });
        e.H = countable_series(
            1,
            [hermite](std::size_t n) {
                return SeriesTerm{hermite(n), {Exponent(-static_cast<std::int64_t>(n) - 1)}, {0}};
            },
            "formal outside every |p| radius (asymptotic in 1/p)");
        e.h = [x](std::span<const double> t) { return cplx(std::exp(2.0 * x * t[0] - t[0] * t[0])); };
        e.H_closed = [x](std::span<const double> p) {
            double u = 0.5 * (p[0] - 2.0 * x);
            return cplx(0.5 * std::sqrt(pi) * std::exp(u * u) * specfun::erfc(u));
        };
        e.hints.resize(1);
        e.validity = "x real";
        e.citation = "Prudnikov, Brychkov, Marichev, Integrals and Series vol. 4, 2.2.1.5 (corrected)";
        return e;
    }

    if (name == "bessel-I0sq" || name == "bessel-I0I1") {
        double a = rd.need("a");
        rd.require(a > 0.0, "a > 0");
        rd.finish();
        e.name = name;
        e.params = params;
        const double q = a / 4.0;
        detail::LazySequence<double> coeff([q](const std::vector<double>& v) { return detail::central_binomial_sq(v, q); });
        e.hints.resize(1);
        e.validity = "a > 0; series in a/p converges for p > a";
        e.citation = "Prudnikov, Brychkov, Marichev, Integrals and Series vol. 4 (Laplace transforms of I0^2 and I0 I1)";
        if (name == "bessel-I0sq") {
            e.H = countable_series(
                1,
                [coeff](std::size_t n) {
                    return SeriesTerm{coeff(n), {Exponent(-2 * static_cast<std::int64_t>(n) - 1)}, {0}};
                },
                "p > a");
            e.h = [a](std::span<const double> x) {
                double i0 = specfun::bessel_i0(0.5 * a * x[0]);
                return cplx(i0 * i0);
            };
            e.H_closed = [a](std::span<const double> p) {
                return cplx(2.0 / pi * specfun::elliptic_k(a / p[0]) / p[0]);
            };
        } else {
            e.H = countable_series(
                1,
                [coeff, a](std::size_t n) {
                    auto m = static_cast<std::int64_t>(n) + 1;
                    return SeriesTerm{coeff(n + 1) / a, {Exponent(-2 * m)}, {0}};
                },
                "p > a");
            e.h = [a](std::span<const double> x) {
                double u = 0.5 * a * x[0];
                return cplx(specfun::bessel_i0(u) * specfun::bessel_i1(u));
            };
            e.H_closed = [a](std::span<const double> p) {
                return cplx(2.0 / (pi * a) * (specfun::elliptic_k(a / p[0]) - 0.5 * pi));
            };
        }
        return e;
    }

    if (name == "dedekind-eta") {
        rd.finish();
        e.name = name;
        const double root_pi_half = 0.5 * std::sqrt(pi);
        detail::LazySequence<double> coeff([root_pi_half](const std::vector<double>& v) {
            int m = 2 * static_cast<int>(v.size()) + 1;
            return root_pi_half * detail::eta_euler_difference(m);
        });
        e.H = countable_series(
            1, [coeff](std::size_t n) { return SeriesTerm{coeff(n), {Exponent(static_cast<std::int64_t>(n))}, {0}}; },
            "|t| < pi/12");
        e.h = [](std::span<const double> x) { return cplx(specfun::dedekind_eta(x[0])); };
        e.H_closed = [](std::span<const double> t) {
            double u = t[0];
            return cplx(std::sqrt(pi / u) * std::sinh(2.0 * std::sqrt(pi * u / 3.0)) / std::cosh(std::sqrt(3.0 * pi * u)));
        };
        e.hints.resize(1);
        e.validity = "series radius pi/12 (pole of 1/cosh at t = -pi/12)";
        e.citation = "Glasser (2009), Laplace transform of eta(ix); Euler-polynomial expansion of sinh/cosh";
        return e;
    }

    if (name == "bubble-2d") {
        double a = rd.need("a"), b = rd.need("b"), D = rd.need("D");
        rd.require(b > 0.0, "b > 0");
        rd.require(a + b - 0.5 * D > 0.0, "a + b - D/2 > 0");
        rd.require(a > 0.0, "a > 0");
        rd.finish();
        e.name = name;
        e.params = params;
        e.dimension = 2;
        const double e2 = a + b - 0.5 * D;
        const cplx c = specfun::gamma(b) * specfun::gamma(e2);
        e.H = finite_generalized(2, {SeriesTerm{c, {detail::exponent_of(-b), detail::exponent_of(-e2)}, {0, 0}}},
                                 "s, t > 0");
        e.h = [b, e2](std::span<const double> x) { return cplx(std::pow(x[0], b - 1.0) * std::pow(x[1], e2 - 1.0)); };
        e.H_closed = [c, b, e2](std::span<const double> p) { return c * std::pow(p[0], -b) * std::pow(p[1], -e2); };
        e.hints = {detail::endpoint(b - 1.0), detail::endpoint(e2 - 1.0)};
        e.prefactor = specfun::rgamma(a) * specfun::rgamma(b);
        e.phase_exponent = -0.5 * D;
        e.validity = "b > 0, a + b - D/2 > 0; c read as D/2";
        e.citation = "one-loop bubble in Schwinger parameters (Laguerre-series form)";
        return e;
    }

    if (name == "cosine-power") {
        double s = rd.need("s");
        rd.require(s > 0.0 && s < 1.0, "0 < s < 1");
        rd.finish();
        e.name = name;
        e.params = params;
        e.kind = TransformKind::cosine;
        const cplx c = specfun::gamma(s) * specfun::cos_pi(0.5 * s);
        e.H = finite_generalized(1, {SeriesTerm{c, {detail::exponent_of(-s)}, {0}}}, "p > 0");
        e.h = [s](std::span<const double> x) { return cplx(std::pow(x[0], s - 1.0)); };
        e.H_closed = [c, s](std::span<const double> p) { return c * std::pow(p[0], -s); };
        e.hints = {detail::endpoint(s - 1.0)};
        e.validity = "0 < s < 1";
        e.citation = "Atale (2022), Mellin transform of the even cosine series";
        return e;
    }

    if (name == "exp-decay") {
        double s = rd.need("s");
        rd.require(s > 0.0, "s > 0");
        rd.finish();
        e.name = name;
        e.params = params;
        e.H = countable_series(
            1,
            [s](std::size_t n) {
                double c = (n % 2 ? -1.0 : 1.0) * std::pow(s, static_cast<double>(n));
                return SeriesTerm{c, {Exponent(-static_cast<std::int64_t>(n) - 1)}, {0}};
            },
            "p > s");
        e.h = [s](std::span<const double> x) { return cplx(std::exp(-s * x[0])); };
        e.H_closed = [s](std::span<const double> p) { return cplx(1.0 / (p[0] + s)); };
        quad::IntegrandHints hint;
        hint.decay_scale = 1.0 / s;
        e.hints = {hint};
        e.validity = "s > 0; series converges for p > s";
        e.citation = "elementary Laplace transform of exp(-s x)";
        return e;
    }

    throw UnknownEntry("unknown transform '" + name + "'");
}

}  // namespace opcalc
