#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "genseries.hpp"
#include "opcore.hpp"
#include "quad.hpp"
#include "specfun.hpp"

namespace opcalc {

// ------------------------------------------------------------------ records

enum class Mode { standard, hardy, carr, cosine, dirichlet_lift, psi_kernel };

inline std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::standard: return "standard";
        case Mode::hardy: return "hardy";
        case Mode::carr: return "carr";
        case Mode::cosine: return "cosine";
        case Mode::dirichlet_lift: return "dirichlet-lift";
        case Mode::psi_kernel: return "psi-kernel";
    }
    return "standard";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
    for (Mode m : {Mode::standard, Mode::hardy, Mode::carr, Mode::cosine, Mode::dirichlet_lift, Mode::psi_kernel})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

enum class Status { verified, formal_only, failed, inconclusive };

inline std::string_view to_string(Status s) {
    switch (s) {
        case Status::verified: return "verified";
        case Status::formal_only: return "formal-only";
        case Status::failed: return "failed";
        case Status::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

inline std::optional<Status> parse_status(std::string_view s) {
    for (Status v : {Status::verified, Status::formal_only, Status::failed, Status::inconclusive})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

struct Tolerances {
    double lhs = 1e-10;   // quadrature target
    double match = 1e-8;  // relative discrepancy floor-scaled by 1 + max(|lhs|, |rhs|)

    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct PsiOptions {
    PsiCase weight = PsiCase::one;
    double s = 1.5;
    bool lifted = false;
    PsiForm form = PsiForm::direct;

    friend bool operator==(const PsiOptions&, const PsiOptions&) = default;
};

/// One instance of int h f = H(e^d) g(0). The transform supplies h and H (or a
/// Schwinger representation); f is either given directly or summed from g.
struct IdentitySpec {
    std::string id;
    Convention convention = Convention::ramanujan;
    CoefficientFunction g;
    TransformEntry transform;
    int dimension = 1;
    Mode mode = Mode::standard;
    std::optional<FEvaluator> direct_f;  // f, or F = sum_m f(m x) in lifted modes
    std::optional<cplx> closed_form;
    std::string closed_form_text;
    Tolerances tol;
    TruncationPolicy policy;
    std::vector<quad::IntegrandHints> lhs_hints;  // replaces the entry's hints for h f
    PsiOptions psi;

    void validate() const {
        if (dimension < 1 || dimension > 3) throw DimensionError("identities are supported for k = 1, 2, 3");
        if (g.dimension != dimension) throw DimensionError("g has dimension " + std::to_string(g.dimension));
        if (transform.dimension != dimension)
            throw DimensionError("transform '" + transform.name + "' has dimension " +
                                 std::to_string(transform.dimension));
        if (!g.evaluator) throw DomainError("coefficient function has no evaluator");
        if (!lhs_hints.empty() && static_cast<int>(lhs_hints.size()) != dimension)
            throw DimensionError("one LHS hint per axis");
        for (const auto& h : lhs_hints) h.validate();
        if (!(tol.lhs > 0.0) || !(tol.match > 0.0)) throw DomainError("tolerances must be positive");
        policy.validate();

        const bool one_d = dimension == 1;
        auto need_conv = [&](Convention c) {
            if (convention != c)
                throw DomainError(std::string(to_string(mode)) + " mode requires the " + std::string(to_string(c)) +
                                  " convention");
        };
        switch (mode) {
            case Mode::standard:
                need_conv(Convention::ramanujan);
                if (transform.kind != TransformKind::laplace)
                    throw DomainError("standard mode requires a Laplace-type transform");
                break;
            case Mode::hardy:
            case Mode::carr:
                if (!one_d) throw DimensionError(std::string(to_string(mode)) + " mode requires k = 1");
                need_conv(mode == Mode::hardy ? Convention::hardy : Convention::carr);
                break;
            case Mode::cosine:
                need_conv(Convention::even_cosine);
                if (!one_d) throw DimensionError("cosine mode requires k = 1");
                if (transform.kind != TransformKind::cosine) throw DomainError("cosine mode requires a cosine transform");
                break;
            case Mode::dirichlet_lift:
                if (!one_d) throw DimensionError("dirichlet-lift mode requires k = 1");
                need_conv(Convention::ramanujan);
                if (!transform.H) throw DomainError("dirichlet-lift mode requires a series transform");
                break;
            case Mode::psi_kernel:
                if (!one_d) throw DimensionError("psi-kernel mode requires k = 1");
                need_conv(Convention::ramanujan);
                if (transform.name != "power") throw DomainError("psi-kernel mode uses the power kernel x^{s-1}");
                if (!(psi.s > 0.0)) throw DomainError("psi-kernel exponent must be positive");
                break;
        }
        if (mode != Mode::psi_kernel && !transform.H && !transform.schwinger)
            throw DomainError("transform '" + transform.name + "' has neither a series nor a Schwinger form");
    }
};

struct RhsReport {
    cplx value{};
    Classification classification = Classification::inconclusive;
    std::size_t terms_used = 0;
    double last_term = 0.0;
    bool accelerated = false;  // value is the epsilon-regularized limit
    std::string method;
};

struct VerificationReport {
    std::string id;
    Mode mode = Mode::standard;
    bool lhs_available = false;
    quad::QuadratureResult lhs;
    std::string lhs_note;
    RhsReport rhs;
    std::optional<cplx> closed_form;
    double abs_disc = std::numeric_limits<double>::quiet_NaN();
    double rel_disc = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> closed_rel_disc;  // lhs (or rhs without lhs) against the closed form
    Status status = Status::inconclusive;
    std::optional<double> phase_exponent;
    std::string citation;
    double wall_ms = 0.0;
    std::vector<std::string> diagnostics;
};

/// |a - b| / (1 + max(|a|, |b|))
inline double relative_discrepancy(cplx a, cplx b) {
    return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

// ------------------------------------------------------------------- pieces

namespace detail {

/// g(t + shift) as a gamma product: z^{w.shift} folds into c and each factor's
/// b absorbs a.shift.
inline GammaProduct shift_product(const GammaProduct& gp, const std::vector<double>& shift) {
    GammaProduct r = gp;
    cplx ws{};
    for (std::size_t j = 0; j < gp.w.size(); ++j) ws += gp.w[j] * shift[j];
    if (ws != cplx{}) r.c *= std::pow(gp.z, ws);
    for (auto& f : r.factors) {
        double as = 0.0;
        for (std::size_t j = 0; j < f.a.size(); ++j) as += f.a[j] * shift[j];
        f.b += as;
    }
    return r;
}

struct FSource {
    std::optional<FEvaluator> f;
    std::string note;
};

/// f from the coefficient function: a closed form where one is known, else the
/// series, which is admitted only when its radius along the diagonal is infinite.
inline FSource f_from_series(Convention conv, const CoefficientFunction& g, const TruncationPolicy& policy) {
    if (auto closed = closed_form_f(conv, g)) return {closed, "closed form of the series"};
    std::vector<double> dir(g.dimension, 1.0);
    double r = estimate_radius(conv, g, dir);
    if (std::isfinite(r))
        return {std::nullopt, "series for f has finite radius ~" + format_double(r) + "; supply f directly"};
    FEvaluator f = [conv, g, policy](std::span<const double> x) {
        return series_function_eval(conv, g, std::vector<double>(x.begin(), x.end()), policy).value;
    };
    return {f, "series for f (entire)"};
}

inline FSource lhs_f(const IdentitySpec& spec) {
    if (spec.direct_f) return {spec.direct_f, "direct f"};
    switch (spec.mode) {
        case Mode::dirichlet_lift:
            if (auto F = closed_form_lifted_f(spec.g)) return {F, "closed form of sum_m f(m x)"};
            return {std::nullopt, "lifted f has no closed form; supply F directly"};
        case Mode::psi_kernel: {
            if (spec.psi.lifted) return {std::nullopt, "lifted psi-kernel f must be supplied directly"};
            auto w = psi_weight(spec.psi.weight);
            auto inner = spec.g.evaluator;
            auto gpsi = custom(1, [inner, w](std::span<const cplx> t) { return w.psi(t[0]) * inner(t); });
            return f_from_series(Convention::ramanujan, gpsi, spec.policy);
        }
        default: return f_from_series(spec.convention, spec.g, spec.policy);
    }
}

inline std::vector<quad::IntegrandHints> lhs_hints(const IdentitySpec& spec) {
    std::vector<quad::IntegrandHints> h = spec.lhs_hints;
    if (h.empty()) h = spec.transform.hints;
    if (h.empty()) h.resize(spec.dimension);
    if (spec.lhs_hints.empty() && spec.g.product) {
        auto sh = shape_of(*spec.g.product, spec.g.dimension);
        const cplx z = sh.zeta[0];
        if (spec.mode == Mode::carr && z.imag() == 0.0 && z.real() > 0.0) h[0].pole = 1.0 / z.real();
        if (spec.mode == Mode::cosine && z.imag() == 0.0 && z.real() != 0.0) h[0].phase_scale = std::abs(z.real());
    }
    return h;
}

inline quad::QuadratureResult integrate_lhs(const IdentitySpec& spec, const FEvaluator& f) {
    const auto hints = lhs_hints(spec);
    const auto& h = spec.transform.h;
    auto point = [&](std::span<const double> x) -> cplx {
        cplx fv = f(x);
        if (fv == cplx{}) return 0.0;  // h may overflow where f has underflowed
        return h(x) * fv;
    };
    if (spec.mode == Mode::carr && !hints[0].pole)
        throw DomainError("carr mode needs the pole of f (a geometric g or an explicit pole hint)");
    if (spec.mode == Mode::cosine && !hints[0].phase_scale)
        throw DomainError("cosine mode needs the oscillation scale of f (a geometric g or a phase hint)");
    if (spec.dimension == 1)
        return quad::integrate_halfline(
            [&](double x) {
                double v[1] = {x};
                return point(v);
            },
            spec.tol.lhs, hints[0]);
    return quad::integrate_box(point, spec.dimension, spec.tol.lhs, std::span<const quad::IntegrandHints>(hints));
}

inline RhsReport from_sum(const SeriesSum& s, std::string method) {
    return {s.value, s.classification, s.terms_used, s.last_term, s.accelerated, std::move(method)};
}

}  // namespace detail

/// RHS alone: the operator side after the mode's preprocessing, before the
/// transform prefactor.
inline RhsReport evaluate_rhs(const IdentitySpec& spec) {
    using detail::from_sum;
    const auto& T = spec.transform;
    switch (spec.mode) {
        case Mode::psi_kernel: {
            auto w = psi_weight(spec.psi.weight);
            cplx v = psi_power_result(w, spec.psi.s, spec.g, spec.psi.lifted, spec.psi.form);
            RhsReport r;
            r.value = v;
            r.classification = Classification::converged;
            r.terms_used = 1;
            r.method = spec.psi.form == PsiForm::direct ? "psi(-s) Gamma(s) g(-s)" : "functional equation";
            if (spec.psi.lifted && spec.psi.form == PsiForm::direct) r.method += " zeta(s)";
            return r;
        }
        case Mode::hardy:
            return from_sum(apply_operator_series(substitute_shift(*T.H), weighted(spec.g, Weight::gamma), spec.policy),
                            "H(e^d)[Gamma(1+.) g](0)");
        case Mode::carr:
            return from_sum(
                apply_operator_series(substitute_shift(*T.H), weighted(spec.g, Weight::gamma_cos), spec.policy),
                "H(e^d)[Gamma(1+.) cos(pi .) g](0)");
        case Mode::dirichlet_lift:
            return from_sum(apply_operator_series(substitute_shift(dirichlet_lift(*T.H)), spec.g, spec.policy),
                            "lifted H(e^d) g(0)");
        case Mode::standard:
        case Mode::cosine:
            break;
    }
    if (T.H) return from_sum(apply_operator_series(substitute_shift(*T.H), spec.g, spec.policy), "H(e^d) g(0)");

    // Schwinger route: C int w(t) fbar(t, ..., t) dt.
    auto red = schwinger_reduce(*T.schwinger, spec.g);
    auto q = quad::integrate_halfline(
        [&](double t) {
            cplx fb = red.fbar(t);
            return fb == cplx{} ? cplx{} : red.weight(t) * fb;
        },
        spec.tol.lhs, red.hints);
    RhsReport r;
    r.value = red.prefactor * q.value;
    r.classification = q.converged ? Classification::converged : Classification::inconclusive;
    r.terms_used = q.evaluations;
    r.last_term = q.error;
    r.method = "Schwinger reduction, C int w(t) fbar(t) dt";
    return r;
}

/// LHS by quadrature, RHS by operator application, then the status rules:
///  - verified: rhs converged, the sides agree, and a closed form (if any) agrees;
///  - formal-only: rhs formal-divergent and the lhs matches the closed form;
///  - inconclusive: a side could not be computed or the rhs hit max_terms;
///  - failed: everything computed but a comparison exceeded the match tolerance.
/// Without an LHS the rhs is compared with the closed form instead.
inline VerificationReport verify_identity(const IdentitySpec& spec) {
    const auto t0 = std::chrono::steady_clock::now();
    spec.validate();
    VerificationReport rep;
    rep.id = spec.id;
    rep.mode = spec.mode;
    rep.closed_form = spec.closed_form;
    rep.phase_exponent = spec.transform.phase_exponent;
    rep.citation = spec.transform.citation;
    const cplx pre = spec.transform.prefactor;

    // LHS: quadrature failures are recorded, not thrown.
    if (!spec.transform.h) {
        rep.lhs_note = "transform has no kernel h";
    } else {
        auto src = detail::lhs_f(spec);
        rep.lhs_note = src.note;
        if (src.f) {
            try {
                rep.lhs = detail::integrate_lhs(spec, *src.f);
                rep.lhs.value *= pre;
                rep.lhs.error *= std::abs(pre);
                rep.lhs_available = rep.lhs.converged && std::isfinite(std::abs(rep.lhs.value));
                if (!rep.lhs_available) rep.diagnostics.push_back("lhs quadrature did not converge");
            } catch (const Error& e) {
                rep.diagnostics.push_back(std::string("lhs failed: ") + e.what());
            }
        }
    }

    // RHS: errors propagate.
    rep.rhs = evaluate_rhs(spec);
    rep.rhs.value *= pre;
    if (rep.rhs.accelerated && rep.rhs.classification == Classification::formal_divergent)
        rep.diagnostics.push_back("rhs value is the epsilon-regularized limit of a divergent series");

    const double tol = spec.tol.match;
    bool closed_ok = true;
    if (spec.closed_form) {
        cplx ref = rep.lhs_available ? rep.lhs.value : rep.rhs.value;
        rep.closed_rel_disc = relative_discrepancy(ref, *spec.closed_form);
        closed_ok = *rep.closed_rel_disc <= tol;
    }
    if (rep.lhs_available) {
        rep.abs_disc = std::abs(rep.lhs.value - rep.rhs.value);
        rep.rel_disc = relative_discrepancy(rep.lhs.value, rep.rhs.value);
    } else if (spec.closed_form) {
        rep.abs_disc = std::abs(rep.rhs.value - *spec.closed_form);
        rep.rel_disc = *rep.closed_rel_disc;
    }

    switch (rep.rhs.classification) {
        case Classification::converged:
            if (!rep.lhs_available && !spec.closed_form)
                rep.status = Status::inconclusive;
            else
                rep.status = (rep.rel_disc <= tol && closed_ok) ? Status::verified : Status::failed;
            break;
        case Classification::formal_divergent:
            if (!rep.lhs_available)
                rep.status = Status::inconclusive;
            else
                rep.status = closed_ok ? Status::formal_only : Status::failed;
            break;
        case Classification::inconclusive: rep.status = Status::inconclusive; break;
    }
    if (!rep.lhs_available && rep.rhs.classification == Classification::converged && spec.transform.h &&
        rep.status == Status::inconclusive)
        rep.diagnostics.push_back("lhs unavailable; rhs converged");

    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ------------------------------------------------------ consistency suites

enum class Suite { change_of_vars, ibp, ftc };

inline std::string_view to_string(Suite s) {
    switch (s) {
        case Suite::change_of_vars: return "change_of_vars";
        case Suite::ibp: return "ibp";
        case Suite::ftc: return "ftc";
    }
    return "ftc";
}

inline std::optional<Suite> parse_suite(std::string_view s) {
    for (Suite v : {Suite::change_of_vars, Suite::ibp, Suite::ftc})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

/// k = 1, ramanujan convention. H, when present, adds the operator side.
struct ConsistencyFixture {
    std::string name;
    std::function<double(double)> h;
    std::function<double(double)> dh;  // needed by ibp and ftc
    CoefficientFunction g;
    std::optional<GeneralizedSeries> H;
    quad::IntegrandHints hints;     // behaviour of h f on the half line
    quad::IntegrandHints dh_hints;  // behaviour of h' f
    std::function<double(double)> phi = [](double t) { return t * t; };
    std::function<double(double)> dphi = [](double t) { return 2.0 * t; };
    quad::IntegrandHints t_hints;  // behaviour after x = phi(t)
    double a = 0.5, b = 2.0;       // ftc interval, inside the radius of f's series
};

struct ConsistencyReport {
    Suite suite = Suite::ftc;
    std::string fixture;
    double lhs = 0.0;
    double rhs = 0.0;
    std::optional<double> operator_value;  // H(e^d) applied per the suite's identity
    double abs_disc = 0.0;
    Status status = Status::inconclusive;  // verified (pass), failed or inconclusive
    std::string detail;
};

namespace detail {

inline double consistency_tol(double v) { return 1e-8 * (1.0 + std::abs(v)); }

/// f' from g~(n) = -g(n+1).
inline CoefficientFunction derivative_coefficients(const CoefficientFunction& g) {
    if (g.product) {
        auto gp = shift_product(*g.product, {1.0});
        gp.c = -gp.c;
        return gamma_product(gp, 1);
    }
    auto inner = g.evaluator;
    return custom(1, [inner](std::span<const cplx> t) {
        cplx u[1] = {t[0] + 1.0};
        return -inner(u);
    });
}

inline std::function<double(double)> real_f(const FEvaluator& f) {
    return [f](double x) {
        double v[1] = {x};
        return f(v).real();
    };
}

}  // namespace detail

/// Both sides of the suite's identity by quadrature (the FTC boundary term
/// from f's series, as in the operational derivation); pass iff
/// |lhs - rhs| <= 1e-8 (1 + |lhs|), and the operator side agrees when H is given.
inline ConsistencyReport consistency_suite(Suite suite, const ConsistencyFixture& fx) {
    if (fx.g.dimension != 1) throw DimensionError("consistency fixtures are one-dimensional");
    if (!fx.h) throw FixtureConditionError("fixture '" + fx.name + "' has no kernel h");
    ConsistencyReport rep;
    rep.suite = suite;
    rep.fixture = fx.name;
    constexpr double qtol = 1e-12;

    auto fsrc = detail::f_from_series(Convention::ramanujan, fx.g, {});
    if (!fsrc.f) throw FixtureConditionError("fixture '" + fx.name + "': " + fsrc.note);
    auto f = detail::real_f(*fsrc.f);
    auto product = [](const std::function<double(double)>& a, const std::function<double(double)>& b) {
        return [a, b](double x) {
            double bv = b(x);
            return bv == 0.0 ? 0.0 : a(x) * bv;
        };
    };
    auto run = [&](auto&& fn, const quad::IntegrandHints& hints) {
        auto r = quad::integrate_halfline(fn, qtol, hints);
        if (!r.converged) throw ConvergenceError("quadrature did not converge for fixture '" + fx.name + "'");
        return r.value.real();
    };
    auto operator_side = [&](const CoefficientFunction& g) -> std::optional<double> {
        if (!fx.H) return std::nullopt;
        auto s = apply_operator_series(substitute_shift(*fx.H), g);
        if (s.classification != Classification::converged) return std::nullopt;
        return s.value.real();
    };

    try {
        switch (suite) {
            case Suite::change_of_vars: {
                if (!fx.phi || !fx.dphi) throw FixtureConditionError("change of variables needs phi and phi'");
                if (std::abs(fx.phi(0.0)) > 1e-12 || !(fx.phi(1e6) > 1e3))
                    throw FixtureConditionError("parametrization must satisfy x(0) = 0 and x(t) -> infinity");
                rep.lhs = run(product(fx.h, f), fx.hints);
                rep.rhs = run(
                    [&](double t) {
                        double x = fx.phi(t);
                        if (x == 0.0) return 0.0;  // x(t) underflowed; integrable endpoint
                        double fv = f(x);
                        return fv == 0.0 ? 0.0 : fx.h(x) * fv * fx.dphi(t);
                    },
                    fx.t_hints);
                rep.operator_value = operator_side(fx.g);
                rep.detail = "int h f dx vs int h(x(t)) f(x(t)) x'(t) dt";
                break;
            }
            case Suite::ibp: {
                if (!fx.dh) throw FixtureConditionError("integration by parts needs h'");
                if (std::abs(fx.h(0.0)) > 1e-12)
                    throw FixtureConditionError("integration by parts requires h(0) = 0, got " + format_double(fx.h(0.0)));
                for (double X : {1e2, 1e3})
                    if (std::abs(fx.h(X) * f(X)) > 1e-12)
                        throw FixtureConditionError("boundary term h f does not vanish at infinity");
                auto gt = detail::derivative_coefficients(fx.g);
                auto dsrc = detail::f_from_series(Convention::ramanujan, gt, {});
                if (!dsrc.f) throw FixtureConditionError("fixture '" + fx.name + "': " + dsrc.note);
                auto df = detail::real_f(*dsrc.f);
                rep.lhs = run(product(fx.dh, f), fx.dh_hints);
                rep.rhs = -run(product(fx.h, df), fx.hints);
                // e^d H(e^d) g(0) = H(e^d) g(1)
                if (fx.g.product) rep.operator_value = operator_side(gamma_product(detail::shift_product(*fx.g.product, {1.0}), 1));
                rep.detail = "int h' f vs -int h f' with g~(n) = -g(n+1)";
                break;
            }
            case Suite::ftc: {
                if (!fx.dh) throw FixtureConditionError("fundamental theorem check needs h'");
                if (!(fx.a >= 0.0 && fx.b > fx.a)) throw FixtureConditionError("ftc needs 0 <= a < b");
                auto gt = detail::derivative_coefficients(fx.g);
                auto dsrc = detail::f_from_series(Convention::ramanujan, gt, {});
                if (!dsrc.f) throw FixtureConditionError("fixture '" + fx.name + "': " + dsrc.note);
                auto df = detail::real_f(*dsrc.f);
                auto r = quad::integrate_finite([&](double x) { return fx.dh(x) * f(x) + fx.h(x) * df(x); }, fx.a,
                                                fx.b, qtol);
                if (!r.converged) throw ConvergenceError("finite quadrature did not converge");
                rep.lhs = r.value.real();
                // Boundary values of f from the series itself.
                auto fa = series_function_eval(Convention::ramanujan, fx.g, {fx.a}).value.real();
                auto fb = series_function_eval(Convention::ramanujan, fx.g, {fx.b}).value.real();
                rep.rhs = fx.h(fx.b) * fb - fx.h(fx.a) * fa;
                rep.detail = "int_a^b (h f)' vs h(b) f(b) - h(a) f(a)";
                break;
            }
        }
    } catch (const PolicyExhausted& e) {
        rep.status = Status::inconclusive;
        rep.detail = std::string("series outside its radius: ") + e.what();
        return rep;
    } catch (const ConvergenceError& e) {
        rep.status = Status::inconclusive;
        rep.detail = e.what();
        return rep;
    }

    rep.abs_disc = std::abs(rep.lhs - rep.rhs);
    const double tol = detail::consistency_tol(rep.lhs);
    bool ok = rep.abs_disc <= tol;
    if (rep.operator_value) ok = ok && std::abs(*rep.operator_value - rep.lhs) <= tol;
    rep.status = ok ? Status::verified : Status::failed;
    return rep;
}

// ---------------------------------------------------------- Post inversion

/// F^{(m)}(s), supplied analytically by the caller.
using DerivativeFamily = std::function<double(int m, double s)>;

/// phi_m (m/x)^{m+1} F^{(m)}(m/x), with the scalar factor (m/x)^{m+1}/m! taken
/// in log space so large m does not overflow.
inline double post_invert(const DerivativeFamily& F, double x, int m) {
    if (!(x > 0.0)) throw DomainError("Post inversion requires x > 0, got x = " + format_double(x));
    if (m < 1) throw DomainError("Post inversion requires m >= 1");
    const double s = m / x;
    const double log_scale = (m + 1) * std::log(s) - std::lgamma(m + 1.0);
    const double sign = m % 2 ? -1.0 : 1.0;
    const double d = F(m, s);
    if (d == 0.0) return 0.0;
    const double mag = std::exp(log_scale + std::log(std::abs(d)));
    return sign * (d < 0.0 ? -mag : mag);
}

}  // namespace opcalc
