#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "errors.hpp"
#include "genseries.hpp"
#include "opcore.hpp"
#include "specfun.hpp"
#include "verify.hpp"

namespace opcalc {

enum class ValueSource { closed_form, derived_oracle };

inline std::string_view to_string(ValueSource v) {
    return v == ValueSource::closed_form ? "closed-form" : "derived-oracle";
}

/// A named identity with defaults. Parameters are merged over the defaults,
/// and every key must be one the fixture declares.
struct Fixture {
    std::string id;
    std::string description;
    Params defaults;
    std::function<IdentitySpec(const Params&)> build;
    std::function<Status(const Params&)> expected;  // verified or formal-only
    ValueSource source = ValueSource::derived_oracle;
    std::string citation;
};

namespace corpus_detail {

constexpr double pi = std::numbers::pi;

inline Params merged(const Fixture& fx, const Params& overrides) {
    Params p = fx.defaults;
    for (const auto& [k, v] : overrides) {
        if (!p.count(k)) throw ParamError(fx.id + ": unknown parameter '" + k + "'");
        p[k] = v;
    }
    for (const auto& [k, v] : p)
        if (!std::isfinite(v)) throw ParamError(fx.id + ": parameter '" + k + "' must be finite");
    return p;
}

inline void require(const std::string& id, bool ok, const std::string& constraint) {
    if (!ok) throw ParamError(id + ": constraint violated: " + constraint);
}

inline CoefficientFunction ratio_g(double r, int k = 1) { return r == 1.0 ? constant(1.0, k) : geometric(r, k); }

inline IdentitySpec base(const std::string& id, TransformEntry e, CoefficientFunction g) {
    IdentitySpec s;
    s.id = id;
    s.dimension = e.dimension;
    s.transform = std::move(e);
    s.g = std::move(g);
    return s;
}

inline Status verified(const Params&) { return Status::verified; }

/// (x coth x - 1) without cancellation for small x.
inline double xcoth_minus_one(double x) {
    if (std::abs(x) < 1e-2) {
        double x2 = x * x;
        return x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0;
    }
    return x / std::tanh(x) - 1.0;
}

inline std::vector<Fixture> build_fixtures() {
    std::vector<Fixture> v;

    v.push_back({"rmt-power", "int x^{s-1} e^{-r x} dx = Gamma(s) r^{-s}", {{"s", 0.5}, {"r", 1.0}},
                 [](const Params& p) {
                     double s = p.at("s"), r = p.at("r");
                     require("rmt-power", s > 0.0, "s > 0");
                     require("rmt-power", r > 0.0, "r > 0");
                     auto spec = base("rmt-power", catalog_lookup("power", {{"s", s}}), ratio_g(r));
                     spec.closed_form = specfun::gamma(s) * std::pow(r, -s);
                     spec.closed_form_text = "Gamma(s) r^(-s)";
                     spec.tol = {1e-12, 1e-10};
                     return spec;
                 },
                 verified, ValueSource::closed_form, "Ramanujan's master theorem (Hardy, Ramanujan, 1940)"});

    v.push_back({"hermite-sum", "Laplace transform of e^{2xt - t^2} at p = 1, Hermite series in 1/p", {{"x", 0.3}},
                 [](const Params& p) {
                     double x = p.at("x");
                     auto spec = base("hermite-sum", catalog_lookup("gauss-hermite", {{"x", x}}), constant(1.0));
                     spec.closed_form = 0.5 * std::sqrt(pi) * std::exp(x * x - x + 0.25) * specfun::erfc(0.5 - x);
                     spec.closed_form_text = "sqrt(pi)/2 exp(x^2 - x + 1/4) (1 - erf(1/2 - x))";
                     spec.tol = {1e-12, 1e-8};
                     return spec;
                 },
                 [](const Params&) { return Status::formal_only; }, ValueSource::closed_form,
                 "Prudnikov, Brychkov, Marichev vol. 4, 2.2.1.5; Hermite generating function"});

    v.push_back({"prudnikov-2d-exp", "2D transform of sqrt2 (xy)^{-1/2} e^{-1/(4x^2y)} against f = e^{-r(x+y)}",
                 {{"r", std::exp(-1.0)}},
                 [](const Params& p) {
                     double r = p.at("r");
                     require("prudnikov-2d-exp", r > 0.0, "r > 0");
                     auto e = catalog_lookup("exp-of-powers-2d", {});
                     double rr[2] = {r, r};
                     cplx closed = e.H_closed(rr);
                     auto spec = base("prudnikov-2d-exp", std::move(e), ratio_g(r, 2));
                     spec.closed_form = closed;
                     spec.closed_form_text = "pi sqrt(2/(p q)) exp(-2 p^(1/2) q^(1/4)) at p = q = r";
                     spec.tol = {1e-9, 1e-6};
                     return spec;
                 },
                 verified, ValueSource::derived_oracle, "Prudnikov, Brychkov, Marichev vol. 1, 3.1.3.5"});

    v.push_back({"prudnikov-2d-cos", "int int cos(2 sqrt(a x y)) (xy)^{-1/2} e^{-x-y} = pi/sqrt(1+a)", {{"a", 1.0}},
                 [](const Params& p) {
                     double a = p.at("a");
                     require("prudnikov-2d-cos", a > 0.0, "a > 0");
                     auto spec = base("prudnikov-2d-cos", catalog_lookup("cos-sqrt-2d", {{"a", a}}), constant(1.0, 2));
                     spec.closed_form = pi / std::sqrt(1.0 + a);
                     spec.closed_form_text = "pi / sqrt(a + 1)";
                     spec.tol = {1e-9, 1e-6};
                     return spec;
                 },
                 // The binomial series in p q / a is summed at p q = 1: convergent for a >= 1.
                 [](const Params& p) { return p.at("a") >= 1.0 ? Status::verified : Status::formal_only; },
                 ValueSource::closed_form, "Prudnikov, Brychkov, Marichev vol. 1, 3.1.3.61"});

    v.push_back({"prudnikov-2d-log", "int int (2 gamma + log xy) (1+x+y)^{-p} = -2 psi(p-2)/((p-1)(p-2))",
                 {{"p", 3.0}},
                 [](const Params& p) {
                     double q = p.at("p");
                     require("prudnikov-2d-log", q >= 3.0, "p >= 3");
                     GammaProduct gp{specfun::rgamma(q), 1.0, {}, {{{1.0, 1.0}, q, 1}}};
                     auto spec = base("prudnikov-2d-log", catalog_lookup("power-log-2d", {}), gamma_product(gp, 2));
                     spec.closed_form = -2.0 * specfun::digamma(q - 2.0) / ((q - 1.0) * (q - 2.0));
                     spec.closed_form_text = "-2 psi(p-2) / ((p-1)(p-2))";
                     spec.tol = {1e-9, 1e-6};
                     return spec;
                 },
                 verified, ValueSource::closed_form, "Prudnikov, Brychkov, Marichev vol. 1 (double integrals with logarithmic kernels)"});

    v.push_back({"triple-nu", "triple integral of (xyz)^{(nu-2)/2}/(xy+xz+yz)^{(nu+1)/2} via Schwinger reduction",
                 {{"nu", 2.5}, {"p", 3.0}},
                 [](const Params& prm) {
                     double nu = prm.at("nu"), p = prm.at("p");
                     require("triple-nu", nu > 2.0 && nu < (p + 4.0) / 2.0, "2 < nu < (p+4)/2");
                     const double q = p / 2.0;
                     GammaProduct gp{specfun::rgamma(q), 1.0, {}, {{{2.0, 2.0, 2.0}, q, 1}}};
                     auto spec = base("triple-nu", catalog_lookup("triple-nu", {{"nu", nu}}), gamma_product(gp, 3));
                     const double C = 8.0 * pi * specfun::gamma(0.5 * nu + 1.0) / specfun::gamma(nu + 1.0);
                     spec.closed_form = std::pow(3.0, 2.0 - nu) * C * specfun::beta(nu - 2.0, 2.0 + q - nu);
                     spec.closed_form_text = "3^(2-nu) 8 pi Gamma(nu/2+1)/Gamma(nu+1) B(nu-2, 2+p/2-nu)";
                     spec.tol = {1e-11, 1e-8};
                     return spec;
                 },
                 verified, ValueSource::closed_form, "Prudnikov, Brychkov, Marichev vol. 1, 3.2.3.2 (Schwinger form)"});

    auto bessel = [](std::string id, std::string entry, double tol) {
        return Fixture{
            id, "Laplace transform of a product of modified Bessel functions at p = 1", {{"a", 0.5}},
            [id, entry, tol](const Params& p) {
                double a = p.at("a");
                // At a = 1 the coefficients decay like 1/(pi n) and both sides diverge logarithmically.
                require(id, a > 0.0 && a < 1.0, "0 < a < 1 (a = 1 diverges logarithmically on both sides)");
                auto e = catalog_lookup(entry, {{"a", a}});
                double one[1] = {1.0};
                cplx closed = e.H_closed(one);
                auto spec = base(id, std::move(e), constant(1.0));
                spec.closed_form = closed;
                spec.closed_form_text = "elliptic-K closed form at p = 1";
                spec.tol = {1e-12, tol};
                return spec;
            },
            verified, ValueSource::closed_form,
            "Prudnikov, Brychkov, Marichev vol. 4 (Laplace transforms of I0^2 and I0 I1)"};
    };
    v.push_back(bessel("bessel-i0sq", "bessel-I0sq", 1e-8));
    v.push_back(bessel("bessel-i0i1", "bessel-I0I1", 1e-7));

    v.push_back({"dedekind-eta", "int eta(ix) e^{-r x} dx against the Euler-polynomial series", {{"r", 0.3}},
                 [](const Params& p) {
                     double r = p.at("r");
                     require("dedekind-eta", r > 0.0, "r > 0");
                     auto e = catalog_lookup("dedekind-eta", {});
                     double rr[1] = {r};
                     cplx closed = e.H_closed(rr);
                     auto spec = base("dedekind-eta", std::move(e), ratio_g(r));
                     spec.closed_form = closed;
                     spec.closed_form_text = "sqrt(pi/r) sinh(2 sqrt(pi r/3)) / cosh(sqrt(3 pi r))";
                     spec.tol = {1e-12, 1e-8};
                     return spec;
                 },
                 // The H series has radius pi/12.
                 [](const Params& p) { return p.at("r") < pi / 12.0 ? Status::verified : Status::formal_only; },
                 ValueSource::closed_form, "Glasser (2009), Laplace transform of eta(ix)"});

    v.push_back({"bubble", "massless one-loop bubble in Schwinger parameters (Euclidean)",
                 {{"a", 1.0}, {"b", 1.0}, {"D", 3.0}, {"p2", 1.0}},
                 [](const Params& p) {
                     double a = p.at("a"), b = p.at("b"), D = p.at("D"), p2 = p.at("p2");
                     require("bubble", p2 > 0.0, "p2 > 0");
                     require("bubble", a < 0.5 * D && b < 0.5 * D, "a, b < D/2");
                     auto e = catalog_lookup("bubble-2d", {{"a", a}, {"b", b}, {"D", D}});
                     GammaProduct gp{1.0, p2, {0.0, 1.0}, {}};
                     gp.factors = {{{1.0, 0.0}, 0.5 * D, 1},
                                   {{-1.0, 1.0}, 0.0, 1},
                                   {{-1.0, 0.0}, 0.0, -1},
                                   {{0.0, 1.0}, 0.5 * D, -1}};
                     auto spec = base("bubble", std::move(e), gamma_product(gp, 2));
                     // f(u, v) = (1+u)^{-D/2} exp(-p^2 u v/(1+u)) after (x, y) = (v, u v).
                     spec.direct_f = FEvaluator([D, p2](std::span<const double> x) {
                         return cplx(std::pow(1.0 + x[0], -0.5 * D) * std::exp(-p2 * x[0] * x[1] / (1.0 + x[0])));
                     });
                     const double h = 0.5 * D;
                     spec.closed_form = std::pow(p2, h - a - b) * specfun::gamma(a + b - h) * specfun::gamma(h - a) *
                                        specfun::gamma(h - b) /
                                        (specfun::gamma(a) * specfun::gamma(b) * specfun::gamma(D - a - b));
                     spec.closed_form_text =
                         "(p^2)^(D/2-a-b) Gamma(a+b-D/2) Gamma(D/2-a) Gamma(D/2-b) / (Gamma(a) Gamma(b) Gamma(D-a-b))";
                     spec.tol = {1e-9, 1e-6};
                     return spec;
                 },
                 verified, ValueSource::closed_form, "Smirnov, Analytic Tools for Feynman Integrals (2012), one-loop massless G(a, b)"});

    auto hilbert = [](std::string id, Mode mode) {
        return Fixture{
            id,
            mode == Mode::hardy ? "int x^{nu-1} / (1 + r x) dx" : "PV int x^{nu-1} / (1 - r x) dx",
            {{"nu", 0.4}, {"r", 0.5}},
            [id, mode](const Params& p) {
                double nu = p.at("nu"), r = p.at("r");
                require(id, nu > 0.0 && nu < 1.0, "0 < nu < 1");
                require(id, r > 0.0, "r > 0");
                auto spec = base(id, catalog_lookup("power", {{"s", nu}}), geometric(r));
                spec.mode = mode;
                spec.convention = mode == Mode::hardy ? Convention::hardy : Convention::carr;
                if (mode == Mode::hardy) {
                    spec.closed_form = pi / specfun::sin_pi(nu) * std::pow(r, -nu);
                    spec.closed_form_text = "pi / sin(pi nu) r^(-nu)";
                    spec.tol = {1e-12, 1e-9};
                } else {
                    spec.closed_form = pi * specfun::cos_pi(nu) / specfun::sin_pi(nu) * std::pow(r, -nu);
                    spec.closed_form_text = "pi cot(pi nu) r^(-nu)";
                    spec.tol = {1e-10, 1e-6};
                }
                return spec;
            },
            verified, ValueSource::closed_form,
            mode == Mode::hardy ? "Hardy, Ramanujan (1940), Mellin transform of 1/(1+x)"
                                : "Carr's identity; Gradshteyn, Ryzhik 3.222.2"};
    };
    v.push_back(hilbert("hardy-power", Mode::hardy));
    v.push_back(hilbert("carr-power", Mode::carr));

    v.push_back({"cosine-power", "int x^{s-1} cos x dx = Gamma(s) cos(pi s/2)", {{"s", 0.5}},
                 [](const Params& p) {
                     double s = p.at("s");
                     require("cosine-power", s > 0.0 && s < 1.0, "0 < s < 1");
                     auto spec = base("cosine-power", catalog_lookup("cosine-power", {{"s", s}}), constant(1.0));
                     spec.mode = Mode::cosine;
                     spec.convention = Convention::even_cosine;
                     spec.closed_form = specfun::gamma(s) * specfun::cos_pi(0.5 * s);
                     spec.closed_form_text = "Gamma(s) cos(pi s/2)";
                     spec.tol = {1e-9, 1e-6};
                     return spec;
                 },
                 verified, ValueSource::closed_form, "Atale (2022), Mellin transform of the even cosine series"});

    v.push_back({"zeta-lift", "int x^{s-1} sum_m e^{-m r x} dx = Gamma(s) zeta(s) r^{-s}", {{"s", 2.0}, {"r", 1.0}},
                 [](const Params& p) {
                     double s = p.at("s"), r = p.at("r");
                     require("zeta-lift", s > 1.0, "s > 1");
                     require("zeta-lift", r > 0.0, "r > 0");
                     auto spec = base("zeta-lift", catalog_lookup("power", {{"s", s}}), ratio_g(r));
                     spec.mode = Mode::dirichlet_lift;
                     spec.closed_form = specfun::gamma(s) * specfun::zeta(s) * std::pow(r, -s);
                     spec.closed_form_text = "Gamma(s) zeta(s) r^(-s)";
                     spec.tol = {1e-12, 1e-9};
                     return spec;
                 },
                 verified, ValueSource::derived_oracle, "Atale (2022), Dirichlet-series form of the master theorem"});

    v.push_back({"psi-kernel", "Mellin transforms of psi-weighted series (cases 1-4), optionally lifted",
                 {{"case", 2.0}, {"s", 1.5}, {"lifted", 1.0}},
                 [](const Params& p) {
                     const double cs = p.at("case"), s = p.at("s"), lf = p.at("lifted");
                     require("psi-kernel", cs == 1.0 || cs == 2.0 || cs == 3.0 || cs == 4.0, "case in {1, 2, 3, 4}");
                     require("psi-kernel", lf == 0.0 || lf == 1.0, "lifted in {0, 1}");
                     require("psi-kernel", s > 0.0, "s > 0");
                     const int c = static_cast<int>(cs);
                     const bool lifted = lf == 1.0;
                     if (lifted) require("psi-kernel", c <= 2, "lifted runs exist for cases 1 and 2 only");

                     IdentitySpec spec;
                     spec.id = "psi-kernel";
                     spec.transform = catalog_lookup("power", {{"s", s}});
                     spec.mode = Mode::psi_kernel;
                     spec.psi.s = s;
                     spec.psi.lifted = lifted;
                     spec.tol = {1e-12, 1e-9};
                     quad::IntegrandHints hint;
                     switch (c) {
                         case 1:
                             spec.psi.weight = PsiCase::one;
                             spec.g = constant(1.0);
                             if (lifted) {
                                 require("psi-kernel", s > 1.0, "s > 1 for the lifted case 1");
                                 spec.direct_f = FEvaluator(
                                     [](std::span<const double> x) { return cplx(1.0 / std::expm1(x[0])); });
                                 hint.endpoint_exponent = s - 2.0;
                                 spec.closed_form = specfun::gamma(s) * specfun::zeta(s);
                                 spec.closed_form_text = "Gamma(s) zeta(s)";
                             } else {
                                 spec.direct_f =
                                     FEvaluator([](std::span<const double> x) { return cplx(std::exp(-x[0])); });
                                 hint.endpoint_exponent = s - 1.0;
                                 spec.closed_form = specfun::gamma(s);
                                 spec.closed_form_text = "Gamma(s)";
                             }
                             break;
                         case 2:
                             spec.psi.weight = PsiCase::cosine_half;
                             spec.g = gamma_product(GammaProduct{1.0, 1.0, {}, {{{1.0}, 1.0, 1}}}, 1);
                             if (lifted) {
                                 require("psi-kernel", s > 1.0 && s < 2.0, "1 < s < 2 for the lifted case 2");
                                 // sum_m 1/(1 + m^2 x^2) = (pi/x coth(pi/x) - 1)/2
                                 spec.direct_f = FEvaluator([](std::span<const double> x) {
                                     return cplx(0.5 * xcoth_minus_one(pi / x[0]));
                                 });
                                 hint.endpoint_exponent = s - 2.0;
                                 spec.closed_form = pi * specfun::zeta(s) / (2.0 * specfun::sin_pi(0.5 * s));
                                 spec.closed_form_text = "pi zeta(s) / (2 sin(pi s/2))";
                             } else {
                                 require("psi-kernel", s < 2.0, "0 < s < 2 for case 2");
                                 spec.direct_f = FEvaluator(
                                     [](std::span<const double> x) { return cplx(1.0 / (1.0 + x[0] * x[0])); });
                                 hint.endpoint_exponent = s - 1.0;
                                 spec.closed_form = pi / (2.0 * specfun::sin_pi(0.5 * s));
                                 spec.closed_form_text = "pi / (2 sin(pi s/2))";
                             }
                             break;
                         case 3:
                             // g(n) = Gamma(n+1)/Gamma((n+1)/2) gives f = -x e^{-x^2}.
                             spec.psi.weight = PsiCase::sine_half;
                             spec.g = gamma_product(GammaProduct{1.0, 1.0, {}, {{{1.0}, 1.0, 1}, {{0.5}, 0.5, -1}}}, 1);
                             spec.direct_f = FEvaluator(
                                 [](std::span<const double> x) { return cplx(-x[0] * std::exp(-x[0] * x[0])); });
                             hint.endpoint_exponent = s;
                             spec.closed_form = -0.5 * specfun::gamma(0.5 * (s + 1.0));
                             spec.closed_form_text = "-Gamma((s+1)/2) / 2";
                             break;
                         default:
                             // g(n) = Gamma((n+1)/2) gives f = x e^{-x^2/4}.
                             spec.psi.weight = PsiCase::hankel_j0;
                             spec.g = gamma_product(GammaProduct{1.0, 1.0, {}, {{{0.5}, 0.5, 1}}}, 1);
                             spec.direct_f = FEvaluator(
                                 [](std::span<const double> x) { return cplx(x[0] * std::exp(-0.25 * x[0] * x[0])); });
                             hint.endpoint_exponent = s;
                             spec.closed_form = std::pow(2.0, s) * specfun::gamma(0.5 * (s + 1.0));
                             spec.closed_form_text = "2^s Gamma((s+1)/2)";
                             break;
                     }
                     spec.lhs_hints = {hint};
                     return spec;
                 },
                 verified, ValueSource::derived_oracle, "Atale (2022), psi-weighted Mellin transforms"});

    std::sort(v.begin(), v.end(), [](const Fixture& a, const Fixture& b) { return a.id < b.id; });
    return v;
}

}  // namespace corpus_detail

/// Immutable registry, sorted by id.
inline const std::vector<Fixture>& fixtures() {
    static const std::vector<Fixture> all = corpus_detail::build_fixtures();
    return all;
}

inline std::vector<std::string> list_fixtures() {
    std::vector<std::string> ids;
    for (const auto& f : fixtures()) ids.push_back(f.id);
    return ids;
}

inline const Fixture& find_fixture(const std::string& id) {
    for (const auto& f : fixtures())
        if (f.id == id) return f;
    throw UnknownFixture("unknown fixture '" + id + "'");
}

inline IdentitySpec fixture_spec(const std::string& id, const Params& overrides = {}) {
    const auto& fx = find_fixture(id);
    return fx.build(corpus_detail::merged(fx, overrides));
}

inline Status expected_status(const std::string& id, const Params& overrides = {}) {
    const auto& fx = find_fixture(id);
    return fx.expected(corpus_detail::merged(fx, overrides));
}

inline VerificationReport run_fixture(const std::string& id, const Params& overrides = {}) {
    const auto& fx = find_fixture(id);
    auto rep = verify_identity(fx.build(corpus_detail::merged(fx, overrides)));
    if (rep.citation.empty()) rep.citation = fx.citation;
    return rep;
}

struct FixtureOutcome {
    std::string id;
    Params params;
    Status expected = Status::verified;
    std::optional<VerificationReport> report;
    std::string error;  // set when the fixture threw

    bool passed() const { return report && error.empty() && report->status == expected; }
};

struct CorpusRequest {
    std::string id;
    Params params;
};

/// Runs fixtures concurrently; outcomes come back in request order. Errors
/// are captured per fixture.
inline std::vector<FixtureOutcome> run_corpus(const std::vector<CorpusRequest>& requests, bool parallel = true) {
    auto one = [](const CorpusRequest& rq) {
        FixtureOutcome out;
        out.id = rq.id;
        out.params = rq.params;
        try {
            const auto& fx = find_fixture(rq.id);
            out.params = corpus_detail::merged(fx, rq.params);
            out.expected = fx.expected(out.params);
            out.report = run_fixture(rq.id, rq.params);
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        return out;
    };
    std::vector<FixtureOutcome> outcomes;
    outcomes.reserve(requests.size());
    if (!parallel) {
        for (const auto& rq : requests) outcomes.push_back(one(rq));
        return outcomes;
    }
    std::vector<std::future<FixtureOutcome>> jobs;
    for (const auto& rq : requests) jobs.push_back(std::async(std::launch::async, one, rq));
    for (auto& j : jobs) outcomes.push_back(j.get());
    return outcomes;
}

// ------------------------------------------------------ triple-nu Monte Carlo

/// f of the triple-nu fixture as a function of s = x + y + z:
/// F(s) = int_0^inf u^{q-1} e^{-u - s u^2} du / Gamma(q).
inline double triple_nu_f(double q, double s) {
    if (!(q > 0.0) || !(s >= 0.0)) throw DomainError("triple-nu f needs q > 0 and s >= 0");
    quad::IntegrandHints h;
    h.endpoint_exponent = q - 1.0;
    // For s > 1 the mass sits at u ~ s^{-1/2}; u = v / sqrt(s) keeps it at v ~ 1.
    const double c = s > 1.0 ? 1.0 / std::sqrt(s) : 1.0;
    const double b = s > 1.0 ? 1.0 : s;
    auto r = quad::integrate_halfline([&](double v) { return std::exp(-c * v - b * v * v + (q - 1.0) * std::log(v)); },
                                      1e-11, h);
    if (!r.converged) throw ConvergenceError("triple-nu f quadrature did not converge");
    return r.value.real() * std::pow(c, q) * specfun::rgamma(q);
}

/// F tabulated on log s in [-25, 25] (cubic B-spline, relative error below
/// 1e-8); outside, F(0) = 1 and the large-s asymptote Gamma(q/2) s^{-q/2} / (2 Gamma(q)).
class TripleNuF {
public:
    explicit TripleNuF(double q) : q_(q) {
        std::vector<double> v;
        for (int i = 0; i <= steps; ++i) v.push_back(std::log(triple_nu_f(q, std::exp(lo + i * step))));
        spline_ = std::make_shared<const Spline>(v.begin(), v.end(), lo, step);
    }

    double operator()(double s) const {
        if (s <= 0.0) return 1.0;
        double t = std::log(s);
        if (t < lo) return 1.0;
        if (t > hi) return std::exp(specfun::log_gamma(0.5 * q_) - specfun::log_gamma(q_) - 0.5 * q_ * t) / 2.0;
        return std::exp((*spline_)(t));
    }

private:
    using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
    static constexpr double lo = -25.0, hi = 25.0, step = 0.02;
    static constexpr int steps = 2500;
    double q_;
    std::shared_ptr<const Spline> spline_;
};

/// Direct 3D Monte Carlo of int h f over [0, inf)^3 for the triple-nu
/// fixture. Each axis is mapped by x = expm1(xi)^7 with xi ~ Exp(1/2): the
/// power tames the variance at the axes and the origin, the exponential the
/// x^{-3/2} radial tail. Deterministic in (samples, seed).
inline quad::McResult triple_nu_mc(double nu, double p, std::size_t samples, std::uint64_t seed, unsigned threads = 0) {
    corpus_detail::require("triple-nu", nu > 2.0 && nu < (p + 4.0) / 2.0, "2 < nu < (p+4)/2");
    constexpr int m = 7;
    const TripleNuF F(0.5 * p);
    auto integrand = [nu, &F](std::span<const double> xi) {
        std::array<double, 3> x{};
        double jac = 1.0;
        for (int a = 0; a < 3; ++a) {
            double e = std::expm1(xi[a]);
            x[a] = std::pow(e, m);
            jac *= m * std::pow(e, m - 1) * (e + 1.0);
        }
        // Underflow at the origin or overflow far out: the mapped weight there is 0.
        if (jac == 0.0 || !std::isfinite(jac) || x[0] * x[1] * x[2] == 0.0) return 0.0;
        double h = std::pow(x[0] * x[1] * x[2], 0.5 * (nu - 2.0)) /
                   std::pow(x[0] * x[1] + x[0] * x[2] + x[1] * x[2], 0.5 * (nu + 1.0));
        if (!std::isfinite(h)) return 0.0;
        return h * F(x[0] + x[1] + x[2]) * jac;
    };
    return quad::integrate_mc(integrand, {0.5, 0.5, 0.5}, samples, seed, threads);
}

}  // namespace opcalc
