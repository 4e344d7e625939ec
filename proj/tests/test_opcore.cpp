#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "opcalc/opcore.hpp"
#include "opcalc/quad.hpp"

using namespace opcalc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double egamma = std::numbers::egamma;

double quad_halfline(const std::function<double(double)>& f) {
    auto r = quad::integrate_halfline(f, 1e-13);
    REQUIRE(r.converged);
    return r.value.real();
}

// I0 by its power series, independent of specfun.
double i0_series(double x) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= (x / 2.0) * (x / 2.0) / (double(k) * k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

CoefficientFunction half_gamma_sum() {
    return gamma_product({0.5, 1.0, {}, {{{1.0, 1.0}, 3.0, 1}}}, 2);
}

OperatorSeries central_binomial_series(double a) {
    OperatorSeries s;
    s.dimension = 1;
    s.term = [a](std::size_t n) -> std::optional<OperatorTerm> {
        double c = std::exp(2.0 * (std::lgamma(2.0 * n + 1.0) - 2.0 * std::lgamma(n + 1.0)) +
                            2.0 * n * std::log(a / 4.0));
        return OperatorTerm{c, {Exponent(-2 * static_cast<std::int64_t>(n) - 1)}, {0}};
    };
    return s;
}

}  // namespace

TEST_CASE("eval_coefficient examples", "[opcore]") {
    CHECK(eval_coefficient(constant(1.0), Point{-0.5}) == cplx(1.0));
    CHECK_THAT(eval_coefficient(half_gamma_sum(), Point{-1.0, -1.0}).real(), WithinRel(0.5, 1e-15));
    CHECK_THAT(eval_coefficient(geometric(0.3), Point{2.0}).real(), WithinRel(0.09, 1e-15));
}

TEST_CASE("eval_coefficient errors", "[opcore]") {
    auto g = half_gamma_sum();
    CHECK_THROWS_AS(eval_coefficient(g, Point{-2.0, -1.0}), PoleError);
    CHECK_THROWS_AS(eval_coefficient(g, Point{-2.0 + 1e-13, -1.0}), PoleError);
    CHECK_NOTHROW(eval_coefficient(g, Point{-2.0 + 1e-9, -1.0}));
    CHECK_THROWS_AS(eval_coefficient(g, Point{1.0}), DimensionError);
    try {
        eval_coefficient(g, Point{-2.5, -0.5});
        FAIL("expected PoleError");
    } catch (const PoleError& e) {
        CHECK(std::string(e.what()).find("Gamma(m+n+3)") != std::string::npos);
    }
}

TEST_CASE("denominator gammas vanish at their poles", "[opcore]") {
    // 1 / Gamma(-n) is zero at nonnegative integers n.
    auto g = gamma_product({1.0, 1.0, {}, {{{-1.0}, 0.0, -1}}}, 1);
    CHECK(g.poles.empty());
    CHECK(eval_coefficient(g, Point{2.0}) == cplx(0.0));
    CHECK_THAT(eval_coefficient(g, Point{-0.5}).real(), WithinRel(1.0 / std::sqrt(pi), 1e-14));
}

TEST_CASE("gamma products survive overflowing factors", "[opcore]") {
    // Gamma(t + 200) / Gamma(t + 199) = t + 199.
    auto g = gamma_product({1.0, 1.0, {}, {{{1.0}, 200.0, 1}, {{1.0}, 199.0, -1}}}, 1);
    CHECK_THAT(eval_coefficient(g, Point{0.5}).real(), WithinRel(199.5, 1e-11));
}

TEST_CASE("diff_coefficient examples", "[opcore]") {
    auto g = half_gamma_sum();
    CHECK_THAT(diff_coefficient(g, {1, 0}, Point{-1.0, -1.0}).real(), WithinRel(-egamma / 2.0, 1e-13));
    CHECK(diff_coefficient(constant(3.0), {2}, Point{0.7}) == cplx(0.0));
    // Central-difference oracle on 0.5^t.
    double h = 1e-5;
    double oracle = (std::pow(0.5, h) - std::pow(0.5, -h)) / (2.0 * h);
    CHECK_THAT(diff_coefficient(geometric(0.5), {1}, Point{0.0}).real(), WithinRel(oracle, 1e-9));
    CHECK_THAT(diff_coefficient(geometric(0.5), {1}, Point{0.0}).real(), WithinRel(-0.6931471805599453, 1e-14));
}

TEST_CASE("second-order analytic derivatives", "[opcore]") {
    // d^2/dt^2 Gamma(t) at t = 1 is psi'(1) + psi(1)^2 = pi^2/6 + gamma^2.
    auto g = gamma_product({1.0, 1.0, {}, {{{1.0}, 0.0, 1}}}, 1);
    CHECK_THAT(diff_coefficient(g, {2}, Point{1.0}).real(), WithinRel(pi * pi / 6.0 + egamma * egamma, 1e-13));
}

TEST_CASE("numeric derivative fallback", "[opcore]") {
    auto sq = custom(1, [](std::span<const cplx> t) { return t[0] * t[0] * t[0]; });
    CHECK_THAT(diff_coefficient(sq, {1}, Point{2.0}).real(), WithinRel(12.0, 1e-12));
    CHECK_THAT(diff_coefficient(sq, {2}, Point{2.0}).real(), WithinRel(12.0, 1e-10));
    auto mixed = custom(2, [](std::span<const cplx> t) { return std::exp(t[0] * t[1]); });
    // d2/dxdy e^{xy} = (1 + xy) e^{xy}
    CHECK_THAT(diff_coefficient(mixed, {1, 1}, Point{0.3, 0.5}).real(), WithinRel(1.15 * std::exp(0.15), 1e-8));
    auto noisy = custom(1, [](std::span<const cplx> t) { return t[0] + 1e-6 * std::sin(1e7 * t[0].real()); });
    CHECK_THROWS_AS(diff_coefficient(noisy, {1}, Point{0.3}), NumericDerivativeError);
    CHECK_THROWS_AS(diff_coefficient(sq, {-1}, Point{0.3}), DomainError);
}

TEST_CASE("weighted coefficients", "[opcore]") {
    auto g = weighted(geometric(0.5), Weight::gamma);
    CHECK_THAT(eval_coefficient(g, Point{-0.4}).real(), WithinRel(std::tgamma(0.6) * std::pow(0.5, -0.4), 1e-14));
    CHECK_THROWS_AS(eval_coefficient(g, Point{-1.0}), PoleError);
    auto gc = weighted(geometric(0.5), Weight::gamma_cos);
    CHECK_THAT(eval_coefficient(gc, Point{-0.4}).real(),
               WithinRel(std::tgamma(0.6) * std::cos(0.4 * pi) * std::pow(0.5, -0.4), 1e-14));
    CHECK_THROWS_AS(weighted(half_gamma_sum(), Weight::gamma), DimensionError);
}

TEST_CASE("apply_operator_term examples", "[opcore]") {
    auto sq = custom(1, [](std::span<const cplx> t) { return t[0] * t[0]; });
    CHECK(apply_operator_term({1.0, {3}, {0}}, sq) == cplx(9.0));

    double oracle = quad_halfline([](double x) { return std::exp(-x) / std::sqrt(x); });
    auto v = apply_operator_term({std::sqrt(pi), {Rational(-1, 2)}, {0}}, constant(1.0));
    CHECK_THAT(v.real(), WithinRel(oracle, 1e-12));

    auto w = apply_operator_term({-1.0, {-1, -1}, {1, 0}}, half_gamma_sum());
    CHECK_THAT(w.real(), WithinRel(egamma / 2.0, 1e-13));
}

TEST_CASE("apply_operator_term reports poles", "[opcore]") {
    auto g = gamma_product({1.0, 1.0, {}, {{{1.0}, 1.0, 1}}}, 1);
    CHECK_THROWS_AS(apply_operator_term({1.0, {-1}, {0}}, g), PoleError);
    CHECK(apply_operator_term({0.0, {-1}, {0}}, g) == cplx(0.0));
    CHECK_THROWS_AS(apply_operator_term({1.0, {-1, 0}, {0, 0}}, g), DimensionError);
}

TEST_CASE("apply_operator_series examples", "[opcore]") {
    // Gamma(1/2) e^{-d/2} on g(n) = n!: f(x) = 1/(1+x).
    auto fact = gamma_product({1.0, 1.0, {}, {{{1.0}, 1.0, 1}}}, 1);
    auto single = finite_series(1, {{std::sqrt(pi), {Rational(-1, 2)}, {0}}});
    auto r = apply_operator_series(single, fact);
    CHECK(r.classification == Classification::converged);
    CHECK(r.terms_used == 1);
    double oracle = quad_halfline([](double x) { return 1.0 / (std::sqrt(x) * (1.0 + x)); });
    CHECK_THAT(r.value.real(), WithinRel(oracle, 1e-12));

    auto bessel = apply_operator_series(central_binomial_series(0.5), constant(1.0));
    CHECK(bessel.classification == Classification::converged);
    double lhs = quad_halfline([](double x) {
        double i = i0_series(x / 4.0);
        return std::exp(-x) * i * i;
    });
    CHECK_THAT(bessel.value.real(), WithinRel(lhs, 1e-11));

    OperatorSeries hermite;
    hermite.dimension = 1;
    hermite.term = [](std::size_t n) -> std::optional<OperatorTerm> {
        double x = 0.3, h0 = 1.0, h1 = 2.0 * x;
        if (n == 0) return OperatorTerm{h0, {-1}, {0}};
        for (std::size_t k = 1; k < n; ++k) {
            double h2 = 2.0 * x * h1 - 2.0 * k * h0;
            h0 = h1;
            h1 = h2;
        }
        return OperatorTerm{h1, {-static_cast<std::int64_t>(n) - 1}, {0}};
    };
    auto div = apply_operator_series(hermite, constant(1.0));
    CHECK(div.classification == Classification::formal_divergent);
    CHECK(div.terms_used > 50);
}

TEST_CASE("apply_operator_series names the failing term", "[opcore]") {
    auto g = gamma_product({1.0, 1.0, {}, {{{1.0}, 0.0, 1}}}, 1);
    auto s = finite_series(1, {{1.0, {1}, {0}}, {1.0, {0}, {0}}});
    try {
        apply_operator_series(s, g);
        FAIL("expected PoleError");
    } catch (const PoleError& e) {
        CHECK(std::string(e.what()).rfind("term 1:", 0) == 0);
    }
}

TEST_CASE("sum_series classification", "[opcore]") {
    auto harmonic_alt = [](std::size_t n) -> std::optional<cplx> { return (n % 2 ? -1.0 : 1.0) / (n + 1.0); };
    auto s = sum_series(harmonic_alt);
    CHECK(s.classification == Classification::converged);
    CHECK(s.accelerated);
    CHECK_THAT(s.value.real(), WithinRel(std::log(2.0), 1e-12));

    // Bounded alternating terms are not convergent and must not be accepted.
    auto grandi = [](std::size_t n) -> std::optional<cplx> { return n % 2 ? -1.0 : 1.0; };
    TruncationPolicy small;
    small.max_terms = 500;
    auto gr = sum_series(grandi, small);
    CHECK(gr.classification == Classification::inconclusive);
    CHECK(gr.terms_used == 500);

    auto grow = [](std::size_t n) -> std::optional<cplx> { return std::pow(2.0, double(n)); };
    CHECK(sum_series(grow).classification == Classification::formal_divergent);

    auto geo = [](std::size_t n) -> std::optional<cplx> { return std::pow(0.5, double(n)); };
    auto gs = sum_series(geo);
    CHECK(gs.classification == Classification::converged);
    CHECK_FALSE(gs.accelerated);
    CHECK_THAT(gs.value.real(), WithinRel(2.0, 1e-14));

    auto zeros = [](std::size_t) -> std::optional<cplx> { return 0.0; };
    auto zs = sum_series(zeros);
    CHECK(zs.classification == Classification::converged);
    CHECK(zs.value == cplx(0.0));
}

TEST_CASE("truncation policy validation", "[opcore]") {
    TruncationPolicy p;
    p.tail_threshold = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = {};
    p.max_terms = 0;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("convention coefficients", "[opcore]") {
    for (auto c : {Convention::ramanujan, Convention::hardy, Convention::carr, Convention::even_cosine})
        CHECK(convention_coefficient(c, 0) == 1.0);
    CHECK(convention_coefficient(Convention::ramanujan, 3) == -1.0 / 6.0);
    CHECK(convention_coefficient(Convention::hardy, 3) == -1.0);
    CHECK(convention_coefficient(Convention::carr, 3) == 1.0);
    CHECK(convention_coefficient(Convention::even_cosine, 3) == 0.0);
    CHECK(convention_coefficient(Convention::even_cosine, 2) == -0.5);
    CHECK(parse_convention("even-cosine") == Convention::even_cosine);
    CHECK_FALSE(parse_convention("laplace").has_value());
}

TEST_CASE("series_function_eval examples", "[opcore]") {
    auto e = series_function_eval(Convention::ramanujan, constant(1.0), {1.0});
    CHECK_THAT(e.value.real(), WithinRel(std::exp(-1.0), 1e-14));

    auto h = series_function_eval(Convention::hardy, geometric(0.5), {1.0});
    CHECK_THAT(h.value.real(), WithinRel(2.0 / 3.0, 1e-13));

    // g(m, n) = Gamma(m + n + 3)/2 gives f = (1 + x + y)^-3, whose series
    // only converges for x + y < 1.
    auto g = half_gamma_sum();
    CHECK_THROWS_AS(series_function_eval(Convention::ramanujan, g, {1.0, 1.0}), PolicyExhausted);
    auto inside = series_function_eval(Convention::ramanujan, g, {0.1, 0.2});
    CHECK_THAT(inside.value.real(), WithinRel(1.0 / std::pow(1.3, 3), 1e-12));
    CHECK_THROWS_AS(series_function_eval(Convention::ramanujan, g, {-0.1, 0.2}), DomainError);

    // Large x: the entire series cancels catastrophically.
    CHECK_THROWS_AS(series_function_eval(Convention::ramanujan, constant(1.0), {40.0}), ConvergenceError);
}

TEST_CASE("radius estimation", "[opcore]") {
    CHECK_THAT(estimate_radius(Convention::hardy, geometric(0.5), {1.0}), WithinRel(2.0, 1e-12));
    CHECK(estimate_radius(Convention::ramanujan, constant(1.0), {1.0}) > 50.0);
    // (1 + x + y)^-3 along the diagonal: radius 1/2.
    CHECK_THAT(estimate_radius(Convention::ramanujan, half_gamma_sum(), {1.0, 1.0}), WithinRel(0.5, 0.05));
    auto poly = custom(1, [](std::span<const cplx> t) { return specfun::rgamma(3.0 - t[0]); });
    CHECK(std::isinf(estimate_radius(Convention::carr, poly, {1.0})));
}

TEST_CASE("linearity of operator application", "[opcore][property]") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(-0.9, 2.0), cd(-3.0, 3.0);
    std::vector<CoefficientFunction> gs = {constant(1.7), geometric(0.4),
                                           gamma_product({1.0, 1.0, {}, {{{1.0}, 1.0, 1}}}, 1)};
    for (const auto& g : gs) {
        for (int i = 0; i < 20; ++i) {
            OperatorTerm t1{cd(rng), {u(rng)}, {0}};
            OperatorTerm t2{cd(rng), {u(rng)}, {i % 3 == 0 ? 1 : 0}};
            cplx separate = apply_operator_term(t1, g) + apply_operator_term(t2, g);
            cplx joint = apply_operator_series(finite_series(1, {t1, t2}), g).value;
            CHECK(std::abs(joint - separate) <= 1e-12 * std::max(1.0, std::abs(separate)));
        }
    }
}

TEST_CASE("shift composition", "[opcore][property]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.4, 1.5);
    auto g = gamma_product({2.0, 0.7, {1.0}, {{{1.0}, 1.5, 1}, {{2.0}, 3.0, -1}}}, 1);
    for (int i = 0; i < 20; ++i) {
        double a = u(rng), b = u(rng);
        cplx lhs = apply_operator_term({1.0, {a}, {0}}, shifted(g, {b}));
        cplx rhs = apply_operator_term({1.0, {a + b}, {0}}, g);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    }
}

TEST_CASE("analytic derivatives match the numeric fallback", "[opcore][property]") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-0.45, 2.5);
    std::vector<CoefficientFunction> gs = {
        half_gamma_sum(),
        gamma_product({1.0, 1.0, {}, {{{1.0, 1.0}, 5.0, 1}, {{0.0, 0.0}, 5.0, -1}}}, 2),
        gamma_product({1.5, 0.8, {0.5, 0.25}, {{{2.0, 1.0}, 1.7, 1}, {{1.0, -1.0}, 2.2, -1}}}, 2),
    };
    const std::vector<std::vector<int>> orders = {{1, 0}, {0, 1}, {1, 1}, {2, 0}};
    for (const auto& g : gs) {
        for (int i = 0; i < 20; ++i) {
            Point t{u(rng), u(rng)};
            for (const auto& beta : orders) {
                cplx a = diff_coefficient(g, beta, t);
                cplx n = numeric_derivative(g, std::span<const int>(beta), std::span<const cplx>(t));
                INFO("t = (" << t[0].real() << ", " << t[1].real() << ") beta = (" << beta[0] << "," << beta[1]
                             << ")");
                CHECK(std::abs(a - n) <= 1e-6 * std::abs(a));
            }
        }
    }
}

TEST_CASE("master theorem ground case", "[opcore][property]") {
    for (double s : {0.3, 0.5, 1.7}) {
        cplx rhs = apply_operator_term({std::tgamma(s), {-s}, {0}}, constant(1.0));
        double lhs = quad_halfline([s](double x) { return std::pow(x, s - 1.0) * std::exp(-x); });
        CHECK(std::abs(rhs.real() - lhs) <= 1e-9 * lhs);
    }
}

TEST_CASE("repeated application is bit-identical", "[opcore][property]") {
    auto a = apply_operator_series(central_binomial_series(0.5), constant(1.0));
    auto b = apply_operator_series(central_binomial_series(0.5), constant(1.0));
    CHECK(a.value == b.value);
    CHECK(a.terms_used == b.terms_used);
}
