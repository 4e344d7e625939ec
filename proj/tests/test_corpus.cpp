#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "opcalc/corpus.hpp"

using namespace opcalc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("list_fixtures", "[corpus]") {
    auto ids = list_fixtures();
    CHECK(ids.size() == 15);
    CHECK(contains(ids, "bubble"));
    CHECK(contains(ids, "psi-kernel"));
    for (const char* id : {"rmt-power", "hermite-sum", "prudnikov-2d-exp", "prudnikov-2d-cos", "prudnikov-2d-log",
                           "triple-nu", "bessel-i0sq", "bessel-i0i1", "dedekind-eta", "bubble", "hardy-power",
                           "carr-power", "cosine-power", "zeta-lift", "psi-kernel"})
        CHECK(contains(ids, id));
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    for (const auto& f : fixtures()) {
        CHECK_FALSE(f.citation.empty());
        auto st = f.expected(f.defaults);
        CHECK((st == Status::verified || st == Status::formal_only));
    }
}

TEST_CASE("run_fixture examples", "[corpus]") {
    auto log3 = run_fixture("prudnikov-2d-log", {{"p", 3.0}});
    CHECK(log3.status == Status::verified);
    CHECK_THAT(log3.lhs.value.real(), WithinAbs(std::numbers::egamma, 1e-5));
    CHECK_THAT(log3.rhs.value.real(), WithinAbs(std::numbers::egamma, 1e-10));

    auto z = run_fixture("zeta-lift", {{"s", 2.0}});
    CHECK(z.status == Status::verified);
    CHECK_THAT(z.lhs.value.real(), WithinRel(pi * pi / 6.0, 1e-9));

    auto h = run_fixture("hermite-sum", {{"x", 0.3}});
    CHECK(h.status == Status::formal_only);
    REQUIRE(h.closed_rel_disc);
    CHECK(*h.closed_rel_disc <= 1e-8);
}

TEST_CASE("run_fixture errors", "[corpus]") {
    CHECK_THROWS_AS(run_fixture("no-such-fixture"), UnknownFixture);
    CHECK_THROWS_AS(run_fixture("triple-nu", {{"nu", 3.6}, {"p", 3.0}}), ParamError);
    CHECK_THROWS_AS(run_fixture("triple-nu", {{"nu", 2.0}}), ParamError);
    CHECK_THROWS_AS(run_fixture("bessel-i0sq", {{"a", 1.0}}), ParamError);
    CHECK_THROWS_AS(run_fixture("bessel-i0i1", {{"a", 1.0}}), ParamError);
    CHECK_THROWS_AS(run_fixture("prudnikov-2d-log", {{"p", 2.0}}), ParamError);
    CHECK_THROWS_AS(run_fixture("rmt-power", {{"t", 1.0}}), ParamError);
    CHECK_THROWS_AS(run_fixture("psi-kernel", {{"case", 3.0}, {"lifted", 1.0}, {"s", 0.5}}), ParamError);
    try {
        run_fixture("triple-nu", {{"nu", 3.6}, {"p", 3.0}});
    } catch (const ParamError& e) {
        CHECK(std::string(e.what()).find("2 < nu < (p+4)/2") != std::string::npos);
    }
}

TEST_CASE("every fixture passes with its expected status", "[corpus][property]") {
    std::vector<CorpusRequest> rq;
    for (const auto& id : list_fixtures()) rq.push_back({id, {}});
    auto out = run_corpus(rq);
    REQUIRE(out.size() == rq.size());
    for (const auto& o : out) {
        INFO(o.id << " " << o.error);
        REQUIRE(o.report);
        INFO("status " << to_string(o.report->status) << " rel " << o.report->rel_disc);
        CHECK(o.passed());
        // Status soundness.
        if (o.report->status == Status::verified) CHECK(o.report->rhs.classification == Classification::converged);
        if (o.report->status == Status::formal_only)
            CHECK(o.report->rhs.classification == Classification::formal_divergent);
    }
}

TEST_CASE("fixture variants", "[corpus][property]") {
    SECTION("dedekind eta") {
        auto d3 = run_fixture("dedekind-eta");
        CHECK(d3.status == Status::formal_only);
        // The regularized RHS still reproduces the transform.
        CHECK_THAT(d3.rhs.value.real(), WithinRel(d3.lhs.value.real(), 1e-6));
        CHECK(run_fixture("dedekind-eta", {{"r", 0.2}}).status == Status::verified);
        auto d1 = run_fixture("dedekind-eta", {{"r", 1.0}});
        CHECK(d1.status == Status::formal_only);
        CHECK(d1.rhs.classification == Classification::formal_divergent);
    }
    SECTION("psi-kernel cases") {
        struct Case {
            double c, s, lifted;
        };
        for (auto k : {Case{1, 2.0, 1}, Case{1, 3.5, 1}, Case{1, 0.5, 0}, Case{2, 1.5, 1}, Case{2, 1.2, 1},
                       Case{2, 0.5, 0}, Case{3, 0.5, 0}, Case{3, 1.5, 0}, Case{4, 0.5, 0}, Case{4, 2.5, 0}}) {
            INFO("case " << k.c << " s " << k.s << " lifted " << k.lifted);
            auto r = run_fixture("psi-kernel", {{"case", k.c}, {"s", k.s}, {"lifted", k.lifted}});
            CHECK(r.status == Status::verified);
        }
    }
    SECTION("rmt-power for random s") {
        std::mt19937 rng(2024);
        std::uniform_real_distribution<double> d(0.1, 3.0);
        for (int i = 0; i < 10; ++i) {
            double s = d(rng);
            auto r = run_fixture("rmt-power", {{"s", s}});
            INFO("s = " << s);
            CHECK(r.status == Status::verified);
            CHECK_THAT(r.lhs.value.real(), WithinRel(std::tgamma(s), 1e-9));
        }
    }
    SECTION("bubble parameter sets") {
        CHECK(run_fixture("bubble").status == Status::verified);
        CHECK(run_fixture("bubble", {{"a", 1.2}, {"b", 1.1}, {"D", 3.0}, {"p2", 2.0}}).status == Status::verified);
    }
    SECTION("prudnikov-2d-cos below a = 1 is formal") {
        CHECK(expected_status("prudnikov-2d-cos", {{"a", 0.5}}) == Status::formal_only);
        CHECK(run_fixture("prudnikov-2d-cos", {{"a", 0.5}}).status == Status::formal_only);
    }
}

TEST_CASE("parallel and sequential runs agree exactly", "[corpus]") {
    std::vector<CorpusRequest> rq{{"rmt-power", {}}, {"hardy-power", {}}, {"zeta-lift", {{"s", 3.5}}}, {"bogus", {}}};
    auto a = run_corpus(rq, true);
    auto b = run_corpus(rq, false);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == rq[i].id);
        CHECK(a[i].error == b[i].error);
        if (a[i].report) {
            CHECK(a[i].report->lhs.value == b[i].report->lhs.value);
            CHECK(a[i].report->rhs.value == b[i].report->rhs.value);
        }
    }
    CHECK_FALSE(a[3].passed());
    CHECK(a[3].error.find("unknown fixture") != std::string::npos);
}
