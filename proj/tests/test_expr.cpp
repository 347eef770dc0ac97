// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Expression DSL: grammar round-trips through the renderer, evaluation is
// identical across scalar levels, AD partials match central differences, and
// the two spellings of reciprocal powers agree on the positive axis.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lcskit/expr.hpp"
#include "lcskit/field.hpp"

using namespace lcskit;

namespace {

const std::vector<std::string> kNames{"q1", "p1"};

double evalAt(const dsl::Expression& e, double q1, double p1,
              std::optional<double> t = {}) {
    EvalCtx<D0> ctx;
    ctx.coords = {q1, p1};
    if (t) ctx.t = *t;
    return e.eval(ctx);
}

// Random grammar-valid expression strings. Validity is by construction;
// structural comparison happens on the parsed trees, so redundant parentheses
// in the generated text are harmless.
std::string randomExpr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 7);
    std::uniform_int_distribution<int> smallInt(0, 4);
    std::uniform_real_distribution<double> lit(0.0, 10.0);
    switch (pick(rng)) {
        case 0: {
            double v = std::floor(lit(rng) * 100.0) / 100.0;
            return dsl::detail::renderNumber(v);
        }
        case 1: return "q1";
        case 2: return rng() % 2 == 0 ? "p1" : "t";
        case 3: return "-(" + randomExpr(rng, depth - 1) + ")";
        case 4: {
            const char* ops[] = {" + ", " - ", "*", "/"};
            return "(" + randomExpr(rng, depth - 1) + ")" + ops[rng() % 4] + "(" +
                   randomExpr(rng, depth - 1) + ")";
        }
        case 5: {
            const char* fns[] = {"exp", "sin", "cos"};
            return std::string(fns[rng() % 3]) + "(" + randomExpr(rng, depth - 1) + ")";
        }
        case 6:
            return "(" + randomExpr(rng, depth - 1) + ")^" +
                   std::to_string(smallInt(rng));
        default:
            return "(" + randomExpr(rng, depth - 1) + ")^(" +
                   randomExpr(rng, depth - 1) + ")";
    }
}

}  // namespace

TEST_CASE("parse respects precedence and associativity") {
    CHECK(evalAt(dsl::parse("2 + 3*4", kNames), 0, 0) == 14.0);
    CHECK_THAT(evalAt(dsl::parse("2^3^2", kNames), 0, 0),
               Catch::Matchers::WithinRel(512.0, 1e-12));  // right-associative
    CHECK(evalAt(dsl::parse("-2^2", kNames), 0, 0) == -4.0);    // minus binds looser
    CHECK(evalAt(dsl::parse("6/3/2", kNames), 0, 0) == 1.0);
    CHECK(evalAt(dsl::parse("2 - 3 - 4", kNames), 0, 0) == -5.0);
    CHECK(evalAt(dsl::parse("(-2)^3", kNames), 0, 0) == -8.0);
    CHECK(evalAt(dsl::parse("2^-2", kNames), 0, 0) == 0.25);
    CHECK_THAT(evalAt(dsl::parse("2^0.5", kNames), 0, 0),
               Catch::Matchers::WithinRel(std::sqrt(2.0), 1e-15));
    CHECK(evalAt(dsl::parse("1.5e-3", kNames), 0, 0) == 1.5e-3);
    CHECK(evalAt(dsl::parse("t*q1 + p1", kNames), 2.0, 3.0, 5.0) == 13.0);
}

TEST_CASE("render then parse is structurally the identity") {
    std::mt19937 rng(20260814);
    for (int i = 0; i < 400; ++i) {
        std::string s = randomExpr(rng, 4);
        dsl::Expression p1 = dsl::parse(s, kNames);
        dsl::Expression p2 = dsl::parse(p1.render(), kNames);
        INFO("source: " << s << "\nrendered: " << p1.render());
        CHECK(structurallyEqual(p1, p2));
        CHECK(p1.render() == p2.render());
    }
}

TEST_CASE("curated renderer cases keep grouping through a round trip") {
    for (const char* s : {"q1 + (p1 - 1) - 2", "q1 - (p1 - 1)", "q1/(p1*q1)",
                          "(q1 + p1)^2", "2^(q1 + 1)", "-(q1 + p1)", "q1*(-(p1))",
                          "exp(-(q1))*sin(p1)", "(q1^2)^3", "1/(1/(1/p1))"}) {
        dsl::Expression p1 = dsl::parse(s, kNames);
        dsl::Expression p2 = dsl::parse(p1.render(), kNames);
        INFO("source: " << s << "\nrendered: " << p1.render());
        CHECK(structurallyEqual(p1, p2));
    }
}

TEST_CASE("evaluation over duals agrees with doubles on the primal exactly") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> pt(0.3, 1.7);
    for (int i = 0; i < 200; ++i) {
        std::string s = randomExpr(rng, 3);
        dsl::Expression e = dsl::parse(s, kNames);
        EvalCtx<D0> c0;
        c0.coords = {pt(rng), pt(rng)};
        c0.t = pt(rng);
        EvalCtx<D1> c1;
        c1.coords = {D1(c0.coords[0], 1.0), D1(c0.coords[1], 0.5)};
        c1.t = D1(*c0.t, 0.25);
        double v0;
        try {
            v0 = e.eval(c0);
        } catch (const DomainError&) {
            CHECK_THROWS_AS(e.eval(c1), DomainError);  // both levels refuse together
            continue;
        }
        if (!std::isfinite(v0)) continue;  // overflow from stacked powers carries no signal
        CHECK(e.eval(c1).val == v0);
    }
}

TEST_CASE("AD partials of expressions match central differences") {
    auto chart = Chart::make({"a", "b"});
    const double h = 1e-6;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> pt(0.2, 2.0);  // margin 0.1 from every singularity
    for (const char* s :
         {"a^2*b", "exp(a*b)/(1 + a^2)", "sin(a)*cos(b)", "sqrt(a + b)",
          "ln(a + 1)*b^3", "a^-2 + b^0.5", "(a + b)/(a*b)", "exp(sin(a*b))"}) {
        ScalarField f = parseField(chart, s);
        ScalarField da = partialField(f, 0);
        ScalarField db = partialField(f, 1);
        for (int i = 0; i < 20; ++i) {
            std::vector<double> x{pt(rng), pt(rng)};
            std::vector<double> ap{x[0] + h, x[1]}, am{x[0] - h, x[1]};
            std::vector<double> bp{x[0], x[1] + h}, bm{x[0], x[1] - h};
            double fdA = (f.evalAt(ap) - f.evalAt(am)) / (2.0 * h);
            double fdB = (f.evalAt(bp) - f.evalAt(bm)) / (2.0 * h);
            INFO("expr: " << s << " at (" << x[0] << ", " << x[1] << ")");
            CHECK_THAT(da.evalAt(x), Catch::Matchers::WithinRel(fdA, 1e-5));
            CHECK_THAT(db.evalAt(x), Catch::Matchers::WithinRel(fdB, 1e-5));
        }
    }
}

TEST_CASE("time partials differentiate the t binding") {
    auto chart = Chart::make({"a"});
    ScalarField f = parseField(chart, "t^2*a");
    ScalarField dt = partialField(f, kTimeSlot);
    std::vector<double> x{3.0};
    CHECK_THAT(dt.evalAt(x, 0.7), Catch::Matchers::WithinRel(2.0 * 0.7 * 3.0, 1e-14));
}

TEST_CASE("reciprocal power spellings agree on the positive axis") {
    fix::ScalingFixture sys;
    ScalarField viaLog = parseField(sys.chart, "exp(-ln(p1))");
    ScalarField viaDiv = parseField(sys.chart, "1/p1");
    for (const auto& p : fix::samplePoints(sys.chart, 100)) {
        CHECK_THAT(viaLog.evalAt(p), Catch::Matchers::WithinRel(viaDiv.evalAt(p), 1e-14));
    }
}

TEST_CASE("parse failures carry a location and a name") {
    try {
        dsl::parse("q1 + ", kNames);
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line == 1);
        CHECK(e.column >= 5);
    }
    try {
        dsl::parse("q1 + warp", kNames);
        FAIL("expected an unknown identifier error");
    } catch (const UnknownIdentifierError& e) {
        CHECK(e.name == "warp");
    }
    CHECK_THROWS_AS(dsl::parse("(q1", kNames), SyntaxError);
    CHECK_THROWS_AS(dsl::parse("sin q1", kNames), UnknownIdentifierError);
    CHECK_THROWS_AS(dsl::parse("q1 1", kNames), SyntaxError);
    // The reserved time identifier is rejected on charts that own t already.
    CHECK_THROWS_AS(dsl::parse("t + q1", kNames, /*allowTime=*/false),
                    UnknownIdentifierError);
}

TEST_CASE("field parsing marks time dependence") {
    auto chart = Chart::make({"a"});
    CHECK(parseField(chart, "t*a").timeDependent());
    CHECK_FALSE(parseField(chart, "a^2").timeDependent());
}
