// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Forward-mode kernel: nested duals are exact derivatives, the linear solver
// round-trips well-conditioned systems, and AD agrees with central finite
// differences on every elementary the DSL can emit.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "lcskit/dual.hpp"
#include "lcskit/eval.hpp"
#include "lcskit/linalg.hpp"

using namespace lcskit;
using ad::Dual;

TEST_CASE("dual arithmetic propagates first derivatives exactly") {
    // f(x) = x^2 at x = 3: f' = 6
    D1 x(3.0, 1.0);
    D1 f = x * x;
    CHECK(f.val == 9.0);
    CHECK(f.dot == 6.0);

    // quotient rule: (x / (1 + x))' = 1 / (1+x)^2
    D1 q = x / (1.0 + x);
    CHECK_THAT(q.dot, Catch::Matchers::WithinAbs(1.0 / 16.0, 1e-15));
}

TEST_CASE("nested duals compute exact mixed second partials") {
    // f(x, y) = x^2 y: d2f/dxdy = 2x, exact at every sample point.
    for (double xv : {-2.0, -0.5, 0.7, 1.0, 3.25}) {
        for (double yv : {-1.0, 0.25, 2.0}) {
            D2 x(D1(xv, 1.0), D1(0.0, 0.0));  // seed the outer level in x
            D2 y(D1(yv, 0.0), D1(1.0, 0.0));  // seed the inner level in y
            D2 f = x * x * y;
            CHECK(f.dot.dot == 2.0 * xv);  // machine precision, no tolerance
        }
    }
}

TEST_CASE("three nesting levels give exact third derivatives") {
    // f(x) = x^4: f''' = 24x
    double xv = 1.3;
    D3 x(D2(D1(xv, 1.0), D1(1.0, 0.0)), D2(D1(1.0, 0.0), D1(0.0, 0.0)));
    D3 f = x * x * x * x;
    CHECK_THAT(f.dot.dot.dot, Catch::Matchers::WithinRel(24.0 * xv, 1e-14));
}

TEST_CASE("comparisons consult only the primal part") {
    D1 a(1.0, 100.0);
    D1 b(2.0, -100.0);
    CHECK(a < b);
    CHECK(b > a);
    CHECK(D1(1.0, 5.0) == D1(1.0, -5.0));
}

TEST_CASE("solveLinear composed with multiplication is the identity") {
    std::mt19937 rng(20260814);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
        ad::SquareMatrix<double> a(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) a(i, j) = entry(rng);
            a(i, i) += static_cast<double>(n);  // diagonal dominance bounds the condition number
        }
        std::vector<double> x0(n);
        for (auto& v : x0) v = entry(rng);
        std::vector<double> b(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) b[i] += a(i, j) * x0[j];
        auto x = ad::solveLinear(a, b);
        for (std::size_t i = 0; i < n; ++i)
            CHECK_THAT(x[i], Catch::Matchers::WithinRel(x0[i], 1e-12));
    }
}

TEST_CASE("solveLinear round-trips a condition number near 1e4") {
    // 4x4 Hilbert matrix: cond ~ 1.5e4, well inside the 1e6 contract.
    const std::size_t n = 4;
    ad::SquareMatrix<double> a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = 1.0 / static_cast<double>(i + j + 1);
    std::vector<double> x0{1.0, -2.0, 3.0, -4.0};
    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b[i] += a(i, j) * x0[j];
    auto x = ad::solveLinear(a, b);
    for (std::size_t i = 0; i < n; ++i)
        CHECK_THAT(x[i], Catch::Matchers::WithinRel(x0[i], 1e-10));
}

TEST_CASE("solveLinear rejects singular systems") {
    ad::SquareMatrix<double> a(2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 2.0;
    a(1, 1) = 4.0;
    CHECK_THROWS_AS(ad::solveLinear(a, std::vector<double>{1.0, 1.0}), SingularMatrixError);
}

TEST_CASE("solveLinear propagates derivatives through the solve") {
    // A(s) x = b with A = [[2+s, 1], [1, 3]], b = (1, 2).
    // dx/ds from AD must match a central difference of the closed solve.
    auto solveAt = [](double s) {
        ad::SquareMatrix<double> a(2);
        a(0, 0) = 2.0 + s;
        a(0, 1) = 1.0;
        a(1, 0) = 1.0;
        a(1, 1) = 3.0;
        return ad::solveLinear(a, std::vector<double>{1.0, 2.0});
    };
    const double s0 = 0.4, h = 1e-6;
    auto plus = solveAt(s0 + h);
    auto minus = solveAt(s0 - h);

    ad::SquareMatrix<D1> a(2);
    a(0, 0) = D1(2.0 + s0, 1.0);
    a(0, 1) = D1(1.0);
    a(1, 0) = D1(1.0);
    a(1, 1) = D1(3.0);
    auto x = ad::solveLinear(a, std::vector<D1>{D1(1.0), D1(2.0)});
    for (std::size_t i = 0; i < 2; ++i) {
        double fd = (plus[i] - minus[i]) / (2.0 * h);
        CHECK_THAT(x[i].dot, Catch::Matchers::WithinRel(fd, 1e-5));
    }
}

TEST_CASE("AD first derivatives match central differences on elementaries") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> pt(0.2, 2.0);
    auto f = [](auto x) {
        using std::cos;
        using std::exp;
        using std::log;
        using std::sin;
        using std::sqrt;
        return exp(sin(x)) + log(1.0 + x * x) * cos(x) - sqrt(x) / (1.0 + x) +
               ad::ipow(x, 3) / 7.0 + ad::checkedDiv(decltype(x)(1.0), x);
    };
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        double xv = pt(rng);
        double fd = (f(xv + h) - f(xv - h)) / (2.0 * h);
        D1 y = f(D1(xv, 1.0));
        CHECK_THAT(y.dot, Catch::Matchers::WithinRel(fd, 1e-5));
    }
}

TEST_CASE("domain guards reject invalid elementary arguments") {
    CHECK_THROWS_AS(log(D1(-1.0, 1.0)), DomainError);
    CHECK_THROWS_AS(sqrt(D1(-1.0, 1.0)), DomainError);
    CHECK_THROWS_AS(ad::checkedDiv(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ad::ipow(D1(0.0, 1.0), -2), DomainError);
}

TEST_CASE("seeding past the deepest dual level raises NestingOverflow") {
    EvalCtx<D3> ctx;
    ctx.coords = {D3(1.0), D3(2.0)};
    CHECK_THROWS_AS(seedDirection(ctx, 0), NestingOverflowError);
}
