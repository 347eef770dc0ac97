// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared worked-example systems used across the test suite. Each builder
// returns a fresh structure with a finite sampling box placed well away from
// the chart's exclusion sets so Halton certification points are admissible.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lcskit/chart.hpp"
#include "lcskit/field.hpp"
#include "lcskit/lcs.hpp"

namespace lcskit::fix {

inline KForm buildForm(const ChartPtr& chart, std::size_t degree,
                       const std::vector<std::pair<std::vector<std::string>, std::string>>&
                           coeffs) {
    KForm w(chart, degree);
    for (const auto& [names, expr] : coeffs) {
        IndexSet idx;
        for (const auto& n : names) idx.push_back(chart->indexOf(n));
        w.setCoefficient(std::move(idx), parseField(chart, expr));
    }
    return w;
}

inline VectorField buildField(const ChartPtr& chart,
                              const std::vector<std::string>& comps) {
    std::vector<ScalarField> fields;
    for (const auto& e : comps) fields.push_back(parseField(chart, e));
    return VectorField(chart, fields);
}

// Twisted Kepler system: planar two-center Hamiltonian on a conformal
// structure scaled by 1/p1, carrying a dilation scaling symmetry of degree
// (-1, 1) whose Lee-form contraction is the constant 1/2.
struct ScalingFixture {
    ChartPtr chart;
    LcsStructure structure;
    ScalarField h;
    VectorField dilation;

    ScalingFixture()
        : chart(makeChart()),
          structure(chart,
                    buildForm(chart, 2,
                              {{{"q1", "p1"}, "1/p1"}, {{"q2", "p2"}, "1/p1"}}),
                    buildForm(chart, 1, {{{"p1"}, "-1/p1"}})),
          h(parseField(chart, "(p1^2 + p2^2)/2 - 1/q1 - 1/q2")),
          dilation(buildField(chart, {"q1", "q2", "-p1/2", "-p2/2"})) {}

  private:
    static ChartPtr makeChart() {
        auto c = Chart::make({"q1", "q2", "p1", "p2"});
        c->setDomain(c->indexOf("p1"), 0.0, Chart::kInf);
        c->addExclusion(dsl::parse("q1", c->namesPtr()));
        c->addExclusion(dsl::parse("q2", c->namesPtr()));
        c->setSampleBox(c->indexOf("q1"), 0.4, 1.6);
        c->setSampleBox(c->indexOf("q2"), 0.4, 1.6);
        c->setSampleBox(c->indexOf("p1"), 0.5, 2.0);
        c->setSampleBox(c->indexOf("p2"), 0.5, 1.5);
        return c;
    }
};

// Exponentially weighted dissipation system: H = z + y/w on a structure with
// exact Lee form dx. The coordinate w is a dissipated quantity whose
// Hamiltonian field generates canonical transformations.
struct DissipationFixture {
    ChartPtr chart;
    LcsStructure structure;
    ScalarField h;
    ScalarField depth;  // the dissipated coordinate w

    DissipationFixture()
        : chart(makeChart()),
          structure(chart,
                    buildForm(chart, 2,
                              {{{"x", "y"}, "exp(x)"}, {{"w", "z"}, "exp(x)"}}),
                    buildForm(chart, 1, {{{"x"}, "1"}})),
          h(parseField(chart, "z + y/w")),
          depth(parseField(chart, "w")) {}

  private:
    static ChartPtr makeChart() {
        auto c = Chart::make({"x", "y", "w", "z"});
        c->addExclusion(dsl::parse("w", c->namesPtr()));
        c->setSampleBox(c->indexOf("x"), -0.75, 0.75);
        c->setSampleBox(c->indexOf("y"), 0.5, 2.0);
        c->setSampleBox(c->indexOf("w"), 0.5, 2.0);
        c->setSampleBox(c->indexOf("z"), 0.5, 2.0);
        return c;
    }
};

// Cotangent exponential system: omega built from the tautological one-form
// twisted by theta = q1 dq1. The vertical shift field has degree (1, 0) for
// H = exp(q2) and degree (0, 0) for H = exp(q1).
struct CotangentFixture {
    ChartPtr chart;
    LcsStructure structure;
    ScalarField h;          // exp(q2)
    ScalarField hNeutral;   // exp(q1)
    VectorField shift;      // d/dq2
    VectorField fiberScaling;

    CotangentFixture()
        : chart(makeChart()),
          structure(chart,
                    buildForm(chart, 2, {{{"q1", "q2"}, "-q1*p2"},
                                         {{"q1", "p1"}, "-1"},
                                         {{"q2", "p2"}, "-1"}}),
                    buildForm(chart, 1, {{{"q1"}, "q1"}})),
          h(parseField(chart, "exp(q2)")),
          hNeutral(parseField(chart, "exp(q1)")),
          shift(buildField(chart, {"0", "1", "0", "0"})),
          fiberScaling(buildField(chart, {"0", "0", "p1", "p2 + q2*exp(q1^2/2)"})) {}

  private:
    static ChartPtr makeChart() { return Chart::make({"q1", "q2", "p1", "p2"}); }
};

inline std::vector<std::vector<double>> samplePoints(const ChartPtr& chart,
                                                     std::size_t count,
                                                     std::uint64_t seed = 42) {
    return makeSamples(*chart, SampleSpec{count, seed, {}}).points;
}

}  // namespace lcskit::fix
