// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Scenario execution. Dispatches each declared check to the verification
// routines and each integration to the steppers, collecting outcomes that
// report.hpp serializes. Effective settings per check: a CLI override beats a
// per-check declaration, which beats the scenario default. Exceptions inside
// one check or integration become an error outcome instead of aborting the
// run; the report then carries exit code 2.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcskit/report.hpp"
#include "lcskit/scenario.hpp"
#include "lcskit/symmetry.hpp"

namespace lcskit {

struct RunOptions {
    std::optional<double> tolerance;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline double effectiveTolerance(const Scenario& sc, const CheckSpec& spec,
                                 const RunOptions& opt) {
    if (opt.tolerance) return *opt.tolerance;
    if (spec.tolerance) return *spec.tolerance;
    return sc.tolerance;
}

inline SampleSpec effectiveSamples(const CheckSpec& spec, const RunOptions& opt) {
    SampleSpec s = spec.samples;
    if (opt.samples) s.count = *opt.samples;
    if (opt.seed) s.seed = *opt.seed;
    return s;
}

inline const std::string& refAt(const CheckSpec& spec, const std::string& key) {
    auto it = spec.refs.find(key);
    if (it == spec.refs.end())
        throw SchemaError("check '" + spec.name + "' (" + spec.type + ") needs a '" + key +
                          "' reference");
    return it->second;
}

inline std::optional<std::string> refMaybe(const CheckSpec& spec, const std::string& key) {
    auto it = spec.refs.find(key);
    if (it == spec.refs.end()) return {};
    return it->second;
}

// Hamiltonian system for a check, honoring a per-check "hamiltonian" ref.
inline HamiltonianSystem systemFor(const Scenario& sc, const CheckSpec& spec) {
    const ScalarField& h =
        spec.refs.count("hamiltonian") ? sc.scalarByName(spec.refs.at("hamiltonian"))
                                       : sc.requireHamiltonian();
    return HamiltonianSystem{sc.requireStructure(), h};
}

}  // namespace detail

inline CheckOutcome runCheck(const Scenario& sc, const CheckSpec& spec,
                             const RunOptions& opt = {}) {
    CheckOutcome oc;
    oc.spec = spec;
    const double tol = detail::effectiveTolerance(sc, spec, opt);
    const SampleSpec sspec = detail::effectiveSamples(spec, opt);
    try {
        // Checks over the extended phase space (and time-dependent scalar
        // laws) draw their samples there so points carry the clock column.
        auto basePoints = [&]() { return makeSamples(*sc.chart, sspec); };
        auto extPoints = [&]() { return makeSamples(*sc.extendedSystem().extended, sspec); };

        CheckReport rep;
        if (spec.type == "lcs") {
            auto ss = basePoints();
            rep = validateLcs(sc.requireStructure(), ss.points, tol);
        } else if (spec.type == "canonical_map") {
            auto ss = basePoints();
            rep = checkCanonicalMap(sc.mapByName(detail::refAt(spec, "map")),
                                    sc.requireStructure(), ss.points, tol);
        } else if (spec.type == "canonical_generator") {
            const VectorField& x = sc.fieldByName(detail::refAt(spec, "field"));
            if (spec.extended || x.chart()->timeIndex().has_value()) {
                auto ss = extPoints();
                rep = checkCanonicalGenerator(x, extendedStructure(sc.extendedSystem()),
                                              ss.points, tol);
            } else {
                auto ss = basePoints();
                rep = checkCanonicalGenerator(x, sc.requireStructure(), ss.points, tol);
            }
        } else if (spec.type == "extended_canonical") {
            const ExtendedSystem& es = sc.extendedSystem();
            ScalarField gauge = spec.refs.count("gauge")
                                    ? sc.scalarByName(spec.refs.at("gauge"))
                                    : constantField(es.extended, 0.0);
            auto ss = extPoints();
            rep = checkExtendedCanonical(sc.mapByName(detail::refAt(spec, "map")), gauge, es,
                                         ss.points, tol);
        } else if (spec.type == "canonoid_map") {
            std::optional<ScalarField> kGen;
            if (auto g = detail::refMaybe(spec, "gauge")) kGen = sc.scalarByName(*g);
            auto ss = basePoints();
            rep = checkCanonoidMap(sc.mapByName(detail::refAt(spec, "map")),
                                   detail::systemFor(sc, spec), ss.points, tol, kGen);
        } else if (spec.type == "canonoid_generator") {
            auto ss = basePoints();
            rep = checkCanonoidGenerator(sc.fieldByName(detail::refAt(spec, "field")),
                                         detail::systemFor(sc, spec), ss.points, tol);
        } else if (spec.type == "scaling_symmetry") {
            auto ss = basePoints();
            rep = checkScalingSymmetry(sc.fieldByName(detail::refAt(spec, "field")),
                                       detail::systemFor(sc, spec), ss.points, tol,
                                       spec.expectedDegree);
        } else if (spec.type == "companion_form") {
            auto ss = basePoints();
            rep = companionScalingForm(sc.fieldByName(detail::refAt(spec, "field")),
                                       sc.fieldByName(detail::refAt(spec, "field2")),
                                       detail::systemFor(sc, spec), ss.points, tol)
                      .report;
        } else if (spec.type == "dissipated" || spec.type == "constant" ||
                   spec.type == "noether") {
            HamiltonianSystem sys = detail::systemFor(sc, spec);
            const ScalarField& f = sc.scalarByName(detail::refAt(spec, "function"));
            const bool timeDep = f.timeDependent() || sys.h.timeDependent();
            auto ss = timeDep ? extPoints() : basePoints();
            if (spec.type == "dissipated")
                rep = checkDissipated(f, sys, ss.points, tol);
            else if (spec.type == "constant")
                rep = checkConstantOfMotion(f, sys, ss.points, tol);
            else
                rep = checkNoetherInvariance(f, sys, ss.points, tol);
        } else if (spec.type == "time_bracket") {
            auto ss = extPoints();
            rep = checkTimeShiftBracket(sc.scalarByName(detail::refAt(spec, "function")),
                                        sc.extendedSystem(), ss.points, tol);
        } else {
            throw SchemaError("check '" + spec.name + "': unknown type '" + spec.type + "'");
        }
        rep.name = spec.name;
        rep.samplesRequested = sspec.count;
        oc.report = std::move(rep);
        oc.satisfied = spec.expect == "pass" ? oc.report.verdict == Verdict::Pass
                                             : oc.report.verdict == Verdict::Fail;
    } catch (const std::exception& e) {
        oc.error = e.what();
        oc.satisfied = false;
    }
    return oc;
}

namespace detail {

inline void pushBound(std::vector<BoundRecord>& out, const std::string& name, double value,
                      const std::optional<double>& bound) {
    if (!bound) return;
    out.push_back({name, value, *bound, value <= *bound});
}

}  // namespace detail

inline IntegrationOutcome runIntegration(const Scenario& sc, const IntegrationSpec& spec,
                                         const RunOptions& = {}) {
    IntegrationOutcome oc;
    oc.spec = spec;
    try {
        // Pick the field: an explicit reference, else the Hamiltonian field
        // (autonomized when the Hamiltonian depends on time).
        std::optional<VectorField> field;
        if (spec.field) {
            field = sc.fieldByName(*spec.field);
        } else if (sc.requireHamiltonian().timeDependent()) {
            field = autonomize(sc.extendedSystem());
        } else {
            field = hamiltonianVectorField(sc.requireStructure(), sc.requireHamiltonian());
        }

        std::vector<double> y0 = spec.initial;
        const ChartPtr& chart = field->chart();
        if (chart->timeIndex() && y0.size() + 1 == chart->dim())
            y0.push_back(spec.tBegin);  // clock coordinate starts at the span's begin
        if (y0.size() != chart->dim())
            throw SchemaError("integration '" + spec.name + "': initial state has " +
                              std::to_string(spec.initial.size()) + " entries; chart needs " +
                              std::to_string(chart->dim()));

        Trajectory tr = integrate(*field, y0, spec.tBegin, spec.tEnd, spec.config);
        oc.termination = terminationName(tr.termination);
        oc.states = tr.states.size();
        oc.finalState = tr.states.back();
        oc.finalTime = tr.times.back();

        oc.columnNames.push_back("t");
        for (const auto& n : chart->names()) oc.columnNames.push_back(n);
        oc.columns.assign(oc.columnNames.size(), {});
        oc.columns[0] = tr.times;
        for (std::size_t j = 0; j < chart->dim(); ++j) {
            auto& col = oc.columns[j + 1];
            col.reserve(tr.states.size());
            for (const auto& st : tr.states) col.push_back(st[j]);
        }

        bool ok = tr.termination == Termination::Horizon || spec.allowEarlyStop;

        if (!spec.monitors.empty()) {
            if (chart != sc.chart)
                throw SchemaError("integration '" + spec.name +
                                  "': monitors need a trajectory on the scenario chart");
            std::vector<std::pair<std::string, ScalarField>> quantities;
            for (const auto& m : spec.monitors)
                quantities.emplace_back(m.function, sc.scalarByName(m.function));
            auto series = monitorTrajectory(tr, sc.requireStructure(), sc.requireHamiltonian(),
                                            quantities);
            for (std::size_t k = 0; k < series.size(); ++k) {
                const MonitorSeries& ms = series[k];
                const MonitorSpec& m = spec.monitors[k];
                MonitorOutcome mo;
                mo.function = ms.name;
                mo.maxDissipationResidual = ms.maxDissipationResidual;
                mo.maxConservationResidual = ms.maxConservationResidual;
                mo.maxRatioDrift = ms.ratioDrift;
                detail::pushBound(mo.bounds, ms.name + ":max_dissipation_residual",
                                  ms.maxDissipationResidual, m.maxDissipationResidual);
                detail::pushBound(mo.bounds, ms.name + ":max_conservation_residual",
                                  ms.maxConservationResidual, m.maxConservationResidual);
                detail::pushBound(mo.bounds, ms.name + ":max_ratio_drift", ms.ratioDrift,
                                  m.maxRatioDrift);
                for (const auto& b : mo.bounds) ok = ok && b.satisfied;

                oc.columnNames.push_back(ms.name);
                oc.columns.push_back(ms.values);
                oc.columnNames.push_back(ms.name + "_conservation_residual");
                oc.columns.push_back(ms.conservationResidual);
                oc.columnNames.push_back(ms.name + "_dissipation_residual");
                oc.columns.push_back(ms.dissipationResidual);
                oc.columnNames.push_back(ms.name + "_ratio");
                oc.columns.push_back(ms.ratio);
                oc.monitors.push_back(std::move(mo));
            }
        }

        for (const auto& r : spec.residualMonitors) {
            if (chart != sc.chart)
                throw SchemaError("integration '" + spec.name +
                                  "': residual monitors need a trajectory on the scenario chart");
            VectorField x = sc.fieldByName(r.field);
            VectorField xh =
                hamiltonianVectorField(sc.requireStructure(), sc.requireHamiltonian());
            VectorField bracket = lieBracket(x, xh);
            VectorField target = scaleVectorField(xh, r.coefficient);
            std::vector<double> vals(tr.states.size());
            parallelFor(tr.states.size(), [&](std::size_t i) {
                vals[i] = vectorResidualAt(bracket, target, liftCtx<D0>(tr.states[i]));
            });
            double worst = 0.0;
            for (double v : vals) worst = std::max(worst, v);
            BoundRecord rec{r.kind + ":" + r.field, worst,
                            r.maxResidual.value_or(std::numeric_limits<double>::infinity()),
                            !r.maxResidual || worst <= *r.maxResidual};
            ok = ok && rec.satisfied;
            oc.residualBounds.push_back(std::move(rec));
            oc.columnNames.push_back("bracket_residual_" + r.field);
            oc.columns.push_back(std::move(vals));
        }

        oc.satisfied = ok;
    } catch (const std::exception& e) {
        oc.error = e.what();
        oc.satisfied = false;
    }
    return oc;
}

struct RunResult {
    std::vector<CheckOutcome> checks;
    std::vector<IntegrationOutcome> integrations;
};

inline RunResult runScenario(const Scenario& sc, const RunOptions& opt = {},
                             bool withChecks = true, bool withIntegrations = true) {
    RunResult rr;
    if (withChecks)
        for (const auto& spec : sc.checks) rr.checks.push_back(runCheck(sc, spec, opt));
    if (withIntegrations)
        for (const auto& spec : sc.integrations)
            rr.integrations.push_back(runIntegration(sc, spec, opt));
    return rr;
}

}  // namespace lcskit
