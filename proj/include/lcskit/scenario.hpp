// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Scenario files: a JSON document (schema "lcskit-scenario/1") declaring one
// chart, one structure, named functions/fields/maps, and lists of checks and
// integrations. Loading resolves every declaration eagerly except the
// extended phase space, which is built on first use. Names must be declared
// before they are referenced.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lcskit/chart.hpp"
#include "lcskit/dynamics.hpp"
#include "lcskit/field.hpp"
#include "lcskit/geometry.hpp"
#include "lcskit/lcs.hpp"

namespace lcskit {

using Json = nlohmann::ordered_json;

inline constexpr const char* kScenarioSchema = "lcskit-scenario/1";

// One check invocation. `refs` holds the named-entity arguments (map, field,
// field2, function, gauge, hamiltonian). `expect` is the declared verdict.
struct CheckSpec {
    std::string name;
    std::string type;
    std::map<std::string, std::string> refs;
    std::string expect = "pass";
    std::optional<double> tolerance;
    SampleSpec samples;
    bool samplesDeclared = false;
    std::optional<std::pair<double, double>> expectedDegree;
    bool extended = false;
};

struct MonitorSpec {
    std::string function;  // name, or "hamiltonian"
    std::optional<double> maxDissipationResidual;
    std::optional<double> maxConservationResidual;
    std::optional<double> maxRatioDrift;
};

struct ResidualMonitorSpec {
    std::string kind;  // "scaling_bracket"
    std::string field;
    double coefficient = 0.0;
    std::optional<double> maxResidual;
};

struct IntegrationSpec {
    std::string name;
    std::vector<double> initial;
    double tBegin = 0.0;
    double tEnd = 1.0;
    IntegratorConfig config;
    std::optional<std::string> field;  // integrate this field instead of X_H
    std::vector<MonitorSpec> monitors;
    std::vector<ResidualMonitorSpec> residualMonitors;
    bool allowEarlyStop = false;
};

namespace detail {

inline void requireKey(const Json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key))
        throw SchemaError("scenario " + where + ": missing required key '" + key + "'");
}

inline double numberAt(const Json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw SchemaError("scenario: '" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline std::string stringAt(const Json& j, const std::string& key, const std::string& where) {
    requireKey(j, key, where);
    if (!j.at(key).is_string())
        throw SchemaError("scenario " + where + ": '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

}  // namespace detail

class Scenario {
  public:
    std::string name;
    std::string description;
    double tolerance = 1e-9;
    SampleSpec defaultSamples;

    ChartPtr chart;
    std::optional<LcsStructure> structure;
    std::optional<ScalarField> hamiltonian;
    std::map<std::string, ScalarField> functions;
    std::map<std::string, VectorField> fields;
    std::map<std::string, ChartMap> maps;
    std::vector<CheckSpec> checks;
    std::vector<IntegrationSpec> integrations;

    double timeLo = 0.0, timeHi = 1.0;

    const LcsStructure& requireStructure() const {
        if (!structure) throw SchemaError("scenario '" + name + "' declares no lcs structure");
        return *structure;
    }

    const ScalarField& requireHamiltonian() const {
        if (!hamiltonian) throw SchemaError("scenario '" + name + "' declares no hamiltonian");
        return *hamiltonian;
    }

    // The extended phase space is shared by every check that needs it so
    // extended-chart entities all live on one chart object.
    const ExtendedSystem& extendedSystem() const {
        if (!extended_)
            extended_ = extend(requireStructure(), requireHamiltonian(), timeLo, timeHi);
        return *extended_;
    }

    const ScalarField& scalarByName(const std::string& ref) const {
        if (ref == "hamiltonian") return requireHamiltonian();
        auto it = functions.find(ref);
        if (it == functions.end())
            throw SchemaError("scenario '" + name + "': unknown function '" + ref + "'");
        return it->second;
    }

    const VectorField& fieldByName(const std::string& ref) const {
        auto it = fields.find(ref);
        if (it == fields.end())
            throw SchemaError("scenario '" + name + "': unknown field '" + ref + "'");
        return it->second;
    }

    const ChartMap& mapByName(const std::string& ref) const {
        auto it = maps.find(ref);
        if (it == maps.end())
            throw SchemaError("scenario '" + name + "': unknown map '" + ref + "'");
        return it->second;
    }

  private:
    mutable std::optional<ExtendedSystem> extended_;
};

namespace detail {

inline ChartPtr chartFromJson(const Json& j) {
    requireKey(j, "coordinates", "chart");
    std::vector<std::string> names = j.at("coordinates").get<std::vector<std::string>>();
    auto chart = Chart::make(names);
    if (j.contains("box")) {
        for (const auto& [coord, range] : j.at("box").items()) {
            auto lohi = range.get<std::vector<double>>();
            if (lohi.size() != 2) throw SchemaError("chart box for '" + coord + "' needs [lo, hi]");
            chart->setDomain(chart->indexOf(coord), lohi[0], lohi[1]);
        }
    }
    if (j.contains("sample_box")) {
        for (const auto& [coord, range] : j.at("sample_box").items()) {
            auto lohi = range.get<std::vector<double>>();
            if (lohi.size() != 2)
                throw SchemaError("chart sample_box for '" + coord + "' needs [lo, hi]");
            chart->setSampleBox(chart->indexOf(coord), lohi[0], lohi[1]);
        }
    }
    if (j.contains("exclusions"))
        for (const auto& text : j.at("exclusions"))
            chart->addExclusion(dsl::parse(text.get<std::string>(), chart->namesPtr(),
                                           /*allowTime=*/false));
    if (j.contains("margin")) chart->setMargin(numberAt(j, "margin", 1e-3));
    return chart;
}

// Omega keys look like "q1^p1"; both names must be chart coordinates and the
// index pair strictly increasing in chart order.
inline KForm omegaFromJson(const ChartPtr& chart, const Json& j) {
    KForm omega(chart, 2);
    for (const auto& [key, expr] : j.items()) {
        auto caret = key.find('^');
        if (caret == std::string::npos)
            throw SchemaError("omega key '" + key + "' must look like 'a^b'");
        std::size_t a = chart->indexOf(key.substr(0, caret));
        std::size_t b = chart->indexOf(key.substr(caret + 1));
        if (a >= b)
            throw SchemaError("omega key '" + key + "' must be strictly increasing in chart order");
        omega.setCoefficient({a, b}, parseField(chart, expr.get<std::string>()));
    }
    return omega;
}

inline KForm thetaFromJson(const ChartPtr& chart, const Json& j) {
    KForm theta(chart, 1);
    for (const auto& [key, expr] : j.items())
        theta.setCoefficient({chart->indexOf(key)}, parseField(chart, expr.get<std::string>()));
    return theta;
}

inline SampleSpec samplesFromJson(const Json& j, const SampleSpec& fallback) {
    SampleSpec spec = fallback;
    if (j.contains("count")) spec.count = j.at("count").get<std::size_t>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("margin")) spec.margin = j.at("margin").get<double>();
    return spec;
}

inline IntegratorConfig integratorFromJson(const Json& j) {
    IntegratorConfig cfg;
    std::string method = j.value("method", std::string("rk4"));
    if (method == "rk4")
        cfg.method = IntegratorConfig::Method::Rk4;
    else if (method == "rkf45")
        cfg.method = IntegratorConfig::Method::Rkf45;
    else
        throw SchemaError("integration method must be rk4 or rkf45, got '" + method + "'");
    cfg.step = numberAt(j, "step", cfg.step);
    cfg.absTol = numberAt(j, "abs_tol", cfg.absTol);
    cfg.relTol = numberAt(j, "rel_tol", cfg.relTol);
    if (j.contains("max_steps")) cfg.maxSteps = j.at("max_steps").get<std::size_t>();
    if (j.contains("margin")) cfg.margin = j.at("margin").get<double>();
    return cfg;
}

}  // namespace detail

inline Scenario loadScenario(const Json& doc) {
    using detail::numberAt;
    using detail::requireKey;
    using detail::stringAt;
    if (!doc.is_object()) throw SchemaError("scenario document must be a JSON object");
    if (doc.value("schema", std::string()) != kScenarioSchema)
        throw SchemaError("scenario schema must be '" + std::string(kScenarioSchema) + "'");

    Scenario sc;
    sc.name = stringAt(doc, "name", "top level");
    sc.description = doc.value("description", std::string());
    sc.tolerance = numberAt(doc, "tolerance", 1e-9);
    if (doc.contains("samples"))
        sc.defaultSamples = detail::samplesFromJson(doc.at("samples"), sc.defaultSamples);

    requireKey(doc, "chart", "top level");
    sc.chart = detail::chartFromJson(doc.at("chart"));
    if (doc.at("chart").contains("time_box")) {
        auto tb = doc.at("chart").at("time_box").get<std::vector<double>>();
        if (tb.size() != 2) throw SchemaError("chart time_box needs [lo, hi]");
        sc.timeLo = tb[0];
        sc.timeHi = tb[1];
    }

    if (doc.contains("lcs")) {
        const Json& lj = doc.at("lcs");
        requireKey(lj, "omega", "lcs");
        requireKey(lj, "theta", "lcs");
        sc.structure.emplace(sc.chart, detail::omegaFromJson(sc.chart, lj.at("omega")),
                             detail::thetaFromJson(sc.chart, lj.at("theta")));
    }

    if (doc.contains("hamiltonian"))
        sc.hamiltonian = parseField(sc.chart, doc.at("hamiltonian").get<std::string>());

    auto extendedChart = [&sc]() { return sc.extendedSystem().extended; };

    if (doc.contains("functions")) {
        for (const auto& [fname, spec] : doc.at("functions").items()) {
            if (spec.is_string()) {
                sc.functions.emplace(fname, parseField(sc.chart, spec.get<std::string>()));
            } else {
                bool ext = spec.value("extended", false);
                std::string expr = stringAt(spec, "expr", "function '" + fname + "'");
                sc.functions.emplace(fname,
                                     parseField(ext ? extendedChart() : sc.chart, expr));
            }
        }
    }

    if (doc.contains("fields")) {
        for (const auto& [fname, spec] : doc.at("fields").items()) {
            bool ext = spec.value("extended", false);
            ChartPtr onChart = ext ? extendedChart() : sc.chart;
            if (spec.contains("components")) {
                std::vector<ScalarField> comps;
                for (const std::string& coord : onChart->names()) {
                    const Json& cj = spec.at("components");
                    comps.push_back(parseField(
                        onChart, cj.contains(coord) ? cj.at(coord).get<std::string>() : "0"));
                }
                sc.fields.emplace(fname, VectorField(onChart, std::move(comps)));
            } else if (spec.contains("hamiltonian_of")) {
                const ScalarField& f = sc.scalarByName(spec.at("hamiltonian_of").get<std::string>());
                if (ext)
                    sc.fields.emplace(fname, extendedHamiltonianFieldOf(sc.extendedSystem(), f));
                else
                    sc.fields.emplace(fname, hamiltonianVectorField(sc.requireStructure(), f));
            } else if (spec.contains("bracket_of")) {
                auto pair = spec.at("bracket_of").get<std::vector<std::string>>();
                if (pair.size() != 2)
                    throw SchemaError("field '" + fname + "': bracket_of needs two field names");
                sc.fields.emplace(fname,
                                  lieBracket(sc.fieldByName(pair[0]), sc.fieldByName(pair[1])));
            } else if (spec.contains("extend_of")) {
                sc.fields.emplace(
                    fname, liftFieldToExtended(sc.extendedSystem(),
                                               sc.fieldByName(spec.at("extend_of").get<std::string>())));
            } else {
                throw SchemaError("field '" + fname +
                                  "': need components, hamiltonian_of, bracket_of, or extend_of");
            }
        }
    }

    if (doc.contains("maps")) {
        for (const auto& [mname, spec] : doc.at("maps").items()) {
            bool ext = spec.value("extended", false);
            ChartPtr onChart = ext ? extendedChart() : sc.chart;
            if (spec.contains("components")) {
                std::vector<ScalarField> comps;
                for (const std::string& coord : onChart->names()) {
                    const Json& cj = spec.at("components");
                    comps.push_back(fieldFromExpr(
                        onChart,
                        dsl::parse(cj.contains(coord) ? cj.at(coord).get<std::string>() : coord,
                                   onChart->namesPtr(), /*allowTime=*/false)));
                }
                sc.maps.emplace(mname, ChartMap(onChart, onChart, std::move(comps)));
            } else if (spec.contains("flow_of")) {
                const VectorField& x = sc.fieldByName(spec.at("flow_of").get<std::string>());
                detail::requireKey(spec, "s", "map '" + mname + "'");
                double s = spec.at("s").get<double>();
                IntegratorConfig cfg;
                cfg.step = numberAt(spec, "step", 1e-2);
                sc.maps.emplace(mname, flowMap(x, s, cfg));
            } else if (spec.contains("embed")) {
                sc.maps.emplace(
                    mname, liftMapToExtended(sc.extendedSystem(),
                                             sc.mapByName(spec.at("embed").get<std::string>())));
            } else {
                throw SchemaError("map '" + mname + "': need components, flow_of, or embed");
            }
        }
    }

    if (doc.contains("checks")) {
        for (const Json& cj : doc.at("checks")) {
            CheckSpec spec;
            spec.name = stringAt(cj, "name", "check");
            spec.type = stringAt(cj, "type", "check '" + spec.name + "'");
            spec.expect = cj.value("expect", std::string("pass"));
            if (spec.expect != "pass" && spec.expect != "fail")
                throw SchemaError("check '" + spec.name + "': expect must be pass or fail");
            if (cj.contains("tolerance")) spec.tolerance = cj.at("tolerance").get<double>();
            spec.samples = sc.defaultSamples;
            if (cj.contains("samples")) {
                spec.samples = detail::samplesFromJson(cj.at("samples"), sc.defaultSamples);
                spec.samplesDeclared = true;
            }
            if (cj.contains("expected_degree")) {
                auto d = cj.at("expected_degree").get<std::vector<double>>();
                if (d.size() != 2)
                    throw SchemaError("check '" + spec.name + "': expected_degree needs [L, b]");
                spec.expectedDegree = {d[0], d[1]};
            }
            spec.extended = cj.value("extended", false);
            for (const char* key : {"map", "field", "field2", "function", "gauge", "hamiltonian"})
                if (cj.contains(key)) spec.refs[key] = cj.at(key).get<std::string>();
            sc.checks.push_back(std::move(spec));
        }
    }

    if (doc.contains("integrations")) {
        for (const Json& ij : doc.at("integrations")) {
            IntegrationSpec spec;
            spec.name = stringAt(ij, "name", "integration");
            requireKey(ij, "initial", "integration '" + spec.name + "'");
            spec.initial = ij.at("initial").get<std::vector<double>>();
            requireKey(ij, "span", "integration '" + spec.name + "'");
            auto span = ij.at("span").get<std::vector<double>>();
            if (span.size() != 2)
                throw SchemaError("integration '" + spec.name + "': span needs [t0, t1]");
            spec.tBegin = span[0];
            spec.tEnd = span[1];
            spec.config = detail::integratorFromJson(ij);
            if (ij.contains("field")) spec.field = ij.at("field").get<std::string>();
            spec.allowEarlyStop = ij.value("allow_early_stop", false);
            if (ij.contains("monitors")) {
                for (const Json& mj : ij.at("monitors")) {
                    MonitorSpec m;
                    if (mj.is_string()) {
                        m.function = mj.get<std::string>();
                    } else {
                        m.function = stringAt(mj, "function", "monitor");
                        if (mj.contains("max_dissipation_residual"))
                            m.maxDissipationResidual = mj.at("max_dissipation_residual").get<double>();
                        if (mj.contains("max_conservation_residual"))
                            m.maxConservationResidual =
                                mj.at("max_conservation_residual").get<double>();
                        if (mj.contains("max_ratio_drift"))
                            m.maxRatioDrift = mj.at("max_ratio_drift").get<double>();
                    }
                    spec.monitors.push_back(std::move(m));
                }
            }
            if (ij.contains("residual_monitors")) {
                for (const Json& rj : ij.at("residual_monitors")) {
                    ResidualMonitorSpec r;
                    r.kind = stringAt(rj, "kind", "residual monitor");
                    if (r.kind != "scaling_bracket")
                        throw SchemaError("unknown residual monitor kind '" + r.kind + "'");
                    r.field = stringAt(rj, "field", "residual monitor");
                    r.coefficient = numberAt(rj, "coefficient", 0.0);
                    if (rj.contains("max_residual"))
                        r.maxResidual = rj.at("max_residual").get<double>();
                    spec.residualMonitors.push_back(std::move(r));
                }
            }
            sc.integrations.push_back(std::move(spec));
        }
    }
    return sc;
}

inline Scenario loadScenarioFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open scenario file '" + path + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("scenario '" + path + "' is not valid JSON: " + e.what());
    }
    Scenario sc = loadScenario(doc);
    return sc;
}

}  // namespace lcskit
