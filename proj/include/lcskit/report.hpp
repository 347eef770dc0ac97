// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Report bundles: versioned JSON records for checks and integrations plus a
// summary with exit-code semantics. Output is deterministic for a fixed
// scenario and seed; the generated_at and wall_ms fields are the only
// volatile entries and comparisons must exclude them.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcskit/check.hpp"
#include "lcskit/scenario.hpp"

namespace lcskit {

inline constexpr const char* kReportSchema = "lcskit-report/1";

// Exit-code contract shared by the CLI and the acceptance harness.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitError = 2;

struct CheckOutcome {
    CheckSpec spec;
    CheckReport report;
    bool satisfied = false;  // verdict matches the declared expectation
    std::optional<std::string> error;
};

struct BoundRecord {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool satisfied = false;
};

struct MonitorOutcome {
    std::string function;
    double maxDissipationResidual = 0.0;
    double maxConservationResidual = 0.0;
    double maxRatioDrift = 0.0;
    std::vector<BoundRecord> bounds;
};

struct IntegrationOutcome {
    IntegrationSpec spec;
    std::string termination;
    std::size_t states = 0;
    std::vector<double> finalState;
    double finalTime = 0.0;
    std::vector<MonitorOutcome> monitors;
    std::vector<BoundRecord> residualBounds;
    bool satisfied = false;
    std::optional<std::string> error;
    // Parallel arrays for CSV export; columnNames[0] is "t".
    std::vector<std::string> columnNames;
    std::vector<std::vector<double>> columns;
};

namespace detail {

inline Json identityToJson(const IdentityStats& st) {
    Json j;
    j["name"] = st.name;
    j["kind"] = st.margin ? "margin" : "residual";
    j["max"] = st.max;
    j["mean"] = st.mean;
    j["min"] = st.min;
    j["count"] = st.count;
    j["gating"] = st.gating;
    if (st.margin) j["threshold"] = st.threshold;
    return j;
}

}  // namespace detail

inline Json checkOutcomeToJson(const CheckOutcome& oc) {
    Json j;
    j["name"] = oc.spec.name;
    j["type"] = oc.spec.type;
    j["kind"] = oc.report.kind;
    j["verdict"] = oc.error ? "error" : verdictName(oc.report.verdict);
    j["expected"] = oc.spec.expect;
    j["satisfied"] = oc.satisfied;
    if (oc.error) {
        j["error"] = *oc.error;
        return j;
    }
    j["tolerance"] = oc.report.tolerance;
    j["samples_requested"] = oc.report.samplesRequested;
    j["samples_used"] = oc.report.samplesUsed;
    Json ids = Json::array();
    for (const auto& st : oc.report.identities) ids.push_back(detail::identityToJson(st));
    j["identities"] = std::move(ids);
    j["failed_identities"] = oc.report.failedIdentities;
    if (!oc.report.estimates.empty()) {
        Json est;
        for (const auto& [k, v] : oc.report.estimates) est[k] = v;
        j["estimates"] = std::move(est);
    }
    if (!oc.report.note.empty()) j["note"] = oc.report.note;
    return j;
}

inline Json boundToJson(const BoundRecord& b) {
    Json j;
    j["name"] = b.name;
    j["value"] = b.value;
    j["bound"] = b.bound;
    j["satisfied"] = b.satisfied;
    return j;
}

inline Json integrationOutcomeToJson(const IntegrationOutcome& oc) {
    Json j;
    j["name"] = oc.spec.name;
    j["satisfied"] = oc.satisfied;
    if (oc.error) {
        j["error"] = *oc.error;
        return j;
    }
    j["termination"] = oc.termination;
    j["states"] = oc.states;
    j["final_time"] = oc.finalTime;
    j["final_state"] = oc.finalState;
    Json mons = Json::array();
    for (const auto& m : oc.monitors) {
        Json mj;
        mj["function"] = m.function;
        mj["max_dissipation_residual"] = m.maxDissipationResidual;
        mj["max_conservation_residual"] = m.maxConservationResidual;
        mj["max_ratio_drift"] = m.maxRatioDrift;
        Json bs = Json::array();
        for (const auto& b : m.bounds) bs.push_back(boundToJson(b));
        mj["bounds"] = std::move(bs);
        mons.push_back(std::move(mj));
    }
    j["monitors"] = std::move(mons);
    Json rbs = Json::array();
    for (const auto& b : oc.residualBounds) rbs.push_back(boundToJson(b));
    j["residual_bounds"] = std::move(rbs);
    return j;
}

inline std::string utcTimestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Assembles the bundle document. Checks and integrations are sorted by name
// so the serialization is deterministic no matter how they were scheduled.
inline Json assembleReport(const std::string& scenarioName, const std::string& command,
                           std::vector<CheckOutcome> checks,
                           std::vector<IntegrationOutcome> integrations, double wallMs) {
    std::sort(checks.begin(), checks.end(),
              [](const CheckOutcome& a, const CheckOutcome& b) { return a.spec.name < b.spec.name; });
    std::sort(integrations.begin(), integrations.end(), [](const IntegrationOutcome& a,
                                                           const IntegrationOutcome& b) {
        return a.spec.name < b.spec.name;
    });
    Json doc;
    doc["schema"] = kReportSchema;
    doc["scenario"] = scenarioName;
    doc["command"] = command;
    // generated_at and wall_ms are the only fields allowed to vary between
    // identical runs; everything else must be byte-stable at any thread count.
    doc["generated_at"] = utcTimestamp();
    doc["wall_ms"] = wallMs;

    std::size_t total = checks.size() + integrations.size();
    std::size_t satisfied = 0;
    bool anyError = false;
    for (const auto& c : checks) {
        satisfied += c.satisfied ? 1 : 0;
        anyError = anyError || c.error.has_value();
    }
    for (const auto& i : integrations) {
        satisfied += i.satisfied ? 1 : 0;
        anyError = anyError || i.error.has_value();
    }
    Json summary;
    summary["total"] = total;
    summary["satisfied"] = satisfied;
    summary["all_satisfied"] = satisfied == total;
    summary["errors"] = anyError;
    doc["summary"] = std::move(summary);

    Json cs = Json::array();
    for (const auto& c : checks) cs.push_back(checkOutcomeToJson(c));
    doc["checks"] = std::move(cs);
    if (!integrations.empty()) {
        Json is = Json::array();
        for (const auto& i : integrations) is.push_back(integrationOutcomeToJson(i));
        doc["integrations"] = std::move(is);
    }
    return doc;
}

inline int exitCodeFor(const Json& report) {
    const Json& s = report.at("summary");
    if (s.value("errors", false)) return kExitError;
    return s.value("all_satisfied", false) ? kExitPass : kExitFail;
}

}  // namespace lcskit
