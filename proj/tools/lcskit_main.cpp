// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Command line front end. Subcommands:
//   validate  certify the structure axioms; exit reflects the raw verdict
//   check     run every declared check; exit reflects expectation matches
//   integrate run every declared integration; trajectories export as CSV
//   report    reprint a stored report bundle and restore its exit code
// Exit codes: 0 all good, 1 a verdict or expectation failed, 2 error.

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcskit/runner.hpp"

namespace {

using lcskit::Json;

std::string renderDouble(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string csvEscape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// One row per identity so residual statistics stay greppable.
std::string checksToCsv(const std::vector<lcskit::CheckOutcome>& checks) {
    std::string out =
        "check,type,verdict,expected,satisfied,identity,kind,max,mean,min,count,gating,"
        "threshold\n";
    for (const auto& c : checks) {
        const std::string head = csvEscape(c.spec.name) + "," + c.spec.type + "," +
                                 (c.error ? "error" : verdictName(c.report.verdict)) + "," +
                                 c.spec.expect + "," + (c.satisfied ? "true" : "false");
        if (c.error || c.report.identities.empty()) {
            out += head + ",,,,,,,\n";
            continue;
        }
        for (const auto& st : c.report.identities) {
            out += head + "," + st.name + "," + (st.margin ? "margin" : "residual") + "," +
                   renderDouble(st.max) + "," + renderDouble(st.mean) + "," +
                   renderDouble(st.min) + "," + std::to_string(st.count) + "," +
                   (st.gating ? "true" : "false") + "," + renderDouble(st.threshold) + "\n";
        }
    }
    return out;
}

std::string trajectoryToCsv(const lcskit::IntegrationOutcome& oc) {
    std::string out;
    for (std::size_t j = 0; j < oc.columnNames.size(); ++j) {
        if (j) out += ',';
        out += csvEscape(oc.columnNames[j]);
    }
    out += '\n';
    const std::size_t rows = oc.columns.empty() ? 0 : oc.columns[0].size();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < oc.columns.size(); ++j) {
            if (j) out += ',';
            out += renderDouble(oc.columns[j][i]);
        }
        out += '\n';
    }
    return out;
}

void writeFile(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lcskit::Error("cannot write '" + path.string() + "'");
    out << content;
}

struct CommonArgs {
    std::string scenarioPath;
    std::optional<double> tolerance;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::string outDir;
    std::string format = "json";
};

void addCommonFlags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("scenario", args.scenarioPath, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--tolerance", args.tolerance, "override the residual tolerance");
    cmd->add_option("--samples", args.samples, "override the sample count");
    cmd->add_option("--seed", args.seed, "override the sample sequence offset");
    cmd->add_option("--out", args.outDir, "directory for report and trajectory files");
    cmd->add_option("--format", args.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

lcskit::RunOptions optionsOf(const CommonArgs& args) {
    lcskit::RunOptions opt;
    opt.tolerance = args.tolerance;
    opt.samples = args.samples;
    opt.seed = args.seed;
    return opt;
}

void emitReport(const CommonArgs& args, const Json& doc,
                const std::vector<lcskit::CheckOutcome>& checks,
                const std::vector<lcskit::IntegrationOutcome>& integrations) {
    if (!args.outDir.empty()) {
        std::filesystem::path dir(args.outDir);
        std::filesystem::create_directories(dir);
        if (args.format == "csv")
            writeFile(dir / "report.csv", checksToCsv(checks));
        else
            writeFile(dir / "report.json", doc.dump(2) + "\n");
        for (const auto& oc : integrations)
            if (!oc.error) writeFile(dir / (oc.spec.name + ".csv"), trajectoryToCsv(oc));
    }
}

void printSummaryLine(const Json& entry) {
    std::string name = entry.value("name", std::string("?"));
    std::string verdict = entry.value("verdict", std::string());
    if (verdict.empty()) verdict = entry.value("satisfied", false) ? "ok" : "failed";
    std::string expected = entry.value("expected", std::string());
    std::cout << "  " << name << ": " << verdict;
    if (!expected.empty()) std::cout << " (expected " << expected << ")";
    if (entry.contains("error")) std::cout << " [" << entry.at("error").get<std::string>() << "]";
    std::cout << (entry.value("satisfied", false) ? "" : "  <-- unsatisfied") << "\n";
}

void printReport(const Json& doc) {
    std::cout << doc.value("scenario", std::string("?")) << " ("
              << doc.value("command", std::string("?")) << ")\n";
    for (const Json& c : doc.value("checks", Json::array())) printSummaryLine(c);
    for (const Json& i : doc.value("integrations", Json::array())) printSummaryLine(i);
    const Json& s = doc.at("summary");
    std::cout << "summary: " << s.at("satisfied").get<std::size_t>() << "/"
              << s.at("total").get<std::size_t>() << " satisfied\n";
}

double elapsedMs(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// validate ignores declared expectations: it certifies the structure axioms
// and exits on the raw verdict, so a deliberately broken fixture exits 1.
int runValidate(const CommonArgs& args) {
    auto t0 = std::chrono::steady_clock::now();
    lcskit::Scenario sc = lcskit::loadScenarioFile(args.scenarioPath);
    lcskit::RunOptions opt = optionsOf(args);

    lcskit::CheckSpec spec;
    spec.name = "structure";
    spec.type = "lcs";
    spec.samples = sc.defaultSamples;
    lcskit::CheckOutcome oc = lcskit::runCheck(sc, spec, opt);

    Json doc = lcskit::assembleReport(sc.name, "validate", {oc}, {}, elapsedMs(t0));
    emitReport(args, doc, {oc}, {});
    printReport(doc);
    if (oc.error) return lcskit::kExitError;
    return oc.report.verdict == lcskit::Verdict::Pass ? lcskit::kExitPass : lcskit::kExitFail;
}

int runCheckCmd(const CommonArgs& args) {
    auto t0 = std::chrono::steady_clock::now();
    lcskit::Scenario sc = lcskit::loadScenarioFile(args.scenarioPath);
    lcskit::RunResult rr = lcskit::runScenario(sc, optionsOf(args), true, false);
    Json doc = lcskit::assembleReport(sc.name, "check", rr.checks, {}, elapsedMs(t0));
    emitReport(args, doc, rr.checks, {});
    printReport(doc);
    return lcskit::exitCodeFor(doc);
}

int runIntegrateCmd(const CommonArgs& args) {
    auto t0 = std::chrono::steady_clock::now();
    lcskit::Scenario sc = lcskit::loadScenarioFile(args.scenarioPath);
    lcskit::RunResult rr = lcskit::runScenario(sc, optionsOf(args), false, true);
    Json doc = lcskit::assembleReport(sc.name, "integrate", {}, rr.integrations, elapsedMs(t0));
    emitReport(args, doc, {}, rr.integrations);
    printReport(doc);
    return lcskit::exitCodeFor(doc);
}

int runReportCmd(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lcskit::Error("cannot open report '" + path + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw lcskit::SchemaError(std::string("report is not valid JSON: ") + e.what());
    }
    if (doc.value("schema", std::string()) != lcskit::kReportSchema)
        throw lcskit::SchemaError("report schema must be '" +
                                  std::string(lcskit::kReportSchema) + "'");
    printReport(doc);
    return lcskit::exitCodeFor(doc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification and simulation for Hamiltonian mechanics on locally conformal "
                 "symplectic charts"};
    app.require_subcommand(1);

    CommonArgs validateArgs, checkArgs, integrateArgs;
    std::string reportPath;

    CLI::App* validate =
        app.add_subcommand("validate", "certify the structure axioms (raw verdict exit)");
    addCommonFlags(validate, validateArgs);
    CLI::App* check =
        app.add_subcommand("check", "run all declared checks (expectation exit)");
    addCommonFlags(check, checkArgs);
    CLI::App* integrate =
        app.add_subcommand("integrate", "run all declared integrations and export trajectories");
    addCommonFlags(integrate, integrateArgs);
    CLI::App* report = app.add_subcommand("report", "summarize a stored report bundle");
    report->add_option("report", reportPath, "report JSON file")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
        if (validate->parsed()) return runValidate(validateArgs);
        if (check->parsed()) return runCheckCmd(checkArgs);
        if (integrate->parsed()) return runIntegrateCmd(integrateArgs);
        if (report->parsed()) return runReportCmd(reportPath);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : lcskit::kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lcskit::kExitError;
    }
    return lcskit::kExitError;
}
