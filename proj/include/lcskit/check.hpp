// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Certification reports. A check declares a fixed list of identities, walks a
// sample set evaluating each identity's residual (or margin) per point, and
// reduces to max/mean/min statistics. The per-point map runs on a small
// thread pool (LCSKIT_THREADS); results land in preallocated slots indexed by
// sample, so the reduction is identical at any thread count. Fewer than 25
// admissible samples yields an indeterminate verdict rather than a vacuous
// pass.

#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "lcskit/chart.hpp"
#include "lcskit/errors.hpp"

namespace lcskit {

inline constexpr std::size_t kMinSamplesForVerdict = 25;

enum class Verdict { Pass, Fail, Indeterminate };

inline const char* verdictName(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

struct IdentityDecl {
    std::string name;
    bool margin = false;   // margin-type: gate on min >= threshold
    bool gating = true;    // diagnostics set this false
    double threshold = 0;  // margin threshold; residual identities use the tolerance
};

struct IdentityStats {
    std::string name;
    bool margin = false;
    bool gating = true;
    double threshold = 0;
    double max = 0.0;
    double mean = 0.0;
    double min = std::numeric_limits<double>::infinity();
    std::size_t count = 0;
};

struct CheckReport {
    std::string name;  // instance label (scenario check name or ad-hoc)
    std::string kind;  // operation that produced the report
    double tolerance = 1e-9;
    std::size_t samplesRequested = 0;
    std::size_t samplesUsed = 0;
    Verdict verdict = Verdict::Indeterminate;
    std::vector<IdentityStats> identities;
    std::vector<std::string> failedIdentities;
    std::map<std::string, double> estimates;
    std::string note;

    const IdentityStats& identity(const std::string& id) const {
        for (const auto& s : identities)
            if (s.name == id) return s;
        throw Error("report has no identity named '" + id + "'");
    }
    double estimate(const std::string& id) const {
        auto it = estimates.find(id);
        if (it == estimates.end()) throw Error("report has no estimate named '" + id + "'");
        return it->second;
    }
    bool passed() const { return verdict == Verdict::Pass; }
};

inline unsigned threadCount() {
    if (const char* env = std::getenv("LCSKIT_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v <= 256) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : std::min(hw, 8u);
}

// Index-sliced parallel map; worker i handles a contiguous slice. Exceptions
// propagate after all workers join (first one wins by slice order).
template <class Fn>
void parallelFor(std::size_t n, const Fn& fn) {
    const unsigned workers = std::min<std::size_t>(threadCount(), n == 0 ? 1 : n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Runs `evalPoint(i, point, values)` over every sample; values[k] feeds
// identity k's statistics (the index lets callers stash per-point estimates
// in side arrays). Returns the reduced report with the verdict applied
// (gating identities only).
inline CheckReport certify(std::string kind, const std::vector<std::vector<double>>& points,
                           double tolerance, std::vector<IdentityDecl> decls,
                           const std::function<void(std::size_t, std::span<const double>,
                                                    std::vector<double>&)>& evalPoint,
                           std::size_t samplesRequested = 0) {
    CheckReport rep;
    rep.kind = std::move(kind);
    rep.tolerance = tolerance;
    rep.samplesRequested = samplesRequested ? samplesRequested : points.size();
    rep.samplesUsed = points.size();

    const std::size_t k = decls.size();
    std::vector<std::vector<double>> values(points.size(), std::vector<double>(k, 0.0));
    parallelFor(points.size(), [&](std::size_t i) {
        values[i].assign(k, 0.0);
        evalPoint(i, points[i], values[i]);
    });

    rep.identities.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        IdentityStats st;
        st.name = decls[c].name;
        st.margin = decls[c].margin;
        st.gating = decls[c].gating;
        st.threshold = decls[c].margin ? decls[c].threshold : tolerance;
        double sum = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double v = values[i][c];
            st.max = std::max(st.max, v);
            st.min = std::min(st.min, v);
            sum += v;
        }
        st.count = points.size();
        st.mean = points.empty() ? 0.0 : sum / static_cast<double>(points.size());
        if (points.empty()) st.min = 0.0;
        rep.identities.push_back(std::move(st));
    }

    if (points.size() < kMinSamplesForVerdict) {
        rep.verdict = Verdict::Indeterminate;
        rep.note = "only " + std::to_string(points.size()) +
                   " admissible samples; need " + std::to_string(kMinSamplesForVerdict);
        return rep;
    }
    bool pass = true;
    for (const auto& st : rep.identities) {
        bool ok = st.margin ? (st.min >= st.threshold) : (st.max <= st.threshold);
        if (!ok) {
            rep.failedIdentities.push_back(st.name);
            if (st.gating) pass = false;
        }
    }
    rep.verdict = pass ? Verdict::Pass : Verdict::Fail;
    return rep;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw Error("median of an empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace lcskit
