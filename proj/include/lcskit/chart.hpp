// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Charts: named coordinates with a domain box (bounds may be infinite),
// exclusion predicates (expressions whose zero sets are cut out, with a
// margin), and a finite sampling box for quasi-random certification. Extended
// charts carry the time coordinate 't' as an ordinary coordinate and remember
// which one it is.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcskit/errors.hpp"
#include "lcskit/expr.hpp"

namespace lcskit {

class Chart;
using ChartPtr = std::shared_ptr<const Chart>;

class Chart {
  public:
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    static std::shared_ptr<Chart> make(std::vector<std::string> names) {
        return std::shared_ptr<Chart>(new Chart(std::move(names)));
    }

    std::size_t dim() const { return names_->size(); }
    const std::vector<std::string>& names() const { return *names_; }
    const std::shared_ptr<const std::vector<std::string>>& namesPtr() const {
        return names_;
    }
    std::optional<std::size_t> timeIndex() const { return timeIndex_; }

    std::size_t indexOf(const std::string& name) const {
        for (std::size_t i = 0; i < names_->size(); ++i)
            if ((*names_)[i] == name) return i;
        throw ChartMismatchError("chart has no coordinate named '" + name + "'");
    }

    void setDomain(std::size_t i, double lo, double hi) {
        if (!(lo < hi)) throw Error("empty domain interval for " + (*names_)[i]);
        lo_[i] = lo;
        hi_[i] = hi;
    }
    void setSampleBox(std::size_t i, double lo, double hi) {
        if (!(lo < hi)) throw Error("empty sampling interval for " + (*names_)[i]);
        sampleLo_[i] = lo;
        sampleHi_[i] = hi;
    }
    void addExclusion(const dsl::Expression& e) { exclusions_.push_back(e); }
    void setMargin(double m) { margin_ = m; }
    double margin() const { return margin_; }
    const std::vector<dsl::Expression>& exclusions() const { return exclusions_; }
    double domainLo(std::size_t i) const { return lo_[i]; }
    double domainHi(std::size_t i) const { return hi_[i]; }
    double sampleLo(std::size_t i) const { return sampleLo_[i]; }
    double sampleHi(std::size_t i) const { return sampleHi_[i]; }

    void markTime(const std::string& name) { timeIndex_ = indexOf(name); }

    // A point is admissible when it lies inside the open domain box and at
    // least `margin` away (in predicate value) from every exclusion zero set.
    bool admissible(std::span<const double> x, std::optional<double> margin = {}) const {
        if (x.size() != dim()) throw ChartMismatchError("point has wrong dimension");
        const double m = margin.value_or(margin_);
        for (std::size_t i = 0; i < dim(); ++i) {
            if (!(x[i] > lo_[i] && x[i] < hi_[i])) return false;
            if (!std::isfinite(x[i])) return false;
        }
        EvalCtx<double> ctx;
        ctx.coords.assign(x.begin(), x.end());
        for (const auto& e : exclusions_) {
            if (std::abs(e.eval(ctx)) <= m) return false;
        }
        return true;
    }

    bool sampleBoxFinite() const {
        for (std::size_t i = 0; i < dim(); ++i)
            if (!std::isfinite(sampleLo_[i]) || !std::isfinite(sampleHi_[i])) return false;
        return true;
    }

  private:
    explicit Chart(std::vector<std::string> names)
        : names_(std::make_shared<const std::vector<std::string>>(std::move(names))) {
        for (std::size_t i = 0; i < names_->size(); ++i)
            for (std::size_t j = i + 1; j < names_->size(); ++j)
                if ((*names_)[i] == (*names_)[j])
                    throw Error("duplicate coordinate name '" + (*names_)[i] + "'");
        lo_.assign(dim(), -kInf);
        hi_.assign(dim(), kInf);
        sampleLo_.assign(dim(), -1.0);
        sampleHi_.assign(dim(), 1.0);
    }

    std::shared_ptr<const std::vector<std::string>> names_;
    std::vector<double> lo_, hi_, sampleLo_, sampleHi_;
    std::vector<dsl::Expression> exclusions_;
    double margin_ = 1e-3;
    std::optional<std::size_t> timeIndex_;
};

// ---- quasi-random sampling -------------------------------------------------

struct SampleSpec {
    std::size_t count = 1000;
    std::uint64_t seed = 42;  // offset into the Halton sequence
    std::optional<double> margin;
};

struct SampleSet {
    std::vector<std::vector<double>> points;
    std::size_t attempted = 0;  // sequence entries consumed, admissible or not
};

namespace detail {

inline double radicalInverse(std::uint64_t n, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (n > 0) {
        r += f * static_cast<double>(n % base);
        n /= base;
        f *= inv;
    }
    return r;
}

inline const std::uint64_t kHaltonPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                              23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace detail

// Low-discrepancy Halton points over the chart's sampling box, skipping
// inadmissible points. Deterministic in (count, seed, margin); the seed
// offsets the start index of the sequence.
inline SampleSet makeSamples(const Chart& chart, const SampleSpec& spec) {
    if (!chart.sampleBoxFinite())
        throw SamplingError("sampling requires a finite sampling box");
    if (chart.dim() > std::size(detail::kHaltonPrimes))
        throw SamplingError("sampling supports at most 16 dimensions");
    SampleSet set;
    set.points.reserve(spec.count);
    const std::size_t maxAttempts = 64 * (spec.count + 16);
    std::vector<double> x(chart.dim());
    for (std::size_t i = 0; i < maxAttempts && set.points.size() < spec.count; ++i) {
        const std::uint64_t index = 1 + spec.seed + i;
        for (std::size_t d = 0; d < chart.dim(); ++d) {
            double u = detail::radicalInverse(index, detail::kHaltonPrimes[d]);
            x[d] = chart.sampleLo(d) + u * (chart.sampleHi(d) - chart.sampleLo(d));
        }
        ++set.attempted;
        if (chart.admissible(x, spec.margin)) set.points.push_back(x);
    }
    return set;
}

}  // namespace lcskit
