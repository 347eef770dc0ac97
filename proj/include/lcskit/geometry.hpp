// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Exterior calculus over lazy fields: exterior derivative, wedge product,
// interior product, Lie derivative (Cartan formula), Lie bracket, and
// pullback along chart maps (Jacobians by dual seeding through the map).
// Operations on extended charts accept a frozen-time flag that omits the
// time direction from differentials, which is how fixed-t identities on
// R x M are certified.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lcskit/field.hpp"

namespace lcskit {

// Hybrid absolute/relative deviation: |lhs - rhs| / (1 + max(|lhs|, |rhs|)).
inline double residualMetric(double lhs, double rhs) {
    const double d = std::abs(lhs - rhs);
    return d / (1.0 + std::max(std::abs(lhs), std::abs(rhs)));
}

namespace detail {

// Directions to differentiate along: every coordinate, minus the time
// coordinate when a frozen-time derivative is requested.
inline std::vector<std::size_t> derivativeDirections(const Chart& chart, bool frozenTime) {
    std::vector<std::size_t> dirs;
    for (std::size_t j = 0; j < chart.dim(); ++j) {
        if (frozenTime && chart.timeIndex() && *chart.timeIndex() == j) continue;
        dirs.push_back(j);
    }
    return dirs;
}

}  // namespace detail

inline KForm exteriorDerivative(const KForm& w, bool frozenTime = false) {
    if (w.degree() + 1 > kMaxFormDegree)
        throw DegreeOverflowError("exterior derivative would exceed the degree cap");
    KForm out(w.chart(), w.degree() + 1);
    const auto dirs = detail::derivativeDirections(*w.chart(), frozenTime);
    for (const auto& [idx, f] : w.coefficients()) {
        for (std::size_t j : dirs) {
            if (std::find(idx.begin(), idx.end(), j) != idx.end()) continue;
            IndexSet lifted;
            lifted.reserve(idx.size() + 1);
            lifted.push_back(j);
            lifted.insert(lifted.end(), idx.begin(), idx.end());
            out.accumulate(std::move(lifted), 1.0, partialField(f, j));
        }
    }
    return out;
}

// d of a scalar field as a 1-form.
inline KForm exteriorDerivative(const ScalarField& f, bool frozenTime = false) {
    KForm out(f.chart(), 1);
    const auto dirs = detail::derivativeDirections(*f.chart(), frozenTime);
    for (std::size_t j : dirs) out.setCoefficient({j}, partialField(f, j));
    return out;
}

inline KForm wedge(const KForm& a, const KForm& b) {
    if (a.chart() != b.chart()) throw ChartMismatchError("wedge across different charts");
    const std::size_t k = a.degree() + b.degree();
    if (k > kMaxFormDegree)
        throw DegreeOverflowError("wedge product would exceed the degree cap");
    KForm out(a.chart(), k);
    for (const auto& [ia, fa] : a.coefficients()) {
        for (const auto& [ib, fb] : b.coefficients()) {
            IndexSet merged;
            merged.reserve(ia.size() + ib.size());
            merged.insert(merged.end(), ia.begin(), ia.end());
            merged.insert(merged.end(), ib.begin(), ib.end());
            out.accumulate(std::move(merged), 1.0, mulFields(fa, fb));
        }
    }
    return out;
}

inline KForm interiorProduct(const VectorField& x, const KForm& w) {
    if (x.chart() != w.chart())
        throw ChartMismatchError("interior product across different charts");
    if (w.degree() == 0)
        throw DegreeUnderflowError("interior product of a degree-0 form");
    KForm out(w.chart(), w.degree() - 1);
    for (const auto& [idx, f] : w.coefficients()) {
        for (std::size_t a = 0; a < idx.size(); ++a) {
            IndexSet rest;
            rest.reserve(idx.size() - 1);
            for (std::size_t b = 0; b < idx.size(); ++b)
                if (b != a) rest.push_back(idx[b]);
            const double sign = (a % 2 == 0) ? 1.0 : -1.0;
            out.accumulate(std::move(rest), sign, mulFields(x.component(idx[a]), f));
        }
    }
    return out;
}

// Cartan formula L_X w = d(X . w) + X . dw. The second term drops for
// top-degree forms (their d vanishes identically).
inline KForm lieDerivative(const VectorField& x, const KForm& w, bool frozenTime = false) {
    if (w.degree() == 0) throw DegreeUnderflowError("use the scalar Lie derivative");
    KForm first = exteriorDerivative(interiorProduct(x, w), frozenTime);
    const std::size_t effectiveDim =
        w.chart()->dim() - ((frozenTime && w.chart()->timeIndex()) ? 1 : 0);
    if (w.degree() >= effectiveDim) return first;
    KForm second = interiorProduct(x, exteriorDerivative(w, frozenTime));
    return addForms(first, second);
}

inline ScalarField lieDerivative(const VectorField& x, const ScalarField& f) {
    return directionalDerivative(x, f);
}

// [X, Y]^i = X^j dY^i/dx^j - Y^j dX^i/dx^j, assembled lazily per component.
inline VectorField lieBracket(const VectorField& x, const VectorField& y) {
    if (x.chart() != y.chart()) throw ChartMismatchError("bracket across different charts");
    const ChartPtr& chart = x.chart();
    std::vector<ScalarField> comps;
    for (std::size_t i = 0; i < chart->dim(); ++i) {
        comps.push_back(makeField(
            chart,
            [x, y, i](const auto& ctx) {
                using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
                S acc = S(0.0);
                for (std::size_t j = 0; j < ctx.coords.size(); ++j) {
                    acc = acc + x.component(j).eval(ctx) * partialAt(y.component(i), j, ctx);
                    acc = acc - y.component(j).eval(ctx) * partialAt(x.component(i), j, ctx);
                }
                return acc;
            },
            x.timeDependent() || y.timeDependent()));
    }
    return VectorField(chart, comps);
}

namespace detail {

template <ad::Scalar S>
S detSmall(const std::vector<S>& m, std::size_t k) {
    if (k == 0) return S(1.0);
    std::vector<std::size_t> perm(k);
    for (std::size_t i = 0; i < k; ++i) perm[i] = i;
    S acc = S(0.0);
    do {
        int sign = 1;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                if (perm[i] > perm[j]) sign = -sign;
        S prod = S(1.0);
        for (std::size_t r = 0; r < k; ++r) prod = prod * m[r * k + perm[r]];
        acc = acc + S(static_cast<double>(sign)) * prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc;
}

// All strictly increasing index sets of size k drawn from {0, ..., dim-1}.
inline std::vector<IndexSet> increasingIndexSets(std::size_t dim, std::size_t k) {
    std::vector<IndexSet> out;
    IndexSet cur;
    auto rec = [&](auto&& self, std::size_t start) -> void {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = start; i < dim; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

}  // namespace detail

// Pullback along a chart map: (Phi^* w)_J(p) = sum_I w_I(Phi(p)) det dPhi_{I,J}(p).
// Jacobian columns come from one dual-seeded pass per source index in J; the
// image point is checked against the target chart's domain on primal values.
inline KForm pullback(const ChartMap& phi, const KForm& w) {
    if (w.chart() != phi.target())
        throw ChartMismatchError("pullback needs a form on the map's target chart");
    KForm out(phi.source(), w.degree());
    const std::size_t k = w.degree();
    const std::size_t dim = phi.source()->dim();
    if (k == 0) {
        throw DegreeUnderflowError("pullback of a degree-0 form; compose instead");
    }
    for (const IndexSet& j : detail::increasingIndexSets(dim, k)) {
        ScalarField coeff = makeField(phi.source(), [phi, w, j, k](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            if constexpr (Lift<S>::capped) {
                throw NestingOverflowError();
                return S(0.0);  // unreachable; fixes return-type deduction
            } else {
                const std::size_t n = phi.components().size();
                std::vector<S> y = phi.eval(ctx);
                std::vector<double> yPrimal(n);
                for (std::size_t i = 0; i < n; ++i) yPrimal[i] = ad::primal(y[i]);
                if (!phi.target()->admissible(yPrimal))
                    throw TargetInadmissibleError(
                        "pullback sample maps outside the target chart domain");
                // Jacobian columns d Phi^i / d x^{j_b}, one seeded pass each.
                std::vector<std::vector<S>> cols(k);
                for (std::size_t b = 0; b < k; ++b) {
                    auto seeded = seedDirection(ctx, j[b]);
                    cols[b].resize(n);
                    for (std::size_t i = 0; i < n; ++i)
                        cols[b][i] = phi.components()[i].eval(seeded).dot;
                }
                EvalCtx<S> yctx;
                yctx.coords = std::move(y);
                yctx.t = ctx.t;
                S acc = S(0.0);
                std::vector<S> minor(k * k);
                for (const auto& [idx, f] : w.coefficients()) {
                    for (std::size_t r = 0; r < k; ++r)
                        for (std::size_t c = 0; c < k; ++c) minor[r * k + c] = cols[c][idx[r]];
                    acc = acc + f.eval(yctx) * detail::detSmall(minor, k);
                }
                return acc;
            }
        });
        out.setCoefficient(j, coeff);
    }
    return out;
}

inline ScalarField pullbackScalar(const ChartMap& phi, const ScalarField& f) {
    if (f.chart() != phi.target())
        throw ChartMismatchError("pullback needs a field on the map's target chart");
    return makeField(
        phi.source(),
        [phi, f](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            EvalCtx<S> yctx;
            yctx.coords = phi.eval(ctx);
            yctx.t = ctx.t;
            return f.eval(yctx);
        },
        f.timeDependent());
}

// ---- pointwise residuals (shared by every certification routine) -----------

inline double scalarResidualAt(const ScalarField& a, const ScalarField& b,
                               const EvalCtx<D0>& ctx) {
    return residualMetric(a.eval(ctx), b.eval(ctx));
}

inline double formResidualAt(const KForm& a, const KForm& b, const EvalCtx<D0>& ctx) {
    double worst = 0.0;
    auto visit = [&](const IndexSet& idx) {
        double va = a.coefficientAt(idx, ctx);
        double vb = b.coefficientAt(idx, ctx);
        worst = std::max(worst, residualMetric(va, vb));
    };
    for (const auto& [idx, f] : a.coefficients()) visit(idx);
    for (const auto& [idx, f] : b.coefficients())
        if (a.coefficients().find(idx) == a.coefficients().end()) visit(idx);
    return worst;
}

inline double formMagnitudeAt(const KForm& a, const EvalCtx<D0>& ctx) {
    double worst = 0.0;
    for (const auto& [idx, f] : a.coefficients()) {
        double v = f.eval(ctx);
        worst = std::max(worst, residualMetric(v, 0.0));
    }
    return worst;
}

inline double vectorResidualAt(const VectorField& x, const VectorField& y,
                               const EvalCtx<D0>& ctx) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.components().size(); ++i)
        worst = std::max(worst,
                         residualMetric(x.component(i).eval(ctx), y.component(i).eval(ctx)));
    return worst;
}

}  // namespace lcskit
