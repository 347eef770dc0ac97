// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Locally conformal symplectic structures: a nondegenerate 2-form Omega and a
// closed 1-form theta (the Lee form) with d Omega = theta ^ Omega. The sign
// convention used throughout fixes the Hamiltonian field by
//
//     X_H . Omega = d^theta H = dH - H theta,
//
// which on a cotangent chart with theta = theta_i(q) dq^i yields
// dq_k/dt = -dH/dp_k (note the sign) and
// dp_k/dt = dH/dq_k - H theta_k - p_k theta_j dH/dp_j + theta_k p_j dH/dp_j.
//
// Musical maps use the component convention (v . Omega)_j = sum_i v^i O_ij,
// so sharp solves O^T v = alpha. The degenerate extended form on R x M is
// never inverted: extended Hamiltonian fields fix the t-component to zero and
// solve the frozen-time spatial block.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lcskit/check.hpp"
#include "lcskit/geometry.hpp"
#include "lcskit/linalg.hpp"

namespace lcskit {

struct LcsStructure {
    ChartPtr chart;
    KForm omega;  // degree 2, nondegenerate on the domain
    KForm theta;  // degree 1, closed

    LcsStructure(ChartPtr c, KForm o, KForm th)
        : chart(std::move(c)), omega(std::move(o)), theta(std::move(th)) {
        if (omega.chart() != chart || theta.chart() != chart)
            throw ChartMismatchError("structure forms must live on the structure chart");
        if (omega.degree() != 2 || theta.degree() != 1)
            throw ChartMismatchError("structure needs a 2-form and a 1-form");
        std::size_t spatial = chart->dim() - (chart->timeIndex() ? 1 : 0);
        if (spatial % 2 != 0)
            throw ChartMismatchError("structure needs an even number of spatial coordinates");
    }
};

// Component matrix O_ij = Omega(d_i, d_j) over the given index list.
template <ad::Scalar S>
ad::SquareMatrix<S> omegaMatrix(const KForm& omega, const std::vector<std::size_t>& dirs,
                                const EvalCtx<S>& ctx) {
    ad::SquareMatrix<S> m(dirs.size());
    for (std::size_t a = 0; a < dirs.size(); ++a) {
        for (std::size_t b = a + 1; b < dirs.size(); ++b) {
            S v = omega.coefficientAt({std::min(dirs[a], dirs[b]), std::max(dirs[a], dirs[b])},
                                      ctx);
            if (dirs[a] > dirs[b]) v = -v;
            m(a, b) = v;
            m(b, a) = -v;
        }
    }
    return m;
}

template <ad::Scalar S>
ad::SquareMatrix<S> omegaMatrix(const LcsStructure& s, const EvalCtx<S>& ctx) {
    std::vector<std::size_t> dirs(s.chart->dim());
    for (std::size_t i = 0; i < dirs.size(); ++i) dirs[i] = i;
    return omegaMatrix(s.omega, dirs, ctx);
}

// theta(X) as a lazy scalar field.
inline ScalarField contractOneForm(const KForm& theta, const VectorField& x) {
    if (theta.degree() != 1) throw ChartMismatchError("contractOneForm needs a 1-form");
    return makeField(
        x.chart(),
        [theta, x](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            S acc = S(0.0);
            for (const auto& [idx, f] : theta.coefficients())
                acc = acc + f.eval(ctx) * x.component(idx[0]).eval(ctx);
            return acc;
        },
        theta.timeDependent() || x.timeDependent());
}

// flat: X . Omega.
inline KForm musicalFlat(const LcsStructure& s, const VectorField& x) {
    return interiorProduct(x, s.omega);
}

namespace detail {

// Shared solve for sharp-like operations: O^T v = alpha over the listed
// directions, at any scalar level.
template <ad::Scalar S>
std::vector<S> sharpSolve(const KForm& omega, const std::vector<std::size_t>& dirs,
                          const std::vector<S>& alpha, const EvalCtx<S>& ctx,
                          ad::SolveStats* stats = nullptr) {
    ad::SquareMatrix<S> m = omegaMatrix(omega, dirs, ctx).transposed();
    return ad::solveLinear(std::move(m), alpha, stats);
}

}  // namespace detail

// sharp: the vector field with (sharp alpha) . Omega = alpha.
inline VectorField musicalSharp(const LcsStructure& s, const KForm& alpha) {
    if (alpha.degree() != 1) throw ChartMismatchError("sharp needs a 1-form");
    if (alpha.chart() != s.chart) throw ChartMismatchError("sharp across different charts");
    std::vector<std::size_t> dirs(s.chart->dim());
    for (std::size_t i = 0; i < dirs.size(); ++i) dirs[i] = i;
    std::vector<ScalarField> comps;
    for (std::size_t i = 0; i < s.chart->dim(); ++i) {
        comps.push_back(makeField(s.chart, [s, alpha, dirs, i](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            std::vector<S> a;
            a.reserve(dirs.size());
            for (std::size_t j : dirs) a.push_back(alpha.coefficientAt({j}, ctx));
            return detail::sharpSolve(s.omega, dirs, a, ctx)[i];
        }));
    }
    return VectorField(s.chart, comps);
}

// d^theta f = df - f theta  (and d^theta w = dw - theta ^ w). On extended
// charts frozenTime=true omits the dt component of df, which is the fixed-t
// differential used by frozen-time identities.
inline KForm twistedDifferential(const LcsStructure& s, const ScalarField& f,
                                 bool frozenTime = false) {
    return subForms(exteriorDerivative(f, frozenTime), scaleFormByField(s.theta, f));
}

inline KForm twistedDifferential(const LcsStructure& s, const KForm& w,
                                 bool frozenTime = false) {
    return subForms(exteriorDerivative(w, frozenTime), wedge(s.theta, w));
}

// X_H via the defining contraction: solve O^T v = (d^theta H) componentwise.
inline VectorField hamiltonianVectorField(const LcsStructure& s, const ScalarField& h) {
    if (h.chart() != s.chart)
        throw ChartMismatchError("Hamiltonian must live on the structure chart");
    std::vector<std::size_t> dirs(s.chart->dim());
    for (std::size_t i = 0; i < dirs.size(); ++i) dirs[i] = i;
    std::vector<ScalarField> comps;
    for (std::size_t i = 0; i < s.chart->dim(); ++i) {
        comps.push_back(makeField(
            s.chart,
            [s, h, dirs, i](const auto& ctx) {
                using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
                std::vector<S> b;
                b.reserve(dirs.size());
                S hv = h.eval(ctx);
                for (std::size_t j : dirs) {
                    S dj = partialAt(h, j, ctx);
                    b.push_back(dj - hv * s.theta.coefficientAt({j}, ctx));
                }
                return detail::sharpSolve(s.omega, dirs, b, ctx)[i];
            },
            h.timeDependent()));
    }
    return VectorField(s.chart, comps);
}

// Hamilton equations on a cotangent chart (q_1..q_n, p_1..p_n) with base Lee
// form theta = theta_i(q) dq^i, in closed form (no linear solve):
//   dq_k/dt = -dH/dp_k
//   dp_k/dt =  dH/dq_k - H theta_k - p_k theta_j dH/dp_j + theta_k p_j dH/dp_j
inline VectorField cotangentHamiltonEquations(const ChartPtr& chart, const ScalarField& h,
                                              const std::vector<ScalarField>& thetaQ) {
    if (chart->dim() % 2 != 0)
        throw ChartMismatchError("cotangent chart needs even dimension");
    const std::size_t n = chart->dim() / 2;
    if (thetaQ.size() != n)
        throw ChartMismatchError("need one Lee-form component per base coordinate");
    std::vector<ScalarField> comps(chart->dim());
    for (std::size_t k = 0; k < n; ++k) {
        comps[k] = makeField(
            chart, [h, k, n](const auto& ctx) { return -partialAt(h, n + k, ctx); },
            h.timeDependent());
        comps[n + k] = makeField(
            chart,
            [h, thetaQ, k, n](const auto& ctx) {
                using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
                S hv = h.eval(ctx);
                S thK = thetaQ[k].eval(ctx);
                S acc = partialAt(h, k, ctx) - hv * thK;
                for (std::size_t j = 0; j < n; ++j) {
                    S dHdPj = partialAt(h, n + j, ctx);
                    S pj = ctx.coords[n + j];
                    S thJ = thetaQ[j].eval(ctx);
                    acc = acc - ctx.coords[n + k] * thJ * dHdPj + thK * pj * dHdPj;
                }
                return acc;
            },
            h.timeDependent());
    }
    return VectorField(chart, comps);
}

// The cotangent structure those equations belong to: theta = theta_i(q) dq^i,
// lambda = p_i dq^i, Omega = d^theta lambda, assembled with the generic
// exterior-calculus operations.
inline LcsStructure cotangentStructure(const ChartPtr& chart,
                                       const std::vector<ScalarField>& thetaQ) {
    if (chart->dim() % 2 != 0)
        throw ChartMismatchError("cotangent chart needs even dimension");
    const std::size_t n = chart->dim() / 2;
    KForm theta(chart, 1);
    for (std::size_t k = 0; k < n; ++k) theta.setCoefficient({k}, thetaQ[k]);
    KForm lambda(chart, 1);
    for (std::size_t k = 0; k < n; ++k)
        lambda.setCoefficient({k}, coordinateField(chart, n + k));
    KForm omega = subForms(exteriorDerivative(lambda), wedge(theta, lambda));
    return LcsStructure(chart, omega, theta);
}

// ---- Jacobi bracket --------------------------------------------------------

// {f, g} = Omega(X_f, X_g) = X_g(f) - f theta(X_g). `value` evaluates the
// directional-derivative route (one solve); `crossCheck` evaluates the
// Omega-contraction route (two solves). Certification compares both.
struct JacobiBracket {
    ScalarField value;
    ScalarField crossCheck;
};

inline JacobiBracket jacobiBracket(const LcsStructure& s, const ScalarField& f,
                                   const ScalarField& g) {
    VectorField xf = hamiltonianVectorField(s, f);
    VectorField xg = hamiltonianVectorField(s, g);
    ScalarField direct = makeField(
        s.chart,
        [s, f, xg](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            S acc = S(0.0);
            for (std::size_t j = 0; j < ctx.coords.size(); ++j)
                acc = acc + xg.component(j).eval(ctx) * partialAt(f, j, ctx);
            S th = S(0.0);
            for (const auto& [idx, tf] : s.theta.coefficients())
                th = th + tf.eval(ctx) * xg.component(idx[0]).eval(ctx);
            return acc - f.eval(ctx) * th;
        },
        f.timeDependent() || g.timeDependent());
    ScalarField viaOmega = makeField(
        s.chart,
        [s, xf, xg](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            std::vector<std::vector<S>> args{xf.eval(ctx), xg.eval(ctx)};
            return s.omega.apply(args, ctx);
        },
        f.timeDependent() || g.timeDependent());
    return {direct, viaOmega};
}

// ---- extended phase space (R x M) -------------------------------------------

struct ExtendedSystem {
    LcsStructure base;
    ScalarField h;       // on the base chart; may bind t
    ChartPtr extended;   // base coordinates plus trailing "t"
    KForm omegaHat;      // pullback of Omega along the projection
    KForm thetaHat;
    ScalarField hHat;    // H re-addressed on the extended chart
};

namespace detail {

// Re-addresses a base-chart field on the extended chart: the trailing
// coordinate becomes the time binding of the base evaluation, so base fields
// that mention t keep working.
inline ScalarField liftFieldToExtended(const ChartPtr& ext, const ScalarField& f) {
    const std::size_t baseDim = ext->dim() - 1;
    return makeField(ext, [f, baseDim](const auto& ctx) {
        using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
        EvalCtx<S> b;
        b.coords.assign(ctx.coords.begin(), ctx.coords.begin() + baseDim);
        b.t = ctx.coords[baseDim];
        return f.eval(b);
    });
}

inline KForm liftFormToExtended(const ChartPtr& ext, const KForm& w) {
    KForm out(ext, w.degree());
    for (const auto& [idx, f] : w.coefficients())
        out.setCoefficient(idx, liftFieldToExtended(ext, f));
    return out;
}

}  // namespace detail

// Builds R x M: the base chart's names plus "t" (marked as the time
// coordinate), hat forms pulled back along the projection, and H lifted.
inline ExtendedSystem extend(const LcsStructure& s, const ScalarField& h,
                             double tLo = 0.0, double tHi = 1.0) {
    std::vector<std::string> names = s.chart->names();
    names.emplace_back("t");
    auto extChart = Chart::make(std::move(names));
    for (std::size_t i = 0; i < s.chart->dim(); ++i) {
        extChart->setDomain(i, s.chart->domainLo(i), s.chart->domainHi(i));
        extChart->setSampleBox(i, s.chart->sampleLo(i), s.chart->sampleHi(i));
    }
    extChart->setSampleBox(s.chart->dim(), tLo, tHi);
    extChart->setMargin(s.chart->margin());
    for (const auto& e : s.chart->exclusions())
        extChart->addExclusion(dsl::parse(e.render(), extChart->namesPtr(), false));
    extChart->markTime("t");
    ChartPtr ext = extChart;

    KForm omegaHat = detail::liftFormToExtended(ext, s.omega);
    KForm thetaHat = detail::liftFormToExtended(ext, s.theta);
    ScalarField hHat = detail::liftFieldToExtended(ext, h);
    return ExtendedSystem{s, h, ext, std::move(omegaHat), std::move(thetaHat),
                          std::move(hHat)};
}

// View of the hat forms as a structure on the extended chart (Omega-hat is
// degenerate in dt; only frozen-time operations may solve against it).
inline LcsStructure extendedStructure(const ExtendedSystem& es) {
    return LcsStructure(es.extended, es.omegaHat, es.thetaHat);
}

inline std::size_t extendedTimeIndex(const ExtendedSystem& es) {
    return *es.extended->timeIndex();
}

// Lifts a base vector field to R x M with zero t-component (X . dt = 0).
inline VectorField liftFieldToExtended(const ExtendedSystem& es, const VectorField& x) {
    if (x.chart() != es.base.chart)
        throw ChartMismatchError("lift needs a field on the base chart");
    std::vector<ScalarField> comps;
    comps.reserve(es.extended->dim());
    for (const auto& c : x.components()) comps.push_back(detail::liftFieldToExtended(es.extended, c));
    comps.push_back(constantField(es.extended, 0.0));
    return VectorField(es.extended, std::move(comps));
}

// Embeds a base endomap as a time-preserving map on R x M (F*t = t).
inline ChartMap liftMapToExtended(const ExtendedSystem& es, const ChartMap& phi) {
    if (phi.source() != es.base.chart || phi.target() != es.base.chart)
        throw ChartMismatchError("lift needs an endomap of the base chart");
    std::vector<ScalarField> comps;
    comps.reserve(es.extended->dim());
    for (const auto& c : phi.components())
        comps.push_back(detail::liftFieldToExtended(es.extended, c));
    comps.push_back(coordinateField(es.extended, extendedTimeIndex(es)));
    return ChartMap(es.extended, es.extended, std::move(comps));
}

// The extended Hamiltonian field of any generator on the extended chart:
// t-component identically zero, spatial components from the frozen-time
// 2n x 2n solve against d^theta g. The (2n+1)-dimensional hat matrix is
// degenerate and never inverted.
inline VectorField extendedHamiltonianFieldOf(const ExtendedSystem& es,
                                              const ScalarField& gHat) {
    const std::size_t baseDim = es.base.chart->dim();
    std::vector<std::size_t> dirs(baseDim);
    for (std::size_t i = 0; i < baseDim; ++i) dirs[i] = i;
    std::vector<ScalarField> comps(es.extended->dim());
    for (std::size_t i = 0; i < baseDim; ++i) {
        comps[i] = makeField(es.extended, [es, gHat, dirs, i](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            std::vector<S> b;
            b.reserve(dirs.size());
            S gv = gHat.eval(ctx);
            for (std::size_t j : dirs) {
                S dj = partialAt(gHat, j, ctx);
                b.push_back(dj - gv * es.thetaHat.coefficientAt({j}, ctx));
            }
            return detail::sharpSolve(es.omegaHat, dirs, b, ctx)[i];
        });
    }
    comps[baseDim] = constantField(es.extended, 0.0);
    return VectorField(es.extended, comps);
}

inline VectorField extendedHamiltonianField(const ExtendedSystem& es) {
    return extendedHamiltonianFieldOf(es, es.hHat);
}

// d/dt on the extended chart.
inline VectorField timeShiftField(const ChartPtr& ext) {
    if (!ext->timeIndex()) throw ChartMismatchError("chart has no time coordinate");
    std::vector<ScalarField> comps;
    for (std::size_t i = 0; i < ext->dim(); ++i)
        comps.push_back(constantField(ext, i == *ext->timeIndex() ? 1.0 : 0.0));
    return VectorField(ext, comps);
}

// Autonomization X~ = X_H + d/dt.
inline VectorField autonomize(const ExtendedSystem& es) {
    return addVectorFields(extendedHamiltonianField(es), timeShiftField(es.extended));
}

// dt as a 1-form on the extended chart.
inline KForm timeForm(const ChartPtr& ext) {
    if (!ext->timeIndex()) throw ChartMismatchError("chart has no time coordinate");
    KForm out(ext, 1);
    out.setCoefficient({*ext->timeIndex()}, constantField(ext, 1.0));
    return out;
}

// ---- structure validation ---------------------------------------------------

// Certifies d theta = 0, d Omega = theta ^ Omega, and nondegeneracy (the
// smallest LU pivot of the Omega matrix, relative to its largest entry).
inline CheckReport validateLcs(const LcsStructure& s,
                               const std::vector<std::vector<double>>& points,
                               double tolerance) {
    KForm dTheta = exteriorDerivative(s.theta);
    KForm dOmega = exteriorDerivative(s.omega);
    KForm thetaWedgeOmega = wedge(s.theta, s.omega);
    KForm zero2(s.chart, dTheta.degree());
    std::vector<std::size_t> dirs(s.chart->dim());
    for (std::size_t i = 0; i < dirs.size(); ++i) dirs[i] = i;

    std::vector<IdentityDecl> decls{
        {"lee_form_closed", false, true, 0.0},
        {"conformal_structure_equation", false, true, 0.0},
        {"nondegeneracy", true, true, 1e-12},
    };
    return certify(
        "validate_lcs", points, tolerance, decls,
        [&](std::size_t, std::span<const double> x, std::vector<double>& out) {
            EvalCtx<D0> ctx = liftCtx<D0>(x);
            out[0] = formResidualAt(dTheta, zero2, ctx);
            out[1] = formResidualAt(dOmega, thetaWedgeOmega, ctx);
            ad::SquareMatrix<D0> m = omegaMatrix(s.omega, dirs, ctx);
            const double scale = m.maxAbsPrimal();
            ad::SolveStats stats;
            std::vector<double> rhs(dirs.size(), 0.0);
            try {
                ad::solveLinear(std::move(m), rhs, &stats);
                out[2] = scale > 0.0 ? stats.minPivot / scale : 0.0;
            } catch (const SingularMatrixError&) {
                out[2] = 0.0;
            }
            return;
        });
}

}  // namespace lcskit
