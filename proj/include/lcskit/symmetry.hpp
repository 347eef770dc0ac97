// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Symmetry certification. Each check walks a sample set, evaluates the
// residuals of its defining identities pointwise (all derivatives by dual
// seeding, never finite differences), and reduces to a CheckReport. Estimated
// parameters (conformal degrees, proportionality constants) are medians of
// robust pointwise estimates; least-squares fits happen per point, medians
// across points.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcskit/check.hpp"
#include "lcskit/dynamics.hpp"
#include "lcskit/geometry.hpp"
#include "lcskit/lcs.hpp"

namespace lcskit {

struct HamiltonianSystem {
    LcsStructure structure;
    ScalarField h;
};

inline constexpr double kDegreeHamiltonianFloor = 0.1;

namespace detail {

inline double formResidualFiltered(const KForm& a, const KForm& b, const EvalCtx<D0>& ctx,
                                   const std::function<bool(const IndexSet&)>& keep) {
    double worst = 0.0;
    auto visit = [&](const IndexSet& idx) {
        if (!keep(idx)) return;
        worst = std::max(worst, residualMetric(a.coefficientAt(idx, ctx),
                                               b.coefficientAt(idx, ctx)));
    };
    for (const auto& [idx, f] : a.coefficients()) visit(idx);
    for (const auto& [idx, f] : b.coefficients())
        if (a.coefficients().find(idx) == a.coefficients().end()) visit(idx);
    return worst;
}

// Relative smallest pivot of the Jacobian of a map at a point (invertibility
// probe; 0 when singular).
inline double jacobianPivotMargin(const ChartMap& phi, std::span<const double> x) {
    ad::SquareMatrix<double> j = phi.jacobianAt(x);
    const double scale = j.maxAbsPrimal();
    if (!(scale > 0.0)) return 0.0;
    std::vector<double> rhs(j.size(), 0.0);
    ad::SolveStats stats;
    try {
        ad::solveLinear(std::move(j), rhs, &stats);
    } catch (const SingularMatrixError&) {
        return 0.0;
    }
    return stats.minPivot / scale;
}

}  // namespace detail

// ---- canonical maps and generators ------------------------------------------

// Phi is canonical when Phi*Omega = Omega and Phi*theta = theta. The Jacobian
// pivot margin is reported as an invertibility probe.
inline CheckReport checkCanonicalMap(const ChartMap& phi, const LcsStructure& s,
                                     const std::vector<std::vector<double>>& points,
                                     double tolerance) {
    if (phi.source() != s.chart || phi.target() != s.chart)
        throw ChartMismatchError("canonical-map check needs an endomap of the structure chart");
    KForm pbOmega = pullback(phi, s.omega);
    KForm pbTheta = pullback(phi, s.theta);
    std::vector<IdentityDecl> decls{
        {"pullback_omega", false, true, 0.0},
        {"pullback_theta", false, true, 0.0},
        {"jacobian_invertibility", true, true, 1e-12},
    };
    return certify("check_canonical_map", points, tolerance, decls,
                   [&](std::size_t, std::span<const double> x, std::vector<double>& out) {
                       EvalCtx<D0> ctx = liftCtx<D0>(x);
                       out[0] = formResidualAt(pbOmega, s.omega, ctx);
                       out[1] = formResidualAt(pbTheta, s.theta, ctx);
                       out[2] = detail::jacobianPivotMargin(phi, x);
                   });
}

// X generates canonical transformations when theta(X) = 0, d^theta(X . Omega)
// = 0, and L_X Omega = 0 (frozen-time on extended charts). The median of
// theta(X) is reported for diagnosing strictly conformal generators.
inline CheckReport checkCanonicalGenerator(const VectorField& x, const LcsStructure& s,
                                           const std::vector<std::vector<double>>& points,
                                           double tolerance) {
    ScalarField thetaOfX = contractOneForm(s.theta, x);
    KForm contraction = interiorProduct(x, s.omega);
    KForm twisted = twistedDifferential(s, contraction, /*frozenTime=*/true);
    KForm lie = lieDerivative(x, s.omega, /*frozenTime=*/true);
    KForm zero2(s.chart, 2);
    std::vector<IdentityDecl> decls{
        {"theta_contraction", false, true, 0.0},
        {"twisted_closed_contraction", false, true, 0.0},
        {"lie_omega", false, true, 0.0},
    };
    std::vector<double> thetaVals(points.size(), 0.0);
    CheckReport rep = certify(
        "check_canonical_generator", points, tolerance, decls,
        [&](std::size_t i, std::span<const double> p, std::vector<double>& out) {
            EvalCtx<D0> ctx = liftCtx<D0>(p);
            double th = thetaOfX.eval(ctx);
            thetaVals[i] = th;
            out[0] = residualMetric(th, 0.0);
            out[1] = formResidualAt(twisted, zero2, ctx);
            out[2] = formResidualAt(lie, zero2, ctx);
        });
    if (!points.empty()) rep.estimates["theta_of_x_median"] = median(thetaVals);
    return rep;
}

// Extended canonical map per the graded definition: F*t = t, F*theta-hat =
// theta-hat, and F*Omega-hat = Omega-hat + d^theta K ^ dt. The frozen-time
// consequence (each fixed-t slice is canonical for Omega) is certified as the
// spatial block of the same pullback.
inline CheckReport checkExtendedCanonical(const ChartMap& f, const ScalarField& kGauge,
                                          const ExtendedSystem& es,
                                          const std::vector<std::vector<double>>& points,
                                          double tolerance) {
    if (f.source() != es.extended || f.target() != es.extended)
        throw ChartMismatchError("extended-canonical check needs an endomap of R x M");
    const std::size_t tIdx = extendedTimeIndex(es);
    LcsStructure hatStructure = extendedStructure(es);
    KForm pbOmega = pullback(f, es.omegaHat);
    KForm pbTheta = pullback(f, es.thetaHat);
    KForm gaugeShift =
        addForms(es.omegaHat,
                 wedge(twistedDifferential(hatStructure, kGauge), timeForm(es.extended)));
    auto spatial = [tIdx](const IndexSet& idx) {
        for (std::size_t i : idx)
            if (i == tIdx) return false;
        return true;
    };
    std::vector<IdentityDecl> decls{
        {"time_preservation", false, true, 0.0},
        {"pullback_theta_hat", false, true, 0.0},
        {"omega_gauge_shift", false, true, 0.0},
        {"frozen_time_slices_canonical", false, true, 0.0},
    };
    return certify("check_extended_canonical", points, tolerance, decls,
                   [&](std::size_t, std::span<const double> x, std::vector<double>& out) {
                       EvalCtx<D0> ctx = liftCtx<D0>(x);
                       double ft = f.components()[tIdx].eval(ctx);
                       out[0] = residualMetric(ft, x[tIdx]);
                       out[1] = formResidualAt(pbTheta, es.thetaHat, ctx);
                       out[2] = formResidualAt(pbOmega, gaugeShift, ctx);
                       out[3] = detail::formResidualFiltered(pbOmega, es.omegaHat, ctx, spatial);
                   });
}

// ---- canonoid maps and generators --------------------------------------------

// With a generating function K: X_H . Psi*Omega = d^{Psi*theta} K.
// Without: the local-existence criterion d^{Psi*theta}(X_H . Psi*Omega) = 0.
inline CheckReport checkCanonoidMap(const ChartMap& psi, const HamiltonianSystem& sys,
                                    const std::vector<std::vector<double>>& points,
                                    double tolerance,
                                    const std::optional<ScalarField>& kGen = {}) {
    const LcsStructure& s = sys.structure;
    if (psi.source() != s.chart || psi.target() != s.chart)
        throw ChartMismatchError("canonoid check needs an endomap of the structure chart");
    VectorField xh = hamiltonianVectorField(s, sys.h);
    KForm pbOmega = pullback(psi, s.omega);
    KForm pbTheta = pullback(psi, s.theta);
    LcsStructure pulled(s.chart, pbOmega, pbTheta);
    KForm contraction = interiorProduct(xh, pbOmega);
    if (kGen) {
        KForm rhsForm = twistedDifferential(pulled, *kGen);
        std::vector<IdentityDecl> decls{{"defining_equation", false, true, 0.0}};
        return certify("check_canonoid_map", points, tolerance, decls,
                       [&](std::size_t, std::span<const double> x, std::vector<double>& out) {
                           EvalCtx<D0> ctx = liftCtx<D0>(x);
                           out[0] = formResidualAt(contraction, rhsForm, ctx);
                       });
    }
    KForm existence = twistedDifferential(pulled, contraction);
    KForm zero2(s.chart, 2);
    std::vector<IdentityDecl> decls{{"local_existence", false, true, 0.0}};
    return certify("check_canonoid_map", points, tolerance, decls,
                   [&](std::size_t, std::span<const double> x, std::vector<double>& out) {
                       EvalCtx<D0> ctx = liftCtx<D0>(x);
                       out[0] = formResidualAt(existence, zero2, ctx);
                   });
}

// X generates a canonoid group for H iff [X, X_H] is locally Hamiltonian,
// certified as d^theta([X, X_H] . Omega) = 0. The best-fit proportionality
// [X, X_H] ~ c X_H is a non-gating diagnostic.
inline CheckReport checkCanonoidGenerator(const VectorField& x, const HamiltonianSystem& sys,
                                          const std::vector<std::vector<double>>& points,
                                          double tolerance) {
    const LcsStructure& s = sys.structure;
    VectorField xh = hamiltonianVectorField(s, sys.h);
    VectorField bracket = lieBracket(x, xh);
    KForm nu = interiorProduct(bracket, s.omega);
    KForm closedness = twistedDifferential(s, nu, /*frozenTime=*/true);
    KForm zero2(s.chart, 2);
    std::vector<IdentityDecl> decls{
        {"bracket_locally_hamiltonian", false, true, 0.0},
        {"bracket_proportional_to_xh", false, false, 0.0},
    };
    std::vector<double> cVals(points.size(), std::numeric_limits<double>::quiet_NaN());
    CheckReport rep = certify(
        "check_canonoid_generator", points, tolerance, decls,
        [&](std::size_t i, std::span<const double> p, std::vector<double>& out) {
            EvalCtx<D0> ctx = liftCtx<D0>(p);
            out[0] = formResidualAt(closedness, zero2, ctx);
            std::vector<double> bv = bracket.eval(ctx);
            std::vector<double> hv = xh.eval(ctx);
            double dot = 0.0, hh = 0.0, bb = 0.0;
            for (std::size_t j = 0; j < bv.size(); ++j) {
                dot += bv[j] * hv[j];
                hh += hv[j] * hv[j];
                bb += bv[j] * bv[j];
            }
            if (hh > 0.0) {
                double c = dot / hh;
                cVals[i] = c;
                double res2 = std::max(0.0, bb - c * c * hh);
                out[1] = std::sqrt(res2) / (1.0 + std::sqrt(bb));
            } else {
                out[1] = std::sqrt(bb) / (1.0 + std::sqrt(bb));
            }
        });
    std::vector<double> defined;
    for (double c : cVals)
        if (!std::isnan(c)) defined.push_back(c);
    if (!defined.empty()) rep.estimates["bracket_ratio_median"] = median(defined);
    return rep;
}

// ---- scaling symmetries --------------------------------------------------------

// Degree-(Lambda, beta) scaling symmetry: L_X Omega = beta Omega, L_X theta =
// 0, X(H) = Lambda H, with the consequence [X, X_H] = (Lambda - beta) X_H.
// Degrees are estimated as medians over samples with |H| above a floor unless
// expected values are supplied.
inline CheckReport checkScalingSymmetry(const VectorField& x, const HamiltonianSystem& sys,
                                        const std::vector<std::vector<double>>& points,
                                        double tolerance,
                                        std::optional<std::pair<double, double>> expected = {}) {
    const LcsStructure& s = sys.structure;
    KForm lieOmega = lieDerivative(x, s.omega, /*frozenTime=*/true);
    KForm lieTheta = lieDerivative(x, s.theta, /*frozenTime=*/true);
    KForm zero1(s.chart, 1);
    ScalarField xOfH = directionalDerivative(x, sys.h);
    VectorField xh = hamiltonianVectorField(s, sys.h);
    VectorField bracket = lieBracket(x, xh);

    // Estimation pass: pointwise Lambda = X(H)/H (|H| above floor) and
    // pointwise least-squares beta over the Omega coefficients.
    std::vector<double> lambdaVals(points.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> betaVals(points.size(), std::numeric_limits<double>::quiet_NaN());
    parallelFor(points.size(), [&](std::size_t i) {
        EvalCtx<D0> ctx = liftCtx<D0>(points[i]);
        double hv = sys.h.eval(ctx);
        if (std::abs(hv) > kDegreeHamiltonianFloor) lambdaVals[i] = xOfH.eval(ctx) / hv;
        double num = 0.0, den = 0.0;
        auto accumulate = [&](const IndexSet& idx) {
            double lv = lieOmega.coefficientAt(idx, ctx);
            double ov = s.omega.coefficientAt(idx, ctx);
            num += lv * ov;
            den += ov * ov;
        };
        for (const auto& [idx, f] : lieOmega.coefficients()) accumulate(idx);
        for (const auto& [idx, f] : s.omega.coefficients())
            if (lieOmega.coefficients().find(idx) == lieOmega.coefficients().end())
                accumulate(idx);
        if (den > 0.0) betaVals[i] = num / den;
    });
    std::vector<double> lambdaDefined, betaDefined;
    for (double v : lambdaVals)
        if (!std::isnan(v)) lambdaDefined.push_back(v);
    for (double v : betaVals)
        if (!std::isnan(v)) betaDefined.push_back(v);

    double lambda, beta;
    bool estimated = lambdaDefined.size() >= kMinSamplesForVerdict && !betaDefined.empty();
    if (estimated) {
        lambda = median(lambdaDefined);
        beta = median(betaDefined);
    } else if (expected) {
        lambda = expected->first;
        beta = expected->second;
    } else {
        throw IndeterminateDegreeError(
            "Hamiltonian magnitude exceeds " + std::to_string(kDegreeHamiltonianFloor) +
            " on only " + std::to_string(lambdaDefined.size()) +
            " samples; cannot estimate a degree");
    }
    if (expected) {
        lambda = expected->first;
        beta = expected->second;
    }

    KForm omegaScaled = scaleForm(s.omega, beta);
    VectorField xhScaled = scaleVectorField(xh, lambda - beta);
    std::vector<IdentityDecl> decls{
        {"lie_omega_conformal", false, true, 0.0},
        {"lie_theta", false, true, 0.0},
        {"hamiltonian_degree", false, true, 0.0},
        {"bracket_rescales_xh", false, true, 0.0},
    };
    CheckReport rep = certify(
        "check_scaling_symmetry", points, tolerance, decls,
        [&](std::size_t, std::span<const double> p, std::vector<double>& out) {
            EvalCtx<D0> ctx = liftCtx<D0>(p);
            out[0] = formResidualAt(lieOmega, omegaScaled, ctx);
            out[1] = formResidualAt(lieTheta, zero1, ctx);
            out[2] = residualMetric(xOfH.eval(ctx), lambda * sys.h.eval(ctx));
            out[3] = vectorResidualAt(bracket, xhScaled, ctx);
        });
    if (estimated) {
        rep.estimates["lambda_hat"] = median(lambdaDefined);
        rep.estimates["beta_hat"] = median(betaDefined);
    }
    rep.estimates["lambda_used"] = lambda;
    rep.estimates["beta_used"] = beta;
    return rep;
}

// Degree-normalization: X/beta has degree (Lambda/beta, 1).
inline VectorField rescaleSymmetry(const VectorField& x, double beta) {
    if (beta == 0.0) throw ZeroBetaError();
    return scaleVectorField(x, 1.0 / beta);
}

// Companion 1-form of a pair of scaling symmetries:
//   alpha = X' . Omega - r X . Omega,   r = (1 - theta(X')) / (1 - theta(X)),
// certified d^theta-closed with X_H . alpha = (r Lambda - Lambda' + theta(X')
// - r theta(X)) H. Throws DenominatorNearZero when 1 - theta(X) degenerates.
struct CompanionFormResult {
    KForm alpha;
    CheckReport report;
};

inline CompanionFormResult companionScalingForm(const VectorField& x, const VectorField& xp,
                                                const HamiltonianSystem& sys,
                                                const std::vector<std::vector<double>>& points,
                                                double tolerance) {
    const LcsStructure& s = sys.structure;
    ScalarField thetaX = contractOneForm(s.theta, x);
    ScalarField thetaXp = contractOneForm(s.theta, xp);
    ScalarField ratio = makeField(s.chart, [thetaX, thetaXp](const auto& ctx) {
        using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
        S den = S(1.0) - thetaX.eval(ctx);
        if (std::abs(ad::primal(den)) < 1e-6)
            throw DenominatorNearZeroError("1 - theta(X) is below 1e-6 at a sample");
        return (S(1.0) - thetaXp.eval(ctx)) / den;
    });
    KForm xFlat = interiorProduct(x, s.omega);
    KForm xpFlat = interiorProduct(xp, s.omega);
    KForm alpha = subForms(xpFlat, scaleFormByField(xFlat, ratio));
    KForm closedness = twistedDifferential(s, alpha);
    KForm zero2(s.chart, 2);

    // Degrees of both generators, medians over the admissible samples.
    ScalarField xOfH = directionalDerivative(x, sys.h);
    ScalarField xpOfH = directionalDerivative(xp, sys.h);
    std::vector<double> lam(points.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> lamP(points.size(), std::numeric_limits<double>::quiet_NaN());
    parallelFor(points.size(), [&](std::size_t i) {
        EvalCtx<D0> ctx = liftCtx<D0>(points[i]);
        double hv = sys.h.eval(ctx);
        if (std::abs(hv) > kDegreeHamiltonianFloor) {
            lam[i] = xOfH.eval(ctx) / hv;
            lamP[i] = xpOfH.eval(ctx) / hv;
        }
    });
    std::vector<double> lamD, lamPD;
    for (double v : lam)
        if (!std::isnan(v)) lamD.push_back(v);
    for (double v : lamP)
        if (!std::isnan(v)) lamPD.push_back(v);
    if (lamD.size() < kMinSamplesForVerdict)
        throw IndeterminateDegreeError("too few samples with |H| above the floor");
    const double lambda = median(lamD);
    const double lambdaP = median(lamPD);

    VectorField xh = hamiltonianVectorField(s, sys.h);
    std::vector<IdentityDecl> decls{
        {"twisted_closed_alpha", false, true, 0.0},
        {"contraction_identity", false, true, 0.0},
    };
    CheckReport rep = certify(
        "companion_scaling_form", points, tolerance, decls,
        [&](std::size_t, std::span<const double> p, std::vector<double>& out) {
            EvalCtx<D0> ctx = liftCtx<D0>(p);
            out[0] = formResidualAt(closedness, zero2, ctx);
            std::vector<double> xhv = xh.eval(ctx);
            double lhs = 0.0;
            for (const auto& [idx, f] : alpha.coefficients())
                lhs += f.eval(ctx) * xhv[idx[0]];
            double r = ratio.eval(ctx);
            double coef = r * lambda - lambdaP + thetaXp.eval(ctx) - r * thetaX.eval(ctx);
            out[1] = residualMetric(lhs, coef * sys.h.eval(ctx));
        });
    rep.estimates["lambda_hat"] = lambda;
    rep.estimates["lambda_prime_hat"] = lambdaP;
    return {std::move(alpha), std::move(rep)};
}

// ---- dissipated quantities and conservation ------------------------------------

namespace detail {

// Shared context splitter: time-dependent quantities certify over points with
// a trailing time column.
inline EvalCtx<D0> systemCtx(const LcsStructure& s, std::span<const double> p, bool timeDep) {
    if (!timeDep) return liftCtx<D0>(p);
    if (p.size() != s.chart->dim() + 1)
        throw ChartMismatchError("time-dependent check needs points with a trailing t column");
    EvalCtx<D0> ctx;
    ctx.coords.assign(p.begin(), p.end() - 1);
    ctx.t = p.back();
    return ctx;
}

}  // namespace detail

// f is dissipated when X_H(f) (+ df/dt) = f theta(X_H): it decays at the same
// conformal rate as H. theta(X_f) is reported because dissipated quantities
// with theta(X_f) = 0 generate invariance transformations.
inline CheckReport checkDissipated(const ScalarField& f, const HamiltonianSystem& sys,
                                   const std::vector<std::vector<double>>& points,
                                   double tolerance) {
    const LcsStructure& s = sys.structure;
    VectorField xh = hamiltonianVectorField(s, sys.h);
    VectorField xf = hamiltonianVectorField(s, f);
    ScalarField thetaXh = contractOneForm(s.theta, xh);
    ScalarField thetaXf = contractOneForm(s.theta, xf);
    const bool timeDep = f.timeDependent() || sys.h.timeDependent();
    std::vector<IdentityDecl> decls{
        {"dissipation_law", false, true, 0.0},
        {"theta_of_xf", false, false, 0.0},
    };
    std::vector<double> thetaVals(points.size(), 0.0);
    CheckReport rep = certify(
        "check_dissipated", points, tolerance, decls,
        [&](std::size_t i, std::span<const double> p, std::vector<double>& out) {
            EvalCtx<D0> ctx = detail::systemCtx(s, p, timeDep);
            double rate = 0.0;
            for (std::size_t j = 0; j < ctx.coords.size(); ++j)
                rate += xh.component(j).eval(ctx) * partialAt(f, j, ctx);
            if (f.timeDependent()) rate += partialAt(f, kTimeSlot, ctx);
            out[0] = residualMetric(rate, f.eval(ctx) * thetaXh.eval(ctx));
            double th = thetaXf.eval(ctx);
            thetaVals[i] = th;
            out[1] = residualMetric(th, 0.0);
        });
    if (!points.empty()) rep.estimates["theta_of_xf_median"] = median(thetaVals);
    return rep;
}

// f is a constant of motion when X_H(f) (+ df/dt) = 0, equivalently
// {f, H} + f theta(X_H) (+ df/dt) = 0.
inline CheckReport checkConstantOfMotion(const ScalarField& f, const HamiltonianSystem& sys,
                                         const std::vector<std::vector<double>>& points,
                                         double tolerance) {
    const LcsStructure& s = sys.structure;
    VectorField xh = hamiltonianVectorField(s, sys.h);
    const bool timeDep = f.timeDependent() || sys.h.timeDependent();
    std::vector<IdentityDecl> decls{{"conservation_law", false, true, 0.0}};
    return certify("check_constant_of_motion", points, tolerance, decls,
                   [&](std::size_t, std::span<const double> p, std::vector<double>& out) {
                       EvalCtx<D0> ctx = detail::systemCtx(s, p, timeDep);
                       double rate = 0.0;
                       for (std::size_t j = 0; j < ctx.coords.size(); ++j)
                           rate += xh.component(j).eval(ctx) * partialAt(f, j, ctx);
                       if (f.timeDependent()) rate += partialAt(f, kTimeSlot, ctx);
                       out[0] = residualMetric(rate, 0.0);
                   });
}

// Invariance transformations from dissipated quantities: f must be
// dissipated, and X_f must satisfy theta(X_f) = 0, L_{X_f} Omega = 0, and
// X_f(H) = 0. All four identities gate.
inline CheckReport checkNoetherInvariance(const ScalarField& f, const HamiltonianSystem& sys,
                                          const std::vector<std::vector<double>>& points,
                                          double tolerance) {
    const LcsStructure& s = sys.structure;
    VectorField xh = hamiltonianVectorField(s, sys.h);
    VectorField xf = hamiltonianVectorField(s, f);
    ScalarField thetaXh = contractOneForm(s.theta, xh);
    ScalarField thetaXf = contractOneForm(s.theta, xf);
    KForm lieOmega = lieDerivative(xf, s.omega);
    KForm zero2(s.chart, 2);
    ScalarField xfOfH = directionalDerivative(xf, sys.h);
    std::vector<IdentityDecl> decls{
        {"dissipation_gate", false, true, 0.0},
        {"theta_of_xf", false, true, 0.0},
        {"lie_omega_xf", false, true, 0.0},
        {"invariance_of_h", false, true, 0.0},
    };
    return certify(
        "check_noether_invariance", points, tolerance, decls,
        [&](std::size_t, std::span<const double> p, std::vector<double>& out) {
            EvalCtx<D0> ctx = liftCtx<D0>(p);
            double rate = 0.0;
            for (std::size_t j = 0; j < ctx.coords.size(); ++j)
                rate += xh.component(j).eval(ctx) * partialAt(f, j, ctx);
            out[0] = residualMetric(rate, f.eval(ctx) * thetaXh.eval(ctx));
            out[1] = residualMetric(thetaXf.eval(ctx), 0.0);
            out[2] = formResidualAt(lieOmega, zero2, ctx);
            out[3] = residualMetric(xfOfH.eval(ctx), 0.0);
        });
}

// ---- time-dependent bracket identity -------------------------------------------

// [d/dt, X_g] = X_{dg/dt} on the extended phase space.
inline CheckReport checkTimeShiftBracket(const ScalarField& gHat, const ExtendedSystem& es,
                                         const std::vector<std::vector<double>>& points,
                                         double tolerance) {
    if (gHat.chart() != es.extended)
        throw ChartMismatchError("generator must live on the extended chart");
    VectorField xg = extendedHamiltonianFieldOf(es, gHat);
    VectorField dt = timeShiftField(es.extended);
    VectorField lhs = lieBracket(dt, xg);
    VectorField rhs =
        extendedHamiltonianFieldOf(es, partialField(gHat, extendedTimeIndex(es)));
    std::vector<IdentityDecl> decls{{"time_shift_bracket", false, true, 0.0}};
    return certify("check_time_shift_bracket", points, tolerance, decls,
                   [&](std::size_t, std::span<const double> p, std::vector<double>& out) {
                       EvalCtx<D0> ctx = liftCtx<D0>(p);
                       out[0] = vectorResidualAt(lhs, rhs, ctx);
                   });
}

}  // namespace lcskit
