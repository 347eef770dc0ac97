// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Time integration. Both steppers are generic over the scalar tower, so a
// flow map evaluated on dual numbers integrates the variational equation of
// the same discretization for free (the tangent of the numerical flow, not of
// the exact flow). Step-size control and admissibility decisions consult
// primal values only, so all tower levels follow the same step sequence.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcskit/field.hpp"
#include "lcskit/geometry.hpp"
#include "lcskit/lcs.hpp"

namespace lcskit {

struct IntegratorConfig {
    enum class Method { Rk4, Rkf45 };
    Method method = Method::Rk4;
    double step = 1e-2;    // Rk4 base step; Rkf45 initial step
    double absTol = 1e-10; // Rkf45 error control
    double relTol = 1e-9;
    std::size_t maxSteps = 1000000;
    std::optional<double> margin;  // admissibility margin override
    double minStep = 1e-12;
};

enum class Termination { Horizon, Inadmissible };

inline const char* terminationName(Termination t) {
    switch (t) {
        case Termination::Horizon: return "horizon";
        case Termination::Inadmissible: return "inadmissible";
    }
    return "?";
}

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    Termination termination = Termination::Horizon;
};

namespace detail {

template <ad::Scalar S>
std::vector<S> axpy(const std::vector<S>& y, double a, const std::vector<S>& k) {
    std::vector<S> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * k[i];
    return out;
}

// One classical RK4 step. Rhs: (const std::vector<S>&, const S&) -> std::vector<S>.
template <ad::Scalar S, class Rhs>
std::vector<S> rk4Step(const Rhs& f, const std::vector<S>& y, const S& t, double h) {
    std::vector<S> k1 = f(y, t);
    std::vector<S> k2 = f(axpy(y, h / 2.0, k1), t + h / 2.0);
    std::vector<S> k3 = f(axpy(y, h / 2.0, k2), t + h / 2.0);
    std::vector<S> k4 = f(axpy(y, h, k3), t + h);
    std::vector<S> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// One Fehlberg 4(5) step; returns the 5th-order solution and the scaled error
// norm of the embedded pair (primal values).
template <ad::Scalar S, class Rhs>
std::pair<std::vector<S>, double> rkf45Step(const Rhs& f, const std::vector<S>& y,
                                            const S& t, double h, double absTol,
                                            double relTol) {
    std::vector<S> k1 = f(y, t);
    std::vector<S> y2(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + h * (1.0 / 4.0) * k1[i];
    std::vector<S> k2 = f(y2, t + h / 4.0);
    std::vector<S> y3(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y3[i] = y[i] + h * ((3.0 / 32.0) * k1[i] + (9.0 / 32.0) * k2[i]);
    std::vector<S> k3 = f(y3, t + 3.0 * h / 8.0);
    std::vector<S> y4(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y4[i] = y[i] + h * ((1932.0 / 2197.0) * k1[i] - (7200.0 / 2197.0) * k2[i] +
                            (7296.0 / 2197.0) * k3[i]);
    std::vector<S> k4 = f(y4, t + 12.0 * h / 13.0);
    std::vector<S> y5(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y5[i] = y[i] + h * ((439.0 / 216.0) * k1[i] - 8.0 * k2[i] +
                            (3680.0 / 513.0) * k3[i] - (845.0 / 4104.0) * k4[i]);
    std::vector<S> k5 = f(y5, t + h);
    std::vector<S> y6(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y6[i] = y[i] + h * (-(8.0 / 27.0) * k1[i] + 2.0 * k2[i] -
                            (3544.0 / 2565.0) * k3[i] + (1859.0 / 4104.0) * k4[i] -
                            (11.0 / 40.0) * k5[i]);
    std::vector<S> k6 = f(y6, t + h / 2.0);

    std::vector<S> high(y.size());
    double errNorm = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        high[i] = y[i] + h * ((16.0 / 135.0) * k1[i] + (6656.0 / 12825.0) * k3[i] +
                              (28561.0 / 56430.0) * k4[i] - (9.0 / 50.0) * k5[i] +
                              (2.0 / 55.0) * k6[i]);
        S low = y[i] + h * ((25.0 / 216.0) * k1[i] + (1408.0 / 2565.0) * k3[i] +
                            (2197.0 / 4104.0) * k4[i] - (1.0 / 5.0) * k5[i]);
        double e = std::abs(ad::primal(high[i]) - ad::primal(low));
        double scale =
            absTol + relTol * std::max(std::abs(ad::primal(y[i])), std::abs(ad::primal(high[i])));
        errNorm = std::max(errNorm, e / scale);
    }
    return {std::move(high), errNorm};
}

// RHS adapter for a vector field: coordinates from the state, clock bound as
// the time slot for base charts (extended charts carry t as a coordinate).
template <ad::Scalar S>
struct FieldRhs {
    const VectorField& x;
    std::vector<S> operator()(const std::vector<S>& y, const S& t) const {
        EvalCtx<S> ctx;
        ctx.coords = y;
        if (!x.chart()->timeIndex()) ctx.t = t;
        return x.eval(ctx);
    }
};

}  // namespace detail

// Integrates a vector field from t0 to t1. Every accepted state is recorded.
// A step that lands inadmissibly (inside an exclusion margin or outside the
// domain box) is bisected; once the step underflows the trajectory terminates
// cleanly just short of the singular set.
inline Trajectory integrate(const VectorField& x, std::span<const double> y0, double t0,
                            double t1, const IntegratorConfig& cfg = {}) {
    const Chart& chart = *x.chart();
    const double margin = cfg.margin.value_or(chart.margin());
    if (!chart.admissible(y0, margin))
        throw InadmissibleStartError("initial state is not admissible");
    if (!(t1 > t0) && !(t1 < t0)) {
        Trajectory tr;
        tr.times = {t0};
        tr.states = {std::vector<double>(y0.begin(), y0.end())};
        return tr;
    }

    Trajectory tr;
    tr.times.push_back(t0);
    tr.states.emplace_back(y0.begin(), y0.end());
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const double baseStep =
        cfg.method == IntegratorConfig::Method::Rk4
            ? span / std::ceil(span / std::min(cfg.step, span))
            : std::min(cfg.step, span);

    detail::FieldRhs<double> rhs{x};
    std::vector<double> y(y0.begin(), y0.end());
    double t = t0;
    double h = baseStep;

    for (std::size_t step = 0; step < cfg.maxSteps; ++step) {
        double remaining = std::abs(t1 - t);
        if (remaining <= 1e-14 * std::max(1.0, std::abs(t1))) {
            tr.termination = Termination::Horizon;
            return tr;
        }
        h = std::min(h, remaining);
        bool accepted = false;
        while (!accepted) {
            if (h < cfg.minStep) {
                tr.termination = Termination::Inadmissible;
                return tr;
            }
            std::vector<double> yNew;
            double errNorm = 0.0;
            bool evalOk = true;
            try {
                if (cfg.method == IntegratorConfig::Method::Rk4) {
                    yNew = detail::rk4Step(rhs, y, t, dir * h);
                } else {
                    auto [high, err] =
                        detail::rkf45Step(rhs, y, t, dir * h, cfg.absTol, cfg.relTol);
                    yNew = std::move(high);
                    errNorm = err;
                }
            } catch (const DomainError&) {
                evalOk = false;
            } catch (const SingularMatrixError&) {
                evalOk = false;
            }
            if (!evalOk || !chart.admissible(yNew, margin)) {
                h *= 0.5;  // approaching an exclusion set; bisect toward it
                continue;
            }
            if (cfg.method == IntegratorConfig::Method::Rkf45 && errNorm > 1.0) {
                double shrink = std::max(0.2, 0.9 * std::pow(errNorm, -0.25));
                h *= shrink;
                if (h < cfg.minStep)
                    throw StepFailureError("error control drove the step below minStep");
                continue;
            }
            t += dir * h;
            if (std::abs(t1 - t) <= 1e-14 * std::max(1.0, std::abs(t1)))
                t = t1;  // snap accumulated rounding onto the horizon
            y = std::move(yNew);
            tr.times.push_back(t);
            tr.states.push_back(y);
            accepted = true;
            if (cfg.method == IntegratorConfig::Method::Rkf45) {
                double grow = errNorm > 0.0
                                  ? std::min(5.0, std::max(0.2, 0.9 * std::pow(errNorm, -0.2)))
                                  : 5.0;
                h *= grow;
            } else {
                h = baseStep;
            }
        }
    }
    throw StepFailureError("exceeded maxSteps before reaching the horizon");
}

// Time-s flow of an autonomous field as a chart map. Components are generic
// closures that rerun the fixed-step RK4 march at the requested tower level,
// so pullbacks along the flow differentiate the discrete flow itself.
inline ChartMap flowMap(const VectorField& x, double s, const IntegratorConfig& cfg = {}) {
    if (x.timeDependent())
        throw Error("flowMap requires an autonomous field; extend the phase space first");
    const ChartPtr& chart = x.chart();
    const std::size_t n =
        s == 0.0 ? 1 : static_cast<std::size_t>(std::ceil(std::abs(s) / cfg.step));
    const double h = s / static_cast<double>(n);
    std::vector<ScalarField> comps;
    for (std::size_t i = 0; i < chart->dim(); ++i) {
        comps.push_back(makeField(chart, [x, i, n, h](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            detail::FieldRhs<S> rhs{x};
            std::vector<S> y = ctx.coords;
            S t = S(0.0);
            for (std::size_t step = 0; step < n; ++step) {
                y = detail::rk4Step(rhs, y, t, h);
                t = t + h;
            }
            return y[i];
        }));
    }
    return ChartMap(chart, chart, comps);
}

// ---- trajectory monitors -----------------------------------------------------

inline constexpr double kRatioHamiltonianFloor = 0.1;

struct MonitorSeries {
    std::string name;
    std::vector<double> values;
    std::vector<double> conservationResidual;  // X_H(f) (+ df/dt) vs 0
    std::vector<double> dissipationResidual;   // X_H(f) (+ df/dt) vs f theta(X_H)
    std::vector<double> ratio;                 // f/H where |H| > floor, else NaN
    double maxConservationResidual = 0.0;
    double maxDissipationResidual = 0.0;
    double ratioDrift = 0.0;  // max |ratio - ratio at first defined sample|
};

// Evaluates candidate invariants along a trajectory: value, conservation law
// residual, dissipation law residual, and the f/H ratio drift.
inline std::vector<MonitorSeries> monitorTrajectory(
    const Trajectory& tr, const LcsStructure& s, const ScalarField& h,
    const std::vector<std::pair<std::string, ScalarField>>& quantities) {
    VectorField xh = hamiltonianVectorField(s, h);
    ScalarField thetaOfXh = contractOneForm(s.theta, xh);
    std::vector<MonitorSeries> out;
    for (const auto& quantity : quantities) {
        const ScalarField& f = quantity.second;
        MonitorSeries ms;
        ms.name = quantity.first;
        const std::size_t n = tr.states.size();
        ms.values.resize(n);
        ms.conservationResidual.resize(n);
        ms.dissipationResidual.resize(n);
        ms.ratio.assign(n, std::numeric_limits<double>::quiet_NaN());
        const bool timeDep = f.timeDependent() || h.timeDependent();
        parallelFor(n, [&](std::size_t i) {
            EvalCtx<D0> ctx = liftCtx<D0>(tr.states[i],
                                          timeDep ? std::optional<double>(tr.times[i])
                                                  : std::optional<double>{});
            double fv = f.eval(ctx);
            double rate = 0.0;
            for (std::size_t j = 0; j < ctx.coords.size(); ++j)
                rate += xh.component(j).eval(ctx) * partialAt(f, j, ctx);
            if (f.timeDependent()) rate += partialAt(f, kTimeSlot, ctx);
            double hv = h.eval(ctx);
            ms.values[i] = fv;
            ms.conservationResidual[i] = residualMetric(rate, 0.0);
            ms.dissipationResidual[i] = residualMetric(rate, fv * thetaOfXh.eval(ctx));
            if (std::abs(hv) > kRatioHamiltonianFloor) ms.ratio[i] = fv / hv;
        });
        double ref = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isnan(ms.ratio[i])) continue;
            if (std::isnan(ref))
                ref = ms.ratio[i];
            else
                ms.ratioDrift = std::max(ms.ratioDrift, std::abs(ms.ratio[i] - ref));
        }
        for (double v : ms.conservationResidual)
            ms.maxConservationResidual = std::max(ms.maxConservationResidual, v);
        for (double v : ms.dissipationResidual)
            ms.maxDissipationResidual = std::max(ms.maxDissipationResidual, v);
        out.push_back(std::move(ms));
    }
    return out;
}

// ---- convergence order ---------------------------------------------------------

struct ConvergenceResult {
    double order = 0.0;
    std::array<double, 3> steps{};
    std::array<double, 3> residuals{};
};

// Richardson slope over (h, h/2, h/4) by least squares in log-log space.
// Residuals at rounding floor carry no order information and raise NoiseFloor.
inline ConvergenceResult convergenceOrder(const std::function<double(double)>& residualAt,
                                          double h0, double noiseFloor = 1e-13) {
    ConvergenceResult res;
    for (int i = 0; i < 3; ++i) {
        res.steps[i] = h0 / std::pow(2.0, i);
        res.residuals[i] = residualAt(res.steps[i]);
        if (!(res.residuals[i] > noiseFloor))
            throw NoiseFloorError("residual " + std::to_string(res.residuals[i]) +
                                  " at step " + std::to_string(res.steps[i]) +
                                  " is at rounding floor; order is unmeasurable");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < 3; ++i) {
        double lx = std::log(res.steps[i]);
        double ly = std::log(res.residuals[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    res.order = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
    return res;
}

}  // namespace lcskit
