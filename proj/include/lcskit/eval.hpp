// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// The evaluation tower. All pointwise objects (expressions, fields, form
// coefficients) evaluate at four scalar levels: plain doubles plus three
// nested dual levels. Level 3 is the deepest any shipped operation needs
// (a twisted differential of a bracket-contracted form differentiates the
// Hamiltonian three times through the linear solve); lifting past it raises
// NestingOverflow.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lcskit/dual.hpp"
#include "lcskit/errors.hpp"

namespace lcskit {

using D0 = double;
using D1 = ad::Dual<D0>;
using D2 = ad::Dual<D1>;
using D3 = ad::Dual<D2>;

// Coordinate values (chart order) plus an optional time binding for
// time-dependent objects on base charts. Extended charts carry t as an
// ordinary coordinate instead.
template <ad::Scalar S>
struct EvalCtx {
    std::vector<S> coords;
    std::optional<S> t;
};

template <ad::Scalar S>
EvalCtx<S> liftCtx(std::span<const double> x, std::optional<double> t = {}) {
    EvalCtx<S> ctx;
    ctx.coords.assign(x.begin(), x.end());
    if (t) ctx.t = S(*t);
    return ctx;
}

// Index value meaning "differentiate in t" for partial derivatives.
inline constexpr std::size_t kTimeSlot = static_cast<std::size_t>(-1);

template <ad::Scalar S>
struct Lift {
    static constexpr bool capped = false;
    using Up = ad::Dual<S>;
};
template <>
struct Lift<D3> {
    static constexpr bool capped = true;
    using Up = D3;  // placeholder; never instantiated into seeds
};

// Seeds a unit tangent along one coordinate (or the time slot) and returns
// the lifted context one dual level up.
template <ad::Scalar S>
EvalCtx<typename Lift<S>::Up> seedDirection(const EvalCtx<S>& ctx, std::size_t dir) {
    if constexpr (Lift<S>::capped) {
        throw NestingOverflowError();
    } else {
        using U = ad::Dual<S>;
        EvalCtx<U> up;
        up.coords.reserve(ctx.coords.size());
        for (const S& c : ctx.coords) up.coords.emplace_back(c, S(0.0));
        if (ctx.t) up.t = U(*ctx.t, S(0.0));
        if (dir == kTimeSlot) {
            if (!up.t) throw Error("time derivative requested without a time binding");
            up.t->dot = S(1.0);
        } else {
            up.coords.at(dir).dot = S(1.0);
        }
        return up;
    }
}

}  // namespace lcskit
