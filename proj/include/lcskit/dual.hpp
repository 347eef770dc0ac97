// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Forward-mode dual numbers. Dual<T> carries a value and one directional
// tangent; T may itself be a Dual, so k-fold nesting yields exact k-th
// directional derivatives. Every arithmetic primitive used by the expression
// DSL and the geometry kernel is overloaded here, and comparisons act on the
// primal part only so that pivot selection and branch logic never consult
// tangents.

#pragma once

#include <cmath>
#include <string>
#include <type_traits>

#include "lcskit/errors.hpp"

namespace lcskit::ad {

template <class T>
struct Dual {
    T val{};  // primal value
    T dot{};  // tangent along the seeded direction

    constexpr Dual() = default;
    constexpr Dual(double v) : val(v), dot(T{}) {}  // NOLINT: implicit lift
    constexpr Dual(T v, T d) : val(std::move(v)), dot(std::move(d)) {}
};

template <class T>
struct IsDual : std::false_type {};
template <class T>
struct IsDual<Dual<T>> : std::true_type {};

// Scalar contract: double or any Dual nesting over it.
template <class T>
concept Scalar = std::is_same_v<T, double> || IsDual<std::remove_cv_t<T>>::value;

// Nesting depth: 0 for double, 1 for Dual<double>, ...
template <class T>
inline constexpr int kDualDepth = 0;
template <class T>
inline constexpr int kDualDepth<Dual<T>> = kDualDepth<T> + 1;

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
    return primal(x.val);
}

// ---- arithmetic ------------------------------------------------------------

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    return {a.val + b.val, a.dot + b.dot};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    return {a.val - b.val, a.dot - b.dot};
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
    return {-a.val, -a.dot};
}
template <class T>
Dual<T> operator+(const Dual<T>& a) {
    return a;
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.val * b.val, a.dot * b.val + a.val * b.dot};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T q = a.val / b.val;
    return {q, (a.dot - q * b.dot) / b.val};
}

// Mixed double/Dual forms keep expression code free of explicit lifts.
template <class T>
Dual<T> operator+(const Dual<T>& a, double b) {
    return {a.val + b, a.dot};
}
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) {
    return {a + b.val, b.dot};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) {
    return {a.val - b, a.dot};
}
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) {
    return {a - b.val, -b.dot};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) {
    return {a.val * b, a.dot * b};
}
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) {
    return {a * b.val, a * b.dot};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) {
    return {a.val / b, a.dot / b};
}
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) {
    return Dual<T>(a) / b;
}

template <class T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) {
    a = a + b;
    return a;
}
template <class T>
Dual<T>& operator-=(Dual<T>& a, const Dual<T>& b) {
    a = a - b;
    return a;
}
template <class T>
Dual<T>& operator*=(Dual<T>& a, const Dual<T>& b) {
    a = a * b;
    return a;
}

// Comparisons on the primal part only.
template <class T>
bool operator<(const Dual<T>& a, const Dual<T>& b) {
    return primal(a) < primal(b);
}
template <class T>
bool operator>(const Dual<T>& a, const Dual<T>& b) {
    return primal(a) > primal(b);
}
template <class T>
bool operator==(const Dual<T>& a, const Dual<T>& b) {
    return primal(a) == primal(b);
}

// ---- elementary functions --------------------------------------------------

using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;

template <class T>
Dual<T> exp(const Dual<T>& x) {
    T e = exp(x.val);
    return {e, x.dot * e};
}

template <class T>
Dual<T> log(const Dual<T>& x) {
    if (primal(x) <= 0.0)
        throw DomainError("ln of non-positive value " + std::to_string(primal(x)));
    return {log(x.val), x.dot / x.val};
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
    return {sin(x.val), x.dot * cos(x.val)};
}

template <class T>
Dual<T> cos(const Dual<T>& x) {
    return {cos(x.val), -x.dot * sin(x.val)};
}

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
    if (primal(x) <= 0.0)
        throw DomainError("sqrt of non-positive value " + std::to_string(primal(x)));
    T r = sqrt(x.val);
    return {r, x.dot / (2.0 * r)};
}

inline double checkedLog(double x) {
    if (x <= 0.0) throw DomainError("ln of non-positive value " + std::to_string(x));
    return std::log(x);
}
template <class T>
Dual<T> checkedLog(const Dual<T>& x) {
    return log(x);
}

inline double checkedSqrt(double x) {
    if (x <= 0.0) throw DomainError("sqrt of non-positive value " + std::to_string(x));
    return std::sqrt(x);
}
template <class T>
Dual<T> checkedSqrt(const Dual<T>& x) {
    return sqrt(x);
}

inline double checkedDiv(double a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return a / b;
}
template <class T>
Dual<T> checkedDiv(const Dual<T>& a, const Dual<T>& b) {
    if (primal(b) == 0.0) throw DomainError("division by zero");
    return a / b;
}

// Integer powers by repeated multiplication: valid for any base sign and the
// only pow path that keeps negative bases inside the domain.
template <Scalar S>
S ipow(const S& x, long long n) {
    if (n < 0) {
        if (primal(x) == 0.0) throw DomainError("zero raised to a negative power");
        return 1.0 / ipow(x, -n);
    }
    S r = S(1.0);
    S base = x;
    while (n > 0) {
        if (n & 1) r = r * base;
        base = base * base;
        n >>= 1;
    }
    return r;
}

// General power: exp(e ln b), so the base must be positive.
template <Scalar S>
S powGeneral(const S& base, const S& expo) {
    if (primal(base) <= 0.0)
        throw DomainError("power with non-positive base " + std::to_string(primal(base)) +
                          " and non-integer exponent");
    using std::exp;
    using std::log;
    return exp(expo * log(base));
}

}  // namespace lcskit::ad
