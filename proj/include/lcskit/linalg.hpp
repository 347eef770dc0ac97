// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense square matrices over any Scalar and LU solves with partial pivoting.
// Pivoting consults primal magnitudes only, so the elimination path is
// identical whether entries are doubles or nested duals; tangents of the
// solution therefore come out of the same code by operating in dual
// arithmetic.

#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "lcskit/dual.hpp"
#include "lcskit/errors.hpp"

namespace lcskit::ad {

template <Scalar S>
class SquareMatrix {
  public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n) : n_(n), a_(n * n, S(0.0)) {}

    std::size_t size() const { return n_; }
    S& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const S& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    SquareMatrix transposed() const {
        SquareMatrix t(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double maxAbsPrimal() const {
        double m = 0.0;
        for (const S& x : a_) m = std::max(m, std::abs(primal(x)));
        return m;
    }

  private:
    std::size_t n_ = 0;
    std::vector<S> a_;
};

struct SolveStats {
    double minPivot = 0.0;  // smallest |pivot| encountered, primal magnitude
};

// Solves A x = b in place of copies; relative pivot threshold guards against
// silently eliminating on a numerically zero column.
template <Scalar S>
std::vector<S> solveLinear(SquareMatrix<S> a, std::vector<S> b,
                           SolveStats* stats = nullptr,
                           double relPivotTol = 1e-12) {
    const std::size_t n = a.size();
    if (b.size() != n) throw Error("solveLinear: dimension mismatch");
    const double scale = a.maxAbsPrimal();
    const double threshold = relPivotTol * (scale > 0.0 ? scale : 1.0);
    double minPivot = scale;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(primal(a(col, col)));
        for (std::size_t r = col + 1; r < n; ++r) {
            double mag = std::abs(primal(a(r, col)));
            if (mag > best) {
                best = mag;
                piv = r;
            }
        }
        if (best <= threshold) throw SingularMatrixError(col, best);
        if (piv != col) {
            for (std::size_t j = col; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        minPivot = std::min(minPivot, best);
        for (std::size_t r = col + 1; r < n; ++r) {
            S factor = a(r, col) / a(col, col);
            for (std::size_t j = col + 1; j < n; ++j)
                a(r, j) = a(r, j) - factor * a(col, j);
            a(r, col) = S(0.0);
            b[r] = b[r] - factor * b[col];
        }
    }

    std::vector<S> x(n, S(0.0));
    for (std::size_t i = n; i-- > 0;) {
        S acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc = acc - a(i, j) * x[j];
        x[i] = acc / a(i, i);
    }
    if (stats) stats->minPivot = minPivot;
    return x;
}

// Jacobian of an m-component map at a point, one seeded forward pass per
// column. F must be callable as f(const std::vector<Dual<double>>&) ->
// std::vector<Dual<double>>.
template <class F>
SquareMatrix<double> jacobian(const F& map, const std::vector<double>& point) {
    const std::size_t n = point.size();
    SquareMatrix<double> j(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<Dual<double>> seeded(n);
        for (std::size_t i = 0; i < n; ++i)
            seeded[i] = Dual<double>(point[i], i == col ? 1.0 : 0.0);
        std::vector<Dual<double>> out = map(seeded);
        if (out.size() != n) throw Error("jacobian: map is not square");
        for (std::size_t row = 0; row < n; ++row) j(row, col) = out[row].dot;
    }
    return j;
}

}  // namespace lcskit::ad
