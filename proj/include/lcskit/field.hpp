// (c) 2026 the lcskit authors
// SPDX-License-Identifier: Apache-2.0
//
// Pointwise geometric objects: scalar fields, vector fields, differential
// forms, and chart maps. Everything is a lazy closure graph evaluable at all
// four scalar levels through one type-erased interface; no operation ever
// performs symbolic algebra. Derivatives are taken by seeding a dual tangent
// one level above the requested one, which is why every implementation must
// be generic over the tower.

#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lcskit/chart.hpp"
#include "lcskit/errors.hpp"
#include "lcskit/eval.hpp"
#include "lcskit/expr.hpp"
#include "lcskit/linalg.hpp"

namespace lcskit {

inline constexpr std::size_t kMaxFormDegree = 4;

namespace detail {

class ScalarFieldImpl {
  public:
    virtual ~ScalarFieldImpl() = default;
    virtual D0 value(const EvalCtx<D0>&) const = 0;
    virtual D1 value(const EvalCtx<D1>&) const = 0;
    virtual D2 value(const EvalCtx<D2>&) const = 0;
    virtual D3 value(const EvalCtx<D3>&) const = 0;
};

template <class F>
class FnFieldImpl final : public ScalarFieldImpl {
  public:
    explicit FnFieldImpl(F f) : f_(std::move(f)) {}
    D0 value(const EvalCtx<D0>& c) const override { return f_(c); }
    D1 value(const EvalCtx<D1>& c) const override { return f_(c); }
    D2 value(const EvalCtx<D2>& c) const override { return f_(c); }
    D3 value(const EvalCtx<D3>& c) const override { return f_(c); }

  private:
    F f_;
};

}  // namespace detail

class ScalarField {
  public:
    ScalarField() = default;
    ScalarField(ChartPtr chart, std::shared_ptr<const detail::ScalarFieldImpl> impl,
                bool timeDependent = false)
        : chart_(std::move(chart)), impl_(std::move(impl)), timeDependent_(timeDependent) {}

    bool valid() const { return impl_ != nullptr; }
    const ChartPtr& chart() const { return chart_; }
    bool timeDependent() const { return timeDependent_; }

    template <ad::Scalar S>
    S eval(const EvalCtx<S>& ctx) const {
        if (!impl_) throw Error("evaluating an empty scalar field");
        return impl_->value(ctx);
    }

    double evalAt(std::span<const double> x, std::optional<double> t = {}) const {
        return eval(liftCtx<D0>(x, t));
    }

  private:
    ChartPtr chart_;
    std::shared_ptr<const detail::ScalarFieldImpl> impl_;
    bool timeDependent_ = false;
};

// F must be callable at every tower level: template or generic lambda taking
// const EvalCtx<S>& and returning S.
template <class F>
ScalarField makeField(ChartPtr chart, F f, bool timeDependent = false) {
    return ScalarField(std::move(chart),
                       std::make_shared<detail::FnFieldImpl<F>>(std::move(f)),
                       timeDependent);
}

namespace detail {

inline bool mentionsTime(const dsl::Node& n) {
    using Kind = dsl::Node::Kind;
    if (n.kind == Kind::Time) return true;
    if (n.a && mentionsTime(*n.a)) return true;
    if (n.b && mentionsTime(*n.b)) return true;
    return false;
}

}  // namespace detail

inline ScalarField fieldFromExpr(ChartPtr chart, dsl::Expression e) {
    bool timeDep = e.valid() && detail::mentionsTime(*e.root());
    return makeField(
        std::move(chart), [e = std::move(e)](const auto& ctx) { return e.eval(ctx); },
        timeDep);
}

inline ScalarField parseField(const ChartPtr& chart, std::string_view text) {
    bool allowTime = !chart->timeIndex().has_value();
    return fieldFromExpr(chart, dsl::parse(text, chart->namesPtr(), allowTime));
}

inline ScalarField constantField(ChartPtr chart, double c) {
    return makeField(std::move(chart), [c](const auto& ctx) {
        using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
        return S(c);
    });
}

inline ScalarField coordinateField(ChartPtr chart, std::size_t i) {
    if (i >= chart->dim()) throw ChartMismatchError("coordinate index out of range");
    return makeField(std::move(chart), [i](const auto& ctx) { return ctx.coords[i]; });
}

// Directional derivative at a point, one dual level up. dir may be kTimeSlot.
template <ad::Scalar S>
S partialAt(const ScalarField& f, std::size_t dir, const EvalCtx<S>& ctx) {
    if constexpr (Lift<S>::capped) {
        throw NestingOverflowError();
    } else {
        return f.eval(seedDirection(ctx, dir)).dot;
    }
}

inline ScalarField partialField(const ScalarField& f, std::size_t dir) {
    return makeField(
        f.chart(), [f, dir](const auto& ctx) { return partialAt(f, dir, ctx); },
        f.timeDependent());
}

inline ScalarField scaleField(const ScalarField& f, double c) {
    return makeField(
        f.chart(), [f, c](const auto& ctx) { return c * f.eval(ctx); },
        f.timeDependent());
}

inline ScalarField addFields(const ScalarField& a, const ScalarField& b) {
    return makeField(
        a.chart(), [a, b](const auto& ctx) { return a.eval(ctx) + b.eval(ctx); },
        a.timeDependent() || b.timeDependent());
}

inline ScalarField subFields(const ScalarField& a, const ScalarField& b) {
    return makeField(
        a.chart(), [a, b](const auto& ctx) { return a.eval(ctx) - b.eval(ctx); },
        a.timeDependent() || b.timeDependent());
}

inline ScalarField mulFields(const ScalarField& a, const ScalarField& b) {
    return makeField(
        a.chart(), [a, b](const auto& ctx) { return a.eval(ctx) * b.eval(ctx); },
        a.timeDependent() || b.timeDependent());
}

inline ScalarField divFields(const ScalarField& a, const ScalarField& b) {
    return makeField(
        a.chart(),
        [a, b](const auto& ctx) { return ad::checkedDiv(a.eval(ctx), b.eval(ctx)); },
        a.timeDependent() || b.timeDependent());
}

// Signed sum of products, the workhorse shape of every exterior-calculus
// coefficient: sum_i sign_i * prod(factors_i).
struct SignedTerm {
    double sign = 1.0;
    std::vector<ScalarField> factors;
};

inline ScalarField signedSumField(ChartPtr chart, std::vector<SignedTerm> terms) {
    bool timeDep = false;
    for (const auto& t : terms)
        for (const auto& f : t.factors) timeDep = timeDep || f.timeDependent();
    return makeField(
        std::move(chart),
        [terms = std::move(terms)](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            S acc = S(0.0);
            for (const auto& t : terms) {
                S prod = S(t.sign);
                for (const auto& f : t.factors) prod = prod * f.eval(ctx);
                acc = acc + prod;
            }
            return acc;
        },
        timeDep);
}

// ---- vector fields ---------------------------------------------------------

class VectorField {
  public:
    VectorField() = default;
    VectorField(ChartPtr chart, std::vector<ScalarField> comps)
        : chart_(std::move(chart)), comps_(std::move(comps)) {
        if (comps_.size() != chart_->dim())
            throw ChartMismatchError("vector field needs one component per coordinate");
    }

    bool valid() const { return chart_ != nullptr; }
    const ChartPtr& chart() const { return chart_; }
    const ScalarField& component(std::size_t i) const { return comps_.at(i); }
    const std::vector<ScalarField>& components() const { return comps_; }

    template <ad::Scalar S>
    std::vector<S> eval(const EvalCtx<S>& ctx) const {
        std::vector<S> out;
        out.reserve(comps_.size());
        for (const auto& c : comps_) out.push_back(c.eval(ctx));
        return out;
    }

    bool timeDependent() const {
        for (const auto& c : comps_)
            if (c.timeDependent()) return true;
        return false;
    }

  private:
    ChartPtr chart_;
    std::vector<ScalarField> comps_;
};

inline VectorField zeroVectorField(const ChartPtr& chart) {
    std::vector<ScalarField> comps;
    for (std::size_t i = 0; i < chart->dim(); ++i) comps.push_back(constantField(chart, 0.0));
    return VectorField(chart, comps);
}

inline VectorField scaleVectorField(const VectorField& x, double c) {
    std::vector<ScalarField> comps;
    for (const auto& f : x.components()) comps.push_back(scaleField(f, c));
    return VectorField(x.chart(), comps);
}

inline VectorField addVectorFields(const VectorField& x, const VectorField& y) {
    if (x.chart() != y.chart())
        throw ChartMismatchError("vector field sum across different charts");
    std::vector<ScalarField> comps;
    for (std::size_t i = 0; i < x.components().size(); ++i)
        comps.push_back(addFields(x.component(i), y.component(i)));
    return VectorField(x.chart(), comps);
}

// Directional derivative X(f) as a lazy scalar field.
inline ScalarField directionalDerivative(const VectorField& x, const ScalarField& f) {
    return makeField(
        f.chart(),
        [x, f](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            S acc = S(0.0);
            for (std::size_t i = 0; i < x.components().size(); ++i)
                acc = acc + x.component(i).eval(ctx) * partialAt(f, i, ctx);
            return acc;
        },
        f.timeDependent() || x.timeDependent());
}

// ---- differential forms ----------------------------------------------------

using IndexSet = std::vector<std::size_t>;

// Sorts indices, returns the permutation sign, or 0 on a repeated index.
inline int normalizeIndexSet(IndexSet& idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        std::size_t j = i;
        while (j > 0 && idx[j - 1] > idx[j]) {
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
            --j;
        }
    }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i - 1] == idx[i]) return 0;
    return sign;
}

// A differential k-form stored by strictly increasing multi-indices. Missing
// coefficients are zero. Degree is capped at kMaxFormDegree; operations that
// would exceed the cap raise DegreeOverflow. Degrees above the chart
// dimension are legal and denote the zero form (no index set can exist).
class KForm {
  public:
    KForm() = default;
    KForm(ChartPtr chart, std::size_t degree) : chart_(std::move(chart)), degree_(degree) {
        if (degree_ > kMaxFormDegree)
            throw DegreeOverflowError("form degree " + std::to_string(degree_) +
                                      " exceeds the supported maximum " +
                                      std::to_string(kMaxFormDegree));
    }

    bool valid() const { return chart_ != nullptr; }
    const ChartPtr& chart() const { return chart_; }
    std::size_t degree() const { return degree_; }
    const std::map<IndexSet, ScalarField>& coefficients() const { return coeffs_; }

    void setCoefficient(IndexSet idx, ScalarField f) {
        validateIndexSet(idx);
        coeffs_[std::move(idx)] = std::move(f);
    }

    void accumulate(IndexSet idx, double sign, ScalarField f) {
        int s = normalizeIndexSet(idx);
        if (s == 0) return;
        ScalarField term = scaleField(f, sign * s);
        auto it = coeffs_.find(idx);
        if (it == coeffs_.end())
            coeffs_[std::move(idx)] = std::move(term);
        else
            it->second = addFields(it->second, term);
    }

    template <ad::Scalar S>
    S coefficientAt(const IndexSet& idx, const EvalCtx<S>& ctx) const {
        auto it = coeffs_.find(idx);
        if (it == coeffs_.end()) return S(0.0);
        return it->second.eval(ctx);
    }

    // Full antisymmetric evaluation on argument vectors (the certification
    // oracle route; independent of how coefficients were assembled).
    template <ad::Scalar S>
    S apply(const std::vector<std::vector<S>>& args, const EvalCtx<S>& ctx) const {
        if (args.size() != degree_) throw Error("form applied to wrong argument count");
        S acc = S(0.0);
        for (const auto& [idx, f] : coeffs_) {
            S coeff = f.eval(ctx);
            acc = acc + coeff * antisymMinor(args, idx);
        }
        return acc;
    }

    bool timeDependent() const {
        for (const auto& [idx, f] : coeffs_)
            if (f.timeDependent()) return true;
        return false;
    }

  private:
    void validateIndexSet(const IndexSet& idx) const {
        if (idx.size() != degree_)
            throw ChartMismatchError("coefficient index count does not match degree");
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= chart_->dim())
                throw ChartMismatchError("coefficient index out of range");
            if (i > 0 && idx[i - 1] >= idx[i])
                throw ChartMismatchError("coefficient indices must be strictly increasing");
        }
    }

    // det of the k x k minor picking components idx of the k argument vectors,
    // i.e. (dx^{i1} ^ ... ^ dx^{ik})(v1, ..., vk).
    template <ad::Scalar S>
    static S antisymMinor(const std::vector<std::vector<S>>& args, const IndexSet& idx) {
        const std::size_t k = idx.size();
        if (k == 0) return S(1.0);
        std::vector<std::size_t> perm(k);
        for (std::size_t i = 0; i < k; ++i) perm[i] = i;
        S acc = S(0.0);
        // k <= 4: explicit permutation sum is exact and cheap.
        do {
            int sign = permutationSign(perm);
            S prod = S(1.0);
            for (std::size_t a = 0; a < k; ++a) prod = prod * args[a][idx[perm[a]]];
            acc = acc + S(static_cast<double>(sign)) * prod;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return acc;
    }

    static int permutationSign(const std::vector<std::size_t>& perm) {
        int sign = 1;
        for (std::size_t i = 0; i < perm.size(); ++i)
            for (std::size_t j = i + 1; j < perm.size(); ++j)
                if (perm[i] > perm[j]) sign = -sign;
        return sign;
    }

    ChartPtr chart_;
    std::size_t degree_ = 0;
    std::map<IndexSet, ScalarField> coeffs_;
};

inline KForm zeroForm(const ChartPtr& chart, std::size_t degree) {
    return KForm(chart, degree);
}

inline KForm scaleForm(const KForm& w, double c) {
    KForm out(w.chart(), w.degree());
    for (const auto& [idx, f] : w.coefficients()) out.setCoefficient(idx, scaleField(f, c));
    return out;
}

inline KForm addForms(const KForm& a, const KForm& b) {
    if (a.chart() != b.chart() || a.degree() != b.degree())
        throw ChartMismatchError("form sum needs matching chart and degree");
    KForm out(a.chart(), a.degree());
    for (const auto& [idx, f] : a.coefficients()) out.setCoefficient(idx, f);
    for (const auto& [idx, f] : b.coefficients()) out.accumulate(idx, 1.0, f);
    return out;
}

inline KForm subForms(const KForm& a, const KForm& b) {
    return addForms(a, scaleForm(b, -1.0));
}

inline KForm scaleFormByField(const KForm& w, const ScalarField& g) {
    KForm out(w.chart(), w.degree());
    for (const auto& [idx, f] : w.coefficients()) out.setCoefficient(idx, mulFields(g, f));
    return out;
}

// ---- chart maps ------------------------------------------------------------

// A smooth map between charts of equal dimension, stored as one scalar field
// per target coordinate (fields live on the source chart). Numerical flow
// maps fit this interface because their components are generic closures.
class ChartMap {
  public:
    ChartMap() = default;
    ChartMap(ChartPtr source, ChartPtr target, std::vector<ScalarField> comps)
        : source_(std::move(source)), target_(std::move(target)), comps_(std::move(comps)) {
        if (source_->dim() != target_->dim())
            throw ChartMismatchError("chart maps must preserve dimension");
        if (comps_.size() != target_->dim())
            throw ChartMismatchError("chart map needs one component per target coordinate");
    }

    bool valid() const { return source_ != nullptr; }
    const ChartPtr& source() const { return source_; }
    const ChartPtr& target() const { return target_; }
    const std::vector<ScalarField>& components() const { return comps_; }

    template <ad::Scalar S>
    std::vector<S> eval(const EvalCtx<S>& ctx) const {
        std::vector<S> out;
        out.reserve(comps_.size());
        for (const auto& c : comps_) out.push_back(c.eval(ctx));
        return out;
    }

    // Image of a point with target-domain enforcement.
    std::vector<double> apply(std::span<const double> x) const {
        auto y = eval(liftCtx<D0>(x));
        if (!target_->admissible(y))
            throw TargetInadmissibleError("map image left the target chart domain");
        return y;
    }

    ad::SquareMatrix<double> jacobianAt(std::span<const double> x) const {
        const std::size_t n = comps_.size();
        ad::SquareMatrix<double> j(n);
        EvalCtx<D0> base = liftCtx<D0>(x);
        for (std::size_t col = 0; col < n; ++col) {
            EvalCtx<D1> seeded = seedDirection(base, col);
            for (std::size_t row = 0; row < n; ++row)
                j(row, col) = comps_[row].eval(seeded).dot;
        }
        return j;
    }

  private:
    ChartPtr source_, target_;
    std::vector<ScalarField> comps_;
};

inline ChartMap identityMap(const ChartPtr& chart) {
    std::vector<ScalarField> comps;
    for (std::size_t i = 0; i < chart->dim(); ++i) comps.push_back(coordinateField(chart, i));
    return ChartMap(chart, chart, comps);
}

// outer after inner; components live on inner's source chart.
inline ChartMap composeMaps(const ChartMap& outer, const ChartMap& inner) {
    if (outer.source() != inner.target())
        throw ChartMismatchError("composed maps must chain source and target charts");
    std::vector<ScalarField> comps;
    for (const auto& oc : outer.components()) {
        comps.push_back(makeField(inner.source(), [oc, inner](const auto& ctx) {
            using S = std::remove_cvref_t<decltype(ctx.coords[0])>;
            EvalCtx<S> mid;
            mid.coords = inner.eval(ctx);
            mid.t = ctx.t;
            return oc.eval(mid);
        }));
    }
    return ChartMap(inner.source(), outer.target(), comps);
}

}  // namespace lcskit
