#pragma once

// The branch of sqrt(R(z)), R(z) = ∏_k (z - a_k)(z - b_k), that is analytic
// off the support arcs and satisfies sqrt(R(z))/z^K -> 1 at infinity.
//
// Construction: per arc, the Moebius ratio h(z) = (z - a_k)/(z - b_k) maps the
// arc onto the ray {t e^{iδ_k} : t >= 0} with δ_k = π - (β_k - α_k)/2, so a
// square root cut along that ray gives an analytic factor
//     u_k(z) = -(z - b_k) e^{iδ_k/2} sqrt_cut_pos(e^{-iδ_k} h(z)),
// where sqrt_cut_pos uses arguments in [0, 2π) (cut along the positive reals).
// The product of the u_k is the normalized branch; evaluating exactly on an
// arc lands on the cut's arg -> 0+ side, which is precisely the limit from
// inside the unit disk.  Boundary values are also available through a
// cancellation-free half-angle closed form.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "arcs.hpp"
#include "spectral.hpp"

namespace circeq {

namespace series {

/// Truncated product of two power series (first `n` coefficients).
inline std::vector<cdouble> mul(const std::vector<cdouble>& a, const std::vector<cdouble>& b,
                                std::size_t n) {
    std::vector<cdouble> c(n, 0.0);
    for (std::size_t i = 0; i < a.size() && i < n; ++i)
        for (std::size_t j = 0; j < b.size() && i + j < n; ++j) c[i + j] += a[i] * b[j];
    return c;
}

/// Reciprocal series: b with (Σ a_i x^i)(Σ b_i x^i) = 1 + O(x^n).  Needs a_0 ≠ 0.
inline std::vector<cdouble> reciprocal(const std::vector<cdouble>& a, std::size_t n) {
    if (a.empty() || std::abs(a[0]) < 1e-300)
        throw std::invalid_argument("series reciprocal: constant term must be nonzero");
    std::vector<cdouble> b(n, 0.0);
    b[0] = 1.0 / a[0];
    for (std::size_t k = 1; k < n; ++k) {
        cdouble s = 0.0;
        for (std::size_t j = 1; j <= k; ++j)
            if (j < a.size()) s += a[j] * b[k - j];
        b[k] = -s / a[0];
    }
    return b;
}

/// Square-root series with a prescribed constant term s0 (s0² = a_0).
inline std::vector<cdouble> sqrt_with_constant(const std::vector<cdouble>& a, cdouble s0,
                                               std::size_t n) {
    if (std::abs(s0) < 1e-300)
        throw std::invalid_argument("series sqrt: constant term must be nonzero");
    std::vector<cdouble> s(n, 0.0);
    s[0] = s0;
    for (std::size_t k = 1; k < n; ++k) {
        cdouble acc = (k < a.size()) ? a[k] : cdouble(0.0);
        for (std::size_t j = 1; j < k; ++j) acc -= s[j] * s[k - j];
        s[k] = acc / (2.0 * s0);
    }
    return s;
}

}  // namespace series

namespace detail {

/// Square root with branch cut along the positive real axis: arg taken in [0, 2π).
/// On the cut itself (arg exactly 0) this returns the arg -> 0+ limit.
inline cdouble sqrt_cut_pos(cdouble w) {
    double phi = std::arg(w);
    if (phi < 0.0) phi += two_pi;
    return std::polar(std::sqrt(std::abs(w)), 0.5 * phi);
}

}  // namespace detail

/// Normalized branch of sqrt(∏ (z - a_k)(z - b_k)) with cuts on the arcs.
class SqrtRBranch {
public:
    explicit SqrtRBranch(const ArcSet& support) : support_(support) {
        if (support_.full_circle())
            throw std::invalid_argument("SqrtRBranch: needs a proper arc set, not the full circle");
        for (const Arc& arc : support_.arcs()) {
            a_.push_back(std::polar(1.0, arc.alpha));
            b_.push_back(std::polar(1.0, arc.beta));
            delta_.push_back(pi - 0.5 * (arc.beta - arc.alpha));
        }
    }

    const ArcSet& support() const { return support_; }
    std::size_t K() const { return a_.size(); }

    /// Plain product R(z) = ∏ (z - a_k)(z - b_k).
    cdouble R(cdouble z) const {
        cdouble r = 1.0;
        for (std::size_t k = 0; k < a_.size(); ++k) r *= (z - a_[k]) * (z - b_[k]);
        return r;
    }

    /// Branch value at z off the arcs.  Guarded: points within 1e-13 of the
    /// support must use boundary() instead.
    cdouble offcut(cdouble z) const {
        if (support_.distance(z) <= 1e-13)
            throw std::domain_error(
                "sqrtR: on-cut evaluation requested; use sqrtR_boundary for points on the support");
        cdouble v = 1.0;
        for (std::size_t k = 0; k < a_.size(); ++k) v *= factor(k, z);
        return v;
    }

    /// Limiting value from inside the unit disk at e^{iθ}, θ strictly inside an arc.
    cdouble boundary(double theta) const {
        const auto idx = support_.arc_index(theta);
        if (!idx)
            throw std::domain_error("sqrtR: boundary value requested off the support arcs");
        if (support_.endpoint_distance(theta) < 1e-12)
            throw std::domain_error("sqrtR: boundary value at an arc endpoint is singular");
        const Arc& arc = support_.arc(*idx);
        double t = canonical_angle(theta);
        if (t < arc.alpha) t += two_pi;  // arc may extend past 2π
        // Half-angle closed form for the inside limit on the owning arc:
        //   u+ = -2 e^{i(t/2 + (α+β)/4)} sqrt(sin((t-α)/2)) sqrt(-sin((t-β)/2)).
        const double sa = std::sin(0.5 * (t - arc.alpha));
        const double sb = -std::sin(0.5 * (t - arc.beta));
        cdouble v = -2.0 * std::sqrt(sa) * std::sqrt(sb) *
                    std::polar(1.0, 0.5 * t + 0.25 * (arc.alpha + arc.beta));
        const cdouble z = std::polar(1.0, theta);
        for (std::size_t k = 0; k < a_.size(); ++k)
            if (k != *idx) v *= factor(k, z);
        return v;
    }

    /// Taylor coefficients of 1/sqrt(R(ζ)) about ζ = 0 (the same branch).
    std::vector<cdouble> recip_series_at_zero(std::size_t nterms) const {
        std::vector<cdouble> rpoly{1.0};
        for (std::size_t k = 0; k < a_.size(); ++k) {
            // multiply by (ζ - a_k)(ζ - b_k) = a_k b_k - (a_k + b_k) ζ + ζ²
            const std::vector<cdouble> quad{a_[k] * b_[k], -(a_[k] + b_[k]), 1.0};
            rpoly = series::mul(rpoly, quad, rpoly.size() + 2);
        }
        const cdouble s0 = offcut(cdouble(0.0, 0.0));
        return series::reciprocal(series::sqrt_with_constant(rpoly, s0, nterms), nterms);
    }

    /// Coefficients τ_n with 1/sqrt(R(ζ)) = ζ^{-K} Σ τ_n ζ^{-n} near infinity,
    /// i.e. the reciprocal of sqrt(∏ (1 - a_k u)(1 - b_k u)) with value 1 at u = 0.
    std::vector<cdouble> recip_series_at_infinity(std::size_t nterms) const {
        std::vector<cdouble> p{1.0};
        for (std::size_t k = 0; k < a_.size(); ++k) {
            const std::vector<cdouble> quad{1.0, -(a_[k] + b_[k]), a_[k] * b_[k]};
            p = series::mul(p, quad, p.size() + 2);
        }
        return series::reciprocal(series::sqrt_with_constant(p, 1.0, nterms), nterms);
    }

private:
    cdouble factor(std::size_t k, cdouble z) const {
        const cdouble h = (z - a_[k]) / (z - b_[k]);
        return -(z - b_[k]) * std::polar(1.0, 0.5 * delta_[k]) *
               detail::sqrt_cut_pos(std::polar(1.0, -delta_[k]) * h);
    }

    ArcSet support_;
    std::vector<cdouble> a_, b_;
    std::vector<double> delta_;
};

inline cdouble sqrtR_offcut(const SqrtRBranch& branch, cdouble z) { return branch.offcut(z); }
inline cdouble sqrtR_boundary(const SqrtRBranch& branch, double theta) { return branch.boundary(theta); }

}  // namespace circeq
