#pragma once

// Quadrature on circular arcs.
//
// All arc integrals use the cosine-stretched node family
//     t_i = mid - halfwidth * cos(s_i),  s_i = (2i-1)π/(2n),
// with weights (π/n) * halfwidth * sin(s_i) for plain dt-integrals.  This is
// the Chebyshev (first-kind) rule in the stretched variable: it absorbs the
// 1/sqrt endpoint singularities of the Cauchy integrands and is spectrally
// accurate for densities vanishing like sqrt at arc endpoints.
//
// Principal values are handled by singularity subtraction against exact
// antiderivatives:
//   ∫_arc dζ/(ζ - e^{iθ})            = log|sin((β-θ)/2)| - log|sin((α-θ)/2)| + i(β-α)/2
//   PV ∫_arc cot((θ-t)/2) dt         = 2 log|sin((θ-α)/2)| - 2 log|sin((θ-β)/2)|
//   ∫_arc log|2 sin((θ-t)/2)| dt     = Cl2(θ-β) - Cl2(θ-α)
// (the first two hold for θ on or off the arc; Cl2 is the Clausen function).

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "arcs.hpp"
#include "sqrt_branch.hpp"

namespace circeq {

// ---------------------------------------------------------------------------
// Clausen function Cl2(x) = -∫_0^x log|2 sin(u/2)| du = Σ sin(kx)/k².
// Evaluated by log-extracted Taylor series on [0, π/2] and a reflected series
// near π; odd and 2π-periodic elsewhere.
// ---------------------------------------------------------------------------

namespace detail {

// ζ(2), ζ(4), ..., ζ(32); beyond that ζ(2j) = 1 to double precision for our use.
inline constexpr double even_zeta[16] = {
    1.6449340668482264, 1.0823232337111382, 1.0173430619844491, 1.0040773561979443,
    1.0009945751278181, 1.0002460865533080, 1.0000612481350587, 1.0000152822594087,
    1.0000038172932650, 1.0000009539620338, 1.0000002384505027, 1.0000000596081891,
    1.0000000149015548, 1.0000000037253340, 1.0000000009313274, 1.0000000002328312};

inline double zeta_even(std::size_t j) {  // ζ(2j), j >= 1
    return j <= 16 ? even_zeta[j - 1] : 1.0;
}

}  // namespace detail

inline double clausen2(double x) {
    // reduce to (-π, π], use oddness
    double y = std::remainder(x, two_pi);
    double sign = 1.0;
    if (y < 0.0) { y = -y; sign = -1.0; }
    double v;
    if (y <= 0.5 * pi) {
        // Cl2(y) = y - y log y + Σ_j ζ(2j)/(j(2j+1)) (y²/(4π²))^j y
        if (y == 0.0) return 0.0;
        const double q = y * y / (4.0 * pi * pi);
        double sum = 0.0, qp = 1.0;
        for (std::size_t j = 1; j <= 16; ++j) {
            qp *= q;
            const double term = detail::zeta_even(j) / (double(j) * double(2 * j + 1)) * qp;
            sum += term;
            if (term < 1e-18) break;
        }
        v = y - y * std::log(y) + y * sum;
    } else {
        // Cl2(π - u) = u log 2 - Σ_j (1 - 4^{-j}) ζ(2j)/(j(2j+1)) (u²/π²)^j u
        const double u = pi - y;
        const double q = u * u / (pi * pi);
        double sum = 0.0, qp = 1.0, pow4 = 1.0;
        for (std::size_t j = 1; j <= 28; ++j) {
            qp *= q;
            pow4 *= 0.25;
            const double term =
                (1.0 - pow4) * detail::zeta_even(j) / (double(j) * double(2 * j + 1)) * qp;
            sum += term;
            if (term < 1e-18) break;
        }
        v = u * std::log(2.0) - u * sum;
    }
    return sign * v;
}

// ---------------------------------------------------------------------------
// Arc node rules
// ---------------------------------------------------------------------------

/// Cosine-stretched Chebyshev rule on an arc: Σ weights[i]·φ(angles[i]) ≈ ∫_arc φ dt.
/// Angles are strictly interior and ascending.
struct ArcRule {
    std::vector<double> angles;
    std::vector<double> weights;
};

inline ArcRule arc_rule(const Arc& arc, std::size_t n) {
    if (n == 0) throw std::invalid_argument("arc_rule: need at least one node");
    ArcRule rule;
    rule.angles.resize(n);
    rule.weights.resize(n);
    const double mid = arc.midpoint(), hw = arc.halfwidth();
    for (std::size_t i = 0; i < n; ++i) {
        const double s = (2.0 * double(i) + 1.0) * pi / (2.0 * double(n));
        rule.angles[i] = mid - hw * std::cos(s);  // ascending in i
        rule.weights[i] = pi / double(n) * hw * std::sin(s);
    }
    return rule;
}

/// Exact ∫_arc log|2 sin((θ-t)/2)| dt.
inline double arc_log_kernel_integral(const Arc& arc, double theta) {
    return clausen2(theta - arc.beta) - clausen2(theta - arc.alpha);
}

/// Exact ∫_arc dζ/(ζ - e^{iθ}), principal value if θ lies inside the arc.
inline cdouble arc_cauchy_integral(const Arc& arc, double theta) {
    const double sb = std::abs(std::sin(0.5 * (arc.beta - theta)));
    const double sa = std::abs(std::sin(0.5 * (arc.alpha - theta)));
    if (sa < 1e-150 || sb < 1e-150)
        throw std::domain_error("arc_cauchy_integral: evaluation angle coincides with an arc endpoint");
    return cdouble(std::log(sb) - std::log(sa), 0.5 * (arc.beta - arc.alpha));
}

/// Exact PV ∫_arc cot((θ-t)/2) dt (also valid as a plain integral for θ off the arc).
inline double arc_cot_integral(const Arc& arc, double theta) {
    const double sa = std::abs(std::sin(0.5 * (theta - arc.alpha)));
    const double sb = std::abs(std::sin(0.5 * (theta - arc.beta)));
    if (sa < 1e-150 || sb < 1e-150)
        throw std::domain_error("arc_cot_integral: evaluation angle coincides with an arc endpoint");
    return 2.0 * (std::log(sa) - std::log(sb));
}

// ---------------------------------------------------------------------------
// Cauchy-kernel integrals over the support arcs
// ---------------------------------------------------------------------------

struct QuadratureOptions {
    std::size_t initial_nodes = 256;  // per arc
    std::size_t max_nodes = 16384;
    double tolerance = 1e-9;          // doubling stops when successive values agree this well
};

namespace detail {

/// One pass of ∫_{S_w} G(t(ζ)) dζ/(√R(ζ)(ζ-z)) with n nodes per arc.
/// own_arc >= 0 marks the arc containing z = e^{iθ0} for PV subtraction.
inline cdouble cauchy_pass(const SqrtRBranch& branch, const std::function<cdouble(double)>& G,
                           cdouble z, long own_arc, double theta0, std::size_t n) {
    const ArcSet& sup = branch.support();
    cdouble total = 0.0;
    for (std::size_t k = 0; k < sup.size(); ++k) {
        const Arc& arc = sup.arc(k);
        ArcRule rule = arc_rule(arc, n);
        if (long(k) == own_arc) {
            // keep quadrature nodes clear of the evaluation angle
            bool collide = false;
            for (double t : rule.angles)
                if (std::abs(std::remainder(t - theta0, two_pi)) < 1e-10) { collide = true; break; }
            if (collide) rule = arc_rule(arc, n + 1);
            const cdouble Hz = G(theta0) / branch.boundary(theta0);
            cdouble acc = 0.0;
            for (std::size_t i = 0; i < rule.angles.size(); ++i) {
                const double t = rule.angles[i];
                const cdouble zeta = std::polar(1.0, t);
                const cdouble H = G(t) / branch.boundary(t);
                acc += rule.weights[i] * (H - Hz) * cdouble(0.0, 1.0) * zeta / (zeta - z);
            }
            total += acc + Hz * arc_cauchy_integral(arc, theta0);
        } else {
            cdouble acc = 0.0;
            for (std::size_t i = 0; i < rule.angles.size(); ++i) {
                const double t = rule.angles[i];
                const cdouble zeta = std::polar(1.0, t);
                acc += rule.weights[i] * G(t) / branch.boundary(t) * cdouble(0.0, 1.0) * zeta /
                       (zeta - z);
            }
            total += acc;
        }
    }
    return total;
}

}  // namespace detail

/// ∫_{S_w} G(ζ) dζ/(√R(ζ)(ζ-z)) with inside-limit √R on the arcs; the Cauchy
/// principal value when z lies on the support.  G is given as a function of
/// the angle.  Node counts double until two passes agree to options.tolerance.
inline cdouble pv_cauchy_on_arcs(const SqrtRBranch& branch, const std::function<cdouble(double)>& G,
                                 cdouble z, const QuadratureOptions& options = {}) {
    const ArcSet& sup = branch.support();
    long own_arc = -1;
    double theta0 = 0.0;
    if (std::abs(std::abs(z) - 1.0) <= 1e-12) {
        theta0 = canonical_angle(std::arg(z));
        if (auto idx = sup.arc_index(theta0)) {
            if (sup.endpoint_distance(theta0) < 1e-12)
                throw std::domain_error("pv_cauchy_on_arcs: evaluation at an arc endpoint");
            own_arc = long(*idx);
            z = std::polar(1.0, theta0);  // snap exactly onto the circle
        }
    }
    std::size_t n = options.initial_nodes;
    cdouble prev = detail::cauchy_pass(branch, G, z, own_arc, theta0, n);
    while (2 * n <= options.max_nodes) {
        n *= 2;
        const cdouble cur = detail::cauchy_pass(branch, G, z, own_arc, theta0, n);
        if (std::abs(cur - prev) <= options.tolerance * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

// ---------------------------------------------------------------------------
// Cotangent-kernel principal values over a fixed node budget
// ---------------------------------------------------------------------------

/// PV ∫_{arcs} h(t) cot((θ-t)/2) dt with n nodes per arc.  h must be evaluable
/// exactly at the rule nodes; θ must not coincide with a node of its own arc
/// (callers evaluate at staggered angles or rely on the 1e-12 guard).
inline double pv_cot_on_arcs(const ArcSet& arcs, const std::function<double(double)>& h,
                             double theta, std::size_t n) {
    if (arcs.full_circle())
        throw std::invalid_argument("pv_cot_on_arcs: needs a proper arc set; use the spectral route");
    const auto own = arcs.arc_index(theta);
    double total = 0.0;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
        const Arc& arc = arcs.arc(k);
        const ArcRule rule = arc_rule(arc, n);
        if (own && *own == k) {
            const double hz = h(theta);
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = rule.angles[i];
                const double d = std::remainder(theta - t, two_pi);
                if (std::abs(d) < 1e-12)
                    throw std::invalid_argument(
                        "pv_cot_on_arcs: evaluation angle coincides with a quadrature node");
                acc += rule.weights[i] * (h(t) - hz) / std::tan(0.5 * d);
            }
            total += acc + hz * arc_cot_integral(arc, theta);
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double d = std::remainder(theta - rule.angles[i], two_pi);
                total += rule.weights[i] * h(rule.angles[i]) / std::tan(0.5 * d);
            }
        }
    }
    return total;
}

}  // namespace circeq
