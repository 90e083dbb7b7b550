#pragma once

// Equilibrium-density evaluation on a given support.
//
// Four routes to the density f (dμ = f dt):
//  * full_circle_density  — f = 1/(2π) - (1/π)(Q')~ on a uniform grid, with
//    closed forms for the polynomial and trig-exponential weight classes;
//  * polynomial_density   — boundary values of the rational-in-poles formula F_1;
//  * trig_density         — boundary values of F_2 built from the Laurent
//    coefficient tables of 1/(sqrtR(ζ)(ζ-z)) at 0 and ∞;
//  * general_density      — the singular-integral formula
//    F(z) = (sqrtR(z)/πi) PV ∫ g(ζ) dζ/(sqrtR(ζ)(ζ-z)), any C² field.
//
// Plus the p(θ) functional whose positivity set carves out the support, and
// the logarithmic potential of a density profile.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "arcs.hpp"
#include "field.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
#include "sqrt_branch.hpp"

namespace circeq {

// ---------------------------------------------------------------------------
// DensityProfile: sampled density with barycentric interpolation
// ---------------------------------------------------------------------------

/// Density samples on a support: cosine-clustered nodes per arc (denser near
/// the endpoints, where f vanishes like a square root), or a uniform grid for
/// the full circle.  Interpolation is barycentric; stored nodes evaluate
/// exactly.  Off-support angles evaluate to 0.
class DensityProfile {
public:
    /// Proper-arc profile sampling f at the arc_rule nodes.
    DensityProfile(const ArcSet& support, std::size_t nodes_per_arc,
                   const std::function<double(double)>& f)
        : support_(support) {
        if (support_.full_circle())
            throw std::invalid_argument("DensityProfile: use uniform_circle for full-circle supports");
        init_arcs(nodes_per_arc);
        for (std::size_t k = 0; k < support_.size(); ++k)
            for (double t : rules_[k].angles) values_[k].push_back(f(t));
    }

    /// Proper-arc profile from precomputed values at the arc_rule nodes.
    DensityProfile(const ArcSet& support, std::vector<std::vector<double>> values)
        : support_(support) {
        if (support_.full_circle())
            throw std::invalid_argument("DensityProfile: use uniform_circle for full-circle supports");
        if (values.size() != support_.size() || values.empty() || values[0].empty())
            throw std::invalid_argument("DensityProfile: one value vector per arc required");
        init_arcs(values[0].size());
        for (const auto& v : values)
            if (v.size() != rules_[0].angles.size())
                throw std::invalid_argument("DensityProfile: per-arc sample counts must match");
        values_ = std::move(values);
    }

    /// Full-circle profile from samples at θ_i = 2πi/N.
    static DensityProfile uniform_circle(std::vector<double> samples) {
        if (!is_pow2(samples.size()) || samples.size() < 8)
            throw std::invalid_argument("DensityProfile: full-circle grid must be a power of two, at least 8");
        DensityProfile p;
        p.circle_values_ = std::move(samples);
        return p;
    }

    bool full_circle() const { return support_.full_circle(); }
    const ArcSet& support() const { return support_; }
    std::size_t nodes_per_arc() const {
        return full_circle() ? circle_values_.size() : rules_[0].angles.size();
    }
    const std::vector<double>& arc_angles(std::size_t k) const { return rules_[k].angles; }
    const std::vector<double>& arc_weights(std::size_t k) const { return rules_[k].weights; }
    const std::vector<double>& arc_values(std::size_t k) const { return values_[k]; }
    const std::vector<double>& circle_values() const { return circle_values_; }

    double mass() const {
        if (full_circle()) {
            double s = 0.0;
            for (double v : circle_values_) s += v;
            return s * two_pi / double(circle_values_.size());
        }
        double s = 0.0;
        for (std::size_t k = 0; k < values_.size(); ++k)
            for (std::size_t i = 0; i < values_[k].size(); ++i)
                s += rules_[k].weights[i] * values_[k][i];
        return s;
    }

    double min_value() const {
        double m = 1e300;
        if (full_circle()) {
            for (double v : circle_values_) m = std::min(m, v);
            return m;
        }
        for (const auto& v : values_)
            for (double x : v) m = std::min(m, x);
        return m;
    }

    /// Interpolated density; 0 off the support.
    double operator()(double theta) const {
        if (full_circle()) return interp_circle(theta);
        const auto idx = support_.arc_index(theta);
        if (!idx) return 0.0;
        return interp_arc(*idx, theta);
    }

    /// All samples as ascending (θ, f) pairs, for serialization.
    std::vector<std::pair<double, double>> all_samples() const {
        std::vector<std::pair<double, double>> out;
        if (full_circle()) {
            const std::size_t n = circle_values_.size();
            out.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
                out.emplace_back(two_pi * double(i) / double(n), circle_values_[i]);
            return out;
        }
        for (std::size_t k = 0; k < values_.size(); ++k)
            for (std::size_t i = 0; i < values_[k].size(); ++i)
                out.emplace_back(canonical_angle(rules_[k].angles[i]), values_[k][i]);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    DensityProfile() = default;

    void init_arcs(std::size_t nodes_per_arc) {
        if (nodes_per_arc < 2)
            throw std::invalid_argument("DensityProfile: need at least two nodes per arc");
        for (std::size_t k = 0; k < support_.size(); ++k) {
            rules_.push_back(arc_rule(support_.arc(k), nodes_per_arc));
            values_.emplace_back();
            values_[k].reserve(nodes_per_arc);
        }
        // barycentric weights for the cosine-stretched nodes x_i = -cos(s_i)
        const std::size_t n = nodes_per_arc;
        bary_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = (2.0 * double(i) + 1.0) * pi / (2.0 * double(n));
            bary_[i] = (i % 2 == 0 ? 1.0 : -1.0) * std::sin(s);
        }
    }

    double interp_arc(std::size_t k, double theta) const {
        const Arc& arc = support_.arc(k);
        double t = canonical_angle(theta);
        if (t < arc.alpha) t += two_pi;
        const double x = (t - arc.midpoint()) / arc.halfwidth();
        double num = 0.0, den = 0.0;
        const std::size_t n = bary_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double s = (2.0 * double(i) + 1.0) * pi / (2.0 * double(n));
            const double xi = -std::cos(s);
            const double d = x - xi;
            if (std::abs(d) < 1e-14) return values_[k][i];
            const double c = bary_[i] / d;
            num += c * values_[k][i];
            den += c;
        }
        return num / den;
    }

    double interp_circle(double theta) const {
        // trigonometric barycentric interpolation on an even uniform grid
        const std::size_t n = circle_values_.size();
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ti = two_pi * double(i) / double(n);
            const double d = std::remainder(theta - ti, two_pi);
            if (std::abs(d) < 1e-14) return circle_values_[i];
            const double c = (i % 2 == 0 ? 1.0 : -1.0) / std::tan(0.5 * d);
            num += c * circle_values_[i];
            den += c;
        }
        return num / den;
    }

    ArcSet support_;                            // full circle when circle_values_ used
    std::vector<ArcRule> rules_;                // per arc
    std::vector<std::vector<double>> values_;   // per arc
    std::vector<double> bary_;                  // shared barycentric weights
    std::vector<double> circle_values_;         // full-circle samples
};

// ---------------------------------------------------------------------------
// Full-circle density
// ---------------------------------------------------------------------------

/// The conjugate-function route, available for every field class (also the
/// cross-check for the class closed forms).
inline std::vector<double> full_circle_values_spectral(const ExternalField& field,
                                                       std::size_t N = 2048) {
    if (!is_pow2(N) || N < 8)
        throw std::invalid_argument("full_circle_values_spectral: grid size must be a power of two, at least 8");
    std::vector<double> qp(N);
    for (std::size_t i = 0; i < N; ++i) qp[i] = eval_Qprime(field, two_pi * double(i) / double(N));
    std::vector<double> conj = conjugate_function(qp);
    std::vector<double> f(N);
    for (std::size_t i = 0; i < N; ++i) f[i] = 1.0 / two_pi - conj[i] / pi;
    return f;
}

/// Raw uniform-grid values of the would-be full-circle density
/// f = 1/(2π) - (1/π)(Q')~, via the class closed form when one exists.
inline std::vector<double> full_circle_values(const ExternalField& field, std::size_t N = 2048) {
    if (!is_pow2(N) || N < 8)
        throw std::invalid_argument("full_circle_values: grid size must be a power of two, at least 8");
    std::vector<double> f(N);
    if (const auto* w = std::get_if<PolynomialWeight>(&field)) {
        for (std::size_t i = 0; i < N; ++i) {
            const double t = two_pi * double(i) / double(N);
            const cdouble u = std::polar(1.0, t);
            double s = 1.0 + w->lambda_sum();
            for (const auto& term : w->terms())
                s -= term.lambda * std::abs(std::norm(term.zero) - 1.0) / std::norm(u - term.zero);
            f[i] = s / two_pi;
        }
        return f;
    }
    if (const auto* w = std::get_if<TrigExponentialWeight>(&field)) {
        for (std::size_t i = 0; i < N; ++i) {
            const double t = two_pi * double(i) / double(N);
            double s = 1.0 / two_pi;
            for (int m = 1; m <= w->degree(); ++m)
                s -= 2.0 * double(m) / pi * (w->coeff(m) * std::polar(1.0, m * t)).real();
            f[i] = s;
        }
        return f;
    }
    return full_circle_values_spectral(field, N);
}

/// Error payload when the would-be full-circle density dips negative.
struct FullCircleViolation : std::runtime_error {
    std::vector<Arc> intervals;  // angle ranges where f < threshold
    explicit FullCircleViolation(std::vector<Arc> where)
        : std::runtime_error("support is not the full circle: density would be negative"),
          intervals(std::move(where)) {}
};

namespace detail {

/// Connected runs (merged across the 0/2π seam) of grid indices satisfying `pred`.
inline std::vector<Arc> grid_runs(std::size_t N, const std::function<bool(std::size_t)>& pred) {
    std::vector<Arc> runs;
    const double step = two_pi / double(N);
    std::size_t start = 0;
    bool in_run = false;
    for (std::size_t i = 0; i < N; ++i) {
        if (pred(i) && !in_run) { start = i; in_run = true; }
        if (!pred(i) && in_run) {
            runs.push_back(Arc{double(start) * step, double(i - 1) * step});
            in_run = false;
        }
    }
    if (in_run) runs.push_back(Arc{double(start) * step, double(N - 1) * step});
    // merge a run ending at the last grid point with one starting at index 0
    if (runs.size() >= 2 && runs.front().alpha == 0.0 &&
        runs.back().beta == double(N - 1) * step) {
        runs.back().beta = runs.front().beta + two_pi;
        runs.erase(runs.begin());
    }
    return runs;
}

}  // namespace detail

/// f = 1/(2π) - (1/π)(Q')~ on the uniform grid, assuming the support is the
/// whole circle.  Throws FullCircleViolation when the values dip below -1e-8.
inline DensityProfile full_circle_density(const ExternalField& field, std::size_t N = 2048) {
    std::vector<double> f = full_circle_values(field, N);
    double mn = 1e300;
    for (double v : f) mn = std::min(mn, v);
    if (mn < -1e-8) {
        auto runs = detail::grid_runs(N, [&](std::size_t i) { return f[i] < -1e-8; });
        throw FullCircleViolation(std::move(runs));
    }
    for (double& v : f) v = std::max(v, 0.0);
    return DensityProfile::uniform_circle(std::move(f));
}

// ---------------------------------------------------------------------------
// Polynomial-weight closed form F_1
// ---------------------------------------------------------------------------

namespace detail {

struct F1Pole {
    cdouble point;   // z_j or its reflection 1/conj(z_j)
    cdouble weight;  // λ_j · point / sqrtR(point)
};

inline std::vector<F1Pole> f1_poles(const PolynomialWeight& w, const SqrtRBranch& branch,
                                    double guard = 0.0) {
    std::vector<F1Pole> poles;
    for (const auto& term : w.terms()) {
        for (const cdouble p : {term.zero, 1.0 / std::conj(term.zero)}) {
            if (branch.support().distance(p) <= std::max(guard, 1e-13))
                throw std::domain_error(
                    "polynomial weight: a zero or its circle reflection lies on the candidate support");
            poles.push_back({p, term.lambda * p / branch.offcut(p)});
        }
    }
    return poles;
}

inline cdouble f1_bracket(const std::vector<F1Pole>& poles, cdouble z) {
    cdouble s = 0.0;
    for (const auto& p : poles) s += p.weight / (p.point - z);
    return s;
}

}  // namespace detail

/// F_1(z) off the support: (sqrtR(z)/2π) Σ λ_j [ z_j/((z_j-z) sqrtR(z_j)) + … reflection ].
inline cdouble polynomial_F1_offcut(const PolynomialWeight& w, const SqrtRBranch& branch, cdouble z) {
    return branch.offcut(z) / two_pi * detail::f1_bracket(detail::f1_poles(w, branch), z);
}

/// F_1 on the support with the inside-limit sqrtR (this is the density value).
inline cdouble polynomial_F1_boundary(const PolynomialWeight& w, const SqrtRBranch& branch,
                                      double theta) {
    return branch.boundary(theta) / two_pi *
           detail::f1_bracket(detail::f1_poles(w, branch), std::polar(1.0, theta));
}

// ---------------------------------------------------------------------------
// Trig-exponential closed form F_2 and its coefficient tables
// ---------------------------------------------------------------------------

/// Laurent-expansion tables for 1/(sqrtR(ζ)(ζ-z)):
///   near ∞:  Σ_{k>K} s_k(z)/ζ^k,   s_k a polynomial of degree ≤ k-K-1;
///   near 0:  Σ_{k≥0} r_k(z) ζ^k,   r_k a polynomial in 1/z of degree ≤ k+1.
struct CoefficientTables {
    std::size_t K = 0;
    std::size_t M = 0;
    std::vector<std::vector<cdouble>> s_coeffs;  // s_coeffs[k][p] multiplies z^p, k = 0..M+1
    std::vector<std::vector<cdouble>> r_coeffs;  // r_coeffs[k][d] multiplies z^{-(d+1)}, k = 0..M-1

    cdouble eval_s(std::size_t k, cdouble z) const {
        const auto& c = s_coeffs.at(k);
        cdouble acc = 0.0;
        for (std::size_t p = c.size(); p-- > 0;) acc = acc * z + c[p];
        return acc;
    }
    cdouble eval_r(std::size_t k, cdouble z) const {
        const auto& c = r_coeffs.at(k);
        const cdouble iz = 1.0 / z;
        cdouble acc = 0.0;
        for (std::size_t d = c.size(); d-- > 0;) acc = acc * iz + c[d];
        return acc * iz;
    }
};

/// Build s_{K+1}..s_{M+1} and r_0..r_{M-1} by power-series recursion.
inline CoefficientTables build_coefficient_tables(const SqrtRBranch& branch, std::size_t M) {
    const std::size_t K = branch.K();
    if (M < K)
        throw std::invalid_argument("build_coefficient_tables: expansion order must be at least the arc count");
    CoefficientTables tab;
    tab.K = K;
    tab.M = M;
    // s_k(z) = Σ_{p=0}^{k-K-1} τ_{k-K-1-p} z^p with Σ τ_n u^n = 1/sqrt(∏(1-a u)(1-b u))
    const std::vector<cdouble> tau = branch.recip_series_at_infinity(M + 2 - K);
    tab.s_coeffs.resize(M + 2);
    for (std::size_t k = K + 1; k <= M + 1; ++k) {
        auto& c = tab.s_coeffs[k];
        c.resize(k - K);
        for (std::size_t p = 0; p + K + 1 <= k; ++p) c[p] = tau[k - K - 1 - p];
    }
    // r_k(z) = -Σ_{n=0}^{k} E_n z^{n-k-1} with Σ E_n ζ^n = 1/sqrtR(ζ) near 0
    if (M >= 1) {
        const std::vector<cdouble> E = branch.recip_series_at_zero(M);
        tab.r_coeffs.resize(M);
        for (std::size_t k = 0; k < M; ++k) {
            auto& c = tab.r_coeffs[k];
            c.resize(k + 1);
            for (std::size_t d = 0; d <= k; ++d) c[d] = -E[k - d];  // multiplies z^{-(d+1)}
        }
    }
    return tab;
}

namespace detail {

inline cdouble f2_bracket(const TrigExponentialWeight& w, const CoefficientTables& tab, cdouble z) {
    cdouble s = 0.0;
    for (int m = int(tab.K); m <= int(tab.M); ++m)
        if (std::abs(w.coeff(m)) != 0.0) s += double(m) * w.coeff(m) * tab.eval_s(std::size_t(m) + 1, z);
    for (int m = -int(tab.M); m <= -1; ++m)
        if (std::abs(w.coeff(m)) != 0.0)
            s -= double(m) * w.coeff(m) * tab.eval_r(std::size_t(-m) - 1, z);
    return s;
}

}  // namespace detail

/// F_2(z) off the support: (sqrtR(z)/π)(Σ_{m=K}^{M} m c_m s_{m+1}(z) - Σ_{m<0} m c_m r_{-m-1}(z)).
inline cdouble trig_F2_offcut(const TrigExponentialWeight& w, const SqrtRBranch& branch,
                              const CoefficientTables& tab, cdouble z) {
    return branch.offcut(z) / pi * detail::f2_bracket(w, tab, z);
}

/// F_2 on the support with the inside-limit sqrtR (the density value).
inline cdouble trig_F2_boundary(const TrigExponentialWeight& w, const SqrtRBranch& branch,
                                const CoefficientTables& tab, double theta) {
    return branch.boundary(theta) / pi * detail::f2_bracket(w, tab, std::polar(1.0, theta));
}

// ---------------------------------------------------------------------------
// General field: the singular-integral formula
// ---------------------------------------------------------------------------

/// F(e^{iθ}) for θ inside a support arc:
/// (sqrtR⁺(e^{iθ})/πi) PV ∫ g(ζ) dζ/(sqrtR(ζ)(ζ-e^{iθ})).
inline cdouble general_F_boundary(const ExternalField& field, const SqrtRBranch& branch,
                                  double theta, const QuadratureOptions& options = {}) {
    const cdouble integral = pv_cauchy_on_arcs(
        branch, [&](double t) { return eval_g(field, t); }, std::polar(1.0, theta), options);
    return branch.boundary(theta) / cdouble(0.0, pi) * integral;
}

/// The same formula off the support (there F equals the class closed form plus g).
inline cdouble general_F_offcut(const ExternalField& field, const SqrtRBranch& branch, cdouble z,
                                const QuadratureOptions& options = {}) {
    const cdouble integral = pv_cauchy_on_arcs(
        branch, [&](double t) { return eval_g(field, t); }, z, options);
    return branch.offcut(z) / cdouble(0.0, pi) * integral;
}

// ---------------------------------------------------------------------------
// Named density builders (validated)
// ---------------------------------------------------------------------------

namespace detail {

inline DensityProfile build_validated_profile(const ArcSet& support, std::size_t nodes_per_arc,
                                              const std::function<cdouble(double)>& F_boundary,
                                              double* imag_sup_out, const char* label) {
    double imag_sup = 0.0, min_real = 1e300;
    std::vector<std::vector<double>> values(support.size());
    for (std::size_t k = 0; k < support.size(); ++k) {
        const ArcRule rule = arc_rule(support.arc(k), nodes_per_arc);
        values[k].reserve(nodes_per_arc);
        for (double t : rule.angles) {
            const cdouble v = F_boundary(t);
            imag_sup = std::max(imag_sup, std::abs(v.imag()));
            min_real = std::min(min_real, v.real());
            values[k].push_back(std::max(v.real(), 0.0));
        }
    }
    if (imag_sup_out) *imag_sup_out = imag_sup;
    if (imag_sup > 1e-8)
        throw std::domain_error(std::string(label) +
                                ": density has a non-negligible imaginary part; support is inconsistent");
    if (min_real < -1e-10)
        throw std::domain_error(std::string(label) +
                                ": density is negative on the candidate support; wrong support");
    return DensityProfile(support, std::move(values));
}

}  // namespace detail

/// Density on a proper support from the polynomial closed form F_1.
inline DensityProfile polynomial_density(const PolynomialWeight& w, const ArcSet& support,
                                         std::size_t nodes_per_arc = 1024,
                                         double* imag_sup = nullptr) {
    const SqrtRBranch branch(support);
    const auto poles = detail::f1_poles(w, branch);
    return detail::build_validated_profile(
        support, nodes_per_arc,
        [&](double t) {
            return branch.boundary(t) / two_pi * detail::f1_bracket(poles, std::polar(1.0, t));
        },
        imag_sup, "polynomial_density");
}

/// Density on a proper support from the trig-exponential closed form F_2.
/// A purely constant field returns the all-zero profile (the formula's empty
/// sums), signalling that a proper-arc support cannot be right for it.
inline DensityProfile trig_density(const TrigExponentialWeight& w, const ArcSet& support,
                                   std::size_t nodes_per_arc = 1024, double* imag_sup = nullptr) {
    if (w.degree() == 0) {
        if (imag_sup) *imag_sup = 0.0;
        return DensityProfile(support, nodes_per_arc, [](double) { return 0.0; });
    }
    if (support.size() > std::size_t(w.degree()))
        throw std::invalid_argument("trig_density: more support arcs than the field degree allows");
    const SqrtRBranch branch(support);
    const CoefficientTables tab = build_coefficient_tables(branch, std::size_t(w.degree()));
    return detail::build_validated_profile(
        support, nodes_per_arc,
        [&](double t) { return trig_F2_boundary(w, branch, tab, t); }, imag_sup, "trig_density");
}

/// Density from the general singular-integral formula; works for any C² field.
inline DensityProfile general_density(const ExternalField& field, const ArcSet& support,
                                      std::size_t nodes_per_arc = 257, double* imag_sup = nullptr,
                                      const QuadratureOptions& options = {}) {
    const SqrtRBranch branch(support);
    return detail::build_validated_profile(
        support, nodes_per_arc,
        [&](double t) { return general_F_boundary(field, branch, t, options); }, imag_sup,
        "general_density");
}

// ---------------------------------------------------------------------------
// Logarithmic potential of a profile
// ---------------------------------------------------------------------------

/// U^μ(e^{iθ}) = -∫ f(t) log|2 sin((θ-t)/2)| dt.
/// Full-circle profiles go through Fourier coefficients; arc profiles use the
/// node rule with the log singularity subtracted against the exact Clausen
/// antiderivative on the arc containing θ.
inline double log_kernel_potential(const DensityProfile& profile, double theta) {
    if (profile.min_value() < -1e-10)
        throw std::domain_error("log_kernel_potential: density must be nonnegative");
    if (profile.full_circle()) {
        const auto& f = profile.circle_values();
        const std::size_t n = f.size();
        const std::vector<cdouble> fc = fft_real(f);
        double u = 0.0;
        for (std::size_t k = 1; k < n / 2; ++k)
            u += two_pi / (double(k) * double(n)) * (fc[k] * std::polar(1.0, double(k) * theta)).real();
        return u;
    }
    const ArcSet& sup = profile.support();
    const auto own = sup.arc_index(theta);
    double total = 0.0;
    for (std::size_t k = 0; k < sup.size(); ++k) {
        const auto& t = profile.arc_angles(k);
        const auto& w = profile.arc_weights(k);
        const auto& v = profile.arc_values(k);
        if (own && *own == k) {
            const double ftheta = profile(theta);
            double acc = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double d = std::remainder(theta - t[i], two_pi);
                if (std::abs(d) < 1e-12) continue;  // (f - fθ) log → 0 limit
                acc += w[i] * (v[i] - ftheta) * std::log(std::abs(2.0 * std::sin(0.5 * d)));
            }
            total += acc + ftheta * arc_log_kernel_integral(sup.arc(k), theta);
        } else {
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double d = std::remainder(theta - t[i], two_pi);
                total += w[i] * v[i] * std::log(std::abs(2.0 * std::sin(0.5 * d)));
            }
        }
    }
    return -total;
}

// ---------------------------------------------------------------------------
// The p(θ) functional: f² must equal p on the support, and the support is the
// closure of {p > 0}
// ---------------------------------------------------------------------------

struct PFunction {
    std::vector<double> theta;   // uniform grid
    std::vector<double> values;  // p(θ_i)
    bool positive_everywhere = false;
    std::vector<Arc> candidate;  // closure of {p > 0} as angle runs (empty if full circle)
};

/// p(θ) = (1/π²) ∫ (Q'(θ) - Q'(t)) f(t) cot((θ-t)/2) dt - (Q'(θ)/π)² + 1/(4π²),
/// the integrand's diagonal filled with the 2Q''(θ) limit.  Requires Q''.
inline PFunction compute_p(const ExternalField& field, const DensityProfile& profile,
                           std::size_t N = 2048) {
    if (!has_Qsecond(field))
        throw std::domain_error("compute_p: needs a twice-differentiable field");
    PFunction out;
    out.theta.resize(N);
    out.values.resize(N);
    // collect quadrature samples once
    std::vector<double> ts, ws, fs;
    if (profile.full_circle()) {
        const auto& f = profile.circle_values();
        const std::size_t n = f.size();
        for (std::size_t i = 0; i < n; ++i) {
            ts.push_back(two_pi * double(i) / double(n));
            ws.push_back(two_pi / double(n));
            fs.push_back(f[i]);
        }
    } else {
        for (std::size_t k = 0; k < profile.support().size(); ++k) {
            const auto& t = profile.arc_angles(k);
            const auto& w = profile.arc_weights(k);
            const auto& v = profile.arc_values(k);
            ts.insert(ts.end(), t.begin(), t.end());
            ws.insert(ws.end(), w.begin(), w.end());
            fs.insert(fs.end(), v.begin(), v.end());
        }
    }
    std::vector<double> qp(ts.size());
    for (std::size_t j = 0; j < ts.size(); ++j) qp[j] = eval_Qprime(field, ts[j]);
    for (std::size_t i = 0; i < N; ++i) {
        const double th = two_pi * double(i) / double(N);
        const double qpth = eval_Qprime(field, th);
        double integral = 0.0;
        for (std::size_t j = 0; j < ts.size(); ++j) {
            const double d = std::remainder(th - ts[j], two_pi);
            double kernel;
            if (std::abs(std::sin(0.5 * d)) < 1e-7)
                kernel = 2.0 * eval_Qsecond(field, 0.5 * (th + ts[j]));
            else
                kernel = (qpth - qp[j]) / std::tan(0.5 * d);
            integral += ws[j] * kernel * fs[j];
        }
        out.theta[i] = th;
        out.values[i] = integral / (pi * pi) - qpth * qpth / (pi * pi) + 1.0 / (4.0 * pi * pi);
    }
    out.candidate = detail::grid_runs(N, [&](std::size_t i) { return out.values[i] > 1e-12; });
    out.positive_everywhere = out.candidate.size() == 1 &&
                              out.candidate[0].beta - out.candidate[0].alpha >= two_pi - two_pi / double(N) - 1e-12;
    if (out.positive_everywhere) out.candidate.clear();
    return out;
}

}  // namespace circeq
