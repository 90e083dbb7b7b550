#pragma once

// External fields Q(θ) = -log w(e^{iθ}) on the unit circle.
//
// Three concrete classes:
//  * PolynomialWeight      w(z) = ∏ |z - z_j|^{λ_j},  λ_j > 0, z_j ≠ 0
//  * TrigExponentialWeight w(e^{iθ}) = exp(-Σ_{|m|<=M} c_m e^{imθ}),  c_{-m} = conj(c_m)
//  * SampledField          caller-supplied evaluators for Q, Q', optionally Q''
//
// All classes expose Q, Q' and (where available) Q'' together with the
// circle function g(e^{it}) = (i/π) Q'(t) + 1/(2π) that drives the density
// formulas.  The first two classes also carry closed-form analytic
// continuations of g off the circle.

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "arcs.hpp"
#include "spectral.hpp"

namespace circeq {

struct PolynomialTerm {
    cdouble zero;    // z_j, nonzero
    double lambda;   // λ_j > 0
};

/// w(z) = ∏ |z - z_j|^{λ_j}.  Field Q(θ) = -Σ λ_j log|e^{iθ} - z_j|.
class PolynomialWeight {
public:
    explicit PolynomialWeight(std::vector<PolynomialTerm> terms) : terms_(std::move(terms)) {
        if (terms_.empty())
            throw std::invalid_argument("PolynomialWeight: at least one (zero, lambda) term required");
        for (const auto& t : terms_) {
            if (!(t.lambda > 0.0))
                throw std::invalid_argument("PolynomialWeight: every exponent lambda must be positive");
            if (std::abs(t.zero) < 1e-300)
                throw std::invalid_argument("PolynomialWeight: zeros must be nonzero");
        }
        lambda_sum_ = 0.0;
        for (const auto& t : terms_) lambda_sum_ += t.lambda;
    }

    const std::vector<PolynomialTerm>& terms() const { return terms_; }
    std::size_t count() const { return terms_.size(); }
    double lambda_sum() const { return lambda_sum_; }

    /// True if some zero sits on the unit circle (within tol); such weights are
    /// evaluable away from the zero but rejected by the solver entry points.
    bool has_zero_on_circle(double tol = 1e-12) const {
        for (const auto& t : terms_)
            if (std::abs(std::abs(t.zero) - 1.0) <= tol) return true;
        return false;
    }

    double Q(double theta) const {
        const cdouble u = std::polar(1.0, theta);
        double s = 0.0;
        for (const auto& t : terms_) {
            const double d = std::abs(u - t.zero);
            if (d < 1e-14)
                throw std::domain_error("field is infinite at this angle (weight has a zero here)");
            s -= t.lambda * std::log(d);
        }
        return s;
    }

    double Qprime(double theta) const {
        double s = 0.0;
        for (const auto& t : terms_) {
            const double r = std::abs(t.zero), phi = std::arg(t.zero);
            const double u = theta - phi;
            const double den = 1.0 + r * r - 2.0 * r * std::cos(u);
            if (den < 1e-28)
                throw std::domain_error("field derivative is singular at this angle (weight has a zero here)");
            s -= t.lambda * r * std::sin(u) / den;
        }
        return s;
    }

    double Qsecond(double theta) const {
        double s = 0.0;
        for (const auto& t : terms_) {
            const double r = std::abs(t.zero), phi = std::arg(t.zero);
            const double u = theta - phi;
            const double den = 1.0 + r * r - 2.0 * r * std::cos(u);
            if (den < 1e-28)
                throw std::domain_error("field derivative is singular at this angle (weight has a zero here)");
            s -= t.lambda * r * ((1.0 + r * r) * std::cos(u) - 2.0 * r) / (den * den);
        }
        return s;
    }

    /// Partial-fraction continuation of g off the circle:
    /// g(ζ) = (1+Σλ)/(2π) + (1/2π) Σ λ_j [ z_j/(ζ-z_j) + (1/conj(z_j))/(ζ-1/conj(z_j)) ].
    /// Poles at every zero and its circle reflection.
    cdouble g(cdouble zeta) const {
        cdouble s = (1.0 + lambda_sum_) / two_pi;
        for (const auto& t : terms_) {
            const cdouble zr = 1.0 / std::conj(t.zero);  // reflection across the circle
            const cdouble d1 = zeta - t.zero, d2 = zeta - zr;
            if (std::abs(d1) < 1e-14 || std::abs(d2) < 1e-14)
                throw std::domain_error("g evaluated at a pole (weight zero or its reflection)");
            s += t.lambda / two_pi * (t.zero / d1 + zr / d2);
        }
        return s;
    }

private:
    std::vector<PolynomialTerm> terms_;
    double lambda_sum_ = 0.0;
};

/// w(e^{iθ}) = e^{-t(θ)} with t(θ) = Σ_{m=-M}^{M} c_m e^{imθ} real-valued.
/// Constructed from coefficients for m >= 0; negative modes follow by conjugate
/// symmetry.  Q(θ) = t(θ).
class TrigExponentialWeight {
public:
    /// coeffs[m] = c_m for m = 0..M.  c_0 must be real (tiny imaginary parts are rejected).
    explicit TrigExponentialWeight(std::vector<cdouble> nonneg_coeffs)
        : coeffs_(std::move(nonneg_coeffs)) {
        if (coeffs_.empty()) coeffs_.push_back(0.0);
        if (std::abs(coeffs_[0].imag()) > 1e-14)
            throw std::invalid_argument("TrigExponentialWeight: c_0 must be real for a real field");
        coeffs_[0] = coeffs_[0].real();
        while (coeffs_.size() > 1 && std::abs(coeffs_.back()) == 0.0) coeffs_.pop_back();
    }

    /// Degree M: highest mode with a nonzero coefficient (0 for a constant field).
    int degree() const { return int(coeffs_.size()) - 1; }

    /// c_m for any m, using c_{-m} = conj(c_m); zero outside |m| <= M.
    cdouble coeff(int m) const {
        const int a = m < 0 ? -m : m;
        if (a >= int(coeffs_.size())) return 0.0;
        return m < 0 ? std::conj(coeffs_[a]) : coeffs_[a];
    }

    double Q(double theta) const {
        double s = coeffs_[0].real();
        for (int m = 1; m < int(coeffs_.size()); ++m)
            s += 2.0 * (coeffs_[m] * std::polar(1.0, m * theta)).real();
        return s;
    }

    double Qprime(double theta) const {
        double s = 0.0;
        for (int m = 1; m < int(coeffs_.size()); ++m)
            s -= 2.0 * m * (coeffs_[m] * std::polar(1.0, m * theta)).imag();
        return s;
    }

    double Qsecond(double theta) const {
        double s = 0.0;
        for (int m = 1; m < int(coeffs_.size()); ++m)
            s -= 2.0 * m * m * (coeffs_[m] * std::polar(1.0, m * theta)).real();
        return s;
    }

    /// Laurent continuation g(z) = 1/(2π) - (1/π) Σ_{m≠0} m c_m z^m
    /// (analytic in C \ {0}; pole of order M at the origin).
    cdouble g(cdouble z) const {
        cdouble s = 1.0 / two_pi;
        for (int m = 1; m < int(coeffs_.size()); ++m) {
            const cdouble zp = std::pow(z, m);
            if (std::abs(zp) < 1e-300)
                throw std::domain_error("g evaluated at its pole at the origin");
            s -= double(m) / pi * (coeff(m) * zp - coeff(-m) / zp);
        }
        return s;
    }

private:
    std::vector<cdouble> coeffs_;  // index m = 0..M
};

/// Caller-supplied field.  Q and Q' are required; Q'' is optional and gates
/// the features that need curvature (support heuristics, the p(θ) functional).
struct SampledField {
    std::function<double(double)> Q;
    std::function<double(double)> Qprime;
    std::function<double(double)> Qsecond;  // may be empty
    bool twice_differentiable = false;      // true when Qsecond is trustworthy

    SampledField() = default;
    SampledField(std::function<double(double)> q, std::function<double(double)> qp,
                 std::function<double(double)> qpp = {}, bool c2 = false)
        : Q(std::move(q)), Qprime(std::move(qp)), Qsecond(std::move(qpp)), twice_differentiable(c2) {
        if (!Q || !Qprime)
            throw std::invalid_argument("SampledField: Q and Q' evaluators are both required");
        if (twice_differentiable && !Qsecond)
            throw std::invalid_argument("SampledField: twice-differentiable flag set without a Q'' evaluator");
    }
};

using ExternalField = std::variant<PolynomialWeight, TrigExponentialWeight, SampledField>;

inline double eval_Q(const ExternalField& f, double theta) {
    return std::visit([&](const auto& v) -> double { return v.Q(theta); }, f);
}

inline double eval_Qprime(const ExternalField& f, double theta) {
    return std::visit([&](const auto& v) -> double { return v.Qprime(theta); }, f);
}

inline bool has_Qsecond(const ExternalField& f) {
    if (const auto* s = std::get_if<SampledField>(&f)) return static_cast<bool>(s->Qsecond);
    return true;
}

inline double eval_Qsecond(const ExternalField& f, double theta) {
    return std::visit([&](const auto& v) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, SampledField>) {
            if (!v.Qsecond)
                throw std::domain_error("second derivative unavailable for this sampled field");
            return v.Qsecond(theta);
        } else {
            return v.Qsecond(theta);
        }
    }, f);
}

/// g on the circle.  For the closed-form classes this evaluates the
/// class-specific continuation at e^{iθ}; for sampled fields it falls back to
/// the defining combination (i/π) Q'(θ) + 1/(2π).  The two agree on the circle.
inline cdouble eval_g(const ExternalField& f, double theta) {
    if (const auto* p = std::get_if<PolynomialWeight>(&f)) return p->g(std::polar(1.0, theta));
    if (const auto* t = std::get_if<TrigExponentialWeight>(&f)) return t->g(std::polar(1.0, theta));
    return cdouble(0.0, 1.0 / pi) * eval_Qprime(f, theta) + 1.0 / two_pi;
}

/// Whether the field is smooth enough for curvature-based features.
inline bool is_twice_differentiable(const ExternalField& f) {
    if (const auto* s = std::get_if<SampledField>(&f)) return s->twice_differentiable && bool(s->Qsecond);
    return true;
}

/// The field rotated by theta0: Q_rot(θ) = Q(θ - theta0).  Rotating a
/// polynomial weight multiplies each zero by e^{i theta0}; rotating a trig
/// field multiplies c_m by e^{-im theta0}.
inline PolynomialWeight rotated(const PolynomialWeight& w, double theta0) {
    auto terms = w.terms();
    const cdouble r = std::polar(1.0, theta0);
    for (auto& t : terms) t.zero *= r;
    return PolynomialWeight(std::move(terms));
}

inline TrigExponentialWeight rotated(const TrigExponentialWeight& w, double theta0) {
    std::vector<cdouble> c(std::size_t(w.degree()) + 1);
    for (int m = 0; m <= w.degree(); ++m) c[std::size_t(m)] = w.coeff(m) * std::polar(1.0, -m * theta0);
    return TrigExponentialWeight(std::move(c));
}

inline ExternalField rotated(const ExternalField& f, double theta0) {
    if (const auto* p = std::get_if<PolynomialWeight>(&f)) return rotated(*p, theta0);
    if (const auto* t = std::get_if<TrigExponentialWeight>(&f)) return rotated(*t, theta0);
    const auto& s = std::get<SampledField>(f);
    SampledField out;
    out.Q = [q = s.Q, theta0](double th) { return q(th - theta0); };
    out.Qprime = [qp = s.Qprime, theta0](double th) { return qp(th - theta0); };
    if (s.Qsecond) out.Qsecond = [qs = s.Qsecond, theta0](double th) { return qs(th - theta0); };
    out.twice_differentiable = s.twice_differentiable;
    return out;
}

}  // namespace circeq
