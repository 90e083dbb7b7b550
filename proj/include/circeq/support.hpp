#pragma once

// Support determination: decide whether the equilibrium measure covers the
// whole circle, and when it does not, locate the arc endpoints.
//
// The endpoints of S_w = ∪[α_k, β_k] satisfy a square-root-degree count of
// side conditions on the analytic continuation F of the density:
//   * moment conditions  — ∫ ζ^k g(ζ)/sqrtR(ζ) dζ = 0 over the arcs
//     (closed forms for the polynomial and trig classes, quadrature otherwise);
//   * gap conditions     — ∫ F(e^{it}) dt over each complementary gap matches
//     the explicit boundary term (zero for the class closed forms);
//   * mass condition     — ∫ f = 1.
// The stacked (overdetermined, consistent) system is solved by damped
// Gauss-Newton with finite-difference Jacobians.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arcs.hpp"
#include "density.hpp"
#include "field.hpp"
#include "quadrature.hpp"
#include "sqrt_branch.hpp"

namespace circeq {

// ---------------------------------------------------------------------------
// Full-circle detection
// ---------------------------------------------------------------------------

struct FullCircleCheck {
    bool is_full_circle = false;
    std::optional<DensityProfile> density;  // set only when the circle is covered
    std::vector<Arc> violations;            // angle runs where the formula dips negative
    double min_value = 0.0;
};

/// Evaluate the full-circle density formula and accept it iff it stays
/// nonnegative (to -1e-10).  Otherwise the negative runs seed the arc search.
inline FullCircleCheck detect_full_circle(const ExternalField& field, std::size_t N = 2048) {
    std::vector<double> f = full_circle_values(field, N);
    FullCircleCheck out;
    out.min_value = 1e300;
    for (double v : f) out.min_value = std::min(out.min_value, v);
    if (out.min_value >= -1e-10) {
        out.is_full_circle = true;
        for (double& v : f) v = std::max(v, 0.0);
        out.density = DensityProfile::uniform_circle(std::move(f));
        return out;
    }
    out.violations = detail::grid_runs(N, [&](std::size_t i) { return f[i] < -1e-10; });
    return out;
}

// ---------------------------------------------------------------------------
// Shared quadrature helpers
// ---------------------------------------------------------------------------

namespace detail {

/// ∫ F(t) dt over an angle interval, cosine-stretched nodes, doubled until stable.
/// Spectrally accurate when F has at worst square-root behaviour at the ends.
inline cdouble arc_integral_doubling(const std::function<cdouble(double)>& F, const Arc& arc,
                                     double tol = 1e-12, std::size_t n0 = 64,
                                     std::size_t nmax = 8192) {
    auto pass = [&](std::size_t n) {
        const ArcRule rule = arc_rule(arc, n);
        cdouble s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += rule.weights[i] * F(rule.angles[i]);
        return s;
    };
    cdouble prev = pass(n0);
    for (std::size_t n = 2 * n0; n <= nmax; n *= 2) {
        const cdouble cur = pass(n);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

/// All moments ∫ ζ^k g(ζ)/sqrtR(ζ) dζ, k = 0..K-1, by direct quadrature over
/// the support arcs (inside-limit branch).  One node pass serves every k.
inline std::vector<cdouble> quadrature_moments(const ExternalField& field,
                                               const SqrtRBranch& branch, std::size_t n_per_arc) {
    const std::size_t K = branch.K();
    std::vector<cdouble> m(K, 0.0);
    for (std::size_t a = 0; a < K; ++a) {
        const ArcRule rule = arc_rule(branch.support().arc(a), n_per_arc);
        for (std::size_t i = 0; i < rule.angles.size(); ++i) {
            const double t = rule.angles[i];
            const cdouble zeta = std::polar(1.0, t);
            // dζ = i ζ dt
            cdouble h = rule.weights[i] * eval_g(field, t) / branch.boundary(t) * cdouble(0.0, 1.0) * zeta;
            for (std::size_t k = 0; k < K; ++k) {
                m[k] += h;
                h *= zeta;
            }
        }
    }
    return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Residual systems
// ---------------------------------------------------------------------------

/// K complex moment residuals for a candidate support; all must vanish at the
/// true endpoints.
///  * polynomial: Σ_j λ_j (z_j^k/sqrtR(z_j) + conj(z_j)^{-k}/sqrtR(1/conj(z_j)))
///    minus (1+Σλ) at k = K, for k = 1..K;
///  * trig: residue bookkeeping of ζ^k g(ζ)/sqrtR(ζ) at 0 and ∞, k = 0..K-1;
///  * otherwise: direct quadrature of ∫ ζ^k g/sqrtR dζ, k = 0..K-1 (doubled
///    until stable).
inline std::vector<cdouble> moment_residuals(const ExternalField& field, const ArcSet& support) {
    if (support.full_circle())
        throw std::invalid_argument("moment_residuals: support must be a proper union of arcs");
    const SqrtRBranch branch(support);
    const std::size_t K = branch.K();

    if (const auto* w = std::get_if<PolynomialWeight>(&field)) {
        std::vector<cdouble> res(K, 0.0);
        for (std::size_t k = 1; k <= K; ++k) {
            cdouble s = 0.0;
            for (const auto& term : w->terms()) {
                const cdouble zr = 1.0 / std::conj(term.zero);
                s += term.lambda * (std::pow(term.zero, double(k)) / branch.offcut(term.zero) +
                                    std::pow(zr, double(k)) / branch.offcut(zr));
            }
            if (k == K) s -= 1.0 + w->lambda_sum();
            res[k - 1] = s;
        }
        return res;
    }

    if (const auto* w = std::get_if<TrigExponentialWeight>(&field)) {
        const int M = w->degree();
        if (M < int(K))
            throw std::invalid_argument("moment_residuals: more arcs than the trig field degree allows");
        auto ghat = [&](int m) -> cdouble {
            return m == 0 ? cdouble(1.0 / two_pi, 0.0) : -double(m) / pi * w->coeff(m);
        };
        const std::vector<cdouble> E = branch.recip_series_at_zero(std::size_t(M));
        const std::vector<cdouble> tau = branch.recip_series_at_infinity(std::size_t(M) + 1);
        std::vector<cdouble> res(K, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            // residue at 0 of ζ^k g(ζ)/sqrtR(ζ)
            cdouble res0 = 0.0;
            for (int n = 0; n <= M - 1 - int(k); ++n) res0 += ghat(-1 - int(k) - n) * E[std::size_t(n)];
            // 1/ζ coefficient at ∞
            cdouble am1 = 0.0;
            for (int m = std::max(int(K) - int(k) - 1, -M); m <= M; ++m)
                am1 += ghat(m) * tau[std::size_t(int(k) + m - int(K) + 1)];
            res[k] = cdouble(0.0, pi) * (res0 - am1);
        }
        return res;
    }

    // general field: quadrature, doubled until stable
    std::size_t n = 256;
    std::vector<cdouble> prev = detail::quadrature_moments(field, branch, n);
    for (n *= 2; n <= 8192; n *= 2) {
        std::vector<cdouble> cur = detail::quadrature_moments(field, branch, n);
        double diff = 0.0;
        for (std::size_t k = 0; k < K; ++k) diff = std::max(diff, std::abs(cur[k] - prev[k]));
        prev = std::move(cur);
        if (diff <= 1e-11) break;
    }
    return prev;
}

/// K complex gap residuals: ∫ F(e^{it}) dt over each complementary gap, minus
/// the explicit boundary value it must equal.  For the two closed-form classes
/// the boundary value is absorbed exactly (∫ g dt over the gap telescopes), so
/// the residual is plainly ∫ F_1 dt or ∫ F_2 dt.
inline std::vector<cdouble> gap_residuals(const ExternalField& field, const ArcSet& support) {
    if (support.full_circle())
        throw std::invalid_argument("gap_residuals: support must be a proper union of arcs");
    const SqrtRBranch branch(support);
    const std::vector<Arc> gaps = support.gaps();
    std::vector<cdouble> res;
    res.reserve(gaps.size());

    if (const auto* w = std::get_if<PolynomialWeight>(&field)) {
        const auto poles = detail::f1_poles(*w, branch);
        for (const Arc& gap : gaps)
            res.push_back(detail::arc_integral_doubling(
                [&](double t) {
                    return branch.offcut(std::polar(1.0, t)) / two_pi *
                           detail::f1_bracket(poles, std::polar(1.0, t));
                },
                gap));
        return res;
    }

    if (const auto* w = std::get_if<TrigExponentialWeight>(&field)) {
        const int M = w->degree();
        if (M < int(branch.K()))
            throw std::invalid_argument("gap_residuals: more arcs than the trig field degree allows");
        const CoefficientTables tab = build_coefficient_tables(branch, std::size_t(M));
        for (const Arc& gap : gaps)
            res.push_back(detail::arc_integral_doubling(
                [&](double t) { return trig_F2_offcut(*w, branch, tab, std::polar(1.0, t)); }, gap));
        return res;
    }

    // general field: ∫ F dt - [Δ/(2π) + i(Q(α_next) - Q(β)) / π]
    QuadratureOptions opts;
    opts.tolerance = 1e-9;
    for (const Arc& gap : gaps) {
        const cdouble integral = detail::arc_integral_doubling(
            [&](double t) { return general_F_offcut(field, branch, std::polar(1.0, t), opts); }, gap,
            1e-9, 48, 768);
        const double delta = gap.length();
        const cdouble rhs(delta / two_pi,
                          (eval_Q(field, gap.beta) - eval_Q(field, gap.alpha)) / pi);
        res.push_back(integral - rhs);
    }
    return res;
}

/// ∫ f - 1 for the class density on the candidate support.
inline double mass_residual(const ExternalField& field, const ArcSet& support) {
    if (support.full_circle()) {
        const auto f = full_circle_values(field, 1024);
        double s = 0.0;
        for (double v : f) s += v;
        return s * two_pi / 1024.0 - 1.0;
    }
    const SqrtRBranch branch(support);
    std::function<cdouble(double)> F;
    std::size_t n = 256;
    if (const auto* w = std::get_if<PolynomialWeight>(&field)) {
        auto poles = detail::f1_poles(*w, branch);
        F = [&branch, poles = std::move(poles)](double t) {
            return branch.boundary(t) / two_pi * detail::f1_bracket(poles, std::polar(1.0, t));
        };
    } else if (const auto* w = std::get_if<TrigExponentialWeight>(&field)) {
        const int M = w->degree();
        if (M < int(branch.K()))
            throw std::invalid_argument("mass_residual: more arcs than the trig field degree allows");
        F = [&, tab = build_coefficient_tables(branch, std::size_t(M))](double t) {
            return trig_F2_boundary(*std::get_if<TrigExponentialWeight>(&field), branch, tab, t);
        };
    } else {
        QuadratureOptions opts;
        opts.tolerance = 1e-10;
        F = [&, opts](double t) { return general_F_boundary(field, branch, t, opts); };
        n = 96;
    }
    double mass = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) {
        const ArcRule rule = arc_rule(support.arc(k), n);
        for (std::size_t i = 0; i < n; ++i) mass += rule.weights[i] * F(rule.angles[i]).real();
    }
    return mass - 1.0;
}

/// All side conditions as one real vector:
/// [Re m_1, Im m_1, …, Re gap_1, Im gap_1, …, mass-1]  (length 4K+1).
inline std::vector<double> stacked_residuals(const ExternalField& field, const ArcSet& support) {
    std::vector<double> r;
    for (const cdouble m : moment_residuals(field, support)) {
        r.push_back(m.real());
        r.push_back(m.imag());
    }
    for (const cdouble gpp : gap_residuals(field, support)) {
        r.push_back(gpp.real());
        r.push_back(gpp.imag());
    }
    r.push_back(mass_residual(field, support));
    return r;
}

// ---------------------------------------------------------------------------
// Arc-count heuristic
// ---------------------------------------------------------------------------

/// Upper-bound hint for the number of support arcs: the count of angle windows
/// where the field is concave (Q'' < 0).  A convex field gives 1 (single arc).
inline std::size_t convexity_heuristic(const ExternalField& field, std::size_t N = 4096) {
    auto qsec = [&](double t) {
        if (has_Qsecond(field)) return eval_Qsecond(field, t);
        const double h = 1e-4;
        return (eval_Qprime(field, t + h) - eval_Qprime(field, t - h)) / (2.0 * h);
    };
    std::vector<char> neg(N);
    for (std::size_t i = 0; i < N; ++i)
        neg[i] = qsec(two_pi * double(i) / double(N)) < -1e-12 ? 1 : 0;
    const auto runs = detail::grid_runs(N, [&](std::size_t i) { return neg[i] != 0; });
    return std::max<std::size_t>(runs.size(), 1);
}

// ---------------------------------------------------------------------------
// Gauss-Newton endpoint solver
// ---------------------------------------------------------------------------

struct SupportSolveReport {
    std::vector<double> endpoints;  // stacked [α_1, β_1, α_2, β_2, …], ascending
    std::optional<ArcSet> support;  // built from the endpoints when feasible
    std::size_t iterations = 0;
    double residual_sup = 0.0;      // sup norm of the stacked residuals at exit
    bool converged = false;
    bool arc_collapsed = false;     // an arc or gap shrank away: retry with one arc fewer
    bool gap_closed = false;        // the collapse was a gap (merge neighbours) not an arc
    std::size_t collapsed_index = 0;
    std::string message;
};

struct EndpointSolveOptions {
    std::size_t max_iterations = 100;
    double stop_tolerance = 1e-12;    // sup-norm target
    double accept_tolerance = 1e-8;   // declare success below this even if stalled
    double fd_step = 1e-6;            // central-difference step for the Jacobian
    double collapse_width = 1e-6;     // arc or gap width that triggers the collapse signal
};

namespace detail {

/// Solve the (symmetric positive definite after damping) n×n system in place.
inline std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r3 = c + 1; r3 < n; ++r3)
            if (std::abs(A[r3 * n + c]) > std::abs(A[piv * n + c])) piv = r3;
        if (std::abs(A[piv * n + c]) < 1e-300)
            throw std::runtime_error("solve_dense: singular normal equations");
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A[c * n + j], A[piv * n + j]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r3 = c + 1; r3 < n; ++r3) {
            const double m = A[r3 * n + c] / A[c * n + c];
            for (std::size_t j = c; j < n; ++j) A[r3 * n + j] -= m * A[c * n + j];
            b[r3] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t rr = n; rr-- > 0;) {
        double s = b[rr];
        for (std::size_t j = rr + 1; j < n; ++j) s -= A[rr * n + j] * x[j];
        x[rr] = s / A[rr * n + rr];
    }
    return x;
}

}  // namespace detail

/// Damped Gauss-Newton on the stacked residual system.  Endpoints stay
/// strictly ordered throughout (steps are halved until the ordering holds);
/// an arc or a gap narrowing below `collapse_width` aborts with the collapse
/// signal so the caller can retry with one arc fewer.
inline SupportSolveReport solve_endpoints(const ExternalField& field,
                                          const std::vector<double>& initial_endpoints,
                                          const EndpointSolveOptions& opt = {}) {
    const std::size_t n = initial_endpoints.size();
    if (n < 2 || n % 2 != 0)
        throw std::invalid_argument("solve_endpoints: need an even, positive number of endpoints");
    const std::size_t K = n / 2;

    auto feasible = [&](const std::vector<double>& e) {
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (e[i + 1] - e[i] < 1e-9) return false;
        return e[n - 1] - e[0] < two_pi - 1e-9;
    };
    auto make_arcs = [&](const std::vector<double>& e) {
        std::vector<std::pair<double, double>> ps;
        for (std::size_t k = 0; k < K; ++k) ps.emplace_back(e[2 * k], e[2 * k + 1]);
        return ArcSet(ps);
    };
    auto evaluate = [&](const std::vector<double>& e) {
        return stacked_residuals(field, make_arcs(e));
    };
    auto sup = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s = std::max(s, std::abs(x));
        return s;
    };
    auto sumsq = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    };

    SupportSolveReport rep;
    std::vector<double> e = initial_endpoints;
    if (!feasible(e))
        throw std::invalid_argument("solve_endpoints: initial endpoints must be strictly ordered within one turn");

    std::vector<double> r = evaluate(e);
    const std::size_t m = r.size();
    double damping = 1e-3;

    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        rep.iterations = it;
        if (sup(r) < opt.stop_tolerance) break;

        // Jacobian by central differences
        std::vector<double> J(m * n);
        bool jac_ok = true;
        for (std::size_t c = 0; c < n && jac_ok; ++c) {
            std::vector<double> ep = e, em = e;
            ep[c] += opt.fd_step;
            em[c] -= opt.fd_step;
            if (!feasible(ep) || !feasible(em)) { jac_ok = false; break; }
            try {
                const std::vector<double> rp = evaluate(ep);
                const std::vector<double> rm = evaluate(em);
                for (std::size_t rr = 0; rr < m; ++rr)
                    J[rr * n + c] = (rp[rr] - rm[rr]) / (2.0 * opt.fd_step);
            } catch (const std::exception&) {
                jac_ok = false;
            }
        }
        if (!jac_ok) {
            rep.message = "could not form a finite-difference Jacobian near the current endpoints";
            break;
        }

        std::vector<double> JtJ(n * n, 0.0), Jtr(n, 0.0);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b2 = 0; b2 < n; ++b2) {
                double s = 0.0;
                for (std::size_t rr = 0; rr < m; ++rr) s += J[rr * n + a] * J[rr * n + b2];
                JtJ[a * n + b2] = s;
            }
            double s = 0.0;
            for (std::size_t rr = 0; rr < m; ++rr) s += J[rr * n + a] * r[rr];
            Jtr[a] = s;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 16 && !accepted; ++attempt) {
            std::vector<double> A = JtJ;
            for (std::size_t d2 = 0; d2 < n; ++d2)
                A[d2 * n + d2] += damping * (JtJ[d2 * n + d2] + 1e-14);
            std::vector<double> step;
            try {
                std::vector<double> rhs(n);
                for (std::size_t d2 = 0; d2 < n; ++d2) rhs[d2] = -Jtr[d2];
                step = detail::solve_dense(std::move(A), std::move(rhs));
            } catch (const std::exception&) {
                damping *= 10.0;
                continue;
            }
            std::vector<double> e2(n);
            bool ok = false;
            for (int shrink = 0; shrink < 30; ++shrink) {
                for (std::size_t d2 = 0; d2 < n; ++d2) e2[d2] = e[d2] + step[d2];
                if (feasible(e2)) { ok = true; break; }
                for (double& s : step) s *= 0.5;
            }
            if (!ok) {
                damping *= 10.0;
                continue;
            }
            try {
                std::vector<double> r2 = evaluate(e2);
                if (sumsq(r2) < sumsq(r)) {
                    e = std::move(e2);
                    r = std::move(r2);
                    damping = std::max(damping / 3.0, 1e-12);
                    accepted = true;
                } else {
                    damping *= 10.0;
                }
            } catch (const std::exception&) {
                damping *= 10.0;
            }
        }
        if (!accepted) {
            rep.message = "no descending step found; endpoints stalled";
            break;
        }

        // collapse detection: any arc or gap closing up means K is too large
        for (std::size_t k = 0; k < K; ++k) {
            if (e[2 * k + 1] - e[2 * k] < opt.collapse_width) {
                rep.arc_collapsed = true;
                rep.collapsed_index = k;
                rep.message = "support arc collapsed; retry with one arc fewer";
            }
        }
        for (std::size_t k = 0; k + 1 < K; ++k) {
            if (e[2 * k + 2] - e[2 * k + 1] < opt.collapse_width) {
                rep.arc_collapsed = true;
                rep.gap_closed = true;
                rep.collapsed_index = k;
                rep.message = "gap between arcs closed; adjacent arcs merge";
            }
        }
        if (K >= 2 && (e[0] + two_pi) - e[n - 1] < opt.collapse_width) {
            rep.arc_collapsed = true;
            rep.gap_closed = true;
            rep.collapsed_index = K - 1;
            rep.message = "gap between arcs closed; adjacent arcs merge";
        }
        if (rep.arc_collapsed) break;
    }

    rep.endpoints = e;
    rep.residual_sup = sup(r);
    if (!rep.arc_collapsed) {
        rep.converged = rep.residual_sup <= opt.accept_tolerance;
        if (!rep.converged && rep.message.empty())
            rep.message = "residuals did not reach the acceptance tolerance";
    }
    if (feasible(e)) rep.support = make_arcs(e);
    return rep;
}

}  // namespace circeq
