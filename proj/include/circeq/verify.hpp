#pragma once

// Solution assembly and a-posteriori verification.
//
// assemble_solution turns a density profile into the full equilibrium data
// (Robin constant, minimal energy, capacity) and refuses profiles whose
// potential is visibly non-constant on the support.  full_report re-derives
// the density from scratch at staggered angles and checks every identity the
// equilibrium measure must satisfy.  solve_equilibrium is the end-to-end
// driver: full-circle test, oracle-seeded endpoint search with collapse
// retries, class density build, assembly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arcs.hpp"
#include "density.hpp"
#include "field.hpp"
#include "oracle.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
#include "sqrt_branch.hpp"
#include "support.hpp"

namespace circeq {

// ---------------------------------------------------------------------------
// Assembled solution
// ---------------------------------------------------------------------------

struct EquilibriumSolution {
    ArcSet support;
    DensityProfile density;
    double robin = 0.0;           // F_w: the constant value of U + Q on the support
    double energy = 0.0;          // V_w = F_w + ∫ Q dμ
    double capacity = 0.0;        // e^{-V_w}
    double field_integral = 0.0;  // ∫ Q dμ
};

namespace detail {

/// U^μ at every node of the uniform M-grid for a full-circle profile
/// (Fourier coefficients computed once).
inline std::vector<double> full_circle_potential_grid(const DensityProfile& profile,
                                                      std::size_t M) {
    const auto& f = profile.circle_values();
    const std::size_t n = f.size();
    const std::vector<cdouble> fc = fft_real(f);
    std::vector<double> u(M, 0.0);
    for (std::size_t j = 0; j < M; ++j) {
        const double th = two_pi * double(j) / double(M);
        double s = 0.0;
        for (std::size_t k = 1; k < n / 2; ++k)
            s += two_pi / (double(k) * double(n)) * (fc[k] * std::polar(1.0, double(k) * th)).real();
        u[j] = s;
    }
    return u;
}

}  // namespace detail

/// Read off F_w, V_w and the capacity from a density profile.  The potential
/// U + Q is sampled across the support interior; its median is F_w, and a
/// spread beyond 1e-3 rejects the profile as not in equilibrium.
inline EquilibriumSolution assemble_solution(const ExternalField& field,
                                             const DensityProfile& profile) {
    std::vector<double> phi;  // U + Q at interior support samples
    if (profile.full_circle()) {
        const std::size_t n = profile.circle_values().size();
        const std::vector<double> u = detail::full_circle_potential_grid(profile, n);
        phi.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            phi[i] = u[i] + eval_Q(field, two_pi * double(i) / double(n));
    } else {
        for (std::size_t k = 0; k < profile.support().size(); ++k) {
            const auto& t = profile.arc_angles(k);
            const std::size_t n = t.size();
            for (std::size_t i = 0; i < n; ++i) {
                // keep clear of the endpoints, where the node rule is weakest
                const double s = (2.0 * double(i) + 1.0) * pi / (2.0 * double(n));
                if (std::abs(std::cos(s)) > 0.9) continue;
                phi.push_back(log_kernel_potential(profile, t[i]) + eval_Q(field, t[i]));
            }
        }
    }
    if (phi.empty()) throw std::invalid_argument("assemble_solution: profile has no interior samples");
    std::vector<double> sorted = phi;
    std::sort(sorted.begin(), sorted.end());
    const double robin = sorted[sorted.size() / 2];
    if (sorted.back() - sorted.front() > 1e-3)
        throw std::domain_error(
            "assemble_solution: potential is not constant across the support; profile rejected");

    double field_integral = 0.0;
    if (profile.full_circle()) {
        const auto& f = profile.circle_values();
        const std::size_t n = f.size();
        for (std::size_t i = 0; i < n; ++i)
            field_integral += f[i] * eval_Q(field, two_pi * double(i) / double(n));
        field_integral *= two_pi / double(n);
    } else {
        for (std::size_t k = 0; k < profile.support().size(); ++k) {
            const auto& t = profile.arc_angles(k);
            const auto& w = profile.arc_weights(k);
            const auto& v = profile.arc_values(k);
            for (std::size_t i = 0; i < t.size(); ++i)
                field_integral += w[i] * v[i] * eval_Q(field, t[i]);
        }
    }

    EquilibriumSolution sol{profile.support(), profile, robin,
                            robin + field_integral, 0.0, field_integral};
    sol.capacity = std::exp(-sol.energy);
    return sol;
}

// ---------------------------------------------------------------------------
// Frostman conditions on a fine grid
// ---------------------------------------------------------------------------

struct FrostmanCheck {
    double equality_sup = 0.0;          // sup over interior support points of |U + Q - F_w|
    double inequality_violation = 0.0;  // max over off-support points of (F_w - (U + Q))⁺
};

inline FrostmanCheck check_frostman(const ExternalField& field, const EquilibriumSolution& sol,
                                    std::size_t N = 4096) {
    FrostmanCheck out;
    if (sol.support.full_circle()) {
        const std::vector<double> u = detail::full_circle_potential_grid(sol.density, N);
        for (std::size_t i = 0; i < N; ++i) {
            const double th = two_pi * double(i) / double(N);
            out.equality_sup =
                std::max(out.equality_sup, std::abs(u[i] + eval_Q(field, th) - sol.robin));
        }
        return out;
    }
    double min_width = two_pi;
    for (std::size_t k = 0; k < sol.support.size(); ++k)
        min_width = std::min(min_width, sol.support.arc(k).length());
    for (std::size_t i = 0; i < N; ++i) {
        const double th = two_pi * double(i) / double(N);
        const double phi = log_kernel_potential(sol.density, th) + eval_Q(field, th);
        if (sol.support.contains(th)) {
            if (sol.support.endpoint_distance(th) < 0.005 * min_width) continue;
            out.equality_sup = std::max(out.equality_sup, std::abs(phi - sol.robin));
        } else {
            if (sol.support.endpoint_distance(th) < 1e-9) continue;
            out.inequality_violation = std::max(out.inequality_violation, sol.robin - phi);
        }
    }
    out.inequality_violation = std::max(out.inequality_violation, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Full residual report
// ---------------------------------------------------------------------------

struct ReportTolerances {
    double mass = 1e-8;
    double frostman_equality = 1e-4;
    double frostman_inequality = 1e-6;
    double density_equation = 1e-5;
    double conjugate_identity = 1e-5;
    double imag_part = 1e-8;
};

struct ResidualReport {
    double mass_gap = 0.0;                    // |∫ f - 1|
    double frostman_equality_sup = 0.0;       // |U + Q - F_w| over the support interior
    double frostman_inequality_violation = 0.0;  // (F_w - (U+Q))⁺ off the support
    double density_equation_sup = 0.0;        // defect in the quadratic equation for f
    double conjugate_identity_sup = 0.0;      // |H[f] - Q'/π| on the support interior
    double imag_part_sup = 0.0;               // imaginary residue of the analytic formulas
    double side_conditions_sup = 0.0;         // stacked moment/gap/mass residuals (arcs only)
    double support_min_density = 0.0;
    bool pass = false;
};

namespace detail {

/// Density evaluator backed by the class formula (not profile interpolation),
/// used at staggered verification angles.  Returns the complex formula value.
inline std::function<cdouble(double)> formula_density(const ExternalField& field,
                                                      const ArcSet& support,
                                                      const SqrtRBranch* branch) {
    if (support.full_circle()) {
        if (const auto* w = std::get_if<PolynomialWeight>(&field)) {
            const PolynomialWeight wc = *w;
            return [wc](double t) {
                double s = 1.0 + wc.lambda_sum();
                const cdouble u = std::polar(1.0, t);
                for (const auto& term : wc.terms())
                    s -= term.lambda * std::abs(std::norm(term.zero) - 1.0) / std::norm(u - term.zero);
                return cdouble(s / two_pi, 0.0);
            };
        }
        if (const auto* w = std::get_if<TrigExponentialWeight>(&field)) {
            const TrigExponentialWeight wc = *w;
            return [wc](double t) {
                double s = 1.0 / two_pi;
                for (int m = 1; m <= wc.degree(); ++m)
                    s -= 2.0 * double(m) / pi * (wc.coeff(m) * std::polar(1.0, m * t)).real();
                return cdouble(s, 0.0);
            };
        }
        // sampled field: band-limited interpolation of the spectral values
        auto profile = std::make_shared<DensityProfile>(
            DensityProfile::uniform_circle(full_circle_values_spectral(field, 4096)));
        return [profile](double t) { return cdouble((*profile)(t), 0.0); };
    }
    if (const auto* w = std::get_if<PolynomialWeight>(&field)) {
        auto poles = std::make_shared<std::vector<F1Pole>>(f1_poles(*w, *branch));
        return [branch, poles](double t) {
            return branch->boundary(t) / two_pi * f1_bracket(*poles, std::polar(1.0, t));
        };
    }
    if (const auto* w = std::get_if<TrigExponentialWeight>(&field)) {
        const TrigExponentialWeight wc = *w;
        auto tab = std::make_shared<CoefficientTables>(
            build_coefficient_tables(*branch, std::size_t(wc.degree())));
        return [wc, branch, tab](double t) { return trig_F2_boundary(wc, *branch, *tab, t); };
    }
    QuadratureOptions opts;
    opts.tolerance = 1e-10;
    return [&field, branch, opts](double t) { return general_F_boundary(field, *branch, t, opts); };
}

/// Midpoints between consecutive profile nodes, away from the arc ends,
/// thinned to at most `cap` per arc.
inline std::vector<double> staggered_angles(const DensityProfile& profile, std::size_t cap = 64) {
    std::vector<double> out;
    for (std::size_t k = 0; k < profile.support().size(); ++k) {
        const auto& t = profile.arc_angles(k);
        const std::size_t n = t.size();
        const std::size_t stride = std::max<std::size_t>(1, (n - 1) / cap);
        for (std::size_t i = 0; i + 1 < n; i += stride) {
            const double mid = 0.5 * (t[i] + t[i + 1]);
            const Arc& arc = profile.support().arc(k);
            const double x = (mid - arc.midpoint()) / arc.halfwidth();
            if (std::abs(x) > 0.95) continue;
            out.push_back(mid);
        }
    }
    return out;
}

}  // namespace detail

/// Re-derive the density from the class formula and check every identity:
/// mass, Frostman equality/inequality, the quadratic density equation, the
/// conjugate-function identity H[f] = Q'/π, imaginary residues, and (for
/// proper arc supports) the endpoint side conditions.
inline ResidualReport full_report(const ExternalField& field, const EquilibriumSolution& sol,
                                  const ReportTolerances& tol = {}, std::size_t grid = 4096) {
    ResidualReport rep;
    rep.mass_gap = std::abs(sol.density.mass() - 1.0);
    rep.support_min_density = sol.density.min_value();

    const FrostmanCheck fr = check_frostman(field, sol, grid);
    rep.frostman_equality_sup = fr.equality_sup;
    rep.frostman_inequality_violation = fr.inequality_violation;

    if (sol.support.full_circle()) {
        // spectral checks on the profile's own grid
        const auto& f = sol.density.circle_values();
        const std::size_t n = f.size();
        std::vector<double> qp(n), qpf(n);
        for (std::size_t i = 0; i < n; ++i) {
            qp[i] = eval_Qprime(field, two_pi * double(i) / double(n));
            qpf[i] = qp[i] * f[i];
        }
        const std::vector<double> Hf = conjugate_function(f);
        const std::vector<double> Hqpf = conjugate_function(qpf);
        for (std::size_t i = 0; i < n; ++i) {
            rep.conjugate_identity_sup =
                std::max(rep.conjugate_identity_sup, std::abs(Hf[i] - qp[i] / pi));
            const double rhs = qp[i] * qp[i] / (pi * pi) - 2.0 / pi * Hqpf[i] + 1.0 / (4.0 * pi * pi);
            rep.density_equation_sup =
                std::max(rep.density_equation_sup, std::abs(f[i] * f[i] - rhs));
        }
    } else {
        const SqrtRBranch branch(sol.support);
        const auto fD = detail::formula_density(field, sol.support, &branch);
        const std::vector<double> stag = detail::staggered_angles(sol.density);

        // memoized real density for the principal-value integrands (the cot
        // rule hits the same node set for every staggered angle)
        auto cache = std::make_shared<std::vector<std::pair<double, double>>>();
        auto f_real = [fD, cache, &rep](double t) {
            for (const auto& kv : *cache)
                if (kv.first == t) return kv.second;
            const cdouble v = fD(t);
            rep.imag_part_sup = std::max(rep.imag_part_sup, std::abs(v.imag()));
            cache->emplace_back(t, v.real());
            return v.real();
        };

        const std::size_t pv_nodes = 1024;
        for (const double th : stag) {
            const double qp = eval_Qprime(field, th);
            const double fv = f_real(th);
            // H[f](θ) = (1/2π) PV ∫ f cot((θ-t)/2) dt
            const double Hf = pv_cot_on_arcs(sol.support, f_real, th, pv_nodes) / two_pi;
            rep.conjugate_identity_sup =
                std::max(rep.conjugate_identity_sup, std::abs(Hf - qp / pi));
            const double pv_qpf = pv_cot_on_arcs(
                sol.support, [&](double t) { return eval_Qprime(field, t) * f_real(t); }, th,
                pv_nodes);
            const double rhs = qp * qp / (pi * pi) - pv_qpf / (pi * pi) + 1.0 / (4.0 * pi * pi);
            rep.density_equation_sup =
                std::max(rep.density_equation_sup, std::abs(fv * fv - rhs));
        }

        for (double r : stacked_residuals(field, sol.support))
            rep.side_conditions_sup = std::max(rep.side_conditions_sup, std::abs(r));
    }

    rep.pass = rep.mass_gap <= tol.mass && rep.frostman_equality_sup <= tol.frostman_equality &&
               rep.frostman_inequality_violation <= tol.frostman_inequality &&
               rep.density_equation_sup <= tol.density_equation &&
               rep.conjugate_identity_sup <= tol.conjugate_identity &&
               rep.imag_part_sup <= tol.imag_part;
    return rep;
}

// ---------------------------------------------------------------------------
// End-to-end solve
// ---------------------------------------------------------------------------

struct SolveOptions {
    std::size_t detection_grid = 2048;  // full-circle decision grid
    std::size_t oracle_grid = 1024;     // seed oracle resolution (0 disables seeding)
    std::size_t nodes_per_arc = 1024;   // final density resolution
    std::optional<std::vector<double>> initial_endpoints;  // bypass the seeding stage
    EndpointSolveOptions endpoint;
    // Seeding only needs a coarse support estimate, so the oracle budget is
    // much smaller than what a standalone oracle run would use.
    OracleOptions oracle{4000, 1e-11, 5, std::nullopt};
};

namespace detail {

/// Class-appropriate density on a solved support.
inline DensityProfile class_density(const ExternalField& field, const ArcSet& support,
                                    std::size_t nodes_per_arc, double* imag_sup) {
    if (const auto* w = std::get_if<PolynomialWeight>(&field))
        return polynomial_density(*w, support, nodes_per_arc, imag_sup);
    if (const auto* w = std::get_if<TrigExponentialWeight>(&field))
        return trig_density(*w, support, nodes_per_arc, imag_sup);
    return general_density(field, support, std::min<std::size_t>(nodes_per_arc, 257), imag_sup);
}

/// Cap the arc count at `max_arcs` by repeatedly merging across the narrowest gap.
inline std::vector<Arc> cap_arc_count(std::vector<Arc> arcs, std::size_t max_arcs) {
    while (arcs.size() > max_arcs && arcs.size() >= 2) {
        std::size_t best = 0;
        double best_gap = 1e300;
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            const Arc& cur = arcs[k];
            const Arc& nxt = arcs[(k + 1) % arcs.size()];
            const double gap = forward_gap(cur.beta, nxt.alpha);
            if (gap < best_gap) {
                best_gap = gap;
                best = k;
            }
        }
        const std::size_t nxt = (best + 1) % arcs.size();
        const double merged_beta = arcs[best].beta + forward_gap(arcs[best].beta, arcs[nxt].beta);
        arcs[best].beta = merged_beta;
        arcs.erase(arcs.begin() + std::ptrdiff_t(nxt));
    }
    return arcs;
}

}  // namespace detail

/// Stage-tagged failure from the end-to-end driver.
struct SolveError : std::runtime_error {
    std::string stage;
    SolveError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), stage(std::move(where)) {}
};

inline EquilibriumSolution solve_equilibrium(const ExternalField& field,
                                             const SolveOptions& opt = {}) {
    // 1. does the measure cover the whole circle?
    FullCircleCheck fc = detect_full_circle(field, opt.detection_grid);
    if (fc.is_full_circle) return assemble_solution(field, *fc.density);

    // 2. seed the endpoint search
    std::vector<Arc> seed;
    if (opt.initial_endpoints) {
        const auto& e = *opt.initial_endpoints;
        if (e.size() < 2 || e.size() % 2 != 0)
            throw SolveError("seed", "initial endpoints must come in (start, end) pairs");
        for (std::size_t k = 0; k + 1 < e.size(); k += 2) seed.push_back(Arc{e[k], e[k + 1]});
    } else {
        if (opt.oracle_grid >= 64) {
            const OracleResult seed_run = minimize_energy(field, opt.oracle_grid, opt.oracle);
            try {
                const ArcSet extracted = extract_support(seed_run.measure);
                if (!extracted.full_circle())
                    for (std::size_t k = 0; k < extracted.size(); ++k)
                        seed.push_back(extracted.arc(k));
            } catch (const std::exception&) {
                // fall through to the sign-change seed below
            }
        }
        if (seed.empty()) {
            // complement of the runs where the full-circle formula went negative
            std::vector<Arc> gaps = fc.violations;
            if (gaps.empty())
                throw SolveError("seed", "no candidate support could be constructed");
            for (std::size_t k = 0; k < gaps.size(); ++k) {
                const Arc& cur = gaps[k];
                const Arc& nxt = gaps[(k + 1) % gaps.size()];
                seed.push_back(Arc{cur.beta, cur.beta + forward_gap(cur.beta, nxt.alpha)});
            }
        }
        std::size_t cap = convexity_heuristic(field);
        if (const auto* w = std::get_if<PolynomialWeight>(&field))
            cap = std::min(cap, w->count());
        if (const auto* w = std::get_if<TrigExponentialWeight>(&field))
            cap = std::min<std::size_t>(cap, std::size_t(std::max(w->degree(), 1)));
        seed = detail::cap_arc_count(std::move(seed), cap);
    }

    // 3. Gauss-Newton with collapse retries
    EndpointSolveOptions ep = opt.endpoint;
    if (std::get_if<SampledField>(&field)) {
        // the quadrature route measures the gap conditions to a few 1e-7 at a
        // practical node budget — wrong supports sit four decades higher
        ep.accept_tolerance = std::max(ep.accept_tolerance, 1e-6);
    }
    SupportSolveReport last;
    for (int attempt = 0; attempt < 8 && !seed.empty(); ++attempt) {
        std::vector<double> e;
        for (const Arc& a : seed) {
            e.push_back(a.alpha);
            e.push_back(a.beta);
        }
        // re-anchor so the vector ascends within one turn
        for (std::size_t i = 1; i < e.size(); ++i)
            while (e[i] < e[i - 1]) e[i] += two_pi;
        try {
            last = solve_endpoints(field, e, ep);
        } catch (const std::exception& ex) {
            throw SolveError("endpoints", ex.what());
        }
        if (last.converged && last.support) {
            double imag_sup = 0.0;
            DensityProfile profile = [&] {
                try {
                    return detail::class_density(field, *last.support, opt.nodes_per_arc, &imag_sup);
                } catch (const std::exception& ex) {
                    throw SolveError("density", ex.what());
                }
            }();
            try {
                return assemble_solution(field, profile);
            } catch (const std::exception& ex) {
                throw SolveError("assembly", ex.what());
            }
        }
        if (!last.arc_collapsed)
            throw SolveError("endpoints", last.message.empty()
                                              ? "endpoint iteration did not converge"
                                              : last.message);
        // rebuild the seed one arc smaller
        std::vector<Arc> next;
        const std::size_t K = seed.size();
        if (K == 1) throw SolveError("endpoints", "support collapsed entirely");
        const auto& e2 = last.endpoints;
        std::vector<Arc> current;
        for (std::size_t k = 0; k < K; ++k) current.push_back(Arc{e2[2 * k], e2[2 * k + 1]});
        if (last.gap_closed) {
            const std::size_t a = last.collapsed_index, b = (a + 1) % K;
            for (std::size_t k = 0; k < K; ++k) {
                if (k == b) continue;
                if (k == a)
                    next.push_back(Arc{current[a].alpha,
                                       current[a].alpha + forward_gap(current[a].alpha, current[b].beta)});
                else
                    next.push_back(current[k]);
            }
        } else {
            for (std::size_t k = 0; k < K; ++k)
                if (k != last.collapsed_index) next.push_back(current[k]);
        }
        seed = std::move(next);
    }
    throw SolveError("endpoints", "no arc configuration converged");
}

}  // namespace circeq
