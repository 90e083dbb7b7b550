#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "circeq/density.hpp"
#include "circeq/support.hpp"

using namespace circeq;

namespace {

// real zero at 2, exponent 1: proper-arc support symmetric about pi with
// cos(halfwidth) = -11/16
const double kHalfwidth2 = 2.3288370922211325797;
const double kAlpha2 = pi - kHalfwidth2;  // 0.81275556136866066
const double kBeta2 = pi + kHalfwidth2;   // 5.4704297458109258

PolynomialWeight weight_at(double r) { return PolynomialWeight({{cdouble(r, 0.0), 1.0}}); }

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

}  // namespace

TEST_CASE("constant weight has the uniform density") {
    ExternalField f = TrigExponentialWeight({cdouble(0.0)});
    DensityProfile mu = full_circle_density(f, 256);
    REQUIRE(mu.full_circle());
    REQUIRE(mu.mass() == Catch::Approx(1.0).margin(1e-14));
    for (double theta : {0.0, 1.1, 4.4})
        REQUIRE(mu(theta) == Catch::Approx(1.0 / two_pi).margin(1e-14));
}

TEST_CASE("closed-form and spectral full-circle densities agree") {
    ExternalField cases[] = {
        ExternalField(weight_at(3.0)),
        ExternalField(PolynomialWeight({{cdouble(0.0, -2.5), 0.6}, {cdouble(4.0, 1.0), 0.8}})),
        ExternalField(TrigExponentialWeight({cdouble(0.0), cdouble(0.2, 0.0)})),
        ExternalField(TrigExponentialWeight({cdouble(0.1), cdouble(0.1, 0.05), cdouble(0.0, 0.08)})),
    };
    for (const auto& f : cases)
        REQUIRE(sup_diff(full_circle_values(f, 512), full_circle_values_spectral(f, 512)) < 1e-10);
}

TEST_CASE("real zero at 3: borderline full-circle density") {
    ExternalField f = weight_at(3.0);
    DensityProfile mu = full_circle_density(f, 2048);
    REQUIRE(mu.full_circle());
    REQUIRE(mu(pi) == Catch::Approx(3.0 / (4.0 * pi)).margin(1e-10));
    REQUIRE(mu(0.0) == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(mu.mass() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(mu.min_value() >= -1e-12);
}

TEST_CASE("real zero at 2: the full circle is rejected with located violations") {
    ExternalField f = weight_at(2.0);
    bool threw = false;
    try {
        full_circle_density(f, 2048);
    } catch (const FullCircleViolation& e) {
        threw = true;
        REQUIRE_FALSE(e.intervals.empty());
        bool covers_zero = false;
        for (const Arc& a : e.intervals)
            if (a.contains(0.0)) covers_zero = true;
        REQUIRE(covers_zero);
        for (const Arc& a : e.intervals) REQUIRE_FALSE(a.contains(pi));
    }
    REQUIRE(threw);
}

TEST_CASE("potential of a one-mode density is the matching cosine") {
    // dμ = (1/2π + cos t/2π) dt has U(θ) = cos(θ)/2
    const std::size_t n = 512;
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i)
        vals[i] = (1.0 + std::cos(two_pi * double(i) / double(n))) / two_pi;
    DensityProfile mu = DensityProfile::uniform_circle(std::move(vals));
    for (double theta : {0.0, 0.371, 2.0, 5.9})
        REQUIRE(log_kernel_potential(mu, theta) == Catch::Approx(0.5 * std::cos(theta)).margin(1e-13));
}

TEST_CASE("arc profile interpolates analytic samples") {
    ArcSet sup({{1.0, 2.4}, {4.0, 5.5}});
    auto fn = [](double t) { return std::cos(t) + 2.0; };
    DensityProfile mu(sup, 64, fn);
    // exact at nodes, spectrally accurate between them, zero off the support
    REQUIRE(mu(mu.arc_angles(0)[10]) == Catch::Approx(fn(mu.arc_angles(0)[10])).margin(1e-15));
    for (double theta : {1.3, 1.9, 2.2, 4.3, 5.1})
        REQUIRE(mu(theta) == Catch::Approx(fn(theta)).margin(1e-12));
    REQUIRE(mu(3.0) == 0.0);
    REQUIRE(mu(0.2) == 0.0);
    // mass() is second-order for profiles that do not vanish at the arc ends
    // (equilibrium densities do vanish there, where the rule converges fast)
    const double want_mass = (std::sin(2.4) - std::sin(1.0)) + (std::sin(5.5) - std::sin(4.0)) +
                             2.0 * (1.4 + 1.5);
    const double err64 = std::abs(mu.mass() - want_mass);
    const double err512 = std::abs(DensityProfile(sup, 512, fn).mass() - want_mass);
    REQUIRE(err64 < 1e-3);
    REQUIRE(err512 < err64 / 60.0);

    // a profile with square-root endpoint decay integrates far more accurately
    auto fn_sqrt = [&](double t) {
        const Arc& a = sup.arc(sup.arc_index(t).value());
        return (2.0 + std::cos(t)) * std::sqrt((t - a.alpha) * (a.beta - t));
    };
    const double m64 = DensityProfile(sup, 64, fn_sqrt).mass();
    const double m2048 = DensityProfile(sup, 2048, fn_sqrt).mass();
    REQUIRE(m64 == Catch::Approx(m2048).margin(1e-10));
}

TEST_CASE("full-circle profile interpolates band-limited samples") {
    const std::size_t n = 64;
    auto fn = [](double t) { return 1.0 + 0.5 * std::cos(3.0 * t) - 0.2 * std::sin(5.0 * t); };
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = fn(two_pi * double(i) / double(n));
    DensityProfile mu = DensityProfile::uniform_circle(std::move(vals));
    for (double theta : {0.13, 2.7, 4.9})
        REQUIRE(mu(theta) == Catch::Approx(fn(theta)).margin(1e-10));
    REQUIRE(mu(two_pi * 7.0 / double(n)) == Catch::Approx(fn(two_pi * 7.0 / double(n))).margin(1e-14));
}

TEST_CASE("expansion tables reproduce the Cauchy kernel at both ends") {
    SqrtRBranch branch(ArcSet({{0.9, 2.1}, {3.2, 5.1}}));
    const std::size_t M = 12;
    CoefficientTables tab = build_coefficient_tables(branch, M);

    // s_{K+1} is the constant 1 and r_0(z) = -1/(sqrtR(0) z)
    REQUIRE(std::abs(tab.eval_s(branch.K() + 1, cdouble(3.0, 1.0)) - 1.0) < 1e-14);
    const cdouble z0(0.7, 0.4);
    REQUIRE(std::abs(tab.eval_r(0, z0) + 1.0 / (branch.offcut(cdouble(0.0)) * z0)) < 1e-14);

    // partial sums near infinity and near zero against the direct kernel
    const cdouble z(0.5, 0.2);
    const cdouble zeta_big = std::polar(20.0, 1.0);
    cdouble series_big = 0.0;
    for (std::size_t k = branch.K() + 1; k <= M + 1; ++k)
        series_big += tab.eval_s(k, z) * std::pow(zeta_big, -double(k));
    const cdouble direct_big = 1.0 / (branch.offcut(zeta_big) * (zeta_big - z));
    REQUIRE(std::abs(series_big - direct_big) < 1e-10);

    const cdouble zb(0.8, 0.4);
    const cdouble zeta_small = std::polar(0.05, 0.4);
    cdouble series_small = 0.0;
    for (std::size_t k = 0; k < M; ++k)
        series_small += tab.eval_r(k, zb) * std::pow(zeta_small, double(k));
    const cdouble direct_small = 1.0 / (branch.offcut(zeta_small) * (zeta_small - zb));
    REQUIRE(std::abs(series_small - direct_small) < 1e-10);

    REQUIRE_THROWS_AS(build_coefficient_tables(branch, 1), std::invalid_argument);
}

TEST_CASE("real zero at 2: arc density is real, symmetric and normalized") {
    PolynomialWeight w = weight_at(2.0);
    ArcSet sup({{kAlpha2, kBeta2}});
    double imag_sup = 0.0;
    DensityProfile mu = polynomial_density(w, sup, 1024, &imag_sup);
    REQUIRE(imag_sup < 1e-12);
    REQUIRE(mu.min_value() >= 0.0);
    REQUIRE(mu.mass() == Catch::Approx(1.0).margin(1e-10));
    for (double s : {0.3, 1.0, 1.8})
        REQUIRE(mu(pi + s) == Catch::Approx(mu(pi - s)).margin(1e-12));
}

TEST_CASE("cosine field: arc density matches the explicit formula") {
    // Q = cos θ concentrates on [π/2, 3π/2] with f(π+τ) = (√2/π) cos(τ/2) sqrt(cos τ)
    TrigExponentialWeight w({cdouble(0.0), cdouble(0.5, 0.0)});
    ArcSet sup({{pi / 2.0, 3.0 * pi / 2.0}});
    double imag_sup = 0.0;
    DensityProfile mu = trig_density(w, sup, 512, &imag_sup);
    REQUIRE(imag_sup < 1e-12);
    REQUIRE(mu.mass() == Catch::Approx(1.0).margin(1e-10));
    for (double tau : {-1.3, -0.6, 0.0, 0.4, 1.2}) {
        const double want = std::sqrt(2.0) / pi * std::cos(0.5 * tau) * std::sqrt(std::cos(tau));
        REQUIRE(mu(pi + tau) == Catch::Approx(want).margin(1e-10));
    }
}

TEST_CASE("closed forms agree with the singular-integral route") {
    // polynomial case on its solved support
    PolynomialWeight wp = weight_at(2.0);
    ExternalField fp = wp;
    ArcSet sup_p({{kAlpha2, kBeta2}});
    SqrtRBranch branch_p(sup_p);
    for (double theta : {1.2, 2.0, pi, 4.4, 5.2}) {
        const cdouble a = polynomial_F1_boundary(wp, branch_p, theta);
        const cdouble b = general_F_boundary(fp, branch_p, theta);
        REQUIRE(std::abs(a - b) < 1e-7);
    }
    // off the support the singular-integral route picks up an extra g(z)
    const cdouble zin(0.25, 0.1);
    REQUIRE(std::abs(general_F_offcut(fp, branch_p, zin) -
                     (polynomial_F1_offcut(wp, branch_p, zin) + wp.g(zin))) < 1e-7);

    // trig case on its solved support
    TrigExponentialWeight wt({cdouble(0.0), cdouble(0.5, 0.0)});
    ExternalField ft = wt;
    ArcSet sup_t({{pi / 2.0, 3.0 * pi / 2.0}});
    SqrtRBranch branch_t(sup_t);
    CoefficientTables tab = build_coefficient_tables(branch_t, 1);
    for (double theta : {1.8, 2.5, pi, 4.0, 4.5}) {
        const cdouble a = trig_F2_boundary(wt, branch_t, tab, theta);
        const cdouble b = general_F_boundary(ft, branch_t, theta);
        REQUIRE(std::abs(a - b) < 1e-7);
    }
    const cdouble zt(0.3, -0.2);
    REQUIRE(std::abs(general_F_offcut(ft, branch_t, zt) -
                     (trig_F2_offcut(wt, branch_t, tab, zt) + wt.g(zt))) < 1e-7);
}

TEST_CASE("density builders reject an impossible support") {
    PolynomialWeight w = weight_at(2.0);
    const double d = kHalfwidth2;
    // an off-center support makes the formula dip negative and is rejected
    REQUIRE_THROWS_AS(polynomial_density(w, ArcSet({{pi - d + 0.8, pi + d + 0.8}}), 256),
                      std::domain_error);
    // a symmetric support of the wrong width stays positive but is caught by
    // the mass and the endpoint side conditions instead
    DensityProfile wide = polynomial_density(w, ArcSet({{pi - 2.8, pi + 2.8}}), 256);
    REQUIRE(std::abs(wide.mass() - 1.0) > 0.1);
    double side = 0.0;
    for (double r : stacked_residuals(ExternalField(w), ArcSet({{pi - 2.8, pi + 2.8}})))
        side = std::max(side, std::abs(r));
    REQUIRE(side > 0.1);
    // a zero sitting on the candidate support is rejected outright
    PolynomialWeight on_arc({{std::polar(1.0, 1.5), 1.0}});
    REQUIRE_THROWS_AS(polynomial_density(on_arc, ArcSet({{1.0, 2.0}}), 64), std::domain_error);
    // more arcs than the trig degree supports
    TrigExponentialWeight wt({cdouble(0.0), cdouble(0.5, 0.0)});
    REQUIRE_THROWS_AS(trig_density(wt, ArcSet({{0.1, 1.0}, {2.0, 3.0}}), 64),
                      std::invalid_argument);
}

TEST_CASE("constant trig field yields the all-zero arc density") {
    TrigExponentialWeight w({cdouble(0.3)});
    DensityProfile mu = trig_density(w, ArcSet({{1.0, 2.0}}), 64);
    REQUIRE(mu.mass() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("p functional squares the density on the support") {
    // strictly inside the full-circle regime the flag is clean
    ExternalField deep = weight_at(3.5);
    DensityProfile mu_deep = full_circle_density(deep, 2048);
    PFunction p_deep = compute_p(deep, mu_deep, 2048);
    REQUIRE(p_deep.positive_everywhere);
    REQUIRE(p_deep.candidate.empty());

    // at the borderline zero the functional touches zero exactly at θ = 0, so
    // the strict-positivity flag clears while p = f² still holds
    ExternalField f = weight_at(3.0);
    DensityProfile mu = full_circle_density(f, 2048);
    PFunction p = compute_p(f, mu, 2048);
    REQUIRE_FALSE(p.positive_everywhere);
    REQUIRE(std::abs(p.values[0]) < 1e-12);
    double err = 0.0;
    for (std::size_t i = 0; i < p.theta.size(); ++i)
        err = std::max(err, std::abs(p.values[i] - mu(p.theta[i]) * mu(p.theta[i])));
    REQUIRE(err < 1e-8);
}

TEST_CASE("p functional flags the gap for a steeper zero") {
    // with the zero at 2 the equilibrium leaves a gap around θ = 0; feeding the
    // (wrong) full-circle guess through p must expose it
    ExternalField f = weight_at(2.0);
    std::vector<double> raw = full_circle_values(f, 2048);
    for (double& v : raw) v = std::max(v, 0.0);
    DensityProfile guess = DensityProfile::uniform_circle(std::move(raw));
    PFunction p = compute_p(f, guess, 2048);
    REQUIRE_FALSE(p.positive_everywhere);
    REQUIRE_FALSE(p.candidate.empty());
    bool gap_at_zero = true;
    for (const Arc& a : p.candidate)
        if (a.contains(0.0)) gap_at_zero = false;
    REQUIRE(gap_at_zero);
    REQUIRE(p.values[1024] > 0.0);  // θ = π carries mass
}
