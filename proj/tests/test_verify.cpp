#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "circeq/verify.hpp"
#include "circeq/oracle.hpp"

using namespace circeq;

namespace {

const double kHalfwidth2 = 2.3288370922211325797;
const double kAlpha2 = pi - kHalfwidth2;
const double kBeta2 = pi + kHalfwidth2;

PolynomialWeight weight_at(double r) { return PolynomialWeight({{cdouble(r, 0.0), 1.0}}); }

}  // namespace

TEST_CASE("flat field: all equilibrium quantities are trivial") {
    ExternalField f = TrigExponentialWeight({cdouble(0.0)});
    EquilibriumSolution sol = solve_equilibrium(f);
    REQUIRE(sol.support.full_circle());
    REQUIRE(sol.robin == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(sol.energy == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(sol.capacity == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(sol.field_integral == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(sol.density.mass() == Catch::Approx(1.0).margin(1e-12));

    ResidualReport rep = full_report(f, sol);
    REQUIRE(rep.pass);
    REQUIRE(rep.density_equation_sup < 1e-12);
    REQUIRE(rep.conjugate_identity_sup < 1e-12);
}

TEST_CASE("borderline zero at 3: closed-form constants") {
    ExternalField f = weight_at(3.0);
    EquilibriumSolution sol = solve_equilibrium(f);
    REQUIRE(sol.support.full_circle());
    REQUIRE(sol.robin == Catch::Approx(-1.0986122886681096914).margin(1e-10));   // -log 3
    REQUIRE(sol.energy == Catch::Approx(-2.3150076129926028373).margin(1e-10));  // log(8/81)
    REQUIRE(sol.capacity == Catch::Approx(10.125).margin(1e-8));                 // 81/8
    REQUIRE(sol.field_integral == Catch::Approx(sol.energy - sol.robin).margin(1e-14));

    ResidualReport rep = full_report(f, sol);
    REQUIRE(rep.pass);
    REQUIRE(rep.density_equation_sup < 1e-5);
    REQUIRE(rep.conjugate_identity_sup < 1e-5);
    REQUIRE(rep.frostman_equality_sup < 1e-4);
    REQUIRE(rep.frostman_inequality_violation < 1e-6);
}

TEST_CASE("zero at 2: end-to-end arc solve") {
    ExternalField f = weight_at(2.0);
    EquilibriumSolution sol = solve_equilibrium(f);
    REQUIRE(sol.support.size() == 1);
    REQUIRE(sol.support.arc(0).alpha == Catch::Approx(kAlpha2).margin(1e-9));
    REQUIRE(sol.support.arc(0).beta == Catch::Approx(kBeta2).margin(1e-9));
    REQUIRE(sol.density.mass() == Catch::Approx(1.0).margin(1e-8));

    // the discretized minimizer lands on the same Robin constant
    OracleResult oracle = minimize_energy(f, 1024);
    REQUIRE(std::abs(oracle.robin - sol.robin) < 0.01);

    ResidualReport rep = full_report(f, sol);
    REQUIRE(rep.pass);
    REQUIRE(rep.side_conditions_sup < 1e-8);
    REQUIRE(rep.imag_part_sup < 1e-8);
}

TEST_CASE("cosine field: exact endpoint and energy constants") {
    ExternalField f = TrigExponentialWeight({cdouble(0.0), cdouble(0.5, 0.0)});
    EquilibriumSolution sol = solve_equilibrium(f);
    REQUIRE(sol.support.size() == 1);
    REQUIRE(sol.support.arc(0).alpha == Catch::Approx(pi / 2.0).margin(1e-8));
    REQUIRE(sol.support.arc(0).beta == Catch::Approx(3.0 * pi / 2.0).margin(1e-8));
    // F_w = (log 2 - 1)/2, ∫Q dμ = -3/4, V_w = (log 2)/2 - 5/4
    REQUIRE(sol.robin == Catch::Approx(-0.15342640972002734529).margin(1e-7));
    REQUIRE(sol.field_integral == Catch::Approx(-0.75).margin(1e-8));
    REQUIRE(sol.energy == Catch::Approx(-0.90342640972002734529).margin(1e-7));
    REQUIRE(full_report(f, sol).pass);
}

TEST_CASE("weak cosine field: full circle with quadratic energy") {
    const double gamma = 0.4;  // c_1 = gamma/2
    ExternalField f = TrigExponentialWeight({cdouble(0.0), cdouble(gamma / 2.0, 0.0)});
    EquilibriumSolution sol = solve_equilibrium(f);
    REQUIRE(sol.support.full_circle());
    REQUIRE(sol.robin == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(sol.field_integral == Catch::Approx(-gamma * gamma).margin(1e-10));
    REQUIRE(sol.energy == Catch::Approx(-gamma * gamma).margin(1e-10));
    REQUIRE(sol.capacity == Catch::Approx(std::exp(gamma * gamma)).margin(1e-9));
}

TEST_CASE("support topology flips across the polynomial transition") {
    EquilibriumSolution near_in = solve_equilibrium(ExternalField(weight_at(2.99)));
    REQUIRE_FALSE(near_in.support.full_circle());
    EquilibriumSolution near_out = solve_equilibrium(ExternalField(weight_at(3.01)));
    REQUIRE(near_out.support.full_circle());
}

TEST_CASE("support topology flips across the cosine transition") {
    ExternalField weak = TrigExponentialWeight({cdouble(0.0), cdouble(0.245, 0.0)});
    REQUIRE(solve_equilibrium(weak).support.full_circle());
    ExternalField strong = TrigExponentialWeight({cdouble(0.0), cdouble(0.255, 0.0)});
    REQUIRE_FALSE(solve_equilibrium(strong).support.full_circle());
}

TEST_CASE("sampled field goes through the quadrature route end to end") {
    PolynomialWeight w = weight_at(3.0);
    SampledField s([w](double t) { return w.Q(t); }, [w](double t) { return w.Qprime(t); },
                   [w](double t) { return w.Qsecond(t); }, true);
    ExternalField f = s;
    EquilibriumSolution sol = solve_equilibrium(f);
    REQUIRE(sol.support.full_circle());
    REQUIRE(sol.robin == Catch::Approx(-std::log(3.0)).margin(1e-8));
    REQUIRE(sol.energy == Catch::Approx(std::log(8.0 / 81.0)).margin(1e-8));
}

TEST_CASE("rotating the field rotates the solution") {
    const double theta0 = 0.7;
    ExternalField f = weight_at(2.0);
    EquilibriumSolution base = solve_equilibrium(f);
    EquilibriumSolution rot = solve_equilibrium(rotated(f, theta0));
    REQUIRE(rot.support.size() == 1);
    REQUIRE(canonical_angle(rot.support.arc(0).alpha) ==
            Catch::Approx(canonical_angle(base.support.arc(0).alpha + theta0)).margin(1e-9));
    REQUIRE(rot.robin == Catch::Approx(base.robin).margin(1e-9));
    REQUIRE(rot.energy == Catch::Approx(base.energy).margin(1e-9));
}

TEST_CASE("an inconsistent density is refused at assembly") {
    // uniform measure is not the equilibrium for the zero at 2: U + Q varies
    ExternalField f = weight_at(2.0);
    std::vector<double> flat(2048, 1.0 / two_pi);
    DensityProfile uniform = DensityProfile::uniform_circle(std::move(flat));
    REQUIRE_THROWS_AS(assemble_solution(f, uniform), std::domain_error);
}

TEST_CASE("seeding can be bypassed with explicit endpoints") {
    ExternalField f = weight_at(2.0);
    SolveOptions opt;
    opt.initial_endpoints = std::vector<double>{pi - 2.0, pi + 2.0};
    EquilibriumSolution sol = solve_equilibrium(f, opt);
    REQUIRE(sol.support.arc(0).alpha == Catch::Approx(kAlpha2).margin(1e-9));
    SolveOptions bad;
    bad.initial_endpoints = std::vector<double>{1.0, 2.0, 3.0};
    REQUIRE_THROWS_AS(solve_equilibrium(f, bad), SolveError);
}
