#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "circeq/oracle.hpp"
#include "circeq/density.hpp"

using namespace circeq;

namespace {

const double kHalfwidth2 = 2.3288370922211325797;
const double kAlpha2 = pi - kHalfwidth2;
const double kBeta2 = pi + kHalfwidth2;

PolynomialWeight weight_at(double r) { return PolynomialWeight({{cdouble(r, 0.0), 1.0}}); }

}  // namespace

TEST_CASE("simplex projection on hand-checked points") {
    auto p1 = project_simplex({0.5, 0.5, 1.0});
    REQUIRE(p1[0] == Catch::Approx(1.0 / 6.0).margin(1e-15));
    REQUIRE(p1[1] == Catch::Approx(1.0 / 6.0).margin(1e-15));
    REQUIRE(p1[2] == Catch::Approx(2.0 / 3.0).margin(1e-15));

    auto p2 = project_simplex({2.0, -1.0});
    REQUIRE(p2[0] == Catch::Approx(1.0));
    REQUIRE(p2[1] == Catch::Approx(0.0).margin(1e-15));

    // a point already on the simplex is fixed
    auto p3 = project_simplex({0.25, 0.25, 0.5});
    REQUIRE(p3[0] == Catch::Approx(0.25).margin(1e-15));
    REQUIRE(p3[2] == Catch::Approx(0.5).margin(1e-15));

    // projections always land on the simplex
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> v(17);
        for (auto& x : v) x = dist(gen);
        auto p = project_simplex(v);
        double mass = 0.0;
        for (double x : p) { REQUIRE(x >= 0.0); mass += x; }
        REQUIRE(mass == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("circulant kernel application matches the dense product") {
    DiscreteEnergy model(ExternalField(weight_at(3.0)), 256);
    std::mt19937 gen(31);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> p(256);
    for (auto& x : p) x = dist(gen);
    auto fastv = model.kernel_apply(p);
    auto dense = model.kernel_apply_dense(p);
    double err = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) err = std::max(err, std::abs(fastv[i] - dense[i]));
    REQUIRE(err < 1e-10);

    // every nonzero-frequency eigenvalue must be strictly positive: that makes
    // the energy strictly convex on the simplex (where mass is fixed, so the
    // k=0 mode never enters a difference of feasible measures) and its
    // minimizer unique.  An indefinite kernel lets minimizers split into
    // degenerate alternating measures.
    std::vector<cdouble> spectrum(model.kernel_column().begin(), model.kernel_column().end());
    fft(spectrum);
    for (std::size_t k = 1; k < spectrum.size(); ++k) REQUIRE(spectrum[k].real() > 0.0);
}

TEST_CASE("flat field: uniform weights are the exact minimum") {
    ExternalField flat = TrigExponentialWeight({cdouble(0.0)});
    const std::size_t N = 64;
    OracleResult res = minimize_energy(flat, N);
    REQUIRE(res.converged);
    for (std::size_t i = 0; i < N; ++i)
        REQUIRE(res.measure.weights[i] == Catch::Approx(1.0 / double(N)).margin(1e-14));
    // uniform energy = (A_00 - log N)/N: the off-diagonal row sum collapses by
    // the identity Π_{j=1}^{N-1} 2 sin(πj/N) = N, and the diagonal is the
    // kernel's cell average (N/π)·Cl₂(π/N)
    const double analytic =
        (double(N) / pi * clausen2(pi / double(N)) - std::log(double(N))) / double(N);
    REQUIRE(res.energy == Catch::Approx(analytic).margin(1e-14));
    REQUIRE(res.frostman_gap < 1e-12);
}

TEST_CASE("grid refinement with extrapolation closes in on the continuum energy") {
    // for the flat field the continuum minimal energy is 0
    ExternalField flat = TrigExponentialWeight({cdouble(0.0)});
    RichardsonEnergy r = richardson_energy(flat, 512);
    REQUIRE(std::abs(r.fine) < std::abs(r.coarse));
    REQUIRE(std::abs(r.extrapolated) < std::abs(r.fine));
    REQUIRE(std::abs(r.extrapolated) < 2e-3);
}

TEST_CASE("energy decreases monotonically with the iteration budget") {
    ExternalField f = weight_at(2.0);
    auto run = [&](std::size_t iters) {
        OracleOptions opt;
        opt.max_iterations = iters;
        opt.tolerance = 0.0;  // never stop early
        return minimize_energy(f, 256, opt).energy;
    };
    const double e10 = run(10), e100 = run(100), e1000 = run(1000);
    REQUIRE(e10 >= e100 - 1e-14);
    REQUIRE(e100 >= e1000 - 1e-14);
    REQUIRE(e1000 < e10);  // it actually makes progress
}

TEST_CASE("minimizer agrees with the solved density for the borderline zero") {
    ExternalField f = weight_at(3.0);
    OracleResult res = minimize_energy(f, 1024);
    REQUIRE(res.converged);
    DensityProfile mu = full_circle_density(f, 2048);
    const double scale = double(res.measure.size()) / two_pi;
    double err = 0.0;
    for (std::size_t i = 0; i < res.measure.size(); ++i)
        err = std::max(err, std::abs(res.measure.weights[i] * scale - mu(res.measure.theta(i))));
    REQUIRE(err < 2e-2);
    REQUIRE(res.frostman_gap < 1e-2);
}

TEST_CASE("two starts reach the same measure") {
    ExternalField f = weight_at(2.0);
    const std::size_t N = 512;
    OracleResult a = minimize_energy(f, N);

    OracleOptions opt;
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> start(N);
    for (auto& x : start) x = dist(gen);
    opt.start = start;
    OracleResult b = minimize_energy(f, N, opt);

    double tv = 0.0;
    for (std::size_t i = 0; i < N; ++i) tv += std::abs(a.measure.weights[i] - b.measure.weights[i]);
    REQUIRE(0.5 * tv < 1e-3);
    REQUIRE(a.energy == Catch::Approx(b.energy).margin(1e-9));
}

TEST_CASE("support extraction from the minimizer") {
    ExternalField f = weight_at(2.0);
    OracleResult res = minimize_energy(f, 1024);
    ArcSet sup = extract_support(res.measure);
    REQUIRE(sup.size() == 1);
    const double step = two_pi / 1024.0;
    REQUIRE(std::abs(sup.arc(0).alpha - kAlpha2) < 2.0 * step);
    REQUIRE(std::abs(canonical_angle(sup.arc(0).beta) - kBeta2) < 2.0 * step);

    // thresholds beyond the maximum leave nothing; a flat measure is the full circle
    DiscreteMeasure uniform{std::vector<double>(256, 1.0 / 256.0)};
    REQUIRE(extract_support(uniform, 0.5).full_circle());
    REQUIRE_THROWS_AS(extract_support(uniform, 1.5), std::runtime_error);
}

TEST_CASE("point-mass p functional of the flat measure is constant") {
    ExternalField flat = TrigExponentialWeight({cdouble(0.0)});
    DiscreteMeasure uniform{std::vector<double>(256, 1.0 / 256.0)};
    PFunction p = compute_p(flat, uniform, 512);
    REQUIRE(p.positive_everywhere);
    for (double v : p.values)
        REQUIRE(v == Catch::Approx(1.0 / (4.0 * pi * pi)).margin(1e-12));
}

TEST_CASE("model guards its inputs") {
    ExternalField f = weight_at(2.0);
    REQUIRE_THROWS_AS(DiscreteEnergy(f, 100), std::invalid_argument);
    REQUIRE_THROWS_AS(DiscreteEnergy(f, 32), std::invalid_argument);
    OracleOptions opt;
    opt.start = std::vector<double>(10, 0.1);
    REQUIRE_THROWS_AS(minimize_energy(f, 256, opt), std::invalid_argument);
}
