#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "circeq/io.hpp"
#include "circeq/verify.hpp"

using namespace circeq;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    fs::path p = fs::current_path() / "io_test_artifacts";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("polynomial field parses from json") {
    auto j = nlohmann::json::parse(R"({"type":"polynomial",
        "terms":[{"zero":[2.0,0.5],"lambda":1.25},{"zero":[-3.0,0.0],"lambda":0.5}]})");
    ExternalField f = parse_field(j);
    const auto& w = std::get<PolynomialWeight>(f);
    REQUIRE(w.count() == 2);
    REQUIRE(w.terms()[0].zero == cdouble(2.0, 0.5));
    REQUIRE(w.terms()[0].lambda == 1.25);
    REQUIRE(w.lambda_sum() == Catch::Approx(1.75));
}

TEST_CASE("trig field parses from json") {
    auto j = nlohmann::json::parse(R"({"type":"trig",
        "coeffs":[{"m":0,"c":[0.1,0.0]},{"m":2,"c":[0.0,0.3]}]})");
    ExternalField f = parse_field(j);
    const auto& w = std::get<TrigExponentialWeight>(f);
    REQUIRE(w.degree() == 2);
    REQUIRE(w.coeff(0) == cdouble(0.1, 0.0));
    REQUIRE(w.coeff(1) == cdouble(0.0, 0.0));
    REQUIRE(w.coeff(2) == cdouble(0.0, 0.3));
}

TEST_CASE("sampled field reconstructs a band-limited potential") {
    auto fn = [](double t) { return std::cos(t) + 0.3 * std::sin(2.0 * t); };
    const std::size_t n = 256;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = fn(two_pi * double(i) / double(n));
    SampledField s = make_sampled_field(grid);
    for (double t : {0.123, 1.9, 4.4}) {
        REQUIRE(s.Q(t) == Catch::Approx(fn(t)).margin(1e-10));
        REQUIRE(s.Qprime(t) ==
                Catch::Approx(-std::sin(t) + 0.6 * std::cos(2.0 * t)).margin(1e-10));
        REQUIRE(s.Qsecond(t) ==
                Catch::Approx(-std::cos(t) - 1.2 * std::sin(2.0 * t)).margin(1e-9));
    }
    REQUIRE(s.twice_differentiable);
    REQUIRE_THROWS_AS(make_sampled_field(std::vector<double>(100, 0.0)), std::invalid_argument);
}

TEST_CASE("field parsing rejects malformed input") {
    REQUIRE_THROWS_AS(parse_field(nlohmann::json::parse(R"({"type":"magic"})")),
                      std::runtime_error);
    REQUIRE_THROWS_AS(parse_field(nlohmann::json::parse(R"({"type":"polynomial","terms":[]})")),
                      std::runtime_error);
    REQUIRE_THROWS_AS(
        parse_field(nlohmann::json::parse(R"({"type":"trig","coeffs":[{"m":-1,"c":[1,0]}]})")),
        std::runtime_error);
    REQUIRE_THROWS_AS(parse_field(nlohmann::json::parse(R"({"no_type":1})")), std::runtime_error);
}

TEST_CASE("arcs strings parse into pairs") {
    auto one = parse_arcs_string("1.0,2.0");
    REQUIRE(one.size() == 1);
    REQUIRE(one[0].first == 1.0);
    REQUIRE(one[0].second == 2.0);
    auto two = parse_arcs_string("0.5,1.5;3.0,4.25");
    REQUIRE(two.size() == 2);
    REQUIRE(two[1].first == 3.0);
    REQUIRE(two[1].second == 4.25);
    REQUIRE_THROWS_AS(parse_arcs_string("nonsense"), std::exception);
    REQUIRE_THROWS_AS(parse_arcs_string(""), std::runtime_error);
}

TEST_CASE("config files load with optional settings") {
    const fs::path dir = work_dir();
    spit(dir / "good.json", R"({"field":{"type":"polynomial",
        "terms":[{"zero":[2.0,0.0],"lambda":1.0}]},
        "grid":512,"tolerance":1e-9,"arcs":[[0.8,5.5]]})");
    ProblemConfig cfg = load_config((dir / "good.json").string());
    REQUIRE(std::holds_alternative<PolynomialWeight>(cfg.field));
    REQUIRE(cfg.grid.value() == 512);
    REQUIRE(cfg.tolerance.value() == 1e-9);
    REQUIRE(cfg.arcs.value().size() == 1);
    REQUIRE(cfg.arcs.value()[0].first == 0.8);

    spit(dir / "minimal.json", R"({"field":{"type":"trig","coeffs":[{"m":0,"c":[0,0]}]}})");
    ProblemConfig minimal = load_config((dir / "minimal.json").string());
    REQUIRE_FALSE(minimal.grid.has_value());
    REQUIRE_FALSE(minimal.arcs.has_value());

    REQUIRE_THROWS_AS(load_config((dir / "absent.json").string()), std::runtime_error);
    spit(dir / "broken.json", "{ not json");
    REQUIRE_THROWS_AS(load_config((dir / "broken.json").string()), std::runtime_error);
    spit(dir / "nofield.json", R"({"grid":512})");
    REQUIRE_THROWS_AS(load_config((dir / "nofield.json").string()), std::runtime_error);
}

TEST_CASE("seventeen significant digits round-trip") {
    REQUIRE(fmt17(pi) == "3.1415926535897931");
    REQUIRE(fmt17(1.0) == "1");
    REQUIRE(fmt17(-0.25) == "-0.25");
    for (double x : {1.0 / 3.0, std::sqrt(2.0), -7.25e-13, 123456.789}) {
        REQUIRE(std::stod(fmt17(x)) == x);
    }
}

TEST_CASE("solution artifacts are well-formed and reproducible") {
    const fs::path dir = work_dir();
    ExternalField f = PolynomialWeight({{cdouble(3.0, 0.0), 1.0}});
    EquilibriumSolution sol = solve_equilibrium(f);
    ResidualReport rep = full_report(f, sol);

    const fs::path p1 = dir / "solution1.json", p2 = dir / "solution2.json";
    write_solution_json(p1.string(), sol, rep);
    write_solution_json(p2.string(), sol, rep);
    REQUIRE(slurp(p1) == slurp(p2));  // byte-identical rewrite

    auto j = nlohmann::json::parse(slurp(p1));
    REQUIRE(j["pass"].get<bool>() == rep.pass);
    REQUIRE(j["solution"]["full_circle"].get<bool>());
    REQUIRE(j["solution"]["arcs"].is_array());
    REQUIRE(j["solution"]["F_w"].get<double>() == sol.robin);
    REQUIRE(j["solution"]["V_w"].get<double>() == sol.energy);
    REQUIRE(j["solution"]["capacity"].get<double>() == sol.capacity);
    REQUIRE(j["residuals"]["mass_gap"].get<double>() == rep.mass_gap);

    const fs::path csv = dir / "density.csv";
    write_density_csv(csv.string(), sol.density);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "theta,f");
    std::string row;
    std::getline(in, row);
    REQUIRE(row.find(',') != std::string::npos);
}

TEST_CASE("arc supports serialize with canonical endpoints") {
    const fs::path dir = work_dir();
    ExternalField f = PolynomialWeight({{cdouble(2.0, 0.0), 1.0}});
    EquilibriumSolution sol = solve_equilibrium(f);
    ResidualReport rep = full_report(f, sol);
    const fs::path p = dir / "solution_arc.json";
    write_solution_json(p.string(), sol, rep);
    auto j = nlohmann::json::parse(slurp(p));
    REQUIRE_FALSE(j["solution"]["full_circle"].get<bool>());
    REQUIRE(j["solution"]["arcs"].size() == 1);
    const double a = j["solution"]["arcs"][0][0].get<double>();
    const double b = j["solution"]["arcs"][0][1].get<double>();
    REQUIRE(a >= 0.0);
    REQUIRE(a < two_pi);
    REQUIRE(b > a);
    REQUIRE(j["residuals"]["side_conditions_sup"].get<double>() == rep.side_conditions_sup);
}

TEST_CASE("oracle artifacts are well-formed") {
    const fs::path dir = work_dir();
    ExternalField f = TrigExponentialWeight({cdouble(0.0)});
    OracleResult res = minimize_energy(f, 256);
    ArcSet sup = extract_support(res.measure);

    const fs::path mj = dir / "oracle.json";
    write_oracle_json(mj.string(), res, sup);
    auto j = nlohmann::json::parse(slurp(mj));
    REQUIRE(j["grid"].get<std::size_t>() == 256);
    REQUIRE(j["converged"].get<bool>());
    REQUIRE(j["full_circle"].get<bool>());

    const fs::path mc = dir / "measure.csv";
    write_measure_csv(mc.string(), res.measure);
    std::ifstream in(mc);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "theta,weight");
}
