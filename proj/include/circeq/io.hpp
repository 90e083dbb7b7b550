#pragma once

// Configuration parsing and result serialization.
//
// Configs are JSON with a "field" object and optional solver knobs.  Results
// are written with a deliberately small hand-rolled emitter: fixed key order
// and %.17g floats, so identical inputs produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "arcs.hpp"
#include "density.hpp"
#include "field.hpp"
#include "oracle.hpp"
#include "spectral.hpp"
#include "verify.hpp"

namespace circeq {

// ---------------------------------------------------------------------------
// Field and config parsing
// ---------------------------------------------------------------------------

namespace detail {

inline cdouble parse_complex(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw std::runtime_error(std::string("config: ") + what + " must be a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Build a trigonometric-polynomial interpolant field from uniform Q samples.
inline SampledField make_sampled_field(const std::vector<double>& q_values) {
    const std::size_t n = q_values.size();
    if (!is_pow2(n) || n < 8)
        throw std::invalid_argument("sampled field: sample count must be a power of two, at least 8");
    auto fc = std::make_shared<std::vector<cdouble>>(fft_real(q_values));
    const auto series = [fc, n](double theta, int order) {
        // order 0: Q, 1: Q', 2: Q'' of the band-limited interpolant
        double s = order == 0 ? (*fc)[0].real() / double(n) : 0.0;
        for (std::size_t k = 1; k <= n / 2; ++k) {
            const double scale = (k == n / 2 ? 1.0 : 2.0) / double(n);
            cdouble c = (*fc)[k] * std::polar(1.0, double(k) * theta);
            for (int d = 0; d < order; ++d) c *= cdouble(0.0, double(k));
            s += scale * c.real();
        }
        return s;
    };
    SampledField f;
    f.Q = [series](double t) { return series(t, 0); };
    f.Qprime = [series](double t) { return series(t, 1); };
    f.Qsecond = [series](double t) { return series(t, 2); };
    f.twice_differentiable = true;
    return f;
}

inline ExternalField parse_field(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw std::runtime_error("config: field must be an object with a \"type\" string");
    const std::string type = j["type"].get<std::string>();
    if (type == "polynomial") {
        if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty())
            throw std::runtime_error("config: polynomial field needs a non-empty \"terms\" array");
        std::vector<PolynomialTerm> terms;
        for (const auto& t : j["terms"]) {
            if (!t.is_object() || !t.contains("zero") || !t.contains("lambda"))
                throw std::runtime_error("config: each polynomial term needs \"zero\" and \"lambda\"");
            terms.push_back({detail::parse_complex(t["zero"], "zero"), t["lambda"].get<double>()});
        }
        return PolynomialWeight(std::move(terms));
    }
    if (type == "trig") {
        if (!j.contains("coeffs") || !j["coeffs"].is_array())
            throw std::runtime_error("config: trig field needs a \"coeffs\" array");
        std::vector<cdouble> c;
        for (const auto& t : j["coeffs"]) {
            if (!t.is_object() || !t.contains("m") || !t.contains("c"))
                throw std::runtime_error("config: each trig coefficient needs \"m\" and \"c\"");
            const int m = t["m"].get<int>();
            if (m < 0)
                throw std::runtime_error("config: trig coefficients are given for m >= 0 "
                                         "(negative m follows by conjugation)");
            if (std::size_t(m) >= c.size()) c.resize(std::size_t(m) + 1, 0.0);
            c[std::size_t(m)] = detail::parse_complex(t["c"], "c");
        }
        if (c.empty()) c.push_back(0.0);
        return TrigExponentialWeight(std::move(c));
    }
    if (type == "sampled") {
        if (!j.contains("grid") || !j["grid"].is_array())
            throw std::runtime_error("config: sampled field needs a \"grid\" array of Q values");
        std::vector<double> q;
        for (const auto& v : j["grid"]) {
            if (!v.is_number()) throw std::runtime_error("config: sampled grid values must be numbers");
            q.push_back(v.get<double>());
        }
        return make_sampled_field(q);
    }
    throw std::runtime_error("config: unknown field type \"" + type +
                             "\" (expected polynomial, trig, or sampled)");
}

struct ProblemConfig {
    ExternalField field;
    std::optional<std::size_t> grid;
    std::optional<double> tolerance;
    std::optional<std::vector<std::pair<double, double>>> arcs;
};

/// "a1,b1;a2,b2" → endpoint pairs.
inline std::vector<std::pair<double, double>> parse_arcs_string(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(s);
    std::string piece;
    while (std::getline(ss, piece, ';')) {
        const auto comma = piece.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("arcs: expected \"start,end\" pairs separated by ';'");
        const double a = std::stod(piece.substr(0, comma));
        const double b = std::stod(piece.substr(comma + 1));
        out.emplace_back(a, b);
    }
    if (out.empty()) throw std::runtime_error("arcs: no pairs given");
    return out;
}

inline ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw std::runtime_error("config: invalid JSON in " + path + ": " + ex.what());
    }
    if (!j.is_object() || !j.contains("field"))
        throw std::runtime_error("config: top-level object with a \"field\" entry required");
    ProblemConfig cfg{parse_field(j["field"]), std::nullopt, std::nullopt, std::nullopt};
    if (j.contains("grid")) {
        if (!j["grid"].is_number_unsigned()) throw std::runtime_error("config: grid must be a positive integer");
        cfg.grid = j["grid"].get<std::size_t>();
    }
    if (j.contains("tolerance")) {
        if (!j["tolerance"].is_number()) throw std::runtime_error("config: tolerance must be a number");
        cfg.tolerance = j["tolerance"].get<double>();
    }
    if (j.contains("arcs")) {
        if (!j["arcs"].is_array()) throw std::runtime_error("config: arcs must be an array of [start, end]");
        std::vector<std::pair<double, double>> arcs;
        for (const auto& a : j["arcs"]) {
            if (!a.is_array() || a.size() != 2)
                throw std::runtime_error("config: each arc must be a [start, end] pair");
            arcs.emplace_back(a[0].get<double>(), a[1].get<double>());
        }
        cfg.arcs = std::move(arcs);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Deterministic writers
// ---------------------------------------------------------------------------

/// %.17g: every double round-trips and identical inputs give identical bytes.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace detail {

/// Minimal JSON emitter with caller-controlled key order.
class JsonOut {
public:
    JsonOut& begin_object() { sep(); raw("{"); first_.push_back(true); return *this; }
    JsonOut& end_object() { raw("}"); first_.pop_back(); return *this; }
    JsonOut& begin_array() { sep(); raw("["); first_.push_back(true); return *this; }
    JsonOut& end_array() { raw("]"); first_.pop_back(); return *this; }
    JsonOut& key(const std::string& k) { sep(); raw("\"" + k + "\":"); first_.back() = true; return *this; }
    JsonOut& value(double v) { sep(); raw(fmt17(v)); return *this; }
    JsonOut& value(std::size_t v) { sep(); raw(std::to_string(v)); return *this; }
    JsonOut& value(bool v) { sep(); raw(v ? "true" : "false"); return *this; }
    JsonOut& value(const std::string& s) { sep(); raw("\"" + s + "\""); return *this; }
    const std::string& str() const { return out_; }

private:
    void sep() {
        if (!first_.empty() && !first_.back()) raw(",");
        if (!first_.empty()) first_.back() = false;
    }
    void raw(const std::string& s) { out_ += s; }
    std::string out_;
    std::vector<bool> first_;
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline void emit_arcs(JsonOut& j, const ArcSet& support) {
    j.begin_array();
    if (!support.full_circle()) {
        for (std::size_t k = 0; k < support.size(); ++k) {
            j.begin_array();
            j.value(canonical_angle(support.arc(k).alpha));
            j.value(canonical_angle(support.arc(k).alpha) + support.arc(k).length());
            j.end_array();
        }
    }
    j.end_array();
}

}  // namespace detail

/// solution.json: support, constants, and the residual report.
inline void write_solution_json(const std::string& path, const EquilibriumSolution& sol,
                                const ResidualReport& rep) {
    detail::JsonOut j;
    j.begin_object();
    j.key("solution").begin_object();
    j.key("full_circle").value(sol.support.full_circle());
    j.key("arcs");
    detail::emit_arcs(j, sol.support);
    j.key("F_w").value(sol.robin);
    j.key("V_w").value(sol.energy);
    j.key("capacity").value(sol.capacity);
    j.key("field_integral").value(sol.field_integral);
    j.key("mass").value(sol.density.mass());
    j.end_object();
    j.key("residuals").begin_object();
    j.key("mass_gap").value(rep.mass_gap);
    j.key("frostman_equality_sup").value(rep.frostman_equality_sup);
    j.key("frostman_inequality_violation").value(rep.frostman_inequality_violation);
    j.key("density_equation_sup").value(rep.density_equation_sup);
    j.key("conjugate_identity_sup").value(rep.conjugate_identity_sup);
    j.key("imag_part_sup").value(rep.imag_part_sup);
    j.key("side_conditions_sup").value(rep.side_conditions_sup);
    j.key("support_min_density").value(rep.support_min_density);
    j.end_object();
    j.key("pass").value(rep.pass);
    j.end_object();
    detail::write_text(path, j.str() + "\n");
}

/// density.csv: "theta,f" rows over all stored samples, ascending.
inline void write_density_csv(const std::string& path, const DensityProfile& profile) {
    std::string text = "theta,f\n";
    for (const auto& [theta, f] : profile.all_samples())
        text += fmt17(theta) + "," + fmt17(f) + "\n";
    detail::write_text(path, text);
}

/// measure.csv: "theta,weight" rows for the oracle grid.
inline void write_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
    std::string text = "theta,weight\n";
    for (std::size_t i = 0; i < mu.size(); ++i)
        text += fmt17(mu.theta(i)) + "," + fmt17(mu.weights[i]) + "\n";
    detail::write_text(path, text);
}

/// oracle_summary.json: discrete energy, Robin constant, support runs.
inline void write_oracle_json(const std::string& path, const OracleResult& res,
                              const ArcSet& support) {
    detail::JsonOut j;
    j.begin_object();
    j.key("grid").value(res.measure.size());
    j.key("V_w").value(res.energy);
    j.key("F_w").value(res.robin);
    j.key("capacity").value(std::exp(-res.energy));
    j.key("frostman_gap").value(res.frostman_gap);
    j.key("iterations").value(res.iterations);
    j.key("converged").value(res.converged);
    j.key("full_circle").value(support.full_circle());
    j.key("arcs");
    detail::emit_arcs(j, support);
    j.end_object();
    detail::write_text(path, j.str() + "\n");
}

}  // namespace circeq
