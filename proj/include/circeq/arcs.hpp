#pragma once

// Angular arithmetic on the unit circle and arc-union supports.
//
// An ArcSet stores K disjoint closed arcs {e^{it} : t in [alpha_k, beta_k]} in the
// canonical ordering alpha_1 < beta_1 < ... < alpha_K < beta_K with beta_K - alpha_1 < 2*pi,
// so the whole union fits in one fundamental window (the last arc may pass through
// angle 0, in which case beta_K > 2*pi).  K = 0 denotes the full circle.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace circeq {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Wrap an angle to [0, 2*pi).
inline double canonical_angle(double theta) {
    double t = std::fmod(theta, two_pi);
    if (t < 0.0) t += two_pi;
    if (t >= two_pi) t = 0.0;  // guards fmod rounding at the seam
    return t;
}

/// Positive angular difference b - a wrapped to (0, 2*pi]; 0 maps to 2*pi.
inline double forward_gap(double a, double b) {
    double d = std::fmod(b - a, two_pi);
    if (d < 0.0) d += two_pi;
    if (d == 0.0) d = two_pi;
    return d;
}

struct Arc {
    double alpha = 0.0;  // start angle, in [0, 2*pi)
    double beta = 0.0;   // end angle, in (alpha, alpha + 2*pi)

    double length() const { return beta - alpha; }
    double midpoint() const { return 0.5 * (alpha + beta); }
    double halfwidth() const { return 0.5 * (beta - alpha); }

    /// True if the canonical angle t lies on the closed arc.
    bool contains(double t) const {
        double u = canonical_angle(t);
        if (u >= alpha && u <= beta) return true;
        u += two_pi;  // the arc may extend past 2*pi
        return u >= alpha && u <= beta;
    }
};

class ArcSet {
  public:
    /// Full circle (no endpoints).
    ArcSet() = default;

    /// Build from endpoint pairs (a_k, b_k), each arc running counterclockwise
    /// from a_k to b_k.  Pairs may come in any order and any angle branch.
    explicit ArcSet(const std::vector<std::pair<double, double>>& endpoint_pairs) {
        for (auto [a, b] : endpoint_pairs) {
            Arc arc;
            arc.alpha = canonical_angle(a);
            double len = forward_gap(a, b);
            if (len >= two_pi - 1e-12)
                throw std::invalid_argument("arc spans the whole circle; use the full-circle ArcSet");
            arc.beta = arc.alpha + len;
            arcs_.push_back(arc);
        }
        if (arcs_.empty()) return;
        std::sort(arcs_.begin(), arcs_.end(),
                  [](const Arc& x, const Arc& y) { return x.alpha < y.alpha; });
        // Disjointness, including the wrap from the last arc back to the first.
        for (std::size_t k = 0; k + 1 < arcs_.size(); ++k)
            if (arcs_[k + 1].alpha <= arcs_[k].beta)
                throw std::invalid_argument("arcs overlap near angle " + std::to_string(arcs_[k].beta));
        if (arcs_.size() >= 1 && arcs_.back().beta - two_pi >= arcs_.front().alpha &&
            arcs_.back().beta > two_pi)
            throw std::invalid_argument("last arc wraps onto the first");
        if (arcs_.size() == 1 && arcs_[0].beta > two_pi + arcs_[0].alpha)
            throw std::invalid_argument("degenerate arc");
    }

    bool full_circle() const { return arcs_.empty(); }
    std::size_t size() const { return arcs_.size(); }
    const std::vector<Arc>& arcs() const { return arcs_; }
    const Arc& arc(std::size_t k) const { return arcs_.at(k); }

    /// Sum of arc lengths (2*pi for the full circle).
    double length() const {
        if (full_circle()) return two_pi;
        double s = 0.0;
        for (const Arc& a : arcs_) s += a.length();
        return s;
    }

    bool contains(double theta) const {
        if (full_circle()) return true;
        return arc_index(theta).has_value();
    }

    /// Index of the arc containing theta, if any.
    std::optional<std::size_t> arc_index(double theta) const {
        for (std::size_t k = 0; k < arcs_.size(); ++k)
            if (arcs_[k].contains(theta)) return k;
        return std::nullopt;
    }

    /// Complementary arcs (beta_k, alpha_{k+1}), the last one closing through
    /// alpha_1 + 2*pi.  Empty for the full circle.
    std::vector<Arc> gaps() const {
        std::vector<Arc> g;
        for (std::size_t k = 0; k < arcs_.size(); ++k) {
            const Arc& cur = arcs_[k];
            double next_alpha = (k + 1 < arcs_.size()) ? arcs_[k + 1].alpha
                                                       : arcs_.front().alpha + two_pi;
            double b = cur.beta;
            while (next_alpha <= b) next_alpha += two_pi;  // wrap arc ends past 2*pi
            g.push_back(Arc{b, next_alpha});
        }
        return g;
    }

    /// All endpoint angles a_1, b_1, ..., a_K, b_K (canonicalized).
    std::vector<double> endpoint_angles() const {
        std::vector<double> e;
        for (const Arc& a : arcs_) {
            e.push_back(canonical_angle(a.alpha));
            e.push_back(canonical_angle(a.beta));
        }
        return e;
    }

    /// Euclidean distance from z to the closed arc union (infinity for the full circle
    /// never happens: returns distance to the circle itself).
    double distance(std::complex<double> z) const {
        if (full_circle()) return std::abs(std::abs(z) - 1.0);
        double best = std::numeric_limits<double>::infinity();
        double th = canonical_angle(std::arg(z));
        for (const Arc& a : arcs_) {
            if (a.contains(th)) {
                best = std::min(best, std::abs(std::abs(z) - 1.0));
            } else {
                best = std::min(best, std::abs(z - std::polar(1.0, a.alpha)));
                best = std::min(best, std::abs(z - std::polar(1.0, a.beta)));
            }
        }
        return best;
    }

    /// Smallest angular distance from theta to any endpoint.
    double endpoint_distance(double theta) const {
        double best = std::numeric_limits<double>::infinity();
        for (const Arc& a : arcs_)
            for (double e : {a.alpha, a.beta}) {
                double d = forward_gap(e, theta);
                best = std::min({best, d, two_pi - d});
            }
        return best;
    }

  private:
    std::vector<Arc> arcs_;
};

}  // namespace circeq
