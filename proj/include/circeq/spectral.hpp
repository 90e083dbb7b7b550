#pragma once

// Power-of-two FFT and the spectral conjugate-function (circular Hilbert) transform.
//
// Convention: for u(θ) = Σ û_m e^{imθ}, the conjugate function is
//   ũ(θ) = (1/2π) PV ∫ u(t) cot((θ-t)/2) dt = Σ (-i·sgn m) û_m e^{imθ},
// so cos(mθ) -> sin(mθ) and sin(mθ) -> -cos(mθ); the mean is dropped (ũ has zero mean)
// and the unsigned Nyquist mode of an even-length grid is zeroed.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "arcs.hpp"

namespace circeq {

using cdouble = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

/// Twiddle table e^{-2πi j/n}, j = 0..n/2-1, cached per size.
inline const std::vector<cdouble>& twiddles(std::size_t n) {
    static std::vector<std::vector<cdouble>> cache(32);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    auto& tab = cache[log2n];
    if (tab.size() != n / 2) {
        tab.resize(n / 2);
        for (std::size_t j = 0; j < n / 2; ++j)
            tab[j] = std::polar(1.0, -two_pi * double(j) / double(n));
    }
    return tab;
}

}  // namespace detail

/// In-place radix-2 FFT.  Forward: X_k = Σ_n x_n e^{-2πi nk/N}; inverse includes the 1/N.
inline void fft(std::vector<cdouble>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
    if (n == 1) return;
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& tw = detail::twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                cdouble w = tw[j * stride];
                if (inverse) w = std::conj(w);
                cdouble u = a[i + j];
                cdouble v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
    if (inverse) {
        const double s = 1.0 / double(n);
        for (auto& x : a) x *= s;
    }
}

/// Discrete Fourier transform of real samples on the uniform grid θ_i = 2πi/N.
inline std::vector<cdouble> fft_real(const std::vector<double>& u) {
    std::vector<cdouble> a(u.begin(), u.end());
    fft(a);
    return a;
}

/// Spectral conjugate function on a uniform power-of-two grid (N >= 8).
/// Mode multiplier -i·sgn(m); mean and Nyquist modes are zeroed.
inline std::vector<double> conjugate_function(const std::vector<double>& u) {
    const std::size_t n = u.size();
    if (!is_pow2(n) || n < 8)
        throw std::invalid_argument("conjugate_function: grid size must be a power of two, at least 8");
    std::vector<cdouble> a(u.begin(), u.end());
    fft(a);
    a[0] = 0.0;
    a[n / 2] = 0.0;
    const cdouble mi(0.0, -1.0);
    for (std::size_t k = 1; k < n / 2; ++k) {
        a[k] *= mi;        // positive frequency: multiply by -i
        a[n - k] *= -mi;   // negative frequency: multiply by +i
    }
    fft(a, true);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i].real();
    return out;
}

/// Mean of samples (the dropped 0-mode), handy next to conjugate_function.
inline double grid_mean(const std::vector<double>& u) {
    double s = 0.0;
    for (double x : u) s += x;
    return s / double(u.size());
}

}  // namespace circeq
